//! Brute-force reference for the tight error box.
//!
//! The oracles rerun the identifier over a short data prefix, build the
//! convolution matrix `M(t) = [Φ(t,0), Φ(t,1)G(1), …, Φ(t,t)G(t)]` with every
//! `Φ(t,k)` formed from scratch, and take the componentwise extremes of
//! `M(t) z` over the vertices of the input box. Nothing here shares code
//! with the incremental radius tracker.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::interval::IntervalVector;
use crate::ltv::DriftBounds;
use crate::rls::{RlsConfig, RlsState};

/// Largest box dimension enumerated vertex by vertex.
pub const MAX_ENUMERATION_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// Visit all `2^d` vertices.
    Enumerate,
    /// Per output row, evaluate the single vertex picked by the row's sign
    /// pattern. Exact for linear maps.
    SignPattern,
}

/// Result of an oracle run.
#[derive(Debug, Clone)]
pub struct OracleBox {
    /// Box for the RLS error `θ̃(t) = θ(t) - θ°(t)`.
    pub error: IntervalVector,
    /// RLS point estimate at the end of the prefix.
    pub point: DVector<f64>,
}

impl OracleBox {
    /// Box for the parameter itself, `θ(t) - error`.
    pub fn parameter_box(&self) -> IntervalVector {
        IntervalVector::from_bounds(&self.point - self.error.upper(), &self.point - self.error.lower())
            .expect("reflection of a valid box is valid")
    }
}

struct Trajectory {
    a: Vec<DMatrix<f64>>,
    q: Vec<DVector<f64>>,
    theta0: DVector<f64>,
    theta: DVector<f64>,
}

fn run_identifier(regressors: &[DVector<f64>], outputs: &[f64], rls: &RlsConfig) -> Result<Trajectory> {
    check_dim("oracle outputs", regressors.len(), outputs.len())?;
    let mut state = RlsState::new(rls)?;
    let mut a = Vec::with_capacity(regressors.len());
    let mut q = Vec::with_capacity(regressors.len());
    for (x, &y) in regressors.iter().zip(outputs) {
        state.step(x, y)?;
        a.push(state.last_a.clone());
        q.push(state.last_q.clone());
    }
    Ok(Trajectory {
        a,
        q,
        theta0: rls.theta0.clone(),
        theta: state.theta,
    })
}

/// `Φ(t,k) = A(t) ⋯ A(k+1)` (1-based times, `a[j-1] = A(j)`).
fn transition(a: &[DMatrix<f64>], t: usize, k: usize, n: usize) -> DMatrix<f64> {
    let mut phi = DMatrix::identity(n, n);
    for j in (k + 1)..=t {
        phi = &a[j - 1] * phi;
    }
    phi
}

/// Extremes of `M z` over the box `z in [lo, hi]`.
pub fn linear_image_extremes(
    m: &DMatrix<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    method: OracleMethod,
) -> Result<IntervalVector> {
    check_dim("oracle box", m.ncols(), lo.len())?;
    check_dim("oracle box", lo.len(), hi.len())?;
    let d = lo.len();
    let rows = m.nrows();
    let mut min = DVector::from_element(rows, f64::INFINITY);
    let mut max = DVector::from_element(rows, f64::NEG_INFINITY);
    match method {
        OracleMethod::Enumerate => {
            if d > MAX_ENUMERATION_DIM {
                return Err(Error::HorizonTooLarge(format!(
                    "vertex enumeration over {d} dimensions exceeds {MAX_ENUMERATION_DIM}"
                )));
            }
            let mut z = lo.clone();
            let mut img = DVector::zeros(rows);
            for mask in 0u64..(1u64 << d) {
                for j in 0..d {
                    z[j] = if mask >> j & 1 == 1 { hi[j] } else { lo[j] };
                }
                img.gemv(1.0, m, &z, 0.0);
                for i in 0..rows {
                    min[i] = min[i].min(img[i]);
                    max[i] = max[i].max(img[i]);
                }
            }
        }
        OracleMethod::SignPattern => {
            for i in 0..rows {
                let row = m.row(i);
                let upper: f64 = (0..d).map(|j| row[j] * if row[j] >= 0.0 { hi[j] } else { lo[j] }).sum();
                let lower: f64 = (0..d).map(|j| row[j] * if row[j] >= 0.0 { lo[j] } else { hi[j] }).sum();
                min[i] = lower;
                max[i] = upper;
            }
        }
    }
    IntervalVector::from_bounds(min, max)
}

fn initial_error_box(theta0: &DVector<f64>, prior: &IntervalVector) -> (DVector<f64>, DVector<f64>) {
    // θ̃(0) = θ(0) - θ° with θ° in the prior
    (theta0 - prior.upper(), theta0 - prior.lower())
}

/// Tight error box after the given prefix for the constant-parameter model.
///
/// Requires `n + t <= 20` so that every vertex can be visited.
pub fn vertex_oracle(
    regressors: &[DVector<f64>],
    outputs: &[f64],
    noise: &[IntervalVector],
    prior: &IntervalVector,
    rls: &RlsConfig,
) -> Result<OracleBox> {
    let n = rls.dim();
    let t = regressors.len();
    check_dim("oracle noise", t, noise.len())?;
    check_dim("oracle prior", n, prior.dim())?;
    let d = n + t;
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::HorizonTooLarge(format!(
            "n + t = {d} exceeds {MAX_ENUMERATION_DIM}"
        )));
    }
    let traj = run_identifier(regressors, outputs, rls)?;

    let mut m = DMatrix::zeros(n, d);
    m.columns_mut(0, n).copy_from(&transition(&traj.a, t, 0, n));
    for k in 1..=t {
        m.set_column(n + k - 1, &(transition(&traj.a, t, k, n) * &traj.q[k - 1]));
    }
    let (e_lo, e_hi) = initial_error_box(&traj.theta0, prior);
    let mut lo = DVector::zeros(d);
    let mut hi = DVector::zeros(d);
    lo.rows_mut(0, n).copy_from(&e_lo);
    hi.rows_mut(0, n).copy_from(&e_hi);
    for (k, v) in noise.iter().enumerate() {
        check_dim("oracle noise bound", 1, v.dim())?;
        lo[n + k] = v.lower()[0];
        hi[n + k] = v.upper()[0];
    }
    Ok(OracleBox {
        error: linear_image_extremes(&m, &lo, &hi, OracleMethod::Enumerate)?,
        point: traj.theta,
    })
}

/// Tight error box for the drifting-parameter model with augmented inputs
/// `[v(k); δ(k)]` and gains `B(k) = [q(k) | -A(k)]`.
///
/// Enumerates vertices while `n + t(n+1) <= 20`, otherwise falls back to the
/// per-row sign pattern.
pub fn ltv_vertex_oracle(
    regressors: &[DVector<f64>],
    outputs: &[f64],
    noise: &[IntervalVector],
    drift: &[DriftBounds],
    prior: &IntervalVector,
    rls: &RlsConfig,
) -> Result<OracleBox> {
    let n = rls.dim();
    let t = regressors.len();
    let d = n + t * (n + 1);
    let method = if d <= MAX_ENUMERATION_DIM {
        OracleMethod::Enumerate
    } else {
        OracleMethod::SignPattern
    };
    ltv_vertex_oracle_with(regressors, outputs, noise, drift, prior, rls, method)
}

pub fn ltv_vertex_oracle_with(
    regressors: &[DVector<f64>],
    outputs: &[f64],
    noise: &[IntervalVector],
    drift: &[DriftBounds],
    prior: &IntervalVector,
    rls: &RlsConfig,
    method: OracleMethod,
) -> Result<OracleBox> {
    let n = rls.dim();
    let t = regressors.len();
    check_dim("oracle noise", t, noise.len())?;
    check_dim("oracle drift", t, drift.len())?;
    check_dim("oracle prior", n, prior.dim())?;
    let traj = run_identifier(regressors, outputs, rls)?;
    let block = n + 1;
    let d = n + t * block;

    let mut m = DMatrix::zeros(n, d);
    m.columns_mut(0, n).copy_from(&transition(&traj.a, t, 0, n));
    for k in 1..=t {
        let phi = transition(&traj.a, t, k, n);
        let mut b = DMatrix::zeros(n, block);
        b.set_column(0, &traj.q[k - 1]);
        b.columns_mut(1, n).copy_from(&(-&traj.a[k - 1]));
        m.columns_mut(n + (k - 1) * block, block).copy_from(&(phi * b));
    }
    let (e_lo, e_hi) = initial_error_box(&traj.theta0, prior);
    let mut lo = DVector::zeros(d);
    let mut hi = DVector::zeros(d);
    lo.rows_mut(0, n).copy_from(&e_lo);
    hi.rows_mut(0, n).copy_from(&e_hi);
    for k in 0..t {
        check_dim("oracle noise bound", 1, noise[k].dim())?;
        check_dim("oracle drift bound", n, drift[k].dim())?;
        let off = n + k * block;
        lo[off] = noise[k].lower()[0];
        hi[off] = noise[k].upper()[0];
        let db = drift[k].to_interval();
        lo.rows_mut(off + 1, n).copy_from(db.lower());
        hi.rows_mut(off + 1, n).copy_from(db.upper());
    }
    Ok(OracleBox {
        error: linear_image_extremes(&m, &lo, &hi, method)?,
        point: traj.theta,
    })
}
