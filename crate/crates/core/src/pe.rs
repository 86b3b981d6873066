//! Excitation and stability diagnostics for the RLS error dynamics.
//!
//! A regressor sequence is persistently exciting over horizon `T` when every
//! window Gram `Σ_{k=t+1..t+T} x(k)x(k)ᵀ` lies between `αI` and `βI`. From
//! `(α, β, T)` and the identifier settings follow the bounds
//! `γ1 I ⪯ P⁻¹(t) ⪯ γ2 I`, the decay constants `‖Φ(t,t0)‖_F <= c ρ^(t-t0)`,
//! the truncation threshold `m*` and an asymptotic radius bound.
//!
//! The scans here certify excitation only over the data they are given.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rls::{RlsConfig, RlsState};

/// Default window: `2n`.
pub fn default_window(n: usize) -> usize {
    2 * n
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "forgetting factor must lie in (0, 1), got {lambda}"
        )))
    }
}

fn gram_extremes(gram: DMatrix<f64>) -> (f64, f64) {
    let eig = gram.symmetric_eigen().eigenvalues;
    let max = eig.max().max(0.0);
    let mut min = eig.min();
    // rank-deficient windows come back as ±ε·max
    let floor = eig.len() as f64 * f64::EPSILON * max;
    if min <= floor {
        min = 0.0;
    }
    (min, max)
}

/// Excitation levels `(α, β)`: min / max eigenvalue over all length-`window` Grams.
pub fn pe_levels(regressors: &[DVector<f64>], window: usize) -> Result<(f64, f64)> {
    if window == 0 {
        return Err(Error::InvalidConfig("PE window must be at least 1".into()));
    }
    if regressors.len() < window {
        return Err(Error::SequenceTooShort {
            len: regressors.len(),
            window,
        });
    }
    let n = regressors[0].len();
    let mut alpha = f64::INFINITY;
    let mut beta: f64 = 0.0;
    for w in regressors.windows(window) {
        let mut gram = DMatrix::zeros(n, n);
        for x in w {
            gram.ger(1.0, x, x, 1.0);
        }
        let (lo, hi) = gram_extremes(gram);
        alpha = alpha.min(lo);
        beta = beta.max(hi);
    }
    Ok((alpha, beta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBounds {
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// Uniform bounds `γ1 I ⪯ P⁻¹(t) ⪯ γ2 I` for PE data.
///
/// `δ1`, `δ2` are the extreme eigenvalues of `P⁻¹(t)` for `t = 0..T-1`,
/// advanced with `P⁻¹(t) = λ P⁻¹(t-1) + x(t)x(t)ᵀ` (`regressors[0]` is `x(1)`).
pub fn gamma_bounds(
    regressors: &[DVector<f64>],
    window: usize,
    lambda: f64,
    p0: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
) -> Result<GammaBounds> {
    check_lambda(lambda)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::NotPersistentlyExciting { alpha });
    }
    if window == 0 {
        return Err(Error::InvalidConfig("PE window must be at least 1".into()));
    }
    if regressors.len() + 1 < window {
        return Err(Error::SequenceTooShort {
            len: regressors.len(),
            window,
        });
    }
    let mut info = p0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidConfig("P0 is singular".into()))?;
    let (lo0, hi0) = gram_extremes(info.clone());
    let sigma_max_0 = hi0;
    let (mut delta1, mut delta2) = (lo0, hi0);
    for x in regressors.iter().take(window - 1) {
        info = &info * lambda;
        info.ger(1.0, x, x, 1.0);
        let (lo, hi) = gram_extremes(info.clone());
        delta1 = delta1.min(lo);
        delta2 = delta2.max(hi);
    }
    let t = window as i32;
    let gamma1 = delta1.min(alpha * lambda.powi(2 * t - 1));
    let gamma2 = delta2.max(lambda.powi(t) * sigma_max_0 + beta * (2.0 - lambda) / (1.0 - lambda));
    Ok(GammaBounds {
        gamma1,
        gamma2,
        delta1,
        delta2,
    })
}

/// `(c, ρ) = ((n γ2 / γ1)^{1/2}, λ^{1/2})`.
pub fn contraction_constants(n: usize, gamma1: f64, gamma2: f64, lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if gamma1.is_nan() || gamma1 <= 0.0 {
        return Err(Error::InvalidConfig(format!("gamma1 must be positive, got {gamma1}")));
    }
    Ok(((n as f64 * gamma2 / gamma1).sqrt(), lambda.sqrt()))
}

/// `m* = -ln(n γ2 / γ1) / ln λ`.
///
/// Returned as a real; a horizon with guaranteed boundedness is any integer
/// strictly above it, e.g. `ceil(m*) + 1`.
pub fn m_star(n: usize, gamma1: f64, gamma2: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if gamma1.is_nan() || gamma1 <= 0.0 {
        return Err(Error::InvalidConfig(format!("gamma1 must be positive, got {gamma1}")));
    }
    let m = -(n as f64 * gamma2 / gamma1).ln() / lambda.ln();
    // -0.0 when the ratio is exactly one
    Ok(m + 0.0)
}

/// Right-hand side of the ISS bound on `‖θ̃(t)‖²`:
/// `(1/γ1) [λ^t σmax ‖θ̃(0)‖² + Σ_{k=1..t} λ^{t-k} v(k)²]`.
///
/// `noise[k-1]` is `v(k)`; only the first `t` entries are used.
pub fn iss_envelope(
    t: usize,
    lambda: f64,
    sigma_max_p0_inv: f64,
    gamma1: f64,
    theta_err0_norm: f64,
    noise: &[f64],
) -> f64 {
    let mut driven = 0.0;
    for &v in noise.iter().take(t) {
        driven = lambda * driven + v * v;
    }
    (lambda.powi(t as i32) * sigma_max_p0_inv * theta_err0_norm.powi(2) + driven) / gamma1
}

/// Noise-free decay bound on `‖θ̃(t)‖`: `(λ^t σmax / γ1)^{1/2} ‖θ̃(0)‖`.
pub fn noise_free_envelope(t: usize, lambda: f64, sigma_max_p0_inv: f64, gamma1: f64, theta_err0_norm: f64) -> f64 {
    (lambda.powi(t as i32) * sigma_max_p0_inv / gamma1).sqrt() * theta_err0_norm
}

/// Asymptotic bound on `‖r̂_m(t)‖` and its `m → ∞` limit `b*∞ = c η_q η_v / (1-ρ)`.
pub fn asymptotic_radius_bound(c: f64, rho: f64, eta_q: f64, eta_v: f64, m: usize) -> Result<(f64, f64)> {
    let rho_m = rho.powi(m as i32);
    let c_rho_m = c * rho_m;
    if !(c_rho_m < 1.0) {
        return Err(Error::VacuousBound { c_rho_m });
    }
    let b_inf = c * eta_q * eta_v / (1.0 - rho);
    Ok((b_inf * (1.0 - rho_m) / (1.0 - c_rho_m), b_inf))
}

/// Finite-time bound on `‖r̂_m(t)‖` including the decaying prior term:
///
/// ```text
/// (cρ^m)^⌊t/m⌋ c ‖r(0)‖ + c η_q η_v / (1-ρ) [ (1-ρ^m)/(1-cρ^m) + (cρ^m)^⌊t/m⌋ (1-ρ^(m-1)) ]
/// ```
pub fn radius_envelope(
    c: f64,
    rho: f64,
    eta_q: f64,
    eta_v: f64,
    m: usize,
    t: usize,
    prior_radius_norm: f64,
) -> Result<f64> {
    let (limsup, b_inf) = asymptotic_radius_bound(c, rho, eta_q, eta_v, m)?;
    let decay = (c * rho.powi(m as i32)).powi((t / m.max(1)) as i32);
    let tail = b_inf * decay * (1.0 - rho.powi(m as i32 - 1));
    Ok(decay * c * prior_radius_norm + limsup + tail)
}

/// `η_q <= (1/γ1) h_max / (λ + h_min² / γ2)`.
pub fn gain_norm_bound(gamma1: f64, gamma2: f64, lambda: f64, h_min: f64, h_max: f64) -> f64 {
    (h_max / gamma1) / (lambda + h_min * h_min / gamma2)
}

/// `b*∞ <= η_v n^{1/2} / (1-λ^{1/2}) (γ2/γ1)^{3/2} h_max / (h_min² + λγ2)`.
pub fn b_inf_star_bound(
    eta_v: f64,
    n: usize,
    lambda: f64,
    gamma1: f64,
    gamma2: f64,
    h_min: f64,
    h_max: f64,
) -> f64 {
    eta_v * (n as f64).sqrt() / (1.0 - lambda.sqrt()) * (gamma2 / gamma1).powf(1.5) * h_max
        / (h_min * h_min + lambda * gamma2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeReport {
    pub n: usize,
    pub window: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub is_pe: bool,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub c: f64,
    pub rho: f64,
    pub m_star: f64,
    /// Largest observed `‖q(t)‖`.
    pub eta_q: f64,
    /// Largest noise radius.
    pub eta_v: f64,
    /// `c η_q η_v / (1-ρ)` with the observed `η_q`.
    pub b_inf_star: f64,
    pub b_inf_star_bound: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// Full diagnostic pass over a regressor sequence.
///
/// Quantities that need PE are `NaN` when the data is not exciting.
pub fn analyze(
    regressors: &[DVector<f64>],
    noise_radii: &[f64],
    rls: &RlsConfig,
    window: usize,
) -> Result<PeReport> {
    rls.validate()?;
    let n = rls.dim();
    let lambda = rls.lambda;
    let (alpha, beta) = pe_levels(regressors, window)?;
    let is_pe = alpha > 0.0;

    let norms = regressors.iter().map(|x| x.norm());
    let h_min = norms.clone().fold(f64::INFINITY, f64::min);
    let h_max = norms.fold(0.0, f64::max);
    let eta_v = noise_radii.iter().fold(0.0, |m: f64, &r| m.max(r.abs()));

    // q(t) does not depend on the outputs
    let mut state = RlsState::new(rls)?;
    let mut eta_q: f64 = 0.0;
    for x in regressors {
        state.step(x, 0.0)?;
        eta_q = eta_q.max(state.last_q.norm());
    }

    let nan = f64::NAN;
    let mut report = PeReport {
        n,
        window,
        lambda,
        alpha,
        beta,
        is_pe,
        gamma1: nan,
        gamma2: nan,
        delta1: nan,
        delta2: nan,
        c: nan,
        rho: lambda.sqrt(),
        m_star: nan,
        eta_q,
        eta_v,
        b_inf_star: nan,
        b_inf_star_bound: nan,
        h_min,
        h_max,
    };
    if is_pe && lambda < 1.0 {
        let g = gamma_bounds(regressors, window, lambda, &rls.p0, alpha, beta)?;
        let (c, rho) = contraction_constants(n, g.gamma1, g.gamma2, lambda)?;
        report.gamma1 = g.gamma1;
        report.gamma2 = g.gamma2;
        report.delta1 = g.delta1;
        report.delta2 = g.delta2;
        report.c = c;
        report.rho = rho;
        report.m_star = m_star(n, g.gamma1, g.gamma2, lambda)?;
        report.b_inf_star = c * eta_q * eta_v / (1.0 - rho);
        report.b_inf_star_bound = b_inf_star_bound(eta_v, n, lambda, g.gamma1, g.gamma2, h_min, h_max);
    }
    Ok(report)
}

impl PeReport {
    fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |v: f64| format!("{v:.16e}");
        vec![
            ("alpha", f(self.alpha)),
            ("beta", f(self.beta)),
            ("T", self.window.to_string()),
            ("is_pe", (self.is_pe as u8).to_string()),
            ("lambda", f(self.lambda)),
            ("gamma1", f(self.gamma1)),
            ("gamma2", f(self.gamma2)),
            ("delta1", f(self.delta1)),
            ("delta2", f(self.delta2)),
            ("c", f(self.c)),
            ("rho", f(self.rho)),
            ("m_star", f(self.m_star)),
            ("eta_q", f(self.eta_q)),
            ("eta_v", f(self.eta_v)),
            ("b_inf_star", f(self.b_inf_star)),
            ("b_inf_star_bound", f(self.b_inf_star_bound)),
            ("h_min", f(self.h_min)),
            ("h_max", f(self.h_max)),
        ]
    }

    /// One `key=value` line per quantity.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// `quantity,value` header plus one row per quantity.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}
