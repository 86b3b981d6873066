//! Exponentially weighted recursive least squares.
//!
//! ```text
//! q(t) = P(t-1) x / (λ + xᵀ P(t-1) x)
//! θ(t) = θ(t-1) + q(t) (y - xᵀ θ(t-1))
//! P(t) = (P(t-1) - q(t) xᵀ P(t-1)) / λ
//! ```
//!
//! The error dynamics are `θ̃(t) = A(t) θ̃(t-1) + q(t) v(t)` with
//! `A(t) = I - q(t) x(t)ᵀ`; the last `q` and `A` are kept on the state so
//! the interval estimators can propagate them.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Relative tolerance on the smallest eigenvalue of `P0`.
const SPD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RlsConfig {
    pub theta0: DVector<f64>,
    pub p0: DMatrix<f64>,
    pub lambda: f64,
}

impl RlsConfig {
    pub fn new(theta0: DVector<f64>, p0: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let cfg = Self { theta0, p0, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `θ0 = 0`, `P0 = scale · I`.
    pub fn isotropic(n: usize, p0_scale: f64, lambda: f64) -> Result<Self> {
        Self::new(DVector::zeros(n), DMatrix::identity(n, n) * p0_scale, lambda)
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    /// λ = 1 runs fine but the interval-estimator stability results need λ < 1.
    pub fn outside_estimator_theory(&self) -> bool {
        self.lambda >= 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.theta0.len();
        if n == 0 {
            return Err(Error::InvalidConfig("model dimension must be positive".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "forgetting factor must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.p0.nrows() != n || self.p0.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "P0",
                expected: n,
                found: self.p0.nrows().max(self.p0.ncols()),
            });
        }
        if self.theta0.iter().chain(self.p0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("RLS configuration"));
        }
        let scale = self.p0.amax().max(f64::MIN_POSITIVE);
        let asym = (&self.p0 - self.p0.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidConfig("P0 must be symmetric".into()));
        }
        let eig = self.p0.clone().symmetric_eigen().eigenvalues;
        let min_eig = eig.min();
        if min_eig <= SPD_TOL * eig.amax() {
            return Err(Error::InvalidConfig(format!(
                "P0 must be positive definite (smallest eigenvalue {min_eig})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub t: usize,
    pub theta: DVector<f64>,
    pub p: DMatrix<f64>,
    pub last_q: DVector<f64>,
    pub last_a: DMatrix<f64>,
    lambda: f64,
    /// Largest relative asymmetry of `P` seen before symmetrization.
    max_asymmetry: f64,
}

impl RlsState {
    pub fn new(config: &RlsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.dim();
        Ok(Self {
            t: 0,
            theta: config.theta0.clone(),
            p: config.p0.clone(),
            last_q: DVector::zeros(n),
            last_a: DMatrix::identity(n, n),
            lambda: config.lambda,
            max_asymmetry: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// One-step prediction error `y - xᵀθ(t-1)`.
    pub fn innovation(&self, x: &DVector<f64>, y: f64) -> Result<f64> {
        check_dim("innovation", self.dim(), x.len())?;
        Ok(y - x.dot(&self.theta))
    }

    pub fn step(&mut self, x: &DVector<f64>, y: f64) -> Result<()> {
        check_dim("rls_step", self.dim(), x.len())?;
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("RLS data"));
        }
        let n = self.dim();
        let px = &self.p * x;
        let denom = self.lambda + x.dot(&px);
        let q = px / denom;
        let innovation = y - x.dot(&self.theta);
        self.theta += &q * innovation;

        // P <- (P - q (xᵀP)) / λ, then symmetrized
        let xt_p = x.transpose() * &self.p;
        let mut p = (&self.p - &q * xt_p) / self.lambda;
        let scale = p.amax();
        if scale > 0.0 {
            let asym = (&p - p.transpose()).amax() / scale;
            self.max_asymmetry = self.max_asymmetry.max(asym);
        }
        p = (&p + p.transpose()) * 0.5;
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance update"));
        }
        self.p = p;
        self.last_a = DMatrix::identity(n, n) - &q * x.transpose();
        self.last_q = q;
        self.t += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn init_matches_config() {
        let cfg = RlsConfig::isotropic(4, 1e3, 0.99).unwrap();
        let s = RlsState::new(&cfg).unwrap();
        assert_eq!(s.t, 0);
        assert_eq!(s.theta, DVector::zeros(4));
        assert_eq!(s.p, DMatrix::identity(4, 4) * 1e3);
        assert_eq!(s.last_q, DVector::zeros(4));
        assert_eq!(s.last_a, DMatrix::identity(4, 4));
    }

    #[test]
    fn rejects_out_of_range_lambda() {
        assert!(RlsConfig::isotropic(2, 1.0, 1.2).is_err());
        assert!(RlsConfig::isotropic(2, 1.0, 0.0).is_err());
        let ok = RlsConfig::isotropic(2, 1.0, 1.0).unwrap();
        assert!(ok.outside_estimator_theory());
    }

    #[test]
    fn rejects_indefinite_p0() {
        let p0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(RlsConfig::new(DVector::zeros(2), p0, 0.9).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(RlsConfig::new(DVector::zeros(2), asym, 0.9).is_err());
    }

    #[test]
    fn scalar_hand_trace() {
        let cfg = RlsConfig::new(dvector![0.0], DMatrix::from_element(1, 1, 1.0), 1.0).unwrap();
        let mut s = RlsState::new(&cfg).unwrap();
        s.step(&dvector![1.0], 2.0).unwrap();
        assert_eq!(s.last_q[0], 0.5);
        assert_eq!(s.theta[0], 1.0);
        assert_eq!(s.p[(0, 0)], 0.5);
        assert_eq!(s.last_a[(0, 0)], 0.5);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn truth_is_a_fixed_point_without_noise() {
        let truth = dvector![-1.4, 0.75, 0.6, -0.1];
        let cfg = RlsConfig::new(truth.clone(), DMatrix::identity(4, 4) * 10.0, 0.95).unwrap();
        let mut s = RlsState::new(&cfg).unwrap();
        for k in 0..50 {
            let t = k as f64;
            let x = dvector![t.sin(), (0.3 * t).cos(), 1.0, (1.7 * t).sin()];
            let y = x.dot(&truth);
            assert_eq!(s.innovation(&x, y).unwrap(), 0.0);
            s.step(&x, y).unwrap();
            assert_eq!(s.theta, truth);
        }
    }

    #[test]
    fn zero_regressor_only_inflates_covariance() {
        let cfg = RlsConfig::new(dvector![1.0, 2.0], DMatrix::identity(2, 2), 0.5).unwrap();
        let mut s = RlsState::new(&cfg).unwrap();
        s.step(&dvector![0.0, 0.0], 3.0).unwrap();
        assert_eq!(s.last_q, dvector![0.0, 0.0]);
        assert_eq!(s.theta, dvector![1.0, 2.0]);
        assert_eq!(s.p, DMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn innovation_values() {
        let cfg = RlsConfig::new(dvector![1.0, -1.0], DMatrix::identity(2, 2), 0.9).unwrap();
        let s = RlsState::new(&cfg).unwrap();
        assert_eq!(s.innovation(&dvector![1.0, 1.0], 3.0).unwrap(), 3.0);
        assert_eq!(s.innovation(&dvector![2.0, 1.0], 1.0).unwrap(), 0.0);
        let zero = RlsState::new(&RlsConfig::isotropic(2, 1.0, 0.9).unwrap()).unwrap();
        assert_eq!(zero.innovation(&dvector![4.0, 5.0], 7.5).unwrap(), 7.5);
        assert!(s.innovation(&dvector![1.0], 0.0).is_err());
    }

    #[test]
    fn step_rejects_bad_input() {
        let mut s = RlsState::new(&RlsConfig::isotropic(2, 1.0, 0.9).unwrap()).unwrap();
        assert!(matches!(
            s.step(&dvector![1.0], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.step(&dvector![1.0, f64::NAN], 0.0),
            Err(Error::NonFinite(_))
        ));
        assert!(s.step(&dvector![1.0, 0.0], f64::INFINITY).is_err());
    }
}
