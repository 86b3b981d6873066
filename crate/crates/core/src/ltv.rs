//! Interval estimator for a slowly drifting parameter `θ°(t) = θ°(t-1) + δ(t)`.
//!
//! With the drift in a known box `𝓘(c_δ(t), r_δ(t))` the RLS error obeys
//! `θ̃(t) = A(t) θ̃(t-1) + B(t) v̄(t)` where `B(t) = [q(t) | -A(t)]` and
//! `v̄(t) = [v(t); δ(t)]`. The radius machinery is the same as in the
//! constant case with the `n × (n+1)` gain `B(t)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::interval::{Intersection, IntervalVector};
use crate::lti::{noise_center_radius, IntervalEstimate, LtiConfig, Refinement};
use crate::radius::RadiusTracker;
use crate::rls::RlsState;

#[derive(Debug, Clone, PartialEq)]
pub struct DriftBounds {
    pub c_delta: DVector<f64>,
    pub r_delta: DVector<f64>,
}

impl DriftBounds {
    pub fn new(c_delta: DVector<f64>, r_delta: DVector<f64>) -> Result<Self> {
        check_dim("drift bounds", c_delta.len(), r_delta.len())?;
        if let Some((i, &r)) = r_delta.iter().enumerate().find(|(_, &r)| r < 0.0 || r.is_nan()) {
            return Err(Error::NegativeRadius { index: i, value: r });
        }
        if c_delta.iter().any(|v| !v.is_finite()) || r_delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("drift bounds"));
        }
        Ok(Self { c_delta, r_delta })
    }

    /// Zero-width drift at the origin.
    pub fn none(n: usize) -> Self {
        Self {
            c_delta: DVector::zeros(n),
            r_delta: DVector::zeros(n),
        }
    }

    pub fn symmetric(r_delta: DVector<f64>) -> Result<Self> {
        Self::new(DVector::zeros(r_delta.len()), r_delta)
    }

    pub fn from_interval(b: &IntervalVector) -> Self {
        Self {
            c_delta: b.center(),
            r_delta: b.radius(),
        }
    }

    pub fn dim(&self) -> usize {
        self.c_delta.len()
    }

    pub fn to_interval(&self) -> IntervalVector {
        IntervalVector::from_center_radius(&self.c_delta, &self.r_delta)
            .expect("drift radius validated on construction")
    }
}

/// `[max(p_lo + δ_lo, ξ_lo), min(p_hi + δ_hi, ξ_hi)]`.
pub fn drift_monotonic_update(
    bounds: &IntervalVector,
    drift: &DriftBounds,
    xi: &IntervalVector,
) -> Result<Intersection> {
    bounds.translate(&drift.to_interval())?.intersect(xi)
}

#[derive(Debug, Clone)]
pub struct LtvEstimator {
    rls: RlsState,
    center: DVector<f64>,
    tracker: RadiusTracker,
    refinement: Option<Refinement>,
}

impl LtvEstimator {
    /// Same configuration as the constant-parameter estimator; the drift
    /// box is supplied per step.
    pub fn new(config: &LtiConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rls: RlsState::new(&config.rls)?,
            center: config.prior.center(),
            tracker: RadiusTracker::new(
                config.radius_mode,
                config.prior.radius(),
                config.max_horizon,
            )?,
            refinement: config
                .monotonic
                .then(|| Refinement::new(config.prior.clone())),
        })
    }

    pub fn rls(&self) -> &RlsState {
        &self.rls
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> &DVector<f64> {
        self.tracker.radius()
    }

    pub fn stored_terms(&self) -> usize {
        self.tracker.stored_terms()
    }

    pub fn step(
        &mut self,
        x: &DVector<f64>,
        y: f64,
        v_bounds: &IntervalVector,
        drift: &DriftBounds,
    ) -> Result<IntervalEstimate> {
        let (c_v, r_v) = noise_center_radius(v_bounds)?;
        let n = self.rls.dim();
        check_dim("drift bounds", n, drift.dim())?;
        self.rls.step(x, y)?;
        let a = &self.rls.last_a;
        let q = &self.rls.last_q;

        self.center = a * &self.center + q * (y - c_v) + a * &drift.c_delta;

        let mut gain = DMatrix::zeros(n, n + 1);
        gain.set_column(0, q);
        gain.columns_mut(1, n).copy_from(&(-a));
        let mut input_radius = DVector::zeros(n + 1);
        input_radius[0] = r_v;
        input_radius.rows_mut(1, n).copy_from(&drift.r_delta);

        let radius = self.tracker.step(a, gain, input_radius)?.clone();
        let raw = IntervalVector::from_center_radius(&self.center, &radius)?;

        if let Some(refinement) = self.refinement.as_mut() {
            let next = drift_monotonic_update(&refinement.bounds, drift, &raw);
            refinement.absorb(next)?;
        }

        Ok(IntervalEstimate {
            t: self.rls.t,
            point: self.rls.theta.clone(),
            raw,
            refined: self.refinement.as_ref().map(|r| r.bounds.clone()),
            inconsistent: self.refinement.as_ref().is_some_and(|r| r.inconsistent),
        })
    }
}
