//! Interval estimator for a constant parameter vector.
//!
//! The RLS identifier supplies `θ(t)`, `q(t)` and `A(t) = I - q(t)x(t)ᵀ`.
//! The interval center follows `c(t) = A(t) c(t-1) + q(t) (y(t) - c_v(t))`
//! and the radius is the bound on the RLS error driven by the prior box and
//! the noise radii (see [`RadiusMode`]). An optional running intersection
//! makes the reported widths nonincreasing.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::interval::{Intersection, IntervalVector};
use crate::radius::{RadiusMode, RadiusTracker, DEFAULT_MAX_HORIZON};
use crate::rls::{RlsConfig, RlsState};

#[derive(Debug, Clone, PartialEq)]
pub struct LtiConfig {
    pub rls: RlsConfig,
    /// Prior box assumed to contain the true parameter.
    pub prior: IntervalVector,
    pub radius_mode: RadiusMode,
    pub monotonic: bool,
    /// Step cap for [`RadiusMode::Exact`].
    pub max_horizon: usize,
}

impl LtiConfig {
    pub fn new(rls: RlsConfig, prior: IntervalVector, radius_mode: RadiusMode) -> Self {
        Self {
            rls,
            prior,
            radius_mode,
            monotonic: false,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }

    pub fn with_monotonic(mut self, on: bool) -> Self {
        self.monotonic = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rls.validate()?;
        check_dim("prior box", self.rls.dim(), self.prior.dim())?;
        self.radius_mode.validate()?;
        if !self.prior.is_finite() {
            return Err(Error::NonFinite("prior box"));
        }
        Ok(())
    }
}

/// Output of one estimator step.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalEstimate {
    pub t: usize,
    /// RLS point estimate `θ(t)`.
    pub point: DVector<f64>,
    /// Box from the center/radius pair before any intersection.
    pub raw: IntervalVector,
    /// Running intersection, present when monotonic refinement is on.
    pub refined: Option<IntervalVector>,
    /// Set once the running intersection has come up empty; stays set.
    pub inconsistent: bool,
}

/// Running-intersection state shared by both estimators.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Refinement {
    pub bounds: IntervalVector,
    pub inconsistent: bool,
}

impl Refinement {
    pub fn new(prior: IntervalVector) -> Self {
        Self {
            bounds: prior,
            inconsistent: false,
        }
    }

    /// Applies `next` unless the state is already frozen; freezes on an empty result.
    pub fn absorb(&mut self, next: Result<Intersection>) -> Result<()> {
        if self.inconsistent {
            return Ok(());
        }
        match next? {
            Intersection::Consistent(b) => self.bounds = b,
            Intersection::Empty { .. } => self.inconsistent = true,
        }
        Ok(())
    }
}

/// `[max(lo, ξ_lo), min(hi, ξ_hi)]`, i.e. the intersection of the running box with `xi`.
pub fn monotonic_update(bounds: &IntervalVector, xi: &IntervalVector) -> Result<Intersection> {
    bounds.intersect(xi)
}

pub(crate) fn noise_center_radius(v_bounds: &IntervalVector) -> Result<(f64, f64)> {
    check_dim("noise bounds", 1, v_bounds.dim())?;
    let c = v_bounds.center()[0];
    let r = v_bounds.radius()[0];
    if !c.is_finite() || !r.is_finite() {
        return Err(Error::NonFinite("noise bounds"));
    }
    Ok((c, r))
}

#[derive(Debug, Clone)]
pub struct LtiEstimator {
    rls: RlsState,
    center: DVector<f64>,
    tracker: RadiusTracker,
    refinement: Option<Refinement>,
}

impl LtiEstimator {
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
    ) -> Result<IntervalEstimate> {
        let (c_v, r_v) = noise_center_radius(v_bounds)?;
        self.rls.step(x, y)?;
        let a = &self.rls.last_a;
        let q = &self.rls.last_q;

        self.center = a * &self.center + q * (y - c_v);

        let gain = DMatrix::from_column_slice(q.len(), 1, q.as_slice());
        let radius = self
            .tracker
            .step(a, gain, DVector::from_element(1, r_v))?
            .clone();
        let raw = IntervalVector::from_center_radius(&self.center, &radius)?;

        if let Some(refinement) = self.refinement.as_mut() {
            let next = monotonic_update(&refinement.bounds, &raw);
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
