//! ARX data generation.
//!
//! `y(t) = x(t)ᵀθ°(t) + v(t)` with `x(t) = [-y(t-1) .. -y(t-n_a), u(t-1) .. u(t-n_b)]`,
//! zero initial conditions (`y(t) = u(t) = 0` for `t <= 0`), `u(t)` standard
//! normal and `v(t)` uniform on `[-a, a]`. At every `t` the input is drawn
//! before the noise. All `N` samples are kept, including the start-up transient.

use std::collections::VecDeque;

use nalgebra::DVector;

use super::config::{DriftSpec, SimConfig};
use super::dataset::{Dataset, Record};
use super::rng::SimRng;
use crate::error::{Error, Result};

/// Constant-parameter data set with `θ° = config.theta_true`.
pub fn generate_lti(config: &SimConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    generate(config, seed, None)
}

/// Drifting-parameter data set; `config.drift` must be set.
pub fn generate_ltv(config: &SimConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let drift = config
        .drift
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("drift specification required".into()))?;
    generate(config, seed, Some(drift))
}

/// Dispatches on whether `config.drift` is set.
pub fn generate_any(config: &SimConfig, seed: u64) -> Result<Dataset> {
    if config.drift.is_some() {
        generate_ltv(config, seed)
    } else {
        generate_lti(config, seed)
    }
}

fn generate(config: &SimConfig, seed: u64, drift: Option<&DriftSpec>) -> Result<Dataset> {
    let (na, nb) = (config.na, config.nb);
    let n = na + nb;
    let a = config.noise_half_width;
    let mut rng = SimRng::new(seed);
    // most recent first
    let mut ys: VecDeque<f64> = std::iter::repeat_n(0.0, na).collect();
    let mut us: VecDeque<f64> = std::iter::repeat_n(0.0, nb).collect();
    let mut theta = config.theta_true.clone();
    let drift_box = drift.map(DriftSpec::bounds);

    let mut records = Vec::with_capacity(config.horizon);
    for t in 1..=config.horizon {
        let u = rng.standard_normal();
        let v = rng.uniform_in(-a, a);
        if let Some(d) = drift {
            theta += d.increment(t);
        }
        let mut x = DVector::zeros(n);
        for (i, y) in ys.iter().enumerate() {
            x[i] = -y;
        }
        for (j, u) in us.iter().enumerate() {
            x[na + j] = *u;
        }
        let y = x.dot(&theta) + v;
        if !y.is_finite() {
            return Err(Error::Diverged { t });
        }
        if na > 0 {
            ys.pop_back();
            ys.push_front(y);
        }
        if nb > 0 {
            us.pop_back();
            us.push_front(u);
        }
        records.push(Record {
            t,
            x,
            y,
            v_lo: -a,
            v_hi: a,
            v_true: Some(v),
            theta_true: Some(theta.clone()),
            drift: drift_box.clone(),
        });
    }
    Dataset::new(n, records)
}
