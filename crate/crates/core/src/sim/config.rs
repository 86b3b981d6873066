//! Simulation settings and their flat `key=value` file format.
//!
//! ```text
//! # ARX(2, 2) with scalar input
//! theta_true = -1.40, 0.75, 0.60, -0.10
//! a = 0.2
//! N = 200
//! runs = 100
//! lambda = 0.99
//! modes = 20, 50, exact
//! ```

use std::path::Path;
use std::str::FromStr;

use nalgebra::{dvector, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interval::IntervalVector;
use crate::lti::LtiConfig;
use crate::radius::{RadiusMode, DEFAULT_MAX_HORIZON};
use crate::rls::RlsConfig;

/// Parameter increment `δ(t) = c_δ + r_δ sin(2πt / period)`, declared box `𝓘(c_δ, r_δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    pub c_delta: DVector<f64>,
    pub r_delta: DVector<f64>,
    pub period: f64,
}

impl DriftSpec {
    pub fn increment(&self, t: usize) -> DVector<f64> {
        let s = (std::f64::consts::TAU * t as f64 / self.period).sin();
        &self.c_delta + &self.r_delta * s
    }

    pub fn bounds(&self) -> IntervalVector {
        IntervalVector::from_center_radius(&self.c_delta, &self.r_delta)
            .expect("drift spec validated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Output lags in the regressor.
    pub na: usize,
    /// Input lags in the regressor.
    pub nb: usize,
    /// `θ°`, or `θ°(0)` when drifting.
    pub theta_true: DVector<f64>,
    /// Noise half-width `a`; `v(t)` is uniform on `[-a, a]`.
    pub noise_half_width: f64,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    pub lambda: f64,
    pub p0_scale: f64,
    /// Prior box is `[-α₀, α₀]ⁿ`.
    pub prior_radius: f64,
    pub modes: Vec<RadiusMode>,
    pub monotonic: bool,
    pub drift: Option<DriftSpec>,
    /// PE window `T`; `2n` when unset.
    pub pe_window: Option<usize>,
    pub max_horizon: usize,
}

impl SimConfig {
    /// Constant-parameter ARX(2,2) study.
    pub fn default_lti() -> Self {
        Self {
            na: 2,
            nb: 2,
            theta_true: dvector![-1.40, 0.75, 0.60, -0.10],
            noise_half_width: 0.2,
            horizon: 200,
            runs: 100,
            seed: 0,
            lambda: 0.99,
            p0_scale: 1e3,
            prior_radius: 4.0,
            modes: vec![RadiusMode::Truncated(20), RadiusMode::Truncated(50), RadiusMode::Exact],
            monotonic: true,
            drift: None,
            pe_window: None,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }

    /// Drifting-parameter study: sinusoidal increments of period 30, `λ = 0.1`.
    pub fn default_ltv() -> Self {
        Self {
            lambda: 0.1,
            modes: vec![RadiusMode::Truncated(5), RadiusMode::Exact],
            drift: Some(DriftSpec {
                c_delta: DVector::zeros(4),
                r_delta: dvector![0.10, 0.05, 0.04, 0.01],
                period: 30.0,
            }),
            ..Self::default_lti()
        }
    }

    pub fn dim(&self) -> usize {
        self.na + self.nb
    }

    pub fn pe_window(&self) -> usize {
        self.pe_window.unwrap_or(2 * self.dim())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let n = self.dim();
        if n == 0 {
            return bad("regressor dimension n_a + n_b must be positive".into());
        }
        if self.theta_true.len() != n {
            return Err(Error::DimensionMismatch {
                context: "theta_true",
                expected: n,
                found: self.theta_true.len(),
            });
        }
        if self.theta_true.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta_true"));
        }
        if self.horizon < 1 {
            return bad("N must be at least 1".into());
        }
        if self.runs < 1 {
            return bad("runs must be at least 1".into());
        }
        if !(self.noise_half_width >= 0.0) || !self.noise_half_width.is_finite() {
            return bad(format!("noise half-width must be >= 0, got {}", self.noise_half_width));
        }
        if !(self.prior_radius > 0.0) || !self.prior_radius.is_finite() {
            return bad(format!("prior radius must be > 0, got {}", self.prior_radius));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad(format!("lambda must lie in (0, 1], got {}", self.lambda));
        }
        if !(self.p0_scale > 0.0) || !self.p0_scale.is_finite() {
            return bad(format!("P0 scale must be > 0, got {}", self.p0_scale));
        }
        if self.modes.is_empty() {
            return bad("at least one radius mode is required".into());
        }
        for m in &self.modes {
            m.validate()?;
        }
        if self.pe_window == Some(0) {
            return bad("PE window must be at least 1".into());
        }
        if let Some(d) = &self.drift {
            for (name, v) in [("c_delta", &d.c_delta), ("r_delta", &d.r_delta)] {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: name,
                        expected: n,
                        found: v.len(),
                    });
                }
            }
            if let Some((i, &r)) = d.r_delta.iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
                return Err(Error::NegativeRadius { index: i, value: r });
            }
            if !(d.period > 0.0) || !d.period.is_finite() {
                return bad(format!("drift period must be > 0, got {}", d.period));
            }
        }
        Ok(())
    }

    pub fn rls_config(&self, n: usize) -> Result<RlsConfig> {
        RlsConfig::new(
            DVector::zeros(n),
            DMatrix::identity(n, n) * self.p0_scale,
            self.lambda,
        )
    }

    /// Estimator settings for dimension `n` and one radius mode.
    pub fn estimator_config(&self, n: usize, mode: RadiusMode) -> Result<LtiConfig> {
        let mut cfg = LtiConfig::new(
            self.rls_config(n)?,
            IntervalVector::symmetric(n, self.prior_radius)?,
            mode,
        )
        .with_monotonic(self.monotonic);
        cfg.max_horizon = self.max_horizon.max(self.horizon);
        Ok(cfg)
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let err = |what: &str| Error::InvalidConfig(format!("bad value `{value}` for `{key}`: {what}"));
        match key {
            "n_a" | "na" => self.na = parse(value).map_err(|_| err("expected integer"))?,
            "n_b" | "nb" => self.nb = parse(value).map_err(|_| err("expected integer"))?,
            "theta_true" | "theta" => self.theta_true = parse_vector(value).map_err(|_| err("expected list"))?,
            "a" | "noise_half_width" => {
                self.noise_half_width = parse(value).map_err(|_| err("expected number"))?
            }
            "N" | "horizon" => self.horizon = parse(value).map_err(|_| err("expected integer"))?,
            "runs" => self.runs = parse(value).map_err(|_| err("expected integer"))?,
            "seed" => self.seed = parse(value).map_err(|_| err("expected integer"))?,
            "lambda" => self.lambda = parse(value).map_err(|_| err("expected number"))?,
            "p0_scale" | "P0" => self.p0_scale = parse(value).map_err(|_| err("expected number"))?,
            "prior_radius" | "alpha0" => {
                self.prior_radius = parse(value).map_err(|_| err("expected number"))?
            }
            "modes" => {
                self.modes = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(RadiusMode::from_str)
                    .collect::<Result<_>>()?
            }
            "monotonic" => self.monotonic = parse_bool(value).ok_or_else(|| err("expected bool"))?,
            "T" | "pe_window" => self.pe_window = Some(parse(value).map_err(|_| err("expected integer"))?),
            "max_horizon" => self.max_horizon = parse(value).map_err(|_| err("expected integer"))?,
            "r_delta" => {
                let r = parse_vector(value).map_err(|_| err("expected list"))?;
                let n = r.len();
                self.drift_mut(n).r_delta = r;
            }
            "c_delta" => {
                let c = parse_vector(value).map_err(|_| err("expected list"))?;
                let n = c.len();
                self.drift_mut(n).c_delta = c;
            }
            "drift_period" => {
                let p = parse(value).map_err(|_| err("expected number"))?;
                let n = self.dim();
                self.drift_mut(n).period = p;
            }
            "drift" if parse_bool(value) == Some(false) => self.drift = None,
            _ => return Err(Error::InvalidConfig(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    fn drift_mut(&mut self, n: usize) -> &mut DriftSpec {
        self.drift.get_or_insert_with(|| DriftSpec {
            c_delta: DVector::zeros(n),
            r_delta: DVector::zeros(n),
            period: 30.0,
        })
    }

    /// Applies every `key=value` line; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value, got `{line}`", i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Flat `key=value` rendering that [`apply_text`](Self::apply_text) reads back.
    pub fn to_key_value(&self) -> String {
        let list = |v: &DVector<f64>| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
        let modes = self.modes.iter().map(|m| m.label()).collect::<Vec<_>>().join(",");
        let mut out = format!(
            "n_a={}\nn_b={}\ntheta_true={}\na={:.16e}\nN={}\nruns={}\nseed={}\nlambda={:.16e}\np0_scale={:.16e}\nprior_radius={:.16e}\nmodes={}\nmonotonic={}\nT={}\nmax_horizon={}\n",
            self.na,
            self.nb,
            list(&self.theta_true),
            self.noise_half_width,
            self.horizon,
            self.runs,
            self.seed,
            self.lambda,
            self.p0_scale,
            self.prior_radius,
            modes,
            self.monotonic,
            self.pe_window(),
            self.max_horizon,
        );
        if let Some(d) = &self.drift {
            out += &format!(
                "c_delta={}\nr_delta={}\ndrift_period={:.16e}\n",
                list(&d.c_delta),
                list(&d.r_delta),
                d.period
            );
        }
        out
    }
}

fn parse<T: FromStr>(s: &str) -> std::result::Result<T, T::Err> {
    s.trim().parse()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Some(true),
        "0" | "false" | "off" | "no" => Some(false),
        _ => None,
    }
}

/// Comma- or whitespace-separated reals, optionally wrapped in brackets.
pub fn parse_vector(s: &str) -> std::result::Result<DVector<f64>, std::num::ParseFloatError> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    let vals = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    Ok(DVector::from_vec(vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default_lti().validate().unwrap();
        SimConfig::default_ltv().validate().unwrap();
        assert_eq!(SimConfig::default_lti().pe_window(), 8);
    }

    #[test]
    fn key_value_overrides() {
        let mut c = SimConfig::default_lti();
        c.apply_text("# comment\nN = 50\nmodes = 10, exact\nmonotonic=off\nlambda=0.5 # trailing\n")
            .unwrap();
        assert_eq!(c.horizon, 50);
        assert_eq!(c.modes, vec![RadiusMode::Truncated(10), RadiusMode::Exact]);
        assert!(!c.monotonic);
        assert_eq!(c.lambda, 0.5);
        assert!(c.apply_text("bogus=1").is_err());
        assert!(c.apply_text("N").is_err());
        assert!(c.apply_text("N=-3").is_err());
    }

    #[test]
    fn key_value_round_trip() {
        for c in [SimConfig::default_lti(), SimConfig::default_ltv()] {
            let mut back = SimConfig::default_lti();
            back.drift = None;
            back.apply_text(&c.to_key_value()).unwrap();
            back.pe_window = None;
            assert_eq!(back, c);
        }
    }

    #[test]
    fn invariants_are_enforced() {
        let mut c = SimConfig::default_lti();
        c.runs = 0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default_lti();
        c.noise_half_width = -0.1;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default_lti();
        c.prior_radius = 0.0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default_lti();
        c.theta_true = dvector![1.0];
        assert!(matches!(c.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn drift_increment_zero_crossing() {
        let d = SimConfig::default_ltv().drift.unwrap();
        assert!(d.increment(15).amax() < 1e-16);
        assert!((d.increment(30 / 4)[0] - 0.1 * (std::f64::consts::TAU * 7.0 / 30.0).sin()).abs() < 1e-16);
    }
}
