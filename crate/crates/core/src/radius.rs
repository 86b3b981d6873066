//! Radius propagation shared by the constant and drifting estimators.
//!
//! The error obeys `e(t) = A(t) e(t-1) + G(t) w(t)` with `w(t)` in a box of
//! radius `r_w(t)`. The tight radius is
//!
//! ```text
//! r(t) = |Φ(t,0)| r(0) + Σ_{k=1..t} |Φ(t,k) G(k)| r_w(k)
//! ```
//!
//! and the truncated family of horizon `m` re-anchors on its own past value:
//!
//! ```text
//! r̂(t) = |Φ(t,t-m)| r̂(t-m) + Σ_{k=t-m+1..t} |Φ(t,k) G(k)| r_w(k)     (t > m)
//! ```
//!
//! For `t <= m` both coincide. Absolute values are taken only on fully
//! formed products.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::window::WindowProduct;

/// Default cap on the number of steps an exact-mode estimator accepts.
pub const DEFAULT_MAX_HORIZON: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadiusMode {
    /// Full convolution; per-step cost grows linearly with `t`.
    Exact,
    /// Truncated horizon `m >= 1`. `m = 1` is unlikely to stay bounded.
    Truncated(usize),
}

impl RadiusMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            RadiusMode::Truncated(0) => Err(Error::InvalidConfig(
                "truncation horizon must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Short label used in file names and CSV headers: `exact`, `m20`, ...
    pub fn label(&self) -> String {
        match self {
            RadiusMode::Exact => "exact".to_string(),
            RadiusMode::Truncated(m) => format!("m{m}"),
        }
    }
}

impl std::str::FromStr for RadiusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "exact" | "n" | "full" => Ok(RadiusMode::Exact),
            other => {
                let digits = other.strip_prefix('m').unwrap_or(other);
                let m: usize = digits
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("unknown radius mode `{s}`")))?;
                let mode = RadiusMode::Truncated(m);
                mode.validate()?;
                Ok(mode)
            }
        }
    }
}

impl std::fmt::Display for RadiusMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone)]
struct Term {
    /// `Φ(t,k) G(k)`, kept exact and left-multiplied by every new `A`.
    gain: DMatrix<f64>,
    input_radius: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct RadiusTracker {
    mode: RadiusMode,
    max_horizon: usize,
    t: usize,
    prior: DVector<f64>,
    transitions: WindowProduct,
    terms: VecDeque<Term>,
    /// Past truncated radii `(time, r̂)`, oldest first, at most `m` entries.
    anchors: VecDeque<(usize, DVector<f64>)>,
    current: DVector<f64>,
}

impl RadiusTracker {
    pub fn new(mode: RadiusMode, prior: DVector<f64>, max_horizon: usize) -> Result<Self> {
        mode.validate()?;
        let n = prior.len();
        let capacity = match mode {
            RadiusMode::Exact => None,
            RadiusMode::Truncated(m) => Some(m),
        };
        let mut anchors = VecDeque::new();
        if capacity.is_some() {
            anchors.push_back((0, prior.clone()));
        }
        Ok(Self {
            mode,
            max_horizon,
            t: 0,
            current: prior.clone(),
            prior,
            transitions: WindowProduct::new(n, capacity),
            terms: VecDeque::new(),
            anchors,
        })
    }

    pub fn radius(&self) -> &DVector<f64> {
        &self.current
    }

    pub fn stored_terms(&self) -> usize {
        self.terms.len()
    }

    #[cfg(test)]
    pub fn stored_anchors(&self) -> usize {
        self.anchors.len()
    }

    /// Advances one step with transition `a = A(t)`, input gain `G(t)` and
    /// input radius `r_w(t)`; returns the new radius.
    pub fn step(
        &mut self,
        a: &DMatrix<f64>,
        gain: DMatrix<f64>,
        input_radius: DVector<f64>,
    ) -> Result<&DVector<f64>> {
        if self.mode == RadiusMode::Exact && self.t >= self.max_horizon {
            return Err(Error::HorizonTooLarge(format!(
                "exact radius mode is capped at {} steps",
                self.max_horizon
            )));
        }
        self.t += 1;
        for term in self.terms.iter_mut() {
            term.gain = a * &term.gain;
        }
        self.terms.push_back(Term { gain, input_radius });
        self.transitions.push(a.clone());

        let anchor_radius = match self.mode {
            RadiusMode::Exact => &self.prior,
            RadiusMode::Truncated(m) => {
                while self.terms.len() > m {
                    self.terms.pop_front();
                }
                let anchor_time = self.t.saturating_sub(m);
                while self.anchors.front().is_some_and(|(k, _)| *k < anchor_time) {
                    self.anchors.pop_front();
                }
                let (k, r) = self
                    .anchors
                    .front()
                    .expect("anchor radius retained for the window start");
                debug_assert_eq!(*k, anchor_time);
                r
            }
        };

        let mut r = self.transitions.product().abs() * anchor_radius;
        for term in &self.terms {
            r += term.gain.abs() * &term.input_radius;
        }

        if let RadiusMode::Truncated(m) = self.mode {
            self.anchors.push_back((self.t, r.clone()));
            while self.anchors.front().is_some_and(|(k, _)| k + m <= self.t) {
                self.anchors.pop_front();
            }
        }
        self.current = r;
        Ok(&self.current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn inputs(k: usize) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
        let s = k as f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.8 + 0.1 * s.sin(), 0.2, -0.3 * s.cos(), 0.7]);
        let g = DMatrix::from_column_slice(2, 1, &[0.5 * (0.3 * s).cos(), -0.4]);
        (a, g, dvector![0.1 + 0.05 * (s * 0.9).sin().abs()])
    }

    #[test]
    fn parse_modes() {
        assert_eq!("exact".parse::<RadiusMode>().unwrap(), RadiusMode::Exact);
        assert_eq!("N".parse::<RadiusMode>().unwrap(), RadiusMode::Exact);
        assert_eq!("20".parse::<RadiusMode>().unwrap(), RadiusMode::Truncated(20));
        assert_eq!("m50".parse::<RadiusMode>().unwrap(), RadiusMode::Truncated(50));
        assert!("0".parse::<RadiusMode>().is_err());
        assert!("wide".parse::<RadiusMode>().is_err());
    }

    #[test]
    fn truncated_buffers_bounded_by_horizon() {
        let mut tr = RadiusTracker::new(RadiusMode::Truncated(3), dvector![1.0, 1.0], 10).unwrap();
        for k in 1..30 {
            let (a, g, rw) = inputs(k);
            tr.step(&a, g, rw).unwrap();
            assert!(tr.stored_terms() <= 3);
            assert!(tr.stored_anchors() <= 3);
        }
    }

    #[test]
    fn exact_stores_one_term_per_step_and_respects_cap() {
        let mut tr = RadiusTracker::new(RadiusMode::Exact, dvector![1.0, 1.0], 5).unwrap();
        for k in 1..=5 {
            let (a, g, rw) = inputs(k);
            tr.step(&a, g, rw).unwrap();
            assert_eq!(tr.stored_terms(), k);
        }
        let (a, g, rw) = inputs(6);
        assert!(matches!(tr.step(&a, g, rw), Err(Error::HorizonTooLarge(_))));
    }

    #[test]
    fn truncated_matches_exact_up_to_horizon_and_dominates_after() {
        let m = 4;
        let mut exact = RadiusTracker::new(RadiusMode::Exact, dvector![0.5, 2.0], 100).unwrap();
        let mut trunc = RadiusTracker::new(RadiusMode::Truncated(m), dvector![0.5, 2.0], 100).unwrap();
        for k in 1..40 {
            let (a, g, rw) = inputs(k);
            let re = exact.step(&a, g.clone(), rw.clone()).unwrap().clone();
            let rt = trunc.step(&a, g, rw).unwrap().clone();
            if k <= m {
                assert_eq!(re, rt);
            } else {
                assert!(re.iter().zip(rt.iter()).all(|(e, t)| *e <= t + 1e-12));
            }
        }
    }

    #[test]
    fn truncated_recursion_by_hand_for_unit_horizon() {
        // m = 1: r̂(t) = |A(t)| r̂(t-1) + |G(t)| r_w(t)
        let mut tr = RadiusTracker::new(RadiusMode::Truncated(1), dvector![1.0, 3.0], 100).unwrap();
        let mut expect = dvector![1.0, 3.0];
        for k in 1..12 {
            let (a, g, rw) = inputs(k);
            expect = a.abs() * &expect + g.abs() * &rw;
            let got = tr.step(&a, g, rw).unwrap();
            assert!((got - &expect).amax() < 1e-14);
        }
    }
}
