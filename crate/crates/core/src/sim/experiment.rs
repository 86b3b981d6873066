//! Monte Carlo experiments.
//!
//! Run `k` uses seed `config.seed + k`. Runs execute in parallel; results are
//! collected by run index and reduced sequentially, so the output does not
//! depend on scheduling.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use super::config::SimConfig;
use super::dataset::fmt_real;
use super::estimate::{audit, estimate_dataset, ContainmentAudit};
use super::generate::generate_any;
use crate::error::{Error, Result};
use crate::lti::IntervalEstimate;
use crate::radius::RadiusMode;

#[derive(Debug, Clone, PartialEq)]
pub struct RunAudit {
    pub run: usize,
    pub seed: u64,
    pub mode: RadiusMode,
    pub audit: ContainmentAudit,
    /// Raw width at `t = N`.
    pub final_width: DVector<f64>,
    /// Refined width at `t = N`.
    pub final_refined_width: Option<DVector<f64>>,
}

/// Per-`t` averages over runs for one radius mode; index `t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSeries {
    pub mode: RadiusMode,
    pub mean_lower: Vec<DVector<f64>>,
    pub mean_upper: Vec<DVector<f64>>,
    pub mean_refined_lower: Option<Vec<DVector<f64>>>,
    pub mean_refined_upper: Option<Vec<DVector<f64>>>,
}

impl ModeSeries {
    /// Width of the averaged raw box at `t` (1-based).
    pub fn mean_width(&self, t: usize) -> DVector<f64> {
        &self.mean_upper[t - 1] - &self.mean_lower[t - 1]
    }

    pub fn mean_refined_width(&self, t: usize) -> Option<DVector<f64>> {
        let lo = self.mean_refined_lower.as_ref()?;
        let hi = self.mean_refined_upper.as_ref()?;
        Some(&hi[t - 1] - &lo[t - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub n: usize,
    pub horizon: usize,
    pub runs: usize,
    pub mean_point: Vec<DVector<f64>>,
    pub modes: Vec<ModeSeries>,
    /// Ordered by run, then by mode.
    pub audits: Vec<RunAudit>,
}

struct RunOutput {
    seed: u64,
    per_mode: Vec<Vec<IntervalEstimate>>,
    audits: Vec<ContainmentAudit>,
}

fn run_one(config: &SimConfig, run: usize) -> Result<RunOutput> {
    let seed = config.seed.wrapping_add(run as u64);
    let ds = generate_any(config, seed)?;
    let mut per_mode = Vec::with_capacity(config.modes.len());
    let mut audits = Vec::with_capacity(config.modes.len());
    for &mode in &config.modes {
        let est = estimate_dataset(&ds, &config.estimator_config(ds.dim(), mode)?)?;
        audits.push(audit(&ds, &est)?.expect("generated data carries truth"));
        per_mode.push(est);
    }
    Ok(RunOutput {
        seed,
        per_mode,
        audits,
    })
}

pub fn run_experiment(config: &SimConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let n = config.dim();
    let horizon = config.horizon;
    let outputs: Vec<Result<RunOutput>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            run_one(config, run).map_err(|e| Error::Run {
                run,
                source: Box::new(e),
            })
        })
        .collect();

    let zeros = || vec![DVector::<f64>::zeros(n); horizon];
    let mut mean_point = zeros();
    let mut modes: Vec<ModeSeries> = config
        .modes
        .iter()
        .map(|&mode| ModeSeries {
            mode,
            mean_lower: zeros(),
            mean_upper: zeros(),
            mean_refined_lower: config.monotonic.then(zeros),
            mean_refined_upper: config.monotonic.then(zeros),
        })
        .collect();
    let mut audits = Vec::with_capacity(config.runs * config.modes.len());

    for (run, out) in outputs.into_iter().enumerate() {
        let out = out?;
        for (k, e) in out.per_mode[0].iter().enumerate() {
            mean_point[k] += &e.point;
        }
        for ((series, est), a) in modes.iter_mut().zip(&out.per_mode).zip(out.audits) {
            for (k, e) in est.iter().enumerate() {
                series.mean_lower[k] += e.raw.lower();
                series.mean_upper[k] += e.raw.upper();
                if let (Some(lo), Some(hi), Some(b)) = (
                    series.mean_refined_lower.as_mut(),
                    series.mean_refined_upper.as_mut(),
                    e.refined.as_ref(),
                ) {
                    lo[k] += b.lower();
                    hi[k] += b.upper();
                }
            }
            let last = est.last().expect("horizon is at least 1");
            audits.push(RunAudit {
                run,
                seed: out.seed,
                mode: series.mode,
                audit: a,
                final_width: last.raw.widths(),
                final_refined_width: last.refined.as_ref().map(|b| b.widths()),
            });
        }
    }

    let scale = 1.0 / config.runs as f64;
    let rescale = |v: &mut Vec<DVector<f64>>| v.iter_mut().for_each(|x| *x *= scale);
    rescale(&mut mean_point);
    for s in &mut modes {
        rescale(&mut s.mean_lower);
        rescale(&mut s.mean_upper);
        if let Some(v) = s.mean_refined_lower.as_mut() {
            rescale(v);
        }
        if let Some(v) = s.mean_refined_upper.as_mut() {
            rescale(v);
        }
    }
    Ok(ExperimentResult {
        n,
        horizon,
        runs: config.runs,
        mean_point,
        modes,
        audits,
    })
}

impl ExperimentResult {
    pub fn mode(&self, mode: RadiusMode) -> Option<&ModeSeries> {
        self.modes.iter().find(|s| s.mode == mode)
    }

    pub fn all_contained(&self) -> bool {
        self.audits.iter().all(|a| a.audit.is_clean())
    }

    /// Mean over runs of the final width (refined when available).
    pub fn mean_final_width(&self, mode: RadiusMode) -> Option<DVector<f64>> {
        let rows: Vec<_> = self.audits.iter().filter(|a| a.mode == mode).collect();
        if rows.is_empty() {
            return None;
        }
        let mut sum = DVector::zeros(self.n);
        for a in &rows {
            sum += a.final_refined_width.as_ref().unwrap_or(&a.final_width);
        }
        Some(sum / rows.len() as f64)
    }

    /// Long format: one row per `(mode, t)`.
    pub fn write_mean_bounds<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n;
        let refined = self.modes.first().is_some_and(|s| s.mean_refined_lower.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["mode".to_string(), "t".to_string()];
        let mut prefixes = vec!["theta_hat", "lo", "hi"];
        if refined {
            prefixes.extend(["mono_lo", "mono_hi"]);
        }
        for p in prefixes {
            header.extend((1..=n).map(|i| format!("{p}_{i}")));
        }
        w.write_record(&header)?;
        for s in &self.modes {
            for k in 0..self.horizon {
                let mut row = vec![s.mode.label(), (k + 1).to_string()];
                let mut cols = vec![&self.mean_point[k], &s.mean_lower[k], &s.mean_upper[k]];
                if let (Some(lo), Some(hi)) = (&s.mean_refined_lower, &s.mean_refined_upper) {
                    cols.push(&lo[k]);
                    cols.push(&hi[k]);
                }
                for v in cols {
                    row.extend(v.iter().map(|&x| fmt_real(x)));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_audit<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "run",
            "seed",
            "mode",
            "steps",
            "raw_violations",
            "refined_violations",
            "width_increases",
            "inconsistent_steps",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((1..=n).map(|i| format!("final_width_{i}")));
        w.write_record(&header)?;
        for a in &self.audits {
            let mut row = vec![
                a.run.to_string(),
                a.seed.to_string(),
                a.mode.label(),
                a.audit.steps.to_string(),
                a.audit.raw_violations.to_string(),
                a.audit.refined_violations.to_string(),
                a.audit.width_increases.to_string(),
                a.audit.inconsistent_steps.to_string(),
            ];
            let width = a.final_refined_width.as_ref().unwrap_or(&a.final_width);
            row.extend(width.iter().map(|&x| fmt_real(x)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable `key=value` summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "runs={}", self.runs);
        let _ = writeln!(s, "N={}", self.horizon);
        let _ = writeln!(s, "all_contained={}", self.all_contained() as u8);
        for series in &self.modes {
            let label = series.mode.label();
            let clean = self
                .audits
                .iter()
                .filter(|a| a.mode == series.mode && a.audit.is_clean())
                .count();
            let _ = writeln!(s, "{label}.clean_runs={clean}");
            if let Some(w) = self.mean_final_width(series.mode) {
                let list: Vec<String> = w.iter().map(|&x| fmt_real(x)).collect();
                let _ = writeln!(s, "{label}.mean_final_width={}", list.join(","));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub mode: RadiusMode,
    pub mean_final_width: DVector<f64>,
}

/// Final refined widths per forgetting factor and mode, monotonic refinement on.
pub fn lambda_sweep(config: &SimConfig, lambdas: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "sweep values must lie in (0, 1), got {bad}"
        )));
    }
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let cfg = SimConfig {
            lambda,
            monotonic: true,
            ..config.clone()
        };
        let res = run_experiment(&cfg)?;
        for &mode in &cfg.modes {
            rows.push(SweepRow {
                lambda,
                mode,
                mean_final_width: res.mean_final_width(mode).expect("mode was run"),
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep<W: Write>(out: W, n: usize, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["lambda".to_string(), "mode".to_string()];
    header.extend((1..=n).map(|i| format!("width_{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![fmt_real(r.lambda), r.mode.label()];
        row.extend(r.mean_final_width.iter().map(|&x| fmt_real(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            runs: 4,
            horizon: 60,
            ..SimConfig::default_lti()
        }
    }

    #[test]
    fn experiment_is_contained_and_averaged() {
        let res = run_experiment(&small()).unwrap();
        assert!(res.all_contained());
        assert_eq!(res.audits.len(), 4 * 3);
        assert_eq!(res.modes[0].mean_lower.len(), 60);
        assert!(res.summary().contains("all_contained=1"));
    }

    #[test]
    fn parallel_result_matches_serial_reduction() {
        let cfg = small();
        let res = run_experiment(&cfg).unwrap();
        let mut lo = vec![DVector::zeros(4); cfg.horizon];
        for run in 0..cfg.runs {
            let out = run_one(&cfg, run).unwrap();
            for (k, e) in out.per_mode[2].iter().enumerate() {
                lo[k] += e.raw.lower();
            }
        }
        for k in 0..cfg.horizon {
            assert_eq!(res.modes[2].mean_lower[k], &lo[k] * (1.0 / cfg.runs as f64));
        }
    }

    #[test]
    fn single_lambda_sweep_equals_experiment() {
        let cfg = small();
        let rows = lambda_sweep(&cfg, &[0.99]).unwrap();
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(Some(r.mean_final_width), res.mean_final_width(r.mode));
        }
        assert!(lambda_sweep(&cfg, &[1.0]).is_err());
    }

    #[test]
    fn run_errors_carry_run_index() {
        let mut cfg = small();
        cfg.theta_true = nalgebra::dvector![-3.0, -5.0, 1.0, 1.0];
        cfg.horizon = 2000;
        cfg.modes = vec![RadiusMode::Truncated(2)];
        match run_experiment(&cfg) {
            Err(Error::Run { run: 0, source }) => {
                assert!(matches!(*source, Error::Diverged { .. }))
            }
            other => panic!("{other:?}"),
        }
    }
}
