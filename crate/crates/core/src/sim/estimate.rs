//! Running the estimators over a [`Dataset`] and writing estimate CSVs.
//!
//! Estimate columns: `t, theta_hat_1..n, c_1..n, r_1..n, lo_1..n, hi_1..n,
//! [mono_lo_1..n, mono_hi_1..n], inconsistent`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::dataset::{fmt_real, Dataset};
use crate::error::{Error, Result};
use crate::lti::{IntervalEstimate, LtiConfig, LtiEstimator};
use crate::ltv::{DriftBounds, LtvEstimator};

/// Slack used for every containment check.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

/// Runs the constant-parameter estimator, or the drifting one when the data
/// carries drift bounds.
pub fn estimate_dataset(ds: &Dataset, config: &LtiConfig) -> Result<Vec<IntervalEstimate>> {
    let mut out = Vec::with_capacity(ds.len());
    if ds.has_drift() {
        let mut est = LtvEstimator::new(config)?;
        for r in ds.records() {
            let d = DriftBounds::from_interval(r.drift.as_ref().expect("drift columns present"));
            out.push(est.step(&r.x, r.y, &r.noise_bounds(), &d)?);
        }
    } else {
        let mut est = LtiEstimator::new(config)?;
        for r in ds.records() {
            out.push(est.step(&r.x, r.y, &r.noise_bounds())?);
        }
    }
    Ok(out)
}

pub fn write_estimates<W: Write>(out: W, n: usize, estimates: &[IntervalEstimate]) -> Result<()> {
    let refined = estimates.first().is_some_and(|e| e.refined.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for prefix in ["theta_hat", "c", "r", "lo", "hi"] {
        header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    }
    if refined {
        for prefix in ["mono_lo", "mono_hi"] {
            header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
        }
    }
    header.push("inconsistent".into());
    w.write_record(&header)?;
    for e in estimates {
        let mut row = vec![e.t.to_string()];
        let cols = [
            e.point.clone(),
            e.raw.center(),
            e.raw.radius(),
            e.raw.lower().clone(),
            e.raw.upper().clone(),
        ];
        for v in &cols {
            row.extend(v.iter().map(|&x| fmt_real(x)));
        }
        if let Some(b) = &e.refined {
            row.extend(b.lower().iter().map(|&x| fmt_real(x)));
            row.extend(b.upper().iter().map(|&x| fmt_real(x)));
        }
        row.push((e.inconsistent as u8).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-run check of the guarantees against known truth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContainmentAudit {
    pub steps: usize,
    /// Steps where `θ°(t)` lies outside the raw box.
    pub raw_violations: usize,
    /// Steps where `θ°(t)` lies outside the refined box.
    pub refined_violations: usize,
    /// Steps where some refined width grew; only meaningful without drift.
    pub width_increases: usize,
    pub inconsistent_steps: usize,
}

impl ContainmentAudit {
    pub fn is_clean(&self) -> bool {
        self.raw_violations == 0
            && self.refined_violations == 0
            && self.width_increases == 0
            && self.inconsistent_steps == 0
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "steps={}", self.steps);
        let _ = writeln!(s, "raw_violations={}", self.raw_violations);
        let _ = writeln!(s, "refined_violations={}", self.refined_violations);
        let _ = writeln!(s, "width_increases={}", self.width_increases);
        let _ = writeln!(s, "inconsistent_steps={}", self.inconsistent_steps);
        let _ = writeln!(s, "contained={}", self.is_clean() as u8);
        s
    }
}

/// `None` when the data set has no truth columns.
pub fn audit(ds: &Dataset, estimates: &[IntervalEstimate]) -> Result<Option<ContainmentAudit>> {
    if !ds.has_truth() {
        return Ok(None);
    }
    let check_widths = !ds.has_drift();
    let mut a = ContainmentAudit::default();
    let mut prev_width: Option<nalgebra::DVector<f64>> = None;
    for (r, e) in ds.records().iter().zip(estimates) {
        let truth = r.theta_true.as_ref().expect("truth columns present");
        a.steps += 1;
        if !e.raw.contains(truth, CONTAINMENT_SLACK)? {
            a.raw_violations += 1;
        }
        if e.inconsistent {
            a.inconsistent_steps += 1;
        }
        if let Some(b) = &e.refined {
            if !b.contains(truth, CONTAINMENT_SLACK)? {
                a.refined_violations += 1;
            }
            let w = b.widths();
            if check_widths {
                if let Some(p) = &prev_width {
                    if w.iter().zip(p.iter()).any(|(now, before)| now > before) {
                        a.width_increases += 1;
                    }
                }
            }
            prev_width = Some(w);
        }
    }
    Ok(Some(a))
}

/// `<stem>_audit.txt` next to the estimate file.
pub fn audit_path(estimate_path: &Path) -> PathBuf {
    let stem = estimate_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "estimates".into());
    estimate_path.with_file_name(format!("{stem}_audit.txt"))
}

/// Reads a data set CSV, runs the estimator and writes the estimate CSV to
/// `output`. With truth columns present an audit summary is written beside it.
pub fn estimate_from_csv(
    input: &Path,
    config: &LtiConfig,
    output: &Path,
) -> Result<Option<ContainmentAudit>> {
    let ds = Dataset::load(input)?;
    let estimates = estimate_dataset(&ds, config)?;
    let file = std::fs::File::create(output)
        .map_err(|e| Error::Io(format!("{}: {e}", output.display())))?;
    write_estimates(std::io::BufWriter::new(file), ds.dim(), &estimates)?;
    let report = audit(&ds, &estimates)?;
    if let Some(a) = &report {
        std::fs::write(audit_path(output), a.to_key_value())?;
    }
    Ok(report)
}
