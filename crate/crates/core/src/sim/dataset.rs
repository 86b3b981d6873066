//! Time-indexed measurement records and their CSV form.
//!
//! Columns, in order:
//! `t, y, x_1..x_n, v_lo, v_hi, [v_true], [theta_true_1..n], [delta_lo_1..n, delta_hi_1..n]`.
//! Reals are written with 17 significant digits, which round-trips `f64`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::interval::IntervalVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: usize,
    pub x: DVector<f64>,
    pub y: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    /// Realized noise, for validation only.
    pub v_true: Option<f64>,
    pub theta_true: Option<DVector<f64>>,
    /// Declared box for `δ(t)`.
    pub drift: Option<IntervalVector>,
}

impl Record {
    pub fn noise_bounds(&self) -> IntervalVector {
        IntervalVector::scalar(self.v_lo, self.v_hi).expect("noise bounds validated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    records: Vec<Record>,
}

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl Dataset {
    /// Checks dimensions, bound ordering and that optional columns are all-or-none.
    pub fn new(n: usize, records: Vec<Record>) -> Result<Self> {
        let first = records.first();
        let has_v = first.is_some_and(|r| r.v_true.is_some());
        let has_theta = first.is_some_and(|r| r.theta_true.is_some());
        let has_drift = first.is_some_and(|r| r.drift.is_some());
        for (i, r) in records.iter().enumerate() {
            let row = i + 1;
            let bad = |message: String| Error::BadRow { row, message };
            if r.x.len() != n {
                return Err(bad(format!("regressor has {} entries, expected {n}", r.x.len())));
            }
            if r.v_lo.is_nan() || r.v_hi.is_nan() || r.v_lo > r.v_hi {
                return Err(bad(format!("v_lo = {} exceeds v_hi = {}", r.v_lo, r.v_hi)));
            }
            if r.v_true.is_some() != has_v
                || r.theta_true.is_some() != has_theta
                || r.drift.is_some() != has_drift
            {
                return Err(bad("optional columns must be present on every row".into()));
            }
            if r.theta_true.as_ref().is_some_and(|th| th.len() != n)
                || r.drift.as_ref().is_some_and(|d| d.dim() != n)
            {
                return Err(bad(format!("truth or drift columns do not have {n} entries")));
            }
        }
        Ok(Self { n, records })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn has_truth(&self) -> bool {
        self.records.first().is_some_and(|r| r.theta_true.is_some())
    }

    pub fn has_drift(&self) -> bool {
        self.records.first().is_some_and(|r| r.drift.is_some())
    }

    pub fn regressors(&self) -> Vec<DVector<f64>> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    /// `v(t) ∈ [v_lo, v_hi]` and, when truth and drift are present,
    /// `θ°(t) - θ°(t-1)` inside the declared drift box (`slack` absorbs rounding).
    /// `theta0` is `θ°(0)`; without it the first increment is not checked.
    pub fn check_validity(&self, theta0: Option<&DVector<f64>>, slack: f64) -> Result<()> {
        let mut prev = theta0.cloned();
        for (i, r) in self.records.iter().enumerate() {
            let bad = |message: String| Error::BadRow { row: i + 1, message };
            if let Some(v) = r.v_true {
                if !(r.v_lo <= v && v <= r.v_hi) {
                    return Err(bad(format!("noise {v} outside [{}, {}]", r.v_lo, r.v_hi)));
                }
            }
            if let (Some(th), Some(d)) = (&r.theta_true, &r.drift) {
                if let Some(p) = &prev {
                    let delta = th - p;
                    if !d.contains(&delta, slack)? {
                        return Err(bad("parameter increment outside drift bounds".into()));
                    }
                }
                prev = Some(th.clone());
            }
        }
        Ok(())
    }

    fn header(&self) -> Vec<String> {
        let n = self.n;
        let mut h = vec!["t".to_string(), "y".to_string()];
        h.extend((1..=n).map(|i| format!("x_{i}")));
        h.push("v_lo".into());
        h.push("v_hi".into());
        if self.records.first().is_some_and(|r| r.v_true.is_some()) {
            h.push("v_true".into());
        }
        if self.has_truth() {
            h.extend((1..=n).map(|i| format!("theta_true_{i}")));
        }
        if self.has_drift() {
            h.extend((1..=n).map(|i| format!("delta_lo_{i}")));
            h.extend((1..=n).map(|i| format!("delta_hi_{i}")));
        }
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.records {
            let mut row = vec![r.t.to_string(), fmt_real(r.y)];
            row.extend(r.x.iter().map(|&v| fmt_real(v)));
            row.push(fmt_real(r.v_lo));
            row.push(fmt_real(r.v_hi));
            if let Some(v) = r.v_true {
                row.push(fmt_real(v));
            }
            if let Some(th) = &r.theta_true {
                row.extend(th.iter().map(|&v| fmt_real(v)));
            }
            if let Some(d) = &r.drift {
                row.extend(d.lower().iter().map(|&v| fmt_real(v)));
                row.extend(d.upper().iter().map(|&v| fmt_real(v)));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        let find = |name: &str| header.iter().position(|h| h == name);
        let need = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));

        let t_col = need("t")?;
        let y_col = need("y")?;
        let x_cols: Vec<usize> = (1..).map_while(|i| find(&format!("x_{i}"))).collect();
        if x_cols.is_empty() {
            return Err(Error::MissingColumn("x_1".into()));
        }
        let n = x_cols.len();
        let v_lo = need("v_lo")?;
        let v_hi = need("v_hi")?;
        let v_true = find("v_true");
        let group = |prefix: &str| -> Result<Option<Vec<usize>>> {
            if find(&format!("{prefix}_1")).is_none() {
                return Ok(None);
            }
            (1..=n).map(|i| need(&format!("{prefix}_{i}"))).collect::<Result<_>>().map(Some)
        };
        let theta_cols = group("theta_true")?;
        let dlo_cols = group("delta_lo")?;
        let dhi_cols = group("delta_hi")?;
        let drift_cols = match (dlo_cols, dhi_cols) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            (Some(_), None) => return Err(Error::MissingColumn("delta_hi_1".into())),
            (None, Some(_)) => return Err(Error::MissingColumn("delta_lo_1".into())),
        };

        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::BadRow { row, message: e.to_string() })?;
            let field = |c: usize| -> Result<f64> {
                let s = rec.get(c).unwrap_or("");
                s.parse::<f64>().map_err(|_| Error::BadRow {
                    row,
                    message: format!("column `{}`: cannot parse `{s}`", &header[c]),
                })
            };
            let vec_of = |cols: &[usize]| -> Result<DVector<f64>> {
                cols.iter().map(|&c| field(c)).collect::<Result<Vec<_>>>().map(DVector::from_vec)
            };
            let t_str = rec.get(t_col).unwrap_or("");
            let t = t_str.parse::<usize>().map_err(|_| Error::BadRow {
                row,
                message: format!("column `t`: cannot parse `{t_str}`"),
            })?;
            let (lo, hi) = (field(v_lo)?, field(v_hi)?);
            if !(lo <= hi) {
                return Err(Error::BadRow {
                    row,
                    message: format!("v_lo = {lo} exceeds v_hi = {hi}"),
                });
            }
            let drift = match &drift_cols {
                Some((l, h)) => Some(IntervalVector::from_bounds(vec_of(l)?, vec_of(h)?).map_err(
                    |e| Error::BadRow {
                        row,
                        message: format!("drift bounds: {e}"),
                    },
                )?),
                None => None,
            };
            records.push(Record {
                t,
                x: vec_of(&x_cols)?,
                y: field(y_col)?,
                v_lo: lo,
                v_hi: hi,
                v_true: v_true.map(field).transpose()?,
                theta_true: theta_cols.as_deref().map(vec_of).transpose()?,
                drift,
            });
        }
        Self::new(n, records)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn sample() -> Dataset {
        let recs = (1..=3)
            .map(|t| Record {
                t,
                x: dvector![t as f64 / 3.0, -0.1],
                y: 0.1 * t as f64,
                v_lo: -0.2,
                v_hi: 0.2,
                v_true: Some(0.05),
                theta_true: Some(dvector![1.0, 2.0]),
                drift: None,
            })
            .collect();
        Dataset::new(2, recs).unwrap()
    }

    #[test]
    fn header_order() {
        assert_eq!(
            sample().header(),
            ["t", "y", "x_1", "x_2", "v_lo", "v_hi", "v_true", "theta_true_1", "theta_true_2"]
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = sample();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "t,y,x_1,v_lo\n1,0,0,0\n";
        assert_eq!(
            Dataset::read_csv(text.as_bytes()).unwrap_err(),
            Error::MissingColumn("v_hi".into())
        );
        let text = "t,y,x_1,x_2,v_lo,v_hi,theta_true_1\n";
        assert_eq!(
            Dataset::read_csv(text.as_bytes()).unwrap_err(),
            Error::MissingColumn("theta_true_2".into())
        );
    }

    #[test]
    fn inverted_noise_bounds_rejected_with_row() {
        let text = "t,y,x_1,v_lo,v_hi\n1,0,1,-1,1\n2,0,1,0.5,0.1\n";
        assert!(matches!(
            Dataset::read_csv(text.as_bytes()),
            Err(Error::BadRow { row: 2, .. })
        ));
        let text = "t,y,x_1,v_lo,v_hi\n1,zz,1,-1,1\n";
        match Dataset::read_csv(text.as_bytes()) {
            Err(Error::BadRow { row: 1, message }) => assert!(message.contains("`y`")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validity_check_flags_noise_outside_bounds() {
        let mut ds = sample();
        ds.check_validity(None, 0.0).unwrap();
        ds.records[1].v_true = Some(0.3);
        assert!(matches!(ds.check_validity(None, 0.0), Err(Error::BadRow { row: 2, .. })));
    }
}
