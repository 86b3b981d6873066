//! Axis-aligned boxes in n-space.
//!
//! A box is stored by its bounds `(lower, upper)`. The center/radius pair
//! `c = (upper + lower) / 2`, `r = (upper - lower) / 2` is a derived view.
//! No outward rounding is performed; [`IntervalVector::contains`] takes a
//! caller-supplied slack instead.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalVector {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

/// Outcome of intersecting two boxes.
#[derive(Debug, Clone, PartialEq)]
pub enum Intersection {
    Consistent(IntervalVector),
    /// The boxes are disjoint along `components` (zero-based).
    Empty { components: Vec<usize> },
}

impl Intersection {
    pub fn is_empty(&self) -> bool {
        matches!(self, Intersection::Empty { .. })
    }

    pub fn into_box(self) -> Option<IntervalVector> {
        match self {
            Intersection::Consistent(b) => Some(b),
            Intersection::Empty { .. } => None,
        }
    }
}

impl IntervalVector {
    pub fn from_bounds(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        check_dim("interval bounds", lower.len(), upper.len())?;
        for (i, (&lo, &hi)) in lower.iter().zip(upper.iter()).enumerate() {
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::NonFinite("interval bounds"));
            }
            if lo > hi {
                return Err(Error::BoundInversion {
                    index: i,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_center_radius(center: &DVector<f64>, radius: &DVector<f64>) -> Result<Self> {
        check_dim("interval center/radius", center.len(), radius.len())?;
        if let Some((i, &r)) = radius.iter().enumerate().find(|(_, &r)| r < 0.0 || r.is_nan()) {
            return Err(Error::NegativeRadius { index: i, value: r });
        }
        Self::from_bounds(center - radius, center + radius)
    }

    /// Degenerate box `[p, p]`.
    pub fn point(p: DVector<f64>) -> Self {
        Self {
            lower: p.clone(),
            upper: p,
        }
    }

    /// One-dimensional box `[lo, hi]`, used for scalar noise bounds.
    pub fn scalar(lo: f64, hi: f64) -> Result<Self> {
        Self::from_bounds(DVector::from_element(1, lo), DVector::from_element(1, hi))
    }

    /// Box with every component equal to `[-half_width, half_width]`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::from_bounds(
            DVector::from_element(n, -half_width),
            DVector::from_element(n, half_width),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.upper + &self.lower) * 0.5
    }

    pub fn radius(&self) -> DVector<f64> {
        (&self.upper - &self.lower) * 0.5
    }

    pub fn widths(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(self.upper.iter()).all(|v| v.is_finite())
    }

    /// Componentwise intersection. Disjoint components are reported rather
    /// than turned into an error.
    pub fn intersect(&self, other: &IntervalVector) -> Result<Intersection> {
        check_dim("intersect", self.dim(), other.dim())?;
        let lower = self.lower.sup(&other.lower);
        let upper = self.upper.inf(&other.upper);
        let components: Vec<usize> = (0..lower.len()).filter(|&i| lower[i] > upper[i]).collect();
        if components.is_empty() {
            Ok(Intersection::Consistent(Self { lower, upper }))
        } else {
            Ok(Intersection::Empty { components })
        }
    }

    /// Minkowski sum with `d`: bounds add.
    pub fn translate(&self, d: &IntervalVector) -> Result<IntervalVector> {
        check_dim("translate", self.dim(), d.dim())?;
        Ok(Self {
            lower: &self.lower + &d.lower,
            upper: &self.upper + &d.upper,
        })
    }

    /// `lower - slack <= p <= upper + slack` componentwise.
    pub fn contains(&self, p: &DVector<f64>, slack: f64) -> Result<bool> {
        check_dim("contains", self.dim(), p.len())?;
        Ok(p.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(&x, (&lo, &hi))| lo - slack <= x && x <= hi + slack))
    }

    /// `self ⊆ other` up to `slack`.
    pub fn is_subset_of(&self, other: &IntervalVector, slack: f64) -> Result<bool> {
        check_dim("subset", self.dim(), other.dim())?;
        Ok((0..self.dim()).all(|i| {
            other.lower[i] - slack <= self.lower[i] && self.upper[i] <= other.upper[i] + slack
        }))
    }
}

/// Smallest box containing `{ M z : z in box }`: center `M c_z`, radius `|M| r_z`.
pub fn tightest_image(m: &DMatrix<f64>, z: &IntervalVector) -> Result<IntervalVector> {
    check_dim("tightest_image", m.ncols(), z.dim())?;
    let center = m * z.center();
    let radius = m.abs() * z.radius();
    Ok(IntervalVector {
        lower: &center - &radius,
        upper: &center + &radius,
    })
}
