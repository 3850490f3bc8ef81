use std::fmt;
use std::ops::Deref;

use crate::error::{GeomError, Result};

/// Chart coordinates of a point, guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint(Vec<f64>);

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self(coords))
        } else {
            Err(GeomError::NonFinite {
                what: "chart point".into(),
                point: coords,
            })
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ChartPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}

/// Axis-aligned coordinate box. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ChartDomain {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(GeomError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| !(lo < hi)) {
            return Err(GeomError::InvalidArgument(format!(
                "empty chart box {lower:?}..{upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lower.len()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(GeomError::ChartDomain { point: p.to_vec() })
        }
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &ChartDomain) -> ChartDomain {
        let mut lower = self.lower.clone();
        lower.extend_from_slice(&other.lower);
        let mut upper = self.upper.clone();
        upper.extend_from_slice(&other.upper);
        ChartDomain { lower, upper }
    }

    /// Midpoint of the box; infinite axes map to 0.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => 0.0,
            })
            .collect()
    }
}

pub(crate) fn check_dim(expected: usize, p: &[f64]) -> Result<()> {
    if p.len() != expected {
        return Err(GeomError::DimensionMismatch {
            expected,
            got: p.len(),
        });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(GeomError::NonFinite {
            what: "chart point".into(),
            point: p.to_vec(),
        });
    }
    Ok(())
}
