use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::ChartDomain;
use crate::error::{GeomError, Result};

/// Where a pointwise condition is sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// Cartesian product of per-axis coordinates; the first axis varies slowest.
    Tensor { axes: Vec<Vec<f64>> },
    Points(Vec<Vec<f64>>),
    /// Uniform random points in a box, reproducible from `seed`.
    Random {
        lower: Vec<f64>,
        upper: Vec<f64>,
        count: usize,
        seed: u64,
    },
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Midpoints of `count` equal cells of `[lo, hi]`; never touches the ends.
pub fn cell_centers(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect()
}

impl SampleGrid {
    /// `r` from `r_min` to `r_max` inclusive, fiber coordinates at cell
    /// centers of the fiber box.
    pub fn split(r_min: f64, r_max: f64, r_count: usize, fiber_box: &ChartDomain, fiber_count: usize) -> Self {
        let mut axes = vec![linspace(r_min, r_max, r_count)];
        for k in 0..fiber_box.dim() {
            axes.push(cell_centers(fiber_box.lower()[k], fiber_box.upper()[k], fiber_count));
        }
        SampleGrid::Tensor { axes }
    }

    pub fn random_in(domain: &ChartDomain, count: usize, seed: u64) -> Self {
        SampleGrid::Random {
            lower: domain.lower().to_vec(),
            upper: domain.upper().to_vec(),
            count,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SampleGrid::Tensor { axes } => {
                if axes.is_empty() {
                    0
                } else {
                    axes.iter().map(Vec::len).product()
                }
            }
            SampleGrid::Points(p) => p.len(),
            SampleGrid::Random { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let pts = match self {
            SampleGrid::Tensor { axes } => {
                let mut out: Vec<Vec<f64>> = vec![Vec::new()];
                for axis in axes {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            axis.iter().map(move |&c| {
                                let mut q = prefix.clone();
                                q.push(c);
                                q
                            })
                        })
                        .collect();
                }
                if axes.is_empty() {
                    Vec::new()
                } else {
                    out
                }
            }
            SampleGrid::Points(p) => p.clone(),
            SampleGrid::Random {
                lower,
                upper,
                count,
                seed,
            } => {
                if lower.iter().chain(upper).any(|b| !b.is_finite()) {
                    return Err(GeomError::InvalidArgument("random sampling needs a bounded box".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| lower.iter().zip(upper).map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect())
                    .collect()
            }
        };
        if pts.is_empty() {
            return Err(GeomError::EmptyGrid);
        }
        Ok(pts)
    }

    /// One-line description for report headers.
    pub fn describe(&self) -> String {
        match self {
            SampleGrid::Tensor { axes } => {
                let parts: Vec<String> = axes
                    .iter()
                    .enumerate()
                    .map(|(k, a)| match (a.first(), a.last()) {
                        (Some(lo), Some(hi)) => format!("x{k}: {} pts in [{lo}, {hi}]", a.len()),
                        _ => format!("x{k}: empty"),
                    })
                    .collect();
                format!("tensor grid ({} points): {}", self.len(), parts.join("; "))
            }
            SampleGrid::Points(p) => format!("explicit list of {} points", p.len()),
            SampleGrid::Random {
                lower,
                upper,
                count,
                seed,
            } => format!("{count} uniform random points in box {lower:?}..{upper:?}, seed {seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_order_and_size() {
        let g = SampleGrid::Tensor {
            axes: vec![vec![0.0, 1.0], vec![5.0, 6.0, 7.0]],
        };
        let p = g.points().unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, 5.0]);
        assert_eq!(p[1], vec![0.0, 6.0]);
        assert_eq!(p[3], vec![1.0, 5.0]);
    }

    #[test]
    fn random_grid_is_reproducible() {
        let dom = ChartDomain::cube(2, -1.0, 1.0).unwrap();
        let a = SampleGrid::random_in(&dom, 10, 7).points().unwrap();
        let b = SampleGrid::random_in(&dom, 10, 7).points().unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| dom.contains(p)));
    }

    #[test]
    fn empty_grid_errors() {
        assert!(matches!(SampleGrid::Points(vec![]).points(), Err(GeomError::EmptyGrid)));
    }

    #[test]
    fn cell_centers_stay_inside() {
        let c = cell_centers(-3.0, 3.0, 9);
        assert!((c[0] + 3.0 - 1.0 / 3.0).abs() < 1e-15 && c.len() == 9);
        assert!((c[4]).abs() < 1e-15);
    }
}
