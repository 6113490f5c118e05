//! Empirical 1-Wasserstein estimators between finite sample clouds, plus
//! empirical p-moment diagnostics.
//!
//! `w1_assignment` is exact (optimal assignment under Euclidean ground
//! distance) and guarded by a count cap; `w1_sliced` is the scalable proxy
//! for larger clouds and is reported as a proxy, never substituted where an
//! exact value is claimed. No W_p estimator for p > 1 is offered: when the
//! population p-th moment is infinite any finite sample number would be
//! misleading, so divergence is demonstrated through `empirical_p_moment`
//! growth instead.

use crate::losses::euclidean;
use crate::stable::RngStream;
use thiserror::Error;

/// Count guard for the cubic-time assignment solver.
pub const ASSIGNMENT_CAP: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WassersteinError {
    #[error("empirical measure must be nonempty")]
    Empty,
    #[error("samples must share one dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("estimator requires equal sample counts, got {left} and {right}")]
    CountMismatch { left: usize, right: usize },
    #[error("w1_exact_1d requires one-dimensional samples, got d = {0}")]
    NotOneDimensional(usize),
    #[error("sample contains a non-finite coordinate")]
    NonFinite,
    #[error(
        "assignment solver capped at {cap} points, got {got}; use w1_sliced for larger clouds"
    )]
    CapExceeded { cap: usize, got: usize },
    #[error("moment order must be positive, got {0}")]
    BadOrder(f64),
    #[error("projection count must be positive")]
    NoProjections,
}

/// A finite sample cloud standing in for a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    samples: Vec<Vec<f64>>,
}

impl EmpiricalMeasure {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self, WassersteinError> {
        if samples.is_empty() {
            return Err(WassersteinError::Empty);
        }
        let dim = samples[0].len();
        if dim == 0 {
            return Err(WassersteinError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for s in &samples {
            if s.len() != dim {
                return Err(WassersteinError::DimensionMismatch {
                    expected: dim,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(WassersteinError::NonFinite);
            }
        }
        Ok(Self { samples })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self, WassersteinError> {
        Self::new(xs.iter().map(|x| vec![*x]).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

/// Neumaier compensated summation: makes accumulated sums independent of
/// platform-level reassociation and keeps the sliced estimator deterministic.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_equal_counts(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<(), WassersteinError> {
    if a.len() != b.len() {
        return Err(WassersteinError::CountMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn check_equal_dims(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<(), WassersteinError> {
    if a.dim() != b.dim() {
        return Err(WassersteinError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Exact W1 between two equal-count one-dimensional empirical measures:
/// the mean absolute difference of sorted samples.
pub fn w1_exact_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64, WassersteinError> {
    if a.dim() != 1 {
        return Err(WassersteinError::NotOneDimensional(a.dim()));
    }
    check_equal_dims(a, b)?;
    check_equal_counts(a, b)?;
    let mut xs: Vec<f64> = a.samples.iter().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = b.samples.iter().map(|p| p[0]).collect();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite by construction"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("finite by construction"));
    let total = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| (x - y).abs()));
    Ok(total / xs.len() as f64)
}

fn w1_sorted_scalars(xs: &mut [f64], ys: &mut [f64]) -> f64 {
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite by construction"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("finite by construction"));
    compensated_sum(xs.iter().zip(ys.iter()).map(|(x, y)| (x - y).abs())) / xs.len() as f64
}

/// Minimum mean matching cost between two equal-count clouds under the
/// Euclidean ground distance: exact W1 between the empirical measures.
///
/// Shortest-augmenting-path assignment with potentials, O(n^3); guarded by
/// [`ASSIGNMENT_CAP`].
pub fn w1_assignment(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64, WassersteinError> {
    check_equal_dims(a, b)?;
    check_equal_counts(a, b)?;
    let n = a.len();
    if n > ASSIGNMENT_CAP {
        return Err(WassersteinError::CapExceeded {
            cap: ASSIGNMENT_CAP,
            got: n,
        });
    }
    let cost: Vec<Vec<f64>> = a
        .samples
        .iter()
        .map(|p| b.samples.iter().map(|q| euclidean(p, q)).collect())
        .collect();

    // row/column potentials, 1-indexed; p[j] = row assigned to column j
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let total = compensated_sum((1..=n).map(|j| cost[p[j] - 1][j - 1]));
    Ok(total / n as f64)
}

/// Sliced W1 proxy: average over random unit directions of the exact 1-d W1
/// of the projected clouds. A lower-bound-flavored stand-in for
/// `w1_assignment` when the count cap is exceeded.
pub fn w1_sliced(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    num_projections: usize,
    rng: &mut RngStream,
) -> Result<f64, WassersteinError> {
    check_equal_dims(a, b)?;
    check_equal_counts(a, b)?;
    if num_projections == 0 {
        return Err(WassersteinError::NoProjections);
    }
    let d = a.dim();
    let mut dir = vec![0.0f64; d];
    let mut proj_a = vec![0.0f64; a.len()];
    let mut proj_b = vec![0.0f64; b.len()];
    let mut per_projection = Vec::with_capacity(num_projections);
    for _ in 0..num_projections {
        loop {
            rng.fill_standard_normal(&mut dir);
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for v in &mut dir {
                    *v /= norm;
                }
                break;
            }
        }
        for (slot, s) in proj_a.iter_mut().zip(&a.samples) {
            *slot = s.iter().zip(&dir).map(|(x, u)| x * u).sum();
        }
        for (slot, s) in proj_b.iter_mut().zip(&b.samples) {
            *slot = s.iter().zip(&dir).map(|(x, u)| x * u).sum();
        }
        per_projection.push(w1_sorted_scalars(&mut proj_a, &mut proj_b));
    }
    Ok(compensated_sum(per_projection.into_iter()) / num_projections as f64)
}

/// Mean of ||sample||^p over the cloud.
pub fn empirical_p_moment(a: &EmpiricalMeasure, p: f64) -> Result<f64, WassersteinError> {
    if !(p > 0.0) {
        return Err(WassersteinError::BadOrder(p));
    }
    let total = compensated_sum(a.samples.iter().map(|s| {
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        norm.powf(p)
    }));
    Ok(total / a.len() as f64)
}
