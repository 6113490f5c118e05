//! Loss models with analytically derived constant bundles, datasets with
//! one-element perturbations, and the mean per-index discrepancy rho.
//!
//! Two models are provided. `quadratic_1d` is f(theta, x) = (theta*x)^2 on
//! a positive data interval, the closed-form workhorse. `dissipative_nonconvex`
//! is f(theta, x) = (m0/2)*||theta||^2 + a*<x, sin(theta)> (sin applied
//! coordinatewise), which is non-convex in general position while keeping
//! every constant derivable in closed form.

use crate::stable::RngStream;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset must contain at least one point")]
    EmptyDataset,
    #[error("datasets must align: left has {left} points, right has {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("point {index} out of range for dataset of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("perturbed point at index {index} violates the declared domain diameter")]
    OutOfDomain { index: usize },
    #[error("dataset points exceed declared domain diameter {diameter}")]
    DiameterViolated { diameter: f64 },
    #[error("invalid model parameters: {0}")]
    BadModelParams(String),
    #[error("surrogate cap must be positive, got {0}")]
    BadCap(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Constants certifying the gradient growth and dissipativity inequalities
/// for a loss model over its declared data domain:
///
/// * `||grad f(t, x) - grad f(s, y)|| <= k1*||t - s|| + k2*||x - y||*(||t|| + ||s|| + 1)`
/// * `||grad f(0, x)|| <= b`
/// * `<grad f(t, x) - grad f(s, x), t - s> >= m*||t - s||^2 - k`
/// * directional second derivatives bounded by `l`, third by `m3`
///
/// The dissipativity inequality uses the standard sign (lower bound); a
/// coercive loss cannot satisfy an upper bound of that shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub k1: f64,
    pub k2: f64,
    pub b: f64,
    pub m: f64,
    pub k: f64,
    pub l: f64,
    pub m3: f64,
}

impl ConstantBundle {
    fn validate(&self) -> Result<(), LossError> {
        let nonneg = [self.k1, self.k2, self.b, self.k, self.l, self.m3];
        if nonneg.iter().any(|v| !(*v >= 0.0)) || !(self.m > 0.0) {
            return Err(LossError::BadModelParams(
                "constant bundle requires nonnegative entries and m > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A training dataset: n points in R^{d_x} with a declared domain diameter
/// that every pairwise distance respects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    domain_diameter: f64,
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, domain_diameter: f64) -> Result<Self, LossError> {
        if points.is_empty() {
            return Err(LossError::EmptyDataset);
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(LossError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for p in &points {
            if p.len() != dim {
                return Err(LossError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        if !(domain_diameter >= 0.0) {
            return Err(LossError::BadModelParams(
                "domain diameter must be nonnegative".into(),
            ));
        }
        let ds = Self {
            points,
            domain_diameter,
        };
        ds.check_diameter()?;
        Ok(ds)
    }

    fn check_diameter(&self) -> Result<(), LossError> {
        // tiny slack for round-off in distance evaluation
        let tol = self.domain_diameter * 1e-12 + 1e-12;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                if euclidean(p, q) > self.domain_diameter + tol {
                    return Err(LossError::DiameterViolated {
                        diameter: self.domain_diameter,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn domain_diameter(&self) -> f64 {
        self.domain_diameter
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Copy of this dataset with one point displaced. The perturbed point
    /// must keep every pairwise distance within the declared diameter.
    pub fn perturb_one(&self, index: usize, displacement: &[f64]) -> Result<Dataset, LossError> {
        if index >= self.points.len() {
            return Err(LossError::IndexOutOfRange {
                index,
                len: self.points.len(),
            });
        }
        if displacement.len() != self.dim() {
            return Err(LossError::DimensionMismatch {
                expected: self.dim(),
                got: displacement.len(),
            });
        }
        let mut points = self.points.clone();
        for (coord, d) in points[index].iter_mut().zip(displacement) {
            *coord += d;
        }
        let moved = points[index].clone();
        let tol = self.domain_diameter * 1e-12 + 1e-12;
        for (j, q) in points.iter().enumerate() {
            if j != index && euclidean(&moved, q) > self.domain_diameter + tol {
                return Err(LossError::OutOfDomain { index });
            }
        }
        Ok(Dataset {
            points,
            domain_diameter: self.domain_diameter,
        })
    }

    /// CSV: one point per row, no header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LossError> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for p in &self.points {
            wtr.write_record(p.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, domain_diameter: f64) -> Result<Self, LossError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let point = record
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| LossError::BadModelParams(format!("bad CSV value: {e}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            points.push(point);
        }
        Dataset::new(points, domain_diameter)
    }

    pub fn to_json(&self) -> Result<String, LossError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, LossError> {
        let raw: Dataset = serde_json::from_str(s)?;
        Dataset::new(raw.points, raw.domain_diameter)
    }
}

/// Mean per-index distance between two aligned datasets. For a one-element
/// perturbation of norm delta in a size-n dataset this equals delta/n.
pub fn rho(a: &Dataset, b: &Dataset) -> Result<f64, LossError> {
    if a.len() != b.len() {
        return Err(LossError::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dim() != b.dim() {
        return Err(LossError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let total: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| euclidean(p, q))
        .sum();
    Ok(total / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossKind {
    /// f(theta, x) = (theta * x)^2 with scalar theta and x in [x_min, x_max],
    /// x_min > 0 so the dissipativity rate m = 2 x_min^2 stays positive.
    Quadratic1d { x_min: f64, x_max: f64 },
    /// f(theta, x) = (m0/2) ||theta||^2 + a <x, sin(theta)> with
    /// |x_i| <= x_max and a * x_max < m0.
    DissipativeNonconvex { m0: f64, a: f64, x_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    kind: LossKind,
    theta_dim: usize,
    constants: ConstantBundle,
}

impl LossModel {
    pub fn quadratic_1d(x_min: f64, x_max: f64) -> Result<Self, LossError> {
        if !(x_min > 0.0 && x_max >= x_min && x_max.is_finite()) {
            return Err(LossError::BadModelParams(format!(
                "quadratic_1d needs 0 < x_min <= x_max, got [{x_min}, {x_max}]"
            )));
        }
        let constants = ConstantBundle {
            k1: 2.0 * x_max * x_max,
            k2: 4.0 * x_max,
            b: 0.0,
            m: 2.0 * x_min * x_min,
            k: 0.0,
            l: 2.0 * x_max * x_max,
            m3: 0.0,
        };
        constants.validate()?;
        Ok(Self {
            kind: LossKind::Quadratic1d { x_min, x_max },
            theta_dim: 1,
            constants,
        })
    }

    pub fn dissipative_nonconvex(
        m0: f64,
        a: f64,
        x_max: f64,
        dim: usize,
    ) -> Result<Self, LossError> {
        if dim == 0 {
            return Err(LossError::BadModelParams(
                "dimension must be at least 1".into(),
            ));
        }
        if !(m0 > 0.0 && a >= 0.0 && x_max >= 0.0 && a * x_max < m0) {
            return Err(LossError::BadModelParams(format!(
                "dissipative_nonconvex needs m0 > 0 and a*x_max < m0, got m0 = {m0}, a*x_max = {}",
                a * x_max
            )));
        }
        let constants = ConstantBundle {
            k1: m0 + a * x_max,
            k2: a,
            b: a * x_max * (dim as f64).sqrt(),
            m: m0 - a * x_max,
            k: 0.0,
            l: m0 + a * x_max,
            m3: a * x_max,
        };
        constants.validate()?;
        Ok(Self {
            kind: LossKind::DissipativeNonconvex { m0, a, x_max },
            theta_dim: dim,
            constants,
        })
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn constants(&self) -> &ConstantBundle {
        &self.constants
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    pub fn data_dim(&self) -> usize {
        match self.kind {
            LossKind::Quadratic1d { .. } => 1,
            LossKind::DissipativeNonconvex { .. } => self.theta_dim,
        }
    }

    /// Diameter of the declared data domain.
    pub fn domain_diameter(&self) -> f64 {
        match self.kind {
            LossKind::Quadratic1d { x_min, x_max } => x_max - x_min,
            LossKind::DissipativeNonconvex { x_max, .. } => {
                2.0 * x_max * (self.theta_dim as f64).sqrt()
            }
        }
    }

    /// Radius of the test envelope ||theta|| <= 10 (1 + B/m); chains
    /// concentrate inside this Lyapunov ball.
    pub fn envelope_radius(&self) -> f64 {
        10.0 * (1.0 + self.constants.b / self.constants.m)
    }

    fn check_dims(&self, theta: &[f64], x: &[f64]) -> Result<(), LossError> {
        if theta.len() != self.theta_dim {
            return Err(LossError::DimensionMismatch {
                expected: self.theta_dim,
                got: theta.len(),
            });
        }
        if x.len() != self.data_dim() {
            return Err(LossError::DimensionMismatch {
                expected: self.data_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn loss(&self, theta: &[f64], x: &[f64]) -> Result<f64, LossError> {
        self.check_dims(theta, x)?;
        Ok(match self.kind {
            LossKind::Quadratic1d { .. } => {
                let v = theta[0] * x[0];
                v * v
            }
            LossKind::DissipativeNonconvex { m0, a, .. } => {
                let sq: f64 = theta.iter().map(|t| t * t).sum();
                let mixed: f64 = x.iter().zip(theta).map(|(xi, ti)| xi * ti.sin()).sum();
                0.5 * m0 * sq + a * mixed
            }
        })
    }

    /// Exact gradient of the loss at (theta, x).
    pub fn grad_f(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>, LossError> {
        self.check_dims(theta, x)?;
        Ok(match self.kind {
            LossKind::Quadratic1d { .. } => vec![2.0 * x[0] * x[0] * theta[0]],
            LossKind::DissipativeNonconvex { m0, a, .. } => theta
                .iter()
                .zip(x)
                .map(|(ti, xi)| m0 * ti + a * xi * ti.cos())
                .collect(),
        })
    }

    /// Average of grad_f over the dataset (direct summation).
    pub fn grad_f_hat(&self, theta: &[f64], data: &Dataset) -> Result<Vec<f64>, LossError> {
        if data.is_empty() {
            return Err(LossError::EmptyDataset);
        }
        let mut acc = vec![0.0; self.theta_dim];
        for x in data.points() {
            let g = self.grad_f(theta, x)?;
            for (a, gi) in acc.iter_mut().zip(&g) {
                *a += gi;
            }
        }
        let n = data.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        Ok(acc)
    }

    /// Empirical-gradient evaluator with the dataset reduced to its
    /// sufficient statistics, so one chain step costs O(d) regardless of n.
    pub fn empirical_grad(&self, data: &Dataset) -> Result<EmpiricalGrad, LossError> {
        if data.is_empty() {
            return Err(LossError::EmptyDataset);
        }
        if data.dim() != self.data_dim() {
            return Err(LossError::DimensionMismatch {
                expected: self.data_dim(),
                got: data.dim(),
            });
        }
        Ok(match self.kind {
            LossKind::Quadratic1d { .. } => {
                let mean_sq: f64 =
                    data.points().iter().map(|p| p[0] * p[0]).sum::<f64>() / data.len() as f64;
                EmpiricalGrad::Quadratic {
                    two_mean_sq: 2.0 * mean_sq,
                }
            }
            LossKind::DissipativeNonconvex { m0, a, .. } => {
                let d = data.dim();
                let mut mean_x = vec![0.0; d];
                for p in data.points() {
                    for (m, v) in mean_x.iter_mut().zip(p) {
                        *m += v;
                    }
                }
                let n = data.len() as f64;
                for m in &mut mean_x {
                    *m /= n;
                }
                EmpiricalGrad::Nonconvex { m0, a, mean_x }
            }
        })
    }

    /// One data point drawn uniformly from the declared domain (the default
    /// population distribution).
    pub fn sample_data_point(&self, rng: &mut RngStream) -> Vec<f64> {
        match self.kind {
            LossKind::Quadratic1d { x_min, x_max } => {
                vec![x_min + (x_max - x_min) * rng.uniform_open01()]
            }
            LossKind::DissipativeNonconvex { x_max, .. } => (0..self.theta_dim)
                .map(|_| x_max * (2.0 * rng.uniform_open01() - 1.0))
                .collect(),
        }
    }

    /// Dataset of n points drawn from the default population distribution,
    /// with the domain diameter set from the model.
    pub fn sample_dataset(&self, n: usize, rng: &mut RngStream) -> Result<Dataset, LossError> {
        if n == 0 {
            return Err(LossError::EmptyDataset);
        }
        let points = (0..n).map(|_| self.sample_data_point(rng)).collect();
        Dataset::new(points, self.domain_diameter())
    }
}

/// Dataset-averaged gradient reduced to sufficient statistics.
#[derive(Debug, Clone)]
pub enum EmpiricalGrad {
    Quadratic { two_mean_sq: f64 },
    Nonconvex { m0: f64, a: f64, mean_x: Vec<f64> },
}

impl EmpiricalGrad {
    pub fn eval_into(&self, theta: &[f64], out: &mut [f64]) {
        match self {
            EmpiricalGrad::Quadratic { two_mean_sq } => out[0] = two_mean_sq * theta[0],
            EmpiricalGrad::Nonconvex { m0, a, mean_x } => {
                for ((o, ti), xi) in out.iter_mut().zip(theta).zip(mean_x) {
                    *o = m0 * ti + a * xi * ti.cos();
                }
            }
        }
    }
}

/// Bounded Lipschitz surrogate ell(theta, x) = cap * tanh(f(theta, x) / cap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateLoss {
    pub cap: f64,
}

impl SurrogateLoss {
    pub fn new(cap: f64) -> Result<Self, LossError> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(LossError::BadCap(cap));
        }
        Ok(Self { cap })
    }

    pub fn eval(&self, model: &LossModel, theta: &[f64], x: &[f64]) -> Result<f64, LossError> {
        Ok(self.cap * (model.loss(theta, x)? / self.cap).tanh())
    }

    /// ||grad_theta ell|| = sech^2(f/cap) * ||grad f||.
    pub fn grad_norm(&self, model: &LossModel, theta: &[f64], x: &[f64]) -> Result<f64, LossError> {
        let f = model.loss(theta, x)?;
        let g = model.grad_f(theta, x)?;
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sech = 1.0 / (f / self.cap).cosh();
        Ok(sech * sech * gn)
    }

    /// Numerical sup of ||grad ell|| over random (theta, x) pairs inside the
    /// test envelope: the reported Lipschitz constant of the surrogate.
    pub fn lipschitz_estimate(
        &self,
        model: &LossModel,
        probes: usize,
        rng: &mut RngStream,
    ) -> Result<f64, LossError> {
        let radius = model.envelope_radius();
        let d = model.theta_dim();
        let mut best: f64 = 0.0;
        for _ in 0..probes {
            let mut theta = vec![0.0; d];
            rng.fill_standard_normal(&mut theta);
            let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            // radius drawn uniformly (not volume-weighted): the surrogate
            // gradient peaks on inner shells where tanh is not yet saturated
            let r = radius * rng.uniform_open01();
            for t in &mut theta {
                *t *= r / norm;
            }
            let x = model.sample_data_point(rng);
            best = best.max(self.grad_norm(model, &theta, &x)?);
        }
        Ok(best)
    }
}

/// Empirical surrogate risk averaged over the dataset and the supplied
/// parameter samples.
pub fn empirical_risk(
    model: &LossModel,
    surrogate: &SurrogateLoss,
    theta_samples: &[Vec<f64>],
    data: &Dataset,
) -> Result<f64, LossError> {
    if theta_samples.is_empty() {
        return Err(LossError::EmptyInput("theta_samples"));
    }
    let mut acc = 0.0;
    for theta in theta_samples {
        for x in data.points() {
            acc += surrogate.eval(model, theta, x)?;
        }
    }
    Ok(acc / (theta_samples.len() * data.len()) as f64)
}

/// Monte-Carlo estimate of the population surrogate risk under the default
/// (uniform-on-domain) data distribution.
pub fn population_risk_estimate(
    model: &LossModel,
    surrogate: &SurrogateLoss,
    theta_samples: &[Vec<f64>],
    draws: usize,
    rng: &mut RngStream,
) -> Result<f64, LossError> {
    if theta_samples.is_empty() {
        return Err(LossError::EmptyInput("theta_samples"));
    }
    if draws == 0 {
        return Err(LossError::EmptyInput("draws"));
    }
    let mut acc = 0.0;
    for _ in 0..draws {
        let x = model.sample_data_point(rng);
        for theta in theta_samples {
            acc += surrogate.eval(model, theta, &x)?;
        }
    }
    Ok(acc / (draws * theta_samples.len()) as f64)
}
