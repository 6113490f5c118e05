//! Euler-Maruyama simulation of twin heavy-tailed dynamics under
//! synchronous (shared-noise) coupling, plus stationary-sample harvesting.
//!
//! One update reads theta' = theta - eta * grad_Fhat(theta, data) + inc,
//! where inc is an isotropic alpha-stable increment of scale
//! sigma * eta^(1/alpha). Running the recursion on two aligned datasets
//! with the identical increment sequence realizes a feasible coupling, so
//! the mean terminal distance upper-bounds the 1-Wasserstein distance
//! between the two iterate laws.

use crate::losses::{Dataset, LossError, LossModel};
use crate::stable::{sample_increment, RngStream, StableError, StableNoiseSpec};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid chain config: {0}")]
    BadConfig(String),
    #[error("iterate diverged (non-finite coordinate) in replica {replica} at step {step}")]
    Diverged { replica: usize, step: usize },
    #[error("datasets are not aligned: {0}")]
    Misaligned(String),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Stable(#[from] StableError),
}

/// Step-size, horizon, and replication plan for a chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Step size, in (0, 1).
    pub eta: f64,
    /// Total iterations per replica.
    pub steps: usize,
    /// Iterations discarded before an iterate counts as stationary.
    pub burn_in: usize,
    /// Independent replica count.
    pub replicas: usize,
    /// Base seed; replica r uses the (seed, r) random stream.
    pub seed: u64,
    /// Shared initial iterate for both coupled chains.
    pub theta0: Vec<f64>,
}

impl ChainConfig {
    pub fn validate(&self, theta_dim: usize) -> Result<(), DynamicsError> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(DynamicsError::BadConfig(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if self.burn_in >= self.steps {
            return Err(DynamicsError::BadConfig(format!(
                "burn_in ({}) must be below steps ({})",
                self.burn_in, self.steps
            )));
        }
        if self.replicas == 0 {
            return Err(DynamicsError::BadConfig(
                "replicas must be at least 1".into(),
            ));
        }
        if self.theta0.len() != theta_dim {
            return Err(DynamicsError::BadConfig(format!(
                "theta0 has dimension {}, model expects {}",
                self.theta0.len(),
                theta_dim
            )));
        }
        Ok(())
    }

    /// Default burn-in of 10/(m*eta) steps: about twenty time-constants of
    /// the m/2 Lyapunov drift rate.
    pub fn default_burn_in(m: f64, eta: f64) -> usize {
        (10.0 / (m * eta)).ceil() as usize
    }
}

/// Terminal iterates and coupled distances of a twin-chain run.
#[derive(Debug, Clone)]
pub struct CoupledTrajectoryResult {
    /// Terminal iterate of the first chain, one per replica.
    pub theta_samples: Vec<Vec<f64>>,
    /// Terminal iterate of the second chain, one per replica.
    pub theta_hat_samples: Vec<Vec<f64>>,
    /// Terminal ||theta - theta_hat|| per replica.
    pub coupled_distances: Vec<f64>,
    /// Mean coupled distance at every step, when recorded.
    pub time_series: Option<Vec<f64>>,
}

impl CoupledTrajectoryResult {
    pub fn mean_coupled_distance(&self) -> f64 {
        self.coupled_distances.iter().sum::<f64>() / self.coupled_distances.len() as f64
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One Euler-Maruyama update with a fresh stable increment. Accepts
/// eta in (0, 1]; runs enforce the stricter (0, 1) at config level.
/// A non-finite result is reported as divergence, never clipped: large
/// finite excursions are legitimate heavy-tail data.
pub fn step(
    model: &LossModel,
    data: &Dataset,
    theta: &[f64],
    eta: f64,
    noise: &StableNoiseSpec,
    rng: &mut RngStream,
) -> Result<Vec<f64>, DynamicsError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(DynamicsError::BadConfig(format!(
            "step size {eta} outside (0, 1]"
        )));
    }
    let grad = model.grad_f_hat(theta, data)?;
    let inc = sample_increment(noise, theta.len(), eta, rng)?;
    let next: Vec<f64> = theta
        .iter()
        .zip(&grad)
        .zip(&inc)
        .map(|((t, g), s)| t - eta * g + s)
        .collect();
    if !all_finite(&next) {
        return Err(DynamicsError::Diverged {
            replica: 0,
            step: 0,
        });
    }
    Ok(next)
}

fn check_aligned(a: &Dataset, b: &Dataset) -> Result<(), DynamicsError> {
    if a.len() != b.len() {
        return Err(DynamicsError::Misaligned(format!(
            "sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.dim() != b.dim() {
        return Err(DynamicsError::Misaligned(format!(
            "dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

struct ReplicaOutput {
    theta: Vec<f64>,
    theta_hat: Vec<f64>,
    distance: f64,
    distances_per_step: Option<Vec<f64>>,
}

/// Runs both chains on the two aligned datasets from the same start, with
/// the identical increment sequence per replica. Replicas are independent
/// (stream id = replica index) and embarrassingly parallel.
pub fn run_coupled(
    model: &LossModel,
    data_a: &Dataset,
    data_b: &Dataset,
    noise: &StableNoiseSpec,
    config: &ChainConfig,
    record_time_series: bool,
) -> Result<CoupledTrajectoryResult, DynamicsError> {
    config.validate(model.theta_dim())?;
    check_aligned(data_a, data_b)?;
    let grad_a = model.empirical_grad(data_a)?;
    let grad_b = model.empirical_grad(data_b)?;
    let d = model.theta_dim();

    let outputs: Vec<Result<ReplicaOutput, DynamicsError>> = (0..config.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut rng = RngStream::new(config.seed, replica as u64);
            let mut theta = config.theta0.clone();
            let mut theta_hat = config.theta0.clone();
            let mut g = vec![0.0; d];
            let mut series = record_time_series.then(|| Vec::with_capacity(config.steps));
            for step_idx in 0..config.steps {
                let inc = sample_increment(noise, d, config.eta, &mut rng)?;
                grad_a.eval_into(&theta, &mut g);
                for i in 0..d {
                    theta[i] = theta[i] - config.eta * g[i] + inc[i];
                }
                grad_b.eval_into(&theta_hat, &mut g);
                for i in 0..d {
                    theta_hat[i] = theta_hat[i] - config.eta * g[i] + inc[i];
                }
                if !all_finite(&theta) || !all_finite(&theta_hat) {
                    return Err(DynamicsError::Diverged {
                        replica,
                        step: step_idx,
                    });
                }
                if let Some(s) = series.as_mut() {
                    let dist: f64 = theta
                        .iter()
                        .zip(&theta_hat)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    s.push(dist);
                }
            }
            let distance = theta
                .iter()
                .zip(&theta_hat)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(ReplicaOutput {
                theta,
                theta_hat,
                distance,
                distances_per_step: series,
            })
        })
        .collect();

    let mut theta_samples = Vec::with_capacity(config.replicas);
    let mut theta_hat_samples = Vec::with_capacity(config.replicas);
    let mut coupled_distances = Vec::with_capacity(config.replicas);
    let mut series_acc: Option<Vec<f64>> = record_time_series.then(|| vec![0.0; config.steps]);
    for out in outputs {
        let out = out?;
        theta_samples.push(out.theta);
        theta_hat_samples.push(out.theta_hat);
        coupled_distances.push(out.distance);
        if let (Some(acc), Some(per_step)) = (series_acc.as_mut(), out.distances_per_step) {
            for (a, v) in acc.iter_mut().zip(per_step) {
                *a += v;
            }
        }
    }
    if let Some(acc) = series_acc.as_mut() {
        for a in acc.iter_mut() {
            *a /= config.replicas as f64;
        }
    }
    Ok(CoupledTrajectoryResult {
        theta_samples,
        theta_hat_samples,
        coupled_distances,
        time_series: series_acc,
    })
}

/// One replica of the coupled run with every iterate of both chains
/// recorded, for trajectory dumps. Uses the same stream layout as
/// `run_coupled`, so replica `stream` here reproduces that replica there.
pub fn run_coupled_recorded(
    model: &LossModel,
    data_a: &Dataset,
    data_b: &Dataset,
    noise: &StableNoiseSpec,
    config: &ChainConfig,
    stream: u64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), DynamicsError> {
    config.validate(model.theta_dim())?;
    check_aligned(data_a, data_b)?;
    let grad_a = model.empirical_grad(data_a)?;
    let grad_b = model.empirical_grad(data_b)?;
    let d = model.theta_dim();
    let mut rng = RngStream::new(config.seed, stream);
    let mut theta = config.theta0.clone();
    let mut theta_hat = config.theta0.clone();
    let mut g = vec![0.0; d];
    let mut path_a = Vec::with_capacity(config.steps);
    let mut path_b = Vec::with_capacity(config.steps);
    for step_idx in 0..config.steps {
        let inc = sample_increment(noise, d, config.eta, &mut rng)?;
        grad_a.eval_into(&theta, &mut g);
        for i in 0..d {
            theta[i] = theta[i] - config.eta * g[i] + inc[i];
        }
        grad_b.eval_into(&theta_hat, &mut g);
        for i in 0..d {
            theta_hat[i] = theta_hat[i] - config.eta * g[i] + inc[i];
        }
        if !all_finite(&theta) || !all_finite(&theta_hat) {
            return Err(DynamicsError::Diverged {
                replica: stream as usize,
                step: step_idx,
            });
        }
        path_a.push(theta.clone());
        path_b.push(theta_hat.clone());
    }
    Ok((path_a, path_b))
}

/// Independently seeded replicas on a single dataset; returns the terminal
/// iterate of each replica as an approximate stationary sample.
pub fn run_single(
    model: &LossModel,
    data: &Dataset,
    noise: &StableNoiseSpec,
    config: &ChainConfig,
) -> Result<Vec<Vec<f64>>, DynamicsError> {
    config.validate(model.theta_dim())?;
    let grad = model.empirical_grad(data)?;
    let d = model.theta_dim();
    (0..config.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut rng = RngStream::new(config.seed, replica as u64);
            let mut theta = config.theta0.clone();
            let mut g = vec![0.0; d];
            for step_idx in 0..config.steps {
                let inc = sample_increment(noise, d, config.eta, &mut rng)?;
                grad.eval_into(&theta, &mut g);
                for i in 0..d {
                    theta[i] = theta[i] - config.eta * g[i] + inc[i];
                }
                if !all_finite(&theta) {
                    return Err(DynamicsError::Diverged {
                        replica,
                        step: step_idx,
                    });
                }
            }
            Ok(theta)
        })
        .collect()
}

/// Harvest plan for approximate stationary samples along one trajectory:
/// discard `burn_in` steps, then record every `stride`-th iterate until
/// `count` samples are collected.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    pub eta: f64,
    pub burn_in: usize,
    pub count: usize,
    pub stride: usize,
    pub seed: u64,
    pub stream: u64,
    pub theta0: Vec<f64>,
}

/// Single-chain harvesting; cheap source of large stationary clouds for
/// moment diagnostics where per-sample independence is not required.
pub fn harvest_trajectory(
    model: &LossModel,
    data: &Dataset,
    noise: &StableNoiseSpec,
    plan: &TrajectoryPlan,
) -> Result<Vec<Vec<f64>>, DynamicsError> {
    if !(plan.eta > 0.0 && plan.eta < 1.0) {
        return Err(DynamicsError::BadConfig(format!(
            "eta must lie in (0, 1), got {}",
            plan.eta
        )));
    }
    if plan.count == 0 || plan.stride == 0 {
        return Err(DynamicsError::BadConfig(
            "count and stride must be positive".into(),
        ));
    }
    if plan.theta0.len() != model.theta_dim() {
        return Err(DynamicsError::BadConfig(format!(
            "theta0 has dimension {}, model expects {}",
            plan.theta0.len(),
            model.theta_dim()
        )));
    }
    let grad = model.empirical_grad(data)?;
    let d = model.theta_dim();
    let mut rng = RngStream::new(plan.seed, plan.stream);
    let mut theta = plan.theta0.clone();
    let mut g = vec![0.0; d];
    let total = plan.burn_in + plan.count * plan.stride;
    let mut out = Vec::with_capacity(plan.count);
    for step_idx in 0..total {
        let inc = sample_increment(noise, d, plan.eta, &mut rng)?;
        grad.eval_into(&theta, &mut g);
        for i in 0..d {
            theta[i] = theta[i] - plan.eta * g[i] + inc[i];
        }
        if !all_finite(&theta) {
            return Err(DynamicsError::Diverged {
                replica: 0,
                step: step_idx,
            });
        }
        if step_idx >= plan.burn_in && (step_idx - plan.burn_in) % plan.stride == plan.stride - 1 {
            out.push(theta.clone());
            if out.len() == plan.count {
                break;
            }
        }
    }
    Ok(out)
}
