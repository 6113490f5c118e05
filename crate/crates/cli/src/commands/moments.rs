//! Empirical p-moment growth of stationary chain samples across sample
//! sizes. Rows with p above the tail index and max/min moment ratio above
//! 10 are flagged divergent: the population moment there is infinite, so
//! the empirical moment grows with the sample count instead of
//! stabilizing. Each sample size uses its own independent random stream.

use super::{CommandOutput, STREAM_HARVEST};
use crate::config::ConfigMap;
use crate::error::CliError;
use crate::report::{fmt, Report};
use crate::MomentArgs;
use heavytail::dynamics::{harvest_trajectory, TrajectoryPlan};
use heavytail::losses::{Dataset, LossModel};
use heavytail::stable::StableNoiseSpec;
use heavytail::wasserstein::{empirical_p_moment, EmpiricalMeasure};
use serde_json::json;

/// Divergence flag threshold on the max-count/min-count moment ratio.
pub const DIVERGENCE_RATIO: f64 = 10.0;

pub fn run(args: &MomentArgs, cfg: &ConfigMap, seed: u64) -> Result<CommandOutput, CliError> {
    let alpha = cfg.resolve("alpha", args.alpha, 1.5)?;
    let ps: Vec<f64> = cfg.resolve_list("ps", args.ps.as_deref(), "0.75,2.0,2.5")?;
    let counts: Vec<usize> = cfg.resolve_list("counts", args.counts.as_deref(), "1000,1000000")?;
    let eta = cfg.resolve("eta", args.eta, 0.01)?;
    let drift = cfg.resolve("drift", args.drift, 1.0)?;
    let burn_in = cfg.resolve("burn_in", args.burn_in, 10_000usize)?;
    let stride = cfg.resolve("stride", args.stride, 200usize)?;

    if ps.is_empty() || counts.len() < 2 {
        return Err(CliError::Config(
            "need at least one moment order and two sample counts".into(),
        ));
    }
    let noise = StableNoiseSpec::new(alpha, 1.0)?;

    // linear drift -drift * theta via the quadratic model on the single
    // data point x with 2 x^2 = drift
    let x = (drift / 2.0).sqrt();
    let model = LossModel::quadratic_1d(x, x)?;
    let data = Dataset::new(vec![vec![x]], 0.0)?;

    let mut clouds = Vec::with_capacity(counts.len());
    for (i, &count) in counts.iter().enumerate() {
        let plan = TrajectoryPlan {
            eta,
            burn_in,
            count,
            stride,
            seed,
            stream: STREAM_HARVEST + i as u64,
            theta0: vec![0.0],
        };
        let samples = harvest_trajectory(&model, &data, &noise, &plan)?;
        clouds.push(EmpiricalMeasure::new(samples).map_err(|e| CliError::Domain(e.to_string()))?);
    }

    let min_idx = counts
        .iter()
        .enumerate()
        .min_by_key(|(_, &c)| c)
        .map(|(i, _)| i)
        .expect("nonempty");
    let max_idx = counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(i, _)| i)
        .expect("nonempty");

    let mut report = Report::new("moment-divergence", seed, cfg);
    report.csv_header = [
        "alpha",
        "p",
        "count",
        "moment",
        "ratio_max_over_min",
        "divergent",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let mut rows_json = Vec::new();
    for &p in &ps {
        let moments: Vec<f64> = clouds
            .iter()
            .map(|c| empirical_p_moment(c, p))
            .collect::<Result<_, _>>()?;
        let ratio = moments[max_idx] / moments[min_idx];
        let divergent = p > alpha && ratio > DIVERGENCE_RATIO;
        for (i, &count) in counts.iter().enumerate() {
            report.csv_rows.push(vec![
                fmt(alpha),
                fmt(p),
                count.to_string(),
                fmt(moments[i]),
                fmt(ratio),
                divergent.to_string(),
            ]);
        }
        rows_json.push(json!({
            "p": p,
            "counts": counts,
            "moments": moments,
            "ratio_max_over_min": ratio,
            "divergent": divergent,
        }));
    }

    report.results = json!({
        "alpha": alpha,
        "drift": drift,
        "rows": rows_json,
    });
    Ok(CommandOutput::ok(report))
}
