//! Coupled stability sweep: for each (n, alpha) build a dataset, perturb
//! one element, run the synchronously coupled chains, and report the
//! empirical distances next to the closed-form bounds with constant
//! provenance. Rows share the base seed, so replica noise is common across
//! rows (common random numbers across the n-sweep).

use super::{CommandOutput, STREAM_DATASET, STREAM_LIPSCHITZ, STREAM_POPULATION};
use crate::config::ConfigMap;
use crate::error::CliError;
use crate::report::{fmt, Report};
use crate::SweepArgs;
use heavytail::bounds::{
    constants_provenance, discrete_bound, generalization_bound, stationary_bound, BoundConstants,
};
use heavytail::dynamics::{run_coupled, run_coupled_recorded, ChainConfig};
use heavytail::losses::{empirical_risk, population_risk_estimate, rho, Dataset, SurrogateLoss};
use heavytail::stable::{RngStream, StableNoiseSpec};
use heavytail::wasserstein::{w1_assignment, w1_sliced, EmpiricalMeasure, ASSIGNMENT_CAP};
use serde_json::json;

/// One-element perturbation of norm `delta` along the first data
/// coordinate, flipped if the displaced point would leave the domain.
fn perturb_first(data: &Dataset, delta: f64) -> Result<Dataset, CliError> {
    let mut disp = vec![0.0; data.dim()];
    disp[0] = delta;
    match data.perturb_one(0, &disp) {
        Ok(d) => Ok(d),
        Err(_) => {
            disp[0] = -delta;
            data.perturb_one(0, &disp).map_err(|e| {
                CliError::Config(format!(
                    "perturbation norm {delta} leaves the data domain in both directions: {e}"
                ))
            })
        }
    }
}

pub fn run(args: &SweepArgs, cfg: &ConfigMap, seed: u64) -> Result<CommandOutput, CliError> {
    let model = super::resolve_model(cfg, args.model.as_deref())?;
    let ns: Vec<usize> = cfg.resolve_list("ns", args.ns.as_deref(), "32,64,128,256,512,1024")?;
    let alphas: Vec<f64> = cfg.resolve_list("alphas", args.alphas.as_deref(), "1.8")?;
    let eta = cfg.resolve("eta", args.eta, 0.01)?;
    let m = model.constants().m;
    let default_burn = ChainConfig::default_burn_in(m, eta);
    let burn_in = cfg.resolve("burn_in", args.burn_in, default_burn)?;
    let steps = cfg.resolve("steps", args.steps, 2 * burn_in)?;
    let replicas = cfg.resolve("replicas", args.replicas, 256)?;
    let perturbation = cfg.resolve("perturbation", args.perturbation, 0.25)?;
    let cap = cfg.resolve("cap", args.cap, 1.0)?;
    let pop_draws = cfg.resolve("pop_draws", args.pop_draws, 4000usize)?;
    let consistency_flag = args.consistency_mode.then_some(true);
    let consistency = cfg.resolve("consistency_mode", consistency_flag, false)?;

    let surrogate = SurrogateLoss::new(cap)?;
    let mut lip_rng = RngStream::new(seed, STREAM_LIPSCHITZ);
    let lipschitz = surrogate.lipschitz_estimate(&model, 4096, &mut lip_rng)?;
    let constants =
        BoundConstants::with_defaults(*model.constants(), lipschitz, model.domain_diameter());
    let d = model.theta_dim();

    let mut report = Report::new("stability-sweep", seed, cfg);
    report.csv_header = [
        "alpha",
        "n",
        "rho",
        "mean_coupled_distance",
        "w1_empirical",
        "gen_gap_estimate",
        "stationary_bound",
        "discrete_bound",
        "generalization_bound",
        "consistent",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let mut rows_json = Vec::new();
    let mut provenance = serde_json::Map::new();
    let mut violations: Vec<String> = Vec::new();
    let mut trajectory_dump: Option<String> = None;

    for &alpha in &alphas {
        // sigma is fixed to 1: the bound formulas assume unit noise scale
        let noise = StableNoiseSpec::new(alpha, 1.0)?;
        provenance.insert(
            format!("alpha={alpha}"),
            constants_provenance(&constants, alpha, d)?,
        );
        for (row, &n) in ns.iter().enumerate() {
            let mut data_rng = RngStream::new(seed, STREAM_DATASET + row as u64);
            let data = model.sample_dataset(n, &mut data_rng)?;
            let data_hat = perturb_first(&data, perturbation)?;
            let rho_val = rho(&data, &data_hat)?;

            let config = ChainConfig {
                eta,
                steps,
                burn_in,
                replicas,
                seed,
                theta0: vec![0.0; d],
            };
            let result = run_coupled(&model, &data, &data_hat, &noise, &config, false)?;
            let mean_coupled = result.mean_coupled_distance();

            if args.dump_trajectories && trajectory_dump.is_none() {
                trajectory_dump = Some(render_trajectories(
                    &model,
                    &data,
                    &data_hat,
                    &noise,
                    &config,
                    replicas.min(4),
                )?);
            }

            let cloud_a = EmpiricalMeasure::new(result.theta_samples.clone())
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let cloud_b = EmpiricalMeasure::new(result.theta_hat_samples.clone())
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let w1 = if replicas <= ASSIGNMENT_CAP {
                w1_assignment(&cloud_a, &cloud_b)?
            } else {
                let mut proj_rng = RngStream::new(seed, STREAM_POPULATION + 1000 + row as u64);
                w1_sliced(&cloud_a, &cloud_b, 64, &mut proj_rng)?
            };

            let risk_emp = empirical_risk(&model, &surrogate, &result.theta_samples, &data)?;
            let mut pop_rng = RngStream::new(seed, STREAM_POPULATION + row as u64);
            let risk_pop = population_risk_estimate(
                &model,
                &surrogate,
                &result.theta_samples,
                pop_draws,
                &mut pop_rng,
            )?;
            let gap = risk_emp - risk_pop;

            let st = stationary_bound(rho_val, &constants, alpha, d)?;
            let disc = discrete_bound(eta, rho_val, &constants, alpha, d)?;
            let gen = generalization_bound(&constants, n, alpha, d)?;

            let consistent = mean_coupled <= disc && w1 <= disc && gap.abs() <= gen;
            if consistency && !consistent {
                violations.push(format!(
                    "alpha={alpha} n={n}: empirical (coupled {mean_coupled}, w1 {w1}, \
                     |gap| {}) exceeded bounds (discrete {disc}, generalization {gen})",
                    gap.abs()
                ));
            }

            report.csv_rows.push(vec![
                fmt(alpha),
                n.to_string(),
                fmt(rho_val),
                fmt(mean_coupled),
                fmt(w1),
                fmt(gap),
                fmt(st),
                fmt(disc),
                fmt(gen),
                consistent.to_string(),
            ]);
            rows_json.push(json!({
                "alpha": alpha,
                "n": n,
                "rho": rho_val,
                "mean_coupled_distance": mean_coupled,
                "w1_empirical": w1,
                "w1_method": if replicas <= ASSIGNMENT_CAP { "assignment" } else { "sliced" },
                "gen_gap_estimate": gap,
                "stationary_bound": st,
                "discrete_bound": disc,
                "generalization_bound": gen,
                "consistent": consistent,
            }));
        }
    }

    report.results = json!({
        "rows": rows_json,
        "surrogate_lipschitz": lipschitz,
        "consistency_mode": consistency,
    });
    report.constants_provenance = Some(serde_json::Value::Object(provenance));

    let failure = if violations.is_empty() {
        None
    } else {
        Some(CliError::Verification(format!(
            "consistency mode: {} row(s) exceeded their bounds:\n{}",
            violations.len(),
            violations.join("\n")
        )))
    };
    let extra_files = trajectory_dump
        .map(|content| vec![("_trajectories.csv".to_string(), content)])
        .unwrap_or_default();
    Ok(CommandOutput {
        report,
        failure,
        extra_files,
    })
}

/// Per-step dump of the first replicas of one coupled run:
/// columns step, replica, chain, then one column per coordinate.
fn render_trajectories(
    model: &heavytail::losses::LossModel,
    data: &Dataset,
    data_hat: &Dataset,
    noise: &StableNoiseSpec,
    config: &ChainConfig,
    replicas: usize,
) -> Result<String, CliError> {
    let d = model.theta_dim();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "step".to_string(),
        "replica".to_string(),
        "chain".to_string(),
    ];
    header.extend((0..d).map(|i| format!("c{i}")));
    wtr.write_record(&header)?;
    for replica in 0..replicas as u64 {
        let (path_a, path_b) = run_coupled_recorded(model, data, data_hat, noise, config, replica)?;
        for (step, (ta, tb)) in path_a.iter().zip(&path_b).enumerate() {
            for (chain, theta) in [("a", ta), ("b", tb)] {
                let mut row = vec![step.to_string(), replica.to_string(), chain.to_string()];
                row.extend(theta.iter().map(|v| fmt(*v)));
                wtr.write_record(&row)?;
            }
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}
