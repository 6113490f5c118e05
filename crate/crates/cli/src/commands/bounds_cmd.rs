//! Closed-form bound evaluation: every bound value plus the critical
//! constants, with provenance flags separating computed quantities from
//! the external-unspecified configuration inputs.

use super::{CommandOutput, STREAM_LIPSCHITZ};
use crate::config::ConfigMap;
use crate::error::CliError;
use crate::report::{fmt, Report};
use crate::BoundsArgs;
use heavytail::bounds::{
    alpha0_prime, c_d_alpha, compute_c0, constants_provenance, critical_alpha0, d0, discrete_bound,
    generalization_bound, horizon_bound, ln_g, lyapunov_params, sphere_surface_area,
    stationary_bound, BoundConstants, HorizonCase, HorizonInputs,
};
use heavytail::losses::SurrogateLoss;
use heavytail::stable::RngStream;
use serde_json::json;

pub fn run(args: &BoundsArgs, cfg: &ConfigMap, seed: u64) -> Result<CommandOutput, CliError> {
    let model = super::resolve_model(cfg, args.model.as_deref())?;
    let alpha = cfg.resolve("alpha", args.alpha, 1.5)?;
    let eta = cfg.resolve("eta", args.eta, 0.01)?;
    let n = cfg.resolve("n", args.n, 100usize)?;
    let perturbation = cfg.resolve("perturbation", args.perturbation, 0.25)?;
    let w_norm = cfg.resolve("w_norm", args.w_norm, 0.0)?;
    let cap = cfg.resolve("cap", args.cap, 1.0)?;

    let d = model.theta_dim();
    let surrogate = SurrogateLoss::new(cap)?;
    let mut lip_rng = RngStream::new(seed, STREAM_LIPSCHITZ);
    let lipschitz = surrogate.lipschitz_estimate(&model, 4096, &mut lip_rng)?;

    let bundle = *model.constants();
    let mut constants = BoundConstants::with_defaults(bundle, lipschitz, model.domain_diameter());
    constants.c1 = cfg.resolve("c1", args.c1, constants.c1)?;
    constants.lambda = cfg.resolve("lambda", args.lambda, constants.lambda)?;
    constants.big_c = cfg.resolve("big_c", args.big_c, constants.big_c)?;
    constants.q = cfg.resolve("q", args.q, constants.q)?;

    let rho = perturbation / n as f64;

    let (c0_root, alpha0) = critical_alpha0();
    // the free alpha inside the digamma of y0 defaults to the run's alpha,
    // which is always inside (1, 2); the true alpha0 is not
    let a0_prime = alpha0_prime(d, alpha0, alpha)?;
    let c0 = compute_c0(alpha, d, &bundle)?;
    let (lambda1, q1) = lyapunov_params(&bundle, alpha, d)?;
    let ln_g_val = ln_g(alpha, d)?;

    let stationary = stationary_bound(rho, &constants, alpha, d)?;
    let discrete = discrete_bound(eta, rho, &constants, alpha, d)?;
    let generalization = generalization_bound(&constants, n, alpha, d)?;

    let single = horizon_bound(
        HorizonCase::SingleStep,
        &HorizonInputs {
            eta,
            n_steps: 1,
            w_norm,
            rho,
            alpha,
        },
        &constants,
        d,
    )?;
    let short_n = (1.0 / eta).floor() as u64 + 1;
    let short = horizon_bound(
        HorizonCase::Short,
        &HorizonInputs {
            eta,
            n_steps: short_n,
            w_norm,
            rho,
            alpha,
        },
        &constants,
        d,
    )?;
    let long_n = short_n + 1;
    let long = horizon_bound(
        HorizonCase::Long,
        &HorizonInputs {
            eta,
            n_steps: long_n,
            w_norm,
            rho,
            alpha,
        },
        &constants,
        d,
    )?;

    let entries: Vec<(&str, f64)> = vec![
        ("gamma_critical_point_c0", c0_root),
        ("alpha0", alpha0),
        ("alpha0_prime", a0_prime),
        ("d0", d0(alpha0)?),
        ("C0", c0),
        ("lambda1", lambda1),
        ("q1", q1),
        ("C_d_alpha", c_d_alpha(alpha, d)?),
        ("sphere_surface_area", sphere_surface_area(d)?),
        ("ln_g", ln_g_val),
        ("g", ln_g_val.exp()),
        ("rho", rho),
        ("surrogate_lipschitz", lipschitz),
        ("stationary_bound", stationary),
        ("discrete_bound", discrete),
        ("generalization_bound", generalization),
        ("horizon_bound_single_step", single),
        ("horizon_bound_short", short),
        ("horizon_bound_long", long),
    ];

    let mut report = Report::new("bounds", seed, cfg);
    report.csv_header = ["quantity", "value"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for (name, value) in &entries {
        report.csv_rows.push(vec![name.to_string(), fmt(*value)]);
    }
    report.results = json!({
        "alpha": alpha,
        "d": d,
        "n": n,
        "eta": eta,
        "w_norm": w_norm,
        "horizon_steps": { "short": short_n, "long": long_n },
        "values": entries
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
    });
    report.constants_provenance = Some(constants_provenance(&constants, alpha, d)?);
    Ok(CommandOutput::ok(report))
}
