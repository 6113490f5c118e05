//! Tail-index curve emission: alpha, d, g, g_normalized (per-d division by
//! the grid maximum, which preserves each curve's argmin and monotone
//! segments), plus ln_g since raw g overflows f64 for d around 700.

use super::CommandOutput;
use crate::config::ConfigMap;
use crate::error::CliError;
use crate::report::{fmt, Report};
use crate::GcurveArgs;
use heavytail::bounds::ln_g;
use serde_json::json;

/// Required distance of the alpha grid from the (1, 2) endpoints.
pub const ALPHA_MARGIN: f64 = 0.005;

pub fn run(args: &GcurveArgs, cfg: &ConfigMap, seed: u64) -> Result<CommandOutput, CliError> {
    let alphas = cfg.resolve_grid("alphas", args.alphas.as_deref(), "1.01:1.99:99")?;
    let ds: Vec<usize> = cfg.resolve_list("ds", args.ds.as_deref(), "1,10,100,1000")?;
    let normalize = cfg.resolve("normalize", args.normalize, true)?;

    if alphas.is_empty() || ds.is_empty() {
        return Err(CliError::Config(
            "alpha grid and dimension list must be nonempty".into(),
        ));
    }
    for &a in &alphas {
        if !(a >= 1.0 + ALPHA_MARGIN && a <= 2.0 - ALPHA_MARGIN) {
            return Err(CliError::Domain(format!(
                "alpha = {a} touches the (1, 2) endpoints; the grid must stay within \
                 [{}, {}]",
                1.0 + ALPHA_MARGIN,
                2.0 - ALPHA_MARGIN
            )));
        }
    }

    let mut report = Report::new("gcurve", seed, cfg);
    report.csv_header = ["alpha", "d", "g", "g_normalized", "ln_g"]
        .iter()
        .map(|s| s.to_string())
        .collect();

    let mut rows_json = Vec::new();
    for &d in &ds {
        let ln_vals: Vec<f64> = alphas
            .iter()
            .map(|&a| ln_g(a, d))
            .collect::<Result<_, _>>()?;
        let ln_max = ln_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (&alpha, &lv) in alphas.iter().zip(&ln_vals) {
            let g_val = lv.exp();
            let g_norm = if normalize {
                (lv - ln_max).exp()
            } else {
                g_val
            };
            report.csv_rows.push(vec![
                fmt(alpha),
                d.to_string(),
                fmt(g_val),
                fmt(g_norm),
                fmt(lv),
            ]);
            rows_json.push(json!({
                "alpha": alpha,
                "d": d,
                "g": g_val,
                "g_normalized": g_norm,
                "ln_g": lv,
            }));
        }
    }
    report.results = json!({ "rows": rows_json });
    Ok(CommandOutput::ok(report))
}
