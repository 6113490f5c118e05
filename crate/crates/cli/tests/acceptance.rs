//! Acceptance suite: every exit criterion at its stated tolerance, one
//! pass/fail line per criterion (run with `-- --nocapture` to see the
//! lines for passing tests too).
//!
//! Criterion 4 (curve shape) is expected to fail its d = 1 sub-check: on
//! [1.01, 1.99] the d = 1 curve is monotone decreasing because the
//! alpha -> 2 limit of the tail-index factor is finite (the
//! 1/|Gamma(-alpha/2)| zero cancels the (2-alpha)^-1 pole), so no interior
//! minimum exists there. The remaining dimensions and every other
//! criterion pass.

use heavytail::bounds::{
    compute_c0, critical_alpha0, discretization_term, horizon_bound, ln_g, lyapunov_params,
    stationary_bound, BoundConstants, HorizonCase, HorizonInputs,
};
use heavytail::dynamics::{harvest_trajectory, run_coupled, ChainConfig, TrajectoryPlan};
use heavytail::losses::{ConstantBundle, Dataset, LossModel};
use heavytail::specfun::{digamma, gamma};
use heavytail::stable::{
    empirical_cf_scalar, empirical_cf_vector, fit_stable_scale, sample_isotropic_vector,
    sample_sas_scalar, RngStream, StableNoiseSpec,
};
use heavytail::wasserstein::{empirical_p_moment, w1_assignment, w1_exact_1d, EmpiricalMeasure};

const SEED: u64 = 42;

fn verdict(criterion: &str, pass: bool, details: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {tag} — {details}");
    assert!(pass, "ACCEPTANCE {criterion} FAILED — {details}");
}

// (x, gamma(x), digamma(x)) high-precision reference values on [0.1, 50]
const ORACLE: &[(f64, f64, f64)] = &[
    (0.1, 9.5135076986687313, -10.423754940411076),
    (0.25, 3.6256099082219083, -4.2274535333762654),
    (0.5, 1.7724538509055160, -1.9635100260214235),
    (0.75, 1.2254167024651776, -1.0858608797864722),
    (1.0, 1.0, -0.57721566490153286),
    (1.5, 0.88622692545275801, 0.036489973978576521),
    (2.5, 1.3293403881791370, 0.70315664064524319),
    (5.0, 24.0, 1.5061176684318005),
    (10.0, 362880.0, 2.2517525890667211),
    (18.75, 3092228855290534.3, 2.9042901160455303),
    (33.0, 2.6313083693369353e+35, 3.4812795305349872),
    (50.0, 6.0828186403426756e+62, 3.9019896734278922),
];

#[test]
fn criterion_1_special_functions() {
    let mut worst_gamma: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for &(x, g_ref, psi_ref) in ORACLE {
        let g_err = (gamma(x).unwrap() - g_ref).abs() / g_ref.abs();
        worst_gamma = worst_gamma.max(g_err);
        let psi = digamma(x).unwrap();
        let psi_err = if psi_ref.abs() < 1.0 {
            (psi - psi_ref).abs()
        } else {
            (psi - psi_ref).abs() / psi_ref.abs()
        };
        worst_psi = worst_psi.max(psi_err);
    }
    let (c0, alpha0) = critical_alpha0();
    let c0_err = (c0 - 1.46163211).abs();
    let alpha0_err = (alpha0 - 2.0 * (1.46163211 - 1.0)).abs();
    let pass = worst_gamma <= 1e-10 && worst_psi <= 1e-10 && c0_err <= 1e-6 && alpha0_err <= 2e-6;
    verdict(
        "1 special-functions",
        pass,
        &format!(
            "worst gamma rel {worst_gamma:.2e}, worst digamma {worst_psi:.2e}, \
             c0 {c0} (err {c0_err:.2e}), alpha0 {alpha0} (err {alpha0_err:.2e})"
        ),
    );
}

#[test]
fn criterion_2_sampler_fidelity() {
    let draws = 100_000;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for (i, &alpha) in [1.2f64, 1.5, 1.8, 2.0].iter().enumerate() {
        let spec = StableNoiseSpec::new(alpha, 1.0).unwrap();
        let mut rng_s = RngStream::new(SEED, 100 + i as u64);
        let scalars: Vec<f64> = (0..draws)
            .map(|_| sample_sas_scalar(&spec, &mut rng_s))
            .collect();
        let mut rng_v = RngStream::new(SEED, 200 + i as u64);
        let vectors: Vec<Vec<f64>> = (0..draws)
            .map(|_| sample_isotropic_vector(&spec, 3, &mut rng_v).unwrap())
            .collect();
        for &u in &[0.5f64, 1.0, 2.0] {
            let target = (-(u.powf(alpha))).exp();
            let scalar_err = (empirical_cf_scalar(&scalars, u) - target).abs();
            let vector_err = (empirical_cf_vector(&vectors, &[u, 0.0, 0.0]) - target).abs();
            worst = worst.max(scalar_err).max(vector_err);
            if scalar_err > 0.02 || vector_err > 0.02 {
                detail.push_str(&format!(
                    "alpha {alpha} u {u}: {scalar_err:.3}/{vector_err:.3}; "
                ));
            }
        }
    }
    verdict(
        "2 sampler-fidelity",
        worst <= 0.02,
        &format!("worst ECF error {worst:.4} over alpha x u grid, 1e5 draws {detail}"),
    );
}

fn linear_drift_chain(a: f64) -> (LossModel, Dataset) {
    let x = (a / 2.0).sqrt();
    let model = LossModel::quadratic_1d(x, x).unwrap();
    let data = Dataset::new(vec![vec![x]], 0.0).unwrap();
    (model, data)
}

#[test]
fn criterion_3_ou_stationary_scale() {
    let alpha = 1.5;
    let (model, data) = linear_drift_chain(1.0);
    let noise = StableNoiseSpec::new(alpha, 1.0).unwrap();
    let plan = TrajectoryPlan {
        eta: 0.01,
        burn_in: 10_000,
        count: 100_000,
        stride: 20,
        seed: SEED,
        stream: 300,
        theta0: vec![0.0],
    };
    let samples = harvest_trajectory(&model, &data, &noise, &plan).unwrap();
    let scalars: Vec<f64> = samples.iter().map(|t| t[0]).collect();
    let fitted = fit_stable_scale(&scalars, alpha, &[0.5, 1.0]);
    let oracle = (1.0f64 * alpha).powf(-1.0 / alpha);
    let rel = (fitted - oracle).abs() / oracle;
    verdict(
        "3 ou-stationary-scale",
        rel <= 0.10,
        &format!("fitted {fitted:.4}, continuous-time oracle {oracle:.4}, rel err {rel:.3}"),
    );
}

#[test]
fn criterion_4_curve_shape() {
    let grid: Vec<f64> = (0..=98).map(|k| 1.01 + 0.01 * k as f64).collect();
    let mut failures = Vec::new();
    let mut detail = String::new();
    for &d in &[1usize, 10, 100, 1000] {
        let vals: Vec<f64> = grid.iter().map(|&a| ln_g(a, d).unwrap()).collect();
        let (argmin, &min) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let interior = argmin > 0 && argmin < vals.len() - 1;
        let left_ratio_ok = vals[0] > min + 2f64.ln();
        let right_ratio_ok = vals[vals.len() - 1] > min + 2f64.ln();
        let h = 1e-5;
        let slope = (ln_g(1.02 + h, d).unwrap() - ln_g(1.02 - h, d).unwrap()) / (2.0 * h);
        let slope_ok = slope < 0.0;
        detail.push_str(&format!(
            "d={d}: argmin alpha {:.3}{}, endL/min {:.2}x, endR/min {:.2}x, slope(1.02) {slope:.1}; ",
            grid[argmin],
            if interior { "" } else { " (boundary)" },
            (vals[0] - min).exp(),
            (vals[vals.len() - 1] - min).exp(),
        ));
        if !(interior && left_ratio_ok && right_ratio_ok && slope_ok) {
            failures.push(d);
        }
    }
    verdict(
        "4 curve-shape",
        failures.is_empty(),
        &format!("failing d: {failures:?} — {detail}"),
    );
}

#[test]
fn criterion_5_stability_scaling_in_n() {
    let model = LossModel::quadratic_1d(0.5, 1.0).unwrap();
    let noise = StableNoiseSpec::new(1.8, 1.0).unwrap();
    let delta = 0.25;
    let ns = [32usize, 64, 128, 256, 512, 1024];
    let mut log_n = Vec::new();
    let mut log_dist = Vec::new();
    for (row, &n) in ns.iter().enumerate() {
        let mut data_rng = RngStream::new(SEED, 400 + row as u64);
        let data = model.sample_dataset(n, &mut data_rng).unwrap();
        let mut disp = vec![delta];
        let data_hat = match data.perturb_one(0, &disp) {
            Ok(d) => d,
            Err(_) => {
                disp[0] = -delta;
                data.perturb_one(0, &disp).unwrap()
            }
        };
        let config = ChainConfig {
            eta: 0.01,
            steps: 4000,
            burn_in: 2000,
            replicas: 256,
            seed: SEED,
            theta0: vec![0.0],
        };
        let result = run_coupled(&model, &data, &data_hat, &noise, &config, false).unwrap();
        log_n.push((n as f64).ln());
        log_dist.push(result.mean_coupled_distance().ln());
    }
    // least-squares slope of ln(distance) on ln(n)
    let len = log_n.len() as f64;
    let mean_x: f64 = log_n.iter().sum::<f64>() / len;
    let mean_y: f64 = log_dist.iter().sum::<f64>() / len;
    let sxy: f64 = log_n
        .iter()
        .zip(&log_dist)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let sxx: f64 = log_n.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let slope = sxy / sxx;
    verdict(
        "5 stability-scaling",
        (slope - (-1.0)).abs() <= 0.3,
        &format!("log-log slope of mean coupled distance vs n: {slope:.3} (target -1 +/- 0.3)"),
    );
}

#[test]
fn criterion_6_moment_divergence() {
    let harvest = |alpha: f64, count: usize, stride: usize, stream: u64| -> EmpiricalMeasure {
        let (model, data) = linear_drift_chain(1.0);
        let noise = StableNoiseSpec::new(alpha, 1.0).unwrap();
        let plan = TrajectoryPlan {
            eta: 0.01,
            burn_in: 10_000,
            count,
            stride,
            seed: SEED,
            stream,
            theta0: vec![0.0],
        };
        let samples = harvest_trajectory(&model, &data, &noise, &plan).unwrap();
        EmpiricalMeasure::new(samples).unwrap()
    };
    // strides keep the small cloud near-independent (correlation time
    // 1/(a*eta) = 100 steps) and the large cloud tractable
    let small = harvest(1.5, 1_000, 200, 508);
    let large = harvest(1.5, 1_000_000, 20, 509);
    let ratio = |p: f64| -> f64 {
        empirical_p_moment(&large, p).unwrap() / empirical_p_moment(&small, p).unwrap()
    };
    let r075 = ratio(0.75);
    let r20 = ratio(2.0);
    let r25 = ratio(2.5);

    let g_small = harvest(2.0, 1_000, 200, 510);
    let g_large = harvest(2.0, 1_000_000, 20, 511);
    let r_gauss =
        empirical_p_moment(&g_large, 3.0).unwrap() / empirical_p_moment(&g_small, 3.0).unwrap();

    let pass =
        (0.5..=2.0).contains(&r075) && r20 > 10.0 && r25 > 10.0 && (0.5..=2.0).contains(&r_gauss);
    verdict(
        "6 moment-divergence",
        pass,
        &format!(
            "alpha 1.5 ratios (1e6 vs 1e3): p=0.75 {r075:.3} (want [0.5,2]), \
             p=2.0 {r20:.1} (want >10), p=2.5 {r25:.1} (want >10); \
             gaussian p=3 {r_gauss:.3} (want [0.5,2])"
        ),
    );
}

#[test]
fn criterion_7_bound_formula_integrity() {
    let bundles = [
        ConstantBundle {
            k1: 1.0,
            k2: 1.0,
            b: 0.0,
            m: 1.0,
            k: 0.0,
            l: 0.5,
            m3: 0.0,
        },
        ConstantBundle {
            k1: 3.0,
            k2: 2.0,
            b: 0.4,
            m: 1.5,
            k: 0.2,
            l: 0.8,
            m3: 0.1,
        },
        ConstantBundle {
            k1: 2.0,
            k2: 4.0,
            b: 1.0,
            m: 0.5,
            k: 1.0,
            l: 2.0,
            m3: 0.5,
        },
    ];
    let mut worst_identity: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    for bundle in &bundles {
        for &(alpha, d) in &[(1.2, 1usize), (1.5, 3), (1.9, 10)] {
            let c0 = compute_c0(alpha, d, bundle).unwrap();
            let (l1, q1) = lyapunov_params(bundle, alpha, d).unwrap();
            worst_identity = worst_identity.max(((1.0 + q1 / l1) - c0).abs() / c0);

            let constants = BoundConstants::with_defaults(*bundle, 1.0, 1.0);
            let limit = horizon_bound(
                HorizonCase::Long,
                &HorizonInputs {
                    eta: 0.0,
                    n_steps: 1,
                    w_norm: 0.0,
                    rho: 0.13,
                    alpha,
                },
                &constants,
                d,
            )
            .unwrap();
            let stationary = stationary_bound(0.13, &constants, alpha, d).unwrap();
            worst_limit = worst_limit.max((limit - stationary).abs() / stationary);
        }
    }
    let gaussian_term = discretization_term(0.42, 1.7, 2.0).unwrap();
    let exact_2q = gaussian_term == 2.0 * 1.7;
    let pass = worst_identity <= 1e-12 && worst_limit <= 1e-12 && exact_2q;
    verdict(
        "7 bound-integrity",
        pass,
        &format!(
            "C0 vs 1+q1/lambda1 worst rel {worst_identity:.2e}, \
             long-horizon eta->0 vs stationary worst rel {worst_limit:.2e}, \
             alpha=2 discretization term exactly 2Q: {exact_2q}"
        ),
    );
}

#[test]
fn criterion_8_wasserstein_estimators() {
    let mut rng = RngStream::new(SEED, 600);
    // assignment vs sorted matching on 1-d embeddings
    let mut worst_1d: f64 = 0.0;
    for _ in 0..5 {
        let xs: Vec<Vec<f64>> = (0..48)
            .map(|_| vec![rng.uniform_open01() * 6.0 - 3.0])
            .collect();
        let ys: Vec<Vec<f64>> = (0..48)
            .map(|_| vec![rng.uniform_open01() * 6.0 - 3.0])
            .collect();
        let a = EmpiricalMeasure::new(xs).unwrap();
        let b = EmpiricalMeasure::new(ys).unwrap();
        worst_1d =
            worst_1d.max((w1_assignment(&a, &b).unwrap() - w1_exact_1d(&a, &b).unwrap()).abs());
    }

    // assignment vs exhaustive permutation optimum on 6-point clouds in d = 3
    fn permutations(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(k + 1, items, out);
            items.swap(k, i);
        }
    }
    let mut perms = Vec::new();
    permutations(0, &mut (0..6).collect(), &mut perms);
    let mut worst_brute: f64 = 0.0;
    for _ in 0..3 {
        let cloud = |rng: &mut RngStream| -> Vec<Vec<f64>> {
            (0..6)
                .map(|_| (0..3).map(|_| rng.uniform_open01() * 4.0 - 2.0).collect())
                .collect()
        };
        let pa = cloud(&mut rng);
        let pb = cloud(&mut rng);
        let dist = |p: &[f64], q: &[f64]| -> f64 {
            p.iter()
                .zip(q)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let brute = perms
            .iter()
            .map(|perm| {
                perm.iter()
                    .enumerate()
                    .map(|(i, &j)| dist(&pa[i], &pb[j]))
                    .sum::<f64>()
                    / 6.0
            })
            .fold(f64::INFINITY, f64::min);
        let a = EmpiricalMeasure::new(pa).unwrap();
        let b = EmpiricalMeasure::new(pb).unwrap();
        worst_brute = worst_brute.max((w1_assignment(&a, &b).unwrap() - brute).abs());
    }

    // translation property in d = 4
    let base: Vec<Vec<f64>> = (0..32)
        .map(|_| (0..4).map(|_| rng.uniform_open01() * 2.0 - 1.0).collect())
        .collect();
    let v = [0.3, -0.7, 0.2, 0.5];
    let shifted: Vec<Vec<f64>> = base
        .iter()
        .map(|p| p.iter().zip(v).map(|(x, s)| x + s).collect())
        .collect();
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = EmpiricalMeasure::new(base).unwrap();
    let b = EmpiricalMeasure::new(shifted).unwrap();
    let translation_err = (w1_assignment(&a, &b).unwrap() - vnorm).abs();

    let pass = worst_1d <= 1e-12 && worst_brute <= 1e-12 && translation_err <= 1e-9;
    verdict(
        "8 wasserstein-estimators",
        pass,
        &format!(
            "1d agreement {worst_1d:.2e}, brute-force agreement {worst_brute:.2e}, \
             translation error {translation_err:.2e}"
        ),
    );
}

#[test]
fn criterion_9_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_heavytail");
    let dir = std::env::temp_dir().join(format!("heavytail-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let run = |cmd: &[&str], out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args(cmd)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "command {cmd:?} failed");
        (
            std::fs::read(out.with_extension("csv")).unwrap(),
            std::fs::read(out.with_extension("json")).unwrap(),
        )
    };

    let val_a = run(&["validate", "--seed", "42"], &dir.join("val_a"));
    let val_b = run(&["validate", "--seed", "42"], &dir.join("val_b"));
    let validate_identical = val_a == val_b;

    let sweep_args = [
        "stability-sweep",
        "--seed",
        "42",
        "--ns",
        "32,64",
        "--replicas",
        "32",
        "--steps",
        "1000",
        "--burn-in",
        "500",
    ];
    let sw_a = run(&sweep_args, &dir.join("sw_a"));
    let sw_b = run(&sweep_args, &dir.join("sw_b"));
    let sweep_identical = sw_a == sw_b;

    std::fs::remove_dir_all(&dir).ok();
    verdict(
        "9 determinism",
        validate_identical && sweep_identical,
        &format!(
            "validate reruns byte-identical: {validate_identical}, \
             stability-sweep reruns byte-identical: {sweep_identical}"
        ),
    );
}
