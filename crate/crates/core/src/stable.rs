//! Samplers for scalar symmetric alpha-stable variables and d-dimensional
//! rotationally symmetric alpha-stable vectors, plus tail diagnostics.
//!
//! The scalar sampler is the Chambers-Mallows-Stuck transform. The vector
//! sampler uses the sub-Gaussian representation X = sqrt(A) * G with G a
//! Gaussian vector of covariance 2*sigma^2*I and A a Kanter-normalized
//! positive (alpha/2)-stable variable, which hits the target characteristic
//! function exp(-sigma^alpha * ||u||^alpha) exactly in any dimension.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StableError {
    #[error("tail index alpha must lie in (1, 2], got {0}")]
    AlphaOutOfRange(f64),
    #[error("scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("increment duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("Hill estimator needs 0 < k < sample count, got k = {k}, n = {n}")]
    HillOrder { k: usize, n: usize },
    #[error("Hill estimator needs a positive (k+1)-th largest magnitude")]
    DegenerateTail,
}

/// Tail index and scale of the driving symmetric alpha-stable noise.
///
/// alpha is restricted to (1, 2]: every downstream bound carries a
/// 1/(alpha-1) factor, so nothing below 1 is usable here even though the
/// samplers themselves would extend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableNoiseSpec {
    alpha: f64,
    scale: f64,
}

impl StableNoiseSpec {
    pub fn new(alpha: f64, scale: f64) -> Result<Self, StableError> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(StableError::AlphaOutOfRange(alpha));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(StableError::BadScale(scale));
        }
        Ok(Self { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Counter-based deterministic random stream: identical (seed, stream)
/// pairs reproduce identical variate sequences, distinct stream ids give
/// statistically independent streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw on the open interval (0, 1); never returns 0 or 1,
    /// so logs and CMS denominators are always finite.
    pub fn uniform_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Unit exponential via inverse transform.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open01().ln()
    }

    /// Box-Muller pair of independent standard normals; consumes exactly
    /// two uniforms.
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.uniform_open01().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform_open01();
        (r * theta.cos(), r * theta.sin())
    }

    /// Fills `out` with independent standard normals, consuming a
    /// deterministic number of uniforms (one pair per two slots).
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.standard_normal_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.standard_normal_pair().0;
        }
    }
}

/// One draw of a symmetric alpha-stable variable with characteristic
/// function exp(-sigma^alpha |u|^alpha), via the Chambers-Mallows-Stuck
/// transform. At alpha = 2 the transform reduces exactly (in law) to a
/// Gaussian of variance 2*sigma^2.
pub fn sample_sas_scalar(spec: &StableNoiseSpec, rng: &mut RngStream) -> f64 {
    let alpha = spec.alpha;
    let u = PI * (rng.uniform_open01() - 0.5); // (-pi/2, pi/2)
    let w = rng.exp1();
    let x = (alpha * u).sin() / u.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
    spec.scale * x
}

/// Kanter's representation of the positive beta-stable variable with
/// Laplace transform E[exp(-s A)] = exp(-s^beta), for beta in (0, 1).
fn sample_kanter_positive_stable(beta: f64, rng: &mut RngStream) -> f64 {
    let v = PI * rng.uniform_open01(); // (0, pi)
    let w = rng.exp1();
    let ratio = (beta * v).sin() * ((1.0 - beta) * v).sin().powf((1.0 - beta) / beta)
        / v.sin().powf(1.0 / beta);
    ratio * w.powf(-(1.0 - beta) / beta)
}

/// One draw of a d-dimensional rotationally symmetric alpha-stable vector
/// with characteristic function exp(-sigma^alpha ||u||_2^alpha).
pub fn sample_isotropic_vector(
    spec: &StableNoiseSpec,
    d: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>, StableError> {
    if d == 0 {
        return Err(StableError::ZeroDimension);
    }
    let gauss_sd = spec.scale * std::f64::consts::SQRT_2;
    let mut out = vec![0.0; d];
    rng.fill_standard_normal(&mut out);
    let factor = if spec.alpha == 2.0 {
        gauss_sd
    } else {
        gauss_sd * sample_kanter_positive_stable(spec.alpha / 2.0, rng).sqrt()
    };
    for v in &mut out {
        *v *= factor;
    }
    Ok(out)
}

/// Increment of the alpha-stable Levy process over duration `dt` under the
/// discretization convention: scale sigma * dt^(1/alpha), i.e. the
/// characteristic function exp(-sigma^alpha * dt * ||u||^alpha).
pub fn sample_increment(
    spec: &StableNoiseSpec,
    d: usize,
    dt: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>, StableError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(StableError::BadDuration(dt));
    }
    let scaled = StableNoiseSpec::new(spec.alpha, spec.scale * dt.powf(1.0 / spec.alpha))?;
    sample_isotropic_vector(&scaled, d, rng)
}

/// Hill estimate of the tail index from the k largest absolute values.
/// Returns +infinity when all top-(k+1) magnitudes coincide (zero log
/// spacings), the degenerate constant-magnitude case.
pub fn tail_index_estimate(samples: &[f64], k: usize) -> Result<f64, StableError> {
    let n = samples.len();
    if k == 0 || k >= n {
        return Err(StableError::HillOrder { k, n });
    }
    let mut magnitudes: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    magnitudes.sort_by(|a, b| b.partial_cmp(a).expect("non-finite magnitude"));
    let pivot = magnitudes[k];
    if !(pivot > 0.0) {
        return Err(StableError::DegenerateTail);
    }
    let sum_log: f64 = magnitudes[..k].iter().map(|&x| (x / pivot).ln()).sum();
    if sum_log <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(k as f64 / sum_log)
}

/// Real part of the empirical characteristic function of scalar samples at
/// frequency u. By symmetry of the target laws the imaginary part is noise.
pub fn empirical_cf_scalar(samples: &[f64], u: f64) -> f64 {
    let sum: f64 = samples.iter().map(|&x| (u * x).cos()).sum();
    sum / samples.len() as f64
}

/// Scale of a symmetric alpha-stable law fitted from the empirical
/// characteristic function: (-ln phi(u))^(1/alpha) / u averaged over the
/// supplied frequencies. Noise pushing phi at or above 1 contributes zero.
pub fn fit_stable_scale(samples: &[f64], alpha: f64, frequencies: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &u in frequencies {
        let phi = empirical_cf_scalar(samples, u).max(1e-12);
        acc += (-phi.ln()).max(0.0).powf(1.0 / alpha) / u;
    }
    acc / frequencies.len() as f64
}

/// Real part of the empirical characteristic function of vector samples at
/// frequency vector u.
pub fn empirical_cf_vector(samples: &[Vec<f64>], u: &[f64]) -> f64 {
    let sum: f64 = samples
        .iter()
        .map(|x| {
            let dot: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
            dot.cos()
        })
        .sum();
    sum / samples.len() as f64
}
