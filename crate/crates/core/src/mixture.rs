//! Two-dimensional Gaussian mixtures fitted with EM, growing one component
//! at a time until the data stops rewarding the extra capacity.
//!
//! All fitting happens on plain `[f64; 2]` points. Per-relation models wrap
//! a fitted mixture together with the z-scoring transform that was applied
//! before training, and evaluate as proper densities over the original
//! feature space, so likelihoods of different relations stay comparable.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::features::FeatureVector;

/// Components whose weight falls below this after an update are dropped.
pub const MIN_COMPONENT_WEIGHT: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_components: usize,
    pub max_iterations: usize,
    /// Relative log-likelihood change that counts as converged.
    pub rel_tolerance: f64,
    /// Added to covariance diagonals; also the minimum eigenvalue kept.
    pub covariance_floor: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_components: 8,
            max_iterations: 200,
            rel_tolerance: 1e-6,
            covariance_floor: 1e-6,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureModel {
    pub components: Vec<GaussianComponent>,
    /// Log-likelihood of the training data under this model, filled in by
    /// the fitting functions.
    pub log_likelihood: f64,
}

/// Inverse and log normalisation constant of one component, precomputed per
/// pass over the data.
struct Prepared {
    mean: [f64; 2],
    inv: [[f64; 2]; 2],
    log_norm: f64,
    log_weight: f64,
}

fn prepare(c: &GaussianComponent) -> Prepared {
    let [[a, b], [_, d]] = c.cov;
    let det = a * d - b * b;
    let inv = [[d / det, -b / det], [-b / det, a / det]];
    Prepared {
        mean: c.mean,
        inv,
        log_norm: -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln(),
        log_weight: c.weight.ln(),
    }
}

impl Prepared {
    fn log_density(&self, x: &[f64; 2]) -> f64 {
        let dx = x[0] - self.mean[0];
        let dy = x[1] - self.mean[1];
        let quad = dx * (self.inv[0][0] * dx + self.inv[0][1] * dy)
            + dy * (self.inv[1][0] * dx + self.inv[1][1] * dy);
        self.log_norm - 0.5 * quad
    }
}

pub fn component_density(x: &[f64; 2], c: &GaussianComponent) -> f64 {
    prepare(c).log_density(x).exp()
}

pub fn log_mixture_density(x: &[f64; 2], model: &MixtureModel) -> f64 {
    let prepared: Vec<Prepared> = model.components.iter().map(prepare).collect();
    log_mixture_density_prepared(x, &prepared)
}

fn log_mixture_density_prepared(x: &[f64; 2], prepared: &[Prepared]) -> f64 {
    let mut terms = [0.0f64; 16];
    let mut max = f64::NEG_INFINITY;
    let mut buf: Vec<f64> = Vec::new();
    let use_buf = prepared.len() > terms.len();
    if use_buf {
        buf.resize(prepared.len(), 0.0);
    }
    for (i, p) in prepared.iter().enumerate() {
        let t = p.log_weight + p.log_density(x);
        if use_buf {
            buf[i] = t;
        } else {
            terms[i] = t;
        }
        if t > max {
            max = t;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let slice: &[f64] = if use_buf {
        &buf
    } else {
        &terms[..prepared.len()]
    };
    let sum: f64 = slice.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

pub fn mixture_density(x: &[f64; 2], model: &MixtureModel) -> f64 {
    log_mixture_density(x, model).exp()
}

/// Sum of per-point log mixture densities.
pub fn log_likelihood(data: &[[f64; 2]], model: &MixtureModel) -> f64 {
    let prepared: Vec<Prepared> = model.components.iter().map(prepare).collect();
    data.iter()
        .map(|x| log_mixture_density_prepared(x, &prepared))
        .sum()
}

pub fn sample_mean(data: &[[f64; 2]]) -> [f64; 2] {
    let n = data.len() as f64;
    let mut m = [0.0, 0.0];
    for x in data {
        m[0] += x[0];
        m[1] += x[1];
    }
    [m[0] / n, m[1] / n]
}

/// Population covariance around `mean`.
pub fn sample_covariance(data: &[[f64; 2]], mean: [f64; 2]) -> [[f64; 2]; 2] {
    let n = data.len() as f64;
    let mut xx = 0.0;
    let mut xy = 0.0;
    let mut yy = 0.0;
    for p in data {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        xx += dx * dx;
        xy += dx * dy;
        yy += dy * dy;
    }
    [[xx / n, xy / n], [xy / n, yy / n]]
}

/// Adds the floor to the diagonal and lifts the smaller eigenvalue up to the
/// floor if rounding pushed it below. The eigenvalue evaluation cancels
/// almost all of a large trace, which can eat a small floor, so the lift
/// repeats until the computed eigenvalue actually clears it.
fn regularize(cov: [[f64; 2]; 2], floor: f64) -> [[f64; 2]; 2] {
    let off = 0.5 * (cov[0][1] + cov[1][0]);
    let mut c = [[cov[0][0] + floor, off], [off, cov[1][1] + floor]];
    for _ in 0..32 {
        let lambda_min = min_eigenvalue(c);
        if lambda_min >= floor {
            break;
        }
        let lift = (floor - lambda_min).max(f64::EPSILON * (c[0][0] + c[1][1]));
        c[0][0] += lift;
        c[1][1] += lift;
    }
    c
}

pub fn min_eigenvalue(c: [[f64; 2]; 2]) -> f64 {
    let half_trace = 0.5 * (c[0][0] + c[1][1]);
    let half_diff = 0.5 * (c[0][0] - c[1][1]);
    half_trace - (half_diff * half_diff + c[0][1] * c[1][0]).sqrt()
}

/// One EM pass: responsibilities from the current model, then re-estimated
/// weights, means and covariances. Starved components are dropped and the
/// remaining weights renormalized.
pub fn em_step(data: &[[f64; 2]], model: &MixtureModel, config: &EmConfig) -> MixtureModel {
    let n = data.len();
    let m = model.components.len();
    debug_assert!(n > 0 && m > 0);
    let prepared: Vec<Prepared> = model.components.iter().map(prepare).collect();

    // responsibilities, row-major per data point
    let mut resp = vec![0.0f64; n * m];
    for (j, x) in data.iter().enumerate() {
        let total = log_mixture_density_prepared(x, &prepared);
        for (i, p) in prepared.iter().enumerate() {
            resp[j * m + i] = (p.log_weight + p.log_density(x) - total).exp();
        }
    }

    let mut resp_sums = vec![0.0f64; m];
    for j in 0..n {
        for i in 0..m {
            resp_sums[i] += resp[j * m + i];
        }
    }

    let kept: Vec<usize> = (0..m)
        .filter(|&i| resp_sums[i] / n as f64 >= MIN_COMPONENT_WEIGHT)
        .collect();
    let kept_weight: f64 = kept.iter().map(|&i| resp_sums[i] / n as f64).sum();

    let mut components = Vec::with_capacity(kept.len());
    for &i in &kept {
        let rs = resp_sums[i];
        let mut mean = [0.0, 0.0];
        for (j, x) in data.iter().enumerate() {
            let r = resp[j * m + i];
            mean[0] += r * x[0];
            mean[1] += r * x[1];
        }
        mean[0] /= rs;
        mean[1] /= rs;

        let mut xx = 0.0;
        let mut xy = 0.0;
        let mut yy = 0.0;
        for (j, x) in data.iter().enumerate() {
            let r = resp[j * m + i];
            let dx = x[0] - mean[0];
            let dy = x[1] - mean[1];
            xx += r * dx * dx;
            xy += r * dx * dy;
            yy += r * dy * dy;
        }
        let cov = regularize(
            [[xx / rs, xy / rs], [xy / rs, yy / rs]],
            config.covariance_floor,
        );
        components.push(GaussianComponent {
            weight: (resp_sums[i] / n as f64) / kept_weight,
            mean,
            cov,
        });
    }

    MixtureModel {
        components,
        log_likelihood: f64::NAN,
    }
}

/// Iterates [`em_step`] until the relative log-likelihood change drops below
/// the configured tolerance or the iteration budget runs out. The returned
/// model carries its final log-likelihood.
pub fn fit_em(data: &[[f64; 2]], start: &MixtureModel, config: &EmConfig) -> MixtureModel {
    let mut model = start.clone();
    let mut ll = log_likelihood(data, &model);
    model.log_likelihood = ll;
    for _ in 0..config.max_iterations {
        let mut next = em_step(data, &model, config);
        let next_ll = log_likelihood(data, &next);
        next.log_likelihood = next_ll;
        let delta = (next_ll - ll).abs();
        model = next;
        let converged = delta <= config.rel_tolerance * next_ll.abs().max(1e-12);
        ll = next_ll;
        if converged {
            break;
        }
    }
    model
}

/// A bigger model is accepted only when it lifts the log-likelihood by more
/// than this many nats per observation; raw improvement alone never stops,
/// because extra components always squeeze out a little more on training
/// data.
pub const GROWTH_MIN_GAIN_PER_POINT: f64 = 1.0;

/// Fits a single component from the sample moments, then repeatedly inserts
/// a component at the worst-explained data point and refits, keeping the
/// bigger model only while the mean log-likelihood improves by more than
/// [`GROWTH_MIN_GAIN_PER_POINT`].
pub fn greedy_fit(data: &[[f64; 2]], config: &EmConfig) -> MixtureModel {
    greedy_fit_trace(data, config).0
}

/// Like [`greedy_fit`], also returning the log-likelihood of every accepted
/// model size; the sequence is strictly increasing by construction.
pub fn greedy_fit_trace(data: &[[f64; 2]], config: &EmConfig) -> (MixtureModel, Vec<f64>) {
    assert!(!data.is_empty(), "cannot fit a mixture to no data");
    let mean = sample_mean(data);
    let global_cov = sample_covariance(data, mean);
    let single = MixtureModel {
        components: vec![GaussianComponent {
            weight: 1.0,
            mean,
            cov: regularize(global_cov, config.covariance_floor),
        }],
        log_likelihood: f64::NAN,
    };
    let mut best = fit_em(data, &single, config);
    let mut accepted = vec![best.log_likelihood];

    while best.components.len() < config.max_components {
        let prepared: Vec<Prepared> = best.components.iter().map(prepare).collect();
        let mut worst = 0usize;
        let mut worst_ld = f64::INFINITY;
        for (j, x) in data.iter().enumerate() {
            let ld = log_mixture_density_prepared(x, &prepared);
            if ld < worst_ld {
                worst_ld = ld;
                worst = j;
            }
        }

        let m = best.components.len() as f64;
        let mut components: Vec<GaussianComponent> = best
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.weight *= m / (m + 1.0);
                c
            })
            .collect();
        let half_cov = [
            [0.5 * global_cov[0][0], 0.5 * global_cov[0][1]],
            [0.5 * global_cov[1][0], 0.5 * global_cov[1][1]],
        ];
        components.push(GaussianComponent {
            weight: 1.0 / (m + 1.0),
            mean: data[worst],
            cov: regularize(half_cov, config.covariance_floor),
        });

        let candidate = fit_em(
            data,
            &MixtureModel {
                components,
                log_likelihood: f64::NAN,
            },
            config,
        );
        let margin = GROWTH_MIN_GAIN_PER_POINT * data.len() as f64;
        if candidate.log_likelihood > best.log_likelihood + margin {
            accepted.push(candidate.log_likelihood);
            best = candidate;
        } else {
            break;
        }
    }
    (best, accepted)
}

// ---------------------------------------------------------------------------
// per-relation models with feature standardization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: [f64; 2],
    pub scale: [f64; 2],
}

impl Standardizer {
    /// Per-axis z-scoring from population moments. A constant axis keeps
    /// scale 1 so the transform stays invertible.
    pub fn fit(data: &[[f64; 2]]) -> Self {
        let mean = sample_mean(data);
        let cov = sample_covariance(data, mean);
        let scale = [
            if cov[0][0].sqrt() > 0.0 { cov[0][0].sqrt() } else { 1.0 },
            if cov[1][1].sqrt() > 0.0 { cov[1][1].sqrt() } else { 1.0 },
        ];
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            (x[0] - self.mean[0]) / self.scale[0],
            (x[1] - self.mean[1]) / self.scale[1],
        ]
    }

    pub fn invert(&self, z: [f64; 2]) -> [f64; 2] {
        [
            z[0] * self.scale[0] + self.mean[0],
            z[1] * self.scale[1] + self.mean[1],
        ]
    }

    /// Log of the density change of the transform, `-ln(sx) - ln(sy)`.
    pub fn log_jacobian(&self) -> f64 {
        -self.scale[0].ln() - self.scale[1].ln()
    }
}

/// A mixture trained for one relation, evaluating as a density over the
/// original (distance, orientation) space.
#[derive(Debug, Clone)]
pub struct RelationModel {
    pub relation: String,
    pub standardization: Standardizer,
    pub mixture: MixtureModel,
}

impl RelationModel {
    pub fn train(relation: &str, vectors: &[FeatureVector], config: &EmConfig) -> Self {
        let raw: Vec<[f64; 2]> = vectors
            .iter()
            .map(|v| [v.distance_m, v.orientation_deg])
            .collect();
        let standardization = Standardizer::fit(&raw);
        let z: Vec<[f64; 2]> = raw.iter().map(|x| standardization.apply(*x)).collect();
        let mixture = greedy_fit(&z, config);
        RelationModel {
            relation: relation.to_string(),
            standardization,
            mixture,
        }
    }

    pub fn log_density(&self, v: FeatureVector) -> f64 {
        let z = self.standardization.apply([v.distance_m, v.orientation_deg]);
        log_mixture_density(&z, &self.mixture) + self.standardization.log_jacobian()
    }

    pub fn density(&self, v: FeatureVector) -> f64 {
        self.log_density(v).exp()
    }

    /// Axis-aligned box in original feature space covering every component
    /// out to `k_sigma` standard deviations.
    pub fn bounding_box(&self, k_sigma: f64) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY, f64::INFINITY];
        let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        for c in &self.mixture.components {
            for axis in 0..2 {
                let half = k_sigma * c.cov[axis][axis].sqrt();
                lo[axis] = lo[axis].min(c.mean[axis] - half);
                hi[axis] = hi[axis].max(c.mean[axis] + half);
            }
        }
        (self.standardization.invert(lo), self.standardization.invert(hi))
    }
}

/// Monte Carlo estimate of the mass of `density` over the box `[lo, hi]`.
///
/// Samples are stratified on a jittered square grid, which keeps the
/// estimator unbiased while cutting its variance well below plain uniform
/// sampling; leftover samples that do not fit the grid are drawn uniformly.
pub fn monte_carlo_mass<F: Fn([f64; 2]) -> f64>(
    density: F,
    lo: [f64; 2],
    hi: [f64; 2],
    samples: u64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let side = (samples as f64).sqrt().floor() as u64;
    let cell = [
        (hi[0] - lo[0]) / side as f64,
        (hi[1] - lo[1]) / side as f64,
    ];
    let mut acc = 0.0;
    for i in 0..side {
        for j in 0..side {
            let x = [
                lo[0] + (i as f64 + rng.gen::<f64>()) * cell[0],
                lo[1] + (j as f64 + rng.gen::<f64>()) * cell[1],
            ];
            acc += density(x);
        }
    }
    for _ in side * side..samples {
        let x = [
            rng.gen_range(lo[0]..hi[0]),
            rng.gen_range(lo[1]..hi[1]),
        ];
        acc += density(x);
    }
    acc / samples as f64 * area
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    relation: String,
    standardization: Standardizer,
    components: Vec<GaussianComponent>,
    log_likelihood: f64,
}

pub fn save_model(path: &Path, model: &RelationModel) -> Result<()> {
    let file = ModelFile {
        relation: model.relation.clone(),
        standardization: model.standardization.clone(),
        components: model.mixture.components.clone(),
        log_likelihood: model.mixture.log_likelihood,
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| PipelineError::Invalid(e.to_string()))?;
    std::fs::write(path, json + "\n").map_err(|e| PipelineError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<RelationModel> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| PipelineError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(RelationModel {
        relation: file.relation,
        standardization: file.standardization,
        mixture: MixtureModel {
            components: file.components,
            log_likelihood: file.log_likelihood,
        },
    })
}
