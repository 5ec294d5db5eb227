//! Monte-Carlo verification that the Cramer-Rao bounds are attainable.
//!
//! Sampling is counter-based: every random draw comes from a stream keyed
//! by (seed, trial, pixel), so results are byte-identical for any number
//! of worker threads and trials can be generated in any order. Reductions
//! over trials use pairwise summation in trial order for the same reason.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::Gain;
use crate::model::{CountModel, ModelKind};
use crate::physics::SolitonModel;

/// Above this expected count a Poisson draw is replaced by its Gaussian
/// approximation (relative skew below ~3e-2 / sqrt(mean)).
pub const POISSON_GAUSSIAN_THRESHOLD: f64 = 1e3;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Counter-based generator: a splitmix64 sequence whose starting state is
/// a hash of (seed, trial, pixel).
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn stream(seed: u64, trial: u64, pixel: u64) -> Self {
        let mut s = mix64(seed.wrapping_add(GOLDEN_GAMMA));
        s = mix64(s ^ mix64(trial.wrapping_mul(0xA24B_AED4_963E_E407)));
        s = mix64(s ^ mix64(pixel.wrapping_mul(0x9FB2_1C65_1E98_DF25)));
        CounterRng { state: s }
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}

/// Draws synthetic images (per-pixel counts) from a count model.
pub struct CountSampler<'a> {
    model: &'a CountModel,
    /// Lower Cholesky factor of the covariance, for Gaussian models.
    chol_l: Option<DMatrix<f64>>,
}

impl<'a> CountSampler<'a> {
    pub fn new(model: &'a CountModel) -> Result<Self> {
        let chol_l = match model.tag {
            ModelKind::Poisson => None,
            ModelKind::GaussianDiagonal | ModelKind::Bogoliubov => {
                Some(model.cholesky()?.l())
            }
        };
        Ok(CountSampler { model, chol_l })
    }

    /// One image for the given (seed, trial) key.
    pub fn sample(&self, seed: u64, trial: u64) -> Vec<f64> {
        match &self.chol_l {
            None => self
                .model
                .mean
                .iter()
                .enumerate()
                .map(|(px, &lambda)| {
                    let mut rng = CounterRng::stream(seed, trial, px as u64);
                    sample_poisson(lambda, &mut rng)
                })
                .collect(),
            Some(l) => {
                let z = DVector::from_iterator(
                    self.model.m_px(),
                    (0..self.model.m_px()).map(|px| {
                        let mut rng = CounterRng::stream(seed, trial, px as u64);
                        StandardNormal.sample(&mut rng)
                    }),
                );
                (&self.model.mean + l * z).iter().cloned().collect()
            }
        }
    }
}

fn sample_poisson(lambda: f64, rng: &mut CounterRng) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda > POISSON_GAUSSIAN_THRESHOLD {
        let z: f64 = StandardNormal.sample(rng);
        return (lambda + lambda.sqrt() * z).round().max(0.0);
    }
    Poisson::new(lambda).expect("positive finite mean").sample(rng)
}

/// Pairwise (cascade) summation: deterministic and accurate.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
}

/// Summary statistics of a batch of position estimates.
#[derive(Debug, Clone, Copy)]
pub struct TrialReport {
    pub trials: usize,
    /// Mean of the estimates.
    pub mean: f64,
    /// mean - true position.
    pub bias: f64,
    /// Standard error of the mean.
    pub mean_std_error: f64,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    /// Standard error of the sample variance (Gaussian approximation),
    /// variance * sqrt(2 / (trials - 1)).
    pub variance_std_error: f64,
}

/// Run `cfg.trials` independent simulated measurements of the model and
/// estimate the soliton position in each with `gain`, expanding around
/// `reference`. The true position is the one the count model was built at.
pub fn run_trials(
    model: &CountModel,
    q_true: f64,
    gain: &Gain,
    reference: &SolitonModel,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    if cfg.trials < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 trials for a variance, got {}",
            cfg.trials
        )));
    }
    let sampler = CountSampler::new(model)?;
    let estimates: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let counts = sampler.sample(cfg.seed, trial);
            gain.estimate(&counts, reference)
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = cfg.trials as f64;
    let mean = pairwise_sum(&estimates) / n;
    let sq: Vec<f64> = estimates.iter().map(|e| (e - mean) * (e - mean)).collect();
    let variance = pairwise_sum(&sq) / (n - 1.0);
    Ok(TrialReport {
        trials: cfg.trials,
        mean,
        bias: mean - q_true,
        mean_std_error: (variance / n).sqrt(),
        variance,
        variance_std_error: variance * (2.0 / (n - 1.0)).sqrt(),
    })
}
