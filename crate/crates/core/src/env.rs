//! Simulated annealer environment.
//!
//! A request runs the same pipeline a physical annealer would: rescale into
//! the hardware ranges, optionally quantize coefficients, split the reads
//! across random spin-reversal gauges, draw each read from the gauged model,
//! and map samples back. Reads are independent restarts with their own seeds,
//! so they parallelize without changing results.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{Gauge, IsingError, IsingModel, QuantizeMode, SpinVector};
use crate::{par, seed};

/// Largest model the exact sampler accepts.
pub const MAX_EXACT_SPINS: usize = 20;

// Deliberately weak default: at these temperatures reads are barely better
// than uniform, the regime where raw sampling loses to post-processing.
pub const DEFAULT_SWEEPS: usize = 50;
pub const DEFAULT_BETA_START: f64 = 0.001;
pub const DEFAULT_BETA_END: f64 = 0.01;
pub const DEFAULT_GAUGES: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("{n} spins is too many for the exact sampler (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ising(#[from] IsingError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// Independent draws from `exp(−β·E)`. `beta_eff = inf` samples the
    /// ground states uniformly.
    ExactBoltzmann { beta_eff: f64 },
    /// Single-spin-flip Metropolis with a geometric inverse-temperature
    /// schedule from `beta_start` to `beta_end`, one read per restart.
    Metropolis { sweeps: usize, beta_start: f64, beta_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub sampler: Sampler,
    pub gauges: usize,
    #[serde(default)]
    pub quantize_bits: Option<u32>,
    #[serde(default)]
    pub quantize_mode: QuantizeMode,
    pub seed: u64,
}

impl Default for EnvConfig {
    /// Short, hot Metropolis schedule with two gauges.
    fn default() -> Self {
        EnvConfig {
            sampler: Sampler::Metropolis {
                sweeps: DEFAULT_SWEEPS,
                beta_start: DEFAULT_BETA_START,
                beta_end: DEFAULT_BETA_END,
            },
            gauges: DEFAULT_GAUGES,
            quantize_bits: None,
            quantize_mode: QuantizeMode::Round,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn exact(beta_eff: f64) -> Self {
        EnvConfig { sampler: Sampler::ExactBoltzmann { beta_eff }, ..EnvConfig::default() }
    }

    pub fn metropolis(sweeps: usize, beta_start: f64, beta_end: f64) -> Self {
        EnvConfig {
            sampler: Sampler::Metropolis { sweeps, beta_start, beta_end },
            ..EnvConfig::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        EnvConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidConfig(m));
        if self.gauges == 0 {
            return bad("gauges must be >= 1".into());
        }
        if let Some(bits) = self.quantize_bits {
            if bits < 2 {
                return bad(format!("quantize_bits must be >= 2, got {bits}"));
            }
        }
        match self.sampler {
            Sampler::ExactBoltzmann { beta_eff } => {
                if beta_eff.is_nan() || beta_eff < 0.0 {
                    return bad(format!("beta_eff must be >= 0, got {beta_eff}"));
                }
            }
            Sampler::Metropolis { sweeps, beta_start, beta_end } => {
                if sweeps == 0 {
                    return bad("sweeps must be >= 1".into());
                }
                if !(beta_start > 0.0 && beta_start.is_finite() && beta_end.is_finite()) {
                    return bad("schedule inverse temperatures must be positive and finite".into());
                }
                if !(beta_start < beta_end) {
                    return bad(format!("schedule must warm to cold: {beta_start} >= {beta_end}"));
                }
            }
        }
        Ok(())
    }
}

/// Samples returned for one request, in (gauge, read) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<SpinVector>,
    /// Energy of each sample under [`SampleBatch::programmed`].
    pub energies: Vec<f64>,
    /// `(gauge index, read index within gauge)` per sample.
    pub provenance: Vec<(usize, usize)>,
    /// The model after hardware rescaling and quantization, before gauging.
    pub programmed: IsingModel,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Submits `model` and draws `num_reads` samples.
pub fn sample(model: &IsingModel, num_reads: usize, cfg: &EnvConfig) -> Result<SampleBatch, EnvError> {
    cfg.validate()?;
    if num_reads == 0 {
        return Err(EnvError::InvalidConfig("num_reads must be >= 1".into()));
    }
    let n = model.num_spins();
    if matches!(cfg.sampler, Sampler::ExactBoltzmann { .. }) && n > MAX_EXACT_SPINS {
        return Err(EnvError::TooLarge { n, limit: MAX_EXACT_SPINS });
    }

    let mut programmed = model.clamp_to_hardware();
    if let Some(bits) = cfg.quantize_bits {
        programmed = programmed.quantize(bits, cfg.quantize_mode)?;
    }

    let mut samples = Vec::with_capacity(num_reads);
    let mut provenance = Vec::with_capacity(num_reads);
    let per_gauge = num_reads / cfg.gauges;
    let extra = num_reads % cfg.gauges;
    for g in 0..cfg.gauges {
        let reads = per_gauge + usize::from(g < extra);
        if reads == 0 {
            continue;
        }
        let gauge_seed = seed::derive_indexed(cfg.seed, "gauge", g as u64);
        let gauge = Gauge::random(n, &mut seed::rng(gauge_seed));
        let gauged = programmed.apply_gauge(&gauge)?;
        let raw = match cfg.sampler {
            Sampler::ExactBoltzmann { beta_eff } => {
                let cdf = cumulative(&exact_boltzmann_distribution(&gauged, beta_eff)?);
                par::map_range(reads, |r| {
                    let mut rng = seed::rng(seed::derive_indexed(gauge_seed, "read", r as u64));
                    let u: f64 = rng.gen();
                    let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                    SpinVector::from_index(n, k as u64)
                })
            }
            Sampler::Metropolis { sweeps, beta_start, beta_end } => {
                let adj = gauged.adjacency();
                let schedule = geometric_schedule(sweeps, beta_start, beta_end);
                par::map_range(reads, |r| {
                    let mut rng = seed::rng(seed::derive_indexed(gauge_seed, "read", r as u64));
                    metropolis_read(&gauged, &adj, &schedule, &mut rng)
                })
            }
        };
        for (r, z) in raw.into_iter().enumerate() {
            samples.push(z.ungauge(&gauge)?);
            provenance.push((g, r));
        }
    }
    let energies = samples.iter().map(|z| programmed.energy_unchecked(z.spins())).collect();
    Ok(SampleBatch { samples, energies, provenance, programmed })
}

/// `P(z) ∝ exp(−β·E(z))` over all states, indexed as
/// [`IsingModel::energy_of_index`].
pub fn exact_boltzmann_distribution(model: &IsingModel, beta_eff: f64) -> Result<Vec<f64>, EnvError> {
    let n = model.num_spins();
    if n > MAX_EXACT_SPINS {
        return Err(EnvError::TooLarge { n, limit: MAX_EXACT_SPINS });
    }
    if beta_eff.is_nan() || beta_eff < 0.0 {
        return Err(EnvError::InvalidConfig(format!("beta_eff must be >= 0, got {beta_eff}")));
    }
    let energies = model.all_energies()?;
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = if beta_eff.is_infinite() {
        energies
            .iter()
            .map(|&e| if e - e0 <= crate::ising::GROUND_TOLERANCE { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies.iter().map(|&e| (-beta_eff * (e - e0)).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = p
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// Inverse temperature per sweep, geometric from `start` to `end`.
pub fn geometric_schedule(sweeps: usize, start: f64, end: f64) -> Vec<f64> {
    if sweeps == 1 {
        return vec![end];
    }
    let ratio = (end / start).powf(1.0 / (sweeps - 1) as f64);
    (0..sweeps).map(|s| start * ratio.powi(s as i32)).collect()
}

fn metropolis_read(
    model: &IsingModel,
    adj: &[Vec<(usize, f64)>],
    schedule: &[f64],
    rng: &mut seed::Rng,
) -> SpinVector {
    let n = model.num_spins();
    let mut z = SpinVector::from_index(n, 0);
    for s in z.spins_mut() {
        if rng.gen::<bool>() {
            *s = 1;
        }
    }
    let spins = z.spins_mut();
    for &beta in schedule {
        for i in 0..n {
            let delta = model.flip_delta(adj, spins, i);
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                spins[i] = -spins[i];
            }
        }
    }
    z
}
