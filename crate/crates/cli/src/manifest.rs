//! Run manifests: a TOML document holding every parameter of a run. Command
//! flags override individual fields; whatever is left unset takes the
//! library default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rqa_core::agent::{AgentConfig, Pipeline, TakenSet};
use rqa_core::automaton::{DEFAULT_THETA1, DEFAULT_THETA2};
use rqa_core::bench::factoring::gen_corpus_factoring;
use rqa_core::bench::{gen_satisfiable_3sat, BenchInstance};
use rqa_core::cnf;
use rqa_core::env::{self, EnvConfig, Sampler};
use rqa_core::ising::QuantizeMode;

pub const SEED_ENV: &str = "RQA_FORGE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Metropolis,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantize_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantize_truncate: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSource {
    pub count: usize,
    pub n: usize,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_ratio() -> f64 {
    rqa_core::bench::random::DEFAULT_RATIO
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactoringSource {
    pub bit_limit: u32,
    pub var_limit: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Pipeline>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taken_set: Option<TakenSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Record wall-clock times in reports (makes them non-reproducible).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    /// Output file (solve, encode) or directory (bench), relative to the
    /// manifest.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// DIMACS files, relative to the manifest.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random3sat: Option<RandomSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factoring: Option<FactoringSource>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub env: EnvSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base: PathBuf,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: RunManifest =
            toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        m.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let corpus = Some(RandomSource { count: 20, n: 20, ratio: default_ratio(), seed: 2024 });
        let m = match name {
            "desk" => RunManifest { budgets: Some(vec![100, 1000]), random3sat: corpus, ..Default::default() },
            "paper-shape" => RunManifest {
                budgets: Some(vec![100, 500, 1000, 5000, 10000]),
                random3sat: corpus,
                ..Default::default()
            },
            other => bail!("unknown preset '{other}' (expected desk or paper-shape)"),
        };
        Ok(RunManifest { methods: Some(Pipeline::ALL.to_vec()), ..m })
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Flag, then manifest, then `RQA_FORGE_SEED`, then 0.
    pub fn seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}='{v}' is not an unsigned integer")),
            Err(_) => Ok(0),
        }
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        let e = &self.env;
        let sampler = match e.sampler.unwrap_or(SamplerKind::Metropolis) {
            SamplerKind::Exact => Sampler::ExactBoltzmann { beta_eff: e.beta_eff.unwrap_or(1.0) },
            SamplerKind::Metropolis => Sampler::Metropolis {
                sweeps: e.sweeps.unwrap_or(env::DEFAULT_SWEEPS),
                beta_start: e.beta_start.unwrap_or(env::DEFAULT_BETA_START),
                beta_end: e.beta_end.unwrap_or(env::DEFAULT_BETA_END),
            },
        };
        let cfg = EnvConfig {
            sampler,
            gauges: e.gauges.unwrap_or(env::DEFAULT_GAUGES),
            quantize_bits: e.quantize_bits,
            quantize_mode: if e.quantize_truncate == Some(true) { QuantizeMode::Truncate } else { QuantizeMode::Round },
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            episodes: self.episodes.unwrap_or(rqa_core::agent::DEFAULT_EPISODES),
            theta1: self.theta1.unwrap_or(DEFAULT_THETA1),
            theta2: self.theta2.unwrap_or(DEFAULT_THETA2),
            taken_set: self.taken_set.unwrap_or_default(),
            ..AgentConfig::default()
        }
    }

    /// File instances first, then generated random 3-SAT, then factoring.
    pub fn corpus(&self) -> Result<Vec<BenchInstance>> {
        let mut out = Vec::new();
        for p in &self.instances {
            let path = self.resolve(p);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let formula = cnf::parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
            out.push(BenchInstance { name: p.display().to_string(), formula });
        }
        if let Some(r) = &self.random3sat {
            for (k, formula) in gen_satisfiable_3sat(r.count, r.n, r.ratio, r.seed)?.into_iter().enumerate() {
                out.push(BenchInstance { name: format!("r3sat-n{}-s{}-{k:03}", r.n, r.seed), formula });
            }
        }
        if let Some(f) = &self.factoring {
            for inst in gen_corpus_factoring(f.bit_limit, f.var_limit)? {
                out.push(BenchInstance { name: inst.name(), formula: inst.cnf });
            }
        }
        if out.is_empty() {
            bail!("manifest names no instances (set instances, [random3sat] or [factoring])");
        }
        Ok(out)
    }
}
