//! Ising models, energy evaluation, exhaustive ground states and the
//! coefficient transforms an annealer applies before programming a problem.
//!
//! Spins are 0-based internally. The JSON form uses 1-based indices:
//! `{"n": N, "h": [..], "j": [[i, j, value], ..]}` with `i < j`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

/// Hardware bias range `[-H_MAX, H_MAX]`.
pub const H_MAX: f64 = 2.0;
/// Hardware coupler range `[-J_MAX, J_MAX]`.
pub const J_MAX: f64 = 1.0;
/// Largest model the exhaustive routines accept.
pub const MAX_ENUMERATION_SPINS: usize = 24;
/// Absolute tolerance used to collect degenerate ground states.
pub const GROUND_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_QUANTIZE_BITS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsingError {
    #[error("expected {expected} spins, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{n} spins is too many for exhaustive enumeration (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("quantization needs at least 2 bits, got {0}")]
    TooFewBits(u32),
    #[error("coefficient {value} is outside the hardware range [-{limit}, {limit}]")]
    OutOfRange { value: f64, limit: f64 },
    #[error("coupler ({i}, {j}) is invalid for {n} spins")]
    BadCoupler { i: usize, j: usize, n: usize },
    #[error("spin value {0} is not -1 or +1")]
    BadSpin(i64),
    #[error("invalid model JSON: {0}")]
    Json(String),
}

/// `E(z) = Σ h_i z_i + Σ_{i<j} J_ij z_i z_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    h: Vec<f64>,
    j: BTreeMap<(usize, usize), f64>,
}

impl IsingModel {
    pub fn new(num_spins: usize) -> Self {
        IsingModel { h: vec![0.0; num_spins], j: BTreeMap::new() }
    }

    /// Builds a model from 0-based couplers. Pairs may be given in either
    /// order; duplicates accumulate; zero couplers are dropped.
    pub fn from_parts(
        h: Vec<f64>,
        couplers: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, IsingError> {
        let mut m = IsingModel { h, j: BTreeMap::new() };
        for (a, b, v) in couplers {
            m.add_coupler(a, b, v)?;
        }
        Ok(m)
    }

    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn set_h(&mut self, i: usize, value: f64) {
        self.h[i] = value;
    }

    pub fn couplers(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.j
    }

    pub fn coupler(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.j.get(&key).copied().unwrap_or(0.0)
    }

    pub fn set_coupler(&mut self, i: usize, j: usize, value: f64) -> Result<(), IsingError> {
        let n = self.num_spins();
        if i == j || i >= n || j >= n {
            return Err(IsingError::BadCoupler { i, j, n });
        }
        let key = if i < j { (i, j) } else { (j, i) };
        if value == 0.0 {
            self.j.remove(&key);
        } else {
            self.j.insert(key, value);
        }
        Ok(())
    }

    fn add_coupler(&mut self, i: usize, j: usize, value: f64) -> Result<(), IsingError> {
        let v = self.coupler(i, j) + value;
        self.set_coupler(i, j, v)
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_j(&self) -> f64 {
        self.j.values().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.max_abs_h().max(self.max_abs_j())
    }

    pub fn in_hardware_range(&self) -> bool {
        self.max_abs_h() <= H_MAX && self.max_abs_j() <= J_MAX
    }

    /// Neighbour lists of the nonzero coupler graph.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_spins()];
        for (&(i, j), &v) in &self.j {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn energy(&self, z: &SpinVector) -> Result<f64, IsingError> {
        self.check_len(z.len())?;
        Ok(self.energy_unchecked(z.spins()))
    }

    pub(crate) fn energy_unchecked(&self, z: &[i8]) -> f64 {
        let linear: f64 = self.h.iter().zip(z).map(|(h, &s)| h * s as f64).sum();
        let quadratic: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &v)| v * (z[a] * z[b]) as f64)
            .sum();
        linear + quadratic
    }

    /// Energy of the state whose spin `i` is `+1` iff bit `i` of `index` is set.
    pub fn energy_of_index(&self, index: u64) -> f64 {
        let spin = |i: usize| if index >> i & 1 == 1 { 1.0 } else { -1.0 };
        let linear: f64 = self.h.iter().enumerate().map(|(i, h)| h * spin(i)).sum();
        let quadratic: f64 = self.j.iter().map(|(&(a, b), &v)| v * spin(a) * spin(b)).sum();
        linear + quadratic
    }

    /// Energy change from flipping spin `i` of `z`, given adjacency lists.
    pub fn flip_delta(&self, adj: &[Vec<(usize, f64)>], z: &[i8], i: usize) -> f64 {
        let field: f64 = self.h[i] + adj[i].iter().map(|&(k, v)| v * z[k] as f64).sum::<f64>();
        -2.0 * z[i] as f64 * field
    }

    fn check_len(&self, got: usize) -> Result<(), IsingError> {
        if got != self.num_spins() {
            return Err(IsingError::LengthMismatch { expected: self.num_spins(), got });
        }
        Ok(())
    }

    fn check_enumerable(&self) -> Result<(), IsingError> {
        if self.num_spins() > MAX_ENUMERATION_SPINS {
            return Err(IsingError::TooLarge {
                n: self.num_spins(),
                limit: MAX_ENUMERATION_SPINS,
            });
        }
        Ok(())
    }

    /// All `2^N` energies, indexed as in [`IsingModel::energy_of_index`].
    pub fn all_energies(&self) -> Result<Vec<f64>, IsingError> {
        self.check_enumerable()?;
        let count = 1usize << self.num_spins();
        Ok(par::map_range(count, |k| self.energy_of_index(k as u64)))
    }

    /// Global minimum energy and every state within [`GROUND_TOLERANCE`] of it,
    /// in ascending state-index order.
    pub fn brute_force_ground(&self) -> Result<GroundStates, IsingError> {
        let energies = self.all_energies()?;
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let states = energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| e <= min + GROUND_TOLERANCE)
            .map(|(k, _)| SpinVector::from_index(self.num_spins(), k as u64))
            .collect();
        Ok(GroundStates { energy: min, states })
    }

    /// `Σ_z E(z)` over all states, pairwise-summed. Zero for every model.
    pub fn sum_all_energies(&self) -> Result<f64, IsingError> {
        Ok(pairwise_sum(&self.all_energies()?))
    }

    pub fn scale(&self, lambda: f64) -> Result<IsingModel, IsingError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(IsingError::NonPositiveScale(lambda));
        }
        Ok(IsingModel {
            h: self.h.iter().map(|v| v * lambda).collect(),
            j: self.j.iter().map(|(&k, &v)| (k, v * lambda)).collect(),
        })
    }

    /// Uniformly rescales so that `|h| ≤ 2` and `|J| ≤ 1`. In-range models are
    /// returned unchanged.
    pub fn clamp_to_hardware(&self) -> IsingModel {
        let lambda = (self.max_abs_h() / H_MAX).max(self.max_abs_j() / J_MAX);
        if lambda <= 1.0 {
            return self.clone();
        }
        let mut m = IsingModel {
            h: self.h.iter().map(|v| v / lambda).collect(),
            j: self.j.iter().map(|(&k, &v)| (k, v / lambda)).collect(),
        };
        // x / λ can land one ulp outside the range
        for v in &mut m.h {
            *v = v.clamp(-H_MAX, H_MAX);
        }
        for v in m.j.values_mut() {
            *v = v.clamp(-J_MAX, J_MAX);
        }
        m
    }

    /// Snaps every programmed coefficient onto a uniform grid of `2^bits`
    /// levels spanning its hardware range. Zero coefficients are treated as
    /// unprogrammed and stay zero.
    pub fn quantize(&self, bits: u32, mode: QuantizeMode) -> Result<IsingModel, IsingError> {
        if bits < 2 {
            return Err(IsingError::TooFewBits(bits));
        }
        let h = self
            .h
            .iter()
            .map(|&v| quantize_value(v, H_MAX, bits, mode))
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = IsingModel { h, j: BTreeMap::new() };
        for (&(a, b), &v) in &self.j {
            let q = quantize_value(v, J_MAX, bits, mode)?;
            m.set_coupler(a, b, q)?;
        }
        Ok(m)
    }

    /// `h_i ← g_i h_i`, `J_ij ← g_i g_j J_ij`.
    pub fn apply_gauge(&self, g: &Gauge) -> Result<IsingModel, IsingError> {
        self.check_len(g.len())?;
        let s = g.signs();
        Ok(IsingModel {
            h: self.h.iter().zip(s).map(|(h, &gi)| h * gi as f64).collect(),
            j: self
                .j
                .iter()
                .map(|(&(a, b), &v)| ((a, b), v * (s[a] * s[b]) as f64))
                .collect(),
        })
    }

    pub fn to_json(&self) -> IsingJson {
        IsingJson {
            n: self.num_spins(),
            h: self.h.clone(),
            j: self.j.iter().map(|(&(a, b), &v)| (a + 1, b + 1, v)).collect(),
        }
    }

    pub fn from_json(doc: &IsingJson) -> Result<IsingModel, IsingError> {
        if doc.h.len() != doc.n {
            return Err(IsingError::Json(format!("n = {} but h has {} entries", doc.n, doc.h.len())));
        }
        let mut m = IsingModel::new(doc.n);
        m.h = doc.h.clone();
        for &(i, j, v) in &doc.j {
            if i == 0 || i >= j || j > doc.n {
                return Err(IsingError::BadCoupler { i, j, n: doc.n });
            }
            if m.j.contains_key(&(i - 1, j - 1)) {
                return Err(IsingError::Json(format!("duplicate coupler ({i}, {j})")));
            }
            m.set_coupler(i - 1, j - 1, v)?;
        }
        Ok(m)
    }
}

impl Serialize for IsingModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IsingModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = IsingJson::deserialize(deserializer)?;
        IsingModel::from_json(&doc).map_err(serde::de::Error::custom)
    }
}

/// Wire form of an [`IsingModel`] (1-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingJson {
    pub n: usize,
    pub h: Vec<f64>,
    pub j: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizeMode {
    /// Nearest grid level.
    #[default]
    Round,
    /// Next grid level toward the bottom of the range.
    Truncate,
}

/// Grid spacing for `bits` levels over `[-limit, limit]`.
pub fn grid_step(limit: f64, bits: u32) -> f64 {
    2.0 * limit / ((1u64 << bits) - 1) as f64
}

fn quantize_value(v: f64, limit: f64, bits: u32, mode: QuantizeMode) -> Result<f64, IsingError> {
    if !(v.abs() <= limit) {
        return Err(IsingError::OutOfRange { value: v, limit });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let step = grid_step(limit, bits);
    let levels = ((1u64 << bits) - 1) as f64;
    let pos = (v + limit) / step;
    let k = match mode {
        QuantizeMode::Round => pos.round(),
        // tolerate representation error just below a grid point
        QuantizeMode::Truncate => (pos + 1e-9).floor(),
    }
    .clamp(0.0, levels);
    // compute from the nearest endpoint so that grid points reproduce exactly
    let q = if k * 2.0 <= levels { -limit + k * step } else { limit - (levels - k) * step };
    Ok(q)
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Minimum energy and the (degenerate) states attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub states: Vec<SpinVector>,
}

/// A state in `{-1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self, IsingError> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(IsingError::BadSpin(bad as i64));
        }
        Ok(SpinVector(spins))
    }

    pub fn uniform(n: usize, value: i8) -> Self {
        SpinVector::new(vec![value; n]).expect("value must be -1 or +1")
    }

    /// Spin `i` is `+1` iff bit `i` of `index` is set.
    pub fn from_index(n: usize, index: u64) -> Self {
        SpinVector((0..n).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| if s == 1 { acc | 1 << i } else { acc })
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> SpinVector {
        SpinVector(self.0.iter().map(|s| -s).collect())
    }

    /// Maps a sample of the gauged model back to the original model.
    pub fn ungauge(&self, g: &Gauge) -> Result<SpinVector, IsingError> {
        if g.len() != self.len() {
            return Err(IsingError::LengthMismatch { expected: self.len(), got: g.len() });
        }
        Ok(SpinVector(self.0.iter().zip(g.signs()).map(|(z, s)| z * s).collect()))
    }
}

impl TryFrom<Vec<i64>> for SpinVector {
    type Error = IsingError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        if let Some(&bad) = v.iter().find(|&&s| s != 1 && s != -1) {
            return Err(IsingError::BadSpin(bad));
        }
        Ok(SpinVector(v.into_iter().map(|s| s as i8).collect()))
    }
}

impl From<SpinVector> for Vec<i64> {
    fn from(v: SpinVector) -> Self {
        v.0.into_iter().map(i64::from).collect()
    }
}

/// Spin-reversal transform: a sign per spin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge(Vec<i8>);

impl Gauge {
    pub fn new(signs: Vec<i8>) -> Result<Self, IsingError> {
        if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(IsingError::BadSpin(bad as i64));
        }
        Ok(Gauge(signs))
    }

    pub fn identity(n: usize) -> Self {
        Gauge(vec![1; n])
    }

    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        Gauge((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
