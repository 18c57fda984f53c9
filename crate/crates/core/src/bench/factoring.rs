//! Factoring instances: a shift-and-add multiplier circuit whose output is
//! pinned to the target, Tseitin-encoded and simplified.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{self, Assignment, CnfError, CnfFormula};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactoringError {
    #[error("target {0} is below 4")]
    TargetTooSmall(u64),
    #[error("factor registers need at least 2 bits, got {n1} and {n2}")]
    RegisterTooNarrow { n1: u32, n2: u32 },
    #[error("target {target} needs more than {width} product bits")]
    TargetTooWide { target: u64, width: u32 },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Where a factor-register bit lives after simplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitSource {
    /// 1-based variable of the instance's CNF.
    Var(u32),
    /// Fixed by propagation.
    Const(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoringInstance {
    pub target: u64,
    pub n1: u32,
    pub n2: u32,
    pub cnf: CnfFormula,
    /// Register bits, least significant first.
    pub x1_bits: Vec<BitSource>,
    pub x2_bits: Vec<BitSource>,
    /// Variables in the Tseitin CNF before simplification.
    pub tseitin_vars: usize,
    /// False when propagation refuted the circuit; `cnf` is then the raw
    /// Tseitin CNF.
    pub simplified: bool,
}

impl FactoringInstance {
    /// Reads both registers out of a model of `cnf`.
    pub fn decode(&self, model: &Assignment) -> (u64, u64) {
        let read = |bits: &[BitSource]| {
            bits.iter().enumerate().fold(0u64, |acc, (k, b)| {
                let set = match *b {
                    BitSource::Var(v) => model.get(v),
                    BitSource::Const(c) => c,
                };
                if set {
                    acc | 1 << k
                } else {
                    acc
                }
            })
        };
        (read(&self.x1_bits), read(&self.x2_bits))
    }

    pub fn name(&self) -> String {
        format!("factor-{}-{}x{}", self.target, self.n1, self.n2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sig {
    Const(bool),
    Var(u32),
}

/// Gate-level builder emitting Tseitin clauses, one fresh variable per gate.
struct Circuit {
    next_var: u32,
    clauses: Vec<Vec<i64>>,
}

impl Circuit {
    fn fresh(&mut self) -> u32 {
        let v = self.next_var;
        self.next_var += 1;
        v
    }

    fn and(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::Const(false), _) | (_, Sig::Const(false)) => Sig::Const(false),
            (Sig::Const(true), x) | (x, Sig::Const(true)) => x,
            (Sig::Var(x), Sig::Var(y)) if x == y => a,
            (Sig::Var(x), Sig::Var(y)) => {
                let c = self.fresh() as i64;
                let (x, y) = (x as i64, y as i64);
                self.clauses.extend([vec![-c, x], vec![-c, y], vec![c, -x, -y]]);
                Sig::Var(c as u32)
            }
        }
    }

    fn or(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::Const(true), _) | (_, Sig::Const(true)) => Sig::Const(true),
            (Sig::Const(false), x) | (x, Sig::Const(false)) => x,
            (Sig::Var(x), Sig::Var(y)) if x == y => a,
            (Sig::Var(x), Sig::Var(y)) => {
                let c = self.fresh() as i64;
                let (x, y) = (x as i64, y as i64);
                self.clauses.extend([vec![c, -x], vec![c, -y], vec![-c, x, y]]);
                Sig::Var(c as u32)
            }
        }
    }

    fn xor(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::Const(p), Sig::Const(q)) => Sig::Const(p != q),
            (Sig::Const(false), x) | (x, Sig::Const(false)) => x,
            (Sig::Const(true), Sig::Var(x)) | (Sig::Var(x), Sig::Const(true)) => {
                // ¬x needs a gate of its own to stay a plain signal
                let c = self.fresh() as i64;
                let x = x as i64;
                self.clauses.extend([vec![c, x], vec![-c, -x]]);
                Sig::Var(c as u32)
            }
            (Sig::Var(x), Sig::Var(y)) if x == y => Sig::Const(false),
            (Sig::Var(x), Sig::Var(y)) => {
                let c = self.fresh() as i64;
                let (x, y) = (x as i64, y as i64);
                self.clauses.extend([
                    vec![-c, x, y],
                    vec![-c, -x, -y],
                    vec![c, -x, y],
                    vec![c, x, -y],
                ]);
                Sig::Var(c as u32)
            }
        }
    }

    fn full_add(&mut self, a: Sig, b: Sig, carry: Sig) -> (Sig, Sig) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, carry);
        let g = self.and(a, b);
        let p = self.and(carry, ab);
        let cout = self.or(g, p);
        (sum, cout)
    }
}

fn bit_width(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// Builds the factoring CNF for `target` with factor registers of `n1` and
/// `n2` bits, both constrained to be at least 2.
pub fn gen_factoring(target: u64, n1: u32, n2: u32) -> Result<FactoringInstance, FactoringError> {
    if target < 4 {
        return Err(FactoringError::TargetTooSmall(target));
    }
    if n1 < 2 || n2 < 2 {
        return Err(FactoringError::RegisterTooNarrow { n1, n2 });
    }
    let width = n1 + n2;
    if width < 64 && bit_width(target) > width {
        return Err(FactoringError::TargetTooWide { target, width });
    }

    let mut c = Circuit { next_var: n1 + n2 + 1, clauses: Vec::new() };
    let a: Vec<Sig> = (1..=n1).map(Sig::Var).collect();
    let b: Vec<Sig> = (n1 + 1..=n1 + n2).map(Sig::Var).collect();

    // ripple-carry shift-and-add: acc += (a · b_j) << j
    let mut acc = vec![Sig::Const(false); width as usize];
    for (j, &bj) in b.iter().enumerate() {
        let row: Vec<Sig> = a.iter().map(|&ai| c.and(ai, bj)).collect();
        let mut carry = Sig::Const(false);
        for (pos, slot) in acc.iter_mut().enumerate().skip(j) {
            let addend = row.get(pos - j).copied().unwrap_or(Sig::Const(false));
            let (s, cout) = c.full_add(*slot, addend, carry);
            *slot = s;
            carry = cout;
        }
    }

    let mut clauses = std::mem::take(&mut c.clauses);
    let mut refuted = false;
    for (i, &q) in acc.iter().enumerate() {
        let want = target >> i & 1 == 1;
        match q {
            Sig::Var(v) => clauses.push(vec![if want { v as i64 } else { -(v as i64) }]),
            Sig::Const(k) if k != want => refuted = true,
            Sig::Const(_) => {}
        }
    }
    if refuted {
        clauses.push(vec![1]);
        clauses.push(vec![-1]);
    }
    // x ≥ 2: some bit above the lowest is set
    clauses.push((2..=n1 as i64).collect());
    clauses.push((n1 as i64 + 2..=(n1 + n2) as i64).collect());

    let num_vars = (c.next_var - 1) as usize;
    let refs: Vec<&[i64]> = clauses.iter().map(Vec::as_slice).collect();
    let raw = CnfFormula::from_dimacs_clauses(num_vars, &refs)?;

    let registers = |range: std::ops::RangeInclusive<u32>, f: &dyn Fn(u32) -> BitSource| {
        range.map(f).collect::<Vec<_>>()
    };
    match cnf::simplify(&raw, &vec![None; num_vars]) {
        Ok(s) => {
            let locate = |v: u32| match s.new_index_of(v) {
                Some(k) => BitSource::Var(k),
                None => BitSource::Const(s.forced[v as usize - 1].unwrap_or(false)),
            };
            Ok(FactoringInstance {
                target,
                n1,
                n2,
                x1_bits: registers(1..=n1, &locate),
                x2_bits: registers(n1 + 1..=n1 + n2, &locate),
                cnf: s.formula,
                tseitin_vars: num_vars,
                simplified: true,
            })
        }
        Err(CnfError::UnsatisfiableUnderFixed) => Ok(FactoringInstance {
            target,
            n1,
            n2,
            x1_bits: registers(1..=n1, &BitSource::Var),
            x2_bits: registers(n1 + 1..=n1 + n2, &BitSource::Var),
            cnf: raw,
            tseitin_vars: num_vars,
            simplified: false,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Default register widths for a bare target: each factor may use all but
/// the top bit of the target.
pub fn default_widths(target: u64) -> (u32, u32) {
    let w = bit_width(target).saturating_sub(1).max(2);
    (w, w)
}

fn primes_below(limit: u64) -> Vec<u64> {
    (2..limit).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

/// Products of two primes below `2^bit_limit`, register widths equal to the
/// factors' bit widths, keeping non-trivial instances whose simplified CNF
/// has at most `var_limit` variables. Ordered by (target, smaller factor).
pub fn gen_corpus_factoring(bit_limit: u32, var_limit: usize) -> Result<Vec<FactoringInstance>, FactoringError> {
    let bound = 1u64 << bit_limit.min(40);
    let primes = primes_below(bound / 2 + 1);
    let mut pairs = Vec::new();
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i..] {
            if p * q >= bound {
                break;
            }
            pairs.push((p * q, p, q));
        }
    }
    pairs.sort_unstable();
    let mut out = Vec::new();
    for (target, p, q) in pairs {
        if target < 4 {
            continue;
        }
        let inst = gen_factoring(target, bit_width(p).max(2), bit_width(q).max(2))?;
        if inst.simplified && inst.cnf.num_clauses() > 0 && inst.cnf.num_vars() <= var_limit {
            out.push(inst);
        }
    }
    Ok(out)
}
