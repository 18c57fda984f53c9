//! SAT → Ising reduction by linear programming.
//!
//! For each clause the unique all-literals-false spin pattern (the
//! "infeasible state") has a local energy that is linear in the unknown
//! coefficients `h`, `J`. The LP maximizes `Σ D_i` subject to
//!
//! * `E_infeasible(C_i) − D_i ≥ 0`
//! * `D_i ≥ ρ_i` (influence factor; `ρ = 0` gives the plain encoding)
//! * `−2 ≤ h ≤ 2`, `−1 ≤ J ≤ 1`
//!
//! and the optimal `h`, `J` become the Ising model. Spin `+1` means True.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfFormula};
use crate::ising::{IsingError, IsingModel, SpinVector, H_MAX, J_MAX};
use crate::lp::{self, LinearProgram, LpError, LpStatus, Relation};

/// Tolerance for the margin and range checks on a produced encoding.
pub const MARGIN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("influence vector has {got} entries, formula has {expected} clauses")]
    RhoLength { expected: usize, got: usize },
    #[error("influence factor {0} is not finite")]
    RhoNotFinite(f64),
    #[error("encoder LP reported unbounded; coefficient bounds were not applied")]
    Unbounded,
    #[error("encoder LP infeasible even after shifting influence factors")]
    Infeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error("sample has {got} spins, variable map expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Which couplers the LP may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicy {
    /// Only pairs of variables that share a clause.
    #[default]
    ClauseInternal,
    /// Every pair of variables that occurs in the formula.
    AllPairs,
}

/// Local energy of a clause's infeasible state as a linear form in `h`, `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseEnergyExpr {
    pub clause: usize,
    /// `(variable, spin)` of the all-literals-false state, clause order.
    pub infeasible_state: Vec<(u32, i8)>,
    /// Coefficient of `h_v`, clause order.
    pub h_terms: Vec<(u32, f64)>,
    /// Coefficient of `J_uv` with `u < v`, sorted.
    pub j_terms: Vec<((u32, u32), f64)>,
}

impl ClauseEnergyExpr {
    pub fn new(index: usize, clause: &Clause) -> Self {
        // positive literal false at -1, negated literal false at +1
        let infeasible_state: Vec<(u32, i8)> = clause
            .literals()
            .iter()
            .map(|l| (l.var(), if l.is_negated() { 1 } else { -1 }))
            .collect();
        let h_terms = infeasible_state.iter().map(|&(v, s)| (v, s as f64)).collect();
        let mut sorted = infeasible_state.clone();
        sorted.sort();
        let mut j_terms = Vec::new();
        for a in 0..sorted.len() {
            for b in a + 1..sorted.len() {
                let ((u, su), (v, sv)) = (sorted[a], sorted[b]);
                j_terms.push(((u, v), (su * sv) as f64));
            }
        }
        ClauseEnergyExpr { clause: index, infeasible_state, h_terms, j_terms }
    }

    /// Value of the linear form at the coefficients of `model`.
    pub fn eval(&self, model: &IsingModel) -> f64 {
        let h: f64 = self.h_terms.iter().map(|&(v, c)| c * model.h()[v as usize - 1]).sum();
        let j: f64 = self
            .j_terms
            .iter()
            .map(|&((u, v), c)| c * model.coupler(u as usize - 1, v as usize - 1))
            .sum();
        h + j
    }

    /// Energy of the clause-local terms of `model` at a spin pattern over the
    /// clause's variables (given in clause order).
    pub fn local_energy(&self, model: &IsingModel, spins: &[i8]) -> f64 {
        let vars: Vec<u32> = self.infeasible_state.iter().map(|&(v, _)| v).collect();
        let mut e = 0.0;
        for (a, &u) in vars.iter().enumerate() {
            e += model.h()[u as usize - 1] * spins[a] as f64;
            for (b, &v) in vars.iter().enumerate().skip(a + 1) {
                e += model.coupler(u as usize - 1, v as usize - 1) * (spins[a] * spins[b]) as f64;
            }
        }
        e
    }
}

impl fmt::Display for ClauseEnergyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: f64, name: String| -> fmt::Result {
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                first = false;
                if c < 0.0 {
                    write!(f, "-{name}")
                } else {
                    write!(f, "{name}")
                }
            } else {
                write!(f, " {sign} {name}")
            }
        };
        for &(v, c) in &self.h_terms {
            term(f, c, format!("h{v}"))?;
        }
        for &((u, v), c) in &self.j_terms {
            term(f, c, format!("J{u},{v}"))?;
        }
        Ok(())
    }
}

/// Column layout of an encoder LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpLayout {
    /// `h_col[v-1]` is the column of `h_v`, if `v` occurs in the formula.
    pub h_col: Vec<Option<usize>>,
    /// Admitted coupler pairs `(u, v)`, `u < v`, with their columns.
    pub j_cols: Vec<((u32, u32), usize)>,
    /// Column of `D_i` per clause.
    pub d_col: Vec<usize>,
    pub exprs: Vec<ClauseEnergyExpr>,
}

/// Builds the encoder LP for `formula` with influence factors `rho`.
pub fn build_lp(
    formula: &CnfFormula,
    rho: &[f64],
    policy: PairPolicy,
) -> Result<(LinearProgram, LpLayout), EncodeError> {
    let m = formula.num_clauses();
    if rho.len() != m {
        return Err(EncodeError::RhoLength { expected: m, got: rho.len() });
    }
    if let Some(&bad) = rho.iter().find(|r| !r.is_finite()) {
        return Err(EncodeError::RhoNotFinite(bad));
    }
    let exprs: Vec<ClauseEnergyExpr> = formula
        .clauses()
        .iter()
        .enumerate()
        .map(|(i, c)| ClauseEnergyExpr::new(i, c))
        .collect();

    let used = formula.used_vars();
    let pairs: BTreeSet<(u32, u32)> = match policy {
        PairPolicy::ClauseInternal => exprs
            .iter()
            .flat_map(|e| e.j_terms.iter().map(|&(p, _)| p))
            .collect(),
        PairPolicy::AllPairs => {
            let mut s = BTreeSet::new();
            for (a, &u) in used.iter().enumerate() {
                for &v in &used[a + 1..] {
                    s.insert((u, v));
                }
            }
            s
        }
    };

    let mut names = Vec::new();
    let mut h_col = vec![None; formula.num_vars()];
    for &v in &used {
        h_col[v as usize - 1] = Some(names.len());
        names.push(format!("h{v}"));
    }
    let mut j_cols = Vec::with_capacity(pairs.len());
    for &(u, v) in &pairs {
        j_cols.push(((u, v), names.len()));
        names.push(format!("J{u},{v}"));
    }
    let d_col: Vec<usize> = (0..m)
        .map(|i| {
            names.push(format!("D{}", i + 1));
            names.len() - 1
        })
        .collect();

    let n = names.len();
    let mut lp = LinearProgram::new(n);
    for (v, col) in h_col.iter().enumerate() {
        if let Some(col) = *col {
            lp.set_bounds(col, -H_MAX, H_MAX);
            debug_assert!(names[col] == format!("h{}", v + 1));
        }
    }
    for &(_, col) in &j_cols {
        lp.set_bounds(col, -J_MAX, J_MAX);
    }
    for (i, &col) in d_col.iter().enumerate() {
        lp.set_bounds(col, rho[i], f64::INFINITY);
        lp.objective[col] = 1.0;
    }
    let j_index = |p: (u32, u32)| {
        j_cols
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|k| j_cols[k].1)
            .expect("clause-internal pairs are always admitted")
    };
    for (i, e) in exprs.iter().enumerate() {
        let mut row = vec![0.0; n];
        for &(v, c) in &e.h_terms {
            row[h_col[v as usize - 1].expect("clause variable is used")] += c;
        }
        for &(p, c) in &e.j_terms {
            row[j_index(p)] += c;
        }
        row[d_col[i]] = -1.0;
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    lp.names = names;
    Ok((lp, LpLayout { h_col, j_cols, d_col, exprs }))
}

/// An Ising model produced from a formula, with its LP certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    #[serde(flatten)]
    pub model: IsingModel,
    /// Optimal `D_i` per clause.
    pub margins: Vec<f64>,
    /// `varmap[v-1]` is the 1-based spin carrying variable `v`.
    pub varmap: Vec<usize>,
    /// Influence factors the LP was finally solved with.
    pub rho: Vec<f64>,
    /// Uniform shift applied to the requested `rho` (0 unless the first LP
    /// was infeasible).
    pub rho_shift: f64,
    /// Variables that occur in no clause (bias 0).
    pub free_vars: Vec<u32>,
}

impl Encoding {
    /// `E_infeasible(C_i)` at the encoding's coefficients.
    pub fn infeasible_energies(&self, formula: &CnfFormula) -> Vec<f64> {
        formula
            .clauses()
            .iter()
            .enumerate()
            .map(|(i, c)| ClauseEnergyExpr::new(i, c).eval(&self.model))
            .collect()
    }

    /// Largest violation of `ρ_i ≤ D_i ≤ E_infeasible(C_i)`.
    pub fn margin_violation(&self, formula: &CnfFormula) -> f64 {
        self.infeasible_energies(formula)
            .iter()
            .zip(&self.margins)
            .zip(&self.rho)
            .map(|((&e, &d), &r)| (r - d).max(d - e).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn decode(&self, z: &SpinVector) -> Result<Assignment, EncodeError> {
        decode(z, &self.varmap)
    }
}

/// Solves the encoder LP. If the requested influence factors make it
/// infeasible, every `ρ_i` is shifted down by `max ρ` (so all become `≤ 0`,
/// where `h = J = 0` is feasible) and the LP is solved again.
pub fn encode(formula: &CnfFormula, rho: &[f64]) -> Result<Encoding, EncodeError> {
    encode_with(formula, rho, PairPolicy::default())
}

pub fn encode_with(formula: &CnfFormula, rho: &[f64], policy: PairPolicy) -> Result<Encoding, EncodeError> {
    let (lp, layout) = build_lp(formula, rho, policy)?;
    let mut sol = lp::solve(&lp)?;
    let mut rho_used = rho.to_vec();
    let mut shift = 0.0;
    let mut layout = layout;
    if sol.status == LpStatus::Infeasible {
        shift = -rho.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        rho_used = rho.iter().map(|r| r + shift).collect();
        let (lp2, layout2) = build_lp(formula, &rho_used, policy)?;
        sol = lp::solve(&lp2)?;
        layout = layout2;
    }
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(EncodeError::Unbounded),
        LpStatus::Infeasible => return Err(EncodeError::Infeasible),
    }

    let snap = |v: f64, limit: f64| {
        let v = v.clamp(-limit, limit);
        if v.abs() < 1e-12 {
            0.0
        } else {
            v
        }
    };
    let n = formula.num_vars();
    let mut model = IsingModel::new(n);
    for (v, col) in layout.h_col.iter().enumerate() {
        if let Some(col) = *col {
            model.set_h(v, snap(sol.x[col], H_MAX));
        }
    }
    for &((u, v), col) in &layout.j_cols {
        model.set_coupler(u as usize - 1, v as usize - 1, snap(sol.x[col], J_MAX))?;
    }
    let margins = layout.d_col.iter().map(|&c| sol.x[c]).collect();
    let free_vars = layout
        .h_col
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(v, _)| v as u32 + 1)
        .collect();
    Ok(Encoding {
        model,
        margins,
        varmap: (1..=n).collect(),
        rho: rho_used,
        rho_shift: shift,
        free_vars,
    })
}

/// `+1 ↦ True`, `−1 ↦ False` through `varmap` (1-based spin per variable).
pub fn decode(z: &SpinVector, varmap: &[usize]) -> Result<Assignment, EncodeError> {
    if varmap.iter().any(|&s| s == 0 || s > z.len()) {
        return Err(EncodeError::LengthMismatch { expected: varmap.iter().copied().max().unwrap_or(0), got: z.len() });
    }
    Ok(Assignment::new(varmap.iter().map(|&s| z.spins()[s - 1] == 1).collect()))
}

/// Inverse of [`decode`] for the identity variable map.
pub fn spins_of(assignment: &Assignment) -> SpinVector {
    SpinVector::new(assignment.values().iter().map(|&b| if b { 1 } else { -1 }).collect())
        .expect("±1 by construction")
}
