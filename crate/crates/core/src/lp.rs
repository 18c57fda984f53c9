//! Dense two-phase primal simplex with Bland's pivoting rule.
//!
//! Problems are stated as `maximize c·x` subject to row constraints and
//! per-variable bounds. Internally every variable is shifted, reflected or
//! split so that the working problem has `y ≥ 0`; finite upper bounds become
//! explicit rows.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("ill-conditioned LP: {0}")]
    IllConditioned(String),
}

/// Every numeric threshold the solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed constraint violation, scaled by `1 + |rhs|`.
    pub feasibility: f64,
    /// Reduced costs above `-optimality` count as non-improving.
    pub optimality: f64,
    /// Smallest column entry eligible for the ratio test.
    pub ratio: f64,
    /// Below this a pivot is numerically meaningless.
    pub breakdown: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            optimality: 1e-9,
            ratio: 1e-9,
            breakdown: 1e-11,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint { coeffs, relation, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `maximize objective·x` s.t. constraints and `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Optional column names, used only by [`LinearProgram::dump`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
}

impl LinearProgram {
    /// `n` variables, zero objective, all variables `≥ 0`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match objective length".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has non-finite data")));
            }
        }
        for v in 0..n {
            if self.lower[v].is_nan() || self.upper[v].is_nan() || self.lower[v] > self.upper[v] {
                return Err(LpError::Malformed(format!(
                    "variable {v} has bounds [{}, {}]",
                    self.lower[v], self.upper[v]
                )));
            }
            if self.lower[v] == f64::INFINITY || self.upper[v] == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable {v} has an empty domain")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        Ok(())
    }

    /// Largest violation of rows or bounds at `x`, each scaled by `1 + |rhs|`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / (1.0 + c.rhs.abs()));
        let bounds = x.iter().enumerate().map(|(v, &xv)| {
            let lo = (self.lower[v] - xv).max(0.0) / (1.0 + self.lower[v].abs().min(1e300));
            let hi = (xv - self.upper[v]).max(0.0) / (1.0 + self.upper[v].abs().min(1e300));
            lo.max(hi)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn name(&self, v: usize) -> String {
        self.names.get(v).cloned().unwrap_or_else(|| format!("x{v}"))
    }

    /// Plain-text rendering, one constraint per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let terms = |coeffs: &[f64]| {
            let mut s = String::new();
            for (v, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    let sign = if a < 0.0 { "-" } else { "+" };
                    let _ = write!(s, " {sign} {} {}", a.abs(), self.name(v));
                }
            }
            if s.is_empty() {
                s.push_str(" 0");
            }
            s
        };
        let _ = writeln!(out, "maximize{}", terms(&self.objective));
        let _ = writeln!(out, "subject to");
        for c in &self.constraints {
            let _ = writeln!(out, "{} {} {}", terms(&c.coeffs).trim_start(), c.relation, c.rhs);
        }
        let _ = writeln!(out, "bounds");
        for v in 0..self.num_vars() {
            let _ = writeln!(out, "{} <= {} <= {}", self.lower[v], self.name(v), self.upper[v]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status == Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &Tolerances::default())
}

pub fn solve_with(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let std = StandardForm::build(lp);
    let mut t = Tableau::new(&std);
    let mut iterations = 0;

    // phase 1: minimize the sum of artificials
    if t.num_artificial > 0 {
        let cost: Vec<f64> = (0..t.cols)
            .map(|j| if t.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        t.set_cost(&cost);
        match t.optimize(tol, true, &mut iterations)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(LpError::IllConditioned("phase 1 reported unbounded".into()))
            }
        }
        let infeasibility = -t.objective_row_rhs();
        let scale = 1.0 + std.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > tol.feasibility * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective_value: f64::NAN,
                iterations,
            });
        }
        t.evict_artificials(tol);
    }

    // phase 2: minimize -c
    let cost: Vec<f64> = (0..t.cols)
        .map(|j| if j < std.num_cols { -std.cost[j] } else { 0.0 })
        .collect();
    t.set_cost(&cost);
    match t.optimize(tol, false, &mut iterations)? {
        Outcome::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective_value: f64::INFINITY,
                iterations,
            })
        }
        Outcome::Optimal => {}
    }

    let y = t.primal(std.num_cols);
    let x = std.recover(&y);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_value(&x),
        x,
        iterations,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + y
    Shift { offset: f64, col: usize },
    /// x = offset - y
    Reflect { offset: f64, col: usize },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `minimize -cost·y` over `y ≥ 0` with rows having `rhs ≥ 0`.
struct StandardForm {
    num_cols: usize,
    cost: Vec<f64>,
    rows: Vec<Row>,
    map: Vec<VarMap>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut map = Vec::with_capacity(n);
        let mut num_cols = 0;
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for v in 0..n {
            let (lo, hi) = (lp.lower[v], lp.upper[v]);
            let m = if lo.is_finite() {
                if hi.is_finite() {
                    upper_rows.push((num_cols, hi - lo));
                }
                VarMap::Shift { offset: lo, col: num_cols }
            } else if hi.is_finite() {
                VarMap::Reflect { offset: hi, col: num_cols }
            } else {
                num_cols += 1;
                VarMap::Split { pos: num_cols - 1, neg: num_cols }
            };
            num_cols += 1;
            map.push(m);
        }

        let mut cost = vec![0.0; num_cols];
        for (v, m) in map.iter().enumerate() {
            let c = lp.objective[v];
            match *m {
                VarMap::Shift { col, .. } => cost[col] += c,
                VarMap::Reflect { col, .. } => cost[col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        let mut rows = Vec::with_capacity(lp.constraints.len() + upper_rows.len());
        for c in &lp.constraints {
            let mut coeffs = vec![0.0; num_cols];
            let mut rhs = c.rhs;
            for (v, &a) in c.coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match map[v] {
                    VarMap::Shift { offset, col } => {
                        coeffs[col] += a;
                        rhs -= a * offset;
                    }
                    VarMap::Reflect { offset, col } => {
                        coeffs[col] -= a;
                        rhs -= a * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] += a;
                        coeffs[neg] -= a;
                    }
                }
            }
            rows.push(Row { coeffs, relation: c.relation, rhs });
        }
        for (col, width) in upper_rows {
            let mut coeffs = vec![0.0; num_cols];
            coeffs[col] = 1.0;
            rows.push(Row { coeffs, relation: Relation::Le, rhs: width });
        }
        for r in &mut rows {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                r.coeffs.iter_mut().for_each(|a| *a = -*a);
                r.relation = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        StandardForm { num_cols, cost, rows, map }
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|m| match *m {
                VarMap::Shift { offset, col } => offset + y[col],
                VarMap::Reflect { offset, col } => offset - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect()
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Row-major dense tableau. Row `m` is the reduced-cost row; the last column
/// holds right-hand sides (and minus the objective value in row `m`).
struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    num_artificial: usize,
    /// Columns barred from entering (artificials in phase 2).
    barred: Vec<bool>,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.rows.len();
        let num_slack = std
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let num_artificial = std
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Le)
            .count();
        let first_artificial = std.num_cols + num_slack;
        let cols = first_artificial + num_artificial;
        let width = cols + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let mut slack = std.num_cols;
        let mut art = first_artificial;
        for (i, r) in std.rows.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..std.num_cols].copy_from_slice(&r.coeffs);
            row[cols] = r.rhs;
            match r.relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            rows: m,
            cols,
            width,
            data,
            basis,
            first_artificial,
            num_artificial,
            barred: vec![false; cols],
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn objective_row_rhs(&self) -> f64 {
        self.at(self.rows, self.cols)
    }

    /// Installs `cost` and prices out the current basis.
    fn set_cost(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.rows * w;
        self.data[obj..obj + w].fill(0.0);
        self.data[obj..obj + self.cols].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.data[obj + j] -= cb * self.data[i * w + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[c] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, &pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[r] = c;
    }

    fn optimize(&mut self, tol: &Tolerances, phase1: bool, iterations: &mut usize) -> Result<Outcome, LpError> {
        loop {
            if *iterations >= tol.max_iterations {
                return Err(LpError::IllConditioned(format!(
                    "iteration limit {} reached",
                    tol.max_iterations
                )));
            }
            // Bland: lowest-index improving column
            let entering = (0..self.cols).find(|&j| {
                !self.barred[j] && (phase1 || !self.is_artificial(j)) && self.at(self.rows, j) < -tol.optimality
            });
            let Some(c) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            let mut tiny = false;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > tol.ratio {
                    let ratio = self.at(i, self.cols) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                } else if a > tol.breakdown {
                    tiny = true;
                }
            }
            match best {
                Some((r, _)) => {
                    self.pivot(r, c);
                    // clip rhs drift below zero
                    let rhs = r * self.width + self.cols;
                    if self.data[rhs] < 0.0 {
                        self.data[rhs] = 0.0;
                    }
                    *iterations += 1;
                }
                None if tiny => {
                    return Err(LpError::IllConditioned(format!(
                        "pivot column {c} has only entries below {}",
                        tol.ratio
                    )))
                }
                None => return Ok(Outcome::Unbounded),
            }
        }
    }

    /// Pivots basic artificials out at zero level; drops redundant rows.
    fn evict_artificials(&mut self, tol: &Tolerances) {
        let mut i = 0;
        while i < self.rows {
            if self.is_artificial(self.basis[i]) {
                let col = (0..self.first_artificial)
                    .filter(|&j| self.at(i, j).abs() > tol.ratio)
                    .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.remove_row(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in self.first_artificial..self.cols {
            self.barred[j] = true;
        }
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width;
        self.data.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.rows -= 1;
    }

    fn primal(&self, num_cols: usize) -> Vec<f64> {
        let mut y = vec![0.0; num_cols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_cols {
                y[b] = self.at(i, self.cols).max(0.0);
            }
        }
        y
    }
}
