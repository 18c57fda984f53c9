//! CNF data model, DIMACS I/O, assignment evaluation and light simplification.
//!
//! Variables are 1-indexed in every public type (DIMACS convention). Clause
//! indices returned by evaluation functions are 0-based positions in
//! [`CnfFormula::clauses`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty clause")]
    EmptyClause,
    #[error("clause contains both x{0} and its negation")]
    Tautology(u32),
    #[error("literal variable index must be >= 1")]
    ZeroVariable,
    #[error("variable x{var} exceeds num_vars = {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: usize },
    #[error("assignment has {got} values, formula has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unsatisfiable under fixed assignment")]
    UnsatisfiableUnderFixed,
}

/// A Boolean variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Result<Self, CnfError> {
        if var == 0 {
            return Err(CnfError::ZeroVariable);
        }
        Ok(Literal { var, negated })
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false).expect("variable index must be >= 1")
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true).expect("variable index must be >= 1")
    }

    /// From a signed DIMACS integer (non-zero).
    pub fn from_dimacs(value: i64) -> Result<Self, CnfError> {
        let var = u32::try_from(value.unsigned_abs()).map_err(|_| CnfError::ZeroVariable)?;
        Literal::new(var, value < 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    /// 0-based variable index.
    pub fn index(self) -> usize {
        self.var as usize - 1
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn negate(self) -> Self {
        Literal { var: self.var, negated: !self.negated }
    }

    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// Disjunction of distinct, non-complementary literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, dropping repeated literals (first occurrence wins).
    /// Empty and tautological clauses are rejected.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, CnfError> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            if out.contains(&lit) {
                continue;
            }
            if out.contains(&lit.negate()) {
                return Err(CnfError::Tautology(lit.var));
            }
            out.push(lit);
        }
        if out.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        Ok(Clause { literals: out })
    }

    pub fn from_dimacs(values: &[i64]) -> Result<Self, CnfError> {
        let lits = values
            .iter()
            .map(|&v| Literal::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        self.literals.iter().any(|l| l.eval(values[l.index()]))
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).max().unwrap_or(0)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Conjunction of clauses over `num_vars` variables.
///
/// A formula with no clauses is permitted: it is what simplification yields
/// when every clause is discharged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for c in &clauses {
            let var = c.max_var();
            if var as usize > num_vars {
                return Err(CnfError::VariableOutOfRange { var, num_vars });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from signed DIMACS literals.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Variables (1-based) that occur in at least one clause, ascending.
    pub fn used_vars(&self) -> Vec<u32> {
        let mut used = vec![false; self.num_vars];
        for c in &self.clauses {
            for l in c.literals() {
                used[l.index()] = true;
            }
        }
        (1..=self.num_vars as u32).filter(|v| used[*v as usize - 1]).collect()
    }

    /// Indices of clauses falsified by `assignment`.
    pub fn unsatisfied_clauses(&self, assignment: &Assignment) -> Result<Vec<usize>, CnfError> {
        self.check_len(assignment)?;
        Ok(self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied(assignment.values()))
            .map(|(i, _)| i)
            .collect())
    }

    pub fn count_unsatisfied(&self, assignment: &Assignment) -> Result<usize, CnfError> {
        self.check_len(assignment)?;
        Ok(self.clauses.iter().filter(|c| !c.is_satisfied(assignment.values())).count())
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> Result<bool, CnfError> {
        Ok(self.count_unsatisfied(assignment)? == 0)
    }

    fn check_len(&self, assignment: &Assignment) -> Result<(), CnfError> {
        if assignment.len() != self.num_vars {
            return Err(CnfError::LengthMismatch { expected: self.num_vars, got: assignment.len() });
        }
        Ok(())
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Full truth assignment, one value per variable (index 0 is x1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(num_vars: usize, value: bool) -> Self {
        Assignment(vec![value; num_vars])
    }

    /// Variable `i` (0-based) takes bit `i` of `bits`.
    pub fn from_bits(num_vars: usize, bits: u64) -> Self {
        Assignment((0..num_vars).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of 1-based variable `var`.
    pub fn get(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

// ---------------------------------------------------------------------------
// DIMACS

/// Parses DIMACS CNF. Accepts LF or CRLF line endings, `c` comment lines and
/// the `%` end marker used by the SATLIB uniform random suites.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let err = |line: usize, message: String| CnfError::Parse { line, message };

    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0usize;
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(lineno, format!("malformed header '{line}'")));
            }
            let n = parts[2]
                .parse::<usize>()
                .map_err(|_| err(lineno, format!("bad variable count '{}'", parts[2])))?;
            let m = parts[3]
                .parse::<usize>()
                .map_err(|_| err(lineno, format!("bad clause count '{}'", parts[3])))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(err(lineno, "clause data before 'p cnf' header".into()));
        };
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<i64>()
                .map_err(|_| err(lineno, format!("bad literal '{tok}'")))?;
            if v == 0 {
                let clause = Clause::from_dimacs(&pending).map_err(|e| match e {
                    CnfError::EmptyClause => err(lineno, "empty clause".into()),
                    CnfError::Tautology(var) => {
                        err(pending_line.max(1), format!("tautological clause on x{var}"))
                    }
                    other => err(lineno, other.to_string()),
                })?;
                clauses.push(clause);
                pending.clear();
            } else {
                if v.unsigned_abs() as usize > n {
                    return Err(err(lineno, format!("literal {v} exceeds declared {n} variables")));
                }
                if pending.is_empty() {
                    pending_line = lineno;
                }
                pending.push(v);
            }
        }
    }

    let Some((n, m)) = header else {
        return Err(err(last_line.max(1), "missing 'p cnf' header".into()));
    };
    if !pending.is_empty() {
        return Err(err(pending_line, "unterminated clause (missing 0)".into()));
    }
    if clauses.len() != m {
        return Err(err(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses).map_err(|e| err(last_line.max(1), e.to_string()))
}

/// Writes DIMACS CNF with LF line endings.
pub fn serialize_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    for c in &formula.clauses {
        for l in c.literals() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Simplification

/// Result of [`simplify`]: the reduced formula plus enough bookkeeping to
/// lift its models back to the input variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplified {
    pub formula: CnfFormula,
    /// `new_to_old[k]` is the input variable (1-based) that became `x{k+1}`.
    pub new_to_old: Vec<u32>,
    /// Per input variable: the value it was fixed or propagated to, if any.
    pub forced: Vec<Option<bool>>,
}

impl Simplified {
    /// Lifts an assignment of the simplified formula to the input variables.
    pub fn extend(&self, reduced: &Assignment) -> Result<Assignment, CnfError> {
        if reduced.len() != self.new_to_old.len() {
            return Err(CnfError::LengthMismatch {
                expected: self.new_to_old.len(),
                got: reduced.len(),
            });
        }
        let mut values: Vec<bool> = self.forced.iter().map(|v| v.unwrap_or(false)).collect();
        for (k, &old) in self.new_to_old.iter().enumerate() {
            values[old as usize - 1] = reduced.values()[k];
        }
        Ok(Assignment(values))
    }

    /// New (1-based) index of an input variable that survived.
    pub fn new_index_of(&self, old: u32) -> Option<u32> {
        self.new_to_old.iter().position(|&o| o == old).map(|k| k as u32 + 1)
    }
}

/// Constant folding of `fixed` followed by unit propagation to fixpoint.
///
/// Surviving variables are those not fixed or propagated; they are renumbered
/// contiguously in ascending order. Identical clauses are merged.
pub fn simplify(formula: &CnfFormula, fixed: &[Option<bool>]) -> Result<Simplified, CnfError> {
    let n = formula.num_vars();
    if fixed.len() != n {
        return Err(CnfError::LengthMismatch { expected: n, got: fixed.len() });
    }
    let mut values: Vec<Option<bool>> = fixed.to_vec();
    let mut live: Vec<Vec<Literal>> =
        formula.clauses().iter().map(|c| c.literals().to_vec()).collect();

    loop {
        let mut changed = false;
        let mut next = Vec::with_capacity(live.len());
        for clause in live {
            let mut satisfied = false;
            let mut rest = Vec::with_capacity(clause.len());
            for l in clause {
                match values[l.index()] {
                    Some(v) if l.eval(v) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => rest.push(l),
                }
            }
            if satisfied {
                continue;
            }
            match rest.len() {
                0 => return Err(CnfError::UnsatisfiableUnderFixed),
                1 => {
                    let l = rest[0];
                    values[l.index()] = Some(!l.is_negated());
                    changed = true;
                }
                _ => next.push(rest),
            }
        }
        live = next;
        if !changed {
            break;
        }
    }

    let new_to_old: Vec<u32> = (1..=n as u32).filter(|v| values[*v as usize - 1].is_none()).collect();
    let mut old_to_new = vec![0u32; n + 1];
    for (k, &old) in new_to_old.iter().enumerate() {
        old_to_new[old as usize] = k as u32 + 1;
    }
    let mut seen = HashSet::new();
    let mut clauses = Vec::with_capacity(live.len());
    for lits in live {
        let mapped: Vec<Literal> = lits
            .iter()
            .map(|l| Literal { var: old_to_new[l.var as usize], negated: l.negated })
            .collect();
        let mut key = mapped.clone();
        key.sort();
        if seen.insert(key) {
            clauses.push(Clause { literals: mapped });
        }
    }
    Ok(Simplified {
        formula: CnfFormula { num_vars: new_to_old.len(), clauses },
        new_to_old,
        forced: values,
    })
}

// ---------------------------------------------------------------------------
// Small complete search, used to certify generated instances.

/// Plain DPLL (unit propagation plus chronological branching). Intended for
/// the small instances this workbench generates, not as a general solver.
pub fn find_model(formula: &CnfFormula) -> Option<Assignment> {
    let mut values = vec![None; formula.num_vars()];
    if dpll(formula.clauses(), &mut values) {
        Some(Assignment(values.into_iter().map(|v| v.unwrap_or(false)).collect()))
    } else {
        None
    }
}

fn dpll(clauses: &[Clause], values: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    // unit propagation
    loop {
        let mut unit = None;
        let mut all_sat = true;
        for c in clauses {
            let mut free = None;
            let mut n_free = 0;
            let mut sat = false;
            for &l in c.literals() {
                match values[l.index()] {
                    Some(v) if l.eval(v) => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        n_free += 1;
                        free = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            all_sat = false;
            if n_free == 0 {
                for &i in &trail {
                    values[i] = None;
                }
                return false;
            }
            if n_free == 1 {
                unit = free;
                break;
            }
        }
        if all_sat {
            return true;
        }
        match unit {
            Some(l) => {
                values[l.index()] = Some(!l.is_negated());
                trail.push(l.index());
            }
            None => break,
        }
    }
    let branch = clauses
        .iter()
        .flat_map(|c| c.literals())
        .find(|l| values[l.index()].is_none())
        .copied()
        .expect("an unsatisfied clause without free literals was caught above");
    for value in [!branch.is_negated(), branch.is_negated()] {
        values[branch.index()] = Some(value);
        if dpll(clauses, values) {
            return true;
        }
    }
    values[branch.index()] = None;
    for &i in &trail {
        values[i] = None;
    }
    false
}
