//! Test-only oracles shared by the integration suites.

use rqa_core::cnf::CnfFormula;

/// Every model of a CNF, by plain recursive splitting with unit propagation.
pub fn all_models(num_vars: usize, clauses: &[Vec<i64>]) -> Vec<Vec<bool>> {
    fn propagate(clauses: &[Vec<i64>], val: &mut [Option<bool>]) -> bool {
        loop {
            let mut changed = false;
            for c in clauses {
                let mut free = None;
                let mut n_free = 0;
                let mut sat = false;
                for &l in c {
                    match val[l.unsigned_abs() as usize - 1] {
                        Some(v) if v == (l > 0) => {
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
                match n_free {
                    0 => return false,
                    1 => {
                        let l = free.unwrap();
                        val[l.unsigned_abs() as usize - 1] = Some(l > 0);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }
    fn rec(clauses: &[Vec<i64>], mut val: Vec<Option<bool>>, out: &mut Vec<Vec<bool>>) {
        if !propagate(clauses, &mut val) {
            return;
        }
        match val.iter().position(Option::is_none) {
            None => out.push(val.into_iter().map(Option::unwrap).collect()),
            Some(v) => {
                for b in [false, true] {
                    let mut next = val.clone();
                    next[v] = Some(b);
                    rec(clauses, next, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(clauses, vec![None; num_vars], &mut out);
    out
}

pub fn clause_lists(f: &CnfFormula) -> Vec<Vec<i64>> {
    f.clauses().iter().map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect()).collect()
}

