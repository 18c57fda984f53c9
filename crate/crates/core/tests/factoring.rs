use rqa_core::bench::factoring::{default_widths, gen_corpus_factoring, gen_factoring, BitSource, FactoringInstance};
use rqa_core::cnf::{self, CnfError};

mod common;
use common::{all_models, clause_lists};

fn factorizations(q: u64, n1: u32, n2: u32) -> Vec<(u64, u64)> {
    (2..1u64 << n1).filter(|a| q.is_multiple_of(*a) && q / a >= 2 && q / a < 1 << n2).map(|a| (a, q / a)).collect()
}

fn read(bits: &[BitSource], model: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (k, b)| {
        let set = match *b {
            BitSource::Var(v) => model[v as usize - 1],
            BitSource::Const(c) => c,
        };
        acc | (set as u64) << k
    })
}

#[test]
fn every_model_factors_the_target_up_to_255() {
    for q in 4..=255u64 {
        let (n1, n2) = default_widths(q);
        let inst = gen_factoring(q, n1, n2).unwrap();
        let models = all_models(inst.cnf.num_vars(), &clause_lists(&inst.cnf));
        let mut decoded: Vec<(u64, u64)> =
            models.iter().map(|m| (read(&inst.x1_bits, m), read(&inst.x2_bits, m))).collect();
        decoded.sort_unstable();
        // one model per factor pair: every auxiliary variable is a gate output
        assert_eq!(decoded, factorizations(q, n1, n2), "q = {q}");
    }
}

#[test]
fn tight_widths_match_the_factor_sizes() {
    // 6 = 2·3 fits 2x2 registers; 6 does not fit if the second register must hold 4+
    assert!(cnf::find_model(&gen_factoring(6, 2, 2).unwrap().cnf).is_some());
    let inst = gen_factoring(143, 4, 4).unwrap();
    let model = cnf::find_model(&inst.cnf).unwrap();
    let (a, b) = inst.decode(&model);
    assert_eq!(a * b, 143);
    // 143 = 11·13 needs 4-bit registers
    assert!(cnf::find_model(&gen_factoring(143, 3, 5).unwrap().cnf).is_none());
}

/// Fixes the input registers to (a, b) and asks whether the rest of the CNF
/// can be satisfied.
fn accepts(inst: &FactoringInstance, a: u64, b: u64) -> bool {
    let mut fixed = vec![None; inst.cnf.num_vars()];
    for (bits, value) in [(&inst.x1_bits, a), (&inst.x2_bits, b)] {
        for (k, bit) in bits.iter().enumerate() {
            let want = value >> k & 1 == 1;
            match *bit {
                BitSource::Var(v) => fixed[v as usize - 1] = Some(want),
                BitSource::Const(c) if c != want => return false,
                BitSource::Const(_) => {}
            }
        }
    }
    match cnf::simplify(&inst.cnf, &fixed) {
        Ok(s) => cnf::find_model(&s.formula).is_some(),
        Err(CnfError::UnsatisfiableUnderFixed) => false,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn cnf_accepts_exactly_the_circuit_solutions() {
    for (q, n1, n2) in [(4, 2, 2), (6, 2, 2), (9, 2, 2), (15, 3, 3), (21, 3, 3), (25, 3, 3), (35, 3, 3), (49, 3, 3), (7, 2, 2), (11, 3, 3), (35, 3, 4)] {
        let inst = gen_factoring(q, n1, n2).unwrap();
        for a in 0..1u64 << n1 {
            for b in 0..1u64 << n2 {
                let expected = a * b == q && a >= 2 && b >= 2;
                assert_eq!(accepts(&inst, a, b), expected, "q = {q}, a = {a}, b = {b}");
            }
        }
    }
}

#[test]
fn primes_are_unsatisfiable() {
    for q in [5u64, 7, 11, 13, 31, 61, 127, 251] {
        let (n1, n2) = default_widths(q);
        let inst = gen_factoring(q, n1, n2).unwrap();
        assert!(cnf::find_model(&inst.cnf).is_none(), "q = {q}");
    }
}

#[test]
fn corpus_instances_are_satisfiable_and_bounded() {
    let corpus = gen_corpus_factoring(8, 63).unwrap();
    assert!(corpus.len() > 10);
    let mut last = (0, 0);
    for inst in &corpus {
        assert!(inst.cnf.num_vars() <= 63 && inst.cnf.num_clauses() > 0);
        let model = cnf::find_model(&inst.cnf).unwrap_or_else(|| panic!("{} unsatisfiable", inst.name()));
        let (a, b) = inst.decode(&model);
        assert_eq!(a * b, inst.target);
        assert!((inst.target, inst.n1) >= last);
        last = (inst.target, inst.n1);
    }
    assert_eq!(gen_corpus_factoring(8, 63).unwrap(), corpus);
}
