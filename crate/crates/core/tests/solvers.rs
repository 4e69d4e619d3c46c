mod common;

use std::time::Duration;

use floc_core::corpus::CORPUS;
use floc_core::localize::Analysis;
use floc_core::logic::Verdict;
use floc_core::solvers::{decide, emit_smtlib, relativize, Backend, SolverConfig};
use proptest::prelude::*;

use common::{brute_force, prover, random_query};

const B: i64 = 4;

fn internal() -> SolverConfig {
    SolverConfig::with_bounds(B, B)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn internal_matches_brute_force(seed in any::<u64>()) {
        let q = random_query(seed);
        let Some(expected) = brute_force(&q, B, B) else { return Ok(()) };
        let got = decide(&q, &internal()).unwrap();
        prop_assert!(!matches!(got, Verdict::Unknown(_)), "{q}");
        prop_assert_eq!(got.is_valid(), expected, "{}", q);
    }

    /// Internal counterexamples are real: at the witness inputs no placeholder
    /// value works for every auxiliary valuation.
    #[test]
    fn witnesses_refute_the_query(seed in any::<u64>()) {
        let q = random_query(seed);
        if let Verdict::Invalid { witness: Some(w) } = decide(&q, &internal()).unwrap() {
            for v in &q.inputs {
                prop_assert!(w.contains_key(&v.name));
            }
            let mut fixed = q.clone();
            fixed.inputs.clear();
            let bind = w.iter().map(|(k, v)| (k.clone(), match v {
                floc_core::frontend::Value::Int(n) => floc_core::logic::Formula::Int(*n),
                floc_core::frontend::Value::Bool(b) => floc_core::logic::Formula::Bool(*b),
            })).collect();
            fixed.body = q.body.subst_unchecked(&bind);
            fixed.auxiliaries.retain(|t| !w.contains_key(&t.name));
            prop_assert_eq!(brute_force(&fixed, B, B), Some(false));
        }
    }
}

#[test]
fn external_prover_agrees_on_relativized_queries() {
    let Some(cmd) = prover() else {
        eprintln!("no prover available; skipped");
        return;
    };
    let ext = SolverConfig {
        backend: Backend::External { command: cmd },
        timeout: Duration::from_secs(10),
        ..internal()
    };
    let mut conclusive = 0;
    for seed in 0..40 {
        let q = random_query(seed);
        let mine = decide(&q, &internal()).unwrap();
        let theirs = decide(&relativize(&q, B, B), &ext).unwrap();
        if matches!(theirs, Verdict::Unknown(_)) {
            continue;
        }
        conclusive += 1;
        assert_eq!(mine.is_valid(), theirs.is_valid(), "seed {seed}: {q}");
    }
    assert!(conclusive > 0);
}

/// Every corpus obligation is accepted by the prover.
#[test]
fn corpus_scripts_are_well_formed() {
    let Some(cmd) = prover() else {
        eprintln!("no prover available; skipped");
        return;
    };
    let ext = SolverConfig {
        backend: Backend::External { command: cmd },
        ..SolverConfig::default()
    };
    for e in CORPUS {
        let a = Analysis::new(&e.source_file()).unwrap();
        for o in a.obligations(e.function).unwrap() {
            let script = emit_smtlib(&o.query);
            assert!(script.contains("(check-sat)"));
            let v = decide(&o.query, &ext).unwrap_or_else(|err| panic!("{}: {err}\n{script}", o.id));
            if !e.buggy {
                assert!(!v.is_invalid(), "{} flagged by the prover", o.id);
            }
        }
    }
}
