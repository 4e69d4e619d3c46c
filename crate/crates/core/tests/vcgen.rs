mod common;

use std::collections::BTreeMap;

use floc_core::corpus::CORPUS;
use floc_core::frontend::{interpret, postcondition_holds, ExecResult, InterpError, Value};
use floc_core::localize::Analysis;
use floc_core::normalizer::{stmt_at, stmt_expr};
use floc_core::span::SourceFile;
use proptest::prelude::*;

use common::{random_program, rng};

/// Whether every obligation of `f` holds at `env`. Snapshot auxiliaries
/// take the entry value of their global; no other auxiliaries occur in
/// loop-free, call-free code.
fn obligations_hold(a: &Analysis, env: &BTreeMap<String, Value>) -> Result<bool, String> {
    let mut all = true;
    for o in a.obligations("f").map_err(|e| e.to_string())? {
        let mut e = env.clone();
        for t in &o.query.auxiliaries {
            let g = t.name.strip_suffix("$pre").ok_or_else(|| format!("unexpected auxiliary {}", t.name))?;
            e.insert(t.name.clone(), env[g]);
        }
        all &= o.body().eval_bool(&e).map_err(|x| x.to_string())?;
    }
    Ok(all)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wp_agrees_with_interpreter(seed in any::<u64>()) {
        let g = random_program(seed);
        let a = Analysis::new(&SourceFile::new("gen.mcl", g.source.as_str())).unwrap();
        let mut r = rng(seed);
        for _ in 0..4 {
            let env = g.random_input(&mut r, 8);
            let run = match interpret(&a.program.program, "f", &env, 10_000) {
                Err(InterpError::Overflow(_)) => continue,
                other => other.unwrap(),
            };
            let expected = match &run {
                ExecResult::PreconditionViolated => true,
                ExecResult::Returned { .. } => postcondition_holds(&a.program.program, "f", &env, &run).unwrap(),
                other => panic!("unexpected {other:?}"),
            };
            prop_assert_eq!(obligations_hold(&a, &env), Ok(expected), "{}", g.source);
        }
    }
}

#[test]
fn obligations_are_deterministic_and_closed() {
    for e in CORPUS {
        let a = Analysis::new(&e.source_file()).unwrap();
        let b = Analysis::new(&e.source_file()).unwrap();
        for name in a.function_names() {
            if !a.function(&name).unwrap().has_contract {
                continue;
            }
            let x = a.obligations(&name).unwrap();
            let y = b.obligations(&name).unwrap();
            let tx: Vec<String> = x.iter().map(|o| format!("{} {}", o.id, o.query)).collect();
            let ty: Vec<String> = y.iter().map(|o| format!("{} {}", o.id, o.query)).collect();
            assert_eq!(tx, ty, "{}::{name}", e.name);
            for o in &x {
                assert!(o.query.closure().free_vars().is_empty(), "{} is not closed", o.id);
            }
        }
    }
}

/// Instrumenting a candidate changes exactly its site, and the placeholder
/// shows up in the query class reserved for it.
#[test]
fn instrumentation_replaces_only_the_site() {
    for e in CORPUS {
        let a = Analysis::new(&e.source_file()).unwrap();
        let f = a.function(e.function).unwrap();
        for c in a.candidates(e.function).unwrap() {
            let (g, var) = floc_core::faultmodel::instrument(&a.program.program, f, &c);
            let site = stmt_expr(stmt_at(&g.body, c.path()).unwrap()).unwrap();
            assert_eq!(site.to_string(), var.name);
            let mut restored = g.clone();
            let s = floc_core::normalizer::stmt_at_mut(&mut restored.body, c.path()).unwrap();
            let orig = stmt_at(&f.body, c.path()).unwrap().clone();
            *s = orig;
            assert_eq!(&restored, f, "{} C{}", e.name, c.id);

            let (obs, v) = a.instrumented_obligations(e.function, &c).unwrap();
            assert_eq!(v, var);
            for o in &obs {
                assert_eq!(o.query.placeholder.as_ref(), Some(&var));
                assert!(!o.query.inputs.contains(&var) && !o.query.auxiliaries.contains(&var));
            }
            assert!(obs.iter().any(|o| o.query.body.mentions(&var.name)), "{} C{}", e.name, c.id);
        }
    }
}
