mod common;

use floc_core::frontend::{interpret, load, parse, print_program, ExecResult, InterpError};
use floc_core::normalizer::{normalize, NodeRef};
use floc_core::span::SourceFile;
use proptest::prelude::*;

use common::{random_program, rng};

const FUEL: u64 = 10_000;

#[test]
fn generated_programs_typecheck() {
    for seed in 0..200 {
        let g = random_program(seed);
        let file = SourceFile::new("gen.mcl", g.source.as_str());
        if let Err(e) = load(&file) {
            panic!("seed {seed}: {e}\n{}", g.source);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let g = random_program(seed);
        let mut p = parse(&SourceFile::new("gen.mcl", g.source.as_str())).unwrap();
        let printed = print_program(&p);
        let mut again = parse(&SourceFile::new("printed.mcl", printed.as_str())).unwrap();
        p.erase_spans();
        again.erase_spans();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn normalization_preserves_behaviour(seed in any::<u64>()) {
        let g = random_program(seed);
        let file = SourceFile::new("gen.mcl", g.source.as_str());
        let typed = load(&file).unwrap();
        let (norm, _) = normalize(&typed, &file);
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..8 {
            let env = g.random_input(&mut r, 8);
            let before = interpret(typed.program(), "f", &env, FUEL);
            let after = interpret(&norm.program, "f", &env, FUEL);
            match (before, after) {
                (Err(InterpError::Overflow(_)), Err(InterpError::Overflow(_))) => {}
                (a, b) => prop_assert_eq!(a.unwrap(), b.unwrap()),
            }
        }
    }

    #[test]
    fn normalized_sites_are_flat(seed in any::<u64>()) {
        let g = random_program(seed);
        let file = SourceFile::new("gen.mcl", g.source.as_str());
        let (norm, map) = normalize(&load(&file).unwrap(), &file);
        let f = norm.function("f").unwrap();
        floc_core::normalizer::walk_paths(&f.body, &mut |path, s| {
            if let Some(e) = floc_core::normalizer::stmt_expr(s) {
                assert!(e.is_flat(), "{e}");
                let node = NodeRef { function: "f".into(), path: path.clone() };
                let entry = map.get(&node).expect("every site is mapped");
                assert!(entry.stmt_span.start_line >= 1);
            }
        });
    }
}

#[test]
fn precondition_violation_is_reported() {
    let src = "/*@ requires x > 0; ensures \\result == x; @*/ int f(int x) { return x; }";
    let file = SourceFile::new("t.mcl", src);
    let typed = load(&file).unwrap();
    let env = [("x".to_string(), floc_core::frontend::Value::Int(0))].into_iter().collect();
    assert_eq!(
        interpret(typed.program(), "f", &env, FUEL).unwrap(),
        ExecResult::PreconditionViolated
    );
}
