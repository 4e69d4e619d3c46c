mod common;

use std::collections::{BTreeMap, BTreeSet};

use floc_core::frontend::{Sort, Value};
use floc_core::logic::{Formula, Var};
use proptest::prelude::*;
use rand::Rng;

use common::{formula, rng};

fn vars() -> Vec<Var> {
    vec![Var::int("x"), Var::int("y"), Var::int("z"), Var::bool("p")]
}

/// Random formula that sometimes binds `x` or `y` inside.
fn quantified(seed: u64) -> Formula {
    let mut r = rng(seed);
    let f = formula(&mut r, &vars(), 3, true);
    match r.gen_range(0..4) {
        0 => Formula::and(vec![Formula::forall(vec![Var::int("x")], f.clone()), f]),
        1 => Formula::or(vec![Formula::exists(vec![Var::int("y")], f.clone()), f]),
        _ => f,
    }
}

fn names(m: BTreeMap<String, Sort>) -> BTreeSet<String> {
    m.into_keys().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// fv(f[x := e]) = (fv(f) - {x}) + (fv(e) if x is free in f).
    #[test]
    fn substitution_free_variable_law(seed in any::<u64>()) {
        let f = quantified(seed);
        let mut r = rng(seed.wrapping_add(1));
        let e = Formula::binary(
            floc_core::logic::BinKind::Add,
            Formula::int_var(["y", "z", "w"][r.gen_range(0..3)]),
            Formula::int_var("x"),
        );
        let binding: BTreeMap<String, Formula> = [("x".to_string(), e.clone())].into_iter().collect();
        let g = f.subst_unchecked(&binding);
        let before = names(f.free_vars());
        let mut want: BTreeSet<String> = before.iter().filter(|v| *v != "x").cloned().collect();
        if before.contains("x") {
            want.extend(names(e.free_vars()));
        }
        prop_assert_eq!(names(g.free_vars()), want);
    }

    /// eval(f[x := e], env) = eval(f, env[x := eval(e, env)]).
    #[test]
    fn substitution_commutes_with_evaluation(seed in any::<u64>(), x in -5i64..=5, y in -5i64..=5, z in -5i64..=5, p: bool) {
        let mut r = rng(seed);
        let f = formula(&mut r, &vars(), 3, true);
        let e = Formula::binary(floc_core::logic::BinKind::Sub, Formula::int_var("y"), Formula::Int(r.gen_range(-3..=3)));
        let env: BTreeMap<String, Value> = [
            ("x".to_string(), Value::Int(x)),
            ("y".to_string(), Value::Int(y)),
            ("z".to_string(), Value::Int(z)),
            ("p".to_string(), Value::Bool(p)),
        ]
        .into_iter()
        .collect();
        let binding: BTreeMap<String, Formula> = [("x".to_string(), e.clone())].into_iter().collect();
        let lhs = f.substitute(&binding).unwrap().eval_bool(&env);
        let mut env2 = env.clone();
        env2.insert("x".into(), Value::Int(e.eval_int(&env).unwrap()));
        let rhs = f.eval_bool(&env2);
        prop_assert_eq!(lhs.ok(), rhs.ok());
    }

    /// Capture-avoiding substitution never lets a binder grab a free variable.
    #[test]
    fn binders_do_not_capture(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inner = formula(&mut r, &vars(), 2, false);
        let f = Formula::forall(vec![Var::int("y")], Formula::and(vec![inner, Formula::binary(
            floc_core::logic::BinKind::Lt, Formula::int_var("y"), Formula::int_var("x"))]));
        let binding: BTreeMap<String, Formula> = [("x".to_string(), Formula::int_var("y"))].into_iter().collect();
        let g = f.subst_unchecked(&binding);
        prop_assert!(g.free_vars().contains_key("y"));
    }

    #[test]
    fn display_is_deterministic(seed in any::<u64>()) {
        prop_assert_eq!(quantified(seed).to_string(), quantified(seed).to_string());
    }
}

#[test]
fn ill_sorted_substitution_is_rejected() {
    let f = Formula::binary(floc_core::logic::BinKind::Lt, Formula::int_var("x"), Formula::Int(1));
    let binding: BTreeMap<String, Formula> = [("x".to_string(), Formula::Bool(true))].into_iter().collect();
    assert!(f.substitute(&binding).is_err());
}
