//! One-point elimination of auxiliaries defined by an equation.
//!
//! `forall t. (t == e && R) ==> B` becomes `e in D ==> (R ==> B)[e/t]`,
//! where `D` is the bounded domain of `t`. The rewrite descends only
//! through positions where `forall t` commutes with the connective, so the
//! result is equivalent under the bounded semantics.

use crate::frontend::ast::Sort;
use crate::logic::{BinKind, Formula, QuantifiedQuery, Var};

pub(super) fn eliminate(q: &QuantifiedQuery, bound: i64) -> QuantifiedQuery {
    let mut body = q.body.clone();
    for t in &q.auxiliaries {
        if let Some(b) = elim(&body, t, bound) {
            body = b;
        }
    }
    let free = body.free_vars();
    QuantifiedQuery {
        inputs: q.inputs.clone(),
        placeholder: q.placeholder.clone(),
        auxiliaries: q
            .auxiliaries
            .iter()
            .filter(|v| free.contains_key(&v.name))
            .cloned()
            .collect(),
        body,
    }
}

fn elim(f: &Formula, t: &Var, bound: i64) -> Option<Formula> {
    if !f.mentions(&t.name) {
        return Some(f.clone());
    }
    match f {
        Formula::And(parts) => Some(Formula::and(
            parts
                .iter()
                .map(|p| elim(p, t, bound))
                .collect::<Option<Vec<_>>>()?,
        )),
        Formula::Or(parts) => {
            let mut hits = parts.iter().filter(|p| p.mentions(&t.name));
            let _ = hits.next();
            if hits.next().is_some() {
                return None;
            }
            let mut out = Vec::with_capacity(parts.len());
            for p in parts {
                out.push(elim(p, t, bound)?);
            }
            Some(Formula::or(out))
        }
        Formula::Ite(c, x, y) if !c.mentions(&t.name) && f.sort() == Sort::Bool => Some(
            Formula::ite((**c).clone(), elim(x, t, bound)?, elim(y, t, bound)?),
        ),
        Formula::Implies(a, b) => {
            if !a.mentions(&t.name) {
                return Some(Formula::implies((**a).clone(), elim(b, t, bound)?));
            }
            let cases: Vec<&Formula> = match &**a {
                Formula::Or(ps) => ps.iter().collect(),
                other => vec![other],
            };
            let mut out = Vec::with_capacity(cases.len());
            for case in cases {
                let conj: Vec<&Formula> = match case {
                    Formula::And(ps) => ps.iter().collect(),
                    other => vec![other],
                };
                let (k, e) = conj
                    .iter()
                    .enumerate()
                    .find_map(|(k, c)| definition(c, t).map(|e| (k, e)))?;
                let mut ante: Vec<Formula> = Vec::with_capacity(conj.len() + 1);
                if t.sort == Sort::Int {
                    ante.push(Formula::binary(BinKind::Le, Formula::Int(-bound), e.clone()));
                    ante.push(Formula::binary(BinKind::Le, e.clone(), Formula::Int(bound)));
                }
                ante.extend(
                    conj.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, c)| (*c).clone()),
                );
                let binding = [(t.name.clone(), e.clone())].into_iter().collect();
                out.push(Formula::implies(Formula::and(ante), (**b).clone()).subst_unchecked(&binding));
            }
            Some(Formula::and(out))
        }
        _ => None,
    }
}

/// `e` if `c` is `t == e` or `e == t` with `e` free of `t`.
fn definition<'a>(c: &'a Formula, t: &Var) -> Option<&'a Formula> {
    let Formula::Eq(l, r) = c else {
        return None;
    };
    let is_t = |x: &Formula| matches!(x, Formula::Var(v) if v.name == t.name);
    if is_t(l) && !r.mentions(&t.name) {
        Some(r)
    } else if is_t(r) && !l.mentions(&t.name) {
        Some(l)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::build_query;

    #[test]
    fn call_result_is_substituted_with_guard() {
        let t = Var::int("f$r0");
        let post = Formula::eq(
            Formula::var(&t),
            Formula::binary(BinKind::Add, Formula::int_var("x"), Formula::Int(1)),
        );
        let goal = Formula::binary(BinKind::Gt, Formula::var(&t), Formula::int_var("x"));
        let body = Formula::implies(post, goal);
        let q = build_query(body, &[Var::int("x")], None, &[t]).unwrap();
        let r = eliminate(&q, 8);
        assert!(r.auxiliaries.is_empty());
        assert_eq!(
            r.body.to_string(),
            "(((-8 <= (x + 1)) && ((x + 1) <= 8)) ==> ((x + 1) > x))"
        );
    }

    #[test]
    fn case_split_definitions() {
        let t = Var::int("t");
        let p = Formula::bool_var("p");
        let post = Formula::or(vec![
            Formula::and(vec![p.clone(), Formula::eq(Formula::var(&t), Formula::Int(1))]),
            Formula::and(vec![Formula::not(p), Formula::eq(Formula::var(&t), Formula::Int(2))]),
        ]);
        let body = Formula::implies(post, Formula::binary(BinKind::Gt, Formula::var(&t), Formula::Int(0)));
        let q = build_query(body, &[Var::bool("p")], None, &[t]).unwrap();
        let r = eliminate(&q, 8);
        assert!(r.auxiliaries.is_empty());
        assert!(!r.body.mentions("t"));
    }

    #[test]
    fn undefined_auxiliary_is_kept() {
        let t = Var::int("x$h0");
        let body = Formula::implies(
            Formula::binary(BinKind::Ge, Formula::var(&t), Formula::Int(0)),
            Formula::binary(BinKind::Ge, Formula::var(&t), Formula::int_var("n")),
        );
        let q = build_query(body, &[Var::int("n")], None, &[t.clone()]).unwrap();
        assert_eq!(eliminate(&q, 8).auxiliaries, vec![t]);
    }
}
