//! SMT-LIB2 rendering of quantified queries.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::frontend::ast::Sort;
use crate::logic::{BinKind, Formula, QuantifiedQuery, Var};

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

/// Symbol for a variable: class prefix plus the source name. Names coming
/// from the VC generator only use characters that are legal in simple
/// symbols (`$`, `!`, `_`).
fn symbol(prefix: &str, name: &str) -> String {
    let clean = name.replace('\\', "");
    format!("{prefix}{clean}")
}

fn write_term(out: &mut String, f: &Formula, names: &BTreeMap<String, String>) {
    use Formula as F;
    match f {
        F::Int(v) if *v < 0 => {
            let _ = write!(out, "(- {})", v.unsigned_abs());
        }
        F::Int(v) => {
            let _ = write!(out, "{v}");
        }
        F::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        F::Var(v) => match names.get(&v.name) {
            Some(s) => out.push_str(s),
            None => out.push_str(&symbol("", &v.name)),
        },
        F::Neg(a) => app(out, "-", &[a], names),
        F::Not(a) => app(out, "not", &[a], names),
        F::And(v) => app(out, "and", &v.iter().collect::<Vec<_>>(), names),
        F::Or(v) => app(out, "or", &v.iter().collect::<Vec<_>>(), names),
        F::Ite(c, t, e) => app(out, "ite", &[c, t, e], names),
        F::Forall(vs, b) | F::Exists(vs, b) => {
            let q = if matches!(f, F::Forall(..)) {
                "forall"
            } else {
                "exists"
            };
            let _ = write!(out, "({q} (");
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} {})", names[&v.name], sort_name(v.sort));
            }
            out.push_str(") ");
            write_term(out, b, names);
            out.push(')');
        }
        F::Ne(a, b) => {
            out.push_str("(not ");
            app(out, "=", &[a, b], names);
            out.push(')');
        }
        other => {
            let (k, a, b) = other.as_binary().expect("binary node");
            let op = match k {
                BinKind::Add => "+",
                BinKind::Sub => "-",
                BinKind::Mul => "*",
                BinKind::Lt => "<",
                BinKind::Le => "<=",
                BinKind::Gt => ">",
                BinKind::Ge => ">=",
                BinKind::Eq => "=",
                BinKind::Implies => "=>",
                BinKind::Ne => unreachable!(),
            };
            app(out, op, &[a, b], names);
        }
    }
}

fn app(out: &mut String, op: &str, args: &[&Formula], names: &BTreeMap<String, String>) {
    let _ = write!(out, "({op}");
    for a in args {
        out.push(' ');
        write_term(out, a, names);
    }
    out.push(')');
}

fn class_names(q: &QuantifiedQuery) -> BTreeMap<String, String> {
    let mut names = BTreeMap::new();
    let mut add = |vs: &[Var], prefix: &str| {
        for v in vs {
            names.insert(v.name.clone(), symbol(prefix, &v.name));
        }
    };
    add(&q.inputs, "i_");
    add(q.placeholder.as_slice(), "c_");
    add(&q.auxiliaries, "t_");
    names
}

/// Script asserting the negation of the closed query, so `unsat` means the
/// query is valid.
pub fn emit_smtlib(q: &QuantifiedQuery) -> String {
    let names = class_names(q);
    let logic = if q.body.is_nonlinear() { "NIA" } else { "LIA" };
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {logic})");
    let mut sentence = String::new();
    write_term(&mut sentence, &q.closure(), &names);
    let _ = writeln!(out, "(assert (not {sentence}))");
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
