//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use floc_core::frontend::{Sort, Value};
use floc_core::logic::{build_query, BinKind, Formula, QuantifiedQuery, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random loop-free, call-free MCL function `f` in source form.
#[derive(Debug, Clone)]
pub struct GenProgram {
    pub source: String,
    pub inputs: Vec<(String, Sort)>,
}

impl GenProgram {
    /// Random entry valuation with integers in `[-bound, bound]`.
    pub fn random_input(&self, r: &mut ChaCha8Rng, bound: i64) -> BTreeMap<String, Value> {
        self.inputs
            .iter()
            .map(|(n, s)| {
                let v = match s {
                    Sort::Int => Value::Int(r.gen_range(-bound..=bound)),
                    Sort::Bool => Value::Bool(r.gen()),
                };
                (n.clone(), v)
            })
            .collect()
    }
}

struct ProgGen {
    r: ChaCha8Rng,
    next_local: usize,
    globals: Vec<(String, Sort)>,
}

fn pick_sort(r: &mut ChaCha8Rng) -> Sort {
    if r.gen_bool(0.7) {
        Sort::Int
    } else {
        Sort::Bool
    }
}

impl ProgGen {
    fn expr(&mut self, scope: &[(String, Sort)], sort: Sort, depth: u32) -> String {
        let vars: Vec<&String> = scope.iter().filter(|(_, s)| *s == sort).map(|(n, _)| n).collect();
        if depth == 0 || self.r.gen_bool(0.3) {
            if !vars.is_empty() && self.r.gen_bool(0.7) {
                return vars.choose(&mut self.r).unwrap().to_string();
            }
            return match sort {
                Sort::Int => self.r.gen_range(-3..=3).to_string(),
                Sort::Bool => self.r.gen::<bool>().to_string(),
            };
        }
        let d = depth - 1;
        match sort {
            Sort::Int => match self.r.gen_range(0..4) {
                0 => format!("(-{})", self.expr(scope, Sort::Int, d)),
                k => {
                    let op = ["+", "-", "*"][k - 1];
                    format!("({} {op} {})", self.expr(scope, Sort::Int, d), self.expr(scope, Sort::Int, d))
                }
            },
            Sort::Bool => match self.r.gen_range(0..5) {
                0 => format!("(!{})", self.expr(scope, Sort::Bool, d)),
                1 | 2 => {
                    let op = *["<", "<=", ">", ">=", "==", "!="].choose(&mut self.r).unwrap();
                    format!("({} {op} {})", self.expr(scope, Sort::Int, d), self.expr(scope, Sort::Int, d))
                }
                k => {
                    let op = if k == 3 { "&&" } else { "||" };
                    format!("({} {op} {})", self.expr(scope, Sort::Bool, d), self.expr(scope, Sort::Bool, d))
                }
            },
        }
    }

    /// Statements of one block; `ret` is the function's return sort.
    fn block(&mut self, scope: &mut Vec<(String, Sort)>, depth: u32, ret: Sort, indent: &str) -> String {
        let mut out = String::new();
        let n = self.r.gen_range(1..=4);
        for _ in 0..n {
            let assignable: Vec<(String, Sort)> = scope[self.globals.len()..]
                .iter()
                .filter(|(n, _)| n.starts_with('l'))
                .cloned()
                .chain(self.globals.iter().cloned())
                .collect();
            match self.r.gen_range(0..4) {
                0 | 1 if !assignable.is_empty() => {
                    let (t, s) = assignable.choose(&mut self.r).unwrap().clone();
                    let e = self.expr(scope, s, 2);
                    out.push_str(&format!("{indent}{t} = {e};\n"));
                }
                2 if depth > 0 => {
                    let c = self.expr(scope, Sort::Bool, 2);
                    let inner = format!("{indent}  ");
                    let mut then_scope = scope.clone();
                    let mut t = self.block(&mut then_scope, depth - 1, ret, &inner);
                    if self.r.gen_bool(0.2) {
                        t.push_str(&format!("{inner}return {};\n", self.expr(&then_scope, ret, 2)));
                    }
                    out.push_str(&format!("{indent}if ({c}) {{\n{t}{indent}}}"));
                    if self.r.gen_bool(0.5) {
                        let mut else_scope = scope.clone();
                        let e = self.block(&mut else_scope, depth - 1, ret, &inner);
                        out.push_str(&format!(" else {{\n{e}{indent}}}"));
                    }
                    out.push('\n');
                }
                _ => {
                    let s = pick_sort(&mut self.r);
                    let name = format!("l{}", self.next_local);
                    self.next_local += 1;
                    let e = self.expr(scope, s, 2);
                    out.push_str(&format!("{indent}{s} {name} = {e};\n"));
                    scope.push((name, s));
                }
            }
        }
        out
    }
}

pub fn random_program(seed: u64) -> GenProgram {
    let mut r = rng(seed);
    let globals: Vec<(String, Sort)> = (0..r.gen_range(0..=1)).map(|i| (format!("g{i}"), Sort::Int)).collect();
    let params: Vec<(String, Sort)> = (0..r.gen_range(1..=3)).map(|i| (format!("p{i}"), pick_sort(&mut r))).collect();
    let ret = pick_sort(&mut r);
    let mut g = ProgGen {
        r,
        next_local: 0,
        globals: globals.clone(),
    };
    let mut scope: Vec<(String, Sort)> = globals.iter().chain(&params).cloned().collect();
    let entry_scope = scope.clone();
    let requires = if g.r.gen_bool(0.5) {
        format!("requires {};\n    ", g.expr(&entry_scope, Sort::Bool, 2))
    } else {
        String::new()
    };
    let mut post_scope = entry_scope.clone();
    post_scope.push(("\\result".into(), ret));
    for (n, s) in &globals {
        post_scope.push((format!("\\old({n})"), *s));
    }
    let ensures = g.expr(&post_scope, Sort::Bool, 3);
    let body = g.block(&mut scope, 2, ret, "  ");
    let result = g.expr(&scope, ret, 2);

    let mut source = String::new();
    for (n, s) in &globals {
        source.push_str(&format!("{s} {n};\n"));
    }
    let ps: Vec<String> = params.iter().map(|(n, s)| format!("{s} {n}")).collect();
    source.push_str(&format!(
        "/*@ {requires}ensures {ensures}; @*/\n{ret} f({}) {{\n{body}  return {result};\n}}\n",
        ps.join(", ")
    ));
    GenProgram {
        source,
        inputs: globals.into_iter().chain(params).collect(),
    }
}

/// Random quantifier-free term over `vars`; linear unless `nonlinear`.
fn term(r: &mut ChaCha8Rng, vars: &[Var], depth: u32, nonlinear: bool) -> Formula {
    let ints: Vec<&Var> = vars.iter().filter(|v| v.sort == Sort::Int).collect();
    if depth == 0 || r.gen_bool(0.3) {
        if !ints.is_empty() && r.gen_bool(0.7) {
            return Formula::var(ints.choose(r).unwrap());
        }
        return Formula::Int(r.gen_range(-3..=3));
    }
    let a = term(r, vars, depth - 1, nonlinear);
    match r.gen_range(0..4) {
        0 => Formula::binary(BinKind::Add, a, term(r, vars, depth - 1, nonlinear)),
        1 => Formula::binary(BinKind::Sub, a, term(r, vars, depth - 1, nonlinear)),
        2 if nonlinear => Formula::binary(BinKind::Mul, a, term(r, vars, depth - 1, nonlinear)),
        2 => Formula::binary(BinKind::Mul, Formula::Int(r.gen_range(-2..=2)), a),
        _ => Formula::neg(a),
    }
}

pub fn formula(r: &mut ChaCha8Rng, vars: &[Var], depth: u32, nonlinear: bool) -> Formula {
    let bools: Vec<&Var> = vars.iter().filter(|v| v.sort == Sort::Bool).collect();
    if depth == 0 || r.gen_bool(0.25) {
        if !bools.is_empty() && r.gen_bool(0.3) {
            return Formula::var(bools.choose(r).unwrap());
        }
        let kind = *[BinKind::Lt, BinKind::Le, BinKind::Gt, BinKind::Ge, BinKind::Eq, BinKind::Ne]
            .choose(r)
            .unwrap();
        return Formula::binary(kind, term(r, vars, 2, nonlinear), term(r, vars, 2, nonlinear));
    }
    let d = depth - 1;
    match r.gen_range(0..5) {
        0 => Formula::not(formula(r, vars, d, nonlinear)),
        1 => Formula::and(vec![formula(r, vars, d, nonlinear), formula(r, vars, d, nonlinear)]),
        2 => Formula::or(vec![formula(r, vars, d, nonlinear), formula(r, vars, d, nonlinear)]),
        3 => Formula::implies(formula(r, vars, d, nonlinear), formula(r, vars, d, nonlinear)),
        _ => Formula::ite(
            formula(r, vars, d, nonlinear),
            formula(r, vars, d, nonlinear),
            formula(r, vars, d, nonlinear),
        ),
    }
}

fn class(r: &mut ChaCha8Rng, prefix: &str, n: usize) -> Vec<Var> {
    (0..n)
        .map(|i| {
            let sort = if r.gen_bool(0.8) { Sort::Int } else { Sort::Bool };
            Var::new(format!("{prefix}{i}"), sort)
        })
        .collect()
}

/// Random `forall i. exists c. forall t. body` with 1-3 inputs, an optional
/// placeholder and 0-2 auxiliaries.
pub fn random_query(seed: u64) -> QuantifiedQuery {
    let mut r = rng(seed);
    let ni = r.gen_range(1..=3);
    let inputs = class(&mut r, "x", ni);
    let placeholder = r.gen_bool(0.75).then(|| class(&mut r, "c", 1).remove(0));
    let na = r.gen_range(0..=2);
    let aux = class(&mut r, "t", na);
    let all: Vec<Var> = inputs.iter().chain(&placeholder).chain(&aux).cloned().collect();
    let nonlinear = r.gen_bool(0.1);
    let body = formula(&mut r, &all, 3, nonlinear);
    build_query(body, &inputs, placeholder.as_ref(), &aux).expect("classes are disjoint")
}

pub fn domain(v: &Var, bound: i64) -> Vec<Value> {
    match v.sort {
        Sort::Int => (-bound..=bound).map(Value::Int).collect(),
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
    }
}

/// Every assignment of `vars` over their domains, in lexicographic order.
pub fn assignments(vars: &[Var], bound: i64) -> Vec<Vec<(String, Value)>> {
    let mut out = vec![Vec::new()];
    for v in vars {
        let d = domain(v, bound);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push((v.name.clone(), *x));
                    p
                })
            })
            .collect();
    }
    out
}

/// Decide `q` by three nested loops: inputs, placeholder, auxiliaries.
/// Returns `None` when the body cannot be evaluated (overflow).
pub fn brute_force(q: &QuantifiedQuery, bound: i64, placeholder_bound: i64) -> Option<bool> {
    let cs: Vec<Option<Value>> = match &q.placeholder {
        Some(c) => domain(c, placeholder_bound).into_iter().map(Some).collect(),
        None => vec![None],
    };
    let aux = assignments(&q.auxiliaries, bound);
    for i in assignments(&q.inputs, bound) {
        let mut some_c = false;
        for c in &cs {
            let mut all_t = true;
            for t in &aux {
                let mut env: BTreeMap<String, Value> = i.iter().cloned().collect();
                if let (Some(v), Some(x)) = (&q.placeholder, c) {
                    env.insert(v.name.clone(), *x);
                }
                env.extend(t.iter().cloned());
                if !q.body.eval_bool(&env).ok()? {
                    all_t = false;
                    break;
                }
            }
            if all_t {
                some_c = true;
                break;
            }
        }
        if !some_c {
            return Some(false);
        }
    }
    Some(true)
}

/// Prover command from the environment, or `z3` when it is installed.
pub fn prover() -> Option<String> {
    if let Ok(cmd) = std::env::var(floc_core::solvers::PROVER_ENV) {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let ok = std::process::Command::new("z3")
        .arg("-version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    ok.then(|| "z3".to_string())
}
