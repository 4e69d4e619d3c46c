use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::LogicError;
use crate::frontend::ast::Sort;
use crate::frontend::interp::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }

    pub fn int(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Int)
    }

    pub fn bool(name: impl Into<String>) -> Self {
        Var::new(name, Sort::Bool)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

/// First-order formulas and terms over integers and booleans, using native
/// operators only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Int(i64),
    Bool(bool),
    Var(Var),
    Neg(Box<Formula>),
    Add(Box<Formula>, Box<Formula>),
    Sub(Box<Formula>, Box<Formula>),
    Mul(Box<Formula>, Box<Formula>),
    Lt(Box<Formula>, Box<Formula>),
    Le(Box<Formula>, Box<Formula>),
    Gt(Box<Formula>, Box<Formula>),
    Ge(Box<Formula>, Box<Formula>),
    Eq(Box<Formula>, Box<Formula>),
    Ne(Box<Formula>, Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Ite(Box<Formula>, Box<Formula>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
}

use Formula as F;

/// Binary node kinds, for code that treats them uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinKind {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Implies,
}

impl BinKind {
    pub fn symbol(self) -> &'static str {
        match self {
            BinKind::Add => "+",
            BinKind::Sub => "-",
            BinKind::Mul => "*",
            BinKind::Lt => "<",
            BinKind::Le => "<=",
            BinKind::Gt => ">",
            BinKind::Ge => ">=",
            BinKind::Eq => "==",
            BinKind::Ne => "!=",
            BinKind::Implies => "==>",
        }
    }
}

impl Formula {
    pub fn var(v: &Var) -> Formula {
        F::Var(v.clone())
    }

    pub fn int_var(name: &str) -> Formula {
        F::Var(Var::int(name))
    }

    pub fn bool_var(name: &str) -> Formula {
        F::Var(Var::bool(name))
    }

    pub fn as_binary(&self) -> Option<(BinKind, &Formula, &Formula)> {
        Some(match self {
            F::Add(a, b) => (BinKind::Add, a, b),
            F::Sub(a, b) => (BinKind::Sub, a, b),
            F::Mul(a, b) => (BinKind::Mul, a, b),
            F::Lt(a, b) => (BinKind::Lt, a, b),
            F::Le(a, b) => (BinKind::Le, a, b),
            F::Gt(a, b) => (BinKind::Gt, a, b),
            F::Ge(a, b) => (BinKind::Ge, a, b),
            F::Eq(a, b) => (BinKind::Eq, a, b),
            F::Ne(a, b) => (BinKind::Ne, a, b),
            F::Implies(a, b) => (BinKind::Implies, a, b),
            _ => return None,
        })
    }

    /// Binary node of the given kind, constant-folded when both operands
    /// are literals. Folding never looks through variables.
    pub fn binary(kind: BinKind, a: Formula, b: Formula) -> Formula {
        match (kind, &a, &b) {
            (BinKind::Implies, F::Bool(true), _) => return b,
            (_, F::Int(x), F::Int(y)) => {
                let (x, y) = (*x, *y);
                let folded = match kind {
                    BinKind::Add => x.checked_add(y).map(F::Int),
                    BinKind::Sub => x.checked_sub(y).map(F::Int),
                    BinKind::Mul => x.checked_mul(y).map(F::Int),
                    BinKind::Lt => Some(F::Bool(x < y)),
                    BinKind::Le => Some(F::Bool(x <= y)),
                    BinKind::Gt => Some(F::Bool(x > y)),
                    BinKind::Ge => Some(F::Bool(x >= y)),
                    BinKind::Eq => Some(F::Bool(x == y)),
                    BinKind::Ne => Some(F::Bool(x != y)),
                    BinKind::Implies => None,
                };
                if let Some(f) = folded {
                    return f;
                }
            }
            (_, F::Bool(x), F::Bool(y)) => {
                let (x, y) = (*x, *y);
                match kind {
                    BinKind::Eq => return F::Bool(x == y),
                    BinKind::Ne => return F::Bool(x != y),
                    BinKind::Implies => return F::Bool(!x || y),
                    _ => {}
                }
            }
            _ => {}
        }
        let (a, b) = (Box::new(a), Box::new(b));
        match kind {
            BinKind::Add => F::Add(a, b),
            BinKind::Sub => F::Sub(a, b),
            BinKind::Mul => F::Mul(a, b),
            BinKind::Lt => F::Lt(a, b),
            BinKind::Le => F::Le(a, b),
            BinKind::Gt => F::Gt(a, b),
            BinKind::Ge => F::Ge(a, b),
            BinKind::Eq => F::Eq(a, b),
            BinKind::Ne => F::Ne(a, b),
            BinKind::Implies => F::Implies(a, b),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        F::binary(BinKind::Implies, a, b)
    }

    pub fn eq(a: Formula, b: Formula) -> Formula {
        F::binary(BinKind::Eq, a, b)
    }

    /// Conjunction; `true` operands are dropped and nested conjunctions
    /// flattened. `false` only absorbs when every operand is a literal.
    pub fn and(parts: Vec<Formula>) -> Formula {
        Self::junction(parts, true)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Self::junction(parts, false)
    }

    fn junction(parts: Vec<Formula>, is_and: bool) -> Formula {
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                F::Bool(b) if b == is_and => {}
                F::And(inner) if is_and => out.extend(inner),
                F::Or(inner) if !is_and => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.iter().all(|p| matches!(p, F::Bool(_))) {
            return F::Bool(if is_and {
                out.is_empty()
            } else {
                !out.is_empty()
            });
        }
        if out.len() == 1 {
            return out.pop().unwrap();
        }
        if is_and {
            F::And(out)
        } else {
            F::Or(out)
        }
    }

    pub fn not(a: Formula) -> Formula {
        match a {
            F::Bool(b) => F::Bool(!b),
            other => F::Not(Box::new(other)),
        }
    }

    pub fn neg(a: Formula) -> Formula {
        match a {
            F::Int(v) if v != i64::MIN => F::Int(-v),
            other => F::Neg(Box::new(other)),
        }
    }

    pub fn ite(c: Formula, t: Formula, e: Formula) -> Formula {
        if let (F::Bool(b), true) = (&c, t.is_literal() && e.is_literal()) {
            return if *b { t } else { e };
        }
        F::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            F::Forall(vars, Box::new(body))
        }
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() {
            body
        } else {
            F::Exists(vars, Box::new(body))
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, F::Int(_) | F::Bool(_))
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.visit(&mut |f| qf &= !matches!(f, F::Forall(..) | F::Exists(..)));
        qf
    }

    /// Sort of a well-formed formula.
    pub fn sort(&self) -> Sort {
        match self {
            F::Int(_) | F::Neg(_) | F::Add(..) | F::Sub(..) | F::Mul(..) => Sort::Int,
            F::Var(v) => v.sort,
            F::Ite(_, t, _) => t.sort(),
            _ => Sort::Bool,
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            F::Int(_) | F::Bool(_) | F::Var(_) => vec![],
            F::Neg(a) | F::Not(a) => vec![a],
            F::And(v) | F::Or(v) => v.iter().collect(),
            F::Ite(c, t, e) => vec![c, t, e],
            F::Forall(_, b) | F::Exists(_, b) => vec![b],
            other => {
                let (_, a, b) = other.as_binary().expect("binary node");
                vec![a, b]
            }
        }
    }

    /// Pre-order traversal (binders are not treated specially).
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_vars().contains_key(name)
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeMap<String, Sort>) {
        match self {
            F::Var(v) => {
                if !bound.contains(&v.name) {
                    out.insert(v.name.clone(), v.sort);
                }
            }
            F::Forall(vs, b) | F::Exists(vs, b) => {
                let n = bound.len();
                bound.extend(vs.iter().map(|v| v.name.clone()));
                b.collect_free(bound, out);
                bound.truncate(n);
            }
            other => {
                for c in other.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Whether some multiplication has two non-literal operands.
    pub fn is_nonlinear(&self) -> bool {
        let mut nl = false;
        self.visit(&mut |f| {
            if let F::Mul(a, b) = f {
                nl |= !a.is_literal() && !b.is_literal();
            }
        });
        nl
    }

    /// Rebuild with `f` applied to every immediate child.
    pub fn map_children(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            F::Int(_) | F::Bool(_) | F::Var(_) => self.clone(),
            F::Neg(a) => F::neg(f(a)),
            F::Not(a) => F::not(f(a)),
            F::And(v) => F::and(v.iter().map(&mut *f).collect()),
            F::Or(v) => F::or(v.iter().map(&mut *f).collect()),
            F::Ite(c, t, e) => F::ite(f(c), f(t), f(e)),
            F::Forall(vs, b) => F::forall(vs.clone(), f(b)),
            F::Exists(vs, b) => F::exists(vs.clone(), f(b)),
            other => {
                let (k, a, b) = other.as_binary().expect("binary node");
                F::binary(k, f(a), f(b))
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn substitute(&self, binding: &BTreeMap<String, Formula>) -> Result<Formula, LogicError> {
        for (name, repl) in binding {
            if let Some(sort) = self.free_vars().get(name) {
                if *sort != repl.sort() {
                    return Err(LogicError::SortMismatch {
                        var: name.clone(),
                        expected: *sort,
                        found: repl.sort(),
                    });
                }
            }
        }
        Ok(self.subst_unchecked(binding))
    }

    /// Substitution without the sort check; callers guarantee sort-correct
    /// bindings.
    pub fn subst_unchecked(&self, binding: &BTreeMap<String, Formula>) -> Formula {
        if binding.is_empty() {
            return self.clone();
        }
        match self {
            F::Var(v) => binding.get(&v.name).cloned().unwrap_or_else(|| self.clone()),
            F::Forall(vs, body) | F::Exists(vs, body) => {
                let is_forall = matches!(self, F::Forall(..));
                let mut inner: BTreeMap<String, Formula> = binding
                    .iter()
                    .filter(|(k, _)| !vs.iter().any(|v| &v.name == *k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let body_free = body.free_vars();
                inner.retain(|k, _| body_free.contains_key(k));
                let incoming: BTreeSet<String> = inner
                    .values()
                    .flat_map(|f| f.free_vars().into_keys())
                    .collect();
                let mut new_vars = Vec::with_capacity(vs.len());
                for v in vs {
                    if incoming.contains(&v.name) {
                        let mut k = 0;
                        let fresh = loop {
                            let cand = format!("{}!{}", v.name, k);
                            if !incoming.contains(&cand) && !body_free.contains_key(&cand) {
                                break cand;
                            }
                            k += 1;
                        };
                        let nv = Var::new(fresh, v.sort);
                        inner.insert(v.name.clone(), F::Var(nv.clone()));
                        new_vars.push(nv);
                    } else {
                        new_vars.push(v.clone());
                    }
                }
                let body = body.subst_unchecked(&inner);
                if is_forall {
                    F::forall(new_vars, body)
                } else {
                    F::exists(new_vars, body)
                }
            }
            other => other.map_children(&mut |c| c.subst_unchecked(binding)),
        }
    }

    /// Evaluate under a total valuation of the free variables. Quantifiers
    /// are not supported here; use a solver.
    pub fn eval(&self, env: &BTreeMap<String, Value>) -> Result<Value, LogicError> {
        Ok(match self {
            F::Int(v) => Value::Int(*v),
            F::Bool(b) => Value::Bool(*b),
            F::Var(v) => *env
                .get(&v.name)
                .ok_or_else(|| LogicError::Unassigned(v.name.clone()))?,
            F::Neg(a) => Value::Int(
                a.eval_int(env)?
                    .checked_neg()
                    .ok_or(LogicError::Overflow)?,
            ),
            F::Not(a) => Value::Bool(!a.eval_bool(env)?),
            F::And(v) => {
                let mut r = true;
                for p in v {
                    r &= p.eval_bool(env)?;
                }
                Value::Bool(r)
            }
            F::Or(v) => {
                let mut r = false;
                for p in v {
                    r |= p.eval_bool(env)?;
                }
                Value::Bool(r)
            }
            F::Ite(c, t, e) => {
                if c.eval_bool(env)? {
                    t.eval(env)?
                } else {
                    e.eval(env)?
                }
            }
            F::Forall(..) | F::Exists(..) => return Err(LogicError::Quantified),
            F::Eq(a, b) => Value::Bool(a.eval(env)? == b.eval(env)?),
            F::Ne(a, b) => Value::Bool(a.eval(env)? != b.eval(env)?),
            F::Implies(a, b) => Value::Bool(!a.eval_bool(env)? || b.eval_bool(env)?),
            other => {
                let (k, a, b) = other.as_binary().expect("binary node");
                let (x, y) = (a.eval_int(env)?, b.eval_int(env)?);
                let arith = |r: Option<i64>| r.map(Value::Int).ok_or(LogicError::Overflow);
                match k {
                    BinKind::Add => arith(x.checked_add(y))?,
                    BinKind::Sub => arith(x.checked_sub(y))?,
                    BinKind::Mul => arith(x.checked_mul(y))?,
                    BinKind::Lt => Value::Bool(x < y),
                    BinKind::Le => Value::Bool(x <= y),
                    BinKind::Gt => Value::Bool(x > y),
                    BinKind::Ge => Value::Bool(x >= y),
                    _ => unreachable!(),
                }
            }
        })
    }

    pub fn eval_bool(&self, env: &BTreeMap<String, Value>) -> Result<bool, LogicError> {
        self.eval(env)?.as_bool().ok_or(LogicError::IllSorted)
    }

    pub fn eval_int(&self, env: &BTreeMap<String, Value>) -> Result<i64, LogicError> {
        self.eval(env)?.as_int().ok_or(LogicError::IllSorted)
    }
}

/// Canonical text: fully parenthesized infix with sorted binders, e.g.
/// `forall a:int, b:int. exists c3:int. ((b <= a) || (c3 >= b))`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F::Int(v) => write!(f, "{v}"),
            F::Bool(b) => write!(f, "{b}"),
            F::Var(v) => f.write_str(&v.name),
            F::Neg(a) => write!(f, "-{a}"),
            F::Not(a) => write!(f, "!{a}"),
            F::And(v) | F::Or(v) => {
                let op = if matches!(self, F::And(_)) { " && " } else { " || " };
                f.write_str("(")?;
                for (i, p) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            F::Ite(c, t, e) => write!(f, "(if {c} then {t} else {e})"),
            F::Forall(vs, b) | F::Exists(vs, b) => {
                let q = if matches!(self, F::Forall(..)) {
                    "forall"
                } else {
                    "exists"
                };
                let vars: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{q} {}. {b}", vars.join(", "))
            }
            other => {
                let (k, a, b) = other.as_binary().expect("binary node");
                write!(f, "({a} {} {b})", k.symbol())
            }
        }
    }
}
