//! Concrete interpreter. Serves as the testing oracle for the verification
//! condition generator and the normalizer.
//!
//! Integers are `i64`; any overflow is reported as an error instead of
//! wrapping, since the analysis reasons over mathematical integers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }

    pub fn default_for(sort: Sort) -> Value {
        match sort {
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Values of parameters and globals at function entry.
pub type Env = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecResult {
    Returned {
        value: Option<Value>,
        globals: BTreeMap<String, Value>,
    },
    PreconditionViolated,
    /// A callee was entered outside its precondition or left it violating
    /// its postcondition.
    CalleeContractViolated { callee: String },
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("no function named `{0}`")]
    UnknownFunction(String),
    #[error("no value supplied for `{0}`")]
    MissingInput(String),
    #[error("integer overflow at {0}")]
    Overflow(Span),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-sorted value at {0}")]
    IllSorted(Span),
}

/// Run `name` from `env` with at most `fuel` statement executions.
pub fn interpret(
    program: &Program,
    name: &str,
    env: &Env,
    fuel: u64,
) -> Result<ExecResult, InterpError> {
    let f = program
        .function(name)
        .ok_or_else(|| InterpError::UnknownFunction(name.to_string()))?;
    let mut m = Machine {
        program,
        fuel,
        globals: BTreeMap::new(),
    };
    for g in &program.globals {
        let v = env
            .get(&g.name)
            .copied()
            .ok_or_else(|| InterpError::MissingInput(g.name.clone()))?;
        m.globals.insert(g.name.clone(), v);
    }
    let mut locals = BTreeMap::new();
    for p in &f.params {
        let v = env
            .get(&p.name)
            .copied()
            .ok_or_else(|| InterpError::MissingInput(p.name.clone()))?;
        locals.insert(p.name.clone(), v);
    }
    if !m.check_all(&f.requires, &locals, None, None)? {
        return Ok(ExecResult::PreconditionViolated);
    }
    match m.run_body(f, locals)? {
        Outcome::Done(value) => Ok(ExecResult::Returned {
            value,
            globals: m.globals,
        }),
        Outcome::Callee(callee) => Ok(ExecResult::CalleeContractViolated { callee }),
        Outcome::OutOfFuel => Ok(ExecResult::FuelExhausted),
    }
}

/// Whether `result` satisfies the `ensures` clauses of `name`, given the
/// entry valuation `env`. Only meaningful for `Returned` results.
pub fn postcondition_holds(
    program: &Program,
    name: &str,
    env: &Env,
    result: &ExecResult,
) -> Result<bool, InterpError> {
    let f = program
        .function(name)
        .ok_or_else(|| InterpError::UnknownFunction(name.to_string()))?;
    let ExecResult::Returned { value, globals } = result else {
        return Ok(true);
    };
    let m = Machine {
        program,
        fuel: u64::MAX,
        globals: globals.clone(),
    };
    let locals: BTreeMap<String, Value> = f
        .params
        .iter()
        .filter_map(|p| env.get(&p.name).map(|v| (p.name.clone(), *v)))
        .collect();
    m.check_all(&f.ensures, &locals, *value, Some(env))
}

enum Outcome {
    Done(Option<Value>),
    Callee(String),
    OutOfFuel,
}

enum Flow {
    Next,
    Return(Option<Value>),
    Stop(Outcome),
}

struct Machine<'p> {
    program: &'p Program,
    fuel: u64,
    globals: BTreeMap<String, Value>,
}

type Locals = BTreeMap<String, Value>;

impl<'p> Machine<'p> {
    fn check_all(
        &self,
        clauses: &[Expr],
        locals: &Locals,
        result: Option<Value>,
        old: Option<&Env>,
    ) -> Result<bool, InterpError> {
        for c in clauses {
            match self.eval(c, locals, result, old)? {
                Ok(Value::Bool(true)) => {}
                Ok(Value::Bool(false)) => return Ok(false),
                Ok(_) => return Err(InterpError::IllSorted(c.span.clone())),
                Err(_) => return Err(InterpError::IllSorted(c.span.clone())),
            }
        }
        Ok(true)
    }

    fn run_body(&mut self, f: &FunctionDef, mut locals: Locals) -> Result<Outcome, InterpError> {
        match self.exec_block(&f.body, &mut locals)? {
            Flow::Next => Ok(Outcome::Done(None)),
            Flow::Return(v) => Ok(Outcome::Done(v)),
            Flow::Stop(o) => Ok(o),
        }
    }

    fn tick(&mut self) -> bool {
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        true
    }

    fn exec_block(&mut self, b: &Block, locals: &mut Locals) -> Result<Flow, InterpError> {
        for s in &b.stmts {
            match self.exec(s, locals)? {
                Flow::Next => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Next)
    }

    fn exec(&mut self, s: &Stmt, locals: &mut Locals) -> Result<Flow, InterpError> {
        if !self.tick() {
            return Ok(Flow::Stop(Outcome::OutOfFuel));
        }
        match &s.kind {
            StmtKind::VarDecl { name, sort, init } => {
                let v = match init {
                    Some(e) => match self.eval_code(e, locals)? {
                        Ok(v) => v,
                        Err(o) => return Ok(Flow::Stop(o)),
                    },
                    None => Value::default_for(*sort),
                };
                locals.insert(name.clone(), v);
            }
            StmtKind::Assign { target, value } => {
                let v = match self.eval_code(value, locals)? {
                    Ok(v) => v,
                    Err(o) => return Ok(Flow::Stop(o)),
                };
                if locals.contains_key(target) {
                    locals.insert(target.clone(), v);
                } else if self.globals.contains_key(target) {
                    self.globals.insert(target.clone(), v);
                } else {
                    return Err(InterpError::Unbound(target.clone()));
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = match self.eval_bool(cond, locals)? {
                    Ok(c) => c,
                    Err(o) => return Ok(Flow::Stop(o)),
                };
                if c {
                    return self.exec_block(then_branch, locals);
                } else if let Some(b) = else_branch {
                    return self.exec_block(b, locals);
                }
            }
            StmtKind::While {
                prelude,
                cond,
                body,
                ..
            } => loop {
                for p in prelude {
                    match self.exec(p, locals)? {
                        Flow::Next => {}
                        other => return Ok(other),
                    }
                }
                let c = match self.eval_bool(cond, locals)? {
                    Ok(c) => c,
                    Err(o) => return Ok(Flow::Stop(o)),
                };
                if !c {
                    break;
                }
                match self.exec_block(body, locals)? {
                    Flow::Next => {}
                    other => return Ok(other),
                }
                if !self.tick() {
                    return Ok(Flow::Stop(Outcome::OutOfFuel));
                }
            },
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => match self.eval_code(e, locals)? {
                        Ok(v) => Some(v),
                        Err(o) => return Ok(Flow::Stop(o)),
                    },
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Block(b) => return self.exec_block(b, locals),
        }
        Ok(Flow::Next)
    }

    fn eval_bool(&mut self, e: &Expr, locals: &Locals) -> Result<Result<bool, Outcome>, InterpError> {
        Ok(match self.eval_code(e, locals)? {
            Ok(Value::Bool(b)) => Ok(b),
            Ok(Value::Int(_)) => return Err(InterpError::IllSorted(e.span.clone())),
            Err(o) => Err(o),
        })
    }

    fn eval_code(&mut self, e: &Expr, locals: &Locals) -> Result<Result<Value, Outcome>, InterpError> {
        // calls need `&mut self` for fuel; everything else is read-only
        let mut calls = Vec::new();
        collect_calls(e, &mut calls);
        if calls.is_empty() {
            return self.eval(e, locals, None, None);
        }
        let mut results: BTreeMap<*const Expr, Value> = BTreeMap::new();
        for call in calls {
            let ExprKind::Call(name, args) = &call.kind else {
                unreachable!()
            };
            let mut argv = Vec::with_capacity(args.len());
            for a in args {
                match self.eval_with(a, locals, &results)? {
                    Ok(v) => argv.push(v),
                    Err(o) => return Ok(Err(o)),
                }
            }
            match self.call(name, &argv)? {
                Ok(v) => {
                    results.insert(call as *const Expr, v);
                }
                Err(o) => return Ok(Err(o)),
            }
        }
        self.eval_with(e, locals, &results)
    }

    fn call(&mut self, name: &str, args: &[Value]) -> Result<Result<Value, Outcome>, InterpError> {
        let f = self
            .program
            .function(name)
            .ok_or_else(|| InterpError::UnknownFunction(name.to_string()))?;
        let locals: Locals = f
            .params
            .iter()
            .zip(args)
            .map(|(p, v)| (p.name.clone(), *v))
            .collect();
        if !self.check_all(&f.requires, &locals, None, None)? {
            return Ok(Err(Outcome::Callee(name.to_string())));
        }
        let entry_globals = self.globals.clone();
        let value = match self.run_body(f, locals.clone())? {
            Outcome::Done(Some(v)) => v,
            Outcome::Done(None) => return Err(InterpError::IllSorted(f.span.clone())),
            other => return Ok(Err(other)),
        };
        if !self.check_all(&f.ensures, &locals, Some(value), Some(&entry_globals))? {
            return Ok(Err(Outcome::Callee(name.to_string())));
        }
        Ok(Ok(value))
    }

    fn eval_with(
        &self,
        e: &Expr,
        locals: &Locals,
        calls: &BTreeMap<*const Expr, Value>,
    ) -> Result<Result<Value, Outcome>, InterpError> {
        Evaluator {
            m: self,
            locals,
            result: None,
            old: None,
            calls: Some(calls),
        }
        .eval(e)
        .map(Ok)
    }

    fn eval(
        &self,
        e: &Expr,
        locals: &Locals,
        result: Option<Value>,
        old: Option<&Env>,
    ) -> Result<Result<Value, Outcome>, InterpError> {
        Evaluator {
            m: self,
            locals,
            result,
            old,
            calls: None,
        }
        .eval(e)
        .map(Ok)
    }
}

/// Calls in evaluation order (arguments before the call itself, left to right).
fn collect_calls<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match &e.kind {
        ExprKind::Unary(_, x) => collect_calls(x, out),
        ExprKind::Binary(_, l, r) => {
            collect_calls(l, out);
            collect_calls(r, out);
        }
        ExprKind::Call(_, args) => {
            args.iter().for_each(|a| collect_calls(a, out));
            out.push(e);
        }
        _ => {}
    }
}

struct Evaluator<'a, 'p> {
    m: &'a Machine<'p>,
    locals: &'a Locals,
    result: Option<Value>,
    old: Option<&'a Env>,
    calls: Option<&'a BTreeMap<*const Expr, Value>>,
}

impl Evaluator<'_, '_> {
    fn int(&self, e: &Expr) -> Result<i64, InterpError> {
        self.eval(e)?
            .as_int()
            .ok_or_else(|| InterpError::IllSorted(e.span.clone()))
    }

    fn boolean(&self, e: &Expr) -> Result<bool, InterpError> {
        self.eval(e)?
            .as_bool()
            .ok_or_else(|| InterpError::IllSorted(e.span.clone()))
    }

    fn eval(&self, e: &Expr) -> Result<Value, InterpError> {
        let overflow = || InterpError::Overflow(e.span.clone());
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(name) => self
                .locals
                .get(name)
                .or_else(|| self.m.globals.get(name))
                .copied()
                .ok_or_else(|| InterpError::Unbound(name.clone()))?,
            ExprKind::Result => self
                .result
                .ok_or_else(|| InterpError::Unbound("\\result".into()))?,
            ExprKind::Old(g) => self
                .old
                .and_then(|o| o.get(g))
                .copied()
                .ok_or_else(|| InterpError::Unbound(format!("\\old({g})")))?,
            ExprKind::Unary(UnOp::Neg, x) => {
                Value::Int(self.int(x)?.checked_neg().ok_or_else(overflow)?)
            }
            ExprKind::Unary(UnOp::Not, x) => Value::Bool(!self.boolean(x)?),
            ExprKind::Binary(op, l, r) => {
                use BinOp::*;
                match op {
                    And => {
                        // both sides evaluated: expressions are pure
                        let (a, b) = (self.boolean(l)?, self.boolean(r)?);
                        Value::Bool(a && b)
                    }
                    Or => {
                        let (a, b) = (self.boolean(l)?, self.boolean(r)?);
                        Value::Bool(a || b)
                    }
                    Eq => Value::Bool(self.eval(l)? == self.eval(r)?),
                    Ne => Value::Bool(self.eval(l)? != self.eval(r)?),
                    _ => {
                        let (a, b) = (self.int(l)?, self.int(r)?);
                        match op {
                            Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
                            Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
                            Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
                            Lt => Value::Bool(a < b),
                            Le => Value::Bool(a <= b),
                            Gt => Value::Bool(a > b),
                            Ge => Value::Bool(a >= b),
                            _ => unreachable!(),
                        }
                    }
                }
            }
            ExprKind::Call(name, _) => self
                .calls
                .and_then(|c| c.get(&(e as *const Expr)))
                .copied()
                .ok_or_else(|| InterpError::UnknownFunction(name.clone()))?,
        })
    }
}
