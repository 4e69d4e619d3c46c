//! Weakest-precondition generation of proof obligations.
//!
//! The transformer works on a list of goals rather than a single formula:
//! each goal is a pending obligation that is pushed backwards through the
//! statements preceding the point where it arises. Loops and calls spawn
//! new goals; at function entry every goal becomes one obligation
//! `requires ==> goal`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::ast::*;
use crate::logic::{build_query, BinKind, Formula, LogicError, QuantifiedQuery, Var};
use crate::normalizer::{PathStep, StmtPath};
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObligationKind {
    PostHolds,
    LoopInvInit,
    LoopInvPreserved,
    CalleePreHolds,
}

impl ObligationKind {
    pub fn tag(self) -> &'static str {
        match self {
            ObligationKind::PostHolds => "post",
            ObligationKind::LoopInvInit => "inv_init",
            ObligationKind::LoopInvPreserved => "inv_preserved",
            ObligationKind::CalleePreHolds => "callee_pre",
        }
    }
}

impl fmt::Display for ObligationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObligationKind::PostHolds => "PostHolds",
            ObligationKind::LoopInvInit => "LoopInvInit",
            ObligationKind::LoopInvPreserved => "LoopInvPreserved",
            ObligationKind::CalleePreHolds => "CalleePreHolds",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    /// `function:kind:index`, index counted per kind.
    pub id: String,
    pub kind: ObligationKind,
    /// Span of the construct the obligation stems from.
    pub span: Span,
    pub query: QuantifiedQuery,
}

impl Obligation {
    pub fn body(&self) -> &Formula {
        &self.query.body
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcError {
    #[error("call to `{0}`, which is not declared pure")]
    NonPureCallee(String),
    #[error("call to unknown function `{0}`")]
    UnknownCallee(String),
    #[error("unbound variable `{0}` during VC generation")]
    Unbound(String),
    #[error("call outside an assignment; function is not normalized")]
    NotNormalized,
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A goal still being pushed backwards. Goals with equal keys stem from the
/// same construct and are merged at branch joins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub kind: ObligationKind,
    pub path: StmtPath,
    pub span: Span,
    pub formula: Formula,
}

impl Goal {
    fn key(&self) -> (StmtPath, ObligationKind) {
        (self.path.clone(), self.kind)
    }
}

struct Wp<'a> {
    program: &'a Program,
    func: &'a FunctionDef,
    sorts: BTreeMap<String, Sort>,
    fresh: Vec<Var>,
    counter: usize,
}

impl<'a> Wp<'a> {
    fn new(program: &'a Program, func: &'a FunctionDef, placeholder: Option<&Var>) -> Self {
        let mut sorts = BTreeMap::new();
        for g in &program.globals {
            sorts.insert(g.name.clone(), g.sort);
        }
        for p in &func.params {
            sorts.insert(p.name.clone(), p.sort);
        }
        for s in &func.body.stmts {
            s.walk(&mut |s| {
                if let StmtKind::VarDecl { name, sort, .. } = &s.kind {
                    sorts.insert(name.clone(), *sort);
                }
            });
        }
        if let Some(c) = placeholder {
            sorts.insert(c.name.clone(), c.sort);
        }
        Wp {
            program,
            func,
            sorts,
            fresh: Vec::new(),
            counter: 0,
        }
    }

    fn fresh(&mut self, base: &str, tag: &str, sort: Sort) -> Var {
        let v = Var::new(format!("{base}${tag}{}", self.counter), sort);
        self.counter += 1;
        self.fresh.push(v.clone());
        v
    }

    fn var(&self, name: &str) -> Result<Formula, VcError> {
        let sort = self
            .sorts
            .get(name)
            .ok_or_else(|| VcError::Unbound(name.to_string()))?;
        Ok(Formula::Var(Var::new(name, *sort)))
    }

    /// Translate a call-free expression.
    fn expr(&self, e: &Expr) -> Result<Formula, VcError> {
        self.expr_in(e, None)
    }

    /// `result` is what `\result` stands for, if anything.
    fn expr_in(&self, e: &Expr, result: Option<&Formula>) -> Result<Formula, VcError> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Formula::Int(*v),
            ExprKind::Bool(b) => Formula::Bool(*b),
            ExprKind::Var(n) => self.var(n)?,
            ExprKind::Result => result
                .cloned()
                .ok_or_else(|| VcError::Unbound("\\result".into()))?,
            ExprKind::Old(g) => {
                let sort = self.sorts.get(g).ok_or_else(|| VcError::Unbound(g.clone()))?;
                Formula::Var(Var::new(format!("{g}$pre"), *sort))
            }
            ExprKind::Unary(UnOp::Neg, x) => Formula::neg(self.expr_in(x, result)?),
            ExprKind::Unary(UnOp::Not, x) => Formula::not(self.expr_in(x, result)?),
            ExprKind::Binary(op, l, r) => {
                let (l, r) = (self.expr_in(l, result)?, self.expr_in(r, result)?);
                match op {
                    BinOp::And => Formula::and(vec![l, r]),
                    BinOp::Or => Formula::or(vec![l, r]),
                    _ => Formula::binary(bin_kind(*op), l, r),
                }
            }
            ExprKind::Call(..) => return Err(VcError::NotNormalized),
        })
    }

    fn contract(&self, parts: &[Expr], result: Option<&Formula>) -> Result<Formula, VcError> {
        let parts = parts
            .iter()
            .map(|e| self.expr_in(e, result))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Formula::and(parts))
    }

    fn block(
        &mut self,
        stmts: &[Stmt],
        base: &StmtPath,
        mut goals: Vec<Goal>,
    ) -> Result<Vec<Goal>, VcError> {
        for (i, s) in stmts.iter().enumerate().rev() {
            goals = self.stmt(s, &base.child(&[PathStep::Stmt(i)]), goals)?;
        }
        Ok(goals)
    }

    fn stmt(&mut self, s: &Stmt, path: &StmtPath, goals: Vec<Goal>) -> Result<Vec<Goal>, VcError> {
        match &s.kind {
            StmtKind::VarDecl { name, sort, init } => match init {
                Some(e) => self.assign(name, e, s, path, goals),
                None => {
                    let v = match sort {
                        Sort::Int => Formula::Int(0),
                        Sort::Bool => Formula::Bool(false),
                    };
                    Ok(subst_goals(goals, name, &v))
                }
            },
            StmtKind::Assign { target, value } => self.assign(target, value, s, path, goals),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let b = self.expr(cond)?;
                let g1 = self.block(&then_branch.stmts, &path.child(&[PathStep::Then]), goals.clone())?;
                let g2 = match else_branch {
                    Some(eb) => self.block(&eb.stmts, &path.child(&[PathStep::Else]), goals)?,
                    None => goals,
                };
                Ok(merge_branches(&b, g1, g2))
            }
            StmtKind::While {
                invariant,
                prelude,
                cond,
                body,
            } => {
                let inv = self.expr(invariant)?;
                let b = self.expr(cond)?;
                let preserved = Goal {
                    kind: ObligationKind::LoopInvPreserved,
                    path: path.clone(),
                    span: s.span.clone(),
                    formula: inv.clone(),
                };
                let body_goals = self.block(&body.stmts, &path.child(&[PathStep::Body]), vec![preserved])?;
                let mut after_test: Vec<Goal> = goals
                    .into_iter()
                    .map(|g| map_goal(g, |f| Formula::implies(Formula::not(b.clone()), f)))
                    .collect();
                after_test.extend(
                    body_goals
                        .into_iter()
                        .map(|g| map_goal(g, |f| Formula::implies(b.clone(), f))),
                );
                let head = self.block(prelude, &path.child(&[PathStep::Prelude]), after_test)?;
                let mut frame = assigned_vars(prelude);
                for v in assigned_vars(&body.stmts) {
                    if !frame.contains(&v) {
                        frame.push(v);
                    }
                }
                let mut havoc = BTreeMap::new();
                for v in &frame {
                    let sort = self.sorts[v];
                    let t = self.fresh(v, "h", sort);
                    havoc.insert(v.clone(), Formula::Var(t));
                }
                let mut out: Vec<Goal> = head
                    .into_iter()
                    .map(|g| {
                        map_goal(g, |f| {
                            Formula::implies(inv.clone(), f).subst_unchecked(&havoc)
                        })
                    })
                    .collect();
                out.push(Goal {
                    kind: ObligationKind::LoopInvInit,
                    path: path.clone(),
                    span: s.span.clone(),
                    formula: inv,
                });
                Ok(out)
            }
            StmtKind::Return(e) => {
                let result = match e {
                    Some(e) => Some(self.expr(e)?),
                    None => None,
                };
                let post = self.contract(&self.func.ensures, result.as_ref())?;
                Ok(vec![Goal {
                    kind: ObligationKind::PostHolds,
                    path: StmtPath::default(),
                    span: self.func.span.clone(),
                    formula: post,
                }])
            }
            StmtKind::Block(b) => self.block(&b.stmts, &path.child(&[PathStep::Inner]), goals),
        }
    }

    fn assign(
        &mut self,
        target: &str,
        value: &Expr,
        s: &Stmt,
        path: &StmtPath,
        goals: Vec<Goal>,
    ) -> Result<Vec<Goal>, VcError> {
        let ExprKind::Call(name, args) = &value.kind else {
            let v = self.expr(value)?;
            return Ok(subst_goals(goals, target, &v));
        };
        let callee = self
            .program
            .function(name)
            .ok_or_else(|| VcError::UnknownCallee(name.clone()))?;
        if !callee.pure_ {
            return Err(VcError::NonPureCallee(name.clone()));
        }
        let ret = callee.ret.sort().ok_or(VcError::NotNormalized)?;
        let mut formals = BTreeMap::new();
        for (p, a) in callee.params.iter().zip(args) {
            formals.insert(p.name.clone(), self.expr(a)?);
        }
        let t = Formula::Var(self.fresh(name, "r", ret));
        // A pure callee leaves globals unchanged, so `\old(g)` is `g`.
        let mut binding = formals;
        for g in &self.program.globals {
            binding.insert(format!("{}$pre", g.name), Formula::Var(Var::new(&g.name, g.sort)));
        }
        let callee_ctx = Wp::new(self.program, callee, None);
        let pre = callee_ctx
            .contract(&callee.requires, None)?
            .subst_unchecked(&binding);
        let post = callee_ctx
            .contract(&callee.ensures, Some(&t))?
            .subst_unchecked(&binding);
        let mut out: Vec<Goal> = subst_goals(goals, target, &t)
            .into_iter()
            .map(|g| map_goal(g, |f| Formula::implies(post.clone(), f)))
            .collect();
        out.push(Goal {
            kind: ObligationKind::CalleePreHolds,
            path: path.clone(),
            span: s.span.clone(),
            formula: pre,
        });
        Ok(out)
    }
}

fn bin_kind(op: BinOp) -> BinKind {
    match op {
        BinOp::Add => BinKind::Add,
        BinOp::Sub => BinKind::Sub,
        BinOp::Mul => BinKind::Mul,
        BinOp::Lt => BinKind::Lt,
        BinOp::Le => BinKind::Le,
        BinOp::Gt => BinKind::Gt,
        BinOp::Ge => BinKind::Ge,
        BinOp::Eq => BinKind::Eq,
        BinOp::Ne => BinKind::Ne,
        BinOp::And | BinOp::Or => unreachable!("connectives are handled separately"),
    }
}

fn map_goal(g: Goal, f: impl FnOnce(Formula) -> Formula) -> Goal {
    Goal {
        formula: f(g.formula),
        ..g
    }
}

fn subst_goals(goals: Vec<Goal>, name: &str, value: &Formula) -> Vec<Goal> {
    let binding = BTreeMap::from([(name.to_string(), value.clone())]);
    goals
        .into_iter()
        .map(|g| map_goal(g, |f| f.subst_unchecked(&binding)))
        .collect()
}

fn merge_branches(b: &Formula, then_goals: Vec<Goal>, else_goals: Vec<Goal>) -> Vec<Goal> {
    let mut else_by_key: BTreeMap<_, Goal> = else_goals.into_iter().map(|g| (g.key(), g)).collect();
    let mut out = Vec::new();
    for g in then_goals {
        let f1 = Formula::implies(b.clone(), g.formula.clone());
        match else_by_key.remove(&g.key()) {
            Some(e) => {
                let f2 = Formula::implies(Formula::not(b.clone()), e.formula);
                out.push(map_goal(g, |_| Formula::and(vec![f1, f2])));
            }
            None => out.push(map_goal(g, |_| f1)),
        }
    }
    for (_, e) in else_by_key {
        out.push(map_goal(e, |f| Formula::implies(Formula::not(b.clone()), f)));
    }
    out
}

/// `wp(stmts, post)` for a statement list of `func`, returned together with
/// the side goals spawned by loops and calls.
pub fn wp(
    program: &Program,
    func: &FunctionDef,
    stmts: &[Stmt],
    post: Formula,
) -> Result<(Formula, Vec<Goal>), VcError> {
    let mut ctx = Wp::new(program, func, None);
    let goal = Goal {
        kind: ObligationKind::PostHolds,
        path: StmtPath::default(),
        span: func.span.clone(),
        formula: post,
    };
    let goals = ctx.block(stmts, &StmtPath::default(), vec![goal])?;
    let mut main = Formula::Bool(true);
    let mut side = Vec::new();
    for g in goals {
        if g.kind == ObligationKind::PostHolds {
            main = g.formula;
        } else {
            side.push(g);
        }
    }
    Ok((main, side))
}

/// Proof obligations of a normalized function. `placeholder` names the
/// variable an instrumented site was replaced by.
pub fn gen_obligations(
    program: &Program,
    func: &FunctionDef,
    placeholder: Option<&Var>,
) -> Result<Vec<Obligation>, VcError> {
    let mut ctx = Wp::new(program, func, placeholder);
    let initial = if func.ret == RetType::Void {
        vec![Goal {
            kind: ObligationKind::PostHolds,
            path: StmtPath::default(),
            span: func.span.clone(),
            formula: ctx.contract(&func.ensures, None)?,
        }]
    } else {
        Vec::new()
    };
    let mut goals = ctx.block(&func.body.stmts, &StmtPath::default(), initial)?;
    goals.sort_by_key(Goal::key);

    let mut antecedent = vec![ctx.contract(&func.requires, None)?];
    let mut olds = BTreeSet::new();
    for e in &func.ensures {
        e.walk(&mut |e| {
            if let ExprKind::Old(g) = &e.kind {
                olds.insert(g.clone());
            }
        });
    }
    let mut aux = ctx.fresh.clone();
    for g in &olds {
        let v = Var::new(format!("{g}$pre"), ctx.sorts[g]);
        antecedent.push(Formula::eq(Formula::Var(v.clone()), ctx.var(g)?));
        aux.push(v);
    }
    let antecedent = Formula::and(antecedent);

    let inputs: Vec<Var> = program
        .globals
        .iter()
        .map(|g| Var::new(&g.name, g.sort))
        .chain(func.params.iter().map(|p| Var::new(&p.name, p.sort)))
        .collect();

    let mut counts: BTreeMap<ObligationKind, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(goals.len());
    for g in goals {
        let n = counts.entry(g.kind).or_default();
        let id = format!("{}:{}:{}", func.name, g.kind.tag(), n);
        *n += 1;
        let body = Formula::implies(antecedent.clone(), g.formula);
        let query = build_query(body, &inputs, placeholder, &aux)?;
        out.push(Obligation {
            id,
            kind: g.kind,
            span: g.span,
            query,
        });
    }
    Ok(out)
}
