//! Syntax tree of the mini contract language (MCL).
//!
//! The same tree is used for parsed source and for normalized code. The only
//! construct that parsed source never produces is a non-empty loop-condition
//! prelude (see [`StmtKind::While`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::span::Span;

/// Value sorts. MCL integers are mathematical integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
        })
    }
}

/// Declared return type of a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetType {
    Value(Sort),
    Void,
}

impl RetType {
    pub fn sort(self) -> Option<Sort> {
        match self {
            RetType::Value(s) => Some(s),
            RetType::Void => None,
        }
    }
}

impl fmt::Display for RetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetType::Value(s) => s.fmt(f),
            RetType::Void => f.write_str("void"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
}

impl Literal {
    pub fn sort(self) -> Sort {
        match self {
            Literal::Int(_) => Sort::Int,
            Literal::Bool(_) => Sort::Bool,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub globals: Vec<Global>,
    pub functions: Vec<FunctionDef>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&Global> {
        self.globals.iter().find(|g| g.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Global {
    pub name: String,
    pub sort: Sort,
    pub init: Option<Literal>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub sort: Sort,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: RetType,
    pub pure_: bool,
    /// Whether a `/*@ ... @*/` contract block was written at all.
    pub has_contract: bool,
    /// Conjunction of all `requires` clauses; empty means `true`.
    pub requires: Vec<Expr>,
    /// Conjunction of all `ensures` clauses; empty means `true`.
    pub ensures: Vec<Expr>,
    pub body: Block,
    pub span: Span,
}

impl FunctionDef {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `int x = e;` or `int x;` (the latter initializes to `0` / `false`).
    VarDecl {
        name: String,
        sort: Sort,
        init: Option<Expr>,
    },
    Assign {
        target: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<Block>,
    },
    /// `prelude` runs before every evaluation of `cond`; it is produced by
    /// the normalizer when a compound loop condition is flattened.
    While {
        invariant: Expr,
        prelude: Vec<Stmt>,
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Filled in by the typechecker.
    pub sort: Option<Sort>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    /// `\result`
    Result,
    /// `\old(g)`
    Old(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// C binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            span,
            sort: None,
        }
    }

    pub fn typed(kind: ExprKind, span: Span, sort: Sort) -> Self {
        Expr {
            kind,
            span,
            sort: Some(sort),
        }
    }

    /// Literal or variable: something the normalizer never hoists.
    pub fn is_atom(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_)
        )
    }

    /// At most one operator deep, with atomic operands; a call is flat when
    /// all arguments are atoms.
    pub fn is_flat(&self) -> bool {
        match &self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => true,
            ExprKind::Result | ExprKind::Old(_) => true,
            ExprKind::Unary(_, e) => e.is_atom(),
            ExprKind::Binary(_, l, r) => l.is_atom() && r.is_atom(),
            ExprKind::Call(_, args) => args.iter().all(Expr::is_atom),
        }
    }

    /// Visit this expression and all subexpressions, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn contains_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e.kind, ExprKind::Call(..)));
        found
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(&e.kind, ExprKind::Var(v) if v == name));
        found
    }
}

impl Block {
    pub fn new(stmts: Vec<Stmt>, span: Span) -> Self {
        Block { stmts, span }
    }
}

impl Stmt {
    /// Visit this statement and all nested statements (including loop
    /// preludes), parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.stmts.iter().for_each(|s| s.walk(f));
                if let Some(b) = else_branch {
                    b.stmts.iter().for_each(|s| s.walk(f));
                }
            }
            StmtKind::While { prelude, body, .. } => {
                prelude.iter().for_each(|s| s.walk(f));
                body.stmts.iter().for_each(|s| s.walk(f));
            }
            StmtKind::Block(b) => b.stmts.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }

    /// Variable written by this statement itself (not nested ones).
    pub fn assigned_var(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::VarDecl { name, .. } => Some(name),
            StmtKind::Assign { target, .. } => Some(target),
            _ => None,
        }
    }
}

/// Names assigned anywhere in `stmts`, in first-occurrence order.
pub fn assigned_vars(stmts: &[Stmt]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in stmts {
        s.walk(&mut |s| {
            if let Some(v) = s.assigned_var() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        });
    }
    out
}

impl Expr {
    /// Clear spans and sorts, leaving only the tree shape.
    pub fn erase_spans(&mut self) {
        self.span = Span::dummy();
        self.sort = None;
        match &mut self.kind {
            ExprKind::Unary(_, x) => x.erase_spans(),
            ExprKind::Binary(_, l, r) => {
                l.erase_spans();
                r.erase_spans();
            }
            ExprKind::Call(_, args) => args.iter_mut().for_each(Expr::erase_spans),
            _ => {}
        }
    }
}

impl Block {
    pub fn erase_spans(&mut self) {
        self.span = Span::dummy();
        self.stmts.iter_mut().for_each(Stmt::erase_spans);
    }
}

impl Stmt {
    pub fn erase_spans(&mut self) {
        self.span = Span::dummy();
        match &mut self.kind {
            StmtKind::VarDecl { init, .. } => init.iter_mut().for_each(Expr::erase_spans),
            StmtKind::Assign { value, .. } => value.erase_spans(),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                cond.erase_spans();
                then_branch.erase_spans();
                else_branch.iter_mut().for_each(Block::erase_spans);
            }
            StmtKind::While {
                invariant,
                prelude,
                cond,
                body,
            } => {
                invariant.erase_spans();
                prelude.iter_mut().for_each(Stmt::erase_spans);
                cond.erase_spans();
                body.erase_spans();
            }
            StmtKind::Return(e) => e.iter_mut().for_each(Expr::erase_spans),
            StmtKind::Block(b) => b.erase_spans(),
        }
    }
}

impl FunctionDef {
    pub fn erase_spans(&mut self) {
        self.span = Span::dummy();
        self.params.iter_mut().for_each(|p| p.span = Span::dummy());
        self.requires.iter_mut().for_each(Expr::erase_spans);
        self.ensures.iter_mut().for_each(Expr::erase_spans);
        self.body.erase_spans();
    }
}

impl Program {
    /// Structural comparison helper: spans and inferred sorts are dropped.
    pub fn erase_spans(&mut self) {
        self.globals.iter_mut().for_each(|g| g.span = Span::dummy());
        self.functions.iter_mut().for_each(FunctionDef::erase_spans);
    }
}
