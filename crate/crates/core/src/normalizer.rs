//! Three-address normalization with a source map back to the original text.
//!
//! Every compound operand is hoisted into a fresh `tmp_k` declaration so that
//! each statement carries a single flat expression. Calls end up as the full
//! right-hand side of an assignment or declaration. A compound loop condition
//! is flattened into the loop's prelude, which is re-run before each test.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::printer::stmt_header;
use crate::frontend::typecheck::{is_reserved_name, TypedProgram};
use crate::span::{SourceFile, Span};

/// One step of a path from a function body to a nested statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathStep {
    Stmt(usize),
    Then,
    Else,
    Prelude,
    Body,
    Inner,
}

/// Address of a statement inside a function body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StmtPath(pub Vec<PathStep>);

impl StmtPath {
    pub fn child(&self, steps: &[PathStep]) -> StmtPath {
        let mut v = self.0.clone();
        v.extend_from_slice(steps);
        StmtPath(v)
    }

    /// Whether the addressed statement sits inside a loop prelude or body.
    pub fn in_loop(&self) -> bool {
        self.0
            .iter()
            .any(|s| matches!(s, PathStep::Prelude | PathStep::Body))
    }
}

impl fmt::Display for StmtPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                PathStep::Stmt(i) => i.to_string(),
                PathStep::Then => "then".into(),
                PathStep::Else => "else".into(),
                PathStep::Prelude => "prelude".into(),
                PathStep::Body => "body".into(),
                PathStep::Inner => "block".into(),
            })
            .collect();
        f.write_str(&parts.join("."))
    }
}

pub fn stmt_at<'a>(body: &'a Block, path: &StmtPath) -> Option<&'a Stmt> {
    let mut stmts: &'a [Stmt] = &body.stmts;
    let mut cur: Option<&'a Stmt> = None;
    for step in &path.0 {
        match (*step, cur.map(|s| &s.kind)) {
            (PathStep::Stmt(i), _) => cur = Some(stmts.get(i)?),
            (PathStep::Then, Some(StmtKind::If { then_branch, .. })) => stmts = &then_branch.stmts,
            (PathStep::Else, Some(StmtKind::If { else_branch, .. })) => {
                stmts = &else_branch.as_ref()?.stmts
            }
            (PathStep::Prelude, Some(StmtKind::While { prelude, .. })) => stmts = prelude,
            (PathStep::Body, Some(StmtKind::While { body, .. })) => stmts = &body.stmts,
            (PathStep::Inner, Some(StmtKind::Block(b))) => stmts = &b.stmts,
            _ => return None,
        }
    }
    cur
}

pub fn stmt_at_mut<'a>(body: &'a mut Block, path: &StmtPath) -> Option<&'a mut Stmt> {
    let (last, prefix) = path.0.split_last()?;
    let PathStep::Stmt(idx) = *last else {
        return None;
    };
    let mut stmts: &'a mut Vec<Stmt> = &mut body.stmts;
    let mut i = 0;
    while i < prefix.len() {
        let PathStep::Stmt(j) = prefix[i] else {
            return None;
        };
        let s = stmts.get_mut(j)?;
        let step = *prefix.get(i + 1)?;
        stmts = match (step, &mut s.kind) {
            (PathStep::Then, StmtKind::If { then_branch, .. }) => &mut then_branch.stmts,
            (PathStep::Else, StmtKind::If { else_branch, .. }) => &mut else_branch.as_mut()?.stmts,
            (PathStep::Prelude, StmtKind::While { prelude, .. }) => prelude,
            (PathStep::Body, StmtKind::While { body, .. }) => &mut body.stmts,
            (PathStep::Inner, StmtKind::Block(b)) => &mut b.stmts,
            _ => return None,
        };
        i += 2;
    }
    stmts.get_mut(idx)
}

/// Visit every statement of `body` with its path, in execution order
/// (a loop's prelude before its condition and body).
pub fn walk_paths<'a>(body: &'a Block, f: &mut impl FnMut(&StmtPath, &'a Stmt)) {
    fn go<'a>(stmts: &'a [Stmt], base: &StmtPath, f: &mut impl FnMut(&StmtPath, &'a Stmt)) {
        for (i, s) in stmts.iter().enumerate() {
            let here = base.child(&[PathStep::Stmt(i)]);
            if let StmtKind::While { prelude, .. } = &s.kind {
                go(prelude, &here.child(&[PathStep::Prelude]), f);
            }
            f(&here, s);
            match &s.kind {
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    go(&then_branch.stmts, &here.child(&[PathStep::Then]), f);
                    if let Some(b) = else_branch {
                        go(&b.stmts, &here.child(&[PathStep::Else]), f);
                    }
                }
                StmtKind::While { body, .. } => go(&body.stmts, &here.child(&[PathStep::Body]), f),
                StmtKind::Block(b) => go(&b.stmts, &here.child(&[PathStep::Inner]), f),
                _ => {}
            }
        }
    }
    go(&body.stmts, &StmtPath::default(), f);
}

/// The single top-level expression a normalized statement carries.
pub fn stmt_expr(s: &Stmt) -> Option<&Expr> {
    match &s.kind {
        StmtKind::VarDecl { init, .. } => init.as_ref(),
        StmtKind::Assign { value, .. } => Some(value),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Return(e) => e.as_ref(),
        StmtKind::Block(_) => None,
    }
}

/// A program whose function bodies are in normalized form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormProgram {
    pub program: Program,
}

impl NormProgram {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.program.function(name)
    }
}

/// Node of a normalized program: a statement inside a named function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub function: String,
    pub path: StmtPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapEntry {
    /// Span of the original statement (or subexpression, for temporaries).
    pub stmt_span: Span,
    /// Span of the original expression the statement's flat expression
    /// stands for, when it has one.
    pub expr_span: Option<Span>,
    /// Rendering of the normalized statement.
    pub normalized: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMap {
    pub source: SourceFile,
    entries: BTreeMap<NodeRef, MapEntry>,
}

/// Where a normalized expression came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationDescription {
    pub normalized_text: String,
    pub original_line: u32,
    pub original_cols: (u32, u32),
    pub original_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceMapError {
    #[error("no source-map entry for {0}")]
    UnknownNode(String),
}

impl SourceMap {
    pub fn get(&self, node: &NodeRef) -> Option<&MapEntry> {
        self.entries.get(node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&NodeRef, &MapEntry)> {
        self.entries.iter()
    }

    /// Normalized function with original line numbers in the margin
    /// (`origLine | normalized stmt`).
    pub fn render_function(&self, f: &FunctionDef) -> String {
        let mut lines = Vec::new();
        walk_paths(&f.body, &mut |path, s| {
            let node = NodeRef {
                function: f.name.clone(),
                path: path.clone(),
            };
            let line = self
                .entries
                .get(&node)
                .map(|e| e.stmt_span.start_line.to_string())
                .unwrap_or_else(|| "?".into());
            let depth = path
                .0
                .iter()
                .filter(|p| !matches!(p, PathStep::Stmt(_)))
                .count();
            let prefix = if path.0.contains(&PathStep::Prelude) {
                "(loop test) "
            } else {
                ""
            };
            let text = match &s.kind {
                StmtKind::If { else_branch, .. } => {
                    if else_branch.is_some() {
                        format!("{} {{ .. }} else {{ .. }}", stmt_header(s))
                    } else {
                        format!("{} {{ .. }}", stmt_header(s))
                    }
                }
                StmtKind::While { invariant, .. } => {
                    format!("{} {{ .. }}  /*@ loop invariant {invariant}; @*/", stmt_header(s))
                }
                StmtKind::Block(_) => "{ .. }".to_string(),
                _ => format!("{};", stmt_header(s)),
            };
            lines.push(format!("{line:>5} | {}{prefix}{text}", "  ".repeat(depth)));
        });
        let mut out = format!("function {}:\n", f.name);
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}

/// Resolve a normalized statement's expression to its original location.
pub fn render_location(
    node: &NodeRef,
    expr: &Expr,
    map: &SourceMap,
) -> Result<LocationDescription, SourceMapError> {
    let entry = map
        .entries
        .get(node)
        .ok_or_else(|| SourceMapError::UnknownNode(format!("{}@{}", node.function, node.path)))?;
    let span = entry.expr_span.as_ref().unwrap_or(&entry.stmt_span);
    Ok(LocationDescription {
        normalized_text: expr.to_string(),
        original_line: span.start_line,
        original_cols: (span.start_col, span.end_col),
        original_text: squash_ws(map.source.snippet(span)),
    })
}

fn squash_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn normalize(p: &TypedProgram, source: &SourceFile) -> (NormProgram, SourceMap) {
    let mut program = p.program().clone();
    for f in &mut program.functions {
        *f = normalize_function(f);
    }
    let map = build_source_map(&program, source);
    (NormProgram { program }, map)
}

fn build_source_map(program: &Program, source: &SourceFile) -> SourceMap {
    let mut entries = BTreeMap::new();
    for f in &program.functions {
        walk_paths(&f.body, &mut |path, s| {
            entries.insert(
                NodeRef {
                    function: f.name.clone(),
                    path: path.clone(),
                },
                MapEntry {
                    stmt_span: s.span.clone(),
                    expr_span: stmt_expr(s).map(|e| e.span.clone()),
                    normalized: stmt_header(s),
                },
            );
        });
    }
    SourceMap {
        source: source.clone(),
        entries,
    }
}

/// Normalize one function body. Idempotent; temporaries continue numbering
/// after any `tmp_k` already present.
pub fn normalize_function(f: &FunctionDef) -> FunctionDef {
    let mut next = 0;
    for s in &f.body.stmts {
        s.walk(&mut |s| {
            if let StmtKind::VarDecl { name, .. } = &s.kind {
                if is_reserved_name(name) {
                    let k: usize = name[4..].parse().unwrap_or(0);
                    next = next.max(k + 1);
                }
            }
        });
    }
    let mut n = Normalizer { next };
    let mut out = f.clone();
    out.body = n.block(&f.body);
    out
}

struct Normalizer {
    next: usize,
}

impl Normalizer {
    fn block(&mut self, b: &Block) -> Block {
        let mut stmts = Vec::new();
        for s in &b.stmts {
            self.stmt(s, &mut stmts);
        }
        Block::new(stmts, b.span.clone())
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<Stmt>) {
        let kind = match &s.kind {
            StmtKind::VarDecl { name, sort, init } => StmtKind::VarDecl {
                name: name.clone(),
                sort: *sort,
                init: init.as_ref().map(|e| self.flatten(e, true, out)),
            },
            StmtKind::Assign { target, value } => StmtKind::Assign {
                target: target.clone(),
                value: self.flatten(value, true, out),
            },
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => StmtKind::If {
                cond: self.flatten(cond, false, out),
                then_branch: self.block(then_branch),
                else_branch: else_branch.as_ref().map(|b| self.block(b)),
            },
            StmtKind::While {
                invariant,
                prelude,
                cond,
                body,
            } => {
                let mut pre = Vec::new();
                for p in prelude {
                    self.stmt(p, &mut pre);
                }
                let cond = self.flatten(cond, false, &mut pre);
                StmtKind::While {
                    invariant: invariant.clone(),
                    prelude: pre,
                    cond,
                    body: self.block(body),
                }
            }
            StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(|e| self.flatten(e, false, out))),
            StmtKind::Block(b) => StmtKind::Block(self.block(b)),
        };
        out.push(Stmt {
            kind,
            span: s.span.clone(),
        });
    }

    /// Flat version of `e`; hoisted operands are appended to `out`.
    /// `call_ok` allows a call to remain at the top.
    fn flatten(&mut self, e: &Expr, call_ok: bool, out: &mut Vec<Stmt>) -> Expr {
        let kind = match &e.kind {
            ExprKind::Unary(op, x) => ExprKind::Unary(*op, Box::new(self.atomize(x, out))),
            ExprKind::Binary(op, l, r) => {
                let l = self.atomize(l, out);
                let r = self.atomize(r, out);
                ExprKind::Binary(*op, Box::new(l), Box::new(r))
            }
            ExprKind::Call(name, args) => {
                let args = args.iter().map(|a| self.atomize(a, out)).collect();
                let call = Expr {
                    kind: ExprKind::Call(name.clone(), args),
                    span: e.span.clone(),
                    sort: e.sort,
                };
                if call_ok {
                    return call;
                }
                return self.hoist(call, out);
            }
            _ => return e.clone(),
        };
        Expr {
            kind,
            span: e.span.clone(),
            sort: e.sort,
        }
    }

    fn atomize(&mut self, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        if e.is_atom() {
            return e.clone();
        }
        let flat = self.flatten(e, true, out);
        self.hoist(flat, out)
    }

    fn hoist(&mut self, flat: Expr, out: &mut Vec<Stmt>) -> Expr {
        let name = format!("tmp_{}", self.next);
        self.next += 1;
        let sort = flat.sort.expect("normalizer runs on typed programs");
        let span = flat.span.clone();
        out.push(Stmt {
            kind: StmtKind::VarDecl {
                name: name.clone(),
                sort,
                init: Some(flat),
            },
            span: span.clone(),
        });
        Expr::typed(ExprKind::Var(name), span, sort)
    }
}
