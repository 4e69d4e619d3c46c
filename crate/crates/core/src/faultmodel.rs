//! Candidate error locations and placeholder instrumentation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::logic::Var;
use crate::normalizer::{
    render_location, stmt_at_mut, stmt_expr, walk_paths, LocationDescription, NodeRef, SourceMap,
    SourceMapError, StmtPath,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SiteKind {
    VarInit,
    AssignRhs,
    IfCond,
    WhileCond,
    ReturnExpr,
}

impl fmt::Display for SiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SiteKind::VarInit => "init",
            SiteKind::AssignRhs => "assign",
            SiteKind::IfCond => "if-cond",
            SiteKind::WhileCond => "while-cond",
            SiteKind::ReturnExpr => "return",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// 1-based, dense, in program order.
    pub id: usize,
    pub kind: SiteKind,
    pub node: NodeRef,
    pub sort: Sort,
    /// Normalized text of the site expression.
    pub expr: String,
    pub location: LocationDescription,
    /// Inside a loop body or loop-test prelude: one placeholder value has to
    /// serve every iteration.
    pub loop_scoped: bool,
}

impl Candidate {
    pub fn path(&self) -> &StmtPath {
        &self.node.path
    }
}

/// Every top-level expression of a normalized function, in program order.
pub fn enumerate_candidates(
    program: &Program,
    f: &FunctionDef,
    map: &SourceMap,
) -> Result<Vec<Candidate>, SourceMapError> {
    let mut sites = Vec::new();
    walk_paths(&f.body, &mut |path, s| {
        let Some(e) = stmt_expr(s) else {
            return;
        };
        let (kind, sort) = match &s.kind {
            StmtKind::VarDecl { sort, .. } => (SiteKind::VarInit, *sort),
            StmtKind::Assign { target, .. } => (SiteKind::AssignRhs, var_sort(program, f, target)),
            StmtKind::If { .. } => (SiteKind::IfCond, Sort::Bool),
            StmtKind::While { .. } => (SiteKind::WhileCond, Sort::Bool),
            StmtKind::Return(_) => (SiteKind::ReturnExpr, f.ret.sort().unwrap_or(Sort::Int)),
            StmtKind::Block(_) => return,
        };
        sites.push((path.clone(), kind, sort, e));
    });
    let mut out = Vec::with_capacity(sites.len());
    for (i, (path, kind, sort, e)) in sites.into_iter().enumerate() {
        let node = NodeRef {
            function: f.name.clone(),
            path,
        };
        let location = render_location(&node, e, map)?;
        out.push(Candidate {
            id: i + 1,
            kind,
            loop_scoped: node.path.in_loop(),
            node,
            sort,
            expr: e.to_string(),
            location,
        });
    }
    Ok(out)
}

fn var_sort(program: &Program, f: &FunctionDef, name: &str) -> Sort {
    if let Some(g) = program.global(name) {
        return g.sort;
    }
    let mut found = None;
    for s in &f.body.stmts {
        s.walk(&mut |s| {
            if let StmtKind::VarDecl { name: n, sort, .. } = &s.kind {
                if n == name {
                    found = Some(*sort);
                }
            }
        });
    }
    found.unwrap_or(Sort::Int)
}

/// Names a placeholder must not collide with.
fn used_names(program: &Program, f: &FunctionDef) -> BTreeSet<String> {
    let mut names: BTreeSet<String> = program.globals.iter().map(|g| g.name.clone()).collect();
    names.extend(program.functions.iter().map(|g| g.name.clone()));
    names.extend(f.params.iter().map(|p| p.name.clone()));
    for s in &f.body.stmts {
        s.walk(&mut |s| {
            if let StmtKind::VarDecl { name, .. } = &s.kind {
                names.insert(name.clone());
            }
        });
    }
    names
}

/// Copy of `f` with the candidate's site replaced by a fresh placeholder
/// variable, plus that variable.
pub fn instrument(program: &Program, f: &FunctionDef, cand: &Candidate) -> (FunctionDef, Var) {
    let used = used_names(program, f);
    let mut name = format!("c{}", cand.id);
    while used.contains(&name) {
        name.push('_');
    }
    let var = Var::new(name, cand.sort);
    let mut out = f.clone();
    let s = stmt_at_mut(&mut out.body, cand.path()).expect("candidate path resolves");
    let site = match &mut s.kind {
        StmtKind::VarDecl { init, .. } => init.as_mut(),
        StmtKind::Assign { value, .. } => Some(value),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Return(e) => e.as_mut(),
        StmtKind::Block(_) => None,
    }
    .expect("candidate site is an expression");
    *site = Expr::typed(ExprKind::Var(var.name.clone()), site.span.clone(), cand.sort);
    (out, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load, print_function};
    use crate::normalizer::normalize;
    use crate::span::SourceFile;

    const MAX: &str = "/*@ensures \\result >= b;@*/
int max(int a, int b) {
  int r = a;
  if(b > a)
    r = a; //correct: r = b
  return r; }
";

    fn setup(src: &str) -> (Program, SourceMap) {
        let file = SourceFile::new("t.mcl", src);
        let (np, map) = normalize(&load(&file).unwrap(), &file);
        (np.program, map)
    }

    #[test]
    fn max_has_four_candidates() {
        let (p, map) = setup(MAX);
        let cands = enumerate_candidates(&p, &p.functions[0], &map).unwrap();
        let got: Vec<(usize, SiteKind, &str, u32)> = cands
            .iter()
            .map(|c| (c.id, c.kind, c.expr.as_str(), c.location.original_line))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, SiteKind::VarInit, "a", 3),
                (2, SiteKind::IfCond, "b > a", 4),
                (3, SiteKind::AssignRhs, "a", 5),
                (4, SiteKind::ReturnExpr, "r", 6),
            ]
        );
        assert_eq!(cands[1].sort, Sort::Bool);
    }

    #[test]
    fn void_empty_body_has_no_candidates() {
        let (p, map) = setup("void f() { }");
        assert!(enumerate_candidates(&p, &p.functions[0], &map).unwrap().is_empty());
    }

    #[test]
    fn instrumenting_init_of_r() {
        let (p, map) = setup(MAX);
        let f = &p.functions[0];
        let cands = enumerate_candidates(&p, f, &map).unwrap();
        let (g, c) = instrument(&p, f, &cands[0]);
        assert_eq!(c, Var::int("c1"));
        assert!(print_function(&g).contains("int r = c1;"));
        assert_ne!(&g, f);
        let (g, c) = instrument(&p, f, &cands[1]);
        assert_eq!(c, Var::bool("c2"));
        assert!(print_function(&g).contains("if (c2)"));
    }

    #[test]
    fn placeholder_name_avoids_collisions() {
        let (p, map) = setup("/*@ ensures \\result >= 0; @*/ int f(int c1) { return c1; }");
        let f = &p.functions[0];
        let cands = enumerate_candidates(&p, f, &map).unwrap();
        let (_, c) = instrument(&p, f, &cands[0]);
        assert_eq!(c.name, "c1_");
    }
}
