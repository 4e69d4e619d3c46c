//! Single-site mutants of normalized functions.
//!
//! A mutant replaces the expression of one statement by another flat
//! expression of the same sort, built from the site's own operands, the
//! function parameters and a few literals. Statement structure is never
//! touched, so source-map paths stay valid for the mutant.

use crate::frontend::ast::*;
use crate::normalizer::{stmt_at_mut, stmt_expr, walk_paths, StmtPath};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub function: FunctionDef,
    /// Path of the mutated statement.
    pub site: StmtPath,
    pub original: String,
    pub replacement: String,
}

const COMPARISONS: [BinOp; 6] = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];
const INT_LITERALS: [i64; 3] = [0, 1, -1];

/// All mutants of `f`, sites in execution order, deduplicated per site.
pub fn mutants(f: &FunctionDef) -> Vec<Mutant> {
    let mut sites: Vec<(StmtPath, Expr)> = Vec::new();
    walk_paths(&f.body, &mut |path, s| {
        if let Some(e) = stmt_expr(s) {
            sites.push((path.clone(), e.clone()));
        }
    });
    let mut out = Vec::new();
    for (path, e) in sites {
        let original = e.to_string();
        let mut seen = vec![original.clone()];
        for r in replacements(f, &e) {
            let text = r.to_string();
            if seen.contains(&text) {
                continue;
            }
            seen.push(text.clone());
            let mut g = f.clone();
            let s = stmt_at_mut(&mut g.body, &path).expect("site path resolves");
            match &mut s.kind {
                StmtKind::VarDecl { init: Some(x), .. }
                | StmtKind::Assign { value: x, .. }
                | StmtKind::If { cond: x, .. }
                | StmtKind::While { cond: x, .. }
                | StmtKind::Return(Some(x)) => *x = r,
                _ => unreachable!("site carries an expression"),
            }
            out.push(Mutant {
                function: g,
                site: path.clone(),
                original: original.clone(),
                replacement: text,
            });
        }
    }
    out
}

fn replacements(f: &FunctionDef, e: &Expr) -> Vec<Expr> {
    let sort = e.sort.expect("typed expression");
    let span = e.span.clone();
    let atom = |k: ExprKind| Expr::typed(k, span.clone(), sort);
    let mut out = Vec::new();

    // Operands of the site, then parameters, then literals.
    let mut atoms: Vec<Expr> = Vec::new();
    e.walk(&mut |x| {
        if x.is_atom() && x.sort == Some(sort) && !atoms.contains(x) {
            atoms.push(x.clone());
        }
    });
    for p in f.params.iter().filter(|p| p.sort == sort) {
        let v = atom(ExprKind::Var(p.name.clone()));
        if !atoms.iter().any(|a| a.kind == v.kind) {
            atoms.push(v);
        }
    }
    match sort {
        Sort::Int => atoms.extend(INT_LITERALS.map(|n| atom(ExprKind::Int(n)))),
        Sort::Bool => atoms.extend([true, false].map(|b| atom(ExprKind::Bool(b)))),
    }
    out.extend(atoms);

    match &e.kind {
        ExprKind::Int(n) => {
            out.push(atom(ExprKind::Int(n + 1)));
            out.push(atom(ExprKind::Int(n - 1)));
        }
        ExprKind::Var(_) => {
            let op = if sort == Sort::Int { UnOp::Neg } else { UnOp::Not };
            out.push(atom(ExprKind::Unary(op, Box::new(e.clone()))));
        }
        ExprKind::Unary(_, x) => out.push((**x).clone()),
        ExprKind::Binary(op, l, r) => {
            let bin = |op: BinOp, l: &Expr, r: &Expr| {
                atom(ExprKind::Binary(op, Box::new(l.clone()), Box::new(r.clone())))
            };
            match op {
                BinOp::Add => {
                    out.push(bin(BinOp::Sub, l, r));
                    out.push(bin(BinOp::Sub, r, l));
                }
                BinOp::Sub => {
                    out.push(bin(BinOp::Add, l, r));
                    out.push(bin(BinOp::Sub, r, l));
                }
                BinOp::Mul => out.push(bin(BinOp::Add, l, r)),
                BinOp::And => out.push(bin(BinOp::Or, l, r)),
                BinOp::Or => out.push(bin(BinOp::And, l, r)),
                cmp => {
                    for other in COMPARISONS.iter().filter(|&o| o != cmp) {
                        out.push(bin(*other, l, r));
                    }
                    out.push(bin(*cmp, r, l));
                }
            }
        }
        ExprKind::Bool(_) | ExprKind::Call(..) | ExprKind::Result | ExprKind::Old(_) => {}
    }
    out.retain(|x| x.is_flat());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;
    use crate::normalizer::normalize;
    use crate::span::SourceFile;

    fn norm(src: &str, name: &str) -> FunctionDef {
        let file = SourceFile::new("t.mcl", src);
        let (p, _) = normalize(&load(&file).unwrap(), &file);
        p.function(name).unwrap().clone()
    }

    #[test]
    fn mutants_of_a_comparison() {
        let f = norm("/*@ ensures true; @*/ bool lt(int a, int b) { return a < b; }", "lt");
        let texts: Vec<String> = mutants(&f).into_iter().map(|m| m.replacement).collect();
        for want in ["a <= b", "a > b", "a >= b", "a == b", "a != b", "b < a", "true", "false"] {
            assert!(texts.iter().any(|t| t == want), "{want} missing from {texts:?}");
        }
        assert!(!texts.iter().any(|t| t == "a < b"));
    }

    #[test]
    fn mutants_keep_sites_flat_and_unique() {
        let f = norm(
            "/*@ ensures true; @*/ int g(int x, int y) { int r = x - y; if (r > 0) r = -r; return r; }",
            "g",
        );
        let ms = mutants(&f);
        for (i, m) in ms.iter().enumerate() {
            let s = crate::normalizer::stmt_at(&m.function.body, &m.site).unwrap();
            assert!(stmt_expr(s).unwrap().is_flat());
            assert!(ms[i + 1..].iter().all(|o| o.site != m.site || o.replacement != m.replacement));
        }
        assert!(ms.iter().any(|m| m.original == "x - y" && m.replacement == "y - x"));
        assert!(ms.iter().any(|m| m.original == "-r" && m.replacement == "r"));
    }
}
