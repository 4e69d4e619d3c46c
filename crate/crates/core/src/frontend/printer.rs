//! Pretty-printer producing parseable MCL.
//!
//! Expressions are printed with the minimal parentheses that preserve the
//! tree under C precedence, so `parse(print(p))` equals `p` up to spans.

use std::fmt::{self, Write};

use super::ast::*;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn prec_of(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, _, _) => op.precedence(),
        ExprKind::Unary(..) => 7,
        _ => 8,
    }
}

fn write_expr(f: &mut impl Write, e: &Expr, min_prec: u8) -> fmt::Result {
    let paren = prec_of(e) < min_prec;
    if paren {
        f.write_char('(')?;
    }
    match &e.kind {
        ExprKind::Int(v) => write!(f, "{v}")?,
        ExprKind::Bool(b) => write!(f, "{b}")?,
        ExprKind::Var(v) => f.write_str(v)?,
        ExprKind::Result => f.write_str("\\result")?,
        ExprKind::Old(g) => write!(f, "\\old({g})")?,
        ExprKind::Unary(op, inner) => {
            f.write_char(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            })?;
            write_expr(f, inner, 7)?;
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            write_expr(f, l, p)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, p + 1)?;
        }
        ExprKind::Call(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, 0)?;
            }
            f.write_char(')')?;
        }
    }
    if paren {
        f.write_char(')')?;
    }
    Ok(())
}

/// One-line rendering of a statement header, as used in candidate tables and
/// normalized dumps (`r = a`, `if (b > a)`, `return r`).
pub fn stmt_header(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::VarDecl { name, sort, init } => match init {
            Some(e) => format!("{sort} {name} = {e}"),
            None => format!("{sort} {name}"),
        },
        StmtKind::Assign { target, value } => format!("{target} = {value}"),
        StmtKind::If { cond, .. } => format!("if ({cond})"),
        StmtKind::While { cond, .. } => format!("while ({cond})"),
        StmtKind::Return(Some(e)) => format!("return {e}"),
        StmtKind::Return(None) => "return".to_string(),
        StmtKind::Block(_) => "{ ... }".to_string(),
    }
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for g in &p.globals {
        match g.init {
            Some(Literal::Int(v)) => writeln!(out, "{} {} = {};", g.sort, g.name, v),
            Some(Literal::Bool(b)) => writeln!(out, "{} {} = {};", g.sort, g.name, b),
            None => writeln!(out, "{} {};", g.sort, g.name),
        }
        .unwrap();
    }
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 || !p.globals.is_empty() {
            out.push('\n');
        }
        out.push_str(&print_function(f));
    }
    out
}

pub fn print_function(f: &FunctionDef) -> String {
    let mut out = String::new();
    if f.has_contract {
        out.push_str("/*@");
        let clauses: Vec<String> = f
            .requires
            .iter()
            .map(|e| format!("requires {e};"))
            .chain(f.ensures.iter().map(|e| format!("ensures {e};")))
            .collect();
        if clauses.is_empty() {
            out.push(' ');
        }
        for (i, c) in clauses.iter().enumerate() {
            if i > 0 {
                out.push_str("\n   ");
            }
            out.push(' ');
            out.push_str(c);
        }
        out.push_str(if clauses.is_empty() { "@*/\n" } else { " @*/\n" });
    }
    if f.pure_ {
        out.push_str("pure ");
    }
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| format!("{} {}", p.sort, p.name))
        .collect();
    writeln!(out, "{} {}({}) {{", f.ret, f.name, params.join(", ")).unwrap();
    for s in &f.body.stmts {
        print_stmt(&mut out, s, 1);
    }
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_block_body(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        print_stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

pub fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::VarDecl { .. } | StmtKind::Assign { .. } | StmtKind::Return(_) => {
            out.push_str(&stmt_header(s));
            out.push_str(";\n");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            write!(out, "if ({cond}) ").unwrap();
            print_block_body(out, then_branch, depth);
            if let Some(e) = else_branch {
                out.push_str(" else ");
                print_block_body(out, e, depth);
            }
            out.push('\n');
        }
        StmtKind::While {
            invariant,
            prelude,
            cond,
            body,
        } => {
            writeln!(out, "/*@ loop invariant {invariant}; @*/").unwrap();
            indent(out, depth);
            out.push_str("while (");
            if !prelude.is_empty() {
                // normalized-only form: the prelude is re-run before each test
                out.push_str("{ ");
                for p in prelude {
                    write!(out, "{}; ", stmt_header(p)).unwrap();
                }
                out.push_str("} ");
            }
            write!(out, "{cond}) ").unwrap();
            print_block_body(out, body, depth);
            out.push('\n');
        }
        StmtKind::Block(b) => {
            print_block_body(out, b, depth);
            out.push('\n');
        }
    }
}
