//! Lexer, parser, typechecker, printer and interpreter for MCL, a small
//! C-like language with ACSL-style contracts.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typecheck;

use thiserror::Error;

pub use ast::*;
pub use interp::{interpret, postcondition_holds, Env, ExecResult, InterpError, Value};
pub use parser::{parse, parse_expr};
pub use printer::{print_function, print_program};
pub use typecheck::{typecheck, Diagnostic, DiagnosticKind, TypedProgram};

use crate::span::SourceFile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{line}:{col}: syntax error: found {found}{}", expected_list(.expected))]
    Syntax {
        line: u32,
        col: u32,
        expected: Vec<String>,
        found: String,
    },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Type(Vec<Diagnostic>),
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(", expected one of {}", expected.join(", "))
    }
}

/// Parse and typecheck in one step.
pub fn load(source: &SourceFile) -> Result<TypedProgram, FrontendError> {
    let p = parse(source)?;
    typecheck(&p).map_err(FrontendError::Type)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAX: &str = "/*@ensures \\result >= b;@*/
int max(int a, int b) {
  int r = a;
  if(b > a)
    r = a; //correct: r = b
  return r; }
";

    #[test]
    fn example_max_parses_and_typechecks() {
        let p = load(&SourceFile::new("max.mcl", MAX)).unwrap();
        let f = &p.program().functions[0];
        assert_eq!(p.program().functions.len(), 1);
        assert_eq!(f.params.len(), 2);
        assert_eq!(f.ensures.len(), 1);
        assert_eq!(f.ensures[0].to_string(), "\\result >= b");
        assert_eq!(f.body.stmts[0].span.start_line, 3);
        assert_eq!(f.body.stmts[1].span.start_line, 4);
    }

    #[test]
    fn print_then_parse_round_trips_max() {
        let p = parse(&SourceFile::new("max.mcl", MAX)).unwrap();
        let printed = print_program(&p);
        let mut again = parse(&SourceFile::new("max2.mcl", printed.as_str())).unwrap();
        let mut orig = p.clone();
        orig.erase_spans();
        again.erase_spans();
        assert_eq!(orig, again);
    }
}
