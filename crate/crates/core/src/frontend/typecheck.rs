use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::ast::*;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    SortMismatch,
    IllegalResultUse,
    IllegalOldUse,
    AssignToParam,
    UnknownIdentifier,
    UnknownFunction,
    DuplicateName,
    ReservedName,
    NonPureCall,
    CallInAnnotation,
    MissingContract,
    ArityMismatch,
    RecursiveCall,
    ImpureWrite,
    ReturnInLoop,
    UnreachableCode,
    MissingReturn,
    BadReturn,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.span, self.kind, self.message)
    }
}

/// A program whose expressions all carry their sort and which satisfies the
/// static rules of MCL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    program: Program,
}

impl TypedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn into_inner(self) -> Program {
        self.program
    }
}

/// Temporaries introduced by the normalizer use this namespace.
pub fn is_reserved_name(name: &str) -> bool {
    name.strip_prefix("tmp_")
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

pub fn typecheck(p: &Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let mut program = p.clone();
    let mut cx = Checker::new(p);
    cx.check_top_level(&program);
    for f in &mut program.functions {
        cx.check_function(f);
    }
    cx.check_recursion(&program);
    if cx.diags.is_empty() {
        Ok(TypedProgram { program })
    } else {
        Err(cx.diags)
    }
}

#[derive(Clone)]
struct Sig {
    params: Vec<Sort>,
    ret: RetType,
    pure_: bool,
    has_contract: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Code,
    Requires,
    Ensures,
    Invariant,
}

struct Checker {
    globals: HashMap<String, Sort>,
    sigs: HashMap<String, Sig>,
    diags: Vec<Diagnostic>,
    // per function
    params: HashMap<String, Sort>,
    scopes: Vec<HashMap<String, Sort>>,
    declared_locals: BTreeSet<String>,
    ret: RetType,
    pure_: bool,
    loop_depth: usize,
    calls: BTreeMap<String, BTreeSet<String>>,
    current: String,
}

impl Checker {
    fn new(p: &Program) -> Self {
        let globals = p.globals.iter().map(|g| (g.name.clone(), g.sort)).collect();
        let sigs = p
            .functions
            .iter()
            .map(|f| {
                (
                    f.name.clone(),
                    Sig {
                        params: f.params.iter().map(|p| p.sort).collect(),
                        ret: f.ret,
                        pure_: f.pure_,
                        has_contract: f.has_contract,
                    },
                )
            })
            .collect();
        Checker {
            globals,
            sigs,
            diags: Vec::new(),
            params: HashMap::new(),
            scopes: Vec::new(),
            declared_locals: BTreeSet::new(),
            ret: RetType::Void,
            pure_: false,
            loop_depth: 0,
            calls: BTreeMap::new(),
            current: String::new(),
        }
    }

    fn diag(&mut self, kind: DiagnosticKind, span: &Span, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            kind,
            span: span.clone(),
            message: message.into(),
        });
    }

    fn check_name(&mut self, name: &str, span: &Span) {
        if is_reserved_name(name) {
            self.diag(
                DiagnosticKind::ReservedName,
                span,
                format!("`{name}` is reserved for normalizer temporaries"),
            );
        }
    }

    fn check_top_level(&mut self, p: &Program) {
        let mut seen: HashMap<&str, &Span> = HashMap::new();
        let names = p
            .globals
            .iter()
            .map(|g| (g.name.as_str(), &g.span))
            .chain(p.functions.iter().map(|f| (f.name.as_str(), &f.span)));
        let mut dups = Vec::new();
        for (name, span) in names {
            if seen.insert(name, span).is_some() {
                dups.push((name.to_string(), span.clone()));
            }
            if is_reserved_name(name) {
                self.diag(
                    DiagnosticKind::ReservedName,
                    span,
                    format!("`{name}` is reserved for normalizer temporaries"),
                );
            }
        }
        for (name, span) in dups {
            self.diag(
                DiagnosticKind::DuplicateName,
                &span,
                format!("`{name}` is defined more than once"),
            );
        }
    }

    fn check_function(&mut self, f: &mut FunctionDef) {
        self.params.clear();
        self.scopes = vec![HashMap::new()];
        self.declared_locals.clear();
        self.ret = f.ret;
        self.pure_ = f.pure_;
        self.loop_depth = 0;
        self.current = f.name.clone();
        self.calls.entry(f.name.clone()).or_default();

        for p in &f.params {
            self.check_name(&p.name, &p.span);
            if self.params.contains_key(&p.name) || self.globals.contains_key(&p.name) {
                self.diag(
                    DiagnosticKind::DuplicateName,
                    &p.span,
                    format!("parameter `{}` clashes with another name", p.name),
                );
            }
            self.params.insert(p.name.clone(), p.sort);
        }

        for e in &mut f.requires {
            self.expect_sort(e, Sort::Bool, Ctx::Requires);
        }
        for e in &mut f.ensures {
            self.expect_sort(e, Sort::Bool, Ctx::Ensures);
        }

        let returns = self.check_block(&mut f.body);
        if f.ret != RetType::Void && !returns {
            self.diag(
                DiagnosticKind::MissingReturn,
                &f.body.span,
                format!("`{}` does not return a value on every path", f.name),
            );
        }
    }

    /// Returns whether the block definitely returns.
    fn check_block(&mut self, b: &mut Block) -> bool {
        self.scopes.push(HashMap::new());
        let mut returns = false;
        for s in &mut b.stmts {
            if returns {
                self.diag(
                    DiagnosticKind::UnreachableCode,
                    &s.span,
                    "statement after return",
                );
                break;
            }
            returns = self.check_stmt(s);
        }
        self.scopes.pop();
        returns
    }

    fn lookup_var(&self, name: &str) -> Option<Sort> {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name).copied())
            .or_else(|| self.params.get(name).copied())
            .or_else(|| self.globals.get(name).copied())
    }

    fn check_stmt(&mut self, s: &mut Stmt) -> bool {
        let span = s.span.clone();
        match &mut s.kind {
            StmtKind::VarDecl { name, sort, init } => {
                if let Some(e) = init {
                    self.expect_sort(e, *sort, Ctx::Code);
                }
                self.check_name(name, &span);
                if self.lookup_var(name).is_some()
                    || self.declared_locals.contains(name.as_str())
                    || self.sigs.contains_key(name.as_str())
                {
                    self.diag(
                        DiagnosticKind::DuplicateName,
                        &span,
                        format!("local `{name}` clashes with another name"),
                    );
                }
                self.declared_locals.insert(name.clone());
                self.scopes
                    .last_mut()
                    .expect("scope stack")
                    .insert(name.clone(), *sort);
                false
            }
            StmtKind::Assign { target, value } => {
                let target_sort = if self.params.contains_key(target.as_str())
                    && !self.scopes.iter().any(|s| s.contains_key(target.as_str()))
                {
                    self.diag(
                        DiagnosticKind::AssignToParam,
                        &span,
                        format!("parameter `{target}` cannot be assigned"),
                    );
                    self.params.get(target.as_str()).copied()
                } else if let Some(sort) = self.scopes.iter().rev().find_map(|s| s.get(target.as_str()).copied()) {
                    Some(sort)
                } else if let Some(sort) = self.globals.get(target.as_str()).copied() {
                    if self.pure_ {
                        self.diag(
                            DiagnosticKind::ImpureWrite,
                            &span,
                            format!("pure function writes global `{target}`"),
                        );
                    }
                    Some(sort)
                } else {
                    self.diag(
                        DiagnosticKind::UnknownIdentifier,
                        &span,
                        format!("unknown variable `{target}`"),
                    );
                    None
                };
                match target_sort {
                    Some(sort) => self.expect_sort(value, sort, Ctx::Code),
                    None => {
                        self.infer(value, Ctx::Code);
                    }
                }
                false
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expect_sort(cond, Sort::Bool, Ctx::Code);
                let t = self.check_block(then_branch);
                let e = else_branch.as_mut().map(|b| self.check_block(b));
                t && e == Some(true)
            }
            StmtKind::While {
                invariant,
                prelude,
                cond,
                body,
            } => {
                self.expect_sort(invariant, Sort::Bool, Ctx::Invariant);
                self.loop_depth += 1;
                for p in prelude {
                    self.check_stmt(p);
                }
                self.expect_sort(cond, Sort::Bool, Ctx::Code);
                self.check_block(body);
                self.loop_depth -= 1;
                false
            }
            StmtKind::Return(value) => {
                if self.loop_depth > 0 {
                    self.diag(
                        DiagnosticKind::ReturnInLoop,
                        &span,
                        "return inside a loop body is not supported",
                    );
                }
                match (self.ret, value) {
                    (RetType::Void, None) => {}
                    (RetType::Value(sort), Some(e)) => self.expect_sort(e, sort, Ctx::Code),
                    (RetType::Void, Some(e)) => {
                        self.infer(e, Ctx::Code);
                        self.diag(
                            DiagnosticKind::BadReturn,
                            &span,
                            "void function returns a value",
                        );
                    }
                    (RetType::Value(_), None) => self.diag(
                        DiagnosticKind::BadReturn,
                        &span,
                        "missing return value",
                    ),
                }
                true
            }
            StmtKind::Block(b) => self.check_block(b),
        }
    }

    fn expect_sort(&mut self, e: &mut Expr, want: Sort, ctx: Ctx) {
        if let Some(got) = self.infer(e, ctx) {
            if got != want {
                self.diag(
                    DiagnosticKind::SortMismatch,
                    &e.span,
                    format!("expected {want}, found {got}"),
                );
            }
        }
    }

    /// Infers and records the sort of `e`; `None` after an error was reported.
    fn infer(&mut self, e: &mut Expr, ctx: Ctx) -> Option<Sort> {
        let span = e.span.clone();
        let sort = match &mut e.kind {
            ExprKind::Int(_) => Some(Sort::Int),
            ExprKind::Bool(_) => Some(Sort::Bool),
            ExprKind::Var(name) => {
                let s = self.lookup_var(name);
                if s.is_none() {
                    let msg = format!("unknown identifier `{name}`");
                    self.diag(DiagnosticKind::UnknownIdentifier, &span, msg);
                }
                s
            }
            ExprKind::Result => {
                if ctx != Ctx::Ensures {
                    self.diag(
                        DiagnosticKind::IllegalResultUse,
                        &span,
                        "`\\result` is only allowed in `ensures`",
                    );
                    None
                } else if let RetType::Value(s) = self.ret {
                    Some(s)
                } else {
                    self.diag(
                        DiagnosticKind::IllegalResultUse,
                        &span,
                        "`\\result` used in a void function",
                    );
                    None
                }
            }
            ExprKind::Old(g) => {
                if ctx != Ctx::Ensures {
                    self.diag(
                        DiagnosticKind::IllegalOldUse,
                        &span,
                        "`\\old` is only allowed in `ensures`",
                    );
                    None
                } else if let Some(s) = self.globals.get(g.as_str()).copied() {
                    Some(s)
                } else {
                    let msg = format!("`\\old({g})` does not name a global");
                    self.diag(DiagnosticKind::IllegalOldUse, &span, msg);
                    None
                }
            }
            ExprKind::Unary(op, inner) => {
                let want = match op {
                    UnOp::Neg => Sort::Int,
                    UnOp::Not => Sort::Bool,
                };
                self.expect_sort(inner, want, ctx);
                Some(want)
            }
            ExprKind::Binary(op, l, r) => {
                use BinOp::*;
                match op {
                    Add | Sub | Mul => {
                        self.expect_sort(l, Sort::Int, ctx);
                        self.expect_sort(r, Sort::Int, ctx);
                        Some(Sort::Int)
                    }
                    Lt | Le | Gt | Ge => {
                        self.expect_sort(l, Sort::Int, ctx);
                        self.expect_sort(r, Sort::Int, ctx);
                        Some(Sort::Bool)
                    }
                    And | Or => {
                        self.expect_sort(l, Sort::Bool, ctx);
                        self.expect_sort(r, Sort::Bool, ctx);
                        Some(Sort::Bool)
                    }
                    Eq | Ne => {
                        if let Some(ls) = self.infer(l, ctx) {
                            self.expect_sort(r, ls, ctx);
                        } else {
                            self.infer(r, ctx);
                        }
                        Some(Sort::Bool)
                    }
                }
            }
            ExprKind::Call(name, args) => {
                let name = name.clone();
                self.check_call(&name, args, &span, ctx)
            }
        };
        e.sort = sort;
        sort
    }

    fn check_call(&mut self, name: &str, args: &mut [Expr], span: &Span, ctx: Ctx) -> Option<Sort> {
        if ctx != Ctx::Code {
            self.diag(
                DiagnosticKind::CallInAnnotation,
                span,
                format!("call to `{name}` inside an annotation"),
            );
        }
        let Some(sig) = self.sigs.get(name).cloned() else {
            for a in args.iter_mut() {
                self.infer(a, ctx);
            }
            self.diag(
                DiagnosticKind::UnknownFunction,
                span,
                format!("unknown function `{name}`"),
            );
            return None;
        };
        self.calls
            .entry(self.current.clone())
            .or_default()
            .insert(name.to_string());
        if !sig.pure_ {
            self.diag(
                DiagnosticKind::NonPureCall,
                span,
                format!("`{name}` is not declared `pure`"),
            );
        }
        if !sig.has_contract {
            self.diag(
                DiagnosticKind::MissingContract,
                span,
                format!("`{name}` has no contract"),
            );
        }
        if sig.params.len() != args.len() {
            self.diag(
                DiagnosticKind::ArityMismatch,
                span,
                format!(
                    "`{name}` takes {} arguments, {} given",
                    sig.params.len(),
                    args.len()
                ),
            );
            for a in args.iter_mut() {
                self.infer(a, ctx);
            }
        } else {
            for (a, want) in args.iter_mut().zip(&sig.params) {
                self.expect_sort(a, *want, ctx);
            }
        }
        match sig.ret {
            RetType::Value(s) => Some(s),
            RetType::Void => {
                self.diag(
                    DiagnosticKind::SortMismatch,
                    span,
                    format!("`{name}` returns no value"),
                );
                None
            }
        }
    }

    fn check_recursion(&mut self, p: &Program) {
        // depth-first search for a cycle in the call graph
        fn visit(
            n: &str,
            graph: &BTreeMap<String, BTreeSet<String>>,
            state: &mut HashMap<String, u8>,
        ) -> bool {
            match state.get(n) {
                Some(1) => return true,
                Some(2) => return false,
                _ => {}
            }
            state.insert(n.to_string(), 1);
            let cyclic = graph
                .get(n)
                .is_some_and(|succ| succ.iter().any(|m| visit(m, graph, state)));
            state.insert(n.to_string(), 2);
            cyclic
        }
        for f in &p.functions {
            let mut state = HashMap::new();
            if visit(&f.name, &self.calls, &mut state) {
                self.diag(
                    DiagnosticKind::RecursiveCall,
                    &f.span,
                    format!("`{}` is (mutually) recursive", f.name),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::span::SourceFile;

    fn check(text: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
        typecheck(&parse(&SourceFile::new("t.mcl", text)).unwrap())
    }

    fn kinds(text: &str) -> Vec<DiagnosticKind> {
        check(text).unwrap_err().into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn int_initializer_for_bool_is_sort_mismatch() {
        assert_eq!(
            kinds("void f() { bool b = 1 + 2; }"),
            vec![DiagnosticKind::SortMismatch]
        );
    }

    #[test]
    fn result_in_void_function() {
        assert_eq!(
            kinds("/*@ ensures \\result >= b; @*/ void f(int b) { }"),
            vec![DiagnosticKind::IllegalResultUse]
        );
    }

    #[test]
    fn result_outside_ensures() {
        assert!(kinds("/*@ requires \\result > 0; @*/ int f() { return 1; }")
            .contains(&DiagnosticKind::IllegalResultUse));
    }

    #[test]
    fn parameters_are_immutable() {
        assert_eq!(
            kinds("int f(int a) { a = 1; return a; }"),
            vec![DiagnosticKind::AssignToParam]
        );
    }

    #[test]
    fn calls_need_pure_contracted_callees() {
        let k = kinds("int g() { return 1; } int f() { int x = g(); return x; }");
        assert!(k.contains(&DiagnosticKind::NonPureCall));
        assert!(k.contains(&DiagnosticKind::MissingContract));
    }

    #[test]
    fn recursion_is_rejected() {
        let k = kinds("/*@ @*/ pure int f(int x) { int y = f(x); return y; }");
        assert_eq!(k, vec![DiagnosticKind::RecursiveCall]);
    }

    #[test]
    fn pure_functions_cannot_write_globals() {
        let k = kinds("int g; /*@ @*/ pure int f() { g = 1; return g; }");
        assert_eq!(k, vec![DiagnosticKind::ImpureWrite]);
    }

    #[test]
    fn temp_names_are_reserved() {
        assert_eq!(
            kinds("int f() { int tmp_3 = 0; return tmp_3; }"),
            vec![DiagnosticKind::ReservedName]
        );
        assert!(check("int f() { int tmp_x = 0; return tmp_x; }").is_ok());
    }

    #[test]
    fn non_void_functions_return_on_every_path() {
        assert_eq!(
            kinds("int f(int a) { if (a > 0) { return 1; } }"),
            vec![DiagnosticKind::MissingReturn]
        );
        assert!(check("int f(int a) { if (a > 0) { return 1; } return 2; }").is_ok());
        assert!(check("int f(int a) { if (a > 0) { return 1; } else { return 2; } }").is_ok());
    }

    #[test]
    fn code_after_return_is_rejected() {
        assert!(kinds("int f() { return 1; int x = 2; }")
            .contains(&DiagnosticKind::UnreachableCode));
    }

    #[test]
    fn old_only_on_globals() {
        assert!(kinds("int g; /*@ ensures \\old(x) == 0; @*/ void f(int x) { }")
            .contains(&DiagnosticKind::IllegalOldUse));
        assert!(check("int g; /*@ ensures g == \\old(g) + 1; @*/ void f() { g = g + 1; }").is_ok());
    }

    #[test]
    fn sorts_are_recorded() {
        let p = check("int f(int a, int b) { bool c = a < b; return a + b; }").unwrap();
        let StmtKind::VarDecl { init: Some(e), .. } = &p.program().functions[0].body.stmts[0].kind
        else {
            panic!()
        };
        assert_eq!(e.sort, Some(Sort::Bool));
    }

    #[test]
    fn locals_are_unique_per_function() {
        assert!(kinds("void f() { { int x = 1; } { int x = 2; } }")
            .contains(&DiagnosticKind::DuplicateName));
    }
}
