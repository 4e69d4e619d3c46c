use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;
use crate::span::{SourceFile, Span};

/// Parse MCL source text into an untyped [`Program`].
pub fn parse(source: &SourceFile) -> Result<Program, FrontendError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

/// Parse a standalone expression (used by tests and tooling).
pub fn parse_expr(source: &SourceFile) -> Result<Expr, FrontendError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> FrontendError {
        let t = &self.tokens[self.pos];
        FrontendError::Syntax {
            line: t.span.start_line,
            col: t.span.start_col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.advance();
                Ok((name, t.span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        while *self.peek() != Tok::Eof {
            let start = self.span();
            let contract = if *self.peek() == Tok::AnnotOpen {
                Some(self.contract()?)
            } else {
                None
            };
            let pure_ = self.eat(Tok::KwPure);
            let ret = self.ret_type()?;
            let (name, _) = self.ident()?;
            if *self.peek() == Tok::LParen {
                functions.push(self.function_rest(start, contract, pure_, ret, name)?);
            } else {
                if contract.is_some() || pure_ {
                    return Err(self.unexpected(&["`(`"]));
                }
                let sort = ret.sort().ok_or_else(|| FrontendError::Syntax {
                    line: start.start_line,
                    col: start.start_col,
                    expected: vec!["`int`".into(), "`bool`".into()],
                    found: "`void`".into(),
                })?;
                let init = if self.eat(Tok::Assign) {
                    Some(self.literal()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                globals.push(Global {
                    name,
                    sort,
                    init,
                    span: start.to(&self.prev_span()),
                });
            }
        }
        Ok(Program { globals, functions })
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Literal::Int(v))
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.advance();
                        Ok(Literal::Int(-v))
                    }
                    _ => Err(self.unexpected(&["integer"])),
                }
            }
            Tok::KwTrue => {
                self.advance();
                Ok(Literal::Bool(true))
            }
            Tok::KwFalse => {
                self.advance();
                Ok(Literal::Bool(false))
            }
            _ => Err(self.unexpected(&["integer", "`true`", "`false`"])),
        }
    }

    fn ret_type(&mut self) -> PResult<RetType> {
        let t = match self.peek() {
            Tok::KwInt => RetType::Value(Sort::Int),
            Tok::KwBool => RetType::Value(Sort::Bool),
            Tok::KwVoid => RetType::Void,
            _ => return Err(self.unexpected(&["`int`", "`bool`", "`void`"])),
        };
        self.advance();
        Ok(t)
    }

    fn sort(&mut self) -> PResult<Sort> {
        let s = match self.peek() {
            Tok::KwInt => Sort::Int,
            Tok::KwBool => Sort::Bool,
            _ => return Err(self.unexpected(&["`int`", "`bool`"])),
        };
        self.advance();
        Ok(s)
    }

    fn contract(&mut self) -> PResult<(Vec<Expr>, Vec<Expr>)> {
        self.expect(Tok::AnnotOpen)?;
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            match self.peek() {
                Tok::KwRequires => {
                    self.advance();
                    requires.push(self.expr()?);
                    self.expect(Tok::Semi)?;
                }
                Tok::KwEnsures => {
                    self.advance();
                    ensures.push(self.expr()?);
                    self.expect(Tok::Semi)?;
                }
                Tok::AnnotClose => {
                    self.advance();
                    return Ok((requires, ensures));
                }
                _ => return Err(self.unexpected(&["`requires`", "`ensures`", "`@*/`"])),
            }
        }
    }

    fn function_rest(
        &mut self,
        start: Span,
        contract: Option<(Vec<Expr>, Vec<Expr>)>,
        pure_: bool,
        ret: RetType,
        name: String,
    ) -> PResult<FunctionDef> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pstart = self.span();
                let sort = self.sort()?;
                let (pname, _) = self.ident()?;
                params.push(Param {
                    name: pname,
                    sort,
                    span: pstart.to(&self.prev_span()),
                });
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        let has_contract = contract.is_some();
        let (requires, ensures) = contract.unwrap_or_default();
        Ok(FunctionDef {
            name,
            params,
            ret,
            pure_,
            has_contract,
            requires,
            ensures,
            span: start.to(&body.span),
            body,
        })
    }

    fn block(&mut self) -> PResult<Block> {
        let open = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.unexpected(&["`}`"]));
            }
            stmts.extend(self.stmt()?);
        }
        let close = self.advance();
        Ok(Block::new(stmts, open.span.to(&close.span)))
    }

    /// Branch or loop body: a braced block, or a single statement wrapped
    /// into one.
    fn body(&mut self) -> PResult<Block> {
        if *self.peek() == Tok::LBrace {
            return self.block();
        }
        let start = self.span();
        let stmts = self.stmt()?;
        Ok(Block::new(stmts, start.to(&self.prev_span())))
    }

    fn stmt(&mut self) -> PResult<Vec<Stmt>> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::KwInt | Tok::KwBool => return self.decl(),
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::AnnotOpen => {
                self.advance();
                self.expect(Tok::KwLoop)?;
                self.expect(Tok::KwInvariant)?;
                let invariant = self.expr()?;
                self.expect(Tok::Semi)?;
                self.expect(Tok::AnnotClose)?;
                self.expect(Tok::KwWhile)?;
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.body()?;
                StmtKind::While {
                    invariant,
                    prelude: Vec::new(),
                    cond,
                    body,
                }
            }
            Tok::KwWhile => {
                return Err(FrontendError::Syntax {
                    line: start.start_line,
                    col: start.start_col,
                    expected: vec!["`/*@ loop invariant ... @*/`".into()],
                    found: Tok::KwWhile.to_string(),
                })
            }
            Tok::KwIf => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_branch = self.body()?;
                let else_branch = if self.eat(Tok::KwElse) {
                    Some(self.body()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::KwReturn => {
                self.advance();
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::Ident(_) if *self.peek_at(1) == Tok::Assign => {
                let (target, _) = self.ident()?;
                self.advance();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { target, value }
            }
            Tok::Ident(_) => {
                self.advance();
                return Err(self.unexpected(&["`=`"]));
            }
            _ => {
                return Err(self.unexpected(&[
                    "`int`", "`bool`", "`if`", "`return`", "`{`", "`/*@`", "identifier",
                ]))
            }
        };
        Ok(vec![Stmt {
            kind,
            span: start.to(&self.prev_span()),
        }])
    }

    /// `int a = e, b;` declares each name as its own statement.
    fn decl(&mut self) -> PResult<Vec<Stmt>> {
        let start = self.span();
        let sort = self.sort()?;
        let mut out = Vec::new();
        loop {
            let (name, nspan) = self.ident()?;
            let init = if self.eat(Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            let stmt_start = if out.is_empty() { start.clone() } else { nspan };
            out.push(Stmt {
                kind: StmtKind::VarDecl { name, sort, init },
                span: stmt_start.to(&self.prev_span()),
            });
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        if let Some(last) = out.last_mut() {
            last.span = last.span.to(&self.prev_span());
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            _ => return self.primary(),
        };
        self.advance();
        let e = self.unary()?;
        let span = start.to(&e.span);
        Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), span))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                ExprKind::Int(v)
            }
            Tok::KwTrue => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::KwFalse => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::BsResult => {
                self.advance();
                ExprKind::Result
            }
            Tok::BsOld => {
                self.advance();
                self.expect(Tok::LParen)?;
                let (g, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                ExprKind::Old(g)
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(Tok::LParen) {
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    ExprKind::Call(name, args)
                } else {
                    ExprKind::Var(name)
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                // parentheses are not nodes; widen the span to include them
                return Ok(Expr {
                    span: start.to(&self.prev_span()),
                    ..inner
                });
            }
            _ => {
                return Err(self.unexpected(&[
                    "integer",
                    "identifier",
                    "`true`",
                    "`false`",
                    "`(`",
                    "`-`",
                    "`!`",
                    "`\\result`",
                    "`\\old`",
                ]))
            }
        };
        Ok(Expr::new(kind, start.to(&self.prev_span())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> SourceFile {
        SourceFile::new("t.mcl", text)
    }

    #[test]
    fn empty_file_has_no_functions() {
        let p = parse(&src("")).unwrap();
        assert!(p.functions.is_empty() && p.globals.is_empty());
    }

    #[test]
    fn missing_operand_is_a_syntax_error_at_the_semicolon() {
        let err = parse(&src("int f() { return 1 + ; }")).unwrap_err();
        match err {
            FrontendError::Syntax {
                line, col, found, ..
            } => {
                assert_eq!((line, col), (1, 22));
                assert_eq!(found, "`;`");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn c_precedence() {
        let e = parse_expr(&src("a || b && c == 1 + 2 * d")).unwrap();
        let ExprKind::Binary(BinOp::Or, _, rhs) = e.kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::And, _, rhs) = rhs.kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Eq, _, rhs) = rhs.kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Add, _, rhs) = rhs.kind else {
            panic!()
        };
        assert!(matches!(rhs.kind, ExprKind::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse_expr(&src("a - b - c")).unwrap();
        let ExprKind::Binary(BinOp::Sub, lhs, _) = e.kind else {
            panic!()
        };
        assert!(matches!(lhs.kind, ExprKind::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn multi_declaration_splits_into_statements() {
        let p = parse(&src("void f() { bool en, eq = true; }")).unwrap();
        assert_eq!(p.functions[0].body.stmts.len(), 2);
    }

    #[test]
    fn while_requires_invariant() {
        assert!(parse(&src("void f() { while (true) { } }")).is_err());
        let p = parse(&src(
            "void f() { /*@ loop invariant true; @*/ while (true) { } }",
        ))
        .unwrap();
        assert!(matches!(
            p.functions[0].body.stmts[0].kind,
            StmtKind::While { .. }
        ));
    }

    #[test]
    fn globals_take_signed_literals() {
        let p = parse(&src("int g = -5; bool h;")).unwrap();
        assert_eq!(p.globals[0].init, Some(Literal::Int(-5)));
        assert_eq!(p.globals[1].init, None);
    }
}
