use std::fmt;
use std::sync::Arc;

use super::FrontendError;
use crate::span::{SourceFile, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    KwInt,
    KwBool,
    KwVoid,
    KwPure,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwTrue,
    KwFalse,
    // annotation-only keywords
    KwRequires,
    KwEnsures,
    KwLoop,
    KwInvariant,
    BsResult,
    BsOld,
    AnnotOpen,
    AnnotClose,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::KwInt => "`int`",
            Tok::KwBool => "`bool`",
            Tok::KwVoid => "`void`",
            Tok::KwPure => "`pure`",
            Tok::KwIf => "`if`",
            Tok::KwElse => "`else`",
            Tok::KwWhile => "`while`",
            Tok::KwReturn => "`return`",
            Tok::KwTrue => "`true`",
            Tok::KwFalse => "`false`",
            Tok::KwRequires => "`requires`",
            Tok::KwEnsures => "`ensures`",
            Tok::KwLoop => "`loop`",
            Tok::KwInvariant => "`invariant`",
            Tok::BsResult => "`\\result`",
            Tok::BsOld => "`\\old`",
            Tok::AnnotOpen => "`/*@`",
            Tok::AnnotClose => "`@*/`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Assign => "`=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::EqEq => "`==`",
            Tok::Ne => "`!=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    file: Arc<str>,
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    in_annotation: bool,
}

pub fn tokenize(source: &SourceFile) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        file: source.name.clone(),
        src: &source.text,
        pos: 0,
        line: 1,
        col: 1,
        in_annotation: false,
    };
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn error(&self, msg: impl Into<String>) -> FrontendError {
        FrontendError::Syntax {
            line: self.line,
            col: self.col,
            expected: Vec::new(),
            found: msg.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                // ACSL-style continuation marker at the start of annotation lines
                Some('@') if self.in_annotation && !self.starts_with("@*/") => {
                    self.bump();
                }
                Some('/') if self.starts_with("//") => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.starts_with("/*") && !self.starts_with("/*@") => {
                    if self.in_annotation {
                        return Err(self.error("comment inside annotation"));
                    }
                    self.bump_n(2);
                    loop {
                        if self.starts_with("*/") {
                            self.bump_n(2);
                            break;
                        }
                        if self.bump().is_none() {
                            return Err(self.error("unterminated comment"));
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, FrontendError> {
        self.skip_trivia()?;
        let (start, line, col) = (self.pos, self.line, self.col);
        let tok = self.scan()?;
        Ok(Token {
            tok,
            span: Span {
                file: self.file.clone(),
                start,
                end: self.pos,
                start_line: line,
                start_col: col,
                end_line: self.line,
                end_col: self.col,
            },
        })
    }

    fn scan(&mut self) -> Result<Tok, FrontendError> {
        let Some(c) = self.peek() else {
            if self.in_annotation {
                return Err(self.error("unterminated annotation"));
            }
            return Ok(Tok::Eof);
        };

        if self.starts_with("/*@") {
            if self.in_annotation {
                return Err(self.error("nested annotation"));
            }
            self.bump_n(3);
            self.in_annotation = true;
            return Ok(Tok::AnnotOpen);
        }
        if self.starts_with("@*/") {
            if !self.in_annotation {
                return Err(self.error("`@*/` outside annotation"));
            }
            self.bump_n(3);
            self.in_annotation = false;
            return Ok(Tok::AnnotClose);
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            let word = &self.src[start..self.pos];
            return Ok(self.keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string())));
        }

        if c.is_ascii_digit() {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
            let digits = &self.src[start..self.pos];
            return digits
                .parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| self.error(format!("integer literal `{digits}` out of range")));
        }

        if c == '\\' {
            let start = self.pos;
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            return match &self.src[start..self.pos] {
                "\\result" => Ok(Tok::BsResult),
                "\\old" => Ok(Tok::BsOld),
                other => Err(self.error(format!("unknown builtin `{other}`"))),
            };
        }

        const PUNCT: &[(&str, Tok)] = &[
            ("<=", Tok::Le),
            (">=", Tok::Ge),
            ("==", Tok::EqEq),
            ("!=", Tok::Ne),
            ("&&", Tok::AndAnd),
            ("||", Tok::OrOr),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            (";", Tok::Semi),
            (",", Tok::Comma),
            ("=", Tok::Assign),
            ("+", Tok::Plus),
            ("-", Tok::Minus),
            ("*", Tok::Star),
            ("<", Tok::Lt),
            (">", Tok::Gt),
            ("!", Tok::Bang),
        ];
        for (text, tok) in PUNCT {
            if self.starts_with(text) {
                self.bump_n(text.len());
                return Ok(tok.clone());
            }
        }
        Err(self.error(format!("unexpected character `{c}`")))
    }

    fn keyword(&self, word: &str) -> Option<Tok> {
        let tok = match word {
            "int" => Tok::KwInt,
            "bool" => Tok::KwBool,
            "void" => Tok::KwVoid,
            "pure" => Tok::KwPure,
            "if" => Tok::KwIf,
            "else" => Tok::KwElse,
            "while" => Tok::KwWhile,
            "return" => Tok::KwReturn,
            "true" => Tok::KwTrue,
            "false" => Tok::KwFalse,
            "requires" if self.in_annotation => Tok::KwRequires,
            "ensures" if self.in_annotation => Tok::KwEnsures,
            "loop" if self.in_annotation => Tok::KwLoop,
            "invariant" if self.in_annotation => Tok::KwInvariant,
            _ => return None,
        };
        Some(tok)
    }
}
