//! Lexer and recursive-descent parser for MiniLang source text.

use super::ast::*;
use super::LangError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "fn", "var", "if", "else", "while", "return", "assert", "true", "false", "int", "bool",
];

// Longest symbols first so that `<=` wins over `<`.
const SYMBOLS: &[&str] = &[
    "->", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", ",", ";", ":", "=", "<", ">", "+", "-", "*", "/",
    "%", "!",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, LangError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| LangError::Syntax {
                pos,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            col += (i - start) as u32;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => out.push((Tok::Kw(k), pos)),
                None => out.push((Tok::Ident(text), pos)),
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len() as u32;
                out.push((Tok::Sym(s), pos));
            }
            None => {
                return Err(LangError::Syntax {
                    pos,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<Pos, LangError> {
        if self.is_sym(s) {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<Pos, LangError> {
        if self.is_kw(k) {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.bump().1;
                Ok((s, p))
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn ty(&mut self) -> Result<Type, LangError> {
        if self.is_kw("int") {
            self.bump();
            Ok(Type::Int)
        } else if self.is_kw("bool") {
            self.bump();
            Ok(Type::Bool)
        } else {
            self.err(format!("expected type, found {}", self.describe()))
        }
    }

    fn program(&mut self) -> Result<Vec<FunctionDef>, LangError> {
        let mut fns = Vec::new();
        while *self.peek() != Tok::Eof {
            fns.push(self.function()?);
        }
        Ok(fns)
    }

    fn function(&mut self) -> Result<FunctionDef, LangError> {
        let pos = self.expect_kw("fn")?;
        let (name, _) = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (pname, _) = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.ty()?;
                params.push(Param { name: pname, ty });
                if self.is_sym(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        self.expect_sym("->")?;
        let ret = self.ty()?;
        self.expect_sym("{")?;
        let mut locals = Vec::new();
        while self.is_kw("var") {
            self.bump();
            let (lname, _) = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(";")?;
            locals.push(Param { name: lname, ty });
        }
        let mut body = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated function body");
            }
            if self.is_kw("var") {
                return self.err("local declarations must precede statements");
            }
            body.push(self.stmt()?);
        }
        self.expect_sym("}")?;
        Ok(FunctionDef {
            id: 0,
            pos,
            name,
            params,
            ret,
            locals,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, LangError> {
        self.expect_sym("{")?;
        let mut body = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unterminated block");
            }
            body.push(self.stmt()?);
        }
        self.expect_sym("}")?;
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Kw("if") => return self.if_stmt(),
            Tok::Kw("while") => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Kw("return") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Return(e)
            }
            Tok::Kw("assert") => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                StmtKind::Assert(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect_sym("=")?;
                let value = self.expr()?;
                self.expect_sym(";")?;
                StmtKind::Assign {
                    target: VarRef::new(name),
                    value,
                }
            }
            _ => return self.err(format!("expected statement, found {}", self.describe())),
        };
        Ok(Stmt { id: 0, pos, kind })
    }

    fn if_stmt(&mut self) -> Result<Stmt, LangError> {
        let pos = self.expect_kw("if")?;
        self.expect_sym("(")?;
        let cond = self.expr()?;
        self.expect_sym(")")?;
        let then_body = self.block()?;
        let else_body = if self.is_kw("else") {
            self.bump();
            if self.is_kw("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt {
            id: 0,
            pos,
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
        })
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        self.binary(1)
    }

    fn binop_here(&self) -> Option<BinOp> {
        let Tok::Sym(s) = self.peek() else {
            return None;
        };
        Some(match *s {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }

    // Precedence climbing; comparisons do not chain.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop_here() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = self.bump().1;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                id: 0,
                pos,
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
            if op.is_comparison() {
                if let Some(next) = self.binop_here() {
                    if next.is_comparison() {
                        return self.err("comparison operators cannot be chained");
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        let pos = self.pos();
        if self.is_sym("!") {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr {
                id: 0,
                pos,
                kind: ExprKind::Unary(UnOp::Not, Box::new(e)),
            });
        }
        if self.is_sym("-") {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr {
                id: 0,
                pos,
                kind: ExprKind::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::Kw("true") => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::Kw("false") => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.is_sym("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.is_sym(",") {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    ExprKind::Call(CallExpr {
                        name,
                        func: usize::MAX,
                        args,
                    })
                } else {
                    ExprKind::Var(VarRef::new(name))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            _ => return self.err(format!("expected expression, found {}", self.describe())),
        };
        Ok(Expr { id: 0, pos, kind })
    }
}

/// Parses source text into unchecked function definitions.
pub fn parse_functions(src: &str) -> Result<Vec<FunctionDef>, LangError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    p.program()
}

/// Parses a standalone expression (no trailing tokens allowed).
pub fn parse_expr(src: &str) -> Result<Expr, LangError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after expression", p.describe()));
    }
    Ok(e)
}
