//! Abstract syntax for MiniLang.
//!
//! Nodes carry a [`NodeId`] assigned by a pre-order walk when a [`Program`]
//! is built, so identical source text always yields identical ids.
//! Synthesized nodes (patches) start with id 0 and get renumbered when the
//! patched program is rebuilt.
//!
//! [`Program`]: super::Program

use std::fmt;

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
        }
    }
}

/// Line/column in the source text (1-based). Synthesized nodes use 0:0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A variable reference. `slot` indexes the enclosing function's frame and is
/// filled in by the static checker.
#[derive(Clone, Debug)]
pub struct VarRef {
    pub name: String,
    pub slot: usize,
}

impl VarRef {
    pub fn new(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            slot: usize::MAX,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CallExpr {
    pub name: String,
    /// Index of the callee in `Program::functions`, resolved by the checker.
    pub func: usize,
    pub args: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
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
            BinOp::Div => "/",
            BinOp::Rem => "%",
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

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Mul | BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or
        )
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(VarRef),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(CallExpr),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: ExprKind,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            id: 0,
            pos: Pos::default(),
            kind,
        }
    }

    pub fn int(v: i64) -> Self {
        Expr::new(ExprKind::Int(v))
    }

    pub fn bool(v: bool) -> Self {
        Expr::new(ExprKind::Bool(v))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Var(VarRef::new(name)))
    }

    pub fn unary(op: UnOp, e: Expr) -> Self {
        Expr::new(ExprKind::Unary(op, Box::new(e)))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    /// Logical negation, collapsing a double negation.
    pub fn not(e: Expr) -> Self {
        match e.kind {
            ExprKind::Unary(UnOp::Not, inner) => *inner,
            _ => Expr::unary(UnOp::Not, e),
        }
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Call(CallExpr {
            name: name.into(),
            func: usize::MAX,
            args,
        }))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => Vec::new(),
            ExprKind::Unary(_, e) => vec![e],
            ExprKind::Binary(_, l, r) => vec![l, r],
            ExprKind::Call(c) => c.args.iter().collect(),
        }
    }

    /// Pre-order traversal over this expression and all its subexpressions.
    pub fn walk<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        out.push(self);
        for c in self.children() {
            c.walk(out);
        }
    }

    pub fn subexprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    /// Variable names in order of first occurrence.
    pub fn free_vars(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for e in self.subexprs() {
            if let ExprKind::Var(v) = &e.kind {
                if !names.contains(&v.name.as_str()) {
                    names.push(&v.name);
                }
            }
        }
        names
    }

    pub fn has_call(&self) -> bool {
        self.subexprs().iter().any(|e| matches!(e.kind, ExprKind::Call(_)))
    }

    /// Returns a copy with the `index`-th pre-order subexpression replaced.
    pub fn replace_nth(&self, index: usize, with: &Expr) -> Expr {
        fn go(e: &Expr, counter: &mut usize, index: usize, with: &Expr) -> Expr {
            let here = *counter;
            *counter += 1;
            if here == index {
                // skip the counter past the replaced subtree
                *counter += e.subexprs().len() - 1;
                return with.clone();
            }
            let kind = match &e.kind {
                ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => e.kind.clone(),
                ExprKind::Unary(op, x) => ExprKind::Unary(*op, Box::new(go(x, counter, index, with))),
                ExprKind::Binary(op, l, r) => {
                    let l = go(l, counter, index, with);
                    let r = go(r, counter, index, with);
                    ExprKind::Binary(*op, Box::new(l), Box::new(r))
                }
                ExprKind::Call(c) => ExprKind::Call(CallExpr {
                    name: c.name.clone(),
                    func: c.func,
                    args: c.args.iter().map(|a| go(a, counter, index, with)).collect(),
                }),
            };
            Expr {
                id: e.id,
                pos: e.pos,
                kind,
            }
        }
        let mut counter = 0;
        go(self, &mut counter, index, with)
    }
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Assign {
        target: VarRef,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Expr),
    Assert(Expr),
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub id: NodeId,
    pub pos: Pos,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            id: 0,
            pos: Pos::default(),
            kind,
        }
    }

    pub fn assign(name: impl Into<String>, value: Expr) -> Self {
        Stmt::new(StmtKind::Assign {
            target: VarRef::new(name),
            value,
        })
    }

    pub fn ret(value: Expr) -> Self {
        Stmt::new(StmtKind::Return(value))
    }

    pub fn if_else(cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt>) -> Self {
        Stmt::new(StmtKind::If {
            cond,
            then_body,
            else_body,
        })
    }

    /// The expression a statement evaluates directly (guard, right-hand side,
    /// returned value, asserted condition).
    pub fn head_expr(&self) -> &Expr {
        match &self.kind {
            StmtKind::Assign { value, .. } => value,
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond,
            StmtKind::Return(e) | StmtKind::Assert(e) => e,
        }
    }

    /// Copy of this statement with its head expression swapped out; nested
    /// bodies are kept as they are.
    pub fn with_head_expr(&self, e: Expr) -> Stmt {
        let kind = match &self.kind {
            StmtKind::Assign { target, .. } => StmtKind::Assign {
                target: target.clone(),
                value: e,
            },
            StmtKind::If {
                then_body, else_body, ..
            } => StmtKind::If {
                cond: e,
                then_body: then_body.clone(),
                else_body: else_body.clone(),
            },
            StmtKind::While { body, .. } => StmtKind::While {
                cond: e,
                body: body.clone(),
            },
            StmtKind::Return(_) => StmtKind::Return(e),
            StmtKind::Assert(_) => StmtKind::Assert(e),
        };
        Stmt {
            id: self.id,
            pos: self.pos,
            kind,
        }
    }

    pub fn is_guard(&self) -> bool {
        matches!(self.kind, StmtKind::If { .. } | StmtKind::While { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug)]
pub struct FunctionDef {
    pub id: NodeId,
    pub pos: Pos,
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Type,
    pub locals: Vec<Param>,
    pub body: Vec<Stmt>,
}

impl FunctionDef {
    /// Parameters followed by locals, in frame-slot order.
    pub fn variables(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().chain(self.locals.iter())
    }

    pub fn var_type(&self, name: &str) -> Option<Type> {
        self.variables().find(|p| p.name == name).map(|p| p.ty)
    }

    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.variables().position(|p| p.name == name)
    }

    pub fn frame_size(&self) -> usize {
        self.params.len() + self.locals.len()
    }

    /// Statements of the body in canonical pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        fn go<'a>(list: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in list {
                out.push(s);
                match &s.kind {
                    StmtKind::If {
                        then_body, else_body, ..
                    } => {
                        go(then_body, out);
                        go(else_body, out);
                    }
                    StmtKind::While { body, .. } => go(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        go(&self.body, &mut out);
        out
    }
}
