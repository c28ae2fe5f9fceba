//! MiniLang: a small imperative language with `int`/`bool` scalars, used as
//! the repair target. See `docs/minilang.md` for the grammar.

pub mod ast;
mod check;
pub mod interp;
pub mod parser;
pub mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Expr, FunctionDef, NodeId, Pos, Stmt, Type};
pub use interp::{
    run, CallSpec, CoverageProfile, EntryError, ExecError, Limits, ObservationLog, Probes, RunOutput, Subject,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("type error at {pos}: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("missing return at {pos}: function `{func}` does not return on every path")]
    MissingReturn { pos: Pos, func: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn ty(self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }

    pub fn default_of(ty: Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A statement position inside a function: the unit fault localization and
/// patching work on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Location {
    pub function: String,
    pub stmt: NodeId,
    /// Index of the statement in the function's pre-order statement walk.
    pub ordinal: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: u32,
    pub function: String,
    pub stmts: Vec<NodeId>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct StmtMeta {
    pub func: usize,
    pub ordinal: u32,
    pub block: u32,
    pub leader: bool,
}

/// A parsed, numbered and statically checked MiniLang program.
#[derive(Clone, Debug)]
pub struct Program {
    functions: Vec<FunctionDef>,
    node_count: u32,
    stmt_meta: Vec<Option<StmtMeta>>,
    blocks: Vec<Vec<BasicBlock>>,
}

/// Parses and checks MiniLang source text.
pub fn parse(source: &str) -> Result<Program, LangError> {
    Program::from_functions(parser::parse_functions(source)?)
}

impl Program {
    /// Numbers, checks and analyses a set of function definitions. Used both
    /// after parsing and after patching.
    pub fn from_functions(functions: Vec<FunctionDef>) -> Result<Program, LangError> {
        Self::build(functions, None)
    }

    /// Like [`Program::from_functions`] for a variant of an already checked
    /// program in which only `functions[changed]` differs.
    pub fn from_variant(functions: Vec<FunctionDef>, changed: usize) -> Result<Program, LangError> {
        Self::build(functions, Some(changed))
    }

    fn build(mut functions: Vec<FunctionDef>, changed: Option<usize>) -> Result<Program, LangError> {
        let mut next: NodeId = 0;
        for f in functions.iter_mut() {
            f.id = next;
            next += 1;
            for s in f.body.iter_mut() {
                number_stmt(s, &mut next);
            }
        }
        check::check_bodies(&mut functions, changed)?;

        let mut stmt_meta = vec![None; next as usize];
        let mut blocks = Vec::with_capacity(functions.len());
        for (fi, f) in functions.iter().enumerate() {
            let mut fb: Vec<BasicBlock> = Vec::new();
            build_blocks(&f.body, fi, &f.name, &mut fb, &mut stmt_meta);
            for (ordinal, s) in f.statements().iter().enumerate() {
                if let Some(m) = stmt_meta[s.id as usize].as_mut() {
                    m.ordinal = ordinal as u32;
                }
            }
            blocks.push(fb);
        }
        Ok(Program {
            functions,
            node_count: next,
            stmt_meta,
            blocks,
        })
    }

    pub fn functions(&self) -> &[FunctionDef] {
        &self.functions
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Basic blocks of a function, indexed by block id.
    pub fn blocks(&self, func: usize) -> &[BasicBlock] {
        &self.blocks[func]
    }

    pub(crate) fn meta(&self, stmt: NodeId) -> Option<StmtMeta> {
        self.stmt_meta.get(stmt as usize).copied().flatten()
    }

    /// Block id holding statement `stmt`, if it is a statement node.
    pub fn block_of(&self, stmt: NodeId) -> Option<u32> {
        self.meta(stmt).map(|m| m.block)
    }

    /// Statement locations of `func` in canonical pre-order.
    pub fn locations(&self, func: &str) -> Vec<Location> {
        let Some(f) = self.function(func) else {
            return Vec::new();
        };
        f.statements()
            .iter()
            .enumerate()
            .map(|(i, s)| Location {
                function: f.name.clone(),
                stmt: s.id,
                ordinal: i as u32,
            })
            .collect()
    }

    pub fn stmt(&self, id: NodeId) -> Option<&Stmt> {
        let m = self.meta(id)?;
        self.functions[m.func].statements().into_iter().find(|s| s.id == id)
    }

    /// Type-checks `e` in the scope of function `func`, resolving its
    /// variable slots and callees. Returns the expression's type.
    pub fn check_expr(&self, func: usize, e: &mut Expr) -> Result<Type, LangError> {
        check::check_expr_in(&self.functions, func, e)
    }

    /// Checks `with` as a replacement for statement `stmt`, resolving it in
    /// place; accepted exactly when the patched program would build.
    pub fn check_patch(&self, stmt: NodeId, with: &mut [Stmt]) -> Result<(), LangError> {
        let func = self.meta(stmt).map(|m| m.func).ok_or_else(|| LangError::Type {
            pos: Pos::default(),
            msg: format!("no statement with id {stmt}"),
        })?;
        check::check_patch(&self.functions, func, stmt, with)
    }

    pub fn to_source(&self) -> String {
        printer::program_to_string(&self.functions)
    }
}

fn number_expr(e: &mut Expr, next: &mut NodeId) {
    e.id = *next;
    *next += 1;
    match &mut e.kind {
        ast::ExprKind::Unary(_, x) => number_expr(x, next),
        ast::ExprKind::Binary(_, l, r) => {
            number_expr(l, next);
            number_expr(r, next);
        }
        ast::ExprKind::Call(c) => {
            for a in c.args.iter_mut() {
                number_expr(a, next);
            }
        }
        _ => {}
    }
}

fn number_stmt(s: &mut Stmt, next: &mut NodeId) {
    s.id = *next;
    *next += 1;
    match &mut s.kind {
        ast::StmtKind::Assign { value, .. } => number_expr(value, next),
        ast::StmtKind::Return(e) | ast::StmtKind::Assert(e) => number_expr(e, next),
        ast::StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            number_expr(cond, next);
            for s in then_body.iter_mut().chain(else_body.iter_mut()) {
                number_stmt(s, next);
            }
        }
        ast::StmtKind::While { cond, body } => {
            number_expr(cond, next);
            for s in body.iter_mut() {
                number_stmt(s, next);
            }
        }
    }
}

// Leader analysis over one statement list: `if`/`while` headers form their
// own single-statement blocks, and the statement after a header or a
// `return` starts a new block, as does the first statement of every list.
fn build_blocks(list: &[Stmt], func: usize, name: &str, blocks: &mut Vec<BasicBlock>, meta: &mut [Option<StmtMeta>]) {
    let mut open: Option<u32> = None;
    for s in list {
        let new_block = |blocks: &mut Vec<BasicBlock>| {
            let id = blocks.len() as u32;
            blocks.push(BasicBlock {
                id,
                function: name.to_string(),
                stmts: vec![s.id],
            });
            id
        };
        match &s.kind {
            ast::StmtKind::If {
                then_body, else_body, ..
            } => {
                let id = new_block(blocks);
                meta[s.id as usize] = Some(StmtMeta {
                    func,
                    ordinal: 0,
                    block: id,
                    leader: true,
                });
                build_blocks(then_body, func, name, blocks, meta);
                build_blocks(else_body, func, name, blocks, meta);
                open = None;
            }
            ast::StmtKind::While { body, .. } => {
                let id = new_block(blocks);
                meta[s.id as usize] = Some(StmtMeta {
                    func,
                    ordinal: 0,
                    block: id,
                    leader: true,
                });
                build_blocks(body, func, name, blocks, meta);
                open = None;
            }
            _ => {
                let (id, leader) = match open {
                    Some(id) => {
                        blocks[id as usize].stmts.push(s.id);
                        (id, false)
                    }
                    None => (new_block(blocks), true),
                };
                meta[s.id as usize] = Some(StmtMeta {
                    func,
                    ordinal: 0,
                    block: id,
                    leader,
                });
                open = if matches!(s.kind, ast::StmtKind::Return(_)) {
                    None
                } else {
                    Some(id)
                };
            }
        }
    }
}
