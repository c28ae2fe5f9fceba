//! Static checks: name resolution, typing, and the all-paths-return rule.

use std::collections::HashMap;

use super::ast::*;
use super::LangError;

struct Signature {
    params: Vec<Type>,
    ret: Type,
}

/// Checks the signatures of all functions and the bodies of all of them,
/// or of `only` when given (the others must already have passed).
pub(crate) fn check_bodies(functions: &mut [FunctionDef], only: Option<usize>) -> Result<(), LangError> {
    let mut sigs: HashMap<String, (usize, Signature)> = HashMap::new();
    for (i, f) in functions.iter().enumerate() {
        if sigs.contains_key(&f.name) {
            return Err(LangError::Type {
                pos: f.pos,
                msg: format!("function `{}` defined twice", f.name),
            });
        }
        sigs.insert(
            f.name.clone(),
            (
                i,
                Signature {
                    params: f.params.iter().map(|p| p.ty).collect(),
                    ret: f.ret,
                },
            ),
        );
    }
    for (i, f) in functions.iter_mut().enumerate() {
        if only.is_some_and(|o| o != i) {
            continue;
        }
        let mut seen: Vec<&str> = Vec::new();
        for v in f.params.iter().chain(f.locals.iter()) {
            if seen.contains(&v.name.as_str()) {
                return Err(LangError::Type {
                    pos: f.pos,
                    msg: format!("variable `{}` declared twice in `{}`", v.name, f.name),
                });
            }
            seen.push(&v.name);
        }
        let env = Env {
            vars: f
                .params
                .iter()
                .chain(f.locals.iter())
                .map(|p| (p.name.clone(), p.ty))
                .collect(),
            sigs: &sigs,
            ret: f.ret,
        };
        for s in f.body.iter_mut() {
            env.stmt(s)?;
        }
        if !always_returns(&f.body) {
            return Err(LangError::MissingReturn {
                pos: f.pos,
                func: f.name.clone(),
            });
        }
    }
    Ok(())
}

/// True when every path through `body` ends in a `return`.
pub fn always_returns(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If {
            then_body, else_body, ..
        } => always_returns(then_body) && always_returns(else_body),
        _ => false,
    })
}

struct Env<'a> {
    vars: Vec<(String, Type)>,
    sigs: &'a HashMap<String, (usize, Signature)>,
    ret: Type,
}

impl Env<'_> {
    fn lookup(&self, v: &mut VarRef, pos: Pos) -> Result<Type, LangError> {
        match self.vars.iter().position(|(n, _)| *n == v.name) {
            Some(i) => {
                v.slot = i;
                Ok(self.vars[i].1)
            }
            None => Err(LangError::Type {
                pos,
                msg: format!("undeclared variable `{}`", v.name),
            }),
        }
    }

    fn expect(&self, e: &mut Expr, want: Type, what: &str) -> Result<(), LangError> {
        let got = self.expr(e)?;
        if got != want {
            return Err(LangError::Type {
                pos: e.pos,
                msg: format!("{what} must be {want}, found {got}"),
            });
        }
        Ok(())
    }

    fn stmt(&self, s: &mut Stmt) -> Result<(), LangError> {
        let pos = s.pos;
        match &mut s.kind {
            StmtKind::Assign { target, value } => {
                let want = self.lookup(target, pos)?;
                self.expect(value, want, &format!("value assigned to `{}`", target.name))
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.expect(cond, Type::Bool, "`if` condition")?;
                for s in then_body.iter_mut().chain(else_body.iter_mut()) {
                    self.stmt(s)?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.expect(cond, Type::Bool, "`while` condition")?;
                for s in body.iter_mut() {
                    self.stmt(s)?;
                }
                Ok(())
            }
            StmtKind::Return(e) => self.expect(e, self.ret, "returned value"),
            StmtKind::Assert(e) => self.expect(e, Type::Bool, "asserted condition"),
        }
    }

    /// Type of `e`, resolving variable slots and callees along the way.
    pub fn expr(&self, e: &mut Expr) -> Result<Type, LangError> {
        let pos = e.pos;
        match &mut e.kind {
            ExprKind::Int(_) => Ok(Type::Int),
            ExprKind::Bool(_) => Ok(Type::Bool),
            ExprKind::Var(v) => self.lookup(v, pos),
            ExprKind::Unary(op, x) => {
                let want = match op {
                    UnOp::Neg => Type::Int,
                    UnOp::Not => Type::Bool,
                };
                self.expect(x, want, "operand")?;
                Ok(want)
            }
            ExprKind::Binary(op, l, r) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                    self.expect(l, Type::Int, "arithmetic operand")?;
                    self.expect(r, Type::Int, "arithmetic operand")?;
                    Ok(Type::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    self.expect(l, Type::Int, "comparison operand")?;
                    self.expect(r, Type::Int, "comparison operand")?;
                    Ok(Type::Bool)
                }
                BinOp::Eq | BinOp::Ne => {
                    let lt = self.expr(l)?;
                    self.expect(r, lt, "right operand of equality")?;
                    Ok(Type::Bool)
                }
                BinOp::And | BinOp::Or => {
                    self.expect(l, Type::Bool, "logical operand")?;
                    self.expect(r, Type::Bool, "logical operand")?;
                    Ok(Type::Bool)
                }
            },
            ExprKind::Call(c) => {
                let Some((idx, sig)) = self.sigs.get(&c.name) else {
                    return Err(LangError::Type {
                        pos,
                        msg: format!("call to undefined function `{}`", c.name),
                    });
                };
                if sig.params.len() != c.args.len() {
                    return Err(LangError::Type {
                        pos,
                        msg: format!(
                            "`{}` takes {} argument(s), {} given",
                            c.name,
                            sig.params.len(),
                            c.args.len()
                        ),
                    });
                }
                c.func = *idx;
                for (a, want) in c.args.iter_mut().zip(sig.params.iter()) {
                    self.expect(a, *want, "argument")?;
                }
                Ok(sig.ret)
            }
        }
    }
}

/// Checks `with` as the replacement of statement `stmt` in
/// `functions[func]`, resolving it in place: the outcome equals checking
/// the patched function as a whole, given the original passed.
pub(crate) fn check_patch(
    functions: &[FunctionDef],
    func: usize,
    stmt: NodeId,
    with: &mut [Stmt],
) -> Result<(), LangError> {
    let sigs = signatures(functions);
    let f = &functions[func];
    let env = Env {
        vars: f.variables().map(|p| (p.name.clone(), p.ty)).collect(),
        sigs: &sigs,
        ret: f.ret,
    };
    for s in with.iter_mut() {
        env.stmt(s)?;
    }
    if !returns_patched(&f.body, stmt, with) {
        return Err(LangError::MissingReturn {
            pos: f.pos,
            func: f.name.clone(),
        });
    }
    Ok(())
}

fn returns_patched(body: &[Stmt], stmt: NodeId, with: &[Stmt]) -> bool {
    body.iter().any(|s| {
        if s.id == stmt {
            return always_returns(with);
        }
        match &s.kind {
            StmtKind::Return(_) => true,
            StmtKind::If {
                then_body, else_body, ..
            } => returns_patched(then_body, stmt, with) && returns_patched(else_body, stmt, with),
            _ => false,
        }
    })
}

fn signatures(functions: &[FunctionDef]) -> HashMap<String, (usize, Signature)> {
    functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            (
                f.name.clone(),
                (
                    i,
                    Signature {
                        params: f.params.iter().map(|p| p.ty).collect(),
                        ret: f.ret,
                    },
                ),
            )
        })
        .collect()
}

/// Type-checks a free-standing expression against the variables and
/// signatures of `functions[func]`, resolving slots in place.
pub(crate) fn check_expr_in(functions: &[FunctionDef], func: usize, e: &mut Expr) -> Result<Type, LangError> {
    let sigs = signatures(functions);
    let f = &functions[func];
    let env = Env {
        vars: f.variables().map(|p| (p.name.clone(), p.ty)).collect(),
        sigs: &sigs,
        ret: f.ret,
    };
    env.expr(e)
}
