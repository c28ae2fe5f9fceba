//! Fix ingredients: the typed expressions and constants candidate fixes may
//! use at a location in the faulty function.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::lang::ast::{Expr, ExprKind, UnOp};
use crate::lang::printer::expr_to_string;
use crate::lang::{FunctionDef, Program, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolScope {
    /// Ingredients found in the faulty function only.
    Base,
    /// Ingredients found anywhere in the program.
    Extended,
}

#[derive(Clone, Debug)]
pub struct ExpressionPool {
    pub scope: PoolScope,
    /// Index of the faulty function; all pool expressions are resolved in its
    /// scope.
    pub func: usize,
    pub constants: Vec<i64>,
    pub ints: Vec<Expr>,
    pub bools: Vec<Expr>,
}

impl ExpressionPool {
    pub fn base(program: &Program, fixme: &str) -> Option<Self> {
        Self::build(program, fixme, PoolScope::Base)
    }

    pub fn extended(program: &Program, fixme: &str) -> Option<Self> {
        Self::build(program, fixme, PoolScope::Extended)
    }

    pub fn build(program: &Program, fixme: &str, scope: PoolScope) -> Option<Self> {
        let func = program.function_index(fixme)?;
        let f = &program.functions()[func];
        let sources: Vec<&FunctionDef> = match scope {
            PoolScope::Base => vec![f],
            PoolScope::Extended => program.functions().iter().collect(),
        };

        let mut constants = vec![0, 1];
        for g in &sources {
            for c in literals(g) {
                if !constants.contains(&c) {
                    constants.push(c);
                }
            }
        }

        let mut pool = ExpressionPool {
            scope,
            func,
            constants: constants.clone(),
            ints: Vec::new(),
            bools: Vec::new(),
        };
        let mut seen = HashSet::new();
        for c in constants {
            pool.push(program, Expr::int(c), &mut seen);
        }
        for v in f.variables() {
            pool.push(program, Expr::var(&v.name), &mut seen);
        }
        let names: Vec<&str> = f.variables().map(|p| p.name.as_str()).collect();
        for g in &sources {
            for s in g.statements() {
                for e in s.head_expr().subexprs() {
                    if matches!(e.kind, ExprKind::Int(_) | ExprKind::Bool(_)) {
                        continue;
                    }
                    if calls_function(e, fixme) {
                        continue;
                    }
                    if e.free_vars().iter().all(|v| names.contains(v)) {
                        pool.push(program, e.clone(), &mut seen);
                    }
                }
            }
        }
        if scope == PoolScope::Extended {
            for g in program.functions() {
                if g.name != fixme && g.params.is_empty() {
                    pool.push(program, Expr::call(&g.name, Vec::new()), &mut seen);
                }
            }
        }
        Some(pool)
    }

    fn push(&mut self, program: &Program, mut e: Expr, seen: &mut HashSet<String>) {
        let text = expr_to_string(&e);
        if seen.contains(&text) {
            return;
        }
        // expressions lifted from other functions must type-check here too
        let Ok(ty) = program.check_expr(self.func, &mut e) else {
            return;
        };
        seen.insert(text);
        match ty {
            Type::Int => self.ints.push(e),
            Type::Bool => self.bools.push(e),
        }
    }

    pub fn of_type(&self, ty: Type) -> &[Expr] {
        match ty {
            Type::Int => &self.ints,
            Type::Bool => &self.bools,
        }
    }

    pub fn len(&self) -> usize {
        self.ints.len() + self.bools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn calls_function(e: &Expr, name: &str) -> bool {
    e.subexprs()
        .iter()
        .any(|x| matches!(&x.kind, ExprKind::Call(c) if c.name == name))
}

/// Integer literals of a function in pre-order; `-n` counts as one literal.
pub fn literals(f: &FunctionDef) -> Vec<i64> {
    fn go(e: &Expr, out: &mut Vec<i64>) {
        match &e.kind {
            ExprKind::Int(v) => out.push(*v),
            ExprKind::Unary(UnOp::Neg, inner) if matches!(inner.kind, ExprKind::Int(_)) => {
                if let ExprKind::Int(v) = inner.kind {
                    out.push(-v);
                }
            }
            _ => {
                for c in e.children() {
                    go(c, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    for s in f.statements() {
        go(s.head_expr(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    const SRC: &str = "
fn level_on(level: int) -> bool {
    return level >= 7;
}
fn report(level: int) -> int {
    if (level_on(level)) {
        return 2;
    }
    return 3;
}
fn process(provided: int, level: int) -> int {
    var removed: int;
    if (provided != 0) {
        removed = removed + 10;
    }
    return removed;
}
";

    fn texts(v: &[Expr]) -> Vec<String> {
        v.iter().map(expr_to_string).collect()
    }

    #[test]
    fn base_pool_draws_from_fixme_only() {
        let p = parse(SRC).unwrap();
        let pool = ExpressionPool::base(&p, "process").unwrap();
        assert_eq!(pool.constants, vec![0, 1, 10]);
        let ints = texts(&pool.ints);
        assert_eq!(
            ints,
            vec!["0", "1", "10", "provided", "level", "removed", "removed + 10"]
        );
        assert_eq!(texts(&pool.bools), vec!["provided != 0"]);
    }

    #[test]
    fn extended_pool_adds_whole_program_ingredients() {
        let p = parse(SRC).unwrap();
        let pool = ExpressionPool::extended(&p, "process").unwrap();
        assert_eq!(pool.constants, vec![0, 1, 7, 2, 3, 10]);
        let bools = texts(&pool.bools);
        assert!(bools.contains(&"level >= 7".to_string()));
        assert!(bools.contains(&"level_on(level)".to_string()));
        assert!(bools.contains(&"provided != 0".to_string()));
        // base entries are a subset of the extended ones
        let base = ExpressionPool::base(&p, "process").unwrap();
        for e in texts(&base.ints).iter().chain(texts(&base.bools).iter()) {
            assert!(texts(&pool.ints).contains(e) || bools.contains(e), "{e} missing");
        }
    }

    #[test]
    fn excludes_calls_to_fixme() {
        let p = parse(
            "fn f(x: int) -> int { if (x > 0) { return f(x - 1); } return 0; }
             fn main(x: int) -> int { return f(x) + 1; }",
        )
        .unwrap();
        let pool = ExpressionPool::extended(&p, "f").unwrap();
        assert!(texts(&pool.ints).iter().all(|t| !t.contains("f(")));
    }
}
