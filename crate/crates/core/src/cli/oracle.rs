//! Correctness oracle for corpus runs. A valid fix counts as correct when
//! its faulty function normalizes to the same tree as the reference, or
//! when it passes the bug's hidden tests.

use std::collections::{BTreeSet, HashMap};

use crate::engine::CorrectnessJudge;
use crate::lang::ast::{BinOp, Expr, ExprKind, StmtKind, UnOp, VarRef};
use crate::lang::printer::{expr_to_string, function_to_string, stmt_header};
use crate::lang::{FunctionDef, Limits, Program, Stmt};
use crate::testkit::{run_test, TestSuite, Verdict};

pub struct CorrectnessOracle {
    fixme: String,
    normalized_reference: String,
    hidden: TestSuite,
    reference_locations: BTreeSet<u32>,
    limits: Limits,
}

impl CorrectnessOracle {
    pub fn new(original: &Program, reference: &Program, fixme: &str, hidden: TestSuite) -> Option<Self> {
        let orig_f = original.function(fixme)?;
        let ref_f = reference.function(fixme)?;
        Some(CorrectnessOracle {
            fixme: fixme.to_string(),
            normalized_reference: normalize(ref_f),
            hidden,
            reference_locations: changed_locations(orig_f, ref_f),
            limits: Limits::default(),
        })
    }

    pub fn same_as_reference(&self, candidate: &Program) -> bool {
        candidate
            .function(&self.fixme)
            .is_some_and(|f| normalize(f) == self.normalized_reference)
    }

    pub fn passes_hidden(&self, candidate: &Program) -> bool {
        self.hidden
            .tests()
            .iter()
            .all(|t| run_test(candidate, t, self.limits).verdict == Verdict::Pass)
    }

    pub fn hidden(&self) -> &TestSuite {
        &self.hidden
    }
}

impl CorrectnessJudge for CorrectnessOracle {
    fn is_correct(&self, candidate: &Program) -> bool {
        self.same_as_reference(candidate) || self.passes_hidden(candidate)
    }

    fn reference_locations(&self) -> BTreeSet<u32> {
        self.reference_locations.clone()
    }
}

/// Canonical text of a function: variables renamed by role and first use,
/// `>`/`>=` flipped, double negations dropped, commutative operands sorted,
/// negated if-conditions with an else branch swapped.
pub fn normalize(f: &FunctionDef) -> String {
    let mut names: HashMap<String, String> = HashMap::new();
    for (i, p) in f.params.iter().enumerate() {
        names.insert(p.name.clone(), format!("p{i}"));
    }
    let mut order: Vec<String> = Vec::new();
    for s in f.statements() {
        let mut vars: Vec<&str> = Vec::new();
        if let StmtKind::Assign { target, .. } = &s.kind {
            vars.push(&target.name);
        }
        vars.extend(s.head_expr().free_vars());
        for v in vars {
            if f.locals.iter().any(|l| l.name == v) && !order.iter().any(|o| o == v) {
                order.push(v.to_string());
            }
        }
    }
    for l in &f.locals {
        if !order.contains(&l.name) {
            order.push(l.name.clone());
        }
    }
    for (i, l) in order.iter().enumerate() {
        names.insert(l.clone(), format!("v{i}"));
    }

    let mut g = f.clone();
    for p in g.params.iter_mut() {
        p.name = names[&p.name].clone();
    }
    let mut locals = g.locals.clone();
    for l in locals.iter_mut() {
        l.name = names[&l.name].clone();
    }
    locals.sort_by(|a, b| a.name.cmp(&b.name));
    g.locals = locals;
    g.body = g.body.iter().map(|s| norm_stmt(s, &names)).collect();
    function_to_string(&g)
}

fn norm_stmt(s: &Stmt, names: &HashMap<String, String>) -> Stmt {
    let kind = match &s.kind {
        StmtKind::Assign { target, value } => StmtKind::Assign {
            target: VarRef::new(names.get(&target.name).cloned().unwrap_or_else(|| target.name.clone())),
            value: norm_expr(value, names),
        },
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let mut cond = norm_expr(cond, names);
            let mut then_body: Vec<Stmt> = then_body.iter().map(|x| norm_stmt(x, names)).collect();
            let mut else_body: Vec<Stmt> = else_body.iter().map(|x| norm_stmt(x, names)).collect();
            let negated = matches!(cond.kind, ExprKind::Unary(UnOp::Not, _));
            if (negated && !else_body.is_empty()) || then_body.is_empty() && !else_body.is_empty() {
                cond = norm_expr(&Expr::not(cond), names);
                std::mem::swap(&mut then_body, &mut else_body);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            }
        }
        StmtKind::While { cond, body } => StmtKind::While {
            cond: norm_expr(cond, names),
            body: body.iter().map(|x| norm_stmt(x, names)).collect(),
        },
        StmtKind::Return(e) => StmtKind::Return(norm_expr(e, names)),
        StmtKind::Assert(e) => StmtKind::Assert(norm_expr(e, names)),
    };
    Stmt::new(kind)
}

fn norm_expr(e: &Expr, names: &HashMap<String, String>) -> Expr {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) => Expr::new(e.kind.clone()),
        ExprKind::Var(v) => Expr::var(names.get(&v.name).cloned().unwrap_or_else(|| v.name.clone())),
        ExprKind::Unary(UnOp::Not, x) => Expr::not(norm_expr(x, names)),
        ExprKind::Unary(op, x) => Expr::unary(*op, norm_expr(x, names)),
        ExprKind::Binary(op, l, r) => {
            let (mut op, mut l, mut r) = (*op, norm_expr(l, names), norm_expr(r, names));
            match op {
                BinOp::Gt => {
                    op = BinOp::Lt;
                    std::mem::swap(&mut l, &mut r);
                }
                BinOp::Ge => {
                    op = BinOp::Le;
                    std::mem::swap(&mut l, &mut r);
                }
                _ => {}
            }
            if op.is_commutative() && expr_to_string(&r) < expr_to_string(&l) {
                std::mem::swap(&mut l, &mut r);
            }
            Expr::binary(op, l, r)
        }
        ExprKind::Call(c) => Expr::call(&c.name, c.args.iter().map(|a| norm_expr(a, names)).collect()),
    }
}

/// Ordinals of `original`'s statements that the reference changes, from an
/// LCS alignment of pre-order statement headers. A pure insertion marks
/// the original statement it lands in front of (or the last one).
pub fn changed_locations(original: &FunctionDef, reference: &FunctionDef) -> BTreeSet<u32> {
    let a: Vec<String> = original.statements().into_iter().map(stmt_header).collect();
    let b: Vec<String> = reference.statements().into_iter().map(stmt_header).collect();
    let ops = similar::capture_diff_slices(similar::Algorithm::Myers, &a, &b);
    let mut out = BTreeSet::new();
    for op in ops {
        match op {
            similar::DiffOp::Equal { .. } => {}
            similar::DiffOp::Delete { old_index, old_len, .. }
            | similar::DiffOp::Replace { old_index, old_len, .. } => {
                out.extend((old_index..old_index + old_len).map(|i| i as u32));
            }
            similar::DiffOp::Insert { old_index, .. } => {
                let at = old_index.min(a.len().saturating_sub(1));
                out.insert(at as u32);
            }
        }
    }
    out
}
