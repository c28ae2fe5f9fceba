//! Instrumented tree-walking interpreter.
//!
//! Every run reports per-block execution counts. When a [`Probes`] set is
//! installed, each probe expression attached to a statement is evaluated
//! every time that statement is reached, before it executes, and the
//! true/false outcome is tallied. Probes are call-free and are evaluated
//! without consuming budget, so they never change a run's result.
//!
//! A [`Subject`] runs a program with one statement swapped for a checked
//! replacement, without building the patched program.

use thiserror::Error;

use super::ast::*;
use super::{Program, Value};

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Maximum number of statement executions plus calls.
    pub steps: u64,
    pub max_depth: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            steps: 1_000_000,
            max_depth: 200,
        }
    }
}

impl Limits {
    pub fn with_steps(steps: u64) -> Self {
        Limits {
            steps,
            ..Limits::default()
        }
    }
}

/// Function name plus argument values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallSpec {
    pub func: String,
    pub args: Vec<Value>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EntryError {
    #[error("no function named `{0}`")]
    UnknownFunction(String),
    #[error("`{func}` takes {expected} argument(s), {given} given")]
    Arity {
        func: String,
        expected: usize,
        given: usize,
    },
    #[error("argument {index} of `{func}` must be {expected}")]
    ArgType { func: String, index: usize, expected: Type },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("step budget exhausted")]
    BudgetExhausted,
}

/// Execution counts per basic block, indexed `[function][block id]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoverageProfile {
    counts: Vec<Vec<u64>>,
}

impl CoverageProfile {
    fn for_program(p: &Program) -> Self {
        CoverageProfile {
            counts: (0..p.functions().len()).map(|i| vec![0; p.blocks(i).len()]).collect(),
        }
    }

    /// Builds a profile from raw `[function][block]` counts.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        CoverageProfile { counts }
    }

    pub fn block_counts(&self, func: usize) -> &[u64] {
        self.counts.get(func).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn covers_function(&self, func: usize) -> bool {
        self.block_counts(func).iter().any(|&c| c > 0)
    }
}

/// Probe expressions keyed by the statement they are attached to.
#[derive(Clone, Debug, Default)]
pub struct Probes {
    by_stmt: Vec<Vec<(usize, Expr)>>,
    groups: usize,
}

impl Probes {
    pub fn new(program: &Program) -> Self {
        Probes {
            by_stmt: vec![Vec::new(); program.node_count() as usize],
            groups: 0,
        }
    }

    /// Attaches a resolved, call-free boolean expression to `stmt`; returns
    /// its group index in the observation log.
    pub fn attach(&mut self, stmt: NodeId, expr: Expr) -> usize {
        let g = self.groups;
        self.by_stmt[stmt as usize].push((g, expr));
        self.groups += 1;
        g
    }

    pub fn len(&self) -> usize {
        self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups == 0
    }
}

/// `[false count, true count]` per probe group. A probe whose evaluation
/// errors is left unobserved for that visit.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ObservationLog {
    pub counts: Vec<[u32; 2]>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub result: Result<Value, ExecError>,
    pub coverage: CoverageProfile,
    pub observations: Option<ObservationLog>,
}

enum Flow {
    Normal,
    Return(Value),
}

/// A program, optionally with statement `.0` replaced by the statements
/// `.1` (already checked against the program, see
/// [`Program::check_patch`]).
#[derive(Clone, Copy, Debug)]
pub struct Subject<'a> {
    pub program: &'a Program,
    pub patch: Option<(NodeId, &'a [Stmt])>,
}

impl<'a> From<&'a Program> for Subject<'a> {
    fn from(program: &'a Program) -> Self {
        Subject { program, patch: None }
    }
}

impl Subject<'_> {
    /// Runs `entry` without coverage or probes; same result and step
    /// accounting as running the patched program itself.
    pub fn run(&self, entry: &CallSpec, limits: Limits) -> Result<Result<Value, ExecError>, EntryError> {
        let func = resolve_entry(self.program, entry)?;
        let mut m = Machine::new(self.program, limits, None, false);
        m.patch = self.patch;
        Ok(m.call(func, entry.args.clone()))
    }
}

struct Machine<'a> {
    program: &'a Program,
    patch: Option<(NodeId, &'a [Stmt])>,
    /// Set while a replacement runs, so the original statement it may
    /// wrap executes as itself.
    in_patch: bool,
    track: bool,
    limits: Limits,
    steps: u64,
    depth: u32,
    coverage: CoverageProfile,
    probes: Option<&'a Probes>,
    log: ObservationLog,
}

/// Runs `entry` on `program`. Entry precondition violations are reported as
/// `Err`; runtime failures are part of the returned output.
pub fn run(
    program: &Program,
    entry: &CallSpec,
    limits: Limits,
    probes: Option<&Probes>,
) -> Result<RunOutput, EntryError> {
    let func = resolve_entry(program, entry)?;
    let mut m = Machine::new(program, limits, probes, true);
    let result = m.call(func, entry.args.clone());
    Ok(RunOutput {
        result,
        coverage: m.coverage,
        observations: probes.map(|_| m.log),
    })
}

fn resolve_entry(program: &Program, entry: &CallSpec) -> Result<usize, EntryError> {
    let func = program
        .function_index(&entry.func)
        .ok_or_else(|| EntryError::UnknownFunction(entry.func.clone()))?;
    let f = &program.functions()[func];
    if f.params.len() != entry.args.len() {
        return Err(EntryError::Arity {
            func: f.name.clone(),
            expected: f.params.len(),
            given: entry.args.len(),
        });
    }
    for (i, (p, a)) in f.params.iter().zip(entry.args.iter()).enumerate() {
        if p.ty != a.ty() {
            return Err(EntryError::ArgType {
                func: f.name.clone(),
                index: i,
                expected: p.ty,
            });
        }
    }
    Ok(func)
}

impl<'a> Machine<'a> {
    fn new(program: &'a Program, limits: Limits, probes: Option<&'a Probes>, track: bool) -> Self {
        Machine {
            program,
            patch: None,
            in_patch: false,
            track,
            limits,
            steps: 0,
            depth: 0,
            coverage: if track {
                CoverageProfile::for_program(program)
            } else {
                CoverageProfile::default()
            },
            probes,
            log: ObservationLog {
                counts: vec![[0, 0]; probes.map_or(0, Probes::len)],
            },
        }
    }
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.limits.steps {
            Err(ExecError::BudgetExhausted)
        } else {
            Ok(())
        }
    }

    fn call(&mut self, func: usize, args: Vec<Value>) -> Result<Value, ExecError> {
        self.tick()?;
        if self.depth >= self.limits.max_depth {
            return Err(ExecError::Runtime("call depth limit exceeded".into()));
        }
        self.depth += 1;
        let f = &self.program.functions()[func];
        let mut frame = args;
        frame.extend(f.locals.iter().map(|l| Value::default_of(l.ty)));
        // a (recursive) call starts outside any replacement
        let outer = std::mem::replace(&mut self.in_patch, false);
        let flow = self.exec_list(&f.body, &mut frame);
        self.in_patch = outer;
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            // the checker guarantees every path returns
            Flow::Normal => Err(ExecError::Runtime(format!("`{}` fell off its end", f.name))),
        }
    }

    fn exec_list(&mut self, list: &[Stmt], frame: &mut Vec<Value>) -> Result<Flow, ExecError> {
        for s in list {
            let flow = match self.patch {
                Some((id, with)) if s.id == id && !self.in_patch => {
                    self.in_patch = true;
                    let flow = self.exec_list(with, frame);
                    self.in_patch = false;
                    flow?
                }
                _ => self.exec(s, frame)?,
            };
            if let Flow::Return(v) = flow {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn enter(&mut self, s: &Stmt, frame: &[Value]) -> Result<(), ExecError> {
        self.tick()?;
        if !self.track {
            return Ok(());
        }
        if let Some(m) = self.program.meta(s.id) {
            if m.leader {
                self.coverage.counts[m.func][m.block as usize] += 1;
            }
        }
        if let Some(probes) = self.probes {
            for (g, e) in &probes.by_stmt[s.id as usize] {
                if let Ok(Value::Bool(b)) = eval_pure(e, frame) {
                    self.log.counts[*g][b as usize] += 1;
                }
            }
        }
        Ok(())
    }

    fn exec(&mut self, s: &Stmt, frame: &mut Vec<Value>) -> Result<Flow, ExecError> {
        self.enter(s, frame)?;
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, frame)?;
                frame[target.slot] = v;
                Ok(Flow::Normal)
            }
            StmtKind::Return(e) => Ok(Flow::Return(self.eval(e, frame)?)),
            StmtKind::Assert(e) => {
                if self.eval_bool(e, frame)? {
                    Ok(Flow::Normal)
                } else {
                    Err(ExecError::Runtime("assertion failed".into()))
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.eval_bool(cond, frame)? {
                    self.exec_list(then_body, frame)
                } else {
                    self.exec_list(else_body, frame)
                }
            }
            StmtKind::While { cond, body } => {
                let mut first = true;
                loop {
                    if !first {
                        // every guard evaluation is a visit of the header
                        self.enter(s, frame)?;
                    }
                    first = false;
                    if !self.eval_bool(cond, frame)? {
                        return Ok(Flow::Normal);
                    }
                    if let Flow::Return(v) = self.exec_list(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
        }
    }

    fn eval_bool(&mut self, e: &Expr, frame: &[Value]) -> Result<bool, ExecError> {
        match self.eval(e, frame)? {
            Value::Bool(b) => Ok(b),
            Value::Int(_) => Err(ExecError::Runtime("expected bool".into())),
        }
    }

    fn eval(&mut self, e: &Expr, frame: &[Value]) -> Result<Value, ExecError> {
        match &e.kind {
            ExprKind::Call(c) => {
                let mut args = Vec::with_capacity(c.args.len());
                for a in &c.args {
                    args.push(self.eval(a, frame)?);
                }
                self.call(c.func, args)
            }
            ExprKind::Binary(BinOp::And, l, r) => {
                Ok(Value::Bool(self.eval_bool(l, frame)? && self.eval_bool(r, frame)?))
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                Ok(Value::Bool(self.eval_bool(l, frame)? || self.eval_bool(r, frame)?))
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l, frame)?;
                let b = self.eval(r, frame)?;
                binary(*op, a, b)
            }
            ExprKind::Unary(op, x) => {
                let v = self.eval(x, frame)?;
                unary(*op, v)
            }
            _ => eval_pure(e, frame),
        }
    }
}

/// Evaluates a call-free expression against a frame.
pub(crate) fn eval_pure(e: &Expr, frame: &[Value]) -> Result<Value, ExecError> {
    match &e.kind {
        ExprKind::Int(v) => Ok(Value::Int(*v)),
        ExprKind::Bool(b) => Ok(Value::Bool(*b)),
        ExprKind::Var(v) => frame
            .get(v.slot)
            .copied()
            .ok_or_else(|| ExecError::Runtime(format!("unresolved variable `{}`", v.name))),
        ExprKind::Unary(op, x) => unary(*op, eval_pure(x, frame)?),
        ExprKind::Binary(BinOp::And, l, r) => Ok(Value::Bool(
            as_bool(eval_pure(l, frame)?)? && as_bool(eval_pure(r, frame)?)?,
        )),
        ExprKind::Binary(BinOp::Or, l, r) => Ok(Value::Bool(
            as_bool(eval_pure(l, frame)?)? || as_bool(eval_pure(r, frame)?)?,
        )),
        ExprKind::Binary(op, l, r) => binary(*op, eval_pure(l, frame)?, eval_pure(r, frame)?),
        ExprKind::Call(c) => Err(ExecError::Runtime(format!("call to `{}` not allowed here", c.name))),
    }
}

fn as_bool(v: Value) -> Result<bool, ExecError> {
    v.as_bool().ok_or_else(|| ExecError::Runtime("expected bool".into()))
}

fn as_int(v: Value) -> Result<i64, ExecError> {
    v.as_int().ok_or_else(|| ExecError::Runtime("expected int".into()))
}

fn unary(op: UnOp, v: Value) -> Result<Value, ExecError> {
    match op {
        UnOp::Neg => as_int(v)?
            .checked_neg()
            .map(Value::Int)
            .ok_or_else(|| ExecError::Runtime("integer overflow".into())),
        UnOp::Not => Ok(Value::Bool(!as_bool(v)?)),
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, ExecError> {
    let overflow = || ExecError::Runtime("integer overflow".into());
    Ok(match op {
        BinOp::Add => Value::Int(as_int(a)?.checked_add(as_int(b)?).ok_or_else(overflow)?),
        BinOp::Sub => Value::Int(as_int(a)?.checked_sub(as_int(b)?).ok_or_else(overflow)?),
        BinOp::Mul => Value::Int(as_int(a)?.checked_mul(as_int(b)?).ok_or_else(overflow)?),
        BinOp::Div | BinOp::Rem => {
            let (x, y) = (as_int(a)?, as_int(b)?);
            if y == 0 {
                return Err(ExecError::Runtime("division by zero".into()));
            }
            let r = if op == BinOp::Div {
                x.checked_div(y)
            } else {
                x.checked_rem(y)
            };
            Value::Int(r.ok_or_else(overflow)?)
        }
        BinOp::Lt => Value::Bool(as_int(a)? < as_int(b)?),
        BinOp::Le => Value::Bool(as_int(a)? <= as_int(b)?),
        BinOp::Gt => Value::Bool(as_int(a)? > as_int(b)?),
        BinOp::Ge => Value::Bool(as_int(a)? >= as_int(b)?),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators handled by caller"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn call(f: &str, args: &[i64]) -> CallSpec {
        CallSpec {
            func: f.into(),
            args: args.iter().map(|&v| Value::Int(v)).collect(),
        }
    }

    #[test]
    fn evaluates_and_counts_return_block() {
        let p = parse("fn f(x: int) -> int { return x + 1; }").unwrap();
        let out = run(&p, &call("f", &[2]), Limits::default(), None).unwrap();
        assert_eq!(out.result, Ok(Value::Int(3)));
        assert_eq!(out.coverage.block_counts(0), &[1]);
        assert!(out.observations.is_none());
    }

    #[test]
    fn wrong_arity_is_entry_error() {
        let p = parse("fn f(x: int) -> int { return x; }").unwrap();
        let err = run(&p, &call("f", &[1, 2]), Limits::default(), None).unwrap_err();
        assert!(matches!(
            err,
            EntryError::Arity {
                expected: 1,
                given: 2,
                ..
            }
        ));
        let err = run(&p, &call("g", &[]), Limits::default(), None).unwrap_err();
        assert!(matches!(err, EntryError::UnknownFunction(_)));
        let bad = CallSpec {
            func: "f".into(),
            args: vec![Value::Bool(true)],
        };
        assert!(matches!(
            run(&p, &bad, Limits::default(), None).unwrap_err(),
            EntryError::ArgType { .. }
        ));
    }

    #[test]
    fn infinite_loop_exhausts_budget() {
        let p = parse("fn f() -> int { while (true) { } return 0; }").unwrap();
        let out = run(&p, &call("f", &[]), Limits::with_steps(10_000), None).unwrap();
        assert_eq!(out.result, Err(ExecError::BudgetExhausted));
    }

    #[test]
    fn unbounded_recursion_is_runtime_error() {
        let p = parse("fn f(x: int) -> int { return f(x + 1); }").unwrap();
        let out = run(&p, &call("f", &[0]), Limits::default(), None).unwrap();
        assert!(matches!(out.result, Err(ExecError::Runtime(_))));
    }

    #[test]
    fn division_by_zero_and_assert() {
        let p = parse("fn f(x: int) -> int { return 10 / x; }").unwrap();
        let out = run(&p, &call("f", &[0]), Limits::default(), None).unwrap();
        assert_eq!(out.result, Err(ExecError::Runtime("division by zero".into())));
        let p = parse("fn f(x: int) -> int { assert(x > 0); return x; }").unwrap();
        let out = run(&p, &call("f", &[0]), Limits::default(), None).unwrap();
        assert_eq!(out.result, Err(ExecError::Runtime("assertion failed".into())));
    }

    #[test]
    fn while_header_counted_per_guard_evaluation() {
        let p = parse("fn f(n: int) -> int { var i: int; i = 0; while (i < n) { i = i + 1; } return i; }").unwrap();
        let out = run(&p, &call("f", &[3]), Limits::default(), None).unwrap();
        assert_eq!(out.result, Ok(Value::Int(3)));
        // [i = 0] [while x4] [i = i + 1 x3] [return]
        assert_eq!(out.coverage.block_counts(0), &[1, 4, 3, 1]);
    }

    #[test]
    fn probes_tally_both_polarities_without_changing_result() {
        let p = parse("fn f(n: int) -> int { var i: int; i = 0; while (i < n) { i = i + 1; } return i; }").unwrap();
        let header = p.locations("f")[1].stmt;
        let mut probes = Probes::new(&p);
        let mut e = crate::lang::parser::parse_expr("i < 2").unwrap();
        p.check_expr(0, &mut e).unwrap();
        let g = probes.attach(header, e);
        let mut bad = crate::lang::parser::parse_expr("n / i > 0").unwrap();
        p.check_expr(0, &mut bad).unwrap();
        let g_bad = probes.attach(header, bad);
        let plain = run(&p, &call("f", &[3]), Limits::default(), None).unwrap();
        let probed = run(&p, &call("f", &[3]), Limits::default(), Some(&probes)).unwrap();
        assert_eq!(plain.result, probed.result);
        assert_eq!(plain.coverage, probed.coverage);
        let log = probed.observations.unwrap();
        // header reached 4 times with i = 0,1,2,3
        assert_eq!(log.counts[g], [2, 2]);
        // i = 0 divides by zero: unobserved on that visit only
        assert_eq!(log.counts[g_bad][0] + log.counts[g_bad][1], 3);
    }
}
