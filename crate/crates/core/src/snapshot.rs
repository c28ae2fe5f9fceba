//! Snapshots ⟨location, boolean expression, value⟩ and their observation in
//! test runs.
//!
//! Candidate expressions at a location are, in order:
//! the guard itself when the statement is an `if`/`while` header, each bool
//! variable `b` and `!b`, `x < y` and `x == y` for each ordered pair of int
//! variables, and `x < c`, `x == c`, `c < x` for each int variable and pool
//! constant. Duplicates are dropped and the list is cut at `e_max`. Every
//! expression yields two snapshots, value `false` first.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fixgen::ExpressionPool;
use crate::lang::ast::{BinOp, Expr, StmtKind};
use crate::lang::printer::expr_to_string;
use crate::lang::{run, Limits, Location, Probes, Program, Type};
use crate::testkit::{classify, FailureKind, TestCase, TestId, Verdict};

pub const DEFAULT_E_MAX: usize = 64;

#[derive(Clone, Debug)]
pub struct Snapshot {
    /// Position in the enumeration order of the whole function.
    pub id: usize,
    pub location: Location,
    pub expr: Expr,
    pub expr_text: String,
    /// Index of `expr` among the expressions enumerated at `location`.
    pub expr_index: usize,
    /// Index of the (location, expr) pair; both polarities share it.
    pub group: usize,
    pub value: bool,
}

impl Snapshot {
    /// Sort key used to break score ties: location, expression, value.
    pub fn tie_key(&self) -> (u32, usize, bool) {
        (self.location.ordinal, self.expr_index, self.value)
    }

    pub fn describe(&self) -> String {
        format!(
            "<#{} {}, {}, {}>",
            self.location.ordinal, self.location.function, self.expr_text, self.value
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub id: usize,
    pub function: String,
    pub ordinal: u32,
    pub stmt: u32,
    pub expr: String,
    pub value: bool,
}

impl From<&Snapshot> for SnapshotRecord {
    fn from(s: &Snapshot) -> Self {
        SnapshotRecord {
            id: s.id,
            function: s.location.function.clone(),
            ordinal: s.location.ordinal,
            stmt: s.location.stmt,
            expr: s.expr_text.clone(),
            value: s.value,
        }
    }
}

/// JSON listing of snapshots for debugging dumps.
pub fn snapshots_to_json(snapshots: &[Snapshot]) -> String {
    let records: Vec<SnapshotRecord> = snapshots.iter().map(SnapshotRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("snapshot records serialize")
}

/// Enumerates the snapshots of every statement of `fixme`. Returns an empty
/// list when `fixme` does not exist or has no statements.
pub fn enumerate_snapshots(program: &Program, fixme: &str, pool: &ExpressionPool, e_max: usize) -> Vec<Snapshot> {
    let Some(func) = program.function_index(fixme) else {
        return Vec::new();
    };
    let f = &program.functions()[func];
    let bools: Vec<&str> = f
        .variables()
        .filter(|v| v.ty == Type::Bool)
        .map(|v| v.name.as_str())
        .collect();
    let ints: Vec<&str> = f
        .variables()
        .filter(|v| v.ty == Type::Int)
        .map(|v| v.name.as_str())
        .collect();

    // the variable-only part does not depend on the location
    let mut shared = Vec::new();
    for b in &bools {
        shared.push(Expr::var(*b));
        shared.push(Expr::not(Expr::var(*b)));
    }
    for (i, x) in ints.iter().enumerate() {
        for y in &ints[i + 1..] {
            shared.push(Expr::binary(BinOp::Lt, Expr::var(*x), Expr::var(*y)));
            shared.push(Expr::binary(BinOp::Eq, Expr::var(*x), Expr::var(*y)));
        }
    }
    for x in &ints {
        for &c in &pool.constants {
            shared.push(Expr::binary(BinOp::Lt, Expr::var(*x), Expr::int(c)));
            shared.push(Expr::binary(BinOp::Eq, Expr::var(*x), Expr::int(c)));
            shared.push(Expr::binary(BinOp::Lt, Expr::int(c), Expr::var(*x)));
        }
    }

    let mut out = Vec::new();
    let mut group = 0;
    for loc in program.locations(fixme) {
        let stmt = program.stmt(loc.stmt).expect("location refers to a statement");
        let mut exprs: Vec<Expr> = Vec::new();
        if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &stmt.kind {
            if !cond.has_call() {
                exprs.push(cond.clone());
            }
        }
        exprs.extend(shared.iter().cloned());

        let mut seen = HashSet::new();
        let mut expr_index = 0;
        for mut e in exprs {
            if expr_index >= e_max {
                break;
            }
            let text = expr_to_string(&e);
            if !seen.insert(text.clone()) {
                continue;
            }
            if program.check_expr(func, &mut e).is_err() {
                continue;
            }
            for value in [false, true] {
                out.push(Snapshot {
                    id: out.len(),
                    location: loc.clone(),
                    expr: e.clone(),
                    expr_text: text.clone(),
                    expr_index,
                    group,
                    value,
                });
            }
            expr_index += 1;
            group += 1;
        }
    }
    out
}

/// Per-test observation counts for a snapshot list.
#[derive(Clone, Debug)]
pub struct ObservationMatrix {
    pub tests: Vec<TestId>,
    /// Verdict of each test in the probed run.
    pub verdicts: Vec<Verdict>,
    pub failures: Vec<Option<FailureKind>>,
    /// `[test][group] -> [false count, true count]`
    counts: Vec<Vec<[u32; 2]>>,
}

impl ObservationMatrix {
    /// Number of times test `test` reached the snapshot's location with its
    /// expression evaluating to the snapshot's value.
    pub fn observed(&self, test: usize, s: &Snapshot) -> u32 {
        self.counts[test].get(s.group).map_or(0, |c| c[s.value as usize])
    }

    pub fn test_index(&self, id: &TestId) -> Option<usize> {
        self.tests.iter().position(|t| t == id)
    }
}

/// Runs each test once with probes for every snapshot installed.
pub fn observe(program: &Program, tests: &[&TestCase], snapshots: &[Snapshot], limits: Limits) -> ObservationMatrix {
    let mut probes = Probes::new(program);
    let mut attached = 0;
    for s in snapshots {
        if s.group >= attached {
            debug_assert_eq!(s.group, attached, "snapshots grouped in order");
            probes.attach(s.location.stmt, s.expr.clone());
            attached = s.group + 1;
        }
    }
    let rows: Vec<(Verdict, Option<FailureKind>, Vec<[u32; 2]>)> = tests
        .par_iter()
        .map(|t| match run(program, &t.call, limits, Some(&probes)) {
            Ok(out) => {
                let failure = classify(&t.expect, &out.result);
                let verdict = if failure.is_none() {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                let log = out.observations.unwrap_or_default();
                (verdict, failure, log.counts)
            }
            Err(_) => (Verdict::Fail, Some(FailureKind::BadEntry), vec![[0, 0]; attached]),
        })
        .collect();
    let mut m = ObservationMatrix {
        tests: tests.iter().map(|t| t.id.clone()).collect(),
        verdicts: Vec::with_capacity(rows.len()),
        failures: Vec::with_capacity(rows.len()),
        counts: Vec::with_capacity(rows.len()),
    };
    for (v, f, c) in rows {
        m.verdicts.push(v);
        m.failures.push(f);
        m.counts.push(c);
    }
    m
}
