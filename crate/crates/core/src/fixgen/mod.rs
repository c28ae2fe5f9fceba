//! Candidate fix generation: action synthesis, schema instantiation and the
//! σ link from every candidate back to the snapshot it came from.

pub mod pool;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pool::{ExpressionPool, PoolScope};

use crate::lang::ast::{BinOp, Expr, NodeId, Stmt, StmtKind};
use crate::lang::printer::{expr_to_string, function_to_string, patched_function_to_string, stmt_to_string};
use crate::lang::{FunctionDef, LangError, Program, Subject, Type};
use crate::snapshot::Snapshot;

pub const DEFAULT_A_MAX: usize = 32;

/// Action classes, in generation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// (a) assign to a variable of the snapshot expression
    StateMutation,
    /// (b) replace a subexpression of the statement
    SubexprReplace,
    /// (c) rewrite a branch or loop guard
    GuardModify,
    /// (d) return early
    ControlFlow,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::StateMutation,
        ActionKind::SubexprReplace,
        ActionKind::GuardModify,
        ActionKind::ControlFlow,
    ];
}

#[derive(Clone, Debug)]
pub struct Action {
    pub kind: ActionKind,
    /// Statement the action is built for.
    pub target: NodeId,
    pub stmt: Stmt,
}

impl Action {
    pub fn text(&self) -> String {
        one_line(&stmt_to_string(&self.stmt))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Schema {
    /// `action; old`
    A,
    /// `if (e == v) { action } old`
    B,
    /// `if (e != v) { old }`
    C,
    /// `if (e == v) { action } else { old }`
    D,
    /// `action` in place of `old`
    E,
}

/// Replacement of one statement of the faulty function.
#[derive(Clone, Debug)]
pub struct Patch {
    pub stmt: NodeId,
    pub replacement: Vec<Stmt>,
}

impl Patch {
    /// The patched function list, not yet renumbered or checked.
    pub fn apply(&self, functions: &[FunctionDef]) -> Vec<FunctionDef> {
        self.apply_at(functions).0
    }

    fn apply_at(&self, functions: &[FunctionDef]) -> (Vec<FunctionDef>, Option<usize>) {
        let mut out = functions.to_vec();
        let hit = out
            .iter_mut()
            .position(|f| splice(&mut f.body, self.stmt, &self.replacement));
        (out, hit)
    }

    pub fn materialize(&self, original: &Program) -> Result<Program, LangError> {
        match self.apply_at(original.functions()) {
            (fs, Some(i)) => Program::from_variant(fs, i),
            (fs, None) => Program::from_functions(fs),
        }
    }
}

fn splice(body: &mut Vec<Stmt>, id: NodeId, with: &[Stmt]) -> bool {
    if let Some(i) = body.iter().position(|s| s.id == id) {
        body.splice(i..=i, with.iter().cloned());
        return true;
    }
    for s in body.iter_mut() {
        let hit = match &mut s.kind {
            StmtKind::If {
                then_body, else_body, ..
            } => splice(then_body, id, with) || splice(else_body, id, with),
            StmtKind::While { body, .. } => splice(body, id, with),
            _ => false,
        };
        if hit {
            return true;
        }
    }
    false
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub id: usize,
    /// σ: id of the originating snapshot.
    pub snapshot: usize,
    pub schema: Schema,
    /// `None` for schema C.
    pub action: Option<Action>,
    pub patch: Patch,
    /// Printed text of the patched faulty function; the dedup key.
    pub fixme_text: String,
}

impl Candidate {
    pub fn materialize(&self, original: &Program) -> Program {
        self.patch
            .materialize(original)
            .expect("emitted candidates pass static checks")
    }

    /// The original program running this candidate's patch.
    pub fn subject<'a>(&'a self, original: &'a Program) -> Subject<'a> {
        Subject {
            program: original,
            patch: Some((self.patch.stmt, &self.patch.replacement)),
        }
    }

    pub fn action_text(&self) -> String {
        self.action.as_ref().map(Action::text).unwrap_or_default()
    }

    /// Unified diff of the whole program against `original`.
    pub fn diff(&self, original: &Program) -> String {
        let before = original.to_source();
        let after = self.materialize(original).to_source();
        similar::TextDiff::from_lines(&before, &after)
            .unified_diff()
            .context_radius(3)
            .header("original", &format!("candidate-{}", self.id))
            .to_string()
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `e` when `v` holds, `!(e)` otherwise.
fn condition(e: &Expr, v: bool) -> Expr {
    if v {
        e.clone()
    } else {
        Expr::not(e.clone())
    }
}

/// Actions for a snapshot, at most `cap`, in class order. When the classes
/// together offer more than `cap` actions, each class gets a fair share
/// (taken round-robin) and leftover room goes to the larger classes.
pub fn synthesize_actions(program: &Program, snapshot: &Snapshot, pool: &ExpressionPool, cap: usize) -> Vec<Action> {
    let Some(func) = program.function_index(&snapshot.location.function) else {
        return Vec::new();
    };
    let f = &program.functions()[func];
    let Some(old) = program.stmt(snapshot.location.stmt) else {
        return Vec::new();
    };
    let target = old.id;
    let e = &snapshot.expr;

    let mut classes: Vec<Vec<Stmt>> = vec![Vec::new(); 4];

    // (a) state mutation of the variables in e
    let vars: Vec<(&str, Type)> = e
        .free_vars()
        .into_iter()
        .filter_map(|v| f.var_type(v).map(|t| (v, t)))
        .collect();
    for &(x, ty) in &vars {
        match ty {
            Type::Int => {
                for op in [BinOp::Add, BinOp::Sub] {
                    classes[0].push(Stmt::assign(x, Expr::binary(op, Expr::var(x), Expr::int(1))));
                }
            }
            Type::Bool => classes[0].push(Stmt::assign(x, Expr::not(Expr::var(x)))),
        }
    }
    for &(x, ty) in &vars {
        for p in pool.of_type(ty) {
            if expr_to_string(p) != x {
                classes[0].push(Stmt::assign(x, p.clone()));
            }
        }
    }

    // (b) replace subexpressions of the statement that also occur in e
    let head = old.head_expr();
    let inside: HashSet<String> = e.subexprs().into_iter().map(expr_to_string).collect();
    for (i, sub) in head.subexprs().into_iter().enumerate() {
        let text = expr_to_string(sub);
        if !inside.contains(&text) {
            continue;
        }
        let mut probe = sub.clone();
        let Ok(ty) = program.check_expr(func, &mut probe) else {
            continue;
        };
        for p in pool.of_type(ty) {
            if expr_to_string(p) != text {
                classes[1].push(old.with_head_expr(head.replace_nth(i, p)));
            }
        }
    }

    // (c) guard rewrites
    if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &old.kind {
        let c_text = expr_to_string(cond);
        classes[2].push(old.with_head_expr(Expr::not(cond.clone())));
        let mut others = vec![e.clone()];
        others.extend(pool.bools.iter().cloned());
        for other in others {
            if expr_to_string(&other) == c_text {
                continue;
            }
            classes[2].push(old.with_head_expr(Expr::binary(BinOp::Or, cond.clone(), other.clone())));
            classes[2].push(old.with_head_expr(Expr::binary(BinOp::And, cond.clone(), other.clone())));
            classes[2].push(old.with_head_expr(other));
        }
    }

    // (d) early return
    classes[3].push(Stmt::ret(match f.ret {
        Type::Int => Expr::int(0),
        Type::Bool => Expr::bool(false),
    }));
    for p in pool.of_type(f.ret) {
        classes[3].push(Stmt::ret(p.clone()));
    }

    for list in classes.iter_mut() {
        let mut seen = HashSet::new();
        list.retain(|s| seen.insert(stmt_to_string(s)));
    }
    let quota = fair_share(&classes.iter().map(Vec::len).collect::<Vec<_>>(), cap);
    let mut out = Vec::new();
    for (k, list) in classes.into_iter().enumerate() {
        for stmt in list.into_iter().take(quota[k]) {
            out.push(Action {
                kind: ActionKind::ALL[k],
                target,
                stmt,
            });
        }
    }
    out
}

/// Splits `cap` over classes of the given sizes one unit at a time,
/// round-robin, skipping exhausted classes.
fn fair_share(sizes: &[usize], cap: usize) -> Vec<usize> {
    let mut quota = vec![0; sizes.len()];
    let mut left = cap;
    loop {
        let mut progressed = false;
        for (q, &n) in quota.iter_mut().zip(sizes) {
            if left == 0 {
                return quota;
            }
            if *q < n {
                *q += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            return quota;
        }
    }
}

/// Schema instantiations of one action (schema C when `with_c`), in schema
/// order, as unchecked patches.
pub fn instantiate_schemas(
    program: &Program,
    snapshot: &Snapshot,
    action: Option<&Action>,
    with_c: bool,
) -> Vec<(Schema, Patch)> {
    let Some(old) = program.stmt(snapshot.location.stmt) else {
        return Vec::new();
    };
    let e = &snapshot.expr;
    let v = snapshot.value;
    let patch = |replacement: Vec<Stmt>| Patch {
        stmt: old.id,
        replacement,
    };
    let mut out = Vec::new();
    if let Some(a) = action {
        out.push((Schema::A, patch(vec![a.stmt.clone(), old.clone()])));
        out.push((
            Schema::B,
            patch(vec![
                Stmt::if_else(condition(e, v), vec![a.stmt.clone()], Vec::new()),
                old.clone(),
            ]),
        ));
    }
    if with_c {
        out.push((
            Schema::C,
            patch(vec![Stmt::if_else(condition(e, !v), vec![old.clone()], Vec::new())]),
        ));
    }
    if let Some(a) = action {
        out.push((
            Schema::D,
            patch(vec![Stmt::if_else(
                condition(e, v),
                vec![a.stmt.clone()],
                vec![old.clone()],
            )]),
        ));
        out.push((Schema::E, patch(vec![a.stmt.clone()])));
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct Caps {
    pub a_max: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { a_max: DEFAULT_A_MAX }
    }
}

/// Stateful candidate generator: assigns dense ids and drops patched
/// programs already produced (or equal to the original).
#[derive(Clone, Debug)]
pub struct Generator {
    fixme: usize,
    seen: HashSet<String>,
    /// (statement, replacement text) pairs already handled; a cheap
    /// pre-filter in front of `seen`.
    seen_patches: HashSet<(NodeId, String)>,
    next_id: usize,
    pub rejected: usize,
    pub duplicates: usize,
}

struct Draft {
    schema: Schema,
    action: Option<Action>,
    patch: Patch,
    key: String,
}

impl Generator {
    pub fn new(program: &Program, fixme: &str) -> Option<Self> {
        let fixme = program.function_index(fixme)?;
        let mut seen = HashSet::new();
        seen.insert(function_to_string(&program.functions()[fixme]));
        Some(Generator {
            fixme,
            seen,
            seen_patches: HashSet::new(),
            next_id: 0,
            rejected: 0,
            duplicates: 0,
        })
    }

    pub fn next_id(&self) -> usize {
        self.next_id
    }

    /// Forgets previously emitted programs (the original stays excluded) but
    /// keeps numbering.
    pub fn reset_seen(&mut self, program: &Program) {
        self.seen.clear();
        self.seen_patches.clear();
        self.seen.insert(function_to_string(&program.functions()[self.fixme]));
    }

    /// Candidates for `snapshots`, in snapshot order, each with a checked
    /// (resolved) patch ready to run through [`Candidate::subject`].
    pub fn generate(
        &mut self,
        program: &Program,
        snapshots: &[&Snapshot],
        pool: &ExpressionPool,
        caps: Caps,
    ) -> Vec<Candidate> {
        let fixme = self.fixme;
        let drafts: Vec<Vec<Draft>> = snapshots
            .par_iter()
            .map(|s| {
                let actions = synthesize_actions(program, s, pool, caps.a_max);
                let mut patches = Vec::new();
                if actions.is_empty() {
                    patches.extend(
                        instantiate_schemas(program, s, None, true)
                            .into_iter()
                            .map(|(schema, p)| (schema, None, p)),
                    );
                }
                for (i, a) in actions.iter().enumerate() {
                    for (schema, p) in instantiate_schemas(program, s, Some(a), i == 0) {
                        let action = (schema != Schema::C).then(|| a.clone());
                        patches.push((schema, action, p));
                    }
                }
                patches
                    .into_iter()
                    .map(|(schema, action, patch)| {
                        let key = patch.replacement.iter().map(stmt_to_string).collect();
                        Draft {
                            schema,
                            action,
                            patch,
                            key,
                        }
                    })
                    .collect()
            })
            .collect();

        // first occurrence wins; identical text means an identical program
        let mut novel: Vec<(usize, Draft)> = Vec::new();
        for (s, list) in snapshots.iter().zip(drafts) {
            for d in list {
                if self.seen_patches.insert((d.patch.stmt, d.key.clone())) {
                    novel.push((s.id, d));
                } else {
                    self.duplicates += 1;
                }
            }
        }
        let f = &program.functions()[fixme];
        let texts: Vec<String> = novel
            .par_iter()
            .map(|(_, d)| patched_function_to_string(f, d.patch.stmt, &d.patch.replacement))
            .collect();
        let mut fresh: Vec<(usize, Draft, String)> = Vec::new();
        for ((s, d), text) in novel.into_iter().zip(texts) {
            if self.seen.insert(text.clone()) {
                fresh.push((s, d, text));
            } else {
                self.duplicates += 1;
            }
        }
        let checked: Vec<bool> = fresh
            .par_iter_mut()
            .map(|(_, d, _)| program.check_patch(d.patch.stmt, &mut d.patch.replacement).is_ok())
            .collect();
        let mut out = Vec::new();
        for ((snapshot, d, text), ok) in fresh.into_iter().zip(checked) {
            if !ok {
                self.rejected += 1;
                continue;
            }
            out.push(Candidate {
                id: self.next_id,
                snapshot,
                schema: d.schema,
                action: d.action,
                patch: d.patch,
                fixme_text: text,
            });
            self.next_id += 1;
        }
        out
    }
}

/// One-shot generation with a fresh generator.
pub fn generate_for(
    program: &Program,
    fixme: &str,
    snapshots: &[&Snapshot],
    pool: &ExpressionPool,
    caps: Caps,
) -> Vec<Candidate> {
    match Generator::new(program, fixme) {
        Some(mut g) => g.generate(program, snapshots, pool, caps),
        None => Vec::new(),
    }
}

/// Groups candidate ids by their σ snapshot.
pub fn by_snapshot(candidates: &[Candidate]) -> HashMap<usize, Vec<usize>> {
    let mut m: HashMap<usize, Vec<usize>> = HashMap::new();
    for c in candidates {
        m.entry(c.snapshot).or_default().push(c.id);
    }
    m
}

/// All candidate patches as unified diffs, one after another.
pub fn candidates_to_diffs(original: &Program, candidates: &[Candidate]) -> String {
    let mut out = String::new();
    for c in candidates {
        out.push_str(&format!(
            "# candidate {} snapshot {} schema {:?} action {}\n",
            c.id,
            c.snapshot,
            c.schema,
            c.action_text()
        ));
        out.push_str(&c.diff(original));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::snapshot::{enumerate_snapshots, DEFAULT_E_MAX};

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

    fn snap(p: &Program, func: &str, ordinal: u32, expr: &str, value: bool) -> Snapshot {
        let pool = ExpressionPool::base(p, func).unwrap();
        enumerate_snapshots(p, func, &pool, DEFAULT_E_MAX)
            .into_iter()
            .find(|s| s.location.ordinal == ordinal && s.expr_text == expr && s.value == value)
            .unwrap_or_else(|| panic!("no snapshot {expr}"))
    }

    fn texts(actions: &[Action]) -> Vec<String> {
        actions.iter().map(Action::text).collect()
    }

    #[test]
    fn guard_action_from_extended_pool() {
        let p = parse(SRC).unwrap();
        let s = snap(&p, "process", 0, "provided != 0", true);
        let ext = ExpressionPool::extended(&p, "process").unwrap();
        let acts = texts(&synthesize_actions(&p, &s, &ext, DEFAULT_A_MAX));
        assert!(
            acts.iter()
                .any(|a| a.starts_with("if (provided != 0 || level_on(level))")),
            "{acts:?}"
        );
        let base = ExpressionPool::base(&p, "process").unwrap();
        let acts = texts(&synthesize_actions(&p, &s, &base, DEFAULT_A_MAX));
        assert!(acts.iter().all(|a| !a.contains("level_on")));
    }

    #[test]
    fn non_guard_has_no_guard_actions() {
        let p = parse(SRC).unwrap();
        let s = snap(&p, "process", 1, "removed == 0", true);
        let pool = ExpressionPool::extended(&p, "process").unwrap();
        let acts = synthesize_actions(&p, &s, &pool, 1000);
        assert!(acts.iter().all(|a| a.kind != ActionKind::GuardModify));
        assert!(acts.iter().any(|a| a.text() == "removed = 0;"));
        assert!(acts.iter().any(|a| a.kind == ActionKind::SubexprReplace));
        assert!(acts.iter().any(|a| a.kind == ActionKind::ControlFlow));
    }

    #[test]
    fn cap_and_class_order() {
        let p = parse(SRC).unwrap();
        let s = snap(&p, "process", 0, "provided < level", false);
        let pool = ExpressionPool::extended(&p, "process").unwrap();
        let acts = synthesize_actions(&p, &s, &pool, DEFAULT_A_MAX);
        assert!(acts.len() <= DEFAULT_A_MAX);
        let kinds: Vec<ActionKind> = acts.iter().map(|a| a.kind).collect();
        let mut sorted = kinds.clone();
        sorted.sort();
        assert_eq!(kinds, sorted);
        for k in ActionKind::ALL {
            assert!(kinds.contains(&k), "{k:?} missing");
        }
    }

    #[test]
    fn fair_share_redistributes() {
        assert_eq!(fair_share(&[100, 100, 0, 100], 32), vec![11, 11, 0, 10]);
        assert_eq!(fair_share(&[2, 100, 3, 100], 32), vec![2, 14, 3, 13]);
        assert_eq!(fair_share(&[1, 1], 32), vec![1, 1]);
    }

    #[test]
    fn schema_shapes() {
        let p = parse(SRC).unwrap();
        let s = snap(&p, "process", 1, "removed == 0", true);
        let a = Action {
            kind: ActionKind::StateMutation,
            target: s.location.stmt,
            stmt: Stmt::assign("removed", Expr::int(0)),
        };
        let inst = instantiate_schemas(&p, &s, Some(&a), true);
        let shapes: Vec<(Schema, String)> = inst
            .iter()
            .map(|(k, patch)| {
                let body: Vec<String> = patch.replacement.iter().map(|s| one_line(&stmt_to_string(s))).collect();
                (*k, body.join(" "))
            })
            .collect();
        assert_eq!(
            shapes,
            vec![
                (Schema::A, "removed = 0; removed = removed + 10;".into()),
                (
                    Schema::B,
                    "if (removed == 0) { removed = 0; } removed = removed + 10;".into()
                ),
                (Schema::C, "if (!(removed == 0)) { removed = removed + 10; }".into()),
                (
                    Schema::D,
                    "if (removed == 0) { removed = 0; } else { removed = removed + 10; }".into()
                ),
                (Schema::E, "removed = 0;".into()),
            ]
        );
        let s = snap(&p, "process", 1, "removed == 0", false);
        let c = instantiate_schemas(&p, &s, None, true);
        assert_eq!(c.len(), 1);
        assert_eq!(
            one_line(&stmt_to_string(&c[0].1.replacement[0])),
            "if (removed == 0) { removed = removed + 10; }"
        );
    }

    #[test]
    fn schema_e_on_sole_return_is_rejected() {
        let p = parse("fn f(x: int) -> int { return x; }").unwrap();
        let s = snap(&p, "f", 0, "x == 0", true);
        let a = Action {
            kind: ActionKind::StateMutation,
            target: s.location.stmt,
            stmt: Stmt::assign("x", Expr::int(0)),
        };
        let inst = instantiate_schemas(&p, &s, Some(&a), false);
        let (_, e) = inst.iter().find(|(k, _)| *k == Schema::E).unwrap();
        assert!(matches!(e.materialize(&p), Err(LangError::MissingReturn { .. })));

        let mut g = Generator::new(&p, "f").unwrap();
        let pool = ExpressionPool::base(&p, "f").unwrap();
        let cands = g.generate(&p, &[&s], &pool, Caps::default());
        assert!(g.rejected > 0);
        assert!(cands.iter().all(|c| c.materialize(&p).function("f").is_some()));
    }

    #[test]
    fn generation_is_dense_deduped_and_sigma_linked() {
        let p = parse(SRC).unwrap();
        let pool = ExpressionPool::base(&p, "process").unwrap();
        let snaps = enumerate_snapshots(&p, "process", &pool, DEFAULT_E_MAX);
        let refs: Vec<&Snapshot> = snaps.iter().take(40).collect();
        let cands = generate_for(&p, "process", &refs, &pool, Caps::default());
        assert!(!cands.is_empty());
        let original = function_to_string(p.function("process").unwrap());
        let mut texts = HashSet::new();
        for (i, c) in cands.iter().enumerate() {
            assert_eq!(c.id, i);
            assert!(texts.insert(c.fixme_text.clone()));
            assert_ne!(c.fixme_text, original);
            // the patch sits at σ's location
            assert_eq!(c.patch.stmt, snaps[c.snapshot].location.stmt);
        }
        // σ order follows snapshot order
        assert!(cands.windows(2).all(|w| w[0].snapshot <= w[1].snapshot));
        // regenerating is identical
        let again = generate_for(&p, "process", &refs, &pool, Caps::default());
        let a: Vec<_> = cands.iter().map(|c| &c.fixme_text).collect();
        let b: Vec<_> = again.iter().map(|c| &c.fixme_text).collect();
        assert_eq!(a, b);
        assert!(generate_for(&p, "process", &[], &pool, Caps::default()).is_empty());
    }

    /// Running a patch over the original must match building the patched
    /// program: same static verdict, same printed function, same results
    /// (budget exhaustion included).
    #[test]
    fn patch_overlay_matches_materialized_program() {
        let p = parse(
            "
fn helper(n: int) -> int {
    if (n > 3) {
        return n - 1;
    }
    return n;
}
fn walk(a: int, b: bool) -> int {
    var i: int;
    var acc: int;
    i = 0;
    while (i < a) {
        if (b) {
            acc = acc + i;
        } else if (i > 2) {
            acc = acc - 1;
        } else {
            acc = acc + 2;
        }
        i = i + 1;
    }
    if (a > 5) {
        return walk(a - 3, !b) + helper(acc);
    }
    return acc;
}
",
        )
        .unwrap();
        let pool = ExpressionPool::extended(&p, "walk").unwrap();
        let f = p.function("walk").unwrap();
        let limits = crate::lang::Limits::with_steps(5_000);
        let inputs = [(0, true), (3, false), (7, true), (9, false), (-2, true)];
        let (mut accepted, mut rejected) = (0, 0);
        for s in enumerate_snapshots(&p, "walk", &pool, 6) {
            let actions = synthesize_actions(&p, &s, &pool, DEFAULT_A_MAX);
            let mut patches = instantiate_schemas(&p, &s, None, true);
            for a in &actions {
                patches.extend(instantiate_schemas(&p, &s, Some(a), false));
            }
            for (_, mut patch) in patches {
                let built = patch.materialize(&p);
                let checked = p.check_patch(patch.stmt, &mut patch.replacement);
                assert_eq!(built.is_ok(), checked.is_ok(), "{:?}", patch.replacement);
                let Ok(q) = built else {
                    rejected += 1;
                    continue;
                };
                accepted += 1;
                assert_eq!(
                    patched_function_to_string(f, patch.stmt, &patch.replacement),
                    function_to_string(q.function("walk").unwrap())
                );
                let subject = Subject {
                    program: &p,
                    patch: Some((patch.stmt, &patch.replacement)),
                };
                for (a, b) in inputs {
                    let call = crate::lang::CallSpec {
                        func: "walk".into(),
                        args: vec![crate::lang::Value::Int(a), crate::lang::Value::Bool(b)],
                    };
                    let direct = crate::lang::run(&q, &call, limits, None).unwrap().result;
                    assert_eq!(subject.run(&call, limits).unwrap(), direct);
                }
            }
        }
        assert!(accepted > 500 && rejected > 0, "{accepted} {rejected}");
    }

    #[test]
    fn diff_mentions_the_change() {
        let p = parse(SRC).unwrap();
        let pool = ExpressionPool::base(&p, "process").unwrap();
        let s = snap(&p, "process", 0, "provided != 0", true);
        let cands = generate_for(&p, "process", &[&s], &pool, Caps::default());
        let d = cands[0].diff(&p);
        assert!(d.contains("@@"));
        assert!(d.lines().any(|l| l.starts_with('+')));
    }
}
