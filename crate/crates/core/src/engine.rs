//! Repair sessions: the retrospective loop (basic fault localization on a
//! bootstrap test subset, batches of candidates whose partial validation
//! feeds mutation-based localization, then a final focused generation) and
//! the one-pass basic mode it is compared against.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixgen::{ActionKind, Candidate, Caps, ExpressionPool, Generator, Schema};
use crate::lang::{Limits, Program};
use crate::mbfl::{
    candidate_score, rank_snapshots, should_stop, snapshot_scores, LocationScore, LocationTable, MutationScore,
};
use crate::sbfl::{basic_scores, default_n_b, select_tests};
use crate::snapshot::{enumerate_snapshots, observe, Snapshot, SnapshotRecord};
use crate::testkit::{partition, Partition, TestCase, TestId, TestSuite};
use crate::validation::{Status, ValidationRecord, Validator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Basic,
    Retro,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "basic" => Ok(Mode::Basic),
            "retro" => Ok(Mode::Retro),
            other => Err(format!("unknown mode `{other}` (expected basic or retro)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub mode: Mode,
    /// Snapshot budget.
    pub n_s: usize,
    /// Fraction of the budget consumed per loop iteration.
    pub n_p: f64,
    /// Extra iterations after the first positive mutation score.
    pub n_i: usize,
    /// Locations kept for final generation.
    pub n_l: usize,
    /// Passing tests added to the bootstrap subset; default `max(20, 2·|T_fail|)`.
    pub n_b: Option<usize>,
    pub e_max: usize,
    pub a_max: usize,
    /// Interpreter step budget per test run.
    pub steps: u64,
    /// Use the whole-program expression pool in final generation.
    pub extended: bool,
    /// Wall-clock cap for the session.
    pub budget_ms: u64,
    /// Reserved; the pipeline uses no randomness.
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: Mode::Retro,
            n_s: 1500,
            n_p: 0.10,
            n_i: 0,
            n_l: 5,
            n_b: None,
            e_max: crate::snapshot::DEFAULT_E_MAX,
            a_max: crate::fixgen::DEFAULT_A_MAX,
            steps: Limits::default().steps,
            extended: true,
            budget_ms: 300_000,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn basic() -> Self {
        EngineConfig {
            mode: Mode::Basic,
            extended: false,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.n_s == 0 {
            return bad("N_S must be at least 1");
        }
        if !(self.n_p > 0.0 && self.n_p <= 1.0) {
            return bad("N_P must lie in (0, 1]");
        }
        if self.n_l == 0 {
            return bad("N_L must be at least 1");
        }
        if self.e_max == 0 || self.a_max == 0 {
            return bad("E_max and A_max must be at least 1");
        }
        Ok(())
    }

    /// Snapshots per loop iteration: `ceil(N_S · N_P)`.
    pub fn batch_size(&self) -> usize {
        ((self.n_s as f64 * self.n_p).ceil() as usize).max(1)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no test fails on the input program")]
    EmptyFailingSet,
    #[error("function `{0}` not found")]
    UnknownFunction(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Knows which patched programs are correct (beyond passing the tests) and
/// where the reference fix is.
pub trait CorrectnessJudge: Sync {
    fn is_correct(&self, candidate: &Program) -> bool;
    /// Ordinals of the faulty function's statements touched by the
    /// reference fix.
    fn reference_locations(&self) -> BTreeSet<u32>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Loop,
    Final,
    Basic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixReport {
    pub rank: usize,
    pub candidate: usize,
    pub phase: Phase,
    pub snapshot: SnapshotRecord,
    pub schema: Schema,
    pub action_kind: Option<ActionKind>,
    pub action: String,
    /// The patched faulty function.
    pub function: String,
    pub diff: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measures {
    /// #V: number of valid fixes output.
    pub valid: usize,
    /// C: rank of the first correct fix.
    pub first_correct_rank: Option<usize>,
    /// Validation events until the first valid fix was confirmed.
    pub c2v: Option<u64>,
    /// Validation events until the first correct fix was confirmed.
    pub c2c: Option<u64>,
    /// All validation events of the session.
    pub checked: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub snapshots: usize,
    pub candidates: usize,
    pub sharpening: usize,
    pub plausible: usize,
    pub promoted: usize,
    pub valid: usize,
    /// Highest location score after this iteration.
    pub best_location: Option<LocationScore>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub tests: usize,
    pub tests_filtered_out: usize,
    pub failing_tests: usize,
    pub bootstrap_tests: usize,
    pub snapshots: usize,
    pub snapshots_consumed: usize,
    pub iterations: usize,
    /// Iteration at which a location first got a positive mutation score.
    pub first_positive_iteration: Option<usize>,
    pub sharpening: usize,
    pub plausible: usize,
    pub first_iteration_sharpening: usize,
    pub first_iteration_plausible: usize,
    /// Final generation fell back to su_B location order.
    pub fallback: bool,
    pub truncated: bool,
    pub candidates_generated: usize,
    pub candidates_rejected: usize,
    pub candidates_duplicate: usize,
    pub partial_validations: u64,
    pub full_validations: u64,
    pub reused_records: usize,
    pub final_locations: Vec<u32>,
    pub final_snapshots: usize,
    pub per_iteration: Vec<IterationStats>,
}

/// Wall-clock measures, kept apart so the rest of the report is
/// reproducible byte for byte.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub total_us: u64,
    pub t2v_us: Option<u64>,
    pub t2c_us: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub schema: u32,
    pub fixme: String,
    pub config: EngineConfig,
    pub fixes: Vec<FixReport>,
    pub measures: Measures,
    pub telemetry: Telemetry,
    pub timing: Timing,
}

impl RepairReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the timing block.
    pub fn to_json_untimed(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// Report plus the artifacts behind it.
pub struct RepairOutcome {
    pub report: RepairReport,
    pub snapshots: Vec<Snapshot>,
    /// su_B by snapshot id.
    pub su_b: Vec<f64>,
    /// Every generated candidate, when requested via [`RepairOptions`].
    pub candidates: Vec<Candidate>,
    /// Valid fixes in output order.
    pub valid_fixes: Vec<Candidate>,
}

#[derive(Default)]
pub struct RepairOptions<'a> {
    pub judge: Option<&'a dyn CorrectnessJudge>,
    pub keep_candidates: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Partial,
    Full,
}

struct Event {
    kind: EventKind,
    candidate: usize,
    at: Duration,
    confirms_valid: bool,
}

/// Validation result for one candidate along with its events.
struct Checked {
    record: ValidationRecord,
    events: Vec<Event>,
}

struct Session<'a> {
    program: &'a Program,
    fixme: &'a str,
    config: &'a EngineConfig,
    opts: &'a RepairOptions<'a>,
    start: Instant,
    deadline: Instant,
    refs: BTreeSet<u32>,
    failing: BTreeSet<TestId>,
    validator: Validator<'a>,
    snapshots: Vec<Snapshot>,
    generator: Generator,
    events: Vec<Event>,
    telemetry: Telemetry,
    kept: Vec<Candidate>,
    /// Valid candidates with the phase that produced them.
    valid: Vec<(Candidate, Phase)>,
    /// Records by printed faulty function, for reuse in final generation.
    records: HashMap<String, ValidationRecord>,
}

impl<'a> Session<'a> {
    fn out_of_time(&self) -> bool {
        Instant::now() >= self.deadline
    }

    /// Validates candidates concurrently; events are merged in candidate id
    /// order. Retro mode runs partial validation and promotes eagerly,
    /// basic mode runs full validation directly. Candidates skipped because
    /// of the wall-clock cap come back as `None`.
    fn check_all(&self, cands: &[Candidate], partial_first: bool) -> Vec<Option<Checked>> {
        cands
            .par_iter()
            .map(|c| {
                let p = c.subject(self.program);
                if self.out_of_time() {
                    return None;
                }
                let mut events = Vec::new();
                let record = if partial_first {
                    let r = self.validator.partial_validate(c.id, p);
                    events.push(Event {
                        kind: EventKind::Partial,
                        candidate: c.id,
                        at: self.start.elapsed(),
                        confirms_valid: false,
                    });
                    if r.status == Status::Promoted {
                        let r = self.validator.full_validate(p, r);
                        events.push(Event {
                            kind: EventKind::Full,
                            candidate: c.id,
                            at: self.start.elapsed(),
                            confirms_valid: r.is_valid(),
                        });
                        r
                    } else {
                        r
                    }
                } else {
                    let r = self.validator.full_validate(p, ValidationRecord::new(c.id));
                    events.push(Event {
                        kind: EventKind::Full,
                        candidate: c.id,
                        at: self.start.elapsed(),
                        confirms_valid: r.is_valid(),
                    });
                    r
                };
                Some(Checked { record, events })
            })
            .collect()
    }

    fn absorb(&mut self, checked: Checked) {
        for e in &checked.events {
            match e.kind {
                EventKind::Partial => self.telemetry.partial_validations += 1,
                EventKind::Full => self.telemetry.full_validations += 1,
            }
        }
        self.events.extend(checked.events);
    }

    fn note_generated(&mut self, cands: &[Candidate]) {
        self.telemetry.candidates_generated += cands.len();
        if self.opts.keep_candidates {
            self.kept.extend(cands.iter().cloned());
        }
    }

    fn sync_generator_stats(&mut self) {
        self.telemetry.candidates_rejected = self.generator.rejected;
        self.telemetry.candidates_duplicate = self.generator.duplicates;
    }

    fn is_plausible(&self, c: &Candidate) -> bool {
        self.refs.contains(&self.snapshots[c.snapshot].location.ordinal)
    }
}

/// The tests of `suite` that reach function `func`, with their partition
/// on the unmodified program; also the number of tests dropped. Only those
/// tests say anything about the faulty function.
pub fn relevant_partition(
    program: &Program,
    func: usize,
    suite: &TestSuite,
    limits: Limits,
) -> (TestSuite, Partition, usize) {
    let first = partition(program, suite, limits);
    let suite = suite.filtered(|t| first.outcomes[&t.id].coverage.covers_function(func));
    let part = Partition {
        passing: first
            .passing
            .iter()
            .filter(|t| suite.get(t).is_some())
            .cloned()
            .collect(),
        failing: first
            .failing
            .iter()
            .filter(|t| suite.get(t).is_some())
            .cloned()
            .collect(),
        outcomes: first
            .outcomes
            .iter()
            .filter(|(t, _)| suite.get(t).is_some())
            .map(|(t, o)| (t.clone(), o.clone()))
            .collect(),
    };
    let dropped = first.outcomes.len() - suite.len();
    (suite, part, dropped)
}

/// Runs a repair session on `fixme` with `suite`.
pub fn repair(
    program: &Program,
    fixme: &str,
    suite: &TestSuite,
    config: &EngineConfig,
    opts: &RepairOptions,
) -> Result<RepairOutcome, EngineError> {
    config.check()?;
    let start = Instant::now();
    let func = program
        .function_index(fixme)
        .ok_or_else(|| EngineError::UnknownFunction(fixme.to_string()))?;
    let limits = Limits::with_steps(config.steps);

    let (suite, part, filtered_out) = relevant_partition(program, func, suite, limits);
    if part.failing.is_empty() {
        return Err(EngineError::EmptyFailingSet);
    }

    let base_pool = ExpressionPool::base(program, fixme).expect("fixme exists");
    let snapshots = enumerate_snapshots(program, fixme, &base_pool, config.e_max);

    let bootstrap: BTreeSet<TestId> = match config.mode {
        Mode::Retro => select_tests(
            |t| &part.outcomes[t].coverage,
            func,
            &part.passing,
            &part.failing,
            config.n_b.unwrap_or_else(|| default_n_b(part.failing.len())),
        ),
        Mode::Basic => part.outcomes.keys().cloned().collect(),
    };
    let bootstrap_cases: Vec<&TestCase> = suite.tests().iter().filter(|t| bootstrap.contains(&t.id)).collect();
    let matrix = observe(program, &bootstrap_cases, &snapshots, limits);
    let scores = basic_scores(&matrix, &snapshots, &part.failing);
    let mut su_b = vec![0.0; snapshots.len()];
    for s in &scores {
        su_b[s.snapshot] = s.su_b;
    }
    let su_b_order: Vec<usize> = scores.iter().map(|s| s.snapshot).collect();

    let telemetry = Telemetry {
        tests: suite.len(),
        tests_filtered_out: filtered_out,
        failing_tests: part.failing.len(),
        bootstrap_tests: bootstrap.len(),
        snapshots: snapshots.len(),
        ..Telemetry::default()
    };
    let refs = opts.judge.map(|j| j.reference_locations()).unwrap_or_default();
    let validator = Validator::new(&suite, &part, limits);
    let mut session = Session {
        program,
        fixme,
        config,
        opts,
        start,
        deadline: start + Duration::from_millis(config.budget_ms),
        refs,
        failing: part.failing.clone(),
        validator,
        generator: Generator::new(program, fixme).expect("fixme exists"),
        snapshots,
        events: Vec::new(),
        telemetry,
        kept: Vec::new(),
        valid: Vec::new(),
        records: HashMap::new(),
    };
    let top: Vec<usize> = su_b_order.iter().copied().take(config.n_s).collect();

    let caps = Caps { a_max: config.a_max };
    let ordered: Vec<(Candidate, Phase)> = match config.mode {
        Mode::Basic => {
            run_basic(&mut session, &top, &base_pool, caps);
            let pos: HashMap<usize, usize> = su_b_order.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let mut v = session.valid.clone();
            v.sort_by_key(|(c, _)| (pos[&c.snapshot], c.id));
            v
        }
        Mode::Retro => {
            let table = run_retro(&mut session, &top, &base_pool, &su_b, caps);
            let rank = rank_snapshots(&session.snapshots, &su_b, &table);
            let mut pos = vec![0; rank.len()];
            for (i, &s) in rank.iter().enumerate() {
                pos[s] = i;
            }
            let mut v = session.valid.clone();
            v.sort_by_key(|(c, _)| (pos[c.snapshot], c.id));
            let mut seen = BTreeSet::new();
            v.retain(|(c, _)| seen.insert(c.fixme_text.clone()));
            v
        }
    };
    session.sync_generator_stats();
    Ok(finish(session, ordered, su_b))
}

fn run_basic(s: &mut Session, top: &[usize], pool: &ExpressionPool, caps: Caps) {
    const CHUNK: usize = 64;
    s.telemetry.iterations = 1;
    for chunk in top.chunks(CHUNK) {
        if s.out_of_time() {
            s.telemetry.truncated = true;
            break;
        }
        let snaps: Vec<&Snapshot> = chunk.iter().map(|&i| &s.snapshots[i]).collect();
        let cands = s.generator.generate(s.program, &snaps, pool, caps);
        s.telemetry.snapshots_consumed += chunk.len();
        s.note_generated(&cands);
        let results = s.check_all(&cands, false);
        for (c, r) in cands.into_iter().zip(results) {
            let Some(r) = r else {
                s.telemetry.truncated = true;
                continue;
            };
            let valid = r.record.is_valid();
            s.absorb(r);
            if valid {
                s.valid.push((c, Phase::Basic));
            }
        }
    }
}

/// The retrospective loop plus final generation; returns the final
/// location scores.
fn run_retro(s: &mut Session, top: &[usize], base_pool: &ExpressionPool, su_b: &[f64], caps: Caps) -> LocationTable {
    let n1 = s.config.batch_size();
    let mut consumed = 0;
    let mut mscores: Vec<MutationScore> = Vec::new();
    let mut loc_scores: Vec<LocationScore> = Vec::new();
    let mut extra_left: Option<usize> = None;

    loop {
        if consumed >= top.len() {
            break;
        }
        if s.out_of_time() {
            s.telemetry.truncated = true;
            break;
        }
        let batch = &top[consumed..(consumed + n1).min(top.len())];
        consumed += batch.len();
        s.telemetry.iterations += 1;
        let iteration = s.telemetry.iterations;

        let snaps: Vec<&Snapshot> = batch.iter().map(|&i| &s.snapshots[i]).collect();
        let cands = s.generator.generate(s.program, &snaps, base_pool, caps);
        s.note_generated(&cands);
        let results = s.check_all(&cands, true);

        let mut stats = IterationStats {
            iteration,
            snapshots: batch.len(),
            candidates: cands.len(),
            sharpening: 0,
            plausible: 0,
            promoted: 0,
            valid: 0,
            best_location: None,
        };
        for (c, r) in cands.into_iter().zip(results) {
            let Some(r) = r else {
                s.telemetry.truncated = true;
                continue;
            };
            let killed = r.record.killed();
            if !killed.is_empty() {
                stats.sharpening += 1;
                if s.is_plausible(&c) {
                    stats.plausible += 1;
                }
            }
            if r.record.checks > 1 {
                stats.promoted += 1;
            }
            mscores.push(MutationScore {
                candidate: c.id,
                snapshot: c.snapshot,
                su_m: candidate_score(&killed, &s.failing).expect("failing set is nonempty"),
                killed,
            });
            let valid = r.record.is_valid();
            s.records.insert(c.fixme_text.clone(), r.record.clone());
            s.absorb(r);
            if valid {
                stats.valid += 1;
                s.valid.push((c, Phase::Loop));
            }
        }
        loc_scores = snapshot_scores(&mscores, &s.snapshots);
        stats.best_location = loc_scores
            .iter()
            .copied()
            .max_by(|a, b| a.su_m.total_cmp(&b.su_m).then(b.location.cmp(&a.location)));
        s.telemetry.sharpening += stats.sharpening;
        s.telemetry.plausible += stats.plausible;
        if iteration == 1 {
            s.telemetry.first_iteration_sharpening = stats.sharpening;
            s.telemetry.first_iteration_plausible = stats.plausible;
        }
        s.telemetry.per_iteration.push(stats);

        if should_stop(&loc_scores) && extra_left.is_none() {
            s.telemetry.first_positive_iteration = Some(iteration);
            extra_left = Some(s.config.n_i);
        }
        match extra_left {
            Some(0) => break,
            Some(k) => extra_left = Some(k - 1),
            None => {}
        }
    }
    s.telemetry.snapshots_consumed = consumed;
    let table = LocationTable::new(&loc_scores);
    s.telemetry.fallback = !should_stop(&loc_scores);
    if s.telemetry.truncated {
        return table;
    }

    // final generation at the most suspicious locations
    let locations: Vec<u32> = if s.telemetry.fallback {
        let mut best: HashMap<u32, f64> = HashMap::new();
        for snap in &s.snapshots {
            let e = best.entry(snap.location.ordinal).or_insert(0.0);
            *e = e.max(su_b[snap.id]);
        }
        let mut locs: Vec<(u32, f64)> = best.into_iter().collect();
        locs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        locs.into_iter().map(|(l, _)| l).take(s.config.n_l).collect()
    } else {
        let mut locs = Vec::new();
        for i in rank_snapshots(&s.snapshots, su_b, &table) {
            let l = s.snapshots[i].location.ordinal;
            if !locs.contains(&l) {
                locs.push(l);
            }
        }
        locs.truncate(s.config.n_l);
        locs
    };
    let chosen: BTreeSet<u32> = locations.iter().copied().collect();
    let final_ids: Vec<usize> = rank_snapshots(&s.snapshots, su_b, &table)
        .into_iter()
        .filter(|&i| chosen.contains(&s.snapshots[i].location.ordinal))
        .collect();
    s.telemetry.final_locations = locations;
    s.telemetry.final_snapshots = final_ids.len();

    let pool = if s.config.extended {
        ExpressionPool::extended(s.program, s.fixme).expect("fixme exists")
    } else {
        base_pool.clone()
    };
    s.generator.reset_seen(s.program);
    let snaps: Vec<&Snapshot> = final_ids.iter().map(|&i| &s.snapshots[i]).collect();
    let cands = s.generator.generate(s.program, &snaps, &pool, caps);
    s.note_generated(&cands);

    let (reused, fresh): (Vec<_>, Vec<_>) = cands.into_iter().partition(|c| s.records.contains_key(&c.fixme_text));
    s.telemetry.reused_records = reused.len();
    for c in reused {
        if s.records[&c.fixme_text].is_valid() {
            s.valid.push((c, Phase::Final));
        }
    }
    let results = s.check_all(&fresh, true);
    for (c, r) in fresh.into_iter().zip(results) {
        let Some(r) = r else {
            s.telemetry.truncated = true;
            continue;
        };
        if !r.record.killed().is_empty() {
            s.telemetry.sharpening += 1;
            if s.is_plausible(&c) {
                s.telemetry.plausible += 1;
            }
        }
        let valid = r.record.is_valid();
        s.absorb(r);
        if valid {
            s.valid.push((c, Phase::Final));
        }
    }
    table
}

fn finish(mut s: Session, ordered: Vec<(Candidate, Phase)>, su_b: Vec<f64>) -> RepairOutcome {
    let judge = s.opts.judge;
    let mut fixes = Vec::new();
    let mut correct_ids = BTreeSet::new();
    for (i, (c, phase)) in ordered.iter().enumerate() {
        let correct = judge.map(|j| j.is_correct(&c.materialize(s.program)));
        if correct == Some(true) {
            correct_ids.insert(c.id);
        }
        fixes.push(FixReport {
            rank: i + 1,
            candidate: c.id,
            phase: *phase,
            snapshot: SnapshotRecord::from(&s.snapshots[c.snapshot]),
            schema: c.schema,
            action_kind: c.action.as_ref().map(|a| a.kind),
            action: c.action_text(),
            function: c.fixme_text.clone(),
            diff: c.diff(s.program),
            correct,
        });
    }
    // correctness of candidates that lost a dedup tie still counts for C2C
    let correct_texts: BTreeSet<&str> = ordered
        .iter()
        .filter(|(c, _)| correct_ids.contains(&c.id))
        .map(|(c, _)| c.fixme_text.as_str())
        .collect();
    let all_valid_correct: BTreeSet<usize> = s
        .valid
        .iter()
        .filter(|(c, _)| correct_texts.contains(c.fixme_text.as_str()))
        .map(|(c, _)| c.id)
        .chain(correct_ids.iter().copied())
        .collect();

    let mut measures = Measures {
        valid: fixes.len(),
        first_correct_rank: fixes.iter().find(|f| f.correct == Some(true)).map(|f| f.rank),
        checked: s.events.len() as u64,
        ..Measures::default()
    };
    let mut timing = Timing::default();
    for (n, e) in s.events.iter().enumerate() {
        if !e.confirms_valid {
            continue;
        }
        if measures.c2v.is_none() {
            measures.c2v = Some(n as u64 + 1);
            timing.t2v_us = Some(e.at.as_micros() as u64);
        }
        if measures.c2c.is_none() && all_valid_correct.contains(&e.candidate) {
            measures.c2c = Some(n as u64 + 1);
            timing.t2c_us = Some(e.at.as_micros() as u64);
        }
    }
    debug_assert_eq!(s.validator.checked(), s.events.len() as u64);
    timing.total_us = s.start.elapsed().as_micros() as u64;

    let report = RepairReport {
        schema: 1,
        fixme: s.fixme.to_string(),
        config: s.config.clone(),
        fixes,
        measures,
        telemetry: std::mem::take(&mut s.telemetry),
        timing,
    };
    RepairOutcome {
        report,
        su_b,
        snapshots: s.snapshots,
        candidates: s.kept,
        valid_fixes: ordered.into_iter().map(|(c, _)| c).collect(),
    }
}
