//! Acceptance checks: one `PASS`/`FAIL` line per criterion, run in order.
//! Exits nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use retrofix::cli::bench::{run_bench, strip_timing, BenchReport};
use retrofix::cli::corpus::{default_corpus_dir, load_corpus, BugEntry};
use retrofix::engine::{repair, CorrectnessJudge, EngineConfig, Mode, RepairOptions};
use retrofix::lang::{Expr, Limits, Location};
use retrofix::mbfl::{candidate_score, snapshot_scores, MutationScore};
use retrofix::sbfl::ulam_distance;
use retrofix::snapshot::Snapshot;
use retrofix::testkit::{run_test, TestId, Verdict};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn criterion(name: &str, limit: Duration, failures: &mut usize, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    let ok = o.ok && in_time;
    if !ok {
        *failures += 1;
    }
    let time_note = if in_time {
        String::new()
    } else {
        format!("; over the {limit:?} limit")
    };
    println!(
        "[{}] {name} ({:.2}s): {}{time_note}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        o.detail
    );
}

fn ids(names: impl IntoIterator<Item = usize>) -> BTreeSet<TestId> {
    names.into_iter().map(|i| TestId(format!("t{i}"))).collect()
}

fn eq1() -> Outcome {
    let failing = ids(0..5);
    let mut mismatches = 0;
    // killed ranges over every subset of T_fail plus a fixed passing test
    for mask in 0u32..32 {
        for extra in [false, true] {
            let mut killed = ids((0..5).filter(|i| mask & (1 << i) != 0));
            if extra {
                killed.insert(TestId("p0".into()));
            }
            let got = candidate_score(&killed, &failing).unwrap();
            let both = (0..5).filter(|i| mask & (1 << i) != 0).count() as f64;
            let want = if killed.is_empty() {
                0.0
            } else {
                both / (5.0 * killed.len() as f64).sqrt()
            };
            if got.to_bits() != want.to_bits() {
                mismatches += 1;
            }
        }
    }
    let one = ids([0]);
    let worked = candidate_score(&one, &one).unwrap();
    outcome(
        mismatches == 0 && worked == 1.0,
        format!("64 kill sets, {mismatches} mismatch(es); |T_fail|=1 worked point = {worked}"),
    )
}

fn snap(id: usize, ordinal: u32) -> Snapshot {
    Snapshot {
        id,
        location: Location {
            function: "f".into(),
            stmt: ordinal + 1,
            ordinal,
        },
        expr: Expr::bool(true),
        expr_text: format!("e{id}"),
        expr_index: id,
        group: id,
        value: true,
    }
}

fn eq2() -> Outcome {
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_snaps = rng.gen_range(1..=8);
        let snapshots: Vec<Snapshot> = (0..n_snaps).map(|i| snap(i, rng.gen_range(0..4))).collect();
        let failing = ids(0..rng.gen_range(1..=4));
        let n = rng.gen_range(1..=20);
        let mut scores: Vec<MutationScore> = (0..n)
            .map(|c| {
                let killed = ids((0..6).filter(|_| rng.gen_bool(0.4)));
                MutationScore {
                    candidate: c,
                    snapshot: rng.gen_range(0..n_snaps),
                    su_m: candidate_score(&killed, &failing).unwrap(),
                    killed,
                }
            })
            .collect();
        // reference: SU(D) = max over candidates of D's snapshot, then the
        // mean per location, summed in candidate order
        let mut max_by_snap: HashMap<usize, f64> = HashMap::new();
        for s in &scores {
            let e = max_by_snap.entry(s.snapshot).or_insert(f64::NEG_INFINITY);
            if s.su_m > *e {
                *e = s.su_m;
            }
        }
        let mut per_loc: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for s in &scores {
            per_loc
                .entry(snapshots[s.snapshot].location.ordinal)
                .or_default()
                .push(max_by_snap[&s.snapshot]);
        }
        let want: Vec<(u32, u64)> = per_loc
            .into_iter()
            .map(|(l, v)| (l, (v.iter().sum::<f64>() / v.len() as f64).to_bits()))
            .collect();

        scores.shuffle(&mut rng);
        let got: Vec<(u32, u64)> = snapshot_scores(&scores, &snapshots)
            .into_iter()
            .map(|l| (l.location, l.su_m.to_bits()))
            .collect();
        if got != want {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("100 seeded tables, {mismatches} mismatch(es)"))
}

/// Fewest single-element deletions and insertions turning `from` into each
/// permutation of its alphabet, by breadth-first search over partial
/// sequences.
fn edit_distances(from: &[u8]) -> HashMap<Vec<u8>, usize> {
    let alphabet = from.to_vec();
    let mut dist: HashMap<Vec<u8>, usize> = HashMap::from([(from.to_vec(), 0)]);
    let mut queue = VecDeque::from([from.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        let mut next = Vec::new();
        for i in 0..cur.len() {
            let mut s = cur.clone();
            s.remove(i);
            next.push(s);
        }
        for &x in alphabet.iter().filter(|x| !cur.contains(x)) {
            for i in 0..=cur.len() {
                let mut s = cur.clone();
                s.insert(i, x);
                next.push(s);
            }
        }
        for s in next {
            if !dist.contains_key(&s) {
                dist.insert(s.clone(), d + 1);
                queue.push_back(s);
            }
        }
    }
    dist.retain(|s, _| s.len() == alphabet.len());
    dist
}

fn permutations(items: &[u8]) -> Vec<Vec<u8>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn ulam() -> Outcome {
    let footnote = ulam_distance(b"abctu", b"abtcu").unwrap();
    let mut problems = Vec::new();
    let mut pairs = 0usize;
    for n in 0..=5u8 {
        let perms = permutations(&(0..n).collect::<Vec<_>>());
        let mut d: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, p) in perms.iter().enumerate() {
            let brute = edit_distances(p);
            for (j, q) in perms.iter().enumerate() {
                let got = ulam_distance(p, q).unwrap();
                if got != brute[q] {
                    problems.push(format!("{p:?}/{q:?}: {got} vs brute {}", brute[q]));
                }
                if (got == 0) != (i == j) {
                    problems.push(format!("{p:?}/{q:?}: identity"));
                }
                d.insert((i, j), got);
                pairs += 1;
            }
        }
        for i in 0..perms.len() {
            for j in 0..perms.len() {
                if d[&(i, j)] != d[&(j, i)] {
                    problems.push(format!("n={n}: asymmetric {i},{j}"));
                }
                for k in 0..perms.len() {
                    if d[&(i, k)] > d[&(i, j)] + d[&(j, k)] {
                        problems.push(format!("n={n}: triangle {i},{j},{k}"));
                    }
                }
            }
        }
    }
    problems.truncate(3);
    outcome(
        footnote == 2 && problems.is_empty(),
        format!(
            "footnote example = {footnote}; {pairs} pairs vs brute force; {}",
            if problems.is_empty() {
                "axioms hold".into()
            } else {
                problems.join(", ")
            }
        ),
    )
}

fn bug13(bugs: &[BugEntry]) -> Outcome {
    let Some(bug) = bugs.iter().find(|b| b.id() == "bug13") else {
        return outcome(false, "bug13 missing from the corpus");
    };
    let oracle = bug.oracle();
    let opts = RepairOptions {
        judge: Some(&oracle),
        keep_candidates: false,
    };
    let retro = repair(&bug.program, bug.fixme(), &bug.tests, &EngineConfig::default(), &opts);
    let basic = repair(&bug.program, bug.fixme(), &bug.tests, &EngineConfig::basic(), &opts);
    let (Ok(retro), Ok(basic)) = (retro, basic) else {
        return outcome(false, "repair errored");
    };
    let first = retro.report.fixes.first().and_then(|f| f.correct);
    let rank = retro.report.measures.first_correct_rank;
    outcome(
        first == Some(true) && rank == Some(1) && basic.report.measures.valid == 0,
        format!(
            "retro: first fix correct = {first:?}, C = {rank:?}, {} valid; basic: {} valid",
            retro.report.measures.valid, basic.report.measures.valid
        ),
    )
}

fn bench_json(extra: &[&str]) -> Result<Value, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("bench.json");
    let csv = dir.path().join("bench.csv");
    let mut args = vec![
        "retrofix",
        "bench",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let code = retrofix::cli::run(args);
    if code != 0 {
        return Err(format!("bench exited with {code}"));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn efficiency(first: &Result<Value, String>) -> Outcome {
    let report: BenchReport = match first {
        Ok(v) => serde_json::from_value(v.clone()).expect("bench report parses"),
        Err(e) => return outcome(false, e.clone()),
    };
    let f = report.footer.expect("both modes ran");
    let c2v = &f.relative["c2v"];
    let ratio = c2v.ratio.unwrap_or(f64::INFINITY);
    outcome(
        ratio <= 0.75 && f.retro_solved >= f.basic_solved && report.rows.len() == 24,
        format!(
            "C2V ratio {ratio:.4} (retro {} / basic {} over {} bugs); solved retro {} basic {}",
            c2v.retro_sum,
            c2v.basic_sum,
            c2v.bugs.len(),
            f.retro_solved,
            f.basic_solved
        ),
    )
}

fn loop_accounting(first: &Result<Value, String>, bugs: &[BugEntry]) -> Outcome {
    let report: BenchReport = match first {
        Ok(v) => serde_json::from_value(v.clone()).expect("bench report parses"),
        Err(e) => return outcome(false, e.clone()),
    };
    let mut problems = Vec::new();
    let mut solved = 0;
    for r in report.rows.iter().filter(|r| r.mode == Mode::Retro && r.solved()) {
        solved += 1;
        if r.iterations < 1 {
            problems.push(format!("{}: no iteration", r.bug));
        }
        if r.first_positive_iteration.is_some() && r.sharpening < 1 {
            problems.push(format!("{}: signal without sharpening candidates", r.bug));
        }
    }
    let mut compared = 0;
    for bug in bugs {
        for r in report.rows.iter().filter(|r| r.bug == bug.id()) {
            for (k, v) in r.facts() {
                compared += 1;
                match bug.manifest.golden.get(&k) {
                    Some(g) if *g == v => {}
                    g => problems.push(format!(
                        "{} {k}: {v} vs golden {}",
                        bug.id(),
                        g.map_or("-".into(), |g| g.to_string())
                    )),
                }
            }
        }
    }
    let n = problems.len();
    problems.truncate(4);
    outcome(
        n == 0,
        format!(
            "{solved} retro-solved bugs checked; {compared} golden values, {n} problem(s) {}",
            problems.join("; ")
        ),
    )
}

fn determinism(first: &Result<Value, String>) -> Outcome {
    let (Ok(a), Ok(b)) = (first, bench_json(&[])) else {
        return outcome(false, "a bench run failed");
    };
    let (mut a, mut b) = (a.clone(), b);
    strip_timing(&mut a);
    strip_timing(&mut b);
    let (a, b) = (
        serde_json::to_string_pretty(&a).unwrap(),
        serde_json::to_string_pretty(&b).unwrap(),
    );
    outcome(
        a == b,
        format!(
            "untimed reports {} ({} bytes)",
            if a == b { "identical" } else { "differ" },
            a.len()
        ),
    )
}

fn soundness(bugs: &[BugEntry]) -> Outcome {
    let limits = Limits::default();
    let (mut valid, mut correct, mut bad) = (0, 0, Vec::new());
    for bug in bugs {
        let oracle = bug.oracle();
        let opts = RepairOptions {
            judge: Some(&oracle),
            keep_candidates: false,
        };
        for cfg in [EngineConfig::default(), EngineConfig::basic()] {
            let out = match repair(&bug.program, bug.fixme(), &bug.tests, &cfg, &opts) {
                Ok(o) => o,
                Err(e) => {
                    bad.push(format!("{}: {e}", bug.id()));
                    continue;
                }
            };
            for (fix, report) in out.valid_fixes.iter().zip(&out.report.fixes) {
                valid += 1;
                let program = fix.materialize(&bug.program);
                if bug
                    .tests
                    .tests()
                    .iter()
                    .any(|t| run_test(&program, t, limits).verdict != Verdict::Pass)
                {
                    bad.push(format!("{} fix {} fails a visible test", bug.id(), report.rank));
                }
                if report.correct == Some(true) {
                    correct += 1;
                    if !oracle.passes_hidden(&program) {
                        bad.push(format!(
                            "{} fix {} correct but fails hidden tests",
                            bug.id(),
                            report.rank
                        ));
                    }
                } else if oracle.is_correct(&program) {
                    bad.push(format!("{} fix {} mislabeled", bug.id(), report.rank));
                }
            }
        }
    }
    let n = bad.len();
    bad.truncate(4);
    outcome(
        n == 0 && valid > 0,
        format!(
            "{valid} valid fixes re-run, {correct} correct checked on hidden tests; {n} problem(s) {}",
            bad.join("; ")
        ),
    )
}

fn robustness(bugs: &[BugEntry]) -> Outcome {
    let mut points = Vec::new();
    for n_l in [2, 5, 10] {
        let cfg = EngineConfig {
            n_l,
            ..EngineConfig::default()
        };
        let r = run_bench(bugs, &[Mode::Retro], &cfg);
        let solved = r.rows.iter().filter(|r| r.solved()).count();
        let checked: u64 = r.rows.iter().map(|r| r.checked).sum();
        points.push((n_l, solved, checked));
    }
    let ok = points.windows(2).all(|w| w[0].1 <= w[1].1 && w[0].2 <= w[1].2);
    let shown: Vec<String> = points
        .iter()
        .map(|(n, s, c)| format!("N_L={n}: {s} solved, {c} validations"))
        .collect();
    outcome(ok, shown.join("; "))
}

fn main() {
    let bugs = load_corpus(&default_corpus_dir()).expect("corpus loads");
    let mut failures = 0;
    let f = &mut failures;
    criterion("Eq. 1 oracle", Duration::from_secs(1), f, eq1);
    criterion("Eq. 2 oracle", Duration::from_secs(1), f, eq2);
    criterion("Ulam oracle", Duration::from_secs(10), f, ulam);
    criterion("bug13 needs the extended space", Duration::from_secs(30), f, || {
        bug13(&bugs)
    });

    let mut first = Err("bench not run".to_string());
    criterion("Efficiency direction", Duration::from_secs(60), f, || {
        first = bench_json(&[]);
        efficiency(&first)
    });
    criterion("Loop accounting", Duration::from_secs(1), f, || {
        loop_accounting(&first, &bugs)
    });
    criterion("Determinism", Duration::from_secs(120), f, || determinism(&first));
    criterion("Validity soundness", Duration::from_secs(120), f, || soundness(&bugs));
    criterion("Parameter robustness (N_L)", Duration::from_secs(180), f, || {
        robustness(&bugs)
    });

    println!("{} of 9 criteria failed", failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
