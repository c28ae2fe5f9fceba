//! Mutation-based localization on one corpus bug: candidates from the first
//! batch of snapshots are partially validated, and the tests they flip give
//! per-location scores (Eq. 1 per candidate, Eq. 2 per location).
//!
//!     cargo run --release --example mutation_scores -- bug04

use std::collections::BTreeSet;

use retrofix::cli::corpus::{default_corpus_dir, BugEntry};
use retrofix::engine::relevant_partition;
use retrofix::fixgen::{generate_for, Caps, ExpressionPool};
use retrofix::lang::{Limits, Subject};
use retrofix::mbfl::{candidate_score, snapshot_scores, MutationScore};
use retrofix::sbfl::{basic_scores, default_n_b, select_tests};
use retrofix::snapshot::{enumerate_snapshots, observe, Snapshot, DEFAULT_E_MAX};
use retrofix::testkit::{classify, TestCase, TestId};

fn main() {
    let id = std::env::args().nth(1).unwrap_or_else(|| "bug04".into());
    let bug = BugEntry::load(&default_corpus_dir().join(&id)).expect("corpus bug");
    let (program, limits) = (&bug.program, Limits::default());
    let func = program.function_index(bug.fixme()).unwrap();
    let (suite, part, _) = relevant_partition(program, func, &bug.tests, limits);
    let pool = ExpressionPool::base(program, bug.fixme()).unwrap();
    let snapshots = enumerate_snapshots(program, bug.fixme(), &pool, DEFAULT_E_MAX);

    let t_b = select_tests(
        |t| &part.outcomes[t].coverage,
        func,
        &part.passing,
        &part.failing,
        default_n_b(part.failing.len()),
    );
    let cases: Vec<&TestCase> = suite.tests().iter().filter(|t| t_b.contains(&t.id)).collect();
    let ranked = basic_scores(&observe(program, &cases, &snapshots, limits), &snapshots, &part.failing);
    let batch: Vec<&Snapshot> = ranked.iter().take(150).map(|s| &snapshots[s.snapshot]).collect();
    let candidates = generate_for(program, bug.fixme(), &batch, &pool, Caps::default());

    let failing: Vec<&TestCase> = suite.tests().iter().filter(|t| part.failing.contains(&t.id)).collect();
    let scores: Vec<MutationScore> = candidates
        .iter()
        .map(|c| {
            let subject: Subject = c.subject(program);
            let killed: BTreeSet<TestId> = failing
                .iter()
                .filter(|t| classify(&t.expect, &subject.run(&t.call, limits).unwrap()).is_none())
                .map(|t| t.id.clone())
                .collect();
            MutationScore {
                candidate: c.id,
                snapshot: c.snapshot,
                su_m: candidate_score(&killed, &part.failing).unwrap(),
                killed,
            }
        })
        .collect();
    let sharpening = scores.iter().filter(|s| !s.killed.is_empty()).count();
    println!(
        "{id}: {} candidates from {} snapshots, {sharpening} flip a failing test",
        candidates.len(),
        batch.len()
    );
    let locations = program.locations(bug.fixme());
    for l in snapshot_scores(&scores, &snapshots) {
        let stmt = program.stmt(locations[l.location as usize].stmt).unwrap();
        println!(
            "#{:<3} su_M {:.4}  {}",
            l.location,
            l.su_m,
            retrofix::lang::printer::stmt_header(stmt)
        );
    }
}
