//! Basic fault localization for one corpus bug: snapshots ranked by su_B,
//! once over the whole suite and once over the Ulam-selected subset T_B.
//!
//!     cargo run --example localize -- bug01 [top]

use std::collections::BTreeSet;

use retrofix::cli::corpus::{default_corpus_dir, BugEntry};
use retrofix::engine::relevant_partition;
use retrofix::fixgen::ExpressionPool;
use retrofix::lang::Limits;
use retrofix::sbfl::{basic_scores, default_n_b, select_tests};
use retrofix::snapshot::{enumerate_snapshots, observe, DEFAULT_E_MAX};
use retrofix::testkit::{TestCase, TestId};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "bug01".into());
    let top: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(15);

    let bug = BugEntry::load(&default_corpus_dir().join(&id)).expect("corpus bug");
    let limits = Limits::default();
    let program = &bug.program;
    let func = program.function_index(bug.fixme()).expect("fixme exists");
    let (suite, part, _) = relevant_partition(program, func, &bug.tests, limits);
    let pool = ExpressionPool::base(program, bug.fixme()).expect("fixme exists");
    let snapshots = enumerate_snapshots(program, bug.fixme(), &pool, DEFAULT_E_MAX);
    println!(
        "{id}: {} tests reach `{}` ({} failing), {} snapshots",
        suite.len(),
        bug.fixme(),
        part.failing.len(),
        snapshots.len()
    );

    let t_b = select_tests(
        |t| &part.outcomes[t].coverage,
        func,
        &part.passing,
        &part.failing,
        default_n_b(part.failing.len()),
    );
    let all: BTreeSet<TestId> = part.outcomes.keys().cloned().collect();
    println!(
        "T_B: {}",
        t_b.iter().map(|t| t.0.as_str()).collect::<Vec<_>>().join(" ")
    );

    for (label, subset) in [("all tests", &all), ("T_B", &t_b)] {
        let cases: Vec<&TestCase> = suite.tests().iter().filter(|t| subset.contains(&t.id)).collect();
        let matrix = observe(program, &cases, &snapshots, limits);
        let scores = basic_scores(&matrix, &snapshots, &part.failing);
        println!("\nsu_B over {label}:");
        for (rank, s) in scores.iter().take(top).enumerate() {
            println!("{:4}  {:.4}  {}", rank + 1, s.su_b, snapshots[s.snapshot].describe());
        }
    }
}
