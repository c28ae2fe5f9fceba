//! Loads the seeded-bug corpus, checks its invariants and prints a size
//! table: functions, visible/failing/hidden tests, snapshots.
//!
//!     cargo run --example corpus [-- DIR]

use std::path::PathBuf;

use retrofix::cli::corpus::{default_corpus_dir, load_corpus};
use retrofix::fixgen::ExpressionPool;
use retrofix::lang::Limits;
use retrofix::snapshot::{enumerate_snapshots, DEFAULT_E_MAX};
use retrofix::testkit::partition;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(default_corpus_dir);
    let bugs = load_corpus(&dir).expect("corpus loads");
    println!(
        "{:<6} {:<12} {:>5} {:>6} {:>5} {:>6} {:>6}  kind",
        "bug", "fixme", "fns", "tests", "fail", "hidden", "snaps"
    );
    let mut bad = 0;
    for b in &bugs {
        let part = partition(&b.program, &b.tests, Limits::default());
        let pool = ExpressionPool::base(&b.program, b.fixme()).expect("fixme exists");
        let snaps = enumerate_snapshots(&b.program, b.fixme(), &pool, DEFAULT_E_MAX);
        println!(
            "{:<6} {:<12} {:>5} {:>6} {:>5} {:>6} {:>6}  {}",
            b.id(),
            b.fixme(),
            b.program.functions().len(),
            b.tests.len(),
            part.failing.len(),
            b.hidden.len(),
            snaps.len(),
            b.manifest.kind
        );
        if let Err(e) = b.verify() {
            println!("  INVALID: {e}");
            bad += 1;
        }
    }
    if bad > 0 {
        std::process::exit(1);
    }
}
