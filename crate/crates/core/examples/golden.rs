//! Recomputes every corpus bug's golden facts (static sizes plus the
//! outcome counts of a default bench run in both modes) and compares them
//! with the manifests. With `--write`, freezes them instead.
//!
//!     cargo run --release --example golden [-- --write]

use retrofix::cli::bench::run_bench;
use retrofix::cli::corpus::{default_corpus_dir, load_corpus};
use retrofix::engine::{EngineConfig, Mode};

fn main() {
    let write = std::env::args().any(|a| a == "--write");
    let mut bugs = load_corpus(&default_corpus_dir()).expect("corpus loads");
    let report = run_bench(&bugs, &[Mode::Retro, Mode::Basic], &EngineConfig::default());
    let mut drift = 0;
    for bug in bugs.iter_mut() {
        let mut facts = bug.static_facts();
        for row in report.rows.iter().filter(|r| r.bug == bug.id()) {
            facts.extend(row.facts());
        }
        for (k, v) in &facts {
            match bug.manifest.golden.get(k) {
                Some(old) if old == v => {}
                old => {
                    drift += 1;
                    println!("{} {k}: {} -> {v}", bug.id(), old.map_or("-".into(), |o| o.to_string()));
                }
            }
        }
        if write {
            bug.manifest.golden = facts;
            bug.write_manifest().expect("manifest writable");
        }
    }
    println!(
        "{drift} value(s) differ{}",
        if write { "; manifests updated" } else { "" }
    );
}
