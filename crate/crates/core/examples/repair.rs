//! Repairs one corpus bug in the chosen mode and prints the ranked fixes
//! with the oracle's verdict.
//!
//!     cargo run --release --example repair -- bug13 retro

use retrofix::cli::corpus::{default_corpus_dir, BugEntry};
use retrofix::engine::{repair, EngineConfig, Mode, RepairOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "bug13".into());
    let mode: Mode = args.next().map_or(Mode::Retro, |m| m.parse().expect("basic or retro"));
    let bug = BugEntry::load(&default_corpus_dir().join(&id)).expect("corpus bug");
    let oracle = bug.oracle();
    let config = match mode {
        Mode::Retro => EngineConfig::default(),
        Mode::Basic => EngineConfig::basic(),
    };
    let opts = RepairOptions {
        judge: Some(&oracle),
        keep_candidates: false,
    };
    let out = repair(&bug.program, bug.fixme(), &bug.tests, &config, &opts).expect("repair runs");
    let (m, t) = (&out.report.measures, &out.report.telemetry);
    println!(
        "{id} [{mode:?}]: {} valid, C={:?}, C2V={:?}, {} validations, {} iteration(s), {} sharpening",
        m.valid, m.first_correct_rank, m.c2v, m.checked, t.iterations, t.sharpening
    );
    for f in out.report.fixes.iter().take(5) {
        let s = &f.snapshot;
        let verdict = if f.correct == Some(true) { "correct" } else { "valid" };
        println!(
            "\n#{} {verdict} from <#{} {}, {}> ({:?})",
            f.rank, s.ordinal, s.expr, s.value, f.phase
        );
        print!("{}", f.diff);
    }
}
