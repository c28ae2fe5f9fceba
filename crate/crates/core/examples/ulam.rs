//! Ulam distances between block sequences and the bootstrap selection T_B
//! they drive, on hand-made execution counts.
//!
//!     cargo run --example ulam

use std::collections::{BTreeMap, BTreeSet};

use retrofix::lang::CoverageProfile;
use retrofix::sbfl::{select_tests, ulam_distance, BlockSequence};
use retrofix::testkit::TestId;

fn main() {
    let d = ulam_distance(&["a", "b", "c", "t", "u"], &["a", "b", "t", "c", "u"]).unwrap();
    println!("abctu vs abtcu: {d} (delete c, insert it back)");

    // block counts of a four-block function under five tests
    let runs: [(&str, [u64; 4]); 5] = [
        ("fail", [1, 1, 0, 1]),
        ("p_same", [1, 1, 0, 1]),
        ("p_loop", [1, 3, 0, 1]),
        ("p_else", [1, 0, 1, 1]),
        ("p_early", [1, 0, 0, 0]),
    ];
    let profiles: BTreeMap<TestId, CoverageProfile> = runs
        .iter()
        .map(|(id, c)| (TestId(id.to_string()), CoverageProfile::from_counts(vec![c.to_vec()])))
        .collect();
    let failing_seq = BlockSequence::of(&profiles[&TestId("fail".into())], 0);
    for (id, p) in &profiles {
        let seq = BlockSequence::of(p, 0);
        println!(
            "{:8} {:?}  distance {}",
            id.0,
            seq.0,
            ulam_distance(&seq.0, &failing_seq.0).unwrap()
        );
    }
    let failing = BTreeSet::from([TestId("fail".into())]);
    let passing: BTreeSet<TestId> = profiles.keys().filter(|t| !failing.contains(t)).cloned().collect();
    for n_b in [1, 2, 4] {
        let t_b = select_tests(|t| &profiles[t], 0, &passing, &failing, n_b);
        println!(
            "n_b={n_b}: T_B = {:?}",
            t_b.iter().map(|t| t.0.as_str()).collect::<Vec<_>>()
        );
    }
}
