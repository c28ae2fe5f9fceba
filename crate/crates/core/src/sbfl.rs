//! Spectrum-based fault localization over snapshots (Ochiai), and the
//! selection of the bootstrap test subset by Ulam distance between block
//! execution profiles.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::lang::CoverageProfile;
use crate::snapshot::{ObservationMatrix, Snapshot};
use crate::testkit::TestId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SbflError {
    #[error("block sequences range over different block sets")]
    MismatchedAlphabet,
}

/// φ(t): the blocks of a function ordered by descending execution count,
/// ties by ascending block id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSequence(pub Vec<u32>);

impl BlockSequence {
    pub fn from_counts(counts: &[u64]) -> Self {
        let mut ids: Vec<u32> = (0..counts.len() as u32).collect();
        ids.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
        BlockSequence(ids)
    }

    pub fn of(profile: &CoverageProfile, func: usize) -> Self {
        Self::from_counts(profile.block_counts(func))
    }
}

/// Edit distance between two orderings of the same set, counting a delete
/// and a re-insert as separate operations: moving one element costs 2.
/// Equals `2 · (n − LCS)`.
pub fn ulam_distance<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<usize, SbflError> {
    let mut sa: Vec<&T> = a.iter().collect();
    let mut sb: Vec<&T> = b.iter().collect();
    sa.sort();
    sb.sort();
    if sa != sb || sa.windows(2).any(|w| w[0] == w[1]) {
        return Err(SbflError::MismatchedAlphabet);
    }
    // LCS of two permutations = LIS of b's positions read in a's order
    let pos_in_b = |x: &T| sb.binary_search(&x).ok();
    let mut rank_b = vec![0usize; b.len()];
    for (i, x) in b.iter().enumerate() {
        rank_b[pos_in_b(x).expect("same alphabet")] = i;
    }
    let seq: Vec<usize> = a.iter().map(|x| rank_b[pos_in_b(x).expect("same alphabet")]).collect();
    let mut tails: Vec<usize> = Vec::new();
    for v in seq {
        match tails.binary_search(&v) {
            Ok(_) => {}
            Err(i) if i == tails.len() => tails.push(v),
            Err(i) => tails[i] = v,
        }
    }
    Ok(2 * (a.len() - tails.len()))
}

pub fn default_n_b(n_fail: usize) -> usize {
    20.max(2 * n_fail)
}

/// T_B: all failing tests plus the `n_b` passing tests whose block sequence
/// is nearest (minimum over failing tests) to a failing one; ties by id.
pub fn select_tests<'a>(
    profiles: impl Fn(&TestId) -> &'a CoverageProfile,
    func: usize,
    passing: &BTreeSet<TestId>,
    failing: &BTreeSet<TestId>,
    n_b: usize,
) -> BTreeSet<TestId> {
    let fail_seqs: Vec<BlockSequence> = failing.iter().map(|t| BlockSequence::of(profiles(t), func)).collect();
    let mut ranked: Vec<(usize, &TestId)> = passing
        .iter()
        .map(|t| {
            let s = BlockSequence::of(profiles(t), func);
            let d = fail_seqs
                .iter()
                .map(|f| ulam_distance(&s.0, &f.0).expect("same function, same blocks"))
                .min()
                .unwrap_or(usize::MAX);
            (d, t)
        })
        .collect();
    ranked.sort();
    let mut out: BTreeSet<TestId> = failing.clone();
    out.extend(ranked.into_iter().take(n_b).map(|(_, t)| t.clone()));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasicScore {
    pub snapshot: usize,
    pub su_b: f64,
}

/// Ochiai: `f / sqrt(total_fail · (f + p))`, 0 when `f = 0`.
pub fn ochiai(f: usize, p: usize, total_fail: usize) -> f64 {
    if f == 0 {
        return 0.0;
    }
    f as f64 / ((total_fail * (f + p)) as f64).sqrt()
}

/// su_B for every snapshot over the tests of `matrix`, split into failing
/// (ids in `failing`) and passing; sorted by descending score, ties by
/// (location ordinal, expression index, value).
pub fn basic_scores(matrix: &ObservationMatrix, snapshots: &[Snapshot], failing: &BTreeSet<TestId>) -> Vec<BasicScore> {
    let is_fail: Vec<bool> = matrix.tests.iter().map(|t| failing.contains(t)).collect();
    let total_fail = is_fail.iter().filter(|&&b| b).count();
    let mut scores: Vec<BasicScore> = snapshots
        .iter()
        .map(|s| {
            let (mut f, mut p) = (0, 0);
            for (ti, &fails) in is_fail.iter().enumerate() {
                if matrix.observed(ti, s) > 0 {
                    if fails {
                        f += 1;
                    } else {
                        p += 1;
                    }
                }
            }
            BasicScore {
                snapshot: s.id,
                su_b: ochiai(f, p, total_fail),
            }
        })
        .collect();
    scores.sort_by(|a, b| {
        b.su_b
            .total_cmp(&a.su_b)
            .then_with(|| snapshots[a.snapshot].tie_key().cmp(&snapshots[b.snapshot].tie_key()))
    });
    scores
}
