//! Mutation-based fault localization: candidates are treated as mutants, and
//! the failing tests they make pass sharpen the suspiciousness of the
//! location they were generated at.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::snapshot::Snapshot;
use crate::testkit::TestId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MbflError {
    #[error("mutation score needs at least one failing test")]
    EmptyFailingSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MutationScore {
    pub candidate: usize,
    /// σ of the candidate.
    pub snapshot: usize,
    pub su_m: f64,
    pub killed: BTreeSet<TestId>,
}

/// `|T_fail ∩ killed| / sqrt(|T_fail| · |killed|)`; 0 for an empty kill set.
pub fn candidate_score(killed: &BTreeSet<TestId>, failing: &BTreeSet<TestId>) -> Result<f64, MbflError> {
    if failing.is_empty() {
        return Err(MbflError::EmptyFailingSet);
    }
    if killed.is_empty() {
        return Ok(0.0);
    }
    let both = killed.intersection(failing).count();
    Ok(both as f64 / ((failing.len() * killed.len()) as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocationScore {
    /// Location ordinal within the faulty function.
    pub location: u32,
    pub su_m: f64,
}

/// Per-location mutation scores. Each candidate D contributes SU(D), the
/// best score among candidates sharing its snapshot; a location's score is
/// the mean over all its candidates. Output sorted by location ordinal.
pub fn snapshot_scores(scores: &[MutationScore], snapshots: &[Snapshot]) -> Vec<LocationScore> {
    let mut best: BTreeMap<usize, f64> = BTreeMap::new();
    for s in scores {
        let e = best.entry(s.snapshot).or_insert(0.0);
        *e = e.max(s.su_m);
    }
    let mut ordered: Vec<&MutationScore> = scores.iter().collect();
    ordered.sort_by_key(|s| s.candidate);
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for s in ordered {
        let loc = snapshots[s.snapshot].location.ordinal;
        let e = sums.entry(loc).or_insert((0.0, 0));
        e.0 += best[&s.snapshot];
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(location, (sum, n))| LocationScore {
            location,
            su_m: sum / n as f64,
        })
        .collect()
}

/// Location scores as a lookup table; absent locations read as 0.
#[derive(Clone, Debug, Default)]
pub struct LocationTable(BTreeMap<u32, f64>);

impl LocationTable {
    pub fn new(scores: &[LocationScore]) -> Self {
        LocationTable(scores.iter().map(|s| (s.location, s.su_m)).collect())
    }

    pub fn get(&self, location: u32) -> f64 {
        self.0.get(&location).copied().unwrap_or(0.0)
    }
}

/// ≼: snapshots at different locations compare by location su_M, at the
/// same location by su_B (both descending); remaining ties go by location
/// ordinal, expression index and value. `su_b` is indexed by snapshot id.
pub fn combined_order(a: &Snapshot, b: &Snapshot, su_b: &[f64], su_m: &LocationTable) -> Ordering {
    let (la, lb) = (a.location.ordinal, b.location.ordinal);
    if la != lb {
        return su_m.get(lb).total_cmp(&su_m.get(la)).then(la.cmp(&lb));
    }
    su_b[b.id]
        .total_cmp(&su_b[a.id])
        .then_with(|| a.tie_key().cmp(&b.tie_key()))
}

/// Snapshot ids sorted by ≼.
pub fn rank_snapshots(snapshots: &[Snapshot], su_b: &[f64], su_m: &LocationTable) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..snapshots.len()).collect();
    ids.sort_by(|&x, &y| combined_order(&snapshots[x], &snapshots[y], su_b, su_m));
    ids
}

/// True once some location has a positive mutation score.
pub fn should_stop(scores: &[LocationScore]) -> bool {
    scores.iter().any(|s| s.su_m > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::ast::Expr;
    use crate::lang::Location;

    fn ids(v: &[&str]) -> BTreeSet<TestId> {
        v.iter().map(|s| TestId::from(*s)).collect()
    }

    fn snap(id: usize, ordinal: u32, expr_index: usize) -> Snapshot {
        Snapshot {
            id,
            location: Location {
                function: "f".into(),
                stmt: ordinal + 1,
                ordinal,
            },
            expr: Expr::bool(true),
            expr_text: format!("e{expr_index}"),
            expr_index,
            group: id,
            value: false,
        }
    }

    fn ms(candidate: usize, snapshot: usize, su_m: f64) -> MutationScore {
        MutationScore {
            candidate,
            snapshot,
            su_m,
            killed: BTreeSet::new(),
        }
    }

    #[test]
    fn eq1_examples() {
        let one = ids(&["t"]);
        assert_eq!(candidate_score(&one, &one), Ok(1.0));
        assert_eq!(candidate_score(&BTreeSet::new(), &one), Ok(0.0));
        let four = ids(&["a", "b", "c", "d"]);
        assert_eq!(candidate_score(&ids(&["c"]), &four), Ok(0.5));
        assert_eq!(candidate_score(&one, &BTreeSet::new()), Err(MbflError::EmptyFailingSet));
    }

    #[test]
    fn eq2_examples() {
        let snaps = vec![snap(0, 3, 0), snap(1, 3, 1)];
        let r = snapshot_scores(&[ms(0, 0, 1.0), ms(1, 0, 0.5)], &snaps);
        assert_eq!(r, vec![LocationScore { location: 3, su_m: 1.0 }]);
        let r = snapshot_scores(&[ms(0, 0, 1.0), ms(1, 0, 0.5), ms(2, 1, 0.0)], &snaps);
        assert!((r[0].su_m - 2.0 / 3.0).abs() < 1e-15);
        let r = snapshot_scores(&[ms(0, 0, 0.0), ms(1, 1, 0.0)], &snaps);
        assert!(!should_stop(&r));
        assert!(!should_stop(&[]));
        assert!(should_stop(&[LocationScore { location: 0, su_m: 0.5 }]));
    }

    #[test]
    fn order_examples() {
        let a = snap(0, 1, 0);
        let b = snap(1, 2, 0);
        let su_m = LocationTable::new(&[
            LocationScore { location: 1, su_m: 0.2 },
            LocationScore { location: 2, su_m: 1.0 },
        ]);
        // location score decides across locations, whatever su_B says
        assert_eq!(combined_order(&b, &a, &[1.0, 0.0], &su_m), Ordering::Less);
        // equal location scores: ordinal, not su_B
        let flat = LocationTable::default();
        assert_eq!(combined_order(&a, &b, &[0.0, 0.9], &flat), Ordering::Less);
        // same location: su_B
        let c = snap(1, 1, 1);
        assert_eq!(combined_order(&c, &a, &[0.3, 0.9], &flat), Ordering::Less);
    }
}
