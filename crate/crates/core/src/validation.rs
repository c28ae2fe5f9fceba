//! Candidate validation: partial (originally failing tests only) and full
//! (entire suite). Every call is one "checked" event.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::lang::{Limits, Subject};
use crate::testkit::{classify, Partition, TestCase, TestId, TestSuite, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Unvalidated,
    PartiallyValidated,
    Promoted,
    Valid,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationRecord {
    pub candidate: usize,
    /// Verdict per originally failing test.
    pub partial: BTreeMap<TestId, Verdict>,
    /// Verdicts of the full run, up to and including the first failure.
    pub full: BTreeMap<TestId, Verdict>,
    pub status: Status,
    /// Validation events spent on this candidate.
    pub checks: u32,
}

impl ValidationRecord {
    pub fn new(candidate: usize) -> Self {
        ValidationRecord {
            candidate,
            partial: BTreeMap::new(),
            full: BTreeMap::new(),
            status: Status::Unvalidated,
            checks: 0,
        }
    }

    /// Originally failing tests the candidate passes.
    pub fn killed(&self) -> BTreeSet<TestId> {
        self.partial
            .iter()
            .filter(|(_, v)| **v == Verdict::Pass)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }

    fn passed_all_failing(&self) -> bool {
        !self.partial.is_empty() && self.partial.values().all(|v| *v == Verdict::Pass)
    }
}

pub struct Validator<'a> {
    failing: Vec<&'a TestCase>,
    passing: Vec<&'a TestCase>,
    all: Vec<&'a TestCase>,
    limits: Limits,
    checked: AtomicU64,
}

impl<'a> Validator<'a> {
    /// Tests run in ascending id order within each group; a full run of
    /// the whole suite starts with the originally failing group, which
    /// most candidates fail straight away.
    pub fn new(suite: &'a TestSuite, partition: &Partition, limits: Limits) -> Self {
        let mut sorted: Vec<&TestCase> = suite.tests().iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let (failing, passing): (Vec<&TestCase>, Vec<&TestCase>) = sorted
            .into_iter()
            .filter(|t| partition.failing.contains(&t.id) || partition.passing.contains(&t.id))
            .partition(|t| partition.failing.contains(&t.id));
        let all = failing.iter().chain(passing.iter()).copied().collect();
        Validator {
            failing,
            passing,
            all,
            limits,
            checked: AtomicU64::new(0),
        }
    }

    /// Validation events so far.
    pub fn checked(&self) -> u64 {
        self.checked.load(Ordering::Relaxed)
    }

    fn verdict(&self, subject: Subject, t: &TestCase) -> Verdict {
        match subject.run(&t.call, self.limits) {
            Ok(result) if classify(&t.expect, &result).is_none() => Verdict::Pass,
            _ => Verdict::Fail,
        }
    }

    /// Runs every originally failing test (no early exit); the candidate is
    /// promoted when all of them pass.
    pub fn partial_validate<'p>(&self, candidate: usize, subject: impl Into<Subject<'p>>) -> ValidationRecord {
        let subject = subject.into();
        self.checked.fetch_add(1, Ordering::Relaxed);
        let mut rec = ValidationRecord::new(candidate);
        for t in &self.failing {
            rec.partial.insert(t.id.clone(), self.verdict(subject, t));
        }
        rec.checks = 1;
        rec.status = if rec.passed_all_failing() {
            Status::Promoted
        } else {
            Status::PartiallyValidated
        };
        rec
    }

    /// Runs the originally passing tests if `prior` passed all failing ones,
    /// otherwise the whole suite; stops at the first failing test.
    pub fn full_validate<'p>(&self, subject: impl Into<Subject<'p>>, prior: ValidationRecord) -> ValidationRecord {
        let subject = subject.into();
        self.checked.fetch_add(1, Ordering::Relaxed);
        let mut rec = prior;
        let tests = if rec.passed_all_failing() {
            &self.passing
        } else {
            &self.all
        };
        let mut ok = true;
        for t in tests {
            let v = self.verdict(subject, t);
            rec.full.insert(t.id.clone(), v);
            if v == Verdict::Fail {
                ok = false;
                break;
            }
        }
        rec.checks += 1;
        rec.status = if ok { Status::Valid } else { Status::Invalid };
        rec
    }
}
