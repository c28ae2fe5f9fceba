//! Test suites, test execution, and the pass/fail partition of a suite
//! against a program.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{run, CallSpec, CoverageProfile, ExecError, Limits, Program, Value};

#[derive(Debug, Error)]
pub enum TestkitError {
    #[error("test suite has no failing test; nothing to repair")]
    EmptyFailingSet,
    #[error("outcomes belong to different tests (`{0}` vs `{1}`)")]
    MismatchedTest(TestId, TestId),
    #[error("duplicate test id `{0}`")]
    DuplicateId(TestId),
    #[error("test `{0}` has neither `expect` nor `expect_error`")]
    MissingExpectation(TestId),
    #[error("malformed test suite: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading test suite: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestId(pub String);

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TestId {
    fn from(s: &str) -> Self {
        TestId(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Value(Value),
    /// The run must end in a runtime error (assertion, division by zero).
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub id: TestId,
    pub call: CallSpec,
    pub expect: Expectation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    WrongValue,
    RuntimeError,
    BudgetExhausted,
    /// The entry call does not match the program's signature.
    BadEntry,
}

#[derive(Clone, Debug)]
pub struct TestOutcome {
    pub test_id: TestId,
    pub verdict: Verdict,
    pub failure: Option<FailureKind>,
    pub coverage: CoverageProfile,
}

// JSON shape: {"id":"t1","call":{"fn":"f","args":[2]},"expect":3}
#[derive(Serialize, Deserialize)]
struct RawCall {
    #[serde(rename = "fn")]
    func: String,
    args: Vec<Value>,
}

#[derive(Serialize, Deserialize)]
struct RawTest {
    id: TestId,
    call: RawCall,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expect: Option<Value>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    expect_error: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSuite {
    tests: Vec<RawTest>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestSuite {
    tests: Vec<TestCase>,
}

impl TestSuite {
    pub fn new(tests: Vec<TestCase>) -> Result<Self, TestkitError> {
        let mut seen = BTreeSet::new();
        for t in &tests {
            if !seen.insert(&t.id) {
                return Err(TestkitError::DuplicateId(t.id.clone()));
            }
        }
        Ok(TestSuite { tests })
    }

    pub fn from_json(text: &str) -> Result<Self, TestkitError> {
        let raw: RawSuite = serde_json::from_str(text)?;
        let tests = raw
            .tests
            .into_iter()
            .map(|r| {
                let expect = match (r.expect, r.expect_error) {
                    (_, true) => Expectation::Error,
                    (Some(v), false) => Expectation::Value(v),
                    (None, false) => return Err(TestkitError::MissingExpectation(r.id)),
                };
                Ok(TestCase {
                    id: r.id,
                    call: CallSpec {
                        func: r.call.func,
                        args: r.call.args,
                    },
                    expect,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        TestSuite::new(tests)
    }

    pub fn load(path: &Path) -> Result<Self, TestkitError> {
        TestSuite::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let raw = RawSuite {
            tests: self
                .tests
                .iter()
                .map(|t| RawTest {
                    id: t.id.clone(),
                    call: RawCall {
                        func: t.call.func.clone(),
                        args: t.call.args.clone(),
                    },
                    expect: match t.expect {
                        Expectation::Value(v) => Some(v),
                        Expectation::Error => None,
                    },
                    expect_error: t.expect == Expectation::Error,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("suite serializes")
    }

    pub fn tests(&self) -> &[TestCase] {
        &self.tests
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn get(&self, id: &TestId) -> Option<&TestCase> {
        self.tests.iter().find(|t| &t.id == id)
    }

    /// Sub-suite with the tests satisfying `keep`, order preserved.
    pub fn filtered(&self, mut keep: impl FnMut(&TestCase) -> bool) -> TestSuite {
        TestSuite {
            tests: self.tests.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

/// Runs one test and classifies its outcome.
pub fn run_test(program: &Program, test: &TestCase, limits: Limits) -> TestOutcome {
    let (verdict, failure, coverage) = match run(program, &test.call, limits, None) {
        Err(_) => (Verdict::Fail, Some(FailureKind::BadEntry), CoverageProfile::default()),
        Ok(out) => {
            let failure = classify(&test.expect, &out.result);
            let verdict = if failure.is_none() {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            (verdict, failure, out.coverage)
        }
    };
    TestOutcome {
        test_id: test.id.clone(),
        verdict,
        failure,
        coverage,
    }
}

/// Failure kind for a run result against an expectation; `None` means pass.
pub fn classify(expect: &Expectation, result: &Result<Value, ExecError>) -> Option<FailureKind> {
    match (expect, result) {
        (Expectation::Value(want), Ok(got)) if want == got => None,
        (Expectation::Value(_), Ok(_)) => Some(FailureKind::WrongValue),
        (Expectation::Error, Err(ExecError::Runtime(_))) => None,
        (Expectation::Error, Ok(_)) => Some(FailureKind::WrongValue),
        (_, Err(ExecError::Runtime(_))) => Some(FailureKind::RuntimeError),
        (_, Err(ExecError::BudgetExhausted)) => Some(FailureKind::BudgetExhausted),
    }
}

#[derive(Clone, Debug)]
pub struct Partition {
    pub passing: BTreeSet<TestId>,
    pub failing: BTreeSet<TestId>,
    pub outcomes: BTreeMap<TestId, TestOutcome>,
}

impl Partition {
    pub fn profiles(&self) -> BTreeMap<TestId, &CoverageProfile> {
        self.outcomes.iter().map(|(id, o)| (id.clone(), &o.coverage)).collect()
    }

    pub fn require_failing(&self) -> Result<(), TestkitError> {
        if self.failing.is_empty() {
            Err(TestkitError::EmptyFailingSet)
        } else {
            Ok(())
        }
    }
}

/// Runs every test of `suite` on `program` and splits the ids by verdict.
pub fn partition(program: &Program, suite: &TestSuite, limits: Limits) -> Partition {
    let outcomes: Vec<TestOutcome> = suite.tests().par_iter().map(|t| run_test(program, t, limits)).collect();
    let mut p = Partition {
        passing: BTreeSet::new(),
        failing: BTreeSet::new(),
        outcomes: BTreeMap::new(),
    };
    for o in outcomes {
        match o.verdict {
            Verdict::Pass => p.passing.insert(o.test_id.clone()),
            Verdict::Fail => p.failing.insert(o.test_id.clone()),
        };
        p.outcomes.insert(o.test_id.clone(), o);
    }
    p
}

/// A mutant is killed by a test when its verdict differs from the original
/// program's verdict on that test. Failure kinds are not compared.
pub fn kills(original: &TestOutcome, mutant: &TestOutcome) -> Result<bool, TestkitError> {
    if original.test_id != mutant.test_id {
        return Err(TestkitError::MismatchedTest(
            original.test_id.clone(),
            mutant.test_id.clone(),
        ));
    }
    Ok(original.verdict != mutant.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn outcome(id: &str, verdict: Verdict, failure: Option<FailureKind>) -> TestOutcome {
        TestOutcome {
            test_id: id.into(),
            verdict,
            failure,
            coverage: CoverageProfile::default(),
        }
    }

    #[test]
    fn json_round_trip_and_shapes() {
        let text = r#"{"tests":[
            {"id":"t1","call":{"fn":"f","args":[2]},"expect":3},
            {"id":"t2","call":{"fn":"g","args":[true, -4]},"expect":false},
            {"id":"t3","call":{"fn":"f","args":[0]},"expect_error":true}
        ]}"#;
        let suite = TestSuite::from_json(text).unwrap();
        assert_eq!(suite.len(), 3);
        assert_eq!(suite.tests()[0].expect, Expectation::Value(Value::Int(3)));
        assert_eq!(suite.tests()[1].call.args, vec![Value::Bool(true), Value::Int(-4)]);
        assert_eq!(suite.tests()[2].expect, Expectation::Error);
        let again = TestSuite::from_json(&suite.to_json()).unwrap();
        assert_eq!(suite, again);
    }

    #[test]
    fn rejects_duplicates_and_missing_expectation() {
        let dup = r#"{"tests":[{"id":"a","call":{"fn":"f","args":[]},"expect":1},
                               {"id":"a","call":{"fn":"f","args":[]},"expect":1}]}"#;
        assert!(matches!(TestSuite::from_json(dup), Err(TestkitError::DuplicateId(_))));
        let missing = r#"{"tests":[{"id":"a","call":{"fn":"f","args":[]}}]}"#;
        assert!(matches!(
            TestSuite::from_json(missing),
            Err(TestkitError::MissingExpectation(_))
        ));
    }

    #[test]
    fn kills_compares_verdicts_only() {
        let fail = outcome("t", Verdict::Fail, Some(FailureKind::WrongValue));
        let pass = outcome("t", Verdict::Pass, None);
        let fail_budget = outcome("t", Verdict::Fail, Some(FailureKind::BudgetExhausted));
        assert!(kills(&fail, &pass).unwrap());
        assert!(kills(&pass, &fail).unwrap());
        assert!(!kills(&pass, &pass).unwrap());
        assert!(!kills(&fail, &fail_budget).unwrap());
        let other = outcome("u", Verdict::Pass, None);
        assert!(matches!(kills(&fail, &other), Err(TestkitError::MismatchedTest(..))));
    }

    fn suite(cases: &[(&str, i64, Expectation)]) -> TestSuite {
        TestSuite::new(
            cases
                .iter()
                .map(|(id, arg, e)| TestCase {
                    id: (*id).into(),
                    call: CallSpec {
                        func: "f".into(),
                        args: vec![Value::Int(*arg)],
                    },
                    expect: e.clone(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn partition_correct_program() {
        let p = parse("fn f(x: int) -> int { return x + 1; }").unwrap();
        let s = suite(&[
            ("t1", 1, Expectation::Value(Value::Int(2))),
            ("t2", 2, Expectation::Value(Value::Int(3))),
            ("t3", 3, Expectation::Value(Value::Int(4))),
        ]);
        let part = partition(&p, &s, Limits::default());
        assert_eq!((part.passing.len(), part.failing.len()), (3, 0));
        assert!(matches!(part.require_failing(), Err(TestkitError::EmptyFailingSet)));
        assert_eq!(part.outcomes.len(), 3);
    }

    #[test]
    fn partition_always_erroring_program() {
        let p = parse("fn f(x: int) -> int { return x / 0; }").unwrap();
        let s = suite(&[
            ("t1", 1, Expectation::Value(Value::Int(2))),
            ("t2", 2, Expectation::Value(Value::Int(3))),
        ]);
        let part = partition(&p, &s, Limits::default());
        assert_eq!(part.failing.len(), 2);
        assert!(part
            .outcomes
            .values()
            .all(|o| o.failure == Some(FailureKind::RuntimeError)));
    }

    #[test]
    fn must_error_tests() {
        let p = parse("fn f(x: int) -> int { assert(x > 0); return x; }").unwrap();
        let s = suite(&[("t1", 0, Expectation::Error), ("t2", 5, Expectation::Error)]);
        let part = partition(&p, &s, Limits::default());
        assert!(part.passing.contains(&"t1".into()));
        assert_eq!(
            part.outcomes[&TestId::from("t2")].failure,
            Some(FailureKind::WrongValue)
        );
    }

    #[test]
    fn repartition_is_idempotent() {
        let p = parse("fn f(x: int) -> int { if (x > 2) { return 0; } return x; }").unwrap();
        let s = suite(&[
            ("a", 1, Expectation::Value(Value::Int(1))),
            ("b", 3, Expectation::Value(Value::Int(3))),
        ]);
        let one = partition(&p, &s, Limits::default());
        let two = partition(&p, &s, Limits::default());
        assert_eq!(one.passing, two.passing);
        assert_eq!(one.failing, two.failing);
        for (id, o) in &one.outcomes {
            assert_eq!(o.coverage, two.outcomes[id].coverage);
        }
    }
}
