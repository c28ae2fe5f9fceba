//! Seeded-bug corpus: one directory per bug holding the faulty program, its
//! visible tests, the reference fix, hidden tests and a manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::relevant_partition;
use crate::fixgen::{generate_for, Caps, ExpressionPool};
use crate::lang::{parse, Limits, Program};
use crate::sbfl::{basic_scores, default_n_b, select_tests};
use crate::snapshot::{enumerate_snapshots, observe, Snapshot, DEFAULT_E_MAX};
use crate::testkit::{partition, TestCase, TestSuite};

use super::oracle::CorrectnessOracle;
use super::CliError;

/// `manifest.json` of a bug.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub fixme: String,
    pub kind: String,
    pub description: String,
    /// Frozen values checked by the test suite.
    #[serde(default)]
    pub golden: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug)]
pub struct BugEntry {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub program: Program,
    pub tests: TestSuite,
    pub reference: Program,
    pub hidden: TestSuite,
}

impl BugEntry {
    pub fn id(&self) -> &str {
        &self.manifest.id
    }

    pub fn fixme(&self) -> &str {
        &self.manifest.fixme
    }

    pub fn load(dir: &Path) -> Result<BugEntry, CliError> {
        let read = |name: &str| -> Result<String, CliError> {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| CliError::Io(p.display().to_string(), e.to_string()))
        };
        let manifest: Manifest = serde_json::from_str(&read("manifest.json")?)
            .map_err(|e| CliError::Input(format!("{}/manifest.json: {e}", dir.display())))?;
        let program = parse(&read("program.mini")?)
            .map_err(|e| CliError::Input(format!("{}/program.mini: {e}", dir.display())))?;
        let reference = parse(&read("reference.mini")?)
            .map_err(|e| CliError::Input(format!("{}/reference.mini: {e}", dir.display())))?;
        let tests = TestSuite::from_json(&read("tests.json")?)
            .map_err(|e| CliError::Input(format!("{}/tests.json: {e}", dir.display())))?;
        let hidden = TestSuite::from_json(&read("hidden.json")?)
            .map_err(|e| CliError::Input(format!("{}/hidden.json: {e}", dir.display())))?;
        Ok(BugEntry {
            dir: dir.to_path_buf(),
            manifest,
            program,
            tests,
            reference,
            hidden,
        })
    }

    /// Writes the manifest back, pretty-printed with a trailing newline.
    pub fn write_manifest(&self) -> Result<(), CliError> {
        let p = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        fs::write(&p, text).map_err(|e| CliError::Io(p.display().to_string(), e.to_string()))
    }

    /// Mode-independent facts under default parameters: sizes, the
    /// bootstrap set T_B, and the number of candidates built from the ten
    /// snapshots ranked first over T_B.
    pub fn static_facts(&self) -> BTreeMap<String, Value> {
        let limits = Limits::default();
        let func = self.program.function_index(self.fixme()).expect("fixme exists");
        let whole = partition(&self.program, &self.tests, limits);
        let (suite, part, _) = relevant_partition(&self.program, func, &self.tests, limits);
        let pool = ExpressionPool::base(&self.program, self.fixme()).expect("fixme exists");
        let snapshots = enumerate_snapshots(&self.program, self.fixme(), &pool, DEFAULT_E_MAX);
        let t_b = select_tests(
            |t| &part.outcomes[t].coverage,
            func,
            &part.passing,
            &part.failing,
            default_n_b(part.failing.len()),
        );
        let cases: Vec<&TestCase> = suite.tests().iter().filter(|t| t_b.contains(&t.id)).collect();
        let matrix = observe(&self.program, &cases, &snapshots, limits);
        let top: Vec<&Snapshot> = basic_scores(&matrix, &snapshots, &part.failing)
            .iter()
            .take(10)
            .map(|s| &snapshots[s.snapshot])
            .collect();
        let top10 = generate_for(&self.program, self.fixme(), &top, &pool, Caps::default()).len();
        BTreeMap::from([
            ("functions".to_string(), json!(self.program.functions().len())),
            ("visible_failing".to_string(), json!(whole.failing.len())),
            ("visible_passing".to_string(), json!(whole.passing.len())),
            ("relevant_tests".to_string(), json!(suite.len())),
            ("hidden_tests".to_string(), json!(self.hidden.len())),
            ("snapshots".to_string(), json!(snapshots.len())),
            (
                "bootstrap".to_string(),
                json!(t_b.iter().map(|t| t.0.clone()).collect::<Vec<_>>()),
            ),
            ("top10_candidates".to_string(), json!(top10)),
        ])
    }

    pub fn oracle(&self) -> CorrectnessOracle {
        CorrectnessOracle::new(&self.program, &self.reference, self.fixme(), self.hidden.clone())
            .expect("manifest names a function present in both programs")
    }

    /// Checks the corpus invariants: the reference passes every visible
    /// and hidden test, the original fails at least one visible test.
    pub fn verify(&self) -> Result<(), String> {
        let limits = Limits::default();
        let orig = partition(&self.program, &self.tests, limits);
        if orig.failing.is_empty() {
            return Err(format!("{}: original program passes every test", self.id()));
        }
        for (name, suite) in [("tests", &self.tests), ("hidden", &self.hidden)] {
            let r = partition(&self.reference, suite, limits);
            if let Some(t) = r.failing.iter().next() {
                return Err(format!("{}: reference fails {name} test {t}", self.id()));
            }
        }
        Ok(())
    }
}

/// Default corpus location: `$RETROFIX_CORPUS`, else the corpus bundled
/// with this crate.
pub fn default_corpus_dir() -> PathBuf {
    match std::env::var_os("RETROFIX_CORPUS") {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus")),
    }
}

/// All bug directories (those holding a `manifest.json`), sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<BugEntry>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(dir.display().to_string(), e.to_string()))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join("manifest.json").is_file())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| BugEntry::load(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled() -> PathBuf {
        PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
    }

    #[test]
    fn bundled_corpus_has_twelve_sorted_bugs() {
        let bugs = load_corpus(&bundled()).unwrap();
        let ids: Vec<&str> = bugs.iter().map(|b| b.id()).collect();
        assert_eq!(ids.len(), 12);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
        assert!(ids.contains(&"bug13"));
        for b in &bugs {
            assert_eq!(b.dir.file_name().unwrap().to_str(), Some(b.id()));
            assert!(b.program.function(b.fixme()).is_some());
        }
    }

    #[test]
    fn manifest_round_trips_through_disk() {
        let src = BugEntry::load(&bundled().join("bug06")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let copy = dir.path().join("bug06");
        fs::create_dir(&copy).unwrap();
        for f in [
            "manifest.json",
            "program.mini",
            "reference.mini",
            "tests.json",
            "hidden.json",
        ] {
            fs::copy(src.dir.join(f), copy.join(f)).unwrap();
        }
        let mut b = BugEntry::load(&copy).unwrap();
        b.manifest.golden.insert("extra".into(), json!(1));
        b.write_manifest().unwrap();
        let again = BugEntry::load(&copy).unwrap();
        assert_eq!(again.manifest, b.manifest);
        assert!(fs::read_to_string(copy.join("manifest.json")).unwrap().ends_with("}\n"));
    }

    #[test]
    fn verify_catches_a_passing_original() {
        let mut b = BugEntry::load(&bundled().join("bug06")).unwrap();
        assert!(b.verify().is_ok());
        b.program = b.reference.clone();
        assert!(b.verify().unwrap_err().contains("passes every test"));
    }

    #[test]
    fn missing_files_and_dirs_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_corpus(dir.path()).unwrap().is_empty());
        assert!(load_corpus(&dir.path().join("nope")).is_err());
        fs::write(dir.path().join("manifest.json"), "{}").unwrap();
        assert!(BugEntry::load(dir.path()).is_err());
    }
}
