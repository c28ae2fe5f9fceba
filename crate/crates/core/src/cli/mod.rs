//! Command-line front end: `repair` for one program, `bench` for a corpus.

pub mod bench;
pub mod corpus;
pub mod oracle;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::engine::{repair, EngineConfig, EngineError, Mode, RepairOptions};
use crate::fixgen::candidates_to_diffs;
use crate::lang::parse;
use crate::snapshot::snapshots_to_json;
use crate::testkit::TestSuite;

use self::bench::run_bench;
use self::corpus::{default_corpus_dir, load_corpus};
use self::oracle::CorrectnessOracle;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Parser, Debug)]
#[command(
    name = "retrofix",
    version,
    about = "Program repair with retrospective fault localization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Repair one function of a MiniLang program.
    Repair(RepairArgs),
    /// Run every corpus bug in both modes and summarize.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Basic,
    Retro,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Basic => Mode::Basic,
            ModeArg::Retro => Mode::Retro,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Tuning {
    /// Snapshot budget N_S.
    #[arg(long, default_value_t = 1500)]
    pub ns: usize,
    /// Batch fraction N_P.
    #[arg(long, default_value_t = 0.10)]
    pub np: f64,
    /// Extra iterations N_I after the first positive mutation score.
    #[arg(long, default_value_t = 0)]
    pub ni: usize,
    /// Locations N_L kept for final generation.
    #[arg(long, default_value_t = 5)]
    pub nl: usize,
    /// Keep final generation to the faulty function's own expressions.
    #[arg(long)]
    pub no_extended: bool,
    /// Wall-clock cap per session, in milliseconds.
    #[arg(long, default_value_t = 300_000)]
    pub budget_ms: u64,
}

impl Tuning {
    pub fn config(&self, mode: Mode) -> EngineConfig {
        EngineConfig {
            mode,
            n_s: self.ns,
            n_p: self.np,
            n_i: self.ni,
            n_l: self.nl,
            extended: mode == Mode::Retro && !self.no_extended,
            budget_ms: self.budget_ms,
            ..EngineConfig::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct RepairArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long)]
    pub tests: PathBuf,
    /// Name of the faulty function.
    #[arg(long)]
    pub fixme: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Retro)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the enumerated snapshots as JSON.
    #[arg(long)]
    pub dump_snapshots: Option<PathBuf>,
    /// Write every generated candidate as a unified diff.
    #[arg(long)]
    pub dump_candidates: Option<PathBuf>,
    /// Reference program, to label fixes correct (with --hidden).
    #[arg(long, requires = "hidden")]
    pub reference: Option<PathBuf>,
    /// Hidden tests for the correctness oracle.
    #[arg(long, requires = "reference")]
    pub hidden: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Corpus directory; defaults to $RETROFIX_CORPUS or the bundled corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Modes to run.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Retro, ModeArg::Basic])]
    pub modes: Vec<ModeArg>,
    /// Only these bug ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub bugs: Vec<String>,
    #[command(flatten)]
    pub tuning: Tuning,
    /// JSON summary file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table file; printed to standard output when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))
}

/// Exit code 0 with at least one valid fix, 2 with none.
pub fn cmd_repair(args: &RepairArgs) -> Result<i32, CliError> {
    let program =
        parse(&read(&args.program)?).map_err(|e| CliError::Input(format!("{}: {e}", args.program.display())))?;
    let suite = TestSuite::from_json(&read(&args.tests)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.tests.display())))?;
    let oracle = match (&args.reference, &args.hidden) {
        (Some(r), Some(h)) => {
            let reference = parse(&read(r)?).map_err(|e| CliError::Input(format!("{}: {e}", r.display())))?;
            let hidden =
                TestSuite::from_json(&read(h)?).map_err(|e| CliError::Input(format!("{}: {e}", h.display())))?;
            Some(
                CorrectnessOracle::new(&program, &reference, &args.fixme, hidden)
                    .ok_or_else(|| CliError::Input(format!("`{}` missing from the reference", args.fixme)))?,
            )
        }
        _ => None,
    };
    let config = args.tuning.config(args.mode.into());
    let opts = RepairOptions {
        judge: oracle.as_ref().map(|o| o as &dyn crate::engine::CorrectnessJudge),
        keep_candidates: args.dump_candidates.is_some(),
    };
    let out = repair(&program, &args.fixme, &suite, &config, &opts)?;
    let json = out.report.to_json();
    match &args.out {
        Some(p) => write(p, &json)?,
        None => println!("{json}"),
    }
    if let Some(p) = &args.dump_snapshots {
        write(p, &snapshots_to_json(&out.snapshots))?;
    }
    if let Some(p) = &args.dump_candidates {
        write(p, &candidates_to_diffs(&program, &out.candidates))?;
    }
    eprintln!(
        "{} valid fix(es); {} validations; first valid after {}",
        out.report.measures.valid,
        out.report.measures.checked,
        out.report.measures.c2v.map_or("-".to_string(), |c| c.to_string())
    );
    Ok(if out.report.measures.valid > 0 { 0 } else { 2 })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32, CliError> {
    let dir = args.corpus.clone().unwrap_or_else(default_corpus_dir);
    let mut bugs = load_corpus(&dir)?;
    if !args.bugs.is_empty() {
        bugs.retain(|b| args.bugs.iter().any(|id| id == b.id()));
    }
    if bugs.is_empty() {
        return Err(CliError::Input(format!("no bugs found in {}", dir.display())));
    }
    let modes: Vec<Mode> = args.modes.iter().map(|&m| m.into()).collect();
    let report = run_bench(&bugs, &modes, &args.tuning.config(Mode::Retro));
    let csv = report.to_csv();
    match &args.csv {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &args.out {
        write(p, &report.to_json())?;
    }
    Ok(if report.rows.iter().any(|r| r.status != "ok") {
        1
    } else {
        0
    })
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Repair(a) => cmd_repair(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROGRAM: &str = "fn cap(a: int, b: int) -> int {
    var s: int;
    s = a + b;
    if (s > 11) {
        s = 10;
    }
    return s;
}
";

    const TESTS: &str = r#"{"tests":[
        {"id":"t1","call":{"fn":"cap","args":[1,2]},"expect":3},
        {"id":"t2","call":{"fn":"cap","args":[5,6]},"expect":10},
        {"id":"t3","call":{"fn":"cap","args":[9,9]},"expect":10},
        {"id":"t4","call":{"fn":"cap","args":[4,5]},"expect":9},
        {"id":"t5","call":{"fn":"cap","args":[0,10]},"expect":10}
    ]}"#;

    fn files(program: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
        files_with(program, TESTS)
    }

    fn files_with(program: &str, tests: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.mini");
        let t = dir.path().join("t.json");
        fs::write(&p, program).unwrap();
        fs::write(&t, tests).unwrap();
        (dir, p, t)
    }

    #[test]
    fn tuning_flags_reach_the_config() {
        let cli = Cli::try_parse_from([
            "retrofix",
            "repair",
            "--program",
            "p",
            "--tests",
            "t",
            "--fixme",
            "f",
            "--mode",
            "basic",
            "--ns",
            "40",
            "--np",
            "0.5",
            "--ni",
            "2",
            "--nl",
            "3",
            "--budget-ms",
            "900",
        ])
        .unwrap();
        let Command::Repair(a) = cli.command else {
            panic!("repair expected")
        };
        let c = a.tuning.config(a.mode.into());
        assert_eq!(
            (c.mode, c.n_s, c.n_p, c.n_i, c.n_l, c.budget_ms),
            (Mode::Basic, 40, 0.5, 2, 3, 900)
        );
        assert!(!c.extended);
        let t = Tuning {
            no_extended: true,
            ..a.tuning.clone()
        };
        assert!(!t.config(Mode::Retro).extended);
        assert!(a.tuning.config(Mode::Retro).extended);
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["retrofix", "repair", "--program", "p", "--tests", "t"]), 1);
        assert_eq!(run(["retrofix", "frobnicate"]), 1);
        assert_eq!(run(["retrofix", "--help"]), 0);
    }

    #[test]
    fn repair_writes_report_and_dumps() {
        let (dir, p, t) = files(PROGRAM);
        let out = dir.path().join("r.json");
        let snaps = dir.path().join("s.json");
        let cands = dir.path().join("c.diff");
        let code = run([
            "retrofix".into(),
            "repair".into(),
            OsString::from("--program"),
            p.into(),
            "--tests".into(),
            t.into(),
            "--fixme".into(),
            "cap".into(),
            "--out".into(),
            out.clone().into(),
            "--dump-snapshots".into(),
            snaps.clone().into(),
            "--dump-candidates".into(),
            cands.clone().into(),
        ]);
        assert_eq!(code, 0);
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
        assert_eq!(report["schema"], 1);
        assert!(report["measures"]["valid"].as_u64().unwrap() > 0);
        let snaps: serde_json::Value = serde_json::from_str(&fs::read_to_string(snaps).unwrap()).unwrap();
        assert!(!snaps.as_array().unwrap().is_empty());
        assert!(fs::read_to_string(cands).unwrap().contains("+++ candidate-"));
    }

    #[test]
    fn repair_exit_codes() {
        // nothing fails: engine error
        let (_d, p, t) = files(&PROGRAM.replace("11", "10"));
        let args = |f: &str| {
            vec![
                OsString::from("retrofix"),
                "repair".into(),
                "--program".into(),
                p.clone().into(),
                "--tests".into(),
                t.clone().into(),
                "--fixme".into(),
                f.into(),
            ]
        };
        assert_eq!(run(args("cap")), 1);
        assert_eq!(run(args("missing")), 1);
        // contradictory expectations: no patch passes both
        let tests = r#"{"tests":[
            {"id":"t1","call":{"fn":"cap","args":[1,2]},"expect":3},
            {"id":"t2","call":{"fn":"cap","args":[1,2]},"expect":4}
        ]}"#;
        let (_d, p, t) = files_with(PROGRAM, tests);
        let code = run([
            OsString::from("retrofix"),
            "repair".into(),
            "--program".into(),
            p.into(),
            "--tests".into(),
            t.into(),
            "--fixme".into(),
            "cap".into(),
            "--out".into(),
            _d.path().join("r.json").into(),
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn bench_on_an_empty_corpus_fails() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(
            run([
                OsString::from("retrofix"),
                "bench".into(),
                "--corpus".into(),
                dir.path().into()
            ]),
            1
        );
    }
}
