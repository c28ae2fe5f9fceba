//! Corpus-wide benchmark: every bug in every requested mode, one row each,
//! plus a retro-versus-basic summary.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{repair, EngineConfig, Mode, RepairOptions, RepairReport};

use super::corpus::BugEntry;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTiming {
    pub t_us: u64,
    pub t2v_us: Option<u64>,
    pub t2c_us: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub bug: String,
    pub mode: Mode,
    /// `ok` or `error`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub valid: usize,
    pub first_correct_rank: Option<usize>,
    pub c2v: Option<u64>,
    pub c2c: Option<u64>,
    pub checked: u64,
    pub iterations: usize,
    /// Iteration at which some location first got a positive su_M.
    #[serde(default)]
    pub first_positive_iteration: Option<usize>,
    pub sharpening: usize,
    pub plausible: usize,
    pub first_iteration_sharpening: usize,
    pub first_iteration_plausible: usize,
    pub fallback: bool,
    pub truncated: bool,
    pub candidates: usize,
    pub timing: RowTiming,
}

impl BenchRow {
    fn from_report(bug: &str, r: &RepairReport) -> Self {
        let t = &r.telemetry;
        BenchRow {
            bug: bug.to_string(),
            mode: r.config.mode,
            status: "ok".into(),
            error: None,
            valid: r.measures.valid,
            first_correct_rank: r.measures.first_correct_rank,
            c2v: r.measures.c2v,
            c2c: r.measures.c2c,
            checked: r.measures.checked,
            iterations: t.iterations,
            first_positive_iteration: t.first_positive_iteration,
            sharpening: t.sharpening,
            plausible: t.plausible,
            first_iteration_sharpening: t.first_iteration_sharpening,
            first_iteration_plausible: t.first_iteration_plausible,
            fallback: t.fallback,
            truncated: t.truncated,
            candidates: t.candidates_generated,
            timing: RowTiming {
                t_us: r.timing.total_us,
                t2v_us: r.timing.t2v_us,
                t2c_us: r.timing.t2c_us,
            },
        }
    }

    fn failed(bug: &str, mode: Mode, msg: String) -> Self {
        BenchRow {
            bug: bug.to_string(),
            mode,
            status: "error".into(),
            error: Some(msg),
            valid: 0,
            first_correct_rank: None,
            c2v: None,
            c2c: None,
            checked: 0,
            iterations: 0,
            first_positive_iteration: None,
            sharpening: 0,
            plausible: 0,
            first_iteration_sharpening: 0,
            first_iteration_plausible: 0,
            fallback: false,
            truncated: false,
            candidates: 0,
            timing: RowTiming::default(),
        }
    }

    pub fn solved(&self) -> bool {
        self.first_correct_rank.is_some()
    }

    /// Deterministic outcome counts, keyed `<mode>_<measure>`, as frozen in
    /// corpus manifests.
    pub fn facts(&self) -> BTreeMap<String, serde_json::Value> {
        let m = match self.mode {
            Mode::Retro => "retro",
            Mode::Basic => "basic",
        };
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: serde_json::Value| {
            out.insert(format!("{m}_{k}"), v);
        };
        put("valid", self.valid.into());
        put("rank", self.first_correct_rank.into());
        put("c2v", self.c2v.into());
        put("checked", self.checked.into());
        if self.mode == Mode::Retro {
            put("iterations", self.iterations.into());
            put("sharpening", self.sharpening.into());
            put("plausible", self.plausible.into());
            put("first_iteration_sharpening", self.first_iteration_sharpening.into());
            put("first_iteration_plausible", self.first_iteration_plausible.into());
        }
        out
    }
}

/// Σretro / Σbasic over the bugs where both modes define the measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relative {
    pub bugs: Vec<String>,
    pub retro_sum: u64,
    pub basic_sum: u64,
    pub ratio: Option<f64>,
    /// Mean of retro − basic.
    pub mean_difference: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub retro_solved: usize,
    pub basic_solved: usize,
    pub retro_with_valid: usize,
    pub basic_with_valid: usize,
    pub relative: BTreeMap<String, Relative>,
    pub timing: BTreeMap<String, Relative>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub rows: Vec<BenchRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footer: Option<Footer>,
}

/// Runs `bugs` in each of `modes`. `base` supplies the parameters; the mode
/// is set per run and basic mode never uses the extended pool.
pub fn run_bench(bugs: &[BugEntry], modes: &[Mode], base: &EngineConfig) -> BenchReport {
    let mut rows = Vec::new();
    for bug in bugs {
        let oracle = bug.oracle();
        for &mode in modes {
            let mut cfg = base.clone();
            cfg.mode = mode;
            if mode == Mode::Basic {
                cfg.extended = false;
            }
            let opts = RepairOptions {
                judge: Some(&oracle),
                keep_candidates: false,
            };
            let row = match repair(&bug.program, bug.fixme(), &bug.tests, &cfg, &opts) {
                Ok(out) => BenchRow::from_report(bug.id(), &out.report),
                Err(e) => BenchRow::failed(bug.id(), mode, e.to_string()),
            };
            rows.push(row);
        }
    }
    let footer = (modes.contains(&Mode::Retro) && modes.contains(&Mode::Basic)).then(|| footer(&rows));
    BenchReport {
        schema: 1,
        rows,
        footer,
    }
}

fn relative(rows: &[BenchRow], get: impl Fn(&BenchRow) -> Option<u64>) -> Relative {
    let mut by_bug: BTreeMap<&str, (Option<u64>, Option<u64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == "ok") {
        let e = by_bug.entry(&r.bug).or_default();
        match r.mode {
            Mode::Retro => e.0 = get(r),
            Mode::Basic => e.1 = get(r),
        }
    }
    let mut rel = Relative {
        bugs: Vec::new(),
        retro_sum: 0,
        basic_sum: 0,
        ratio: None,
        mean_difference: None,
    };
    let mut diff = 0.0;
    for (bug, pair) in by_bug {
        if let (Some(a), Some(b)) = pair {
            rel.bugs.push(bug.to_string());
            rel.retro_sum += a;
            rel.basic_sum += b;
            diff += a as f64 - b as f64;
        }
    }
    if !rel.bugs.is_empty() {
        rel.mean_difference = Some(diff / rel.bugs.len() as f64);
        if rel.basic_sum > 0 {
            rel.ratio = Some(rel.retro_sum as f64 / rel.basic_sum as f64);
        }
    }
    rel
}

fn footer(rows: &[BenchRow]) -> Footer {
    let count = |mode: Mode, f: &dyn Fn(&BenchRow) -> bool| rows.iter().filter(|r| r.mode == mode && f(r)).count();
    let mut relative_m = BTreeMap::new();
    relative_m.insert("valid".to_string(), relative(rows, |r| Some(r.valid as u64)));
    relative_m.insert(
        "c".to_string(),
        relative(rows, |r| r.first_correct_rank.map(|c| c as u64)),
    );
    relative_m.insert("c2v".to_string(), relative(rows, |r| r.c2v));
    relative_m.insert("c2c".to_string(), relative(rows, |r| r.c2c));
    relative_m.insert("checked".to_string(), relative(rows, |r| Some(r.checked)));
    let mut timing = BTreeMap::new();
    timing.insert("t".to_string(), relative(rows, |r| Some(r.timing.t_us)));
    timing.insert("t2v".to_string(), relative(rows, |r| r.timing.t2v_us));
    timing.insert("t2c".to_string(), relative(rows, |r| r.timing.t2c_us));
    Footer {
        retro_solved: count(Mode::Retro, &|r| r.solved()),
        basic_solved: count(Mode::Basic, &|r| r.solved()),
        retro_with_valid: count(Mode::Retro, &|r| r.valid > 0),
        basic_with_valid: count(Mode::Basic, &|r| r.valid > 0),
        relative: relative_m,
        timing,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench report serializes")
    }

    /// Comma-separated rows with a header; the summary follows as `#` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "bug,mode,status,valid,c,c2v,c2c,checked,iterations,sharpening,plausible,fallback,truncated,candidates,t_us,t2v_us,t2c_us\n",
        );
        for r in &self.rows {
            let mode = match r.mode {
                Mode::Retro => "retro",
                Mode::Basic => "basic",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.bug,
                mode,
                r.status,
                r.valid,
                opt(r.first_correct_rank),
                opt(r.c2v),
                opt(r.c2c),
                r.checked,
                r.iterations,
                r.sharpening,
                r.plausible,
                r.fallback,
                r.truncated,
                r.candidates,
                r.timing.t_us,
                opt(r.timing.t2v_us),
                opt(r.timing.t2c_us)
            );
        }
        if let Some(f) = &self.footer {
            let _ = writeln!(
                out,
                "# solved (correct fix): retro {} basic {}",
                f.retro_solved, f.basic_solved
            );
            let _ = writeln!(
                out,
                "# with a valid fix: retro {} basic {}",
                f.retro_with_valid, f.basic_with_valid
            );
            for (name, r) in f.relative.iter().chain(f.timing.iter()) {
                let _ = writeln!(
                    out,
                    "# {name}: sum retro {} / sum basic {} = {} over {} bugs; mean difference {}",
                    r.retro_sum,
                    r.basic_sum,
                    r.ratio.map_or("n/a".to_string(), |x| format!("{x:.4}")),
                    r.bugs.len(),
                    r.mean_difference.map_or("n/a".to_string(), |x| format!("{x:.2}")),
                );
            }
        }
        out
    }
}

/// Drops every `timing` object from a JSON value, recursively.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("timing");
            for x in m.values_mut() {
                strip_timing(x);
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
