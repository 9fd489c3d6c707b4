//! Configuration-driven verification runs.
//!
//! A campaign is an INI file. The optional `[campaign]` section sets
//! `output` (directory, relative to the config file), `seed` and `timing`.
//! Every other section is a case whose `kind` selects the computation; see
//! [`config::Case::parse`] for the keys each kind accepts. Each case writes
//! `<id>.csv`, and the run writes `summary.json` listing every claim.

pub mod cases;
pub mod config;

pub use cases::judge_schedule;
pub use config::{Campaign, Case, CaseKind, CaseSpec, Params, Schedule};

use crate::{Error, Result, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "case_id,M,params,measured_re,measured_im,predicted_re,predicted_im,abs_error,elapsed_ms";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub cutoff: usize,
    pub params: Vec<(String, f64)>,
    pub measured: C64,
    pub predicted: C64,
    pub abs_error: f64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub claim: String,
    pub passed: bool,
    /// Distance to the pass/fail boundary; negative when failing.
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case_id: String,
    pub kind: CaseKind,
    #[serde(skip)]
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

/// Runs one case. Computation errors become a failed outcome rather than an `Err`.
pub fn run_case(case: &Case, seed: u64, timing: bool) -> CaseOutcome {
    let case_seed = seed ^ fnv1a(case.id.as_bytes());
    match cases::run(case, case_seed, timing) {
        Ok(out) => CaseOutcome { case_id: case.id.clone(), kind: case.kind, rows: out.rows, checks: out.checks, error: None },
        Err(e) => CaseOutcome { case_id: case.id.clone(), kind: case.kind, rows: Vec::new(), checks: Vec::new(), error: Some(e.to_string()) },
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn format_csv(case_id: &str, rows: &[Row]) -> String {
    let mut s = format!("# schema_version={SCHEMA_VERSION}\n{CSV_HEADER}\n");
    for r in rows {
        let params = r.params.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            s,
            "{case_id},{},{params},{},{},{},{},{},{}",
            r.cutoff,
            num(r.measured.re),
            num(r.measured.im),
            num(r.predicted.re),
            num(r.predicted.im),
            num(r.abs_error),
            num(r.elapsed_ms)
        );
    }
    s
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(format!("{}: {e}", path.display()));
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("out")));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimStatus {
    pub id: String,
    pub status: &'static str,
    pub margin: f64,
    pub checks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub seed: u64,
    pub passed: bool,
    pub claims: Vec<ClaimStatus>,
    pub cases: Vec<CaseOutcome>,
}

impl Summary {
    pub fn new(seed: u64, outcomes: Vec<CaseOutcome>) -> Self {
        let mut claims: BTreeMap<String, (bool, f64, usize)> = BTreeMap::new();
        for c in outcomes.iter().flat_map(|o| &o.checks) {
            let e = claims.entry(c.claim.clone()).or_insert((true, f64::INFINITY, 0));
            e.0 &= c.passed;
            e.1 = e.1.min(c.margin);
            e.2 += 1;
        }
        let claims = claims
            .into_iter()
            .map(|(id, (ok, margin, checks))| ClaimStatus { id, status: if ok { "pass" } else { "fail" }, margin, checks })
            .collect();
        let passed = outcomes.iter().all(CaseOutcome::passed);
        Summary { schema_version: SCHEMA_VERSION, seed, passed, claims, cases: outcomes }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Worker count from an explicit flag, else `ANYON_JOBS`, else rayon's default (0).
pub fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    if let Some(j) = flag {
        return Ok(j);
    }
    match std::env::var("ANYON_JOBS") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("ANYON_JOBS = '{v}' is not a worker count"))),
        Err(_) => Ok(0),
    }
}

/// Runs every case on a pool of `jobs` workers and writes the CSVs and `summary.json`.
pub fn run_campaign(campaign: &Campaign, jobs: usize) -> Result<Summary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<CaseOutcome> = pool.install(|| {
        campaign
            .cases
            .par_iter()
            .map(|case| {
                log::info!("case {} ({})", case.id, case.kind.name());
                let outcome = run_case(case, campaign.seed, campaign.timing);
                let csv = format_csv(&case.id, &outcome.rows);
                write_atomic(&campaign.output.join(format!("{}.csv", case.id)), &csv).map(|_| outcome)
            })
            .collect::<Result<_>>()
    })?;
    let summary = Summary::new(campaign.seed, outcomes);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Invalid(e.to_string()))?;
    write_atomic(&campaign.output.join("summary.json"), &(json + "\n"))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quick_config(out: &Path) -> String {
        format!(
            "[campaign]\noutput = {}\nseed = 3\n\n[w]\nkind = winding\npairs = 200\n\n[b]\nkind = blip\ncutoffs = 8,16\n\n[c]\nkind = commutation\nspin = 0.5\nomega1 = 2.3\nwindings = 0,1\ncutoffs = 2,3\n",
            out.display()
        )
    }

    #[test]
    fn campaign_writes_reproducible_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let campaign = Campaign::parse(&quick_config(&out), dir.path()).unwrap();
        let s1 = run_campaign(&campaign, 2).unwrap();
        assert!(s1.passed, "{s1:#?}");
        assert_eq!(s1.exit_code(), 0);
        let first = std::fs::read(out.join("c.csv")).unwrap();
        let summary1 = std::fs::read(out.join("summary.json")).unwrap();
        run_campaign(&campaign, 1).unwrap();
        assert_eq!(first, std::fs::read(out.join("c.csv")).unwrap());
        assert_eq!(summary1, std::fs::read(out.join("summary.json")).unwrap());
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with("# schema_version=1\ncase_id,M,params,"));
        let json: serde_json::Value = serde_json::from_slice(&summary1).unwrap();
        assert_eq!(json["schema_version"], 1);
        let ids: Vec<&str> = json["claims"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
        for id in ["winding-algebra", "blip-fourier", "exchange-phase", "two-pi-shift"] {
            assert!(ids.contains(&id), "{ids:?}");
        }
    }

    #[test]
    fn failures_are_reported() {
        let case = Case::parse(
            "bad",
            CaseKind::Commutation,
            Params::new("bad", [("spin".to_string(), "0.25".to_string()), ("omega1".to_string(), "0.1".to_string())]),
        )
        .unwrap();
        // overlapping intervals
        let o = run_case(&case, 0, false);
        assert!(!o.passed());
        assert!(o.error.unwrap().contains("overlap"));
        let s = Summary::new(0, vec![run_case(&case, 0, false)]);
        assert_eq!(s.exit_code(), 1);
    }

    #[test]
    fn jobs_resolution() {
        assert_eq!(resolve_jobs(Some(3)).unwrap(), 3);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![Row {
            cutoff: 4,
            params: vec![("spin".into(), 0.25), ("N".into(), -1.0)],
            measured: C64::new(0.5, -0.25),
            predicted: C64::new(1.0, 0.0),
            abs_error: 0.125,
            elapsed_ms: 0.0,
        }];
        let csv = format_csv("x", &rows);
        let line = csv.lines().nth(2).unwrap();
        assert_eq!(line, "x,4,spin=2.5e-1;N=-1e0,5e-1,-2.5e-1,1e0,0e0,1.25e-1,0e0");
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn schedule_judgement() {
        let s = Schedule::default();
        assert!(judge_schedule(&[4, 6, 8], &[1e-2, 1e-3, 1e-4], &s).0);
        assert!(!judge_schedule(&[4, 6, 8], &[1e-2, 1e-3, 2e-3], &s).0);
        assert!(!judge_schedule(&[4, 6], &[1e-2, 5e-3], &s).0);
        assert!(judge_schedule(&[4, 6, 8], &[1e-13, 1e-15, 1e-14], &s).0);
        assert!(!judge_schedule(&[], &[], &s).0);
    }

    proptest! {
        #[test]
        fn decreasing_geometric_sequences_pass(e0 in 1e-8..1.0f64, r in 0.01..0.3f64, n in 2usize..6) {
            let errors: Vec<f64> = (0..n).map(|k| e0 * r.powi(k as i32)).collect();
            let cutoffs: Vec<usize> = (0..n).map(|k| 4 + 2 * k).collect();
            let schedule = Schedule { factor: r, floor: 0.0 };
            prop_assert!(judge_schedule(&cutoffs, &errors, &schedule).0);
        }
    }
}
