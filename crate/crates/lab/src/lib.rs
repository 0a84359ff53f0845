//! Scenario-driven front end to `arrival-core`: JSON scenarios in, CSV and JSON results
//! plus a reproducibility manifest out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod output;
pub mod run;
pub mod scenario;
pub mod validate;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub use error::LabError;
use output::{sha256_hex, write_artifacts, Artifact, OutputRecord};
use scenario::Scenario;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub integrator_tol: f64,
    pub integrator_max_steps: usize,
    pub crossing_time_tol: f64,
    pub density_floor: f64,
    pub fd_step: f64,
    pub povm_tol: f64,
    pub overlap_threshold: f64,
}

/// Run metadata written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub scenario_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub tolerances: Tolerances,
    pub outputs: Vec<OutputRecord>,
}

/// Options of a single run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed_override: Option<u64>,
    /// Worker threads; hardware parallelism when absent.
    pub threads: Option<usize>,
    /// Refuse to run when validation reports a violation.
    pub validate_first: bool,
}

/// Parses, runs and writes one scenario file.
pub fn run_scenario(path: &Path, out_dir: &Path, opts: RunOptions) -> Result<Manifest, LabError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| LabError::Schema(format!("scenario is not UTF-8: {e}")))?;
    let mut scenario = scenario::parse(&text)?;
    if let Some(seed) = opts.seed_override {
        scenario.seed = seed;
    }
    if opts.validate_first {
        let report = validate::validate(&scenario);
        if let Some(v) = report.violations.first() {
            return Err(LabError::precondition("validate", v.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| LabError::precondition("--threads", e.to_string()))?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let artifacts: Vec<Artifact> = pool.install(|| run::execute(&scenario))?;
    let wall_time_s = clock.elapsed().as_secs_f64();
    let outputs = write_artifacts(out_dir, &artifacts)?;
    let manifest = Manifest {
        schema_version: scenario.schema_version,
        command: scenario.task.name().to_owned(),
        scenario_sha256: sha256_hex(&bytes),
        seed: scenario.seed,
        threads: pool.current_num_threads(),
        started_unix_s: started,
        wall_time_s,
        tolerances: tolerances(&scenario),
        outputs,
    };
    write_artifacts(out_dir, &[Artifact::json(MANIFEST_FILE, &manifest)])?;
    Ok(manifest)
}

fn tolerances(s: &Scenario) -> Tolerances {
    Tolerances {
        integrator_tol: s.integrator.tol,
        integrator_max_steps: s.integrator.max_steps,
        crossing_time_tol: arrival_core::guidance::CROSSING_TIME_TOL,
        density_floor: arrival_core::DENSITY_FLOOR,
        fd_step: arrival_core::FD_STEP,
        povm_tol: arrival_core::povm::POVM_TOL,
        overlap_threshold: arrival_core::arrivals::OVERLAP_THRESHOLD,
    }
}
