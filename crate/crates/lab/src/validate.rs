//! Schema and precondition checks with a dry-run cost estimate.

use arrival_core::detectors::PmlDirection;
use serde::Serialize;

use crate::error::LabError;
use crate::scenario::*;

/// Trajectory counts above this draw a cost warning.
pub const COST_WARNING_TRAJECTORIES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cost {
    pub trajectories: u64,
    /// Accepted-step ceiling per trajectory.
    pub step_bound: usize,
    /// trajectories × step_bound.
    pub work_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub cost: Option<Cost>,
}

/// Validates scenario text without running it.
pub fn validate_text(text: &str) -> ValidationReport {
    match parse(text) {
        Ok(s) => validate(&s),
        Err(e) => ValidationReport { valid: false, violations: vec![e.to_string()], warnings: Vec::new(), cost: None },
    }
}

pub fn validate(s: &Scenario) -> ValidationReport {
    let mut violations = Vec::new();
    let mut note = |r: Result<(), LabError>| {
        if let Err(e) = r {
            violations.push(e.to_string());
        }
    };
    if !(s.integrator.tol > 0.0 && s.integrator.tol.is_finite()) {
        note(Err(LabError::precondition("integrator.tol", "must be positive and finite")));
    }
    if s.integrator.max_steps == 0 {
        note(Err(LabError::precondition("integrator.max_steps", "must be positive")));
    }
    let trajectories = check_task(&s.task, &mut note);
    let mut warnings = Vec::new();
    let step_bound = s.integrator.max_steps;
    if trajectories > COST_WARNING_TRAJECTORIES {
        warnings.push(format!(
            "cost: {trajectories} trajectories with up to {step_bound} steps each; expect a very long run"
        ));
    }
    ValidationReport {
        valid: violations.is_empty(),
        violations,
        warnings,
        cost: Some(Cost { trajectories, step_bound, work_bound: trajectories as f64 * step_bound as f64 }),
    }
}

fn ordered(lo: f64, hi: f64, path: &str, what: &str) -> Result<(), LabError> {
    if lo.is_finite() && hi.is_finite() && hi > lo {
        Ok(())
    } else {
        Err(LabError::precondition(path, format!("{what} must be finite and increasing")))
    }
}

fn positive_count(n: u64, path: &str) -> Result<(), LabError> {
    if n > 0 {
        Ok(())
    } else {
        Err(LabError::precondition(path, "must be positive"))
    }
}

/// Records every violation of the task and returns its trajectory count.
fn check_task(task: &Task, note: &mut impl FnMut(Result<(), LabError>)) -> u64 {
    match task {
        Task::BackflowMap(p) => {
            note(p.field.build("task.field").map(drop));
            note(p.x.values("task.x").map(drop));
            note(p.z.values("task.z").map(drop));
            if !p.trajectories.is_empty() {
                note(ordered(0.0, p.duration, "task.duration", "duration"));
            }
            p.trajectories.len() as u64
        }
        Task::Trajectories(p) => {
            note(p.field.build("task.field").map(drop));
            note(ordered(p.t0, p.t1, "task.t1", "time span"));
            if p.starts.is_empty() {
                note(positive_count(p.n, "task.n"));
            }
            if let Some(b) = p.region {
                note(b.build("task.region").map(drop));
            }
            if let Some(s) = p.surface {
                note(s.build("task.surface").map(drop));
            }
            p.starts.len() as u64 + p.n
        }
        Task::ArrivalHist(p) => {
            note(p.field.build("task.field").map(drop));
            note(p.surface.build("task.surface").map(drop));
            note(positive_count(p.n, "task.n"));
            note(ordered(p.t0, p.t_max, "task.t_max", "time span"));
            note(positive_count(p.bins as u64, "task.bins"));
            if let Some(b) = p.region {
                note(b.build("task.region").map(drop));
            }
            p.n
        }
        Task::Slab(p) => {
            note(p.build("task").map(drop));
            if !(p.k > 0.0) {
                note(Err(LabError::precondition("task.k", "must be positive")));
            }
            for (i, &t) in p.thetas.iter().enumerate() {
                if !(0.0..std::f64::consts::FRAC_PI_2).contains(&t) {
                    note(Err(LabError::precondition(&format!("task.thetas[{i}]"), "must lie in [0, π/2)")));
                }
            }
            0
        }
        Task::Pml(p) => {
            note(p.profile.build(PmlDirection::Forward, "task.profile").map(drop));
            if let Some(z) = p.z {
                note(z.values("task.z").map(drop));
            }
            0
        }
        Task::Spacetime(p) => {
            match &p.source {
                SourceSpec::Field { field } => note(field.build("task.source.field").map(drop)),
                SourceSpec::AbsorbedPlaneWave { profile } => {
                    note(profile.build(PmlDirection::Forward, "task.source.profile").map(drop))
                }
            }
            note(p.coupling.build("task.coupling").map(drop));
            if let CouplingSpec::ScalarConstant { potential } = p.coupling {
                if potential[1] > 0.0 {
                    note(Err(LabError::precondition("task.coupling.potential", "Im V must be ≤ 0")));
                }
            }
            if p.regions.is_empty() {
                note(Err(LabError::precondition("task.regions", "need at least one region")));
            }
            for (i, r) in p.regions.iter().enumerate() {
                note(r.build(&format!("task.regions[{i}]")).map(drop));
            }
            0
        }
        Task::PovmCheck(p) => {
            note(positive_count(p.max_dim as u64, "task.max_dim"));
            if let Some(c) = &p.counterexample {
                note(c.field1.build("task.counterexample.field1").map(drop));
                note(c.field2.build("task.counterexample.field2").map(drop));
            }
            0
        }
        Task::GtzTest(p) => {
            note(
                WaveguideSpec {
                    spin: [0.0, 0.0, 1.0],
                    width: p.width,
                    sigma: p.sigma,
                    profile: p.profile,
                    mass: p.mass,
                }
                .build("task")
                .map(drop),
            );
            match p.disk {
                SurfaceSpec::Disk { .. } => note(p.disk.build("task.disk").map(drop)),
                _ => note(Err(LabError::precondition("task.disk", "the detection surface must be a disk"))),
            }
            note(p.tau.values("task.tau").map(drop));
            if !(0.0..=1.0).contains(&p.eta) {
                note(Err(LabError::precondition("task.eta", "must lie in [0, 1]")));
            }
            match p.dbb {
                Some(d) => {
                    note(positive_count(d.n, "task.dbb.n"));
                    4 * d.n
                }
                None => 0,
            }
        }
        Task::WhichPath(p) => {
            note(p.field.double_slit("task.field").map(drop));
            if let WhichPathMethodSpec::Samples { n } = p.method {
                note(positive_count(n, "task.method.n"));
            }
            0
        }
        Task::ScatteredField(p) => {
            match p.field.build("task.field") {
                Ok(f) if f.energy().is_none() => {
                    note(Err(LabError::precondition("task.field", "the scattered field needs a stationary field")))
                }
                r => note(r.map(drop)),
            }
            note(p.aperture.build("task.aperture").map(drop));
            0
        }
    }
}
