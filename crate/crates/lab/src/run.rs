//! Executes a scenario and collects its artifacts.

use std::collections::BTreeMap;

use arrival_core::arrivals::{
    dd_analytic, full_signal_distribution, ideal_bin_masses, which_path, DdParams, EnsembleConfig, PlanePatch,
    WhichPathMethod,
};
use arrival_core::detectors::{
    mean_incident_slope, pml_detection_probability, pml_detection_probability_quadrature, pml_potential,
    pml_reflection, scattered_field, slab_absorption_budget, slab_scatter, spacetime_absorption, verify_pml_solution,
    AbsorbedPlaneWave, ChiProfile, FlowField, PmlDirection, SpacetimeDetector, ZGrid,
};
use arrival_core::fields::{effective_wavevector, SpinVector, WaveField, WaveguideSpinField};
use arrival_core::guidance::{
    detect_crossings, integrate_trajectory, sample_rng, BornSampler, IntegratorOptions, Surface, Termination,
    Trajectory,
};
use arrival_core::povm::{
    check_povm, construct_pointer_povm, current_povm_counterexample, gtz_sum_test, PointerModel, SpinLabel, TauSeries,
};
use arrival_core::{Complex64, Error, Vector3};
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::ensemble::parallel_arrivals;
use crate::error::LabError;
use crate::output::{Artifact, Cell, Table};
use crate::scenario::*;

fn c2(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn v3(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Runs the scenario's command on the current rayon pool.
pub fn execute(scenario: &Scenario) -> Result<Vec<Artifact>, LabError> {
    let seed = scenario.seed;
    let opts = scenario.integrator.options();
    match &scenario.task {
        Task::BackflowMap(p) => backflow_map(p, &opts),
        Task::Trajectories(p) => trajectories(p, seed, &opts),
        Task::ArrivalHist(p) => arrival_hist(p, seed, &opts),
        Task::Slab(p) => slab(p),
        Task::Pml(p) => pml(p),
        Task::Spacetime(p) => spacetime(p),
        Task::PovmCheck(p) => povm_check(p, seed),
        Task::GtzTest(p) => gtz_test(p, seed, &opts),
        Task::WhichPath(p) => which_path_cmd(p, seed),
        Task::ScatteredField(p) => scattered(p),
    }
}

fn integrate_all(
    field: &WaveField,
    starts: &[(String, Vector3<f64>)],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<Vec<Trajectory>, LabError> {
    starts
        .par_iter()
        .map(|(path, x0)| {
            let tr = integrate_trajectory(field, *x0, t0, t1, opts).map_err(|e| LabError::core(path, e))?;
            if tr.termination == Termination::StepFailure {
                let t = tr.end_time();
                return Err(LabError::core(
                    path,
                    Error::StepFailure { t, reason: "step size underflow or step budget exhausted" },
                ));
            }
            Ok(tr)
        })
        .collect()
}

fn trajectory_table(trajs: &[Trajectory]) -> Table {
    let mut t = Table::new(&["id", "t", "x", "y", "z"]);
    for (id, tr) in trajs.iter().enumerate() {
        for (&time, p) in tr.times.iter().zip(&tr.positions) {
            t.row(vec![id.into(), time.into(), p.x.into(), p.y.into(), p.z.into()]);
        }
    }
    t
}

fn backflow_map(p: &BackflowMapParams, opts: &IntegratorOptions) -> Result<Vec<Artifact>, LabError> {
    let field = p.field.build("task.field")?;
    let (xs, zs) = (p.x.values("task.x")?, p.z.values("task.z")?);
    let mut map = Table::new(&["x", "z", "re_psi", "j_x", "j_z"]);
    for &z in &zs {
        for &x in &xs {
            let pt = Vector3::new(x, p.y, z);
            let psi = field.scalar_jet(&pt, p.t).value;
            let j = field.current(&pt, p.t).total();
            map.row(vec![x.into(), z.into(), psi.re.into(), j.x.into(), j.z.into()]);
        }
    }
    let origin = Vector3::zeros();
    let j0 = field.current(&origin, p.t).total();
    let keff = effective_wavevector(&field, &origin, p.t).ok();
    let k = field.energy().map(|e| (2.0 * field.mass() * e).sqrt());
    let mut summary = json!({
        "t": p.t,
        "origin_current": v3(j0),
        "origin_density": field.density(&origin, p.t),
        "origin_backflow": j0.z < 0.0,
        "k_eff": keff.map(v3),
        "k_eff_ratio": keff.zip(k).map(|(v, k)| v.norm() / k),
    });
    if let FieldSpec::BackflowPair { .. } = p.field {
        let pair = p.field.backflow_pair("task.field")?;
        summary["pair"] = json!({
            "k1": v3(pair.k1),
            "k2": v3(pair.k2),
            "alpha": c2(pair.alpha),
            "alpha_min": pair.alpha_min(),
            "backflow_polynomial": pair.backflow_polynomial(),
            "origin_current_z_closed_form": pair.origin_current_z(),
        });
    }
    let mut out = vec![Artifact::csv("map.csv", map), Artifact::json("summary.json", &summary)];
    if !p.trajectories.is_empty() {
        if !(p.duration > 0.0) {
            return Err(LabError::precondition("task.duration", "must be positive"));
        }
        let starts: Vec<_> =
            p.trajectories.iter().enumerate().map(|(i, s)| (format!("task.trajectories[{i}]"), vector(*s))).collect();
        let trajs = integrate_all(&field, &starts, p.t, p.t + p.duration, opts)?;
        out.push(Artifact::csv("trajectories.csv", trajectory_table(&trajs)));
    }
    Ok(out)
}

fn trajectories(p: &TrajectoriesParams, seed: u64, opts: &IntegratorOptions) -> Result<Vec<Artifact>, LabError> {
    let field = p.field.build("task.field")?;
    if p.starts.is_empty() && p.n == 0 {
        return Err(LabError::precondition("task.n", "give explicit starts or n > 0 Born samples"));
    }
    let mut starts: Vec<_> =
        p.starts.iter().enumerate().map(|(i, s)| (format!("task.starts[{i}]"), vector(*s))).collect();
    if p.n > 0 {
        let region = p.region.map(|b| b.build("task.region")).transpose()?;
        let sampler = BornSampler::new(&field, p.t0, seed, region).map_err(|e| LabError::core("task.region", e))?;
        let sampled: Vec<Vector3<f64>> = (0..p.n)
            .into_par_iter()
            .map(|i| sampler.sample(i).map_err(|e| LabError::core("task.n", e)))
            .collect::<Result<_, _>>()?;
        starts.extend(sampled.into_iter().enumerate().map(|(i, x)| (format!("task.n[{i}]"), x)));
    }
    let trajs = integrate_all(&field, &starts, p.t0, p.t1, opts)?;
    let mut out = vec![Artifact::csv("trajectories.csv", trajectory_table(&trajs))];
    let mut summary = Table::new(&["id", "termination", "accepted_steps", "rejected_steps", "min_density"]);
    for (id, tr) in trajs.iter().enumerate() {
        summary.row(vec![
            id.into(),
            format!("{:?}", tr.termination).into(),
            tr.accepted_steps().into(),
            tr.rejected_steps.into(),
            tr.min_density.into(),
        ]);
    }
    out.push(Artifact::csv("trajectory_summary.csv", summary));
    if let Some(s) = &p.surface {
        let surface = s.build("task.surface")?;
        let mut t = Table::new(&["id", "order_index", "t", "x", "y", "z", "sign"]);
        for (id, tr) in trajs.iter().enumerate() {
            for e in detect_crossings(tr, &surface) {
                t.row(vec![
                    id.into(),
                    e.order_index.into(),
                    e.time.into(),
                    e.position.x.into(),
                    e.position.y.into(),
                    e.position.z.into(),
                    (e.direction as i64).into(),
                ]);
            }
        }
        out.push(Artifact::csv("crossings.csv", t));
    }
    Ok(out)
}

fn bin_centers(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn arrival_hist(p: &ArrivalHistParams, seed: u64, opts: &IntegratorOptions) -> Result<Vec<Artifact>, LabError> {
    let field = p.field.build("task.field")?;
    let surface = p.surface.build("task.surface")?;
    let region = p.region.map(|b| b.build("task.region")).transpose()?;
    let cfg = EnsembleConfig { bins: p.bins, integrator: *opts, region, ..EnsembleConfig::new(p.t0, p.t_max) };
    let hist = parallel_arrivals(&field, &surface, p.n, seed, &cfg).map_err(|e| LabError::core("task", e))?;
    let centers = bin_centers(&hist.bin_edges);
    let mut table = Table::new(&["tau", "value", "class"]);
    let mut emit = |values: &[f64], class: String| {
        for (&tau, &v) in centers.iter().zip(values) {
            table.row(vec![tau.into(), v.into(), Cell::Owned(class.clone())]);
        }
    };
    emit(&hist.density(&hist.first()), "first".into());
    emit(&hist.density(&hist.all), "all".into());
    emit(&hist.density(&hist.all_positive), "all_positive".into());
    emit(&hist.density(&hist.all_negative), "all_negative".into());
    for k in 0..p.max_order {
        let counts = hist.by_order.get(k).cloned().unwrap_or_else(|| vec![0; hist.bins()]);
        emit(&hist.density(&counts), format!("order_{}", k + 1));
    }
    let mut summary = json!({
        "n_total": hist.n_total,
        "n_lost": hist.n_lost,
        "n_noarrival": hist.n_noarrival,
        "latest_first_arrival": hist.latest_first_arrival,
        "bin_edges": hist.bin_edges,
    });
    if p.ideal {
        let patch =
            p.patch.map(|w| PlanePatch::new(w.lo, w.hi).map_err(|e| LabError::core("task.patch", e))).transpose()?;
        let masses = ideal_bin_masses(&field, &surface, &hist.bin_edges, patch.as_ref())
            .map_err(|e| LabError::core("task", e))?;
        let densities: Vec<f64> =
            masses.iter().zip(hist.bin_edges.windows(2)).map(|(m, w)| m / (w[1] - w[0])).collect();
        emit(&densities, "ideal".into());
        let (stat, dof) = chi_square(&hist.first(), hist.n_total, &masses);
        summary["ideal_mass"] = json!(masses.iter().sum::<f64>());
        summary["chi_square_first_vs_ideal"] = json!({ "statistic": stat, "dof": dof });
    }
    Ok(vec![Artifact::csv("histogram.csv", table), Artifact::json("arrival_summary.json", &summary)])
}

/// Pearson statistic of observed counts against n·mass over bins expecting at least five
/// events; the degrees of freedom are the number of such bins minus one.
pub fn chi_square(observed: &[u64], n: u64, masses: &[f64]) -> (f64, usize) {
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&o, &m) in observed.iter().zip(masses) {
        let e = n as f64 * m;
        if e >= 5.0 {
            stat += (o as f64 - e).powi(2) / e;
            used += 1;
        }
    }
    (stat, used.saturating_sub(1))
}

fn slab(p: &SlabParams) -> Result<Vec<Artifact>, LabError> {
    let s = p.build("task")?;
    let mut records = Vec::new();
    let mut profile = Table::new(&["theta", "z", "re_psi", "im_psi", "density"]);
    for (i, &theta) in p.thetas.iter().enumerate() {
        let path = format!("task.thetas[{i}]");
        let core = |e| LabError::core(&path, e);
        let r = slab_scatter(p.k, theta, &s).map_err(core)?;
        let budget = slab_absorption_budget(p.k, theta, &s).map_err(core)?;
        let slope = mean_incident_slope(p.k, theta, &s).map_err(core)?;
        records.push(json!({
            "theta": theta,
            "k1": r.k1,
            "k2": c2(r.k2),
            "reflection": c2(r.reflection),
            "transmission": c2(r.transmission),
            "reflectance": r.reflection.norm_sqr(),
            "transmittance": r.transmission.norm_sqr(),
            "absorption": r.absorption,
            "flux_in_minus_out": budget.flux_in_minus_out,
            "volume_absorption": budget.volume_absorption,
            "mean_incident_slope": slope,
        }));
        if p.profile_points > 0 {
            let d = p.thickness;
            let n = p.profile_points.max(2);
            for j in 0..n {
                let z = -d + 3.0 * d * j as f64 / (n - 1) as f64;
                let (psi, _) = r.wave(z);
                profile.row(vec![theta.into(), z.into(), psi.re.into(), psi.im.into(), psi.norm_sqr().into()]);
            }
        }
    }
    let summary = json!({
        "extinction_cross_section": s.extinction_cross_section(p.k),
        "records": records,
    });
    let mut out = vec![Artifact::json("slab.json", &summary)];
    if p.profile_points > 0 {
        out.push(Artifact::csv("slab_profile.csv", profile));
    }
    Ok(out)
}

fn pml(p: &PmlParams) -> Result<Vec<Artifact>, LabError> {
    let fwd = p.profile.build(PmlDirection::Forward, "task.profile")?;
    let bwd = p.profile.build(PmlDirection::Backward, "task.profile")?;
    let k = fwd.kz;
    let core = |e| LabError::core("task.profile", e);
    let closed = pml_detection_probability(&fwd, k).map_err(core)?;
    let quadrature = pml_detection_probability_quadrature(&fwd, k).map_err(core)?;
    let mut summary = json!({
        "xi": fwd.xi(),
        "detection_probability": closed,
        "detection_probability_quadrature": quadrature,
    });
    let mut out = Vec::new();
    if let ChiProfile::Smooth { .. } = fwd.shape {
        let grid = ZGrid::around(&fwd, p.verify_points);
        summary["residual_forward"] = json!(verify_pml_solution(&fwd, k, &grid).map_err(core)?);
        summary["residual_backward"] = json!(verify_pml_solution(&bwd, k, &grid).map_err(core)?);
        let matched_f = pml_reflection(&fwd, k, PmlDirection::Forward).map_err(core)?;
        let matched_b = pml_reflection(&bwd, k, PmlDirection::Backward).map_err(core)?;
        let crossed = pml_reflection(&fwd, k, PmlDirection::Backward).map_err(core)?;
        summary["reflectance_forward_matched"] = json!(matched_f.reflection.norm_sqr());
        summary["reflectance_backward_matched"] = json!(matched_b.reflection.norm_sqr());
        summary["reflectance_forward_layer_backward_wave"] = json!(crossed.reflection.norm_sqr());
        let zs = match p.z {
            Some(axis) => axis.values("task.z")?,
            None => {
                let g = ZGrid::around(&fwd, 801);
                g.iter().collect()
            }
        };
        let mut table = Table::new(&["z", "re_v_fwd", "re_v_bwd", "im_v", "density_fwd", "density_bwd"]);
        for z in zs {
            let (vf, vb) = (pml_potential(&fwd, z).map_err(core)?, pml_potential(&bwd, z).map_err(core)?);
            table.row(vec![
                z.into(),
                vf.re.into(),
                vb.re.into(),
                vf.im.into(),
                fwd.absorbed_wave(z).0.norm_sqr().into(),
                bwd.absorbed_wave(z).0.norm_sqr().into(),
            ]);
        }
        out.push(Artifact::csv("pml.csv", table));
    }
    out.push(Artifact::json("pml.json", &summary));
    Ok(out)
}

fn spacetime(p: &SpacetimeParams) -> Result<Vec<Artifact>, LabError> {
    let coupling = p.coupling.build("task.coupling")?;
    let regions = p
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| Ok((format!("task.regions[{i}]"), r.build(&format!("task.regions[{i}]"))?)))
        .collect::<Result<Vec<_>, LabError>>()?;
    if regions.is_empty() {
        return Err(LabError::precondition("task.regions", "need at least one region"));
    }
    fn absorb<F: FlowField + Sync>(
        regions: &[(String, arrival_core::detectors::SpacetimeRegion)],
        coupling: arrival_core::detectors::Coupling,
        source: &F,
    ) -> Result<Vec<Value>, LabError> {
        regions
            .par_iter()
            .map(|(path, region)| {
                let a = spacetime_absorption(&SpacetimeDetector { region: *region, coupling }, source)
                    .map_err(|e| LabError::core(path, e))?;
                Ok(json!({ "lo": region.lo, "hi": region.hi, "value": a.value, "gain": a.gain, "error": a.error }))
            })
            .collect()
    }
    let records = match &p.source {
        SourceSpec::Field { field } => absorb(&regions, coupling, &field.build("task.source.field")?)?,
        SourceSpec::AbsorbedPlaneWave { profile } => {
            let prof = profile.build(PmlDirection::Forward, "task.source.profile")?;
            absorb(&regions, coupling, &AbsorbedPlaneWave(prof))?
        }
    };
    let total: f64 = records.iter().map(|r| r["value"].as_f64().unwrap_or(f64::NAN)).sum();
    let error: f64 = records.iter().map(|r| r["error"].as_f64().unwrap_or(f64::NAN)).sum();
    Ok(vec![Artifact::json("spacetime.json", &json!({ "regions": records, "total": total, "total_error": error }))])
}

/// ds, dm, cells, hermiticity, min eigenvalue, completeness, probability deviation, pass.
type ModelRow = (usize, usize, usize, f64, f64, f64, f64, bool);

fn povm_check(p: &PovmCheckParams, seed: u64) -> Result<Vec<Artifact>, LabError> {
    if p.max_dim == 0 {
        return Err(LabError::precondition("task.max_dim", "must be positive"));
    }
    let rows: Vec<ModelRow> = (0..p.models)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let ds = rng.random_range(1..=p.max_dim);
            let dm = rng.random_range(1..=p.max_dim);
            let cells = rng.random_range(1..=dm);
            let path = format!("task.models[{i}]");
            let core = |e| LabError::core(&path, e);
            let model = PointerModel::random(ds, dm, cells, &mut rng).map_err(core)?;
            let family = construct_pointer_povm(&model).map_err(core)?;
            let report = check_povm(&family);
            let psi = DVector::from_fn(ds, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let psi = &psi / Complex64::new(psi.norm(), 0.0);
            let a = family.probabilities(&psi).map_err(core)?;
            let b = model.direct_probabilities(&psi).map_err(core)?;
            let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let pass = report.passes() && dev < arrival_core::povm::POVM_TOL;
            Ok((ds, dm, cells, report.hermiticity, report.min_eigenvalue, report.completeness, dev, pass))
        })
        .collect::<Result<_, LabError>>()?;
    let mut table = Table::new(&[
        "model",
        "ds",
        "dm",
        "cells",
        "hermiticity",
        "min_eigenvalue",
        "completeness",
        "probability_deviation",
        "passes",
    ]);
    for (i, r) in rows.iter().enumerate() {
        table.row(vec![
            i.into(),
            r.0.into(),
            r.1.into(),
            r.2.into(),
            r.3.into(),
            r.4.into(),
            r.5.into(),
            r.6.into(),
            r.7.into(),
        ]);
    }
    let mut summary = json!({
        "models": p.models,
        "all_pass": rows.iter().all(|r| r.7),
        "worst_min_eigenvalue": rows.iter().map(|r| r.4).fold(f64::INFINITY, f64::min),
        "worst_completeness": rows.iter().map(|r| r.5).fold(0.0, f64::max),
        "worst_probability_deviation": rows.iter().map(|r| r.6).fold(0.0, f64::max),
    });
    if let Some(c) = &p.counterexample {
        let f1 = c.field1.build("task.counterexample.field1")?;
        let f2 = c.field2.build("task.counterexample.field2")?;
        let r = current_povm_counterexample(&f1, &f2, &vector(c.x), c.t, &vector(c.normal))
            .map_err(|e| LabError::core("task.counterexample", e))?;
        summary["counterexample"] = json!({
            "j1": r.j1,
            "j2": r.j2,
            "j_plus": r.j_plus,
            "j_minus": r.j_minus,
            "signed_defect": r.signed_defect,
            "absolute_defect": r.absolute_defect,
        });
    }
    Ok(vec![Artifact::csv("povm.csv", table), Artifact::json("povm.json", &summary)])
}

const SPINS: [(SpinLabel, &str); 4] = [
    (SpinLabel::PlusZ, "plus_z"),
    (SpinLabel::MinusZ, "minus_z"),
    (SpinLabel::PlusX, "plus_x"),
    (SpinLabel::MinusX, "minus_x"),
];

fn spin_of(label: SpinLabel) -> SpinVector {
    match label {
        SpinLabel::PlusZ => SpinVector::z(),
        SpinLabel::MinusZ => SpinVector::z().flipped(),
        SpinLabel::PlusX => SpinVector::x(),
        SpinLabel::MinusX => SpinVector::x().flipped(),
    }
}

fn gtz_test(p: &GtzParams, seed: u64, opts: &IntegratorOptions) -> Result<Vec<Artifact>, LabError> {
    let disk = p.disk.build("task.disk")?;
    if !matches!(disk, Surface::Disk { .. }) {
        return Err(LabError::precondition("task.disk", "the detection surface must be a disk"));
    }
    let taus = p.tau.values("task.tau")?;
    let guide = |label: SpinLabel| -> Result<WaveguideSpinField, LabError> {
        WaveguideSpinField::new(spin_of(label), p.width, p.sigma, p.profile.into(), p.mass)
            .map_err(|e| LabError::core("task", e))
    };
    let mut table = Table::new(&["tau", "value", "class"]);
    let mut full = BTreeMap::new();
    let mut spin_residual = 0.0f64;
    let mut scale = 0.0f64;
    for (label, name) in SPINS {
        let s = full_signal_distribution(&guide(label)?, &disk, p.eta, &taus).map_err(|e| LabError::core("task", e))?;
        for (&tau, &v) in taus.iter().zip(&s.values) {
            table.row(vec![tau.into(), v.into(), Cell::Owned(format!("full_{name}"))]);
        }
        spin_residual = s.spin_residual.iter().fold(spin_residual, |a, x| a.max(x.abs()));
        scale = s.values.iter().fold(scale, |a, x| a.max(x.abs()));
        full.insert(label, TauSeries { grid: taus.clone(), values: s.values });
    }
    let report = gtz_sum_test(&full).map_err(|e| LabError::core("task", e))?;
    for (&tau, (&l, &r)) in taus.iter().zip(report.lhs.iter().zip(&report.rhs)) {
        table.row(vec![tau.into(), l.into(), "full_sum_z".into()]);
        table.row(vec![tau.into(), r.into(), "full_sum_x".into()]);
    }
    let mut summary = json!({
        "full_signal": {
            "max_deviation": report.max_deviation,
            "tau_at_max": report.tau_at_max,
            "max_spin_residual": spin_residual,
            "relative_spin_residual": if scale > 0.0 { spin_residual / scale } else { 0.0 },
        },
    });
    if let Some(dbb) = p.dbb {
        let cfg = EnsembleConfig { bins: dbb.bins, integrator: *opts, ..EnsembleConfig::new(0.0, p.tau.max) };
        let mut first = BTreeMap::new();
        let mut centers = Vec::new();
        let mut latest = serde_json::Map::new();
        for (i, (label, name)) in SPINS.into_iter().enumerate() {
            let field = WaveField::Waveguide(guide(label)?);
            let stream_seed = seed.wrapping_add(i as u64);
            let h = parallel_arrivals(&field, &disk, dbb.n, stream_seed, &cfg)
                .map_err(|e| LabError::core("task.dbb", e))?;
            centers = bin_centers(&h.bin_edges);
            let d = h.density(&h.first());
            for (&tau, &v) in centers.iter().zip(&d) {
                table.row(vec![tau.into(), v.into(), Cell::Owned(format!("dbb_{name}"))]);
            }
            latest.insert(name.into(), json!(h.latest_first_arrival));
            first.insert(label, TauSeries { grid: centers.clone(), values: d });
        }
        let r = gtz_sum_test(&first).map_err(|e| LabError::core("task.dbb", e))?;
        for (&tau, (&l, &rr)) in centers.iter().zip(r.lhs.iter().zip(&r.rhs)) {
            table.row(vec![tau.into(), l.into(), "dbb_sum_z".into()]);
            table.row(vec![tau.into(), rr.into(), "dbb_sum_x".into()]);
        }
        summary["dbb_first_arrival"] = json!({
            "n_per_spin": dbb.n,
            "max_deviation": r.max_deviation,
            "tau_at_max": r.tau_at_max,
            "latest_first_arrival": latest,
        });
    }
    if let Some(dd) = p.dd {
        let grid: Vec<f64> = taus.iter().copied().filter(|&t| t >= 0.0).collect();
        let params = DdParams::new(dd.l, dd.lambda0, grid.clone()).map_err(|e| LabError::core("task.dd", e))?;
        for (&tau, v) in grid.iter().zip(dd_analytic(&params)) {
            table.row(vec![tau.into(), v.into(), "dd_analytic".into()]);
        }
    }
    Ok(vec![Artifact::csv("gtz.csv", table), Artifact::json("gtz.json", &summary)])
}

fn which_path_cmd(p: &WhichPathParams, seed: u64) -> Result<Vec<Artifact>, LabError> {
    let slit = p.field.double_slit("task.field")?;
    let method = match p.method {
        WhichPathMethodSpec::Quadrature => WhichPathMethod::Quadrature,
        WhichPathMethodSpec::Samples { n } => WhichPathMethod::Samples { n, seed },
    };
    let r = which_path(&slit, p.t, method).map_err(|e| LabError::core("task", e))?;
    Ok(vec![Artifact::json(
        "which_path.json",
        &json!({
            "t": p.t,
            "p_plus": r.p_plus,
            "p_minus": r.p_minus,
            "overlap_mass": r.overlap_mass,
            "retrodictive": r.retrodictive,
        }),
    )])
}

fn scattered(p: &ScatteredFieldParams) -> Result<Vec<Artifact>, LabError> {
    let field = p.field.build("task.field")?;
    let aperture = p.aperture.build("task.aperture")?;
    let values: Vec<(Complex64, Complex64)> = p
        .points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let x = vector(*x);
            let scat = scattered_field(&aperture, &field, &x, p.backflow)
                .map_err(|e| LabError::core(&format!("task.points[{i}]"), e))?;
            Ok((field.scalar_jet(&x, 0.0).value, scat))
        })
        .collect::<Result<_, LabError>>()?;
    let mut table = Table::new(&["x", "y", "z", "re_incident", "im_incident", "re_scattered", "im_scattered", "ratio"]);
    for (x, (inc, scat)) in p.points.iter().zip(values) {
        table.row(vec![
            x[0].into(),
            x[1].into(),
            x[2].into(),
            inc.re.into(),
            inc.im.into(),
            scat.re.into(),
            scat.im.into(),
            ((inc + scat).norm() / inc.norm()).into(),
        ]);
    }
    Ok(vec![Artifact::csv("scattered.csv", table)])
}
