//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use arrival_core::arrivals::{dd_density, dd_peak, full_signal_distribution, ideal_bin_masses, EnsembleConfig};
use arrival_core::detectors::{
    pml_detection_probability, pml_detection_probability_quadrature, pml_edge_integrals, pml_potential, pml_reflection,
    slab_absorption_budget, verify_pml_solution, ChiProfile, PmlDirection, PmlProfile, SlabDetector, ZGrid,
};
use arrival_core::fields::{BackflowPair, DoubleSlit, GaussianPacket, SpinVector, WaveField, WaveguideSpinField};
use arrival_core::guidance::{integrate_trajectory, sample_rng, BornSampler, IntegratorOptions, Surface, Termination};
use arrival_core::povm::{
    check_povm, construct_pointer_povm, current_povm_counterexample, gtz_sum_test, PointerModel, SpinLabel, TauSeries,
};
use arrival_core::quad::{integrate, QuadOptions};
use arrival_core::{Complex64, Vector3, FD_STEP};
use arrival_lab::ensemble::parallel_arrivals;
use arrival_lab::run::chi_square;
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::{gamma, gamma_lr};

type Outcome = Result<(bool, String), String>;

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

const SEED: u64 = 20240917;

/// Significance level of every goodness-of-fit check.
const ALPHA: f64 = 0.01;

fn p_value(stat: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Backflow at the origin for k = 2π, θ = π/3 and 9π/20 with the most negative α.
fn backflow() -> Outcome {
    let k = 2.0 * PI;
    let pair = BackflowPair::from_angles(k, PI / 3.0, 9.0 * PI / 20.0, None, 1.0).map_err(err)?;
    let origin = Vector3::zeros();
    let jz = pair.field().current(&origin, 0.0).total().z;
    let closed = pair.origin_current_z();
    let keff = pair.effective_wavevector(&origin).map_err(err)?;
    let kz_error = (keff.z + pair.k2.z).abs() / pair.k2.z;
    let ratio = keff.norm() / k;
    let pass =
        jz < 0.0 && (jz - closed).abs() <= 1e-12 * closed.abs() && kz_error <= 1e-12 && (ratio - 1.11).abs() <= 0.02;
    Ok((
        pass,
        format!(
            "J_z(0) = {jz:.6} (closed form {closed:.6}), k_eff,z + k2z = {:.1e} relative, |k_eff|/k = {ratio:.5}",
            kz_error
        ),
    ))
}

/// Flux budget of random lossy slabs and the weak-coupling flux law.
fn slab() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mut rng = sample_rng(SEED, i);
        let density = rng.random_range(0.01..0.5);
        let f0 = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.01..0.5));
        let thickness = rng.random_range(0.1..3.0);
        let k = rng.random_range(1.0..10.0);
        let theta = rng.random_range(0.0..1.3);
        let s = SlabDetector::new(density, f0, thickness, 1.0).map_err(err)?;
        let b = slab_absorption_budget(k, theta, &s).map_err(err)?;
        worst = worst.max((b.flux_in_minus_out - b.volume_absorption).abs() / b.volume_absorption);
    }
    let k = 2.0 * PI;
    let weak = SlabDetector::new(1e-3, Complex64::new(0.0, 0.05), 1.0, 1.0).map_err(err)?;
    let coupling = weak.density * weak.extinction_cross_section(k) * weak.thickness;
    let fluxes: Vec<f64> = [0.0, 0.3, 0.6, 0.9, 1.2]
        .iter()
        .map(|&theta| slab_absorption_budget(k, theta, &weak).map(|b| b.flux_in_minus_out))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let (lo, hi) = fluxes.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &f| (l.min(f), h.max(f)));
    let spread = (hi - lo) / hi;
    let pass = worst < 1e-8 && coupling <= 1e-3 && spread < 1e-3;
    Ok((
        pass,
        format!("worst budget error {worst:.1e}; weak coupling Nσd = {coupling:.1e}, flux spread over θ {spread:.1e}"),
    ))
}

/// Matched layer: stationary residual, closed forms, the step limit and the χ′ sign.
fn pml() -> Outcome {
    let kz = 2.0 * PI;
    let smooth = ChiProfile::Smooth { a: 20.0 };
    let fwd = PmlProfile::new(2.0, 1.0, smooth, PmlDirection::Forward, kz).map_err(err)?;
    let bwd = PmlProfile::new(2.0, 1.0, smooth, PmlDirection::Backward, kz).map_err(err)?;
    let grid = ZGrid::around(&fwd, 2001);
    let residual =
        verify_pml_solution(&fwd, kz, &grid).map_err(err)?.max(verify_pml_solution(&bwd, kz, &grid).map_err(err)?);

    let step = PmlProfile::new(1.5, 0.7, ChiProfile::Step, PmlDirection::Forward, 3.0).map_err(err)?;
    let closed = pml_detection_probability(&step, 3.0).map_err(err)?;
    let quad = pml_detection_probability_quadrature(&step, 3.0).map_err(err)?;
    let step_gap = (closed - quad).abs() / closed;

    let (f0, g0) = pml_edge_integrals(0.0).map_err(err)?;
    let edges_ok = (f0 - 1.0).abs() < 1e-12 && (g0 - 1.0).abs() < 1e-12;
    let mut gaps = Vec::new();
    for a in [1e4, 1e8, 1e12, 1e16, 1e20] {
        let p = PmlProfile::new(1.5, 0.7, ChiProfile::Smooth { a }, PmlDirection::Forward, 3.0).map_err(err)?;
        gaps.push((pml_detection_probability(&p, 3.0).map_err(err)? - closed).abs() / closed);
    }
    let limit_ok = edges_ok && gaps.windows(2).all(|w| w[1] <= w[0]) && *gaps.last().unwrap() < 1e-8;

    let mut sign_ok = true;
    let (mut worst_split, mut steepest) = (0.0f64, 0.0f64);
    for z in grid.iter() {
        let (vf, vb) = (pml_potential(&fwd, z).map_err(err)?, pml_potential(&bwd, z).map_err(err)?);
        let fd = (fwd.chi(z + FD_STEP) - fwd.chi(z - FD_STEP)) / (2.0 * FD_STEP);
        let split = vf.re - vb.re;
        worst_split = worst_split.max((split + fd / fwd.mass).abs());
        steepest = steepest.max(fd.abs());
        sign_ok &= vf.im == vb.im;
        if z < -1e-3 {
            sign_ok &= split < 0.0 || fd == 0.0;
        } else if z > fwd.thickness + 1e-3 {
            sign_ok &= split > 0.0 || fd == 0.0;
        }
    }
    let matched = pml_reflection(&fwd, kz, PmlDirection::Forward).map_err(err)?.reflection.norm_sqr();
    let mismatched = pml_reflection(&bwd, kz, PmlDirection::Forward).map_err(err)?.reflection.norm_sqr();
    sign_ok &= worst_split < 1e-6 * steepest && mismatched > 1e3 * matched;

    let pass = residual < 1e-6 && step_gap < 1e-12 && limit_ok && sign_ok;
    Ok((
        pass,
        format!(
            "residual {residual:.1e}; step closed form vs quadrature {step_gap:.1e}; smooth-to-step gap {:.1e} at ξ = {:.1e}; \
             Re V_fwd − Re V_bwd = −χ′ to {:.1e} relative; |R|² matched {matched:.1e} vs mismatched {mismatched:.1e}",
            gaps.last().unwrap(),
            1.5 * (PI / 1e20f64).sqrt(),
            worst_split / steepest
        ),
    ))
}

/// Born-distributed starts stay Born-distributed; 1D trajectories never cross.
fn equivariance() -> Outcome {
    let packet = GaussianPacket::new(Vector3::zeros(), 0.5, Vector3::new(0.0, 0.0, 1.0), 1.0).map_err(err)?;
    let field = WaveField::DoubleSlit(DoubleSlit::symmetric(4.0, packet, 0.0).map_err(err)?);
    let t1 = 2.0;
    let n = 100_000u64;
    let opts = IntegratorOptions::default();
    let sampler = BornSampler::new(&field, 0.0, SEED, None).map_err(err)?;
    let finals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x0 = sampler.sample(i)?;
            let tr = integrate_trajectory(&field, x0, 0.0, t1, &opts)?;
            Ok(if tr.termination == Termination::Completed { tr.end_position().x } else { f64::NAN })
        })
        .collect::<arrival_core::Result<_>>()
        .map_err(err)?;

    let support = field.support(t1).ok_or("double slit has a finite support")?;
    let (lo, hi, bins) = (support.lo.x, support.hi.x, 60usize);
    let yz = Vector3::new(0.0, 0.0, t1);
    let marginal = |x: f64| field.density(&Vector3::new(x, yz.y, yz.z), t1);
    let q = QuadOptions::new(1e-14, 1e-11);
    let norm = integrate(marginal, lo, hi, &q).map_err(err)?.value;
    let width = (hi - lo) / bins as f64;
    let mut masses = Vec::with_capacity(bins + 1);
    for b in 0..bins {
        let a = lo + b as f64 * width;
        masses.push(integrate(marginal, a, a + width, &q).map_err(err)?.value / norm);
    }
    masses.push((1.0 - masses.iter().sum::<f64>()).max(0.0));
    let mut observed = vec![0u64; bins + 1];
    for &x in &finals {
        let b = if (lo..hi).contains(&x) { ((x - lo) / width) as usize } else { bins };
        observed[b.min(bins)] += 1;
    }
    let (stat, dof) = chi_square(&observed, n, &masses);
    let p = p_value(stat, dof);

    let pairs = 1000u64;
    let probes: Vec<f64> = (1..=40).map(|j| t1 * j as f64 / 40.0).collect();
    let crossed: usize = (0..pairs)
        .into_par_iter()
        .map(|i| -> arrival_core::Result<usize> {
            let (a, b) = (sampler.sample(n + 2 * i)?, sampler.sample(n + 2 * i + 1)?);
            let left = Vector3::new(a.x.min(b.x), a.y, a.z);
            let right = Vector3::new(a.x.max(b.x), a.y, a.z);
            let tl = integrate_trajectory(&field, left, 0.0, t1, &opts)?;
            let tr = integrate_trajectory(&field, right, 0.0, t1, &opts)?;
            let ordered = probes.iter().all(|&t| match (tl.position_at(t), tr.position_at(t)) {
                (Some(l), Some(r)) => l.x < r.x,
                _ => false,
            });
            Ok(usize::from(!ordered))
        })
        .sum::<arrival_core::Result<usize>>()
        .map_err(err)?;

    let pass = p > ALPHA && crossed == 0;
    Ok((
        pass,
        format!("x-marginal at t = {t1}: χ² = {stat:.1}, dof = {dof}, p = {p:.3}; {crossed} of {pairs} pairs lost their order"),
    ))
}

/// Far-field first arrivals follow the flux through the plane.
fn far_field() -> Outcome {
    let packet = GaussianPacket::new(Vector3::zeros(), 1.0, Vector3::new(0.0, 0.0, 3.0), 1.0).map_err(err)?;
    let field = WaveField::GaussianPacket(packet);
    let surface = Surface::PlaneZ { z: 10.0 };
    let n = 100_000u64;
    let cfg = EnsembleConfig { bins: 80, ..EnsembleConfig::new(0.0, 8.0) };
    let h = parallel_arrivals(&field, &surface, n, SEED, &cfg).map_err(err)?;
    let mut masses = ideal_bin_masses(&field, &surface, &h.bin_edges, None).map_err(err)?;
    masses.push((1.0 - masses.iter().sum::<f64>()).max(0.0));
    let mut observed = h.first();
    observed.push(n - observed.iter().sum::<u64>());
    let (stat, dof) = chi_square(&observed, n, &masses);
    let p = p_value(stat, dof);
    Ok((p > ALPHA && h.n_lost == 0, format!("χ² = {stat:.1}, dof = {dof}, p = {p:.3}, lost {}", h.n_lost)))
}

/// Shape of the closed-form waveguide arrival density.
fn dd_curve() -> Outcome {
    let (l, lambda0) = (2.0, 1.0);
    let zero = dd_density(0.0, l, lambda0);
    let taus: Vec<f64> = (1..=20_000).map(|i| i as f64 * 1e-3).collect();
    let values: Vec<f64> = taus.iter().map(|&t| dd_density(t, l, lambda0)).collect();
    let positive = values.iter().all(|&v| v > 0.0);
    let maxima: Vec<usize> =
        (1..values.len() - 1).filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1]).collect();
    let peak = dd_peak(l);
    let single = maxima.len() == 1 && (taus[maxima[0]] - peak).abs() <= 1e-3;
    let total = integrate(|t| dd_density(t, l, lambda0), 0.0, f64::INFINITY, &QuadOptions::new(1e-14, 1e-12))
        .map_err(err)?
        .value;
    let expected = 2.0 * gamma_lr(1.5, l * l) * gamma(1.5) / (lambda0 * PI.sqrt());
    let integrable = total.is_finite() && (total - expected).abs() <= 1e-9 * expected;
    Ok((
        zero == 0.0 && positive && single && integrable,
        format!(
            "P(0) = {zero}, {} interior maxima (scan {:.3}, closed form {peak:.4}), ∫P = {total:.10} vs {expected:.10}",
            maxima.len(),
            maxima.first().map_or(f64::NAN, |&i| taus[i])
        ),
    ))
}

/// J·n is additive over a superposition pair while |J·n| is not.
fn counterexample() -> Outcome {
    let k = 2.0 * PI;
    let pair = BackflowPair::from_angles(k, PI / 3.0, 9.0 * PI / 20.0, None, 1.0).map_err(err)?;
    let a = pair.alpha;
    let w1 = arrival_core::fields::PlaneWave::new(pair.k1, Complex64::new(1.0, 0.0), 1.0).map_err(err)?;
    let w2 = arrival_core::fields::PlaneWave::new(pair.k2, -a, 1.0).map_err(err)?;
    let r = current_povm_counterexample(
        &WaveField::PlaneWave(w1),
        &WaveField::PlaneWave(w2),
        &Vector3::zeros(),
        0.0,
        &Vector3::z(),
    )
    .map_err(err)?;
    Ok((
        r.signed_defect < 1e-12 && r.absolute_defect > 0.0 && r.j_minus < 0.0,
        format!(
            "J1 = {:.4}, J2 = {:.4}, J+ = {:.4}, J− = {:.4}; signed defect {:.1e}, absolute defect {:.4}",
            r.j1, r.j2, r.j_plus, r.j_minus, r.signed_defect, r.absolute_defect
        ),
    ))
}

fn spin(label: SpinLabel) -> SpinVector {
    match label {
        SpinLabel::PlusZ => SpinVector::z(),
        SpinLabel::MinusZ => SpinVector::z().flipped(),
        SpinLabel::PlusX => SpinVector::x(),
        SpinLabel::MinusX => SpinVector::x().flipped(),
    }
}

const SPINS: [SpinLabel; 4] = [SpinLabel::PlusZ, SpinLabel::MinusZ, SpinLabel::PlusX, SpinLabel::MinusX];

/// Full-signal spin-sum identity holds; dBB first arrivals break it late.
fn gtz() -> Outcome {
    let disk = Surface::Disk { z: 2.0, radius: 4.0 };
    let taus: Vec<f64> = (1..=30).map(|i| 0.2 * i as f64).collect();
    let mut full = BTreeMap::new();
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    for label in SPINS {
        let s =
            full_signal_distribution(&WaveguideSpinField::normalized(spin(label)), &disk, 1.0, &taus).map_err(err)?;
        residual = s.spin_residual.iter().fold(residual, |a, x| a.max(x.abs()));
        scale = s.values.iter().fold(scale, |a, x| a.max(x.abs()));
        full.insert(label, TauSeries { grid: taus.clone(), values: s.values });
    }
    let identity = gtz_sum_test(&full).map_err(err)?.max_deviation;
    let relative_residual = residual / scale;

    let (n, t_max, late) = (4000u64, 12.0, 8.0);
    let cfg = EnsembleConfig { bins: 60, ..EnsembleConfig::new(0.0, t_max) };
    let mut late_mass = BTreeMap::new();
    for (i, label) in SPINS.into_iter().enumerate() {
        let field = WaveField::Waveguide(WaveguideSpinField::normalized(spin(label)));
        let h = parallel_arrivals(&field, &disk, n, SEED + i as u64, &cfg).map_err(err)?;
        let first = h.first();
        let count: u64 = h.bin_edges.windows(2).zip(&first).filter(|(w, _)| w[0] >= late).map(|(_, &c)| c).sum();
        late_mass.insert(label, count as f64 / n as f64);
    }
    let lhs = late_mass[&SpinLabel::PlusZ] + late_mass[&SpinLabel::MinusZ];
    let rhs = late_mass[&SpinLabel::PlusX] + late_mass[&SpinLabel::MinusX];
    let violation = lhs - rhs;
    Ok((
        identity < 1e-8 && relative_residual < 1e-9 && violation > 0.0,
        format!(
            "full-signal deviation {identity:.1e}, spin residual {relative_residual:.1e}; first-arrival mass beyond τ = {late}: \
             z spins {lhs:.4}, x spins {rhs:.4}"
        ),
    ))
}

/// Pointer-model operators form a POVM that reproduces direct evolution.
fn pointer_povms() -> Outcome {
    let (mut min_eig, mut completeness, mut deviation) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..100 {
        let mut rng = sample_rng(SEED, i);
        let ds = rng.random_range(1..=8);
        let dm = rng.random_range(1..=8);
        let cells = rng.random_range(1..=dm);
        let model = PointerModel::random(ds, dm, cells, &mut rng).map_err(err)?;
        let family = construct_pointer_povm(&model).map_err(err)?;
        let report = check_povm(&family);
        min_eig = min_eig.min(report.min_eigenvalue);
        completeness = completeness.max(report.completeness);
        let psi = DVector::from_fn(ds, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let psi = &psi / Complex64::new(psi.norm(), 0.0);
        let a = family.probabilities(&psi).map_err(err)?;
        let b = model.direct_probabilities(&psi).map_err(err)?;
        deviation = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(deviation, f64::max);
    }
    Ok((
        min_eig > -1e-10 && completeness < 1e-10 && deviation < 1e-10,
        format!("min eigenvalue {min_eig:.1e}, completeness {completeness:.1e}, probability deviation {deviation:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "plane-wave backflow", Some(Duration::from_secs(1)), backflow),
        (2, "slab absorption budget", Some(Duration::from_secs(5)), slab),
        (3, "perfectly matched layer", Some(Duration::from_secs(5)), pml),
        (4, "equivariance", Some(Duration::from_secs(120)), equivariance),
        (5, "far-field arrivals", Some(Duration::from_secs(120)), far_field),
        (6, "waveguide arrival density", None, dd_curve),
        (7, "current counterexample", None, counterexample),
        (8, "spin-sum identity", None, gtz),
        (9, "pointer-model POVMs", None, pointer_povms),
    ];
    let mut failures = 0;
    for (id, name, budget, check) in criteria {
        let clock = Instant::now();
        let outcome = check();
        let elapsed = clock.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = match budget {
            Some(b) => format!("{:.2} s of {} s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2} s", elapsed.as_secs_f64()),
        };
        println!("{} criterion {id} ({name}): {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
        failures += usize::from(!pass);
    }
    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
