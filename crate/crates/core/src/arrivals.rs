//! Arrival-time distributions: the ideal flux distribution through a surface, Monte Carlo
//! histograms of first and k-th crossings, the closed-form waveguide arrival density, the
//! spin-summed full detector signal, and which-path retrodiction in the double slit.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fields::{DoubleSlit, SamplingBox, WaveField, WaveguideSpinField};
use crate::guidance::{detect_crossings, integrate_trajectory, BornSampler, IntegratorOptions, Surface, Termination};
use crate::quad::{integrate, integrate_box, QuadOptions};
use crate::{Error, Result};

/// Rectangular window in the plane of a `PlaneZ` (x, y) or `PlaneX` (y, z) surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePatch {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl PlanePatch {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if !(lo[0] < hi[0] && lo[1] < hi[1]) || lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::invalid("patch", "window bounds must be finite with lower < upper"));
        }
        Ok(Self { lo, hi })
    }

    fn from_support(b: &SamplingBox, surface: &Surface) -> Self {
        match surface {
            Surface::PlaneX { .. } => Self { lo: [b.lo.y, b.lo.z], hi: [b.hi.y, b.hi.z] },
            _ => Self { lo: [b.lo.x, b.lo.y], hi: [b.hi.x, b.hi.y] },
        }
    }
}

fn flux_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-10, rel_tol: 1e-9, max_subdivisions: 4000 }
}

/// Integrates `g(x)` over the surface: polar coordinates on a disk, `patch` (or the field
/// support at `t`) on a plane.
fn surface_integral(
    field: &WaveField,
    surface: &Surface,
    t: f64,
    patch: Option<&PlanePatch>,
    opts: &QuadOptions,
    mut g: impl FnMut(&Vector3<f64>) -> f64,
) -> Result<f64> {
    match *surface {
        Surface::Disk { z, radius } => Ok(integrate_box(
            |p: &[f64]| {
                let (s, c) = p[1].sin_cos();
                g(&Vector3::new(p[0] * c, p[0] * s, z)) * p[0]
            },
            &[0.0, 0.0],
            &[radius, 2.0 * PI],
            opts,
        )?
        .value),
        Surface::PlaneZ { z } | Surface::PlaneX { x: z } => {
            let window = match patch {
                Some(p) => *p,
                None => {
                    let b = field.support(t).ok_or_else(|| {
                        Error::Precondition("field has no finite support; give an explicit surface window".into())
                    })?;
                    PlanePatch::from_support(&b, surface)
                }
            };
            let point = |u: f64, v: f64| match surface {
                Surface::PlaneX { .. } => Vector3::new(z, u, v),
                _ => Vector3::new(u, v, z),
            };
            Ok(integrate_box(|p: &[f64]| g(&point(p[0], p[1])), &window.lo, &window.hi, opts)?.value)
        }
    }
}

/// ∫_Σ |J·n| dΣ at each time.
pub fn ideal_flux_distribution(
    field: &WaveField,
    surface: &Surface,
    times: &[f64],
    patch: Option<&PlanePatch>,
) -> Result<Vec<f64>> {
    let n = surface.normal();
    times
        .iter()
        .map(|&t| {
            surface_integral(field, surface, t, patch, &flux_options(), |x| field.current(x, t).total().dot(&n).abs())
        })
        .collect()
}

/// Probability mass the ideal flux carries through the surface within each bin.
pub fn ideal_bin_masses(
    field: &WaveField,
    surface: &Surface,
    bin_edges: &[f64],
    patch: Option<&PlanePatch>,
) -> Result<Vec<f64>> {
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-8, max_subdivisions: 200 };
    bin_edges
        .windows(2)
        .map(|w| {
            let mut failure = None;
            let r = integrate(
                |t: f64| match ideal_flux_distribution(field, surface, &[t], patch) {
                    Ok(v) => v[0],
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                w[0],
                w[1],
                &opts,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(r.value),
            }
        })
        .collect()
}

/// Uniform bins over [t0, t_max].
pub fn uniform_edges(t0: f64, t_max: f64, bins: usize) -> Result<Vec<f64>> {
    if !(t_max > t0) || bins == 0 {
        return Err(Error::invalid("bins", "need t_max > t0 and at least one bin"));
    }
    Ok((0..=bins).map(|i| t0 + (t_max - t0) * i as f64 / bins as f64).collect())
}

/// Binned crossing times of an ensemble with post-selection classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalHistogram {
    pub bin_edges: Vec<f64>,
    /// `by_order[k]` counts the (k+1)-th crossing of each trajectory.
    pub by_order: Vec<Vec<u64>>,
    /// Every crossing, any order.
    pub all: Vec<u64>,
    /// Every crossing with J·n > 0.
    pub all_positive: Vec<u64>,
    /// Every crossing with J·n < 0.
    pub all_negative: Vec<u64>,
    pub n_total: u64,
    /// Trajectories halted at a node or by a step failure.
    pub n_lost: u64,
    /// Trajectories that never crossed the surface before t_max.
    pub n_noarrival: u64,
    /// Latest first-arrival time observed.
    pub latest_first_arrival: Option<f64>,
}

impl ArrivalHistogram {
    pub fn new(bin_edges: Vec<f64>) -> Result<Self> {
        if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("bin_edges", "need at least two strictly increasing edges"));
        }
        let zeros = vec![0; bin_edges.len() - 1];
        Ok(Self {
            bin_edges,
            by_order: Vec::new(),
            all: zeros.clone(),
            all_positive: zeros.clone(),
            all_negative: zeros,
            n_total: 0,
            n_lost: 0,
            n_noarrival: 0,
            latest_first_arrival: None,
        })
    }

    pub fn bins(&self) -> usize {
        self.all.len()
    }

    /// First-arrival counts (zeros when nothing arrived).
    pub fn first(&self) -> Vec<u64> {
        self.by_order.first().cloned().unwrap_or_else(|| vec![0; self.bins()])
    }

    fn bin_of(&self, t: f64) -> Option<usize> {
        let (lo, hi) = (self.bin_edges[0], *self.bin_edges.last().unwrap());
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = self.bin_edges.partition_point(|&e| e <= t);
        Some(i.saturating_sub(1).min(self.bins() - 1))
    }

    /// Records one trajectory's crossing times and directions, in order.
    pub fn record(&mut self, crossings: &[(f64, i8)]) {
        self.n_total += 1;
        if crossings.is_empty() {
            self.n_noarrival += 1;
            return;
        }
        let first = crossings[0].0;
        self.latest_first_arrival = Some(self.latest_first_arrival.map_or(first, |l| l.max(first)));
        for (k, &(t, sign)) in crossings.iter().enumerate() {
            let Some(b) = self.bin_of(t) else { continue };
            while self.by_order.len() <= k {
                self.by_order.push(vec![0; self.bins()]);
            }
            self.by_order[k][b] += 1;
            self.all[b] += 1;
            if sign > 0 {
                self.all_positive[b] += 1;
            } else {
                self.all_negative[b] += 1;
            }
        }
    }

    pub fn record_lost(&mut self) {
        self.n_total += 1;
        self.n_lost += 1;
    }

    /// Commutative, associative combination of two partial histograms.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::GridMismatch("histograms have different bin edges".into()));
        }
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        while self.by_order.len() < other.by_order.len() {
            self.by_order.push(vec![0; self.bins()]);
        }
        for (a, b) in self.by_order.iter_mut().zip(&other.by_order) {
            add(a, b);
        }
        add(&mut self.all, &other.all);
        add(&mut self.all_positive, &other.all_positive);
        add(&mut self.all_negative, &other.all_negative);
        self.n_total += other.n_total;
        self.n_lost += other.n_lost;
        self.n_noarrival += other.n_noarrival;
        self.latest_first_arrival = match (self.latest_first_arrival, other.latest_first_arrival) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        Ok(())
    }

    /// Counts divided by n_total and bin width.
    pub fn density(&self, counts: &[u64]) -> Vec<f64> {
        let n = self.n_total.max(1) as f64;
        counts.iter().zip(self.bin_edges.windows(2)).map(|(&c, w)| c as f64 / (n * (w[1] - w[0]))).collect()
    }
}

/// Settings shared by every trajectory of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub t0: f64,
    pub t_max: f64,
    pub bins: usize,
    pub integrator: IntegratorOptions,
    /// Rejection-sampling box; the field support at t0 when absent.
    pub region: Option<SamplingBox>,
}

impl EnsembleConfig {
    pub fn new(t0: f64, t_max: f64) -> Self {
        Self { t0, t_max, bins: 200, integrator: IntegratorOptions::default(), region: None }
    }

    pub fn edges(&self) -> Result<Vec<f64>> {
        uniform_edges(self.t0, self.t_max, self.bins)
    }
}

/// Integrates one Born-sampled trajectory and returns its crossings, or `None` if it was
/// lost.
pub fn trajectory_crossings(
    sampler: &BornSampler<'_>,
    field: &WaveField,
    surface: &Surface,
    cfg: &EnsembleConfig,
    index: u64,
) -> Option<Vec<(f64, i8)>> {
    let x0 = sampler.sample(index).ok()?;
    let traj = integrate_trajectory(field, x0, cfg.t0, cfg.t_max, &cfg.integrator).ok()?;
    if traj.termination != Termination::Completed {
        return None;
    }
    Some(detect_crossings(&traj, surface).iter().map(|e| (e.time, e.direction)).collect())
}

/// Histogram of the trajectories with stream indices in `indices`.
pub fn run_ensemble(
    sampler: &BornSampler<'_>,
    field: &WaveField,
    surface: &Surface,
    cfg: &EnsembleConfig,
    indices: Range<u64>,
) -> Result<ArrivalHistogram> {
    let mut h = ArrivalHistogram::new(cfg.edges()?)?;
    for i in indices {
        match trajectory_crossings(sampler, field, surface, cfg, i) {
            Some(c) => h.record(&c),
            None => h.record_lost(),
        }
    }
    Ok(h)
}

/// First- and k-th-arrival histogram of `n` Born-distributed trajectories.
pub fn mc_first_arrival(
    field: &WaveField,
    surface: &Surface,
    n: u64,
    seed: u64,
    cfg: &EnsembleConfig,
) -> Result<ArrivalHistogram> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one trajectory"));
    }
    if !cfg.t_max.is_finite() {
        return Err(Error::invalid("t_max", "must be finite"));
    }
    let sampler = BornSampler::new(field, cfg.t0, seed, cfg.region)?;
    run_ensemble(&sampler, field, surface, cfg, 0..n)
}

/// Parameters of the closed-form waveguide arrival density.
#[derive(Debug, Clone, PartialEq)]
pub struct DdParams {
    /// Detection-plane distance in units of the longitudinal width.
    pub l: f64,
    pub lambda0: f64,
    pub tau_grid: Vec<f64>,
}

impl DdParams {
    pub fn new(l: f64, lambda0: f64, tau_grid: Vec<f64>) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("L", "detector distance must be positive"));
        }
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::invalid("lambda0", "normalisation must be positive"));
        }
        if tau_grid.iter().any(|&t| !(t >= 0.0)) || tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("tau_grid", "grid must be nonnegative and strictly increasing"));
        }
        Ok(Self { l, lambda0, tau_grid })
    }
}

/// (4L³/(λ0√π)) τ e^{−L²/(1+τ²)} / (1+τ²)^{5/2}.
pub fn dd_density(tau: f64, l: f64, lambda0: f64) -> f64 {
    let s = 1.0 + tau * tau;
    4.0 * l.powi(3) / (lambda0 * PI.sqrt()) * tau * (-l * l / s).exp() / s.powf(2.5)
}

pub fn dd_analytic(params: &DdParams) -> Vec<f64> {
    params.tau_grid.iter().map(|&t| dd_density(t, params.l, params.lambda0)).collect()
}

/// Location of the single maximum of the closed-form density: the positive root of
/// 4s² − (5 + 2L²)s + 2L² = 0 in s = 1 + τ².
pub fn dd_peak(l: f64) -> f64 {
    let b = 5.0 + 2.0 * l * l;
    let s = (b + (b * b - 32.0 * l * l).sqrt()) / 8.0;
    (s - 1.0).max(0.0).sqrt()
}

/// Spin-summed detector signal through a disk with its spin-term diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSignal {
    /// η ∫ J_z dΣ with the full Pauli current.
    pub values: Vec<f64>,
    /// η ∫ (convective J_z) dΣ.
    pub convective: Vec<f64>,
    /// η ∫ (spin J_z) dΣ, which vanishes over a complete azimuthal loop.
    pub spin_residual: Vec<f64>,
}

pub fn full_signal_distribution(
    field: &WaveguideSpinField,
    disk: &Surface,
    eta: f64,
    times: &[f64],
) -> Result<FullSignal> {
    if !matches!(disk, Surface::Disk { .. }) {
        return Err(Error::Precondition("full signal needs a disk spanning a complete azimuthal loop".into()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid("eta", "efficiency must lie in [0, 1]"));
    }
    let wf = WaveField::Waveguide(field.clone());
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 4000 };
    let mut out = FullSignal { values: Vec::new(), convective: Vec::new(), spin_residual: Vec::new() };
    for &t in times {
        let conv = surface_integral(&wf, disk, t, None, &opts, |x| wf.current(x, t).convective.z)?;
        let spin = surface_integral(&wf, disk, t, None, &opts, |x| wf.current(x, t).spin.z)?;
        let total = surface_integral(&wf, disk, t, None, &opts, |x| wf.current(x, t).total().z)?;
        out.values.push(eta * total);
        out.convective.push(eta * conv);
        out.spin_residual.push(eta * spin);
    }
    Ok(out)
}

/// How to estimate the half-space probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhichPathMethod {
    Quadrature,
    /// Fraction of `n` Born samples at time t with x ≥ 0.
    Samples {
        n: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhichPath {
    /// Probability of x ≥ 0 at time t, retrodicted as passage through the +a/2 slit.
    pub p_plus: f64,
    pub p_minus: f64,
    /// Mass each initial component places across x = 0 (largest of the two).
    pub overlap_mass: f64,
    /// Whether the x = 0 plane is a symmetry plane of the flow, so that the half-space
    /// probabilities retrodict the slit of passage.
    pub retrodictive: bool,
}

pub const OVERLAP_THRESHOLD: f64 = 1e-6;

fn component_spill(slit: &DoubleSlit, which: usize) -> Result<f64> {
    let p = &slit.packet;
    let line = |x: f64| {
        let pt = Vector3::new(x, p.center.y, p.center.z);
        slit.component_jets(&pt, 0.0)[which].value.norm_sqr()
    };
    let opts = QuadOptions::new(1e-300, 1e-12);
    let total = integrate(line, f64::NEG_INFINITY, f64::INFINITY, &opts)?.value;
    if total == 0.0 {
        return Ok(0.0);
    }
    let across = if which == 0 {
        integrate(line, f64::NEG_INFINITY, 0.0, &opts)?.value
    } else {
        integrate(line, 0.0, f64::INFINITY, &opts)?.value
    };
    Ok(across / total)
}

/// Half-space probabilities P(x ≥ 0) and P(x < 0) at time t.
pub fn which_path(field: &DoubleSlit, t: f64, method: WhichPathMethod) -> Result<WhichPath> {
    let overlap_mass = component_spill(field, 0)?.max(component_spill(field, 1)?);
    if overlap_mass >= OVERLAP_THRESHOLD {
        return Err(Error::Overlap { mass: overlap_mass });
    }
    let wf = WaveField::DoubleSlit(field.clone());
    let (p_plus, p_minus) = match method {
        WhichPathMethod::Quadrature => {
            // Both components share the packet's y and z factors, so the half-space ratio
            // is a line integral along x through the packet's mean position.
            let c = field.packet.mean_position(t);
            let line = |x: f64| wf.density(&Vector3::new(x, c.y, c.z), t);
            let opts = QuadOptions::new(1e-300, 1e-13);
            let plus = integrate(line, 0.0, f64::INFINITY, &opts)?.value;
            let minus = integrate(line, f64::NEG_INFINITY, 0.0, &opts)?.value;
            let norm = plus + minus;
            (plus / norm, minus / norm)
        }
        WhichPathMethod::Samples { n, seed } => {
            if n == 0 {
                return Err(Error::invalid("n", "need at least one sample"));
            }
            let sampler = BornSampler::new(&wf, t, seed, None)?;
            let mut plus = 0u64;
            for i in 0..n {
                if sampler.sample(i)?.x >= 0.0 {
                    plus += 1;
                }
            }
            let p = plus as f64 / n as f64;
            (p, 1.0 - p)
        }
    };
    Ok(WhichPath { p_plus, p_minus, overlap_mass, retrodictive: is_retrodictive(field) })
}

/// |α| = |β| with χ ∈ {0, π}, or a single open slit.
pub fn is_retrodictive(field: &DoubleSlit) -> bool {
    let [a, b] = field.amplitudes;
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return true;
    }
    let equal = (a.norm() - b.norm()).abs() <= 1e-12 * a.norm().max(b.norm());
    let phase = (b / a).arg() + field.relative_phase;
    let s = libm::sin(phase);
    equal && s.abs() <= 1e-12
}
