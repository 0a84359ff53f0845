//! Guidance-law trajectories: adaptive Dormand–Prince 5(4) integration of ẋ = J/ρ with
//! cubic Hermite dense output, surface-crossing detection, and exact Born-rule sampling
//! of initial positions.

use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use crate::fields::SamplingBox;
use crate::fields::WaveField;
use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Crossing times are refined by bisection to this width.
pub const CROSSING_TIME_TOL: f64 = 1e-10;

/// Number of Hermite sub-intervals scanned per accepted step when looking for crossings.
const SCAN_SUBDIVISIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Local error tolerance per step (mixed absolute/relative, per unit step).
    pub tol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_steps: 1_000_000, min_step: 1e-12, max_step: f64::INFINITY }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The trajectory ran into a node of the field.
    NodalPoint,
    /// Step size underflow or step budget exhausted.
    StepFailure,
}

/// Accepted integration nodes with velocities, enough for Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vector3<f64>>,
    pub velocities: Vec<Vector3<f64>>,
    pub termination: Termination,
    pub rejected_steps: usize,
    /// Smallest density met at an accepted node.
    pub min_density: f64,
}

impl Trajectory {
    pub fn accepted_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds its initial point")
    }

    pub fn end_position(&self) -> Vector3<f64> {
        *self.positions.last().expect("trajectory holds its initial point")
    }

    /// Dense output at time `t`, `None` outside the integrated span.
    pub fn position_at(&self, t: f64) -> Option<Vector3<f64>> {
        if !(t >= self.start_time() && t <= self.end_time()) {
            return None;
        }
        let i = match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => return Some(self.positions[i]),
            Err(i) => i - 1,
        };
        Some(self.hermite(i, t))
    }

    fn hermite(&self, i: usize, t: f64) -> Vector3<f64> {
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.positions[i] * h00
            + self.velocities[i] * (h10 * h)
            + self.positions[i + 1] * h01
            + self.velocities[i + 1] * (h11 * h)
    }
}

fn step_scale(x: &Vector3<f64>, y: &Vector3<f64>, i: usize) -> f64 {
    1.0 + x[i].abs().max(y[i].abs())
}

/// Integrates the guidance equation from (x0, t0) to t1 > t0.
///
/// A node met along the way stops the integration and returns the partial trajectory
/// flagged [`Termination::NodalPoint`]; a node at the starting point is an error.
pub fn integrate_trajectory(
    field: &WaveField,
    x0: Vector3<f64>,
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::invalid("t1", "final time must be finite and after the initial time"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", "tolerance must be positive"));
    }
    let v0 = field.velocity(&x0, t0)?;
    let mut traj = Trajectory {
        times: alloc::vec![t0],
        positions: alloc::vec![x0],
        velocities: alloc::vec![v0],
        termination: Termination::Completed,
        rejected_steps: 0,
        min_density: field.density(&x0, t0),
    };
    let span = t1 - t0;
    let speed = v0.norm().max(1.0);
    let mut h = (1e-2 * span).min(opts.tol.powf(0.25) / speed).min(opts.max_step).max(opts.min_step);
    let (mut t, mut x, mut k1) = (t0, x0, v0);
    let mut steps = 0;
    while t < t1 {
        if steps >= opts.max_steps {
            traj.termination = Termination::StepFailure;
            break;
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        match dp_step(field, t, &x, &k1, h) {
            Ok((xn, kn, err_vec)) => {
                let unit = h.min(1.0);
                let err =
                    (0..3).map(|i| err_vec[i].abs() / (opts.tol * unit * step_scale(&x, &xn, i))).fold(0.0, f64::max);
                if err <= 1.0 {
                    t = if last { t1 } else { t + h };
                    x = xn;
                    k1 = kn;
                    traj.times.push(t);
                    traj.positions.push(x);
                    traj.velocities.push(k1);
                    traj.min_density = traj.min_density.min(field.density(&x, t));
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = (h * grow).min(opts.max_step);
                } else {
                    traj.rejected_steps += 1;
                    h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                    if h < opts.min_step {
                        traj.termination = Termination::StepFailure;
                        break;
                    }
                }
            }
            Err(Error::NodalPoint { .. }) => {
                traj.rejected_steps += 1;
                h *= 0.25;
                if h < opts.min_step {
                    traj.termination = Termination::NodalPoint;
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

type StepOutcome = (Vector3<f64>, Vector3<f64>, Vector3<f64>);

fn dp_step(field: &WaveField, t: f64, x: &Vector3<f64>, k1: &Vector3<f64>, h: f64) -> Result<StepOutcome> {
    let v = |dt: f64, p: Vector3<f64>| field.velocity(&p, t + dt);
    let k2 = v(C2 * h, x + k1 * (h * A21))?;
    let k3 = v(C3 * h, x + (k1 * A31 + k2 * A32) * h)?;
    let k4 = v(C4 * h, x + (k1 * A41 + k2 * A42 + k3 * A43) * h)?;
    let k5 = v(C5 * h, x + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h)?;
    let k6 = v(h, x + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h)?;
    let xn = x + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
    let k7 = v(h, xn)?;
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    Ok((xn, k7, err))
}

/// Detection surfaces with unit normal along +z or +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    /// The plane z = `z`, normal +ẑ.
    PlaneZ { z: f64 },
    /// The plane x = `x`, normal +x̂.
    PlaneX { x: f64 },
    /// Disk of radius `radius` centred on the z-axis in the plane z = `z`, normal +ẑ.
    Disk { z: f64, radius: f64 },
}

impl Surface {
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        match *self {
            Surface::PlaneZ { z } | Surface::Disk { z, .. } => p.z - z,
            Surface::PlaneX { x } => p.x - x,
        }
    }

    pub fn normal(&self) -> Vector3<f64> {
        match self {
            Surface::PlaneX { .. } => Vector3::x(),
            _ => Vector3::z(),
        }
    }

    /// Whether a point on the supporting plane belongs to the surface.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match *self {
            Surface::Disk { radius, .. } => p.x.hypot(p.y) <= radius,
            _ => true,
        }
    }
}

/// A strict sign change of the signed distance along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub time: f64,
    pub position: Vector3<f64>,
    /// +1 when crossing along the surface normal, −1 against it.
    pub direction: i8,
    /// 1 for the first crossing, 2 for the second, and so on.
    pub order_index: usize,
}

/// All crossings of `surface`, in time order. Contact without a sign change is not a crossing.
pub fn detect_crossings(traj: &Trajectory, surface: &Surface) -> Vec<CrossingEvent> {
    let mut events = Vec::new();
    let dist = |t: f64| surface.signed_distance(&traj.position_at(t).expect("time inside span"));
    let mut last: Option<(f64, f64)> = None;
    let mut visit = |t: f64, d: f64, events: &mut Vec<CrossingEvent>| {
        if d == 0.0 {
            return;
        }
        if let Some((tl, dl)) = last {
            if dl.signum() != d.signum() {
                let (mut a, mut b) = (tl, t);
                while b - a > CROSSING_TIME_TOL {
                    let mid = 0.5 * (a + b);
                    let dm = dist(mid);
                    if dm == 0.0 {
                        a = mid;
                        b = mid;
                    } else if dm.signum() == dl.signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let time = 0.5 * (a + b);
                let position = traj.position_at(time).expect("time inside span");
                if surface.contains(&position) {
                    events.push(CrossingEvent {
                        time,
                        position,
                        direction: if d > 0.0 { 1 } else { -1 },
                        order_index: events.len() + 1,
                    });
                }
            }
        }
        last = Some((t, d));
    };
    visit(traj.times[0], surface.signed_distance(&traj.positions[0]), &mut events);
    for i in 0..traj.times.len().saturating_sub(1) {
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        for j in 1..=SCAN_SUBDIVISIONS {
            let t = if j == SCAN_SUBDIVISIONS { t1 } else { t0 + (t1 - t0) * j as f64 / SCAN_SUBDIVISIONS as f64 };
            let p = if j == SCAN_SUBDIVISIONS { traj.positions[i + 1] } else { traj.hermite(i, t) };
            visit(t, surface.signed_distance(&p), &mut events);
        }
    }
    events
}

/// The earliest crossing of `surface`, if any.
pub fn first_arrival(traj: &Trajectory, surface: &Surface) -> Option<CrossingEvent> {
    detect_crossings(traj, surface).into_iter().next()
}

/// Random stream for sample `index` of an ensemble seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const PILOT_PROPOSALS: usize = 100_000;
const MIN_ACCEPTANCE: f64 = 1e-4;

/// Exact rejection sampler for |ψ(·, t0)|² restricted to a box.
#[derive(Debug, Clone)]
pub struct BornSampler<'a> {
    field: &'a WaveField,
    t0: f64,
    region: SamplingBox,
    bound: f64,
    seed: u64,
}

impl<'a> BornSampler<'a> {
    /// Uses the field's default ±6-width box when `region` is `None`. Fails with
    /// [`Error::SamplingBox`] when a pilot run accepts less than 1e-4 of its proposals.
    pub fn new(field: &'a WaveField, t0: f64, seed: u64, region: Option<SamplingBox>) -> Result<Self> {
        let region = match region {
            Some(b) => b,
            None => field
                .support(t0)
                .ok_or_else(|| Error::Precondition("field has no finite support; supply a sampling box".into()))?,
        };
        let bound = field.density_bound(t0).ok_or_else(|| Error::Precondition("field has no density bound".into()))?;
        let sampler = Self { field, t0, region, bound, seed };
        let mut rng = sample_rng(seed, u64::MAX);
        let accepted = (0..PILOT_PROPOSALS).filter(|_| sampler.propose(&mut rng).is_some()).count();
        let rate = accepted as f64 / PILOT_PROPOSALS as f64;
        if rate < MIN_ACCEPTANCE {
            return Err(Error::SamplingBox { rate });
        }
        Ok(sampler)
    }

    pub fn region(&self) -> &SamplingBox {
        &self.region
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Option<Vector3<f64>> {
        let d = self.region.hi - self.region.lo;
        let p = self.region.lo
            + Vector3::new(rng.random::<f64>() * d.x, rng.random::<f64>() * d.y, rng.random::<f64>() * d.z);
        let u: f64 = rng.random();
        (u * self.bound < self.field.density(&p, self.t0)).then_some(p)
    }

    /// Draws sample `index` from its own stream, so results do not depend on ordering.
    pub fn sample(&self, index: u64) -> Result<Vector3<f64>> {
        let mut rng = sample_rng(self.seed, index);
        let cap = (10.0 / MIN_ACCEPTANCE * 100.0) as usize;
        for _ in 0..cap {
            if let Some(p) = self.propose(&mut rng) {
                return Ok(p);
            }
        }
        Err(Error::SamplingBox { rate: 1.0 / cap as f64 })
    }
}

/// `n` independent Born-distributed initial positions at time t0.
pub fn sample_initial(
    field: &WaveField,
    t0: f64,
    n: usize,
    seed: u64,
    region: Option<SamplingBox>,
) -> Result<Vec<Vector3<f64>>> {
    let sampler = BornSampler::new(field, t0, seed, region)?;
    (0..n as u64).map(|i| sampler.sample(i)).collect()
}
