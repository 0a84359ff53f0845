//! Wave fields and the local quantities they carry: density, phase, guidance current
//! (including the Pauli spin term) and quantum potential.
//!
//! Every field is a scalar amplitude, optionally multiplied by a constant spinor. All
//! variants are closed-form free (or guided) solutions, so values, gradients and
//! Laplacians are exact.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, DENSITY_FLOOR};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Unit vector giving the spin polarisation direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinVector(Vector3<f64>);

impl SpinVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("spin", "spin vector must have unit length within 1e-12"));
        }
        Ok(Self(v))
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }

    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }
}

/// Two-component spinor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor(pub [C; 2]);

impl Spinor {
    /// The spinor whose polarisation vector χ†σχ equals `s`.
    pub fn aligned(s: &SpinVector) -> Self {
        let v = s.vector();
        let theta = v.z.clamp(-1.0, 1.0).acos();
        let phi = v.y.atan2(v.x);
        Self([C::new((0.5 * theta).cos(), 0.0), C::from_polar((0.5 * theta).sin(), phi)])
    }

    /// Polarisation vector χ†σχ.
    pub fn polarisation(&self) -> Vector3<f64> {
        let [a, b] = self.0;
        let ab = a.conj() * b;
        Vector3::new(2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr())
    }
}

/// Value, gradient and Laplacian of a scalar amplitude at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: C,
    pub grad: Vector3<C>,
    pub lap: C,
}

impl Jet {
    fn zero() -> Self {
        Self { value: C::new(0.0, 0.0), grad: Vector3::zeros(), lap: C::new(0.0, 0.0) }
    }

    fn scaled(self, c: C) -> Self {
        Self { value: self.value * c, grad: self.grad * c, lap: self.lap * c }
    }

    fn plus(self, other: Self) -> Self {
        Self { value: self.value + other.value, grad: self.grad + other.grad, lap: self.lap + other.lap }
    }
}

/// Axis-aligned box used for sampling and for default integration windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBox {
    pub lo: Vector3<f64>,
    pub hi: Vector3<f64>,
}

impl SamplingBox {
    pub fn new(lo: Vector3<f64>, hi: Vector3<f64>) -> Result<Self> {
        if (0..3).any(|i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::invalid("box", "each lower bound must be finite and below its upper bound"));
        }
        Ok(Self { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        let d = self.hi - self.lo;
        d.x * d.y * d.z
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { lo: self.lo.inf(&other.lo), hi: self.hi.sup(&other.hi) }
    }
}

fn check_mass(mass: f64) -> Result<()> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid("mass", "mass must be positive and finite"));
    }
    Ok(())
}

/// Monochromatic plane wave A e^{i(k·x − ωt)} with ω = k²/2m.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    pub k: Vector3<f64>,
    pub amplitude: C,
    pub mass: f64,
}

impl PlaneWave {
    pub fn new(k: Vector3<f64>, amplitude: C, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        if !k.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("k", "wavevector must be finite"));
        }
        Ok(Self { k, amplitude, mass })
    }

    pub fn energy(&self) -> f64 {
        self.k.norm_squared() / (2.0 * self.mass)
    }

    fn jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        let value = self.amplitude * (I * (self.k.dot(x) - self.energy() * t)).exp();
        let ik = self.k.map(|c| I * c);
        Jet { value, grad: ik * value, lap: -value * self.k.norm_squared() }
    }
}

/// Freely spreading isotropic Gaussian packet. `sigma` is the initial position spread of
/// |ψ|² along each axis; the packet is centred on `center` at t = 0 with mean momentum
/// `momentum`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    pub center: Vector3<f64>,
    pub sigma: f64,
    pub momentum: Vector3<f64>,
    pub mass: f64,
    pub amplitude: C,
}

impl GaussianPacket {
    pub fn new(center: Vector3<f64>, sigma: f64, momentum: Vector3<f64>, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "packet width must be positive"));
        }
        Ok(Self { center, sigma, momentum, mass, amplitude: C::new(1.0, 0.0) })
    }

    fn spread(&self, t: f64) -> C {
        C::new(1.0, t / (2.0 * self.mass * self.sigma * self.sigma))
    }

    /// Position spread of |ψ|² along each axis at time t.
    pub fn width(&self, t: f64) -> f64 {
        self.sigma * self.spread(t).norm()
    }

    pub fn mean_position(&self, t: f64) -> Vector3<f64> {
        self.center + self.momentum * (t / self.mass)
    }

    fn jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        let c = self.spread(t);
        let a = (c * 4.0 * self.sigma * self.sigma).inv();
        let u = x - self.mean_position(t);
        let rel = x - self.center;
        let norm = (2.0 * PI * self.sigma * self.sigma).powf(-0.75) * c.powf(-1.5);
        let exponent = -a * u.norm_squared() + I * self.momentum.dot(&rel)
            - I * (self.momentum.norm_squared() * t / (2.0 * self.mass));
        let value = self.amplitude * norm * exponent.exp();
        let dlog: Vector3<C> = Vector3::from_fn(|i, _| -a * 2.0 * u[i] + I * self.momentum[i]);
        let lap_log = -a * 6.0;
        let lap = value * (lap_log + dlog.iter().map(|d| d * d).sum::<C>());
        Jet { value, grad: dlog * value, lap }
    }

    fn peak_density(&self, t: f64) -> f64 {
        let w = self.width(t);
        self.amplitude.norm_sqr() * (2.0 * PI * w * w).powf(-1.5)
    }

    fn support(&self, t: f64) -> SamplingBox {
        let c = self.mean_position(t);
        let h = Vector3::repeat(6.0 * self.width(t));
        SamplingBox { lo: c - h, hi: c + h }
    }
}

/// Two copies of a packet displaced to x = ±a/2 with amplitudes (α, β e^{iχ}).
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleSlit {
    pub separation: f64,
    pub packet: GaussianPacket,
    pub relative_phase: f64,
    pub amplitudes: [C; 2],
}

impl DoubleSlit {
    pub fn new(separation: f64, packet: GaussianPacket, relative_phase: f64, amplitudes: [C; 2]) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(Error::invalid("separation", "slit separation must be positive"));
        }
        if amplitudes.iter().all(|a| a.norm() == 0.0) {
            return Err(Error::invalid("amplitudes", "at least one slit amplitude must be nonzero"));
        }
        Ok(Self { separation, packet, relative_phase, amplitudes })
    }

    /// Equal-weight double slit with amplitudes 1/√2 each.
    pub fn symmetric(separation: f64, packet: GaussianPacket, relative_phase: f64) -> Result<Self> {
        let h = C::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(separation, packet, relative_phase, [h, h])
    }

    fn offset(&self) -> Vector3<f64> {
        Vector3::new(0.5 * self.separation, 0.0, 0.0)
    }

    fn weights(&self) -> [C; 2] {
        [self.amplitudes[0], self.amplitudes[1] * C::from_polar(1.0, self.relative_phase)]
    }

    /// Jets of the two component packets (already weighted): `[+a/2, −a/2]`.
    pub fn component_jets(&self, x: &Vector3<f64>, t: f64) -> [Jet; 2] {
        let [wp, wm] = self.weights();
        [self.packet.jet(&(x - self.offset()), t).scaled(wp), self.packet.jet(&(x + self.offset()), t).scaled(wm)]
    }

    fn jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        let [a, b] = self.component_jets(x, t);
        a.plus(b)
    }
}

/// Linear combination Σ cᵢ ψᵢ of scalar fields sharing one mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition {
    terms: Vec<(C, WaveField)>,
    mass: f64,
}

impl Superposition {
    pub fn new(terms: Vec<(C, WaveField)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::invalid("terms", "superposition needs at least one term"))?;
        let mass = first.1.mass();
        for (_, f) in &terms {
            if f.is_spinor() {
                return Err(Error::invalid("terms", "superposition members must be scalar fields"));
            }
            if (f.mass() - mass).abs() > 1e-12 * mass {
                return Err(Error::invalid("terms", "superposition members must share one mass"));
            }
        }
        Ok(Self { terms, mass })
    }

    pub fn terms(&self) -> &[(C, WaveField)] {
        &self.terms
    }

    fn jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        self.terms.iter().fold(Jet::zero(), |acc, (c, f)| acc.plus(f.scalar_jet(x, t).scaled(*c)))
    }
}

/// Longitudinal envelope of the guided spin field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongitudinalProfile {
    /// First excited state z·e^{−z²/2σ²} released from a hard wall at z = 0 (field vanishes for z < 0).
    #[default]
    Odd,
    /// Ground-state Gaussian e^{−z²/2σ²} on the whole line.
    Even,
}

/// Spin-polarised field χ_ŝ Φ(x,t) in a cylindrical guide: Gaussian transverse mode of
/// width `width` times a freely spreading longitudinal envelope of width `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSpinField {
    pub spin: SpinVector,
    pub width: f64,
    pub sigma: f64,
    pub profile: LongitudinalProfile,
    pub mass: f64,
}

impl WaveguideSpinField {
    pub fn new(spin: SpinVector, width: f64, sigma: f64, profile: LongitudinalProfile, mass: f64) -> Result<Self> {
        check_mass(mass)?;
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("width", "transverse width must be positive"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "longitudinal width must be positive"));
        }
        Ok(Self { spin, width, sigma, profile, mass })
    }

    /// Unit transverse and longitudinal widths, unit mass, odd envelope.
    pub fn normalized(spin: SpinVector) -> Self {
        Self { spin, width: 1.0, sigma: 1.0, profile: LongitudinalProfile::Odd, mass: 1.0 }
    }

    fn tau(&self, t: f64) -> f64 {
        t / (self.mass * self.sigma * self.sigma)
    }

    /// Longitudinal envelope and its first two z-derivatives.
    pub fn longitudinal(&self, z: f64, t: f64) -> [C; 3] {
        let c = C::new(1.0, self.tau(t));
        let q = (c * self.sigma * self.sigma).inv();
        let g = (-q * z * z * 0.5).exp();
        match self.profile {
            LongitudinalProfile::Odd => {
                if z < 0.0 {
                    return [C::new(0.0, 0.0); 3];
                }
                let n = 2.0 / (PI.powf(0.25) * self.sigma.powf(1.5));
                let a = c.powf(-1.5) * n;
                [a * g * z, a * g * (-q * z * z + 1.0), a * g * q * z * (q * z * z - 3.0)]
            }
            LongitudinalProfile::Even => {
                let a = c.powf(-0.5) * (PI * self.sigma * self.sigma).powf(-0.25);
                [a * g, -a * g * q * z, a * g * (q * q * z * z - q)]
            }
        }
    }

    fn transverse(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        let w2 = self.width * self.width;
        let rho2 = x * x + y * y;
        let tv = (PI * w2).powf(-0.5) * (-rho2 / (2.0 * w2)).exp();
        (tv, -x / w2 * tv, -y / w2 * tv, (rho2 / (w2 * w2) - 2.0 / w2) * tv)
    }

    fn jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        let [z0, z1, z2] = self.longitudinal(x.z, t);
        let (tv, tx, ty, tl) = self.transverse(x.x, x.y);
        Jet { value: z0 * tv, grad: Vector3::new(z0 * tx, z0 * ty, z1 * tv), lap: z0 * tl + z2 * tv }
    }

    fn peak_density(&self, t: f64) -> f64 {
        let tau = self.tau(t);
        let transverse = 1.0 / (PI * self.width * self.width);
        let longitudinal = match self.profile {
            LongitudinalProfile::Odd => 4.0 / (PI.sqrt() * self.sigma) * (-1.0f64).exp() / (1.0 + tau * tau).sqrt(),
            LongitudinalProfile::Even => 1.0 / (PI.sqrt() * self.sigma * (1.0 + tau * tau).sqrt()),
        };
        transverse * longitudinal
    }

    fn support(&self, t: f64) -> SamplingBox {
        let s = self.sigma * (1.0 + self.tau(t).powi(2)).sqrt();
        let r = 6.0 * self.width * core::f64::consts::FRAC_1_SQRT_2;
        let (zlo, zhi) = match self.profile {
            LongitudinalProfile::Odd => (0.0, 6.0 * s),
            LongitudinalProfile::Even => {
                (-6.0 * s * core::f64::consts::FRAC_1_SQRT_2, 6.0 * s * core::f64::consts::FRAC_1_SQRT_2)
            }
        };
        SamplingBox { lo: Vector3::new(-r, -r, zlo), hi: Vector3::new(r, r, zhi) }
    }
}

/// Evaluatable wave function ψ(x,t), scalar or two-component.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveField {
    PlaneWave(PlaneWave),
    Superposition(Superposition),
    GaussianPacket(GaussianPacket),
    DoubleSlit(DoubleSlit),
    Waveguide(WaveguideSpinField),
}

/// Guidance current split into its convective part Im(ψ†∇ψ)/m and the spin part ∇×(ψ†σψ)/2m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCurrent {
    pub convective: Vector3<f64>,
    pub spin: Vector3<f64>,
}

impl PauliCurrent {
    pub fn total(&self) -> Vector3<f64> {
        self.convective + self.spin
    }
}

/// All local quantities of a field at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Components of ψ; only the first is meaningful for scalar fields.
    pub psi: [C; 2],
    pub grad_psi: [Vector3<C>; 2],
    pub components: usize,
    pub density: f64,
    /// Phase S of the (envelope) amplitude, principal value.
    pub phase: f64,
    pub current: PauliCurrent,
    /// −∇²|ψ|/(2m|ψ|); NaN at or below the density floor.
    pub quantum_potential: f64,
    pub mass: f64,
}

impl FieldSample {
    pub fn velocity(&self) -> Result<Vector3<f64>> {
        if self.density <= DENSITY_FLOOR {
            return Err(Error::NodalPoint { density: self.density });
        }
        Ok(self.current.total() / self.density)
    }
}

impl WaveField {
    pub fn mass(&self) -> f64 {
        match self {
            WaveField::PlaneWave(p) => p.mass,
            WaveField::Superposition(s) => s.mass,
            WaveField::GaussianPacket(g) => g.mass,
            WaveField::DoubleSlit(d) => d.packet.mass,
            WaveField::Waveguide(w) => w.mass,
        }
    }

    pub fn is_spinor(&self) -> bool {
        matches!(self, WaveField::Waveguide(_))
    }

    pub fn spinor(&self) -> Option<Spinor> {
        match self {
            WaveField::Waveguide(w) => Some(Spinor::aligned(&w.spin)),
            _ => None,
        }
    }

    /// Jet of the scalar amplitude (the envelope Φ for spinor fields).
    pub fn scalar_jet(&self, x: &Vector3<f64>, t: f64) -> Jet {
        match self {
            WaveField::PlaneWave(p) => p.jet(x, t),
            WaveField::Superposition(s) => s.jet(x, t),
            WaveField::GaussianPacket(g) => g.jet(x, t),
            WaveField::DoubleSlit(d) => d.jet(x, t),
            WaveField::Waveguide(w) => w.jet(x, t),
        }
    }

    pub fn density(&self, x: &Vector3<f64>, t: f64) -> f64 {
        self.scalar_jet(x, t).value.norm_sqr()
    }

    /// Pauli/Gordon current with its convective and spin parts.
    pub fn current(&self, x: &Vector3<f64>, t: f64) -> PauliCurrent {
        let jet = self.scalar_jet(x, t);
        self.current_from_jet(&jet)
    }

    fn current_from_jet(&self, jet: &Jet) -> PauliCurrent {
        let m = self.mass();
        let Some(chi) = self.spinor() else {
            let convective = jet.grad.map(|g| (jet.value.conj() * g).im) / m;
            return PauliCurrent { convective, spin: Vector3::zeros() };
        };
        let psi = [chi.0[0] * jet.value, chi.0[1] * jet.value];
        let grad = [jet.grad * chi.0[0], jet.grad * chi.0[1]];
        let convective = Vector3::from_fn(|j, _| (psi[0].conj() * grad[0][j] + psi[1].conj() * grad[1][j]).im / m);
        // ∂_j (ψ†σ_k ψ) = 2 Re(ψ†σ_k ∂_jψ)
        let d = |k: usize, j: usize| -> f64 {
            let (a, b) = (grad[0][j], grad[1][j]);
            let sigma_dpsi = match k {
                0 => [b, a],
                1 => [-I * b, I * a],
                _ => [a, -b],
            };
            2.0 * (psi[0].conj() * sigma_dpsi[0] + psi[1].conj() * sigma_dpsi[1]).re
        };
        let curl = Vector3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
        PauliCurrent { convective, spin: curl / (2.0 * m) }
    }

    /// All local quantities at (x, t).
    pub fn evaluate(&self, x: &Vector3<f64>, t: f64) -> FieldSample {
        let jet = self.scalar_jet(x, t);
        let (psi, grad_psi, components) = match self.spinor() {
            None => ([jet.value, C::new(0.0, 0.0)], [jet.grad, Vector3::zeros()], 1),
            Some(chi) => ([chi.0[0] * jet.value, chi.0[1] * jet.value], [jet.grad * chi.0[0], jet.grad * chi.0[1]], 2),
        };
        let density = jet.value.norm_sqr();
        FieldSample {
            psi,
            grad_psi,
            components,
            density,
            phase: jet.value.arg(),
            current: self.current_from_jet(&jet),
            quantum_potential: quantum_potential_of(&jet, self.mass()).unwrap_or(f64::NAN),
            mass: self.mass(),
        }
    }

    /// Guidance velocity J/ρ.
    pub fn velocity(&self, x: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
        let jet = self.scalar_jet(x, t);
        let density = jet.value.norm_sqr();
        if density <= DENSITY_FLOOR {
            return Err(Error::NodalPoint { density });
        }
        Ok(self.current_from_jet(&jet).total() / density)
    }

    /// Energy for stationary fields (every plane-wave component at one energy).
    pub fn energy(&self) -> Option<f64> {
        match self {
            WaveField::PlaneWave(p) => Some(p.energy()),
            WaveField::Superposition(s) => {
                let e = s.terms[0].1.energy()?;
                s.terms.iter().skip(1).try_for_each(|(_, f)| {
                    let ei = f.energy()?;
                    ((ei - e).abs() <= 1e-12 * e.abs().max(1.0)).then_some(())
                })?;
                Some(e)
            }
            _ => None,
        }
    }

    /// Rigorous upper bound on |ψ|² at time t (`None` for non-normalizable fields that
    /// are not bounded in closed form).
    pub fn density_bound(&self, t: f64) -> Option<f64> {
        match self {
            WaveField::PlaneWave(p) => Some(p.amplitude.norm_sqr()),
            WaveField::GaussianPacket(g) => Some(g.peak_density(t)),
            WaveField::DoubleSlit(d) => {
                let s = d.amplitudes[0].norm() + d.amplitudes[1].norm();
                Some(s * s * d.packet.peak_density(t))
            }
            WaveField::Superposition(s) => {
                let mut sum = 0.0;
                for (c, f) in &s.terms {
                    sum += c.norm() * f.density_bound(t)?.sqrt();
                }
                Some(sum * sum)
            }
            WaveField::Waveguide(w) => Some(w.peak_density(t)),
        }
    }

    /// Box holding all but a negligible fraction of the mass at time t (±6 widths).
    /// `None` for fields without a finite support scale.
    pub fn support(&self, t: f64) -> Option<SamplingBox> {
        match self {
            WaveField::PlaneWave(_) => None,
            WaveField::GaussianPacket(g) => Some(g.support(t)),
            WaveField::DoubleSlit(d) => {
                let s = d.packet.support(t);
                let o = d.offset();
                Some(SamplingBox { lo: s.lo - o, hi: s.hi + o })
            }
            WaveField::Superposition(s) => {
                let mut it = s.terms.iter().map(|(_, f)| f.support(t));
                let first = it.next()??;
                it.try_fold(first, |acc, b| Some(acc.union(&b?)))
            }
            WaveField::Waveguide(w) => Some(w.support(t)),
        }
    }
}

fn quantum_potential_of(jet: &Jet, mass: f64) -> Option<f64> {
    let density = jet.value.norm_sqr();
    if density <= DENSITY_FLOOR {
        return None;
    }
    let dlog = jet.grad / jet.value;
    let ds = dlog.map(|c| c.im);
    Some(-((jet.lap / jet.value).re + ds.norm_squared()) / (2.0 * mass))
}

/// Every local quantity of the field at (x, t).
pub fn evaluate_field(field: &WaveField, x: &Vector3<f64>, t: f64) -> FieldSample {
    field.evaluate(x, t)
}

/// Pauli/Gordon current at (x, t).
pub fn pauli_current(field: &WaveField, x: &Vector3<f64>, t: f64) -> PauliCurrent {
    field.current(x, t)
}

/// Quantum potential −∇²|ψ|/(2m|ψ|) at (x, t).
pub fn quantum_potential(field: &WaveField, x: &Vector3<f64>, t: f64) -> Result<f64> {
    let jet = field.scalar_jet(x, t);
    quantum_potential_of(&jet, field.mass()).ok_or(Error::NodalPoint { density: jet.value.norm_sqr() })
}

/// Effective wavevector ∇S (the phase gradient) at (x, t).
pub fn effective_wavevector(field: &WaveField, x: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    let jet = field.scalar_jet(x, t);
    let density = jet.value.norm_sqr();
    if density <= DENSITY_FLOOR {
        return Err(Error::NodalPoint { density });
    }
    Ok((jet.grad / jet.value).map(|c| c.im))
}

/// Two equal-energy plane waves e^{ik₁·x} + α e^{ik₂·x}.
#[derive(Debug, Clone, PartialEq)]
pub struct BackflowPair {
    pub k1: Vector3<f64>,
    pub k2: Vector3<f64>,
    pub alpha: C,
    pub mass: f64,
    field: WaveField,
}

/// Builds the two-plane-wave superposition. Requires k₁z > 0, k₂z > 0 and |k₁| = |k₂|.
pub fn backflow_pair(k1: Vector3<f64>, k2: Vector3<f64>, alpha: C, mass: f64) -> Result<BackflowPair> {
    check_mass(mass)?;
    if !(k1.z > 0.0) {
        return Err(Error::invalid("k1", "k1z must be positive"));
    }
    if !(k2.z > 0.0) {
        return Err(Error::invalid("k2", "k2z must be positive"));
    }
    let (n1, n2) = (k1.norm(), k2.norm());
    if (n1 - n2).abs() > 1e-12 * n1.max(n2) {
        return Err(Error::invalid("k2", "both waves must carry the same energy (|k1| = |k2|)"));
    }
    let one = C::new(1.0, 0.0);
    let field = WaveField::Superposition(Superposition::new(alloc::vec![
        (one, WaveField::PlaneWave(PlaneWave::new(k1, one, mass)?)),
        (alpha, WaveField::PlaneWave(PlaneWave::new(k2, one, mass)?)),
    ])?);
    Ok(BackflowPair { k1, k2, alpha, mass, field })
}

impl BackflowPair {
    /// Pair with both wavevectors in the x–z plane at polar angles `theta1`, `theta2` from ẑ.
    pub fn from_angles(k: f64, theta1: f64, theta2: f64, alpha: Option<C>, mass: f64) -> Result<Self> {
        let k1 = Vector3::new(k * theta1.sin(), 0.0, k * theta1.cos());
        let k2 = Vector3::new(k * theta2.sin(), 0.0, k * theta2.cos());
        let alpha = alpha.unwrap_or_else(|| C::new(-(1.0 + k1.z / k2.z) / 2.0, 0.0));
        backflow_pair(k1, k2, alpha, mass)
    }

    pub fn field(&self) -> &WaveField {
        &self.field
    }

    pub fn ratio(&self) -> f64 {
        self.k1.z / self.k2.z
    }

    /// f(|α|) = |α|² − (1+r)|α| + r, negative exactly on the backflow window.
    pub fn backflow_polynomial(&self) -> f64 {
        let a = self.alpha.norm();
        let r = self.ratio();
        a * a - (1.0 + r) * a + r
    }

    /// The real α minimising J_z at the origin: −(1 + k₁z/k₂z)/2.
    pub fn alpha_min(&self) -> f64 {
        -(1.0 + self.ratio()) / 2.0
    }

    /// Closed-form J_z at the origin.
    pub fn origin_current_z(&self) -> f64 {
        let (a, b) = (self.k1.z, self.k2.z);
        (a + self.alpha.norm_sqr() * b + self.alpha.re * (a + b)) / self.mass
    }

    pub fn effective_wavevector(&self, x0: &Vector3<f64>) -> Result<Vector3<f64>> {
        effective_wavevector(&self.field, x0, 0.0)
    }

    pub fn quantum_potential(&self, x0: &Vector3<f64>) -> Result<f64> {
        quantum_potential(&self.field, x0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(field: &WaveField, x: Vector3<f64>, t: f64) {
        let h = 1e-5;
        let jet = field.scalar_jet(&x, t);
        let mut lap = C::new(0.0, 0.0);
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = h;
            let p = field.scalar_jet(&(x + e), t).value;
            let m = field.scalar_jet(&(x - e), t).value;
            let g = (p - m) / (2.0 * h);
            assert!((g - jet.grad[i]).norm() < 1e-6 * (1.0 + jet.grad[i].norm()), "grad {i}");
            lap += (p + m - jet.value * 2.0) / (h * h);
        }
        assert!((lap - jet.lap).norm() < 1e-3 * (1.0 + jet.lap.norm()), "{lap} vs {}", jet.lap);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let g = GaussianPacket::new(Vector3::new(0.1, -0.2, 0.3), 0.8, Vector3::new(0.5, 0.0, 2.0), 1.3).unwrap();
        fd_check(&WaveField::GaussianPacket(g.clone()), Vector3::new(0.4, 0.1, 0.9), 0.7);
        let ds = DoubleSlit::symmetric(3.0, g, 0.4).unwrap();
        fd_check(&WaveField::DoubleSlit(ds), Vector3::new(1.2, 0.1, 0.5), 0.3);
        for profile in [LongitudinalProfile::Odd, LongitudinalProfile::Even] {
            let w = WaveguideSpinField::new(SpinVector::x(), 1.2, 0.9, profile, 1.0).unwrap();
            fd_check(&WaveField::Waveguide(w), Vector3::new(0.3, -0.4, 1.1), 0.8);
        }
        let p =
            backflow_pair(Vector3::new(1.0, 0.0, 2.0), Vector3::new(2.0, 0.0, 1.0), C::new(-0.5, 0.2), 1.0).unwrap();
        fd_check(p.field(), Vector3::new(0.2, 0.3, -0.1), 0.5);
    }

    #[test]
    fn spinor_polarisation_round_trips() {
        for v in [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, -1.0), Vector3::new(0.6, -0.48, 0.64)] {
            let s = SpinVector::from_vector(v).unwrap();
            assert!((Spinor::aligned(&s).polarisation() - v).norm() < 1e-14);
        }
        assert!(SpinVector::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn plane_wave_current_and_zero_potential() {
        let k = Vector3::new(0.3, -1.0, 2.0);
        let f = WaveField::PlaneWave(PlaneWave::new(k, C::new(1.0, 0.0), 2.0).unwrap());
        let s = f.evaluate(&Vector3::new(1.0, 2.0, 3.0), 0.4);
        assert!((s.current.total() - k / 2.0).norm() < 1e-14);
        assert!(s.quantum_potential.abs() < 1e-13);
        assert!((s.velocity().unwrap() - k / 2.0).norm() < 1e-14);
    }

    #[test]
    fn gaussian_packet_is_normalised_and_bounded() {
        let g = GaussianPacket::new(Vector3::zeros(), 0.7, Vector3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let f = WaveField::GaussianPacket(g.clone());
        let t = 1.5;
        let c = g.mean_position(t);
        let peak = f.density(&c, t);
        assert!((peak - f.density_bound(t).unwrap()).abs() < 1e-12 * peak);
        let b = f.support(t).unwrap();
        let opts = crate::quad::QuadOptions::new(1e-9, 1e-9);
        let mass = crate::quad::integrate_box(
            |p: &[f64]| f.density(&Vector3::new(p[0], p[1], p[2]), t),
            b.lo.as_slice(),
            b.hi.as_slice(),
            &opts,
        )
        .unwrap();
        assert!((mass.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn waveguide_spin_term_matches_closed_form() {
        let w = WaveguideSpinField::normalized(SpinVector::x());
        let f = WaveField::Waveguide(w.clone());
        let (rho, z, t) = (0.7, 1.3, 0.9);
        for phi in [0.0, 0.4, 1.0, PI / 2.0, 2.5, PI] {
            let x = Vector3::new(rho * phi.cos(), rho * phi.sin(), z);
            let j = f.current(&x, t);
            // |Φ|² = e^{−ρ²}/π · |Z|², so ∂ρ|Φ|² = −2ρ|Φ|².
            let d_rho = -2.0 * rho * f.density(&x, t);
            let expected = -phi.sin() * d_rho / 2.0;
            assert!((j.spin.z - expected).abs() < 1e-13, "phi {phi}");
        }
        let on_axis = f.current(&Vector3::new(0.7, 0.0, z), t);
        assert!(on_axis.spin.z.abs() < 1e-15);
        let zf = WaveField::Waveguide(WaveguideSpinField::normalized(SpinVector::z()));
        assert!(zf.current(&Vector3::new(0.3, 0.2, 1.0), t).spin.z.abs() < 1e-15);
    }

    #[test]
    fn waveguide_convective_velocity() {
        let f = WaveField::Waveguide(WaveguideSpinField::normalized(SpinVector::z()));
        for (z, t) in [(0.5, 0.3), (2.0, 4.0), (1.0, 1.0)] {
            let v = f.current(&Vector3::new(0.2, -0.1, z), t).convective.z / f.density(&Vector3::new(0.2, -0.1, z), t);
            assert!((v - z * t / (1.0 + t * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn backflow_pair_closed_forms() {
        let k = 2.0 * PI;
        let p = BackflowPair::from_angles(k, PI / 3.0, 9.0 * PI / 20.0, None, 1.0).unwrap();
        let r = p.ratio();
        assert!((p.alpha.re - p.alpha_min()).abs() < 1e-15);
        let o = Vector3::zeros();
        let jz = p.field().current(&o, 0.0).total().z;
        let closed = -(p.k2.z / 4.0) * (1.0 - r).powi(2);
        assert!((jz - closed).abs() < 1e-12 * closed.abs());
        assert!((p.origin_current_z() - closed).abs() < 1e-12 * closed.abs());
        assert!((p.backflow_polynomial() * p.k2.z - closed).abs() < 1e-12 * closed.abs());
        let keff = p.effective_wavevector(&o).unwrap();
        assert!((keff.z + p.k2.z).abs() < 1e-12 * p.k2.z);
        let ratio = keff.norm() / k;
        assert!((ratio - 1.11).abs() < 0.02, "{ratio}");
        let q = p.quantum_potential(&o).unwrap();
        let dk2 = (p.k1 - p.k2).norm_squared();
        let q_closed = -dk2 * (1.0 + r) / (1.0 - r).powi(2);
        assert!((q - q_closed).abs() < 1e-10 * q_closed.abs(), "{q} vs {q_closed}");
        assert!((p.field().density(&o, 0.0) - (1.0 - r).powi(2) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn backflow_pair_rejects_bad_inputs() {
        let a = C::new(-1.0, 0.0);
        assert!(backflow_pair(Vector3::new(1.0, 0.0, -1.0), Vector3::new(1.0, 0.0, 1.0), a, 1.0).is_err());
        assert!(backflow_pair(Vector3::new(1.0, 0.0, 1.0), Vector3::new(1.0, 0.0, 2.0), a, 1.0).is_err());
    }

    #[test]
    fn nodal_velocity_is_an_error() {
        let f = WaveField::Waveguide(WaveguideSpinField::normalized(SpinVector::z()));
        assert!(matches!(f.velocity(&Vector3::new(0.0, 0.0, -1.0), 0.0), Err(Error::NodalPoint { .. })));
        assert!(quantum_potential(&f, &Vector3::new(0.0, 0.0, 0.0), 0.0).is_err());
    }
}
