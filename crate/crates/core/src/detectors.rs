//! Complex-potential detector models: the absorbing Fabry–Perot slab, perfectly matched
//! layer (PML) profiles, space-time 4-volume absorbers with scalar or imaginary vector
//! coupling, and the Huygens field scattered by a finite detector aperture.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fields::{effective_wavevector, WaveField};
use crate::quad::{integrate, integrate_box, QuadOptions};
use crate::{Error, Result, DENSITY_FLOOR, FD_STEP};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(name, "must be positive and finite"));
    }
    Ok(())
}

/// Homogeneous absorbing slab occupying 0 ≤ z ≤ d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabDetector {
    /// Absorber number density N.
    pub density: f64,
    /// Forward scattering amplitude f0 of one absorber.
    pub f0: C,
    pub thickness: f64,
    pub area: f64,
    pub mass: f64,
}

impl SlabDetector {
    pub fn new(density: f64, f0: C, thickness: f64, area: f64) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::invalid("density", "absorber density must be nonnegative"));
        }
        if !(f0.im >= 0.0) || !f0.re.is_finite() || !f0.im.is_finite() {
            return Err(Error::invalid("f0", "Im f0 must be nonnegative (absorbing slab)"));
        }
        positive("thickness", thickness)?;
        positive("area", area)?;
        Ok(Self { density, f0, thickness, area, mass: 1.0 })
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        positive("mass", mass)?;
        Ok(Self { mass, ..self })
    }

    /// Extinction cross-section 4π Im f0 / k.
    pub fn extinction_cross_section(&self, k: f64) -> f64 {
        4.0 * PI * self.f0.im / k
    }
}

/// Stationary scattering solution of an obliquely incident plane wave on a slab.
///
/// Along z: e^{ik1 z} + R e^{−ik1 z} before the slab, C e^{ik2 z} + D e^{−ik2 z} inside,
/// T e^{ik1 z} behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterResult {
    pub k1: f64,
    pub k2: C,
    pub kx: f64,
    /// Single-interface Fresnel coefficients.
    pub r: C,
    pub t: C,
    pub reflection: C,
    pub transmission: C,
    pub c: C,
    pub d: C,
    pub absorption: f64,
    thickness: f64,
}

impl ScatterResult {
    /// z-dependent factor of the wave and its z-derivative.
    pub fn wave(&self, z: f64) -> (C, C) {
        let k1 = self.k1;
        if z < 0.0 {
            let f = (I * k1 * z).exp();
            let b = self.reflection * (-I * k1 * z).exp();
            (f + b, I * k1 * (f - b))
        } else if z <= self.thickness {
            let (a, b) = self.interior_parts(z);
            (a + b, I * self.k2 * (a - b))
        } else {
            let v = self.transmission * (I * k1 * z).exp();
            (v, I * k1 * v)
        }
    }

    /// C e^{ik2 z} and D e^{−ik2 z}, the latter written as −r C e^{ik2(2d−z)} so it stays
    /// finite for strongly absorbing slabs.
    fn interior_parts(&self, z: f64) -> (C, C) {
        let a = self.c * (I * self.k2 * z).exp();
        let b = -self.r * self.c * (I * self.k2 * (2.0 * self.thickness - z)).exp();
        (a, b)
    }
}

/// Reflection, transmission and in-slab amplitudes for wavenumber `k` at incidence `theta`.
pub fn slab_scatter(k: f64, theta: f64, slab: &SlabDetector) -> Result<ScatterResult> {
    positive("k", k)?;
    if !(0.0..PI / 2.0).contains(&theta) {
        return Err(Error::invalid("theta", "incidence angle must lie in [0, π/2)"));
    }
    let k1 = k * theta.cos();
    let k2 = (C::new(k1 * k1, 0.0) + slab.f0 * (4.0 * PI * slab.density)).sqrt();
    let r = (k1 - k2) / (k1 + k2);
    let t = C::new(2.0 * k1, 0.0) / (k1 + k2);
    let t_back = k2 * 2.0 / (k1 + k2);
    let d = slab.thickness;
    let phase = (I * k2 * 2.0 * d).exp();
    let denom = C::new(1.0, 0.0) - r * r * phase;
    let reflection = r * (C::new(1.0, 0.0) - phase) / denom;
    let c = t / denom;
    let dd = -r * c * phase;
    let transmission = t * t_back * (I * k2 * d).exp() * (-I * k1 * d).exp() / denom;
    let absorption = 1.0 - reflection.norm_sqr() - transmission.norm_sqr();
    Ok(ScatterResult {
        k1,
        k2,
        kx: k * theta.sin(),
        r,
        t,
        reflection,
        transmission,
        c,
        d: dd,
        absorption,
        thickness: d,
    })
}

/// The two sides of the slab absorption budget (probability per unit time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabBudget {
    /// Σ v cosθ (1 − |R|² − |T|²).
    pub flux_in_minus_out: f64,
    /// Σ N σ_ext v ∫₀^d |Ψ|² dz.
    pub volume_absorption: f64,
}

pub fn slab_absorption_budget(k: f64, theta: f64, slab: &SlabDetector) -> Result<SlabBudget> {
    let s = slab_scatter(k, theta, slab)?;
    let v = k / slab.mass;
    let flux_in_minus_out = slab.area * v * theta.cos() * s.absorption;
    let rate = slab.density * slab.extinction_cross_section(k) * v;
    let volume_absorption = if rate == 0.0 {
        0.0
    } else {
        let opts = QuadOptions::new(1e-300, 1e-10);
        let q = integrate(
            |z: f64| {
                let (a, b) = s.interior_parts(z);
                (a + b).norm_sqr()
            },
            0.0,
            slab.thickness,
            &opts,
        )?;
        slab.area * rate * q.value
    };
    Ok(SlabBudget { flux_in_minus_out, volume_absorption })
}

/// Trajectory slope dz/dx at depth `z` for oblique incidence (θ > 0).
pub fn slab_trajectory_slopes(k: f64, theta: f64, slab: &SlabDetector, z: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::invalid("theta", "slopes need oblique incidence (θ > 0)"));
    }
    let s = slab_scatter(k, theta, slab)?;
    if z > slab.thickness {
        return Ok(1.0 / theta.tan());
    }
    let (psi, dpsi) = s.wave(z);
    let density = psi.norm_sqr();
    if density <= DENSITY_FLOOR {
        return Err(Error::NodalPoint { density });
    }
    Ok((psi.conj() * dpsi).im / (s.kx * density))
}

/// Spatial average of the incident-region slope, cotθ (1 − |R|²)/(1 + |R|²).
pub fn mean_incident_slope(k: f64, theta: f64, slab: &SlabDetector) -> Result<f64> {
    let s = slab_scatter(k, theta, slab)?;
    let r2 = s.reflection.norm_sqr();
    Ok((1.0 - r2) / (1.0 + r2) / theta.tan())
}

/// Shape of the absorption profile χ(z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiProfile {
    /// χ0 on [0, d], zero elsewhere (the a → ∞ limit).
    Step,
    /// χ0 on [0, d] with Gaussian shoulders e^{−a z²} and e^{−a(z−d)²}.
    Smooth { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmlDirection {
    /// Matched to a wave travelling along +z.
    Forward,
    /// Matched to a wave travelling along −z.
    Backward,
}

/// Perfectly matched layer over 0 ≤ z ≤ d designed for longitudinal wavenumber `kz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlProfile {
    pub chi0: f64,
    pub thickness: f64,
    pub shape: ChiProfile,
    pub direction: PmlDirection,
    pub kz: f64,
    pub mass: f64,
    pub area: f64,
}

impl PmlProfile {
    pub fn new(chi0: f64, thickness: f64, shape: ChiProfile, direction: PmlDirection, kz: f64) -> Result<Self> {
        if !(chi0 >= 0.0 && chi0.is_finite()) {
            return Err(Error::invalid("chi0", "absorption strength must be nonnegative"));
        }
        positive("thickness", thickness)?;
        positive("kz", kz)?;
        if let ChiProfile::Smooth { a } = shape {
            positive("a", a)?;
        }
        Ok(Self { chi0, thickness, shape, direction, kz, mass: 1.0, area: 1.0 })
    }

    /// Edge parameter ξ = χ0 √(π/a); zero for the step profile.
    pub fn xi(&self) -> f64 {
        match self.shape {
            ChiProfile::Step => 0.0,
            ChiProfile::Smooth { a } => self.chi0 * (PI / a).sqrt(),
        }
    }

    pub fn chi(&self, z: f64) -> f64 {
        let d = self.thickness;
        match self.shape {
            ChiProfile::Step => {
                if (0.0..=d).contains(&z) {
                    self.chi0
                } else {
                    0.0
                }
            }
            ChiProfile::Smooth { a } => {
                if z < 0.0 {
                    self.chi0 * (-a * z * z).exp()
                } else if z <= d {
                    self.chi0
                } else {
                    self.chi0 * (-a * (z - d).powi(2)).exp()
                }
            }
        }
    }

    /// χ′(z); `None` for the step profile, whose derivative is a pair of δ terms.
    pub fn chi_prime(&self, z: f64) -> Option<f64> {
        let ChiProfile::Smooth { a } = self.shape else { return None };
        let d = self.thickness;
        Some(if z < 0.0 {
            -2.0 * a * z * self.chi0 * (-a * z * z).exp()
        } else if z <= d {
            0.0
        } else {
            -2.0 * a * (z - d) * self.chi0 * (-a * (z - d).powi(2)).exp()
        })
    }

    /// ∫_{−∞}^z χ.
    pub fn chi_integral(&self, z: f64) -> f64 {
        let d = self.thickness;
        match self.shape {
            ChiProfile::Step => self.chi0 * z.clamp(0.0, d),
            ChiProfile::Smooth { a } => {
                let h = 0.5 * self.xi();
                let sa = a.sqrt();
                if z <= 0.0 {
                    h * (1.0 + libm::erf(sa * z))
                } else if z <= d {
                    h + self.chi0 * z
                } else {
                    h + self.chi0 * d + h * libm::erf(sa * (z - d))
                }
            }
        }
    }

    /// The stationary absorbed wave for the design direction (unit incident amplitude)
    /// and its derivative.
    pub fn absorbed_wave(&self, z: f64) -> (C, C) {
        let k = self.kz;
        match self.direction {
            PmlDirection::Forward => {
                let psi = (C::new(-self.chi_integral(z), k * z)).exp();
                (psi, psi * C::new(-self.chi(z), k))
            }
            PmlDirection::Backward => {
                let psi = (C::new(-self.chi_integral(self.thickness - z), -k * z)).exp();
                (psi, psi * C::new(self.chi(z), -k))
            }
        }
    }
}

/// Effective potential of the layer at depth z.
///
/// Forward: (χ² − χ′)/2m − iχk/m. Backward: (χ² + χ′)/2m − iχk/m. The step profile has
/// no pointwise potential and is rejected.
pub fn pml_potential(profile: &PmlProfile, z: f64) -> Result<C> {
    let dchi = profile
        .chi_prime(z)
        .ok_or_else(|| Error::Precondition("step profile has no pointwise potential; use a smooth profile".into()))?;
    let chi = profile.chi(z);
    let m = profile.mass;
    let sign = match profile.direction {
        PmlDirection::Forward => -1.0,
        PmlDirection::Backward => 1.0,
    };
    Ok(C::new((chi * chi + sign * dchi) / (2.0 * m), -chi * profile.kz / m))
}

/// Uniform grid along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl ZGrid {
    /// Covers the layer plus six decay lengths of each shoulder.
    pub fn around(profile: &PmlProfile, points: usize) -> Self {
        let pad = match profile.shape {
            ChiProfile::Smooth { a } => 6.0 / a.sqrt(),
            ChiProfile::Step => 0.5 * profile.thickness,
        };
        Self { min: -pad, max: profile.thickness + pad, points }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.points.max(2);
        (0..n).map(move |i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
    }
}

/// Maximum stationary-equation residual |ψ″ + 2m(E − V)ψ| of the analytic absorbed wave
/// over `grid`, relative to max |2mEψ|. Second derivatives use central differences;
/// stencils straddling the kinks of χ′ at z = 0 and z = d are skipped.
pub fn verify_pml_solution(profile: &PmlProfile, k: f64, grid: &ZGrid) -> Result<f64> {
    if (k - profile.kz).abs() > 1e-12 * profile.kz {
        return Err(Error::Precondition(
            "incident k differs from the design k; use pml_reflection for mismatched waves".into(),
        ));
    }
    let h = FD_STEP;
    let two_m_e = k * k;
    let psi = |z: f64| profile.absorbed_wave(z).0;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for z in grid.iter() {
        let straddles = |edge: f64| (z - h) < edge && edge < (z + h);
        if straddles(0.0) || straddles(profile.thickness) {
            continue;
        }
        let p = psi(z);
        let second = (psi(z + h) - p * 2.0 + psi(z - h)) / (h * h);
        let v = pml_potential(profile, z)?;
        let residual = second + (C::new(two_m_e, 0.0) - v * (2.0 * profile.mass)) * p;
        worst = worst.max(residual.norm());
        scale = scale.max(two_m_e * p.norm());
    }
    Ok(worst / scale)
}

/// Reflection and transmission amplitudes from direct numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub reflection: C,
    pub transmission: C,
}

/// Scatters a plane wave of wavenumber `k` off the layer's potential by integrating the
/// stationary equation with RK4 from the outgoing side. `incidence` gives the direction
/// of travel of the incoming wave.
pub fn pml_reflection(profile: &PmlProfile, k: f64, incidence: PmlDirection) -> Result<ScatteringAmplitudes> {
    positive("k", k)?;
    let ChiProfile::Smooth { a } = profile.shape else {
        return Err(Error::Precondition("numerical scattering needs a smooth profile".into()));
    };
    let pad = 8.0 / a.sqrt();
    let (zl, zr) = (-pad, profile.thickness + pad);
    let steps = (((zr - zl) * k.max(1.0) / 0.01).ceil() as usize).max(2000);
    let h = (zr - zl) / steps as f64;
    let two_m = 2.0 * profile.mass;
    let rhs = |z: f64, y: [C; 2]| -> Result<[C; 2]> {
        let v = pml_potential(profile, z)?;
        Ok([y[1], (v * two_m - k * k) * y[0]])
    };
    let rk4 = |z0: f64, y0: [C; 2], dz: f64| -> Result<[C; 2]> {
        let mut y = y0;
        let mut z = z0;
        for _ in 0..steps {
            let k1 = rhs(z, y)?;
            let k2 = rhs(z + dz / 2.0, [y[0] + k1[0] * (dz / 2.0), y[1] + k1[1] * (dz / 2.0)])?;
            let k3 = rhs(z + dz / 2.0, [y[0] + k2[0] * (dz / 2.0), y[1] + k2[1] * (dz / 2.0)])?;
            let k4 = rhs(z + dz, [y[0] + k3[0] * dz, y[1] + k3[1] * dz])?;
            for j in 0..2 {
                y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dz / 6.0);
            }
            z += dz;
        }
        Ok(y)
    };
    let ik = I * k;
    match incidence {
        PmlDirection::Forward => {
            let e = (ik * zr).exp();
            let y = rk4(zr, [e, ik * e], -h)?;
            let forward = (y[0] + y[1] / ik) * 0.5 * (-ik * zl).exp();
            let backward = (y[0] - y[1] / ik) * 0.5 * (ik * zl).exp();
            Ok(ScatteringAmplitudes { reflection: backward / forward, transmission: C::new(1.0, 0.0) / forward })
        }
        PmlDirection::Backward => {
            let e = (-ik * zl).exp();
            let y = rk4(zl, [e, -ik * e], h)?;
            let incoming = (y[0] - y[1] / ik) * 0.5 * (ik * zr).exp();
            let outgoing = (y[0] + y[1] / ik) * 0.5 * (-ik * zr).exp();
            Ok(ScatteringAmplitudes { reflection: outgoing / incoming, transmission: C::new(1.0, 0.0) / incoming })
        }
    }
}

/// F(ξ) and G(ξ): (2/√π)∫ e^{−u²} e^{−ξ(1+erf u)} du over u < 0 and u > 0 respectively.
pub fn pml_edge_integrals(xi: f64) -> Result<(f64, f64)> {
    let opts = QuadOptions::new(1e-12, 1e-12);
    let g = |u: f64| 2.0 / PI.sqrt() * (-u * u - xi * (1.0 + libm::erf(u))).exp();
    let f_val = integrate(g, f64::NEG_INFINITY, 0.0, &opts)?.value;
    let g_val = integrate(g, 0.0, f64::INFINITY, &opts)?.value;
    Ok((f_val, g_val))
}

/// Detection probability per unit time of the layer for an incident flux k/m over its area.
pub fn pml_detection_probability(profile: &PmlProfile, k: f64) -> Result<f64> {
    positive("k", k)?;
    let flux = profile.area * k / profile.mass;
    let bulk = 1.0 - (-2.0 * profile.chi0 * profile.thickness).exp();
    match profile.shape {
        ChiProfile::Step => Ok(flux * bulk),
        ChiProfile::Smooth { .. } => {
            let xi = profile.xi();
            let (f, g) = pml_edge_integrals(xi)?;
            let tail = (-2.0 * profile.chi0 * profile.thickness).exp();
            Ok(flux * ((-xi).exp() * bulk + xi * f + tail * xi * g))
        }
    }
}

/// The same probability from direct quadrature of Σ (2k/m) ∫ χ e^{−2∫χ} dz.
pub fn pml_detection_probability_quadrature(profile: &PmlProfile, k: f64) -> Result<f64> {
    positive("k", k)?;
    let opts = QuadOptions::new(1e-13, 1e-13);
    let integrand = |z: f64| profile.chi(z) * (-2.0 * profile.chi_integral(z)).exp();
    let d = profile.thickness;
    let mut total = integrate(integrand, 0.0, d, &opts)?.value;
    if let ChiProfile::Smooth { .. } = profile.shape {
        total += integrate(integrand, f64::NEG_INFINITY, 0.0, &opts)?.value;
        total += integrate(integrand, d, f64::INFINITY, &opts)?.value;
    }
    Ok(profile.area * 2.0 * k / profile.mass * total)
}

/// Anything that supplies a density and a current.
pub trait FlowField {
    fn density(&self, x: &Vector3<f64>, t: f64) -> f64;
    fn current(&self, x: &Vector3<f64>, t: f64) -> Vector3<f64>;
}

impl FlowField for WaveField {
    fn density(&self, x: &Vector3<f64>, t: f64) -> f64 {
        WaveField::density(self, x, t)
    }

    fn current(&self, x: &Vector3<f64>, t: f64) -> Vector3<f64> {
        WaveField::current(self, x, t).total()
    }
}

/// Stationary plane wave along z, incident with unit amplitude on a forward PML and
/// absorbed inside it; uniform across x and y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbedPlaneWave(pub PmlProfile);

impl FlowField for AbsorbedPlaneWave {
    fn density(&self, x: &Vector3<f64>, _t: f64) -> f64 {
        self.0.absorbed_wave(x.z).0.norm_sqr()
    }

    fn current(&self, x: &Vector3<f64>, _t: f64) -> Vector3<f64> {
        let (psi, dpsi) = self.0.absorbed_wave(x.z);
        Vector3::new(0.0, 0.0, (psi.conj() * dpsi).im / self.0.mass)
    }
}

/// Space-time box [x]×[y]×[z]×[t].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeRegion {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl SpacetimeRegion {
    pub fn new(lo: [f64; 4], hi: [f64; 4]) -> Result<Self> {
        if (0..4).any(|i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::invalid("region", "each range must be finite with lower < upper"));
        }
        Ok(Self { lo, hi })
    }

    pub fn volume(&self) -> f64 {
        (0..4).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn center(&self) -> (Vector3<f64>, f64) {
        let c: Vec<f64> = (0..4).map(|i| 0.5 * (self.lo[i] + self.hi[i])).collect();
        (Vector3::new(c[0], c[1], c[2]), c[3])
    }
}

/// Scalar absorbing potentials available to space-time detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarPotential {
    Constant(C),
    /// z-dependent layer potential.
    Pml(PmlProfile),
}

impl ScalarPotential {
    pub fn value(&self, x: &Vector3<f64>) -> Result<C> {
        match self {
            ScalarPotential::Constant(v) => Ok(*v),
            ScalarPotential::Pml(p) => pml_potential(p, x.z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Scalar(ScalarPotential),
    /// Imaginary vector potential Im A constant over the region, with charge e.
    Vector {
        charge: f64,
        im_a: Vector3<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeDetector {
    pub region: SpacetimeRegion,
    pub coupling: Coupling,
}

/// Detector signal over a space-time region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorption {
    pub value: f64,
    /// Set when a vector coupling yields a negative signal.
    pub gain: bool,
    pub error: f64,
}

fn spacetime_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-8, rel_tol: 1e-10, max_subdivisions: 2000 }
}

/// Scalar coupling: −2 ∫ Im V |Ψ|² d⁴x, for an arbitrary potential. Fails if Im V > 0
/// at any quadrature node.
pub fn scalar_absorption_with(
    region: &SpacetimeRegion,
    potential: impl Fn(&Vector3<f64>, f64) -> Result<C>,
    field: &impl FlowField,
) -> Result<Absorption> {
    let mut failure = None;
    let r = integrate_box(
        |p: &[f64]| {
            let x = Vector3::new(p[0], p[1], p[2]);
            match potential(&x, p[3]) {
                Ok(v) if v.im > 0.0 => {
                    failure.get_or_insert(Error::Precondition("Im V > 0 inside the detector region".into()));
                    0.0
                }
                Ok(v) => -2.0 * v.im * field.density(&x, p[3]),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &region.lo,
        &region.hi,
        &spacetime_options(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Absorption { value: r.value, gain: false, error: r.error })
}

/// Detector signal: scalar −2 ∫ Im V |Ψ|² d⁴x, or vector +2e ∫ Im A·J d⁴x.
pub fn spacetime_absorption(det: &SpacetimeDetector, field: &impl FlowField) -> Result<Absorption> {
    match det.coupling {
        Coupling::Scalar(pot) => {
            if let ScalarPotential::Constant(v) = pot {
                if v.im > 0.0 {
                    return Err(Error::Precondition("Im V > 0 inside the detector region".into()));
                }
            }
            scalar_absorption_with(&det.region, |x, _| pot.value(x), field)
        }
        Coupling::Vector { charge, im_a } => {
            let r = integrate_box(
                |p: &[f64]| {
                    let x = Vector3::new(p[0], p[1], p[2]);
                    2.0 * charge * im_a.dot(&field.current(&x, p[3]))
                },
                &det.region.lo,
                &det.region.hi,
                &spacetime_options(),
            )?;
            Ok(Absorption { value: r.value, gain: r.value < 0.0, error: r.error })
        }
    }
}

/// A finite detector face in a plane z = const.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aperture {
    Rectangle { center: Vector3<f64>, half_x: f64, half_y: f64 },
    Disk { center: Vector3<f64>, radius: f64 },
}

impl Aperture {
    pub fn center(&self) -> Vector3<f64> {
        match *self {
            Aperture::Rectangle { center, .. } | Aperture::Disk { center, .. } => center,
        }
    }
}

/// Huygens field radiated by the aperture when the incident wave is locally
/// Ψ⁽⁰⁾(x0) e^{ik_eff·(x1 − x0)}:
/// ±Ψ⁽⁰⁾(x0) ∫ dx1 dy1 (e^{ikR}/4πR)(ik R̂·ẑ + ik_z) e^{ik_∥·(x1 − x0)},
/// with the minus sign when `backflow` is set.
pub fn scattered_field(aperture: &Aperture, field: &WaveField, x: &Vector3<f64>, backflow: bool) -> Result<C> {
    let energy =
        field.energy().ok_or_else(|| Error::Precondition("scattered field needs a stationary field".into()))?;
    let x0 = aperture.center();
    if (x.z - x0.z).abs() < 1e-12 {
        return Err(Error::Precondition("observation point lies in the aperture plane".into()));
    }
    let k = (2.0 * field.mass() * energy).sqrt();
    let psi0 = field.scalar_jet(&x0, 0.0).value;
    let keff = effective_wavevector(field, &x0, 0.0)?;
    let kernel = |x1: f64, y1: f64| -> C {
        let rv = x - Vector3::new(x1, y1, x0.z);
        let r = rv.norm();
        let green = (I * k * r).exp() / (4.0 * PI * r);
        let oblique = I * (k * rv.z / r + keff.z);
        let carrier = (I * (keff.x * (x1 - x0.x) + keff.y * (y1 - x0.y))).exp();
        green * oblique * carrier
    };
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-9, max_subdivisions: 4000 };
    let value = match *aperture {
        Aperture::Rectangle { half_x, half_y, .. } => {
            integrate_box(
                |p: &[f64]| kernel(p[0], p[1]),
                &[x0.x - half_x, x0.y - half_y],
                &[x0.x + half_x, x0.y + half_y],
                &opts,
            )?
            .value
        }
        Aperture::Disk { radius, .. } => {
            integrate_box(
                |p: &[f64]| kernel(x0.x + p[0] * p[1].cos(), x0.y + p[0] * p[1].sin()) * p[0],
                &[0.0, 0.0],
                &[radius, 2.0 * PI],
                &opts,
            )?
            .value
        }
    };
    let sign = if backflow { -1.0 } else { 1.0 };
    Ok(psi0 * value * sign)
}

/// Any of the detector models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorSpec {
    Slab(SlabDetector),
    Pml(PmlProfile),
    Spacetime(SpacetimeDetector),
}
