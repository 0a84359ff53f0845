//! Space-time absorbers against flux, additivity, and the shadow of a finite detector.

use arrival_core::detectors::{
    pml_detection_probability, scattered_field, spacetime_absorption, AbsorbedPlaneWave, Aperture, ChiProfile,
    Coupling, PmlDirection, PmlProfile, ScalarPotential, SpacetimeDetector, SpacetimeRegion,
};
use arrival_core::fields::{GaussianPacket, LongitudinalProfile, PlaneWave, SpinVector, WaveField, WaveguideSpinField};
use arrival_core::quad::{integrate_box, QuadOptions};
use arrival_core::{Complex64, Vector3};

fn moving_packet() -> WaveField {
    WaveField::GaussianPacket(GaussianPacket::new(Vector3::zeros(), 1.0, Vector3::new(0.0, 0.0, 5.0), 1.0).unwrap())
}

#[test]
fn thin_efficient_slab_measures_the_flux() {
    let f = moving_packet();
    let (z0, t0, d, dt, v) = (2.5, 0.5, 0.02, 0.01, 5.0);
    let region = SpacetimeRegion::new([-6.0, -6.0, z0, t0], [6.0, 6.0, z0 + d, t0 + dt]).unwrap();
    let det = SpacetimeDetector {
        region,
        coupling: Coupling::Scalar(ScalarPotential::Constant(Complex64::new(0.0, -v / (2.0 * d)))),
    };
    let absorbed = spacetime_absorption(&det, &f).unwrap();
    let flux = integrate_box(
        |p: &[f64]| f.current(&Vector3::new(p[0], p[1], z0), t0).total().z,
        &[-6.0, -6.0],
        &[6.0, 6.0],
        &QuadOptions::new(1e-12, 1e-10),
    )
    .unwrap()
    .value;
    let expected = dt * flux;
    assert!((absorbed.value - expected).abs() < 0.05 * expected, "{} vs {expected}", absorbed.value);
    assert!(!absorbed.gain);
}

#[test]
fn absorbed_plane_wave_loses_the_layer_probability() {
    let k = 2.0;
    let profile = PmlProfile::new(1.5, 1.0, ChiProfile::Smooth { a: 4.0 }, PmlDirection::Forward, k).unwrap();
    let dt = 0.3;
    let region = SpacetimeRegion::new([0.0, 0.0, -6.0, 0.0], [1.0, 1.0, 7.0, dt]).unwrap();
    let det = SpacetimeDetector { region, coupling: Coupling::Scalar(ScalarPotential::Pml(profile)) };
    let absorbed = spacetime_absorption(&det, &AbsorbedPlaneWave(profile)).unwrap();
    let expected = dt * pml_detection_probability(&profile, k).unwrap();
    assert!((absorbed.value - expected).abs() < 1e-6 * expected, "{} vs {expected}", absorbed.value);
}

#[test]
fn weak_vector_coupling_reads_the_total_current() {
    let guide = WaveguideSpinField::new(SpinVector::x(), 1.0, 1.0, LongitudinalProfile::Odd, 1.0).unwrap();
    let f = WaveField::Waveguide(guide);
    let (x, t, h, eps, charge) = (Vector3::new(0.0, 0.5, 1.0), 0.5, 0.01, 1e-3, 1.0);
    let n = Vector3::z();
    let region = SpacetimeRegion::new([x.x - h, x.y - h, x.z - h, t - h], [x.x + h, x.y + h, x.z + h, t + h]).unwrap();
    let det = SpacetimeDetector { region, coupling: Coupling::Vector { charge, im_a: n * (eps / (2.0 * charge)) } };
    let signal = spacetime_absorption(&det, &f).unwrap().value;
    let current = f.current(&x, t);
    let (dv, dt) = ((2.0 * h).powi(3), 2.0 * h);
    let expected = eps * dt * dv * n.dot(&current.total());
    let convective_only = eps * dt * dv * n.dot(&current.convective);
    assert!((signal - expected).abs() < 1e-3 * expected.abs(), "{signal} vs {expected}");
    assert!((signal - convective_only).abs() > 0.1 * expected.abs());
}

#[test]
fn absorption_is_additive_over_disjoint_boxes() {
    let f = moving_packet();
    let pot = Coupling::Scalar(ScalarPotential::Constant(Complex64::new(0.0, -3.0)));
    let absorb = |lo: [f64; 4], hi: [f64; 4]| {
        spacetime_absorption(&SpacetimeDetector { region: SpacetimeRegion::new(lo, hi).unwrap(), coupling: pot }, &f)
            .unwrap()
    };
    let whole = absorb([-5.0, -5.0, 2.0, 0.4], [5.0, 5.0, 3.0, 0.6]);
    let lower = absorb([-5.0, -5.0, 2.0, 0.4], [5.0, 5.0, 2.4, 0.6]);
    let upper = absorb([-5.0, -5.0, 2.4, 0.4], [5.0, 5.0, 3.0, 0.6]);
    let tol = whole.error + lower.error + upper.error + 1e-10 * whole.value;
    assert!((whole.value - lower.value - upper.value).abs() <= tol);
}

#[test]
fn large_aperture_casts_a_shadow() {
    let k = 2.0 * std::f64::consts::PI;
    let f = WaveField::PlaneWave(PlaneWave::new(Vector3::new(0.0, 0.0, k), Complex64::new(1.0, 0.0), 1.0).unwrap());
    let aperture = Aperture::Rectangle { center: Vector3::zeros(), half_x: 5.0, half_y: 5.0 };
    let x = Vector3::new(0.0, 0.0, 0.5);
    let incident = f.scalar_jet(&x, 0.0).value;
    let scattered = scattered_field(&aperture, &f, &x, false).unwrap();
    let ratio = (incident + scattered).norm() / incident.norm();
    assert!(ratio < 0.2, "shadow ratio {ratio}");
}
