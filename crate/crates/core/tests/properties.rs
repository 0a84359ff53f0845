//! Property-based checks of the field, detector, arrival and POVM invariants.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use arrival_core::arrivals::{dd_density, which_path, ArrivalHistogram, WhichPathMethod};
use arrival_core::detectors::{
    pml_detection_probability, slab_absorption_budget, slab_scatter, ChiProfile, PmlDirection, PmlProfile, SlabDetector,
};
use arrival_core::fields::{
    DoubleSlit, GaussianPacket, LongitudinalProfile, PlaneWave, SpinVector, Superposition, WaveField,
    WaveguideSpinField,
};
use arrival_core::guidance::sample_rng;
use arrival_core::povm::{check_povm, construct_pointer_povm, gtz_sum_test, PointerModel, SpinLabel, TauSeries};
use arrival_core::{Complex64, Vector3, FD_STEP};
use nalgebra::DVector;
use proptest::prelude::*;

type C = Complex64;

fn packet(cx: f64, sigma: f64, pz: f64) -> GaussianPacket {
    GaussianPacket::new(Vector3::new(cx, 0.2, -0.1), sigma, Vector3::new(0.3, -0.2, pz), 1.3).unwrap()
}

fn scalar_fields() -> Vec<WaveField> {
    let pw = |k: [f64; 3], a: f64| WaveField::PlaneWave(PlaneWave::new(Vector3::from(k), C::new(a, 0.4), 1.3).unwrap());
    vec![
        pw([0.4, -0.3, 1.2], 0.8),
        WaveField::GaussianPacket(packet(0.0, 0.8, 1.5)),
        WaveField::DoubleSlit(
            DoubleSlit::new(2.5, packet(0.0, 0.5, 1.0), 0.7, [C::new(0.6, 0.1), C::new(0.5, -0.3)]).unwrap(),
        ),
        WaveField::Superposition(
            Superposition::new(vec![
                (C::new(1.0, 0.0), WaveField::GaussianPacket(packet(0.3, 0.9, 1.0))),
                (C::new(0.2, 0.5), WaveField::GaussianPacket(packet(-0.4, 0.7, -0.5))),
            ])
            .unwrap(),
        ),
    ]
}

fn spin_fields() -> Vec<WaveField> {
    let s = SpinVector::new(0.6, 0.0, 0.8).unwrap();
    vec![
        WaveField::Waveguide(WaveguideSpinField::new(s, 0.9, 1.1, LongitudinalProfile::Odd, 1.0).unwrap()),
        WaveField::Waveguide(
            WaveguideSpinField::new(SpinVector::x(), 1.2, 0.8, LongitudinalProfile::Even, 1.5).unwrap(),
        ),
    ]
}

fn all_fields() -> Vec<WaveField> {
    let mut v = scalar_fields();
    v.extend(spin_fields());
    v
}

fn continuity_residual(f: &WaveField, x: Vector3<f64>, t: f64) -> f64 {
    let h = FD_STEP;
    let drho = (f.density(&x, t + h) - f.density(&x, t - h)) / (2.0 * h);
    let mut div = 0.0;
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = h;
        div += (f.current(&(x + e), t).total()[i] - f.current(&(x - e), t).total()[i]) / (2.0 * h);
    }
    (drho + div).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn continuity_holds_for_every_field(x in -1.5f64..1.5, y in -1.5f64..1.5, z in 0.1f64..2.0, t in 0.0f64..2.0) {
        for f in all_fields() {
            let r = continuity_residual(&f, Vector3::new(x, y, z), t);
            prop_assert!(r < 1e-6, "{r} for {f:?}");
        }
    }

    #[test]
    fn phase_gradient_matches_velocity(x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.2f64..1.5, t in 0.0f64..1.5) {
        let h = FD_STEP;
        for f in all_fields() {
            let p = Vector3::new(x, y, z);
            let s = f.evaluate(&p, t);
            if s.density <= 1e-6 {
                continue;
            }
            // Only the convective part of the current is a phase gradient.
            let v = f.current(&p, t).convective / s.density;
            let psi0 = s.psi;
            for i in 0..3 {
                let mut e = Vector3::zeros();
                e[i] = h;
                let local = |q: Vector3<f64>| {
                    let a = f.evaluate(&q, t).psi;
                    (0..2).map(|c| a[c] * psi0[c].conj()).sum::<C>().arg()
                };
                let grad = (local(p + e) - local(p - e)) / (2.0 * h) / f.mass();
                prop_assert!((grad - v[i]).abs() < 1e-6 * (1.0 + v[i].abs()), "{grad} vs {}", v[i]);
            }
        }
    }

    #[test]
    fn superposition_is_linear(x in -2.0f64..2.0, z in -2.0f64..2.0, t in 0.0f64..2.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let a = WaveField::GaussianPacket(packet(0.2, 0.7, 1.0));
        let b = WaveField::DoubleSlit(DoubleSlit::symmetric(2.0, packet(0.0, 0.4, -1.0), 0.3).unwrap());
        let c = C::new(re, im);
        let s = WaveField::Superposition(Superposition::new(vec![(C::new(1.0, 0.0), a.clone()), (c, b.clone())]).unwrap());
        let p = Vector3::new(x, 0.3, z);
        let (ja, jb, js) = (a.scalar_jet(&p, t), b.scalar_jet(&p, t), s.scalar_jet(&p, t));
        prop_assert!((js.value - (ja.value + c * jb.value)).norm() < 1e-12);
        for i in 0..3 {
            prop_assert!((js.grad[i] - (ja.grad[i] + c * jb.grad[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn spin_term_flips_with_spin(x in -2.0f64..2.0, y in -2.0f64..2.0, z in 0.05f64..3.0, t in 0.0f64..3.0,
                                  th in 0.0f64..PI, ph in 0.0f64..(2.0 * PI)) {
        let s = SpinVector::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()).unwrap();
        let f = WaveField::Waveguide(WaveguideSpinField::normalized(s));
        let g = WaveField::Waveguide(WaveguideSpinField::normalized(s.flipped()));
        let p = Vector3::new(x, y, z);
        let (a, b) = (f.current(&p, t), g.current(&p, t));
        let scale = a.spin.norm() + a.convective.norm() + f.density(&p, t);
        prop_assert!((a.spin + b.spin).norm() <= 1e-14 * scale, "{:?} vs {:?}", a.spin, b.spin);
        prop_assert!((a.convective - b.convective).norm() <= 1e-14 * scale);
    }

    #[test]
    fn slab_budget_identity(k in 0.5f64..20.0, theta in 0.0f64..1.45, n in 1e-3f64..2.0,
                            re in -1.0f64..1.0, im in 1e-3f64..1.0, d in 0.05f64..5.0) {
        let slab = SlabDetector::new(n, C::new(re, im), d, 1.7).unwrap();
        let b = slab_absorption_budget(k, theta, &slab).unwrap();
        let rel = (b.flux_in_minus_out - b.volume_absorption).abs() / b.flux_in_minus_out.abs();
        prop_assert!(rel < 1e-8, "relative mismatch {rel:e}");
        let s = slab_scatter(k, theta, &slab).unwrap();
        prop_assert!(s.absorption >= 0.0);
    }

    #[test]
    fn lossless_slab_conserves_probability(k in 0.5f64..20.0, theta in 0.0f64..1.5, n in 0.0f64..2.0,
                                           re in -1.0f64..1.0, d in 0.05f64..5.0) {
        let slab = SlabDetector::new(n, C::new(re, 0.0), d, 1.0).unwrap();
        let s = slab_scatter(k, theta, &slab).unwrap();
        prop_assert!((s.reflection.norm_sqr() + s.transmission.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn step_efficiency_is_monotone(chi0 in 0.01f64..3.0, d1 in 0.01f64..3.0, dd in 1e-3f64..3.0) {
        let p1 = PmlProfile::new(chi0, d1, ChiProfile::Step, PmlDirection::Forward, 1.0).unwrap();
        let p2 = PmlProfile { thickness: d1 + dd, ..p1 };
        prop_assert!(pml_detection_probability(&p2, 1.0).unwrap() > pml_detection_probability(&p1, 1.0).unwrap());
    }

    #[test]
    fn dd_density_is_nonnegative(tau in 0.0f64..1e3, l in 0.01f64..10.0, lambda0 in 0.1f64..10.0) {
        prop_assert!(dd_density(tau, l, lambda0) >= 0.0);
    }

    #[test]
    fn which_path_ignores_global_phase(phase in 0.0f64..(2.0 * PI), chi in 0.0f64..(2.0 * PI), a in 0.1f64..1.0) {
        let p = packet(0.0, 0.4, 1.0);
        let amps = [C::new(a, 0.0), C::new((1.0 - a * a).sqrt(), 0.0)];
        let base = DoubleSlit::new(4.0, p.clone(), chi, amps).unwrap();
        let g = C::from_polar(1.0, phase);
        let rotated = DoubleSlit::new(4.0, p, chi, [amps[0] * g, amps[1] * g]).unwrap();
        let w1 = which_path(&base, 0.8, WhichPathMethod::Quadrature).unwrap();
        let w2 = which_path(&rotated, 0.8, WhichPathMethod::Quadrature).unwrap();
        prop_assert!((w1.p_plus + w1.p_minus - 1.0).abs() < 1e-8);
        prop_assert!((w1.p_plus - w2.p_plus).abs() < 1e-12);
    }

    #[test]
    fn first_arrivals_never_exceed_all_crossings(times in prop::collection::vec(prop::collection::vec((0.0f64..1.0, any::<bool>()), 0..5), 1..40)) {
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let mut h = ArrivalHistogram::new(edges).unwrap();
        for mut cs in times {
            cs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let c: Vec<(f64, i8)> = cs.iter().map(|&(t, s)| (t, if s { 1 } else { -1 })).collect();
            h.record(&c);
        }
        let first = h.first();
        for (f, a) in first.iter().zip(&h.all) {
            prop_assert!(f <= a);
        }
        prop_assert_eq!(first.iter().sum::<u64>() + h.n_noarrival + h.n_lost, h.n_total);
    }

    #[test]
    fn gtz_is_symmetric_under_basis_swap(v in prop::collection::vec(0.0f64..1.0, 4 * 6)) {
        let grid: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let s = |k: usize| TauSeries { grid: grid.clone(), values: v[6 * k..6 * (k + 1)].to_vec() };
        let labels = [SpinLabel::PlusZ, SpinLabel::MinusZ, SpinLabel::PlusX, SpinLabel::MinusX];
        let swapped = [SpinLabel::PlusX, SpinLabel::MinusX, SpinLabel::PlusZ, SpinLabel::MinusZ];
        let a: BTreeMap<_, _> = labels.iter().enumerate().map(|(k, &l)| (l, s(k))).collect();
        let b: BTreeMap<_, _> = swapped.iter().enumerate().map(|(k, &l)| (l, s(k))).collect();
        let (ra, rb) = (gtz_sum_test(&a).unwrap(), gtz_sum_test(&b).unwrap());
        prop_assert_eq!(ra.max_deviation, rb.max_deviation);
        prop_assert_eq!(ra.tau_at_max, rb.tau_at_max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pointer_povms_satisfy_the_axioms(seed in any::<u64>(), ds in 1usize..=8, dm in 1usize..=8, cells_frac in 0.0f64..1.0) {
        let mut rng = sample_rng(seed, 0);
        let cells = 1 + ((dm - 1) as f64 * cells_frac) as usize;
        let model = PointerModel::random(ds, dm, cells, &mut rng).unwrap();
        let family = construct_pointer_povm(&model).unwrap();
        let report = check_povm(&family);
        prop_assert!(report.passes(), "{report:?}");
        let psi = DVector::from_fn(ds, |i, _| C::new((i as f64 + 1.0).sin(), (seed % 7) as f64 * 0.1 + i as f64 * 0.3));
        let psi = &psi / C::new(psi.norm(), 0.0);
        let a = family.probabilities(&psi).unwrap();
        let b = model.direct_probabilities(&psi).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
