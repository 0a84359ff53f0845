//! Adaptive Gauss–Kronrod (G7/K15) quadrature in one dimension, with infinite-range
//! transforms, and tensor-product nesting for boxes in several dimensions.

use alloc::collections::BinaryHeap;
use alloc::vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Default {
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Convergence controls. The run stops once the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 4000 }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = WGK[7] * fc.magnitude();
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let scale = half.abs();
    resabs *= scale;
    resasc *= scale;
    let mut err = ((resk - resg) * half).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (resk * half, err)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult<T>> {
    let (value, error) = kronrod(f, a, b);
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut splits = 0;
    while total_err > opts.target(total.magnitude()) {
        if !total_err.is_finite() || !total.magnitude().is_finite() {
            return Err(Error::Quadrature { estimate: total_err, tolerance: opts.target(0.0) });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= opts.max_subdivisions || mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature { estimate: total_err, tolerance: opts.target(total.magnitude()) });
        }
        let (v1, e1) = kronrod(f, worst.a, mid);
        let (v2, e2) = kronrod(f, mid, worst.b);
        evaluations += 30;
        splits += 1;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        if splits % 64 == 0 {
            // Refresh the running sums to keep cancellation from drifting.
            total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(QuadResult { value: total, error: total_err, evaluations })
}

/// Integrates `f` over `[a, b]`. Either bound may be infinite.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("bounds", "NaN integration bound"));
    }
    if a == b {
        return Ok(QuadResult { value: T::default(), error: 0.0, evaluations: 0 });
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult { value: r.value * -1.0, ..r });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&mut f, a, b, opts),
        (true, false) => adaptive(
            &mut |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) * (1.0 / (s * s))
            },
            0.0,
            1.0,
            opts,
        ),
        (false, true) => adaptive(
            &mut |t: f64| {
                let s = 1.0 - t;
                f(b - t / s) * (1.0 / (s * s))
            },
            0.0,
            1.0,
            opts,
        ),
        (false, false) => adaptive(
            &mut |t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * ((1.0 + t * t) / (s * s))
            },
            -1.0,
            1.0,
            opts,
        ),
    }
}

/// Tensor-product integration of `f` over the box `lower × upper`, nesting the 1D rule
/// from the first coordinate (outermost) to the last (innermost).
pub fn integrate_box<T: QuadValue>(
    mut f: impl FnMut(&[f64]) -> T,
    lower: &[f64],
    upper: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    if lower.len() != upper.len() || lower.is_empty() {
        return Err(Error::invalid("bounds", "lower and upper must have equal, nonzero length"));
    }
    let mut point = vec![0.0; lower.len()];
    let mut evaluations = 0;
    let r = nested(&mut f, lower, upper, opts, &mut point, 0, &mut evaluations)?;
    Ok(QuadResult { evaluations, ..r })
}

fn nested<T: QuadValue>(
    f: &mut dyn FnMut(&[f64]) -> T,
    lower: &[f64],
    upper: &[f64],
    opts: &QuadOptions,
    point: &mut [f64],
    dim: usize,
    evaluations: &mut usize,
) -> Result<QuadResult<T>> {
    let last = dim + 1 == lower.len();
    let width = (upper[dim] - lower[dim]).abs().max(f64::MIN_POSITIVE);
    let inner = QuadOptions { abs_tol: 0.5 * opts.abs_tol / width, ..*opts };
    let mut failure = None;
    let r = integrate(
        |x| {
            point[dim] = x;
            if last {
                *evaluations += 1;
                return f(point);
            }
            if failure.is_some() {
                return T::default();
            }
            match nested(f, lower, upper, &inner, point, dim + 1, evaluations) {
                Ok(v) => v.value,
                Err(e) => {
                    failure = Some(e);
                    T::default()
                }
            }
        },
        lower[dim],
        upper[dim],
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    r
}
