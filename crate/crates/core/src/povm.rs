//! Finite-dimensional POVMs: certification of the positivity and completeness axioms, the
//! pointer-model construction O_n = ⟨Φ0|U† Π_n U|Φ0⟩, the additivity counterexample for
//! the absolute current, and the spin-basis sum test.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::fields::WaveField;
use crate::{Error, Result};

type C = Complex64;

/// Tolerance of every axiom check.
pub const POVM_TOL: f64 = 1e-10;

/// Square complex matrices of one dimension with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    pub dim: usize,
    pub members: Vec<DMatrix<C>>,
    pub labels: Vec<String>,
}

impl OperatorFamily {
    pub fn new(members: Vec<DMatrix<C>>, labels: Vec<String>) -> Result<Self> {
        let dim = members.first().map(|m| m.nrows()).ok_or_else(|| Error::invalid("members", "family is empty"))?;
        if members.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::invalid("members", "every member must be square of one dimension"));
        }
        if labels.len() != members.len() {
            return Err(Error::invalid("labels", "need one label per member"));
        }
        Ok(Self { dim, members, labels })
    }

    /// Members labelled by their index.
    pub fn unlabelled(members: Vec<DMatrix<C>>) -> Result<Self> {
        let labels = (0..members.len()).map(|i| format!("{i}")).collect();
        Self::new(members, labels)
    }

    /// ⟨ψ|O_n|ψ⟩ for each member.
    pub fn probabilities(&self, psi: &DVector<C>) -> Result<Vec<f64>> {
        if psi.len() != self.dim {
            return Err(Error::invalid("psi", "state dimension differs from the family"));
        }
        Ok(self.members.iter().map(|m| psi.dotc(&(m * psi)).re).collect())
    }
}

/// Outcome of the axiom checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmReport {
    /// max |O − O†| entry over members.
    pub hermiticity: f64,
    /// Smallest eigenvalue of (O + O†)/2 over members.
    pub min_eigenvalue: f64,
    /// max |ΣO − I| entry.
    pub completeness: f64,
}

impl PovmReport {
    pub fn passes(&self) -> bool {
        self.hermiticity < POVM_TOL && self.min_eigenvalue > -POVM_TOL && self.completeness < POVM_TOL
    }
}

fn max_entry(m: &DMatrix<C>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn check_povm(family: &OperatorFamily) -> PovmReport {
    let n = family.dim;
    let mut hermiticity = 0.0f64;
    let mut min_eigenvalue = f64::INFINITY;
    let mut sum = DMatrix::<C>::zeros(n, n);
    for m in &family.members {
        let adj = m.adjoint();
        hermiticity = hermiticity.max(max_entry(&(m - &adj)));
        let sym = (m + &adj).scale(0.5);
        let low = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        min_eigenvalue = min_eigenvalue.min(low);
        sum += m;
    }
    let completeness = max_entry(&(sum - DMatrix::<C>::identity(n, n)));
    PovmReport { hermiticity, min_eigenvalue, completeness }
}

/// System ⊗ pointer with a joint unitary; joint index is i·dm + j for system i, pointer j.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerModel {
    pub ds: usize,
    pub dm: usize,
    pub unitary: DMatrix<C>,
    pub pointer_state: DVector<C>,
    /// Disjoint pointer-index cells covering 0..dm.
    pub partition: Vec<Vec<usize>>,
}

impl PointerModel {
    pub fn new(
        ds: usize,
        dm: usize,
        unitary: DMatrix<C>,
        pointer_state: DVector<C>,
        partition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if ds == 0 || dm == 0 {
            return Err(Error::invalid("dims", "system and pointer dimensions must be positive"));
        }
        let n = ds * dm;
        if unitary.nrows() != n || unitary.ncols() != n {
            return Err(Error::invalid("unitary", "must be (ds·dm) × (ds·dm)"));
        }
        let defect = max_entry(&(unitary.adjoint() * &unitary - DMatrix::<C>::identity(n, n)));
        if defect > POVM_TOL {
            return Err(Error::invalid("unitary", format!("not unitary: max |U†U − I| = {defect:e}")));
        }
        if pointer_state.len() != dm || (pointer_state.norm() - 1.0).abs() > POVM_TOL {
            return Err(Error::invalid("pointer_state", "must be a unit vector of the pointer dimension"));
        }
        let mut seen = alloc::vec![false; dm];
        for cell in &partition {
            if cell.is_empty() {
                return Err(Error::invalid("partition", "cells must be nonempty"));
            }
            for &j in cell {
                if j >= dm || seen[j] {
                    return Err(Error::invalid("partition", format!("index {j} out of range or repeated")));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("partition", "cells must cover every pointer index"));
        }
        Ok(Self { ds, dm, unitary, pointer_state, partition })
    }

    /// Haar-random unitary, random pointer state and a random partition into `cells`.
    pub fn random(ds: usize, dm: usize, cells: usize, rng: &mut impl Rng) -> Result<Self> {
        if cells == 0 || cells > dm {
            return Err(Error::invalid("cells", "need 1 ≤ cells ≤ pointer dimension"));
        }
        let unitary = random_unitary(ds * dm, rng);
        let mut state = DVector::from_fn(dm, |_, _| gaussian_complex(rng));
        state /= C::new(state.norm(), 0.0);
        let mut order: Vec<usize> = (0..dm).collect();
        for i in (1..dm).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut partition: Vec<Vec<usize>> = order[..cells].iter().map(|&j| alloc::vec![j]).collect();
        for &j in &order[cells..] {
            partition[rng.random_range(0..cells)].push(j);
        }
        Self::new(ds, dm, unitary, state, partition)
    }

    /// Pointer-cell probabilities from direct evolution of ψ ⊗ Φ0.
    pub fn direct_probabilities(&self, psi: &DVector<C>) -> Result<Vec<f64>> {
        if psi.len() != self.ds {
            return Err(Error::invalid("psi", "state dimension differs from the system"));
        }
        let joint = DVector::from_fn(self.ds * self.dm, |k, _| psi[k / self.dm] * self.pointer_state[k % self.dm]);
        let out = &self.unitary * joint;
        Ok(self
            .partition
            .iter()
            .map(|cell| {
                (0..self.ds).flat_map(|i| cell.iter().map(move |&j| i * self.dm + j)).map(|k| out[k].norm_sqr()).sum()
            })
            .collect())
    }
}

fn gaussian_complex(rng: &mut impl Rng) -> C {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt() * FRAC_1_SQRT_2;
    C::from_polar(r, 2.0 * PI * u2)
}

/// Haar-distributed unitary from the QR factorisation of a complex Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<C> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// O_n = V† P_n V with V = U(I ⊗ Φ0).
pub fn construct_pointer_povm(model: &PointerModel) -> Result<OperatorFamily> {
    let (ds, dm) = (model.ds, model.dm);
    let embed =
        DMatrix::from_fn(ds * dm, ds, |k, i| if k / dm == i { model.pointer_state[k % dm] } else { C::new(0.0, 0.0) });
    let v = &model.unitary * embed;
    let members = model
        .partition
        .iter()
        .map(|cell| {
            let rows: Vec<usize> = (0..ds).flat_map(|i| cell.iter().map(move |&j| i * dm + j)).collect();
            let vn = v.select_rows(rows.iter());
            vn.adjoint() * vn
        })
        .collect();
    let labels = (0..model.partition.len()).map(|n| format!("cell{n}")).collect();
    OperatorFamily::new(members, labels)
}

/// Normal currents of two fields and of their normalised sum and difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport {
    pub j1: f64,
    pub j2: f64,
    pub j_plus: f64,
    pub j_minus: f64,
    /// |J1 + J2 − J+ − J−|, zero up to rounding.
    pub signed_defect: f64,
    /// |(|J1| + |J2|) − (|J+| + |J−|)|, positive when either superposition flows backwards.
    pub absolute_defect: f64,
}

/// Additivity of J·n versus |J·n| for Ψ± = (Ψ1 ± Ψ2)/√2 at (x, t).
pub fn current_povm_counterexample(
    field1: &WaveField,
    field2: &WaveField,
    x: &Vector3<f64>,
    t: f64,
    normal: &Vector3<f64>,
) -> Result<CounterexampleReport> {
    if field1.is_spinor() || field2.is_spinor() {
        return Err(Error::Precondition("counterexample takes scalar fields".into()));
    }
    let m = field1.mass();
    if (field2.mass() - m).abs() > 1e-12 * m {
        return Err(Error::Precondition("fields must share one mass".into()));
    }
    let n = normal.normalize();
    let (a, b) = (field1.scalar_jet(x, t), field2.scalar_jet(x, t));
    let flux = |psi: C, grad: &Vector3<C>| -> f64 { grad.map(|g| (psi.conj() * g).im).dot(&n) / m };
    let j1 = flux(a.value, &a.grad);
    let j2 = flux(b.value, &b.grad);
    if !(j1 > 0.0 && j2 > 0.0) {
        return Err(Error::Precondition(format!("both currents must flow forward: J1·n = {j1:e}, J2·n = {j2:e}")));
    }
    let s = FRAC_1_SQRT_2;
    let j_plus = flux((a.value + b.value) * s, &((a.grad + b.grad) * C::new(s, 0.0)));
    let j_minus = flux((a.value - b.value) * s, &((a.grad - b.grad) * C::new(s, 0.0)));
    Ok(CounterexampleReport {
        j1,
        j2,
        j_plus,
        j_minus,
        signed_defect: (j1 + j2 - j_plus - j_minus).abs(),
        absolute_defect: ((j1.abs() + j2.abs()) - (j_plus.abs() + j_minus.abs())).abs(),
    })
}

/// Spin preparation of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpinLabel {
    PlusZ,
    MinusZ,
    PlusX,
    MinusX,
}

/// Values of a distribution on a τ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSeries {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtzReport {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub max_deviation: f64,
    pub tau_at_max: f64,
}

/// Compares P₊z + P₋z with P₊x + P₋x pointwise.
pub fn gtz_sum_test(dist: &BTreeMap<SpinLabel, TauSeries>) -> Result<GtzReport> {
    let get = |l: SpinLabel| dist.get(&l).ok_or_else(|| Error::GridMismatch(format!("missing distribution for {l:?}")));
    let series = [get(SpinLabel::PlusZ)?, get(SpinLabel::MinusZ)?, get(SpinLabel::PlusX)?, get(SpinLabel::MinusX)?];
    let grid = &series[0].grid;
    for s in &series {
        if s.grid != *grid || s.values.len() != grid.len() {
            return Err(Error::GridMismatch("all four distributions must share one τ grid".into()));
        }
    }
    let lhs: Vec<f64> = (0..grid.len()).map(|i| series[0].values[i] + series[1].values[i]).collect();
    let rhs: Vec<f64> = (0..grid.len()).map(|i| series[2].values[i] + series[3].values[i]).collect();
    let (mut max_deviation, mut tau_at_max) = (0.0, grid.first().copied().unwrap_or(f64::NAN));
    for i in 0..grid.len() {
        let d = (lhs[i] - rhs[i]).abs();
        if d > max_deviation {
            max_deviation = d;
            tau_at_max = grid[i];
        }
    }
    Ok(GtzReport { lhs, rhs, max_deviation, tau_at_max })
}
