//! Quasi-free evaluation of the same truncated operators.
//!
//! Every operator used by the field construction maps a single Slater
//! determinant to a single Slater determinant, so a state is stored as a
//! coefficient times the wedge of `N` orbitals in the `2M+1`-dimensional
//! one-particle window. The vacuum is the filled sea `e_{-1} ^ ... ^ e_{-M}`,
//! `c*_n` prepends `e_n` and `c_n` contracts with `e_n`. Charge is `N - M`.
//! Results agree with the [`FockOperator`](super::FockOperator) route
//! amplitude by amplitude, at a cost polynomial in `M`.

use super::measure::{phase_from_pairs, ExchangeMeasurement, ProbeSet};
use super::{shift_vectors, FockBasis, State};
use crate::modes::{ModeWindow, OneParticleOperator};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SlaterState {
    pub coeff: C64,
    /// `(2M+1) x N`; column `j` is the `j`-th factor of the wedge.
    pub orbitals: DMatrix<C64>,
}

fn det(m: DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        C64::new(1.0, 0.0)
    } else {
        m.determinant()
    }
}

/// Sign and orbital rows of the basis state `s`, built as `x*_{p_1} ... x*_{p_k} Omega`.
fn basis_orbitals(basis: FockBasis, s: State) -> (f64, Vec<usize>) {
    let w = basis.window;
    let m = w.cutoff as i64;
    let mut rows: Vec<usize> = (1..=m).map(|k| w.index(-k)).collect();
    let mut sign = 1.0;
    for bit in (0..basis.modes() as u32).rev() {
        if s >> bit & 1 == 0 {
            continue;
        }
        let n = basis.mode_of_bit(bit);
        if n >= 0 {
            rows.insert(0, w.index(n));
        } else {
            let j = rows.iter().position(|&r| r == w.index(n)).expect("hole in the sea");
            rows.remove(j);
            if j % 2 == 1 {
                sign = -sign;
            }
        }
    }
    (sign, rows)
}

impl SlaterState {
    pub fn vacuum(window: ModeWindow) -> Self {
        let m = window.cutoff as i64;
        let orbitals = DMatrix::from_fn(window.dim(), window.cutoff, |i, j| {
            if i == window.index(-(j as i64) - 1) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let _ = m;
        Self { coeff: C64::new(1.0, 0.0), orbitals }
    }

    pub fn from_basis_state(basis: FockBasis, s: State) -> Self {
        let (sign, rows) = basis_orbitals(basis, s);
        let d = basis.window.dim();
        let orbitals = DMatrix::from_fn(d, rows.len(), |i, j| if i == rows[j] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        Self { coeff: C64::new(sign, 0.0), orbitals }
    }

    pub fn particles(&self) -> usize {
        self.orbitals.ncols()
    }

    pub fn charge(&self, window: ModeWindow) -> i64 {
        self.particles() as i64 - window.cutoff as i64
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == C64::new(0.0, 0.0)
    }

    fn zero(dim: usize, n: usize) -> Self {
        Self { coeff: C64::new(0.0, 0.0), orbitals: DMatrix::zeros(dim, n) }
    }

    /// `<s, psi>` for the Fock basis state `s`.
    pub fn amplitude(&self, basis: FockBasis, s: State) -> C64 {
        let (sign, rows) = basis_orbitals(basis, s);
        if rows.len() != self.particles() || self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let n = rows.len();
        let sub = DMatrix::from_fn(n, n, |i, j| self.orbitals[(rows[i], j)]);
        self.coeff * sign * det(sub)
    }

    pub fn norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.coeff.norm() * det(self.orbitals.adjoint() * &self.orbitals).re.max(0.0).sqrt()
    }

    /// Dense Fock vector; only for windows small enough to enumerate.
    pub fn to_fock(&self, basis: FockBasis) -> Vec<C64> {
        (0..basis.dim() as State).map(|s| self.amplitude(basis, s)).collect()
    }

    fn with(&self, coeff: C64, orbitals: DMatrix<C64>) -> Self {
        Self { coeff, orbitals }
    }
}

#[derive(Clone, Debug)]
pub struct ShiftData {
    v: DMatrix<C64>,
    /// Unit vector spanning the orthogonal complement of the range of `V`.
    u: DVector<C64>,
    kappa: C64,
}

/// An operator acting within the set of single Slater determinants.
#[derive(Clone, Debug)]
pub enum SlaterOp {
    /// `F -> u F`, coefficient times `phase`.
    OneBody { u: DMatrix<C64>, phase: C64 },
    /// `F -> kappa (V F ^ u)`: the charge-raising implementer of a shift.
    Shift(Arc<ShiftData>),
    ShiftAdjoint(Arc<ShiftData>),
    /// `exp(i (a Q^2 + b Q + c))`.
    ChargePhase { quadratic: f64, linear: f64, constant: f64 },
}

impl SlaterOp {
    /// `exp(it dGamma(A))`.
    pub fn exponential(a: &OneParticleOperator, t: f64) -> Result<Self> {
        let dev = a.hermitian_deviation();
        if dev > 1e-10 * a.matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        let u = a.exp_i(t)?.matrix;
        let w = a.window;
        let trace: C64 = (1..=w.cutoff as i64).map(|k| a.entry(-k, -k)).sum();
        Ok(SlaterOp::OneBody { u, phase: C64::from_polar(1.0, -t * trace.re) })
    }

    /// The second-quantized rotation `U_0(omega)`, equal to one on the vacuum.
    pub fn rotation(window: ModeWindow, omega: f64) -> Self {
        let u = OneParticleOperator::rotation(window, omega).matrix;
        let sea: f64 = (1..=window.cutoff as i64).map(|k| k as f64).sum();
        SlaterOp::OneBody { u, phase: C64::from_polar(1.0, -omega * sea) }
    }

    /// Same phase convention as [`implementer_shift`](super::implementer_shift):
    /// the vacuum goes to `a*(e_0) Omega`.
    pub fn shift(v: &OneParticleOperator) -> Result<Self> {
        let sv = shift_vectors(v)?;
        let w = v.window;
        let svd = v.matrix.clone().svd(true, false);
        let uu = svd.u.unwrap();
        let smax = svd.singular_values.max();
        let small: Vec<usize> = (0..w.dim()).filter(|&k| svd.singular_values[k] < 1e-8 * smax).collect();
        if small.len() != 1 {
            return Err(Error::WrongClass(format!("range of V has codimension {}", small.len())));
        }
        let u = uu.column(small[0]).into_owned();
        let sea = SlaterState::vacuum(w).orbitals;
        let m = w.cutoff;
        let target = DMatrix::from_fn(w.dim(), m + 1, |i, j| if j == 0 { sv.e_zero[i] } else { sea[(i, j - 1)] });
        let vs = &v.matrix * &sea;
        let image = DMatrix::from_fn(w.dim(), m + 1, |i, j| if j < m { vs[(i, j)] } else { u[i] });
        let overlap = det(target.adjoint() * &image);
        if overlap.norm() < 1e-12 {
            return Err(Error::WrongClass("shift annihilates the vacuum".into()));
        }
        let kappa = det(target.adjoint() * &target) / overlap;
        Ok(SlaterOp::Shift(Arc::new(ShiftData { v: v.matrix.clone(), u, kappa })))
    }

    pub fn charge_phase(quadratic: f64, linear: f64, constant: f64) -> Self {
        SlaterOp::ChargePhase { quadratic, linear, constant }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            SlaterOp::OneBody { u, phase } => SlaterOp::OneBody { u: u.adjoint(), phase: phase.conj() },
            SlaterOp::Shift(d) => SlaterOp::ShiftAdjoint(d.clone()),
            SlaterOp::ShiftAdjoint(d) => SlaterOp::Shift(d.clone()),
            SlaterOp::ChargePhase { quadratic, linear, constant } => {
                SlaterOp::ChargePhase { quadratic: -quadratic, linear: -linear, constant: -constant }
            }
        }
    }

    pub fn apply(&self, psi: &SlaterState) -> SlaterState {
        let d = psi.orbitals.nrows();
        let n = psi.particles();
        match self {
            SlaterOp::OneBody { u, phase } => psi.with(psi.coeff * phase, u * &psi.orbitals),
            SlaterOp::ChargePhase { quadratic, linear, constant } => {
                let m = (d - 1) / 2;
                let q = n as f64 - m as f64;
                psi.with(psi.coeff * C64::from_polar(1.0, quadratic * q * q + linear * q + constant), psi.orbitals.clone())
            }
            SlaterOp::Shift(sd) => {
                if n + 1 > d || psi.is_zero() {
                    return SlaterState::zero(d, n + 1);
                }
                let vf = &sd.v * &psi.orbitals;
                let f = DMatrix::from_fn(d, n + 1, |i, j| if j < n { vf[(i, j)] } else { sd.u[i] });
                psi.with(psi.coeff * sd.kappa, f)
            }
            SlaterOp::ShiftAdjoint(sd) => {
                if n == 0 || psi.is_zero() {
                    return SlaterState::zero(d, n.saturating_sub(1));
                }
                let h = &psi.orbitals;
                let overlaps: Vec<C64> = (0..n).map(|j| sd.u.dotc(&h.column(j))).collect();
                let (jmax, big) = overlaps
                    .iter()
                    .copied()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .unwrap();
                if big.norm() == 0.0 {
                    return SlaterState::zero(d, n - 1);
                }
                let pivot = h.column(jmax).into_owned();
                let mut rest = DMatrix::zeros(d, n - 1);
                for (k, j) in (0..n).filter(|&j| j != jmax).enumerate() {
                    let col = h.column(j) - &pivot * (overlaps[j] / big);
                    rest.set_column(k, &col);
                }
                // moving the pivot to the last slot costs n - 1 - jmax transpositions
                let sign = if (n - 1 - jmax).is_multiple_of(2) { 1.0 } else { -1.0 };
                psi.with(psi.coeff * big * sign * sd.kappa.conj(), sd.v.adjoint() * rest)
            }
        }
    }

    /// Net change of the particle number.
    pub fn charge_shift(&self) -> i64 {
        match self {
            SlaterOp::Shift(_) => 1,
            SlaterOp::ShiftAdjoint(_) => -1,
            _ => 0,
        }
    }
}

/// A product `ops[0] ops[1] ...`, applied right to left.
#[derive(Clone, Debug, Default)]
pub struct SlaterProduct(pub Vec<SlaterOp>);

impl SlaterProduct {
    pub fn new(ops: Vec<SlaterOp>) -> Self {
        Self(ops)
    }

    pub fn then(mut self, right: &SlaterProduct) -> Self {
        self.0.extend(right.0.iter().cloned());
        self
    }

    pub fn apply(&self, psi: &SlaterState) -> SlaterState {
        self.0.iter().rev().fold(psi.clone(), |acc, op| op.apply(&acc))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.iter().rev().map(SlaterOp::adjoint).collect())
    }

    pub fn charge_shift(&self) -> i64 {
        self.0.iter().map(SlaterOp::charge_shift).sum()
    }
}

/// Quasi-free counterpart of [`measure_exchange_phase`](super::measure_exchange_phase).
pub fn measure_exchange_phase_slater(
    x: &SlaterProduct,
    y: &SlaterProduct,
    probes: &ProbeSet,
) -> Result<ExchangeMeasurement> {
    phase_from_pairs(&exchange_pairs_slater(x, y, probes))
}

/// `(<t, XY v>, <t, YX v>)` over probes `v` and band targets `t`.
pub fn exchange_pairs_slater(x: &SlaterProduct, y: &SlaterProduct, probes: &ProbeSet) -> Vec<(C64, C64)> {
    let basis = probes.basis;
    let shift = x.charge_shift() + y.charge_shift();
    probes
        .probes
        .par_iter()
        .flat_map_iter(|&s| {
            let v = SlaterState::from_basis_state(basis, s);
            let xy = x.apply(&y.apply(&v));
            let yx = y.apply(&x.apply(&v));
            probes
                .targets(basis.charge(s) + shift)
                .into_iter()
                .map(|t| (xy.amplitude(basis, t), yx.amplitude(basis, t)))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `max |<t, X v> - <t, Y v>|` over probes `v` and band targets `t`.
pub fn probe_discrepancy(x: &SlaterProduct, y: &SlaterProduct, probes: &ProbeSet) -> f64 {
    let basis = probes.basis;
    let shift = x.charge_shift();
    probes
        .probes
        .par_iter()
        .map(|&s| {
            let v = SlaterState::from_basis_state(basis, s);
            let (a, b) = (x.apply(&v), y.apply(&v));
            probes
                .targets(basis.charge(s) + shift)
                .into_iter()
                .map(|t| (a.amplitude(basis, t) - b.amplitude(basis, t)).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
