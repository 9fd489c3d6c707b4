//! Truncated fermionic Fock space over a [`ModeWindow`].
//!
//! Basis states are bitmasks over the `2M+1` modes, bit `n + M` for mode `n`.
//! A set bit at a plus mode is a particle (`a*`), a set bit at a minus mode is
//! a hole (`b*`). The vacuum is the empty bitmask and the charge is
//! `#particles - #holes`. A state is `x*_{p_1} ... x*_{p_k} Omega` with the
//! bits in increasing order, which fixes all Jordan-Wigner signs.

mod bilinear;
mod car;
mod expmv;
mod implementer;
mod measure;
pub mod slater;

pub use bilinear::{dgamma, implementer_exp, Bilinear, Implementer};
pub use car::{
    annihilate, car_operators, charge_operator, create, free_field, second_quantize_diagonal, CarOperators, Ladder,
};
pub use expmv::{expmv_hermitian, KrylovOptions};
pub use implementer::{
    conjugate_blocks, ec_normal_ordered, gamma_minus, gamma_plus, implementer_shift, implementer_shift_via_ec,
    shift_vectors, ConjugateBlocks, ShiftVectors,
};
pub use measure::{measure_exchange_phase, phase_from_pairs, ExchangeMeasurement, ProbePolicy, ProbeSet};

use crate::modes::ModeWindow;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

pub type State = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    pub window: ModeWindow,
}

impl FockBasis {
    pub fn new(window: ModeWindow) -> Result<Self> {
        if window.dim() > 40 {
            return Err(Error::Invalid(format!("window of {} modes is too large for a Fock basis", window.dim())));
        }
        Ok(Self { window })
    }

    pub fn modes(&self) -> usize {
        self.window.dim()
    }

    pub fn dim(&self) -> usize {
        1usize << self.modes()
    }

    pub fn bit(&self, n: i64) -> u32 {
        self.window.index(n) as u32
    }

    pub fn mode_of_bit(&self, bit: u32) -> i64 {
        self.window.mode(bit as usize)
    }

    pub fn plus_mask(&self) -> State {
        let m = self.window.cutoff as u32;
        ((1u64 << (m + 1)) - 1) << m
    }

    pub fn minus_mask(&self) -> State {
        (1u64 << self.window.cutoff) - 1
    }

    pub fn vacuum(&self) -> State {
        0
    }

    pub fn charge(&self, s: State) -> i64 {
        (s & self.plus_mask()).count_ones() as i64 - (s & self.minus_mask()).count_ones() as i64
    }

    /// Bitmask with the given modes occupied (particles for `n >= 0`, holes for `n < 0`).
    pub fn state(&self, modes: &[i64]) -> State {
        modes.iter().fold(0, |s, &n| s | (1 << self.bit(n)))
    }

    pub fn occupied_modes(&self, s: State) -> Vec<i64> {
        (0..self.modes() as u32).filter(|b| s >> b & 1 == 1).map(|b| self.mode_of_bit(b)).collect()
    }

    pub fn sector(&self, q: i64) -> Vec<State> {
        (0..self.dim() as State).filter(|&s| self.charge(s) == q).collect()
    }

    pub fn basis_vector(&self, s: State) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[s as usize] = C64::new(1.0, 0.0);
        v
    }

    pub fn charge_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.window.cutoff as i64)..=self.window.cutoff as i64 + 1
    }
}

/// The grading degree of an operator: `H_q -> H_{q + shift}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeShift {
    Pure(i64),
    Mixed,
    /// The zero operator is homogeneous of every degree.
    Zero,
}

/// Sparse complex operator in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub basis: FockBasis,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

/// Anything that can act on Fock vectors.
pub trait FockMap: Sync {
    fn basis(&self) -> FockBasis;
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>>;
}

impl FockOperator {
    /// Builds the operator column by column from `f(s) = [(target, amplitude)]`.
    pub fn from_columns(basis: FockBasis, f: impl Fn(State) -> Vec<(State, C64)>) -> Self {
        let d = basis.dim();
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); d];
        for s in 0..d as State {
            for (t, z) in f(s) {
                if z != C64::new(0.0, 0.0) {
                    rows[t as usize].push((s as u32, z));
                }
            }
        }
        Self::from_rows(basis, rows)
    }

    fn from_rows(basis: FockBasis, rows: Vec<Vec<(u32, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<u32> = None;
            for (c, z) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += z;
                } else {
                    cols.push(c);
                    vals.push(z);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { basis, row_ptr, cols, vals }
    }

    pub fn zero(basis: FockBasis) -> Self {
        Self { basis, row_ptr: vec![0; basis.dim() + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(basis: FockBasis) -> Self {
        Self::diagonal(basis, |_| C64::new(1.0, 0.0))
    }

    pub fn diagonal(basis: FockBasis, f: impl Fn(State) -> C64) -> Self {
        Self::from_columns(basis, |s| vec![(s, f(s))])
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (State, State, C64)> + '_ {
        (0..self.basis.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r as State, self.cols[k] as State, self.vals[k]))
        })
    }

    pub fn get(&self, row: State, col: State) -> C64 {
        let r = row as usize;
        let slice = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match slice.binary_search(&(col as u32)) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.basis.dim());
        (0..self.basis.dim())
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k] * v[self.cols[k] as usize]).sum())
            .collect()
    }

    pub fn apply_state(&self, s: State) -> Vec<C64> {
        self.apply_vec(&self.basis.basis_vector(s))
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.basis.dim()];
        for (r, c, z) in self.entries() {
            rows[c as usize].push((r as u32, z.conj()));
        }
        Self::from_rows(self.basis, rows)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let d = self.basis.dim();
        let mut acc = vec![C64::new(0.0, 0.0); d];
        let mut touched: Vec<u32> = Vec::new();
        let mut mark = vec![false; d];
        let mut rows = Vec::with_capacity(d);
        for r in 0..d {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.cols[k] as usize;
                let z = self.vals[k];
                for j in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.cols[j] as usize;
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c as u32);
                    }
                    acc[c] += z * other.vals[j];
                }
            }
            let mut row = Vec::with_capacity(touched.len());
            for &c in &touched {
                let c = c as usize;
                if acc[c] != C64::new(0.0, 0.0) {
                    row.push((c as u32, acc[c]));
                }
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
            rows.push(row);
        }
        Ok(Self::from_rows(self.basis, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.basis.dim()];
        for (r, c, z) in self.entries().chain(other.entries()) {
            rows[r as usize].push((c as u32, z));
        }
        Ok(Self::from_rows(self.basis, rows))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { vals: self.vals.iter().map(|v| v * z).collect(), ..self.clone() }
    }

    /// Anticommutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.vals.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = self.basis.dim();
        let mut m = DMatrix::zeros(d, d);
        for (r, c, z) in self.entries() {
            m[(r as usize, c as usize)] = z;
        }
        m
    }

    pub fn from_dense(basis: FockBasis, m: &DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Invalid("dense matrix does not match the basis".into()));
        }
        let rows = (0..d)
            .map(|r| (0..d).filter(|&c| m[(r, c)] != C64::new(0.0, 0.0)).map(|c| (c as u32, m[(r, c)])).collect())
            .collect();
        Ok(Self::from_rows(basis, rows))
    }

    /// Grading degree found by scanning every nonzero entry. Entries below `tol` are ignored.
    pub fn charge_shift(&self, tol: f64) -> ChargeShift {
        let mut shift = None;
        for (r, c, z) in self.entries() {
            if z.norm() <= tol {
                continue;
            }
            let d = self.basis.charge(r) - self.basis.charge(c);
            match shift {
                None => shift = Some(d),
                Some(s) if s != d => return ChargeShift::Mixed,
                _ => {}
            }
        }
        shift.map_or(ChargeShift::Zero, ChargeShift::Pure)
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::WindowMismatch(self.basis.window.cutoff, other.basis.window.cutoff));
        }
        Ok(())
    }
}

impl FockMap for FockOperator {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_vec(v))
    }
}

/// Applies a chain of maps right to left: `maps[0] (maps[1] (... v))`.
pub struct Product<'a>(pub Vec<&'a dyn FockMap>);

impl FockMap for Product<'_> {
    fn basis(&self) -> FockBasis {
        self.0[0].basis()
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut w = v.to_vec();
        for m in self.0.iter().rev() {
            w = m.apply(&w)?;
        }
        Ok(w)
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
