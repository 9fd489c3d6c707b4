use super::{FockBasis, FockOperator, State};
use crate::modes::OneParticleOperator;
use crate::{Error, Result, C64};
use nalgebra::DVector;

/// A single Jordan-Wigner ladder operator on bit `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(u32),
    Annihilate(u32),
}

fn jw_sign(s: State, bit: u32) -> f64 {
    if (s & ((1u64 << bit) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn create(s: State, bit: u32) -> Option<(f64, State)> {
    if s >> bit & 1 == 1 {
        None
    } else {
        Some((jw_sign(s, bit), s | 1 << bit))
    }
}

pub fn annihilate(s: State, bit: u32) -> Option<(f64, State)> {
    if s >> bit & 1 == 0 {
        None
    } else {
        Some((jw_sign(s, bit), s & !(1 << bit)))
    }
}

impl Ladder {
    pub fn act(self, s: State) -> Option<(f64, State)> {
        match self {
            Ladder::Create(b) => create(s, b),
            Ladder::Annihilate(b) => annihilate(s, b),
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            Ladder::Create(b) => Ladder::Annihilate(b),
            Ladder::Annihilate(b) => Ladder::Create(b),
        }
    }

    pub fn to_operator(self, basis: FockBasis) -> FockOperator {
        FockOperator::from_columns(basis, |s| {
            self.act(s).map(|(sg, t)| vec![(t, C64::new(sg, 0.0))]).unwrap_or_default()
        })
    }
}

impl FockBasis {
    /// Unified annihilator: `c_n = a_n` for `n >= 0`, `c_n = b*_n` for `n < 0`.
    pub fn c(&self, n: i64) -> Ladder {
        if n >= 0 {
            Ladder::Annihilate(self.bit(n))
        } else {
            Ladder::Create(self.bit(n))
        }
    }

    /// `c*_n`, so that the free field of `e_n` is `c*_n`.
    pub fn c_dag(&self, n: i64) -> Ladder {
        self.c(n).adjoint()
    }
}

/// The ladder operators `a_n, a*_n` (`n >= 0`) and `b_n, b*_n` (`n < 0`).
pub struct CarOperators {
    basis: FockBasis,
    a: Vec<FockOperator>,
    b: Vec<FockOperator>,
}

impl CarOperators {
    pub fn a(&self, n: i64) -> &FockOperator {
        &self.a[n as usize]
    }

    pub fn a_dag(&self, n: i64) -> FockOperator {
        self.a(n).adjoint()
    }

    pub fn b(&self, n: i64) -> &FockOperator {
        &self.b[(n + self.basis.window.cutoff as i64) as usize]
    }

    pub fn b_dag(&self, n: i64) -> FockOperator {
        self.b(n).adjoint()
    }
}

pub fn car_operators(basis: FockBasis) -> CarOperators {
    let m = basis.window.cutoff as i64;
    let a = (0..=m).map(|n| Ladder::Annihilate(basis.bit(n)).to_operator(basis)).collect();
    let b = (-m..0).map(|n| Ladder::Annihilate(basis.bit(n)).to_operator(basis)).collect();
    CarOperators { basis, a, b }
}

pub fn charge_operator(basis: FockBasis) -> FockOperator {
    FockOperator::diagonal(basis, |s| C64::new(basis.charge(s) as f64, 0.0))
}

/// `phi(f) = a*(f^+) + b(conj f^-) = sum_n f_n c*_n`.
pub fn free_field(basis: FockBasis, f: &DVector<C64>) -> Result<FockOperator> {
    let w = basis.window;
    if f.len() != w.dim() {
        return Err(Error::Invalid("mode vector does not match the window".into()));
    }
    Ok(FockOperator::from_columns(basis, |s| {
        w.modes()
            .filter_map(|n| {
                let z = f[w.index(n)];
                if z == C64::new(0.0, 0.0) {
                    return None;
                }
                basis.c_dag(n).act(s).map(|(sg, t)| (t, z * sg))
            })
            .collect()
    }))
}

/// `Gamma_+(U_{++}) (x) Gamma_-(conj U_{--})` for diagonal `U`.
pub fn second_quantize_diagonal(u: &OneParticleOperator, basis: FockBasis) -> Result<FockOperator> {
    let off = u.off_diagonal_norm();
    if off > 1e-12 * u.matrix.norm().max(1.0) {
        return Err(Error::NotDiagonal(off));
    }
    let w = basis.window;
    let diag: Vec<C64> = w
        .modes()
        .map(|n| {
            let z = u.matrix[(w.index(n), w.index(n))];
            if n >= 0 {
                z
            } else {
                z.conj()
            }
        })
        .collect();
    Ok(FockOperator::diagonal(basis, |s| {
        (0..w.dim()).filter(|&b| s >> b & 1 == 1).map(|b| diag[b]).product()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeWindow;
    use proptest::prelude::*;

    fn basis(m: usize) -> FockBasis {
        FockBasis::new(ModeWindow::new(m).unwrap()).unwrap()
    }

    fn close(a: &FockOperator, b: &FockOperator, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn car_relations_exact() {
        let fb = basis(2);
        let car = car_operators(fb);
        let id = FockOperator::identity(fb);
        let zero = FockOperator::zero(fb);
        let mut all: Vec<FockOperator> = Vec::new();
        for n in 0..=2 {
            all.push(car.a(n).clone());
        }
        for n in -2..0 {
            all.push(car.b(n).clone());
        }
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                let ad = x.anticommutator(&y.adjoint()).unwrap();
                let expect = if i == j { &id } else { &zero };
                assert!(close(&ad, expect, 0.0), "{i} {j}");
                assert!(close(&x.anticommutator(y).unwrap(), &zero, 0.0));
            }
        }
    }

    #[test]
    fn vacuum_examples() {
        let fb = basis(3);
        let car = car_operators(fb);
        let v = car.a_dag(0).apply_state(0);
        assert_eq!(v[fb.state(&[0]) as usize], C64::new(1.0, 0.0));
        assert!(super::super::vec_norm(&car.b(-1).apply_state(0)) == 0.0);
        for n in 0..=3 {
            assert_eq!(super::super::vec_norm(&car.a(n).apply_state(0)), 0.0);
        }
    }

    #[test]
    fn charge_examples() {
        let fb = basis(2);
        let q = charge_operator(fb);
        let car = car_operators(fb);
        assert_eq!(q.get(0, 0), C64::new(0.0, 0.0));
        let s = fb.state(&[0]);
        assert_eq!(q.get(s, s), C64::new(1.0, 0.0));
        let s = fb.state(&[-1]);
        assert_eq!(q.get(s, s), C64::new(-1.0, 0.0));
        // Q as a sum of number operators
        let mut sum = FockOperator::zero(fb);
        for n in 0..=2 {
            sum = sum.add(&car.a_dag(n).mul(car.a(n)).unwrap()).unwrap();
        }
        for n in -2..0 {
            sum = sum.sub(&car.b_dag(n).mul(car.b(n)).unwrap()).unwrap();
        }
        assert!(close(&sum, &q, 0.0));
    }

    #[test]
    fn free_field_examples() {
        let fb = basis(2);
        let w = fb.window;
        let f0 = free_field(fb, &w.basis_vector(0)).unwrap();
        assert_eq!(f0.apply_state(0)[fb.state(&[0]) as usize], C64::new(1.0, 0.0));
        let fm = free_field(fb, &w.basis_vector(-1)).unwrap();
        assert_eq!(super::super::vec_norm(&fm.apply_state(0)), 0.0);
        assert!(free_field(fb, &DVector::zeros(3)).is_err());
        let car = car_operators(fb);
        // phi^dagger = b*(f^-) + a(conj f^+)
        let f = DVector::from_fn(5, |i, _| C64::new(i as f64 - 1.0, 0.5 * i as f64));
        let phi = free_field(fb, &f).unwrap();
        let mut expect = FockOperator::zero(fb);
        for n in -2i64..=2 {
            let z = f[w.index(n)];
            let term = if n >= 0 { car.a(n).scale(z.conj()) } else { car.b_dag(n).scale(z.conj()) };
            expect = expect.add(&term).unwrap();
        }
        assert!(close(&phi.adjoint(), &expect, 1e-15));
    }

    #[test]
    fn diagonal_second_quantization() {
        let fb = basis(2);
        let w = fb.window;
        let g = 0.37;
        let u = OneParticleOperator::diagonal(w, |_| C64::from_polar(1.0, g));
        let gq = second_quantize_diagonal(&u, fb).unwrap();
        let eq = FockOperator::diagonal(fb, |s| C64::from_polar(1.0, g * fb.charge(s) as f64));
        assert!(close(&gq, &eq, 1e-15));
        let id = second_quantize_diagonal(&OneParticleOperator::identity(w), fb).unwrap();
        assert!(close(&id, &FockOperator::identity(fb), 0.0));
        assert!(matches!(
            second_quantize_diagonal(&OneParticleOperator::shift(w), fb),
            Err(Error::NotDiagonal(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn diagonal_covariance(phases in prop::collection::vec(-3.2..3.2f64, 5), n in -2i64..=2) {
            let fb = basis(2);
            let w = fb.window;
            let u = OneParticleOperator::diagonal(w, |k| C64::from_polar(1.0, phases[w.index(k)]));
            let gu = second_quantize_diagonal(&u, fb).unwrap();
            let phi = free_field(fb, &w.basis_vector(n)).unwrap();
            let lhs = gu.mul(&phi).unwrap().mul(&gu.adjoint()).unwrap();
            let rhs = free_field(fb, &(&u.matrix * w.basis_vector(n))).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-14));
        }
    }
}
