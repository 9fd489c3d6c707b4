use super::expmv::{expmv_hermitian, KrylovOptions};
use super::{FockBasis, FockMap, FockOperator, State};
use crate::modes::OneParticleOperator;
use crate::{Error, Result, C64};
use nalgebra::DMatrix;

/// The normal-ordered bilinear `dGamma(A) = sum_mn A_mn (c*_m c_n - delta_mn [n<0])`,
/// applied without materializing the matrix.
#[derive(Clone, Debug)]
pub struct Bilinear {
    pub basis: FockBasis,
    pub generator: OneParticleOperator,
    entries: Vec<(i64, i64, C64)>,
    constant: C64,
}

impl Bilinear {
    pub fn new(a: &OneParticleOperator, basis: FockBasis) -> Result<Self> {
        if a.window != basis.window {
            return Err(Error::WindowMismatch(a.window.cutoff, basis.window.cutoff));
        }
        let dev = a.hermitian_deviation();
        if dev > 1e-10 * a.matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        let w = a.window;
        let mut entries = Vec::new();
        for m in w.modes() {
            for n in w.modes() {
                let z = a.entry(m, n);
                if z != C64::new(0.0, 0.0) {
                    entries.push((m, n, z));
                }
            }
        }
        let constant = w.modes().filter(|&n| n < 0).map(|n| a.entry(n, n)).sum();
        Ok(Self { basis, generator: a.clone(), entries, constant })
    }

    fn column(&self, s: State) -> Vec<(State, C64)> {
        let b = self.basis;
        let mut out = Vec::new();
        for &(m, n, z) in &self.entries {
            if let Some((s1, t1)) = b.c(n).act(s) {
                if let Some((s2, t2)) = b.c_dag(m).act(t1) {
                    out.push((t2, z * (s1 * s2)));
                }
            }
        }
        out.push((s, -self.constant));
        out
    }

    pub fn to_operator(&self) -> FockOperator {
        FockOperator::from_columns(self.basis, |s| self.column(s))
    }
}

impl FockMap for Bilinear {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (s, &x) in v.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (t, z) in self.column(s as State) {
                out[t as usize] += z * x;
            }
        }
        Ok(out)
    }
}

pub fn dgamma(a: &OneParticleOperator, basis: FockBasis) -> Result<FockOperator> {
    Ok(Bilinear::new(a, basis)?.to_operator())
}

/// `exp(it dGamma(A))`, either as an explicit operator or as a Krylov action.
#[derive(Clone, Debug)]
pub enum Implementer {
    Dense(FockOperator),
    Krylov { generator: FockOperator, t: f64, options: KrylovOptions },
}

/// Above this Fock dimension the exponential is applied to vectors only.
pub const DENSE_LIMIT: usize = 1 << 9;

pub fn implementer_exp(a: &OneParticleOperator, t: f64, basis: FockBasis) -> Result<Implementer> {
    let generator = dgamma(a, basis)?;
    if basis.dim() <= DENSE_LIMIT {
        Ok(Implementer::Dense(sector_exponential(&generator, t)))
    } else {
        Ok(Implementer::Krylov { generator, t, options: KrylovOptions::default() })
    }
}

/// Exact `exp(itH)` for a charge-conserving Hermitian `H`, one sector at a time.
fn sector_exponential(h: &FockOperator, t: f64) -> FockOperator {
    let basis = h.basis;
    let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); basis.dim()];
    for q in basis.charge_range() {
        let states = basis.sector(q);
        let k = states.len();
        let block = DMatrix::from_fn(k, k, |i, j| h.get(states[i], states[j]));
        let eig = block.symmetric_eigen();
        let d = eig.eigenvalues.map(|l| C64::from_polar(1.0, t * l));
        let e = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint();
        for i in 0..k {
            for j in 0..k {
                rows[states[i] as usize].push((states[j] as u32, e[(i, j)]));
            }
        }
    }
    FockOperator::from_rows(basis, rows)
}

impl Implementer {
    pub fn as_operator(&self) -> Option<&FockOperator> {
        match self {
            Implementer::Dense(op) => Some(op),
            Implementer::Krylov { .. } => None,
        }
    }

    /// The adjoint `exp(-it dGamma(A))`.
    pub fn adjoint(&self) -> Self {
        match self {
            Implementer::Dense(op) => Implementer::Dense(op.adjoint()),
            Implementer::Krylov { generator, t, options } => {
                Implementer::Krylov { generator: generator.clone(), t: -t, options: *options }
            }
        }
    }
}

impl FockMap for Implementer {
    fn basis(&self) -> FockBasis {
        match self {
            Implementer::Dense(op) => op.basis,
            Implementer::Krylov { generator, .. } => generator.basis,
        }
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        match self {
            Implementer::Dense(op) => Ok(op.apply_vec(v)),
            Implementer::Krylov { generator, t, options } => {
                let h = |x: &[C64]| Ok(generator.apply_vec(x));
                expmv_hermitian(&h, v, *t, *options)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blip::{blip, blip_at, standard_mollifier};
    use crate::fock::{charge_operator, second_quantize_diagonal, vec_dist, vec_norm};
    use crate::modes::{multiplication_operator, rotate_one_particle, ModeWindow};
    use crate::schwinger::schwinger_trace;

    fn basis(m: usize) -> FockBasis {
        FockBasis::new(ModeWindow::new(m).unwrap()).unwrap()
    }

    fn blip_op(m: usize, eps: f64, omega: f64) -> OneParticleOperator {
        let b = blip_at(&standard_mollifier(eps).unwrap(), omega, 2048).unwrap();
        multiplication_operator(&b.function, ModeWindow::new(m).unwrap()).unwrap()
    }

    #[test]
    fn identity_gives_charge() {
        let fb = basis(3);
        let q = dgamma(&OneParticleOperator::identity(fb.window), fb).unwrap();
        assert!(q.sub(&charge_operator(fb)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn momentum_is_normal_ordered() {
        let fb = basis(3);
        let p = OneParticleOperator::diagonal(fb.window, |n| C64::new(n as f64, 0.0));
        let h = dgamma(&p, fb).unwrap();
        assert_eq!(h.get(0, 0), C64::new(0.0, 0.0));
        // a hole at -2 costs energy 2
        let s = fb.state(&[-2]);
        assert_eq!(h.get(s, s), C64::new(2.0, 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let fb = basis(2);
        assert!(matches!(dgamma(&OneParticleOperator::shift(fb.window), fb), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn hermitian_charge_conserving_vacuum_free() {
        let fb = basis(3);
        let a = blip_op(3, 0.6, 0.4);
        let d = dgamma(&a, fb).unwrap();
        assert!(d.sub(&d.adjoint()).unwrap().max_abs() < 1e-14);
        assert!(d.commutator(&charge_operator(fb)).unwrap().max_abs() < 1e-14);
        assert!(d.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn matrix_free_matches_materialized() {
        let fb = basis(3);
        let a = blip_op(3, 0.8, 1.0);
        let bl = Bilinear::new(&a, fb).unwrap();
        let v: Vec<C64> = (0..fb.dim()).map(|k| C64::new((k as f64).cos(), 0.1 * k as f64)).collect();
        assert!(vec_dist(&bl.apply(&v).unwrap(), &bl.to_operator().apply_vec(&v)) < 1e-12);
    }

    #[test]
    fn exponential_basics() {
        let fb = basis(3);
        let a = blip_op(3, 0.5, 0.0);
        let e0 = implementer_exp(&a, 0.0, fb).unwrap();
        let id = FockOperator::identity(fb);
        assert!(e0.as_operator().unwrap().sub(&id).unwrap().max_abs() < 1e-14);
        let e = implementer_exp(&a, -0.8, fb).unwrap();
        let op = e.as_operator().unwrap();
        assert!(op.mul(&op.adjoint()).unwrap().sub(&id).unwrap().max_abs() < 1e-12);
        assert!(op.commutator(&charge_operator(fb)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn diagonal_generator_matches_second_quantization() {
        let fb = basis(2);
        let a = OneParticleOperator::diagonal(fb.window, |n| C64::new(0.3 * n as f64 + 0.1, 0.0));
        let e = implementer_exp(&a, 1.7, fb).unwrap();
        let g = second_quantize_diagonal(&a.exp_i(1.7).unwrap(), fb).unwrap();
        // phase fixed to one on the vacuum
        let phase = g.get(0, 0) / e.as_operator().unwrap().get(0, 0);
        assert!(e.as_operator().unwrap().scale(phase).sub(&g).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn krylov_matches_dense() {
        let fb = basis(3);
        let a = blip_op(3, 0.7, 2.0);
        let dense = implementer_exp(&a, -1.0, fb).unwrap();
        let krylov = Implementer::Krylov { generator: dgamma(&a, fb).unwrap(), t: -1.0, options: KrylovOptions::default() };
        for s in [0u64, 5, 17, 100] {
            let v = fb.basis_vector(s);
            assert!(vec_dist(&dense.apply(&v).unwrap(), &krylov.apply(&v).unwrap()) < 1e-11);
        }
    }

    #[test]
    fn rotation_covariance() {
        let fb = basis(3);
        let w = fb.window;
        let a = blip_op(3, 0.5, 0.0);
        let omega = 1.3;
        let u0 = second_quantize_diagonal(&OneParticleOperator::rotation(w, omega), fb).unwrap();
        let lhs = u0.mul(implementer_exp(&a, 0.9, fb).unwrap().as_operator().unwrap()).unwrap().mul(&u0.adjoint()).unwrap();
        let rhs = implementer_exp(&rotate_one_particle(&a, omega), 0.9, fb).unwrap();
        assert!(lhs.sub(rhs.as_operator().unwrap()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn unitary_on_probes_large_window() {
        let fb = basis(5);
        let a = blip_op(5, 1.0, 0.0);
        let e = implementer_exp(&a, -1.0, fb).unwrap();
        assert!(e.as_operator().is_none());
        let v = fb.basis_vector(fb.state(&[-1, 0, 1]));
        assert!((vec_norm(&e.apply(&v).unwrap()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vacuum_commutator_tracks_schwinger_term() {
        // <Omega, [dG(a), dG(b)] Omega> = -i S(a, b), so that e^{idG(a)} e^{idG(b)} = e^{iS} e^{idG(b)} e^{idG(a)}
        let fb = basis(3);
        let chi = standard_mollifier(0.5).unwrap();
        let ba = blip(&chi, 2048).unwrap();
        let bb = ba.rotated(2.0).unwrap();
        let a = multiplication_operator(&ba.function, fb.window).unwrap();
        let b = multiplication_operator(&bb.function, fb.window).unwrap();
        let c = dgamma(&a, fb).unwrap().commutator(&dgamma(&b, fb).unwrap()).unwrap();
        let s = schwinger_trace(&a, &b).unwrap();
        assert!((c.get(0, 0) + C64::i() * s).norm() < 1e-12, "{} vs {}", c.get(0, 0), s);
    }
}
