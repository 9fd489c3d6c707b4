//! Implementers of charge shifts: the explicit product form and the
//! normal-ordered `E_c(Z)` form, used to cross-check each other.

use super::{free_field, FockBasis, FockOperator, State};
use crate::modes::{fredholm_index, OneParticleOperator, RANK_THRESHOLD};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};

fn subsets_by_size(n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); n + 1];
    for mask in 0..(1u64 << n) {
        out[mask.count_ones() as usize].push(mask);
    }
    out
}

fn bits_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// Multiplicative second quantization of `t` on the block of bits starting at `offset`:
/// `x*_{p_1} ... x*_{p_k} -> x*(t e_{p_1}) ... x*(t e_{p_k})`, other bits untouched.
fn multiplicative(t: &DMatrix<C64>, basis: FockBasis, offset: u32) -> FockOperator {
    let n = t.nrows();
    let subsets = subsets_by_size(n);
    let block_mask = ((1u64 << n) - 1) << offset;
    FockOperator::from_columns(basis, |s| {
        let inside = (s & block_mask) >> offset;
        let rest = s & !block_mask;
        let cols = bits_of(inside);
        let k = cols.len();
        subsets[k]
            .iter()
            .filter_map(|&r| {
                let rows = bits_of(r);
                let det = if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    DMatrix::from_fn(k, k, |i, j| t[(rows[i], cols[j])]).determinant()
                };
                (det != C64::new(0.0, 0.0)).then_some((rest | (r << offset), det))
            })
            .collect()
    })
}

/// `Gamma_+(t)` for a matrix on the plus modes `0..=M`.
pub fn gamma_plus(t: &DMatrix<C64>, basis: FockBasis) -> Result<FockOperator> {
    let m = basis.window.cutoff;
    if t.nrows() != m + 1 || t.ncols() != m + 1 {
        return Err(Error::Invalid("plus block has the wrong size".into()));
    }
    Ok(multiplicative(t, basis, m as u32))
}

/// `Gamma_-(t)` for a matrix on the minus modes `-M..=-1`, acting on holes.
pub fn gamma_minus(t: &DMatrix<C64>, basis: FockBasis) -> Result<FockOperator> {
    let m = basis.window.cutoff;
    if t.nrows() != m || t.ncols() != m {
        return Err(Error::Invalid("minus block has the wrong size".into()));
    }
    Ok(multiplicative(t, basis, 0))
}

/// `e_-` spanning `ker V_{--}` and `e_0 = V e_-`, with the phase chosen so the
/// largest component of `e_0` is real and positive.
#[derive(Clone, Debug)]
pub struct ShiftVectors {
    pub e_minus: DVector<C64>,
    pub e_zero: DVector<C64>,
}

fn check_shift_class(v: &OneParticleOperator) -> Result<()> {
    let mp = v.mp().norm();
    if mp > 1e-12 * v.matrix.norm().max(1.0) {
        return Err(Error::WrongClass(format!("V_-+ has norm {mp:.3e}")));
    }
    match fredholm_index(v) {
        Ok(1) => Ok(()),
        Ok(q) => Err(Error::WrongClass(format!("Fredholm index {q}, expected 1"))),
        Err(e) => Err(Error::WrongClass(e.to_string())),
    }
}

pub fn shift_vectors(v: &OneParticleOperator) -> Result<ShiftVectors> {
    check_shift_class(v)?;
    let w = v.window;
    let m = w.cutoff;
    let block = v.mm();
    let svd = block.svd(false, true);
    let vt = svd.v_t.unwrap();
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let mut e_minus = DVector::zeros(w.dim());
    for i in 0..m {
        e_minus[i] = vt[(k, i)].conj();
    }
    let mut e_zero = &v.matrix * &e_minus;
    let big = e_zero.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    if big.norm() < 0.5 {
        return Err(Error::WrongClass("V e_- is not a unit vector".into()));
    }
    let phase = big.conj() / big.norm();
    e_minus *= phase;
    e_zero *= phase;
    Ok(ShiftVectors { e_minus, e_zero })
}

/// `a*(e_0) G + G b(conj e_-)` with `G = Gamma_+(-V_{++}) Gamma_-(-conj V_{--})`.
pub fn implementer_shift(v: &OneParticleOperator, basis: FockBasis) -> Result<FockOperator> {
    let sv = shift_vectors(v)?;
    let g = gamma_plus(&(-v.pp()), basis)?.mul(&gamma_minus(&(-v.mm().map(|z| z.conj())), basis)?)?;
    let create = free_field(basis, &sv.e_zero)?;
    let remove = free_field(basis, &sv.e_minus)?;
    create.mul(&g)?.add(&g.mul(&remove)?)
}

#[derive(Clone, Debug)]
pub struct ConjugateBlocks {
    pub pp: DMatrix<C64>,
    pub pm: DMatrix<C64>,
    pub mp: DMatrix<C64>,
    pub mm: DMatrix<C64>,
}

fn pinv(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::PseudoInverseFailure("non-finite entries".into()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::PseudoInverseFailure("zero matrix".into()));
    }
    svd.pseudo_inverse(RANK_THRESHOLD * smax).map_err(|e| Error::PseudoInverseFailure(e.to_string()))
}

/// `Z_{++} = -(V_{++}^*)^+`, `Z_{+-} = -(V_{++}^*)^+ V_{-+}^*`, `Z_{-+} = -V_{--}^+ V_{-+}`,
/// `Z_{--} = -V_{--}^+`, with `^+` the SVD pseudo-inverse.
pub fn conjugate_blocks(v: &OneParticleOperator) -> Result<ConjugateBlocks> {
    let ppi = pinv(&v.pp().adjoint())?;
    let mmi = pinv(&v.mm())?;
    let mp = v.mp();
    Ok(ConjugateBlocks {
        pm: -(&ppi * mp.adjoint()),
        mp: -(&mmi * &mp),
        pp: -ppi,
        mm: -mmi,
    })
}

fn nilpotent_exp(x: &FockOperator) -> Result<FockOperator> {
    let mut sum = FockOperator::identity(x.basis);
    let mut term = FockOperator::identity(x.basis);
    let mut k = 1.0;
    loop {
        term = term.mul(x)?.scale(C64::new(1.0 / k, 0.0));
        if term.nnz() == 0 || term.max_abs() == 0.0 {
            return Ok(sum);
        }
        sum = sum.add(&term)?;
        k += 1.0;
    }
}

/// `exp(Z_{+-} a* b*) Gamma_+(Z_{++}) Gamma(Z_{--}^T) exp(-Z_{-+} b a)`.
pub fn ec_normal_ordered(z: &ConjugateBlocks, basis: FockBasis) -> Result<FockOperator> {
    let m = basis.window.cutoff as i64;
    let pairs = |s: State, creation: bool, coeff: &dyn Fn(i64, i64) -> C64| -> Vec<(State, C64)> {
        let mut out = Vec::new();
        for p in 0..=m {
            for h in -m..0 {
                let c = coeff(p, h);
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let step = if creation {
                    super::create(s, basis.bit(h)).and_then(|(s1, t1)| super::create(t1, basis.bit(p)).map(|(s2, t2)| (s1 * s2, t2)))
                } else {
                    super::annihilate(s, basis.bit(p))
                        .and_then(|(s1, t1)| super::annihilate(t1, basis.bit(h)).map(|(s2, t2)| (s1 * s2, t2)))
                };
                if let Some((sign, t)) = step {
                    out.push((t, c * sign));
                }
            }
        }
        out
    };
    let mi = |h: i64| (h + m) as usize;
    let create_pairs = FockOperator::from_columns(basis, |s| pairs(s, true, &|p, h| z.pm[(p as usize, mi(h))]));
    let remove_pairs = FockOperator::from_columns(basis, |s| pairs(s, false, &|p, h| -z.mp[(mi(h), p as usize)]));
    let left = nilpotent_exp(&create_pairs)?;
    let right = nilpotent_exp(&remove_pairs)?;
    let middle = gamma_plus(&z.pp, basis)?.mul(&gamma_minus(&z.mm.transpose(), basis)?)?;
    left.mul(&middle)?.mul(&right)
}

/// `N_V [a*(e_0) E_c(Z) + E_c(Z) b(conj e_-)]` with `N_V` fixed by `Gamma(V) Omega = e_0`.
pub fn implementer_shift_via_ec(v: &OneParticleOperator, basis: FockBasis) -> Result<(FockOperator, C64)> {
    let sv = shift_vectors(v)?;
    let e = ec_normal_ordered(&conjugate_blocks(v)?, basis)?;
    let bracket = free_field(basis, &sv.e_zero)?.mul(&e)?.add(&e.mul(&free_field(basis, &sv.e_minus)?)?)?;
    let target = free_field(basis, &sv.e_zero)?.apply_state(basis.vacuum());
    let image = bracket.apply_state(basis.vacuum());
    let overlap = super::inner(&target, &image);
    if overlap.norm() < 1e-12 {
        return Err(Error::PseudoInverseFailure("bracket annihilates the vacuum".into()));
    }
    let nv = C64::new(1.0, 0.0) / overlap;
    Ok((bracket.scale(nv), nv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{charge_operator, second_quantize_diagonal, vec_dist, ChargeShift};
    use crate::modes::{rotate_one_particle, ModeWindow};
    use proptest::prelude::*;

    fn basis(m: usize) -> FockBasis {
        FockBasis::new(ModeWindow::new(m).unwrap()).unwrap()
    }

    #[test]
    fn gamma_of_diagonal_matches_second_quantization() {
        let fb = basis(2);
        let w = fb.window;
        let u = OneParticleOperator::diagonal(w, |n| C64::from_polar(1.0, 0.3 * n as f64 + 0.2));
        let g = gamma_plus(&u.pp(), fb).unwrap().mul(&gamma_minus(&u.mm().map(|z| z.conj()), fb).unwrap()).unwrap();
        let d = second_quantize_diagonal(&u, fb).unwrap();
        assert!(g.sub(&d).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn gamma_is_multiplicative() {
        let fb = basis(2);
        let a = DMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64 * 0.3, (i as f64) - 0.5 * j as f64));
        let b = DMatrix::from_fn(3, 3, |i, j| C64::new(((i * j) % 3) as f64, 0.2));
        let lhs = gamma_plus(&(&a * &b), fb).unwrap();
        let rhs = gamma_plus(&a, fb).unwrap().mul(&gamma_plus(&b, fb).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        assert!(gamma_plus(&b, basis(3)).is_err());
        assert!(gamma_minus(&a, fb).is_err());
    }

    #[test]
    fn shift_creates_e0_from_vacuum() {
        let fb = basis(4);
        let v = OneParticleOperator::shift(fb.window);
        let g = implementer_shift(&v, fb).unwrap();
        let out = g.apply_state(0);
        let mut want = vec![C64::new(0.0, 0.0); fb.dim()];
        want[fb.state(&[0]) as usize] = C64::new(1.0, 0.0);
        assert!(vec_dist(&out, &want) < 1e-12);
        assert_eq!(g.charge_shift(0.0), ChargeShift::Pure(1));
    }

    #[test]
    fn filled_hole_maps_to_vacuum() {
        let fb = basis(3);
        let g = implementer_shift(&OneParticleOperator::shift(fb.window), fb).unwrap();
        let s = fb.state(&[-1]);
        assert_eq!(g.get(0, s), C64::new(1.0, 0.0));
    }

    #[test]
    fn wrong_class_rejected() {
        let fb = basis(3);
        assert!(matches!(implementer_shift(&OneParticleOperator::identity(fb.window), fb), Err(Error::WrongClass(_))));
        assert!(matches!(
            implementer_shift(&OneParticleOperator::shift(fb.window).adjoint(), fb),
            Err(Error::WrongClass(_))
        ));
    }

    #[test]
    fn rotated_shift_phase_convention() {
        let fb = basis(4);
        let w = fb.window;
        let omega = 0.83;
        let v = OneParticleOperator::shift(w);
        let g = implementer_shift(&v, fb).unwrap();
        let gw = implementer_shift(&rotate_one_particle(&v, omega), fb).unwrap();
        let q = charge_operator(fb);
        let eq = FockOperator::diagonal(fb, |s| C64::from_polar(1.0, -omega * fb.charge(s) as f64));
        assert!(gw.sub(&g.mul(&eq).unwrap()).unwrap().max_abs() < 1e-12);
        let u0 = second_quantize_diagonal(&OneParticleOperator::rotation(w, omega), fb).unwrap();
        let conj = u0.mul(&g).unwrap().mul(&u0.adjoint()).unwrap();
        assert!(conj.sub(&gw).unwrap().max_abs() < 1e-12);
        let _ = q;
    }

    #[test]
    fn intertwines_free_field_away_from_edge() {
        let fb = basis(4);
        let w = fb.window;
        let v = OneParticleOperator::shift(w);
        let g = implementer_shift(&v, fb).unwrap();
        for n in -2..=2 {
            let phi = free_field(fb, &w.basis_vector(n)).unwrap();
            let phiv = free_field(fb, &(&v.matrix * w.basis_vector(n))).unwrap();
            let lhs = g.mul(&phi).unwrap();
            let rhs = phiv.mul(&g).unwrap();
            for s in [0u64, fb.state(&[0]), fb.state(&[-1]), fb.state(&[-2, 1]), fb.state(&[-1, 0])] {
                assert!(vec_dist(&lhs.apply_state(s), &rhs.apply_state(s)) < 1e-12, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn pure_shift_conjugate_blocks() {
        let w = ModeWindow::new(4).unwrap();
        let z = conjugate_blocks(&OneParticleOperator::shift(w)).unwrap();
        assert_eq!(z.pm.norm(), 0.0);
        assert_eq!(z.mp.norm(), 0.0);
        let v = OneParticleOperator::shift(w);
        assert!((z.pp + v.pp()).norm() < 1e-12);
    }

    #[test]
    fn routes_agree_at_m4() {
        let fb = basis(4);
        for omega in [0.0, 0.7, -2.1] {
            let v = rotate_one_particle(&OneParticleOperator::shift(fb.window), omega);
            let a = implementer_shift(&v, fb).unwrap();
            let (b, nv) = implementer_shift_via_ec(&v, fb).unwrap();
            assert!((nv - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(a.sub(&b).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn pinv_failure() {
        assert!(pinv(&DMatrix::zeros(2, 2)).is_err());
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(pinv(&bad).is_err());
    }

    #[test]
    fn pair_exponential_is_nilpotent_series() {
        let fb = basis(2);
        let z = ConjugateBlocks {
            pp: DMatrix::identity(3, 3),
            pm: DMatrix::from_fn(3, 2, |i, j| C64::new(0.1 * (i + j) as f64, 0.05)),
            mp: DMatrix::zeros(2, 3),
            mm: DMatrix::identity(2, 2),
        };
        let e = ec_normal_ordered(&z, fb).unwrap();
        // acting on the vacuum gives a Gaussian of pairs, first order is Z_{+-} a* b* Omega
        let out = e.apply_state(0);
        assert_eq!(out[0], C64::new(1.0, 0.0));
        let s = fb.state(&[-1, 1]);
        let pair = super::super::create(0, fb.bit(-1)).and_then(|(s1, t)| super::super::create(t, fb.bit(1)).map(|(s2, u)| (s1 * s2, u))).unwrap();
        assert_eq!(pair.1, s);
        assert!((out[s as usize] - z.pm[(1, 1)] * pair.0).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn charge_shift_is_one(omega in -4.0..4.0f64) {
            let fb = basis(3);
            let v = rotate_one_particle(&OneParticleOperator::shift(fb.window), omega);
            let g = implementer_shift(&v, fb).unwrap();
            prop_assert_eq!(g.charge_shift(0.0), ChargeShift::Pure(1));
        }
    }
}
