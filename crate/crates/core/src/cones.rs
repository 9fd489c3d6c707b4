//! Cones in the plane and the tensor-product field `Psi(f) (x) Phi_omega`.
//!
//! A generalized cone is a convex support polygon plus a direction interval on
//! the covering. Directions are `n_mu = (sin mu, cos mu)`, so `mu = 0` points
//! along `+y` and increasing `mu` turns clockwise. Test functions are labels
//! carrying a support polygon and a Gram matrix; the local Fermi field acts on
//! a Fock space built from a factorization of that Gram matrix.

use crate::covering::{relative_winding, CoveringInterval};
use crate::fock::{annihilate, create, phase_from_pairs, ExchangeMeasurement, FockMap, ProbeSet};
use crate::{Error, Result, C64};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

pub type Point = [f64; 2];

/// `n_mu = (sin mu, cos mu)`.
pub fn direction(mu: f64) -> Point {
    [mu.sin(), mu.cos()]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `supp f + R_+ {n_mu : mu in I}` with a convex polygon as `supp f`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedCone {
    pub support: Vec<Point>,
    pub directions: CoveringInterval,
}

impl GeneralizedCone {
    pub fn new(support: Vec<Point>, directions: CoveringInterval) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::DegenerateGeometry("empty support polygon".into()));
        }
        if support.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite vertex".into()));
        }
        if directions.half_width >= FRAC_PI_2 {
            return Err(Error::DegenerateGeometry(format!(
                "opening angle {:.3} is not below pi",
                2.0 * directions.half_width
            )));
        }
        Ok(Self { support, directions })
    }

    /// The two extreme directions `n_{omega - eps}` and `n_{omega + eps}`.
    pub fn edge_directions(&self) -> [Point; 2] {
        [direction(self.directions.lower()), direction(self.directions.upper())]
    }

    /// Exact membership: the wedge `x - cone(d1, d2)` meets the support polygon.
    pub fn contains(&self, x: Point) -> bool {
        let [d1, d2] = self.edge_directions();
        let det = cross(d1, d2);
        // y in x - K  iff  x - y = t1 d1 + t2 d2 with t >= 0
        let in_wedge = |y: Point| {
            let r = sub(x, y);
            let t1 = cross(r, d2) / det;
            let t2 = cross(d1, r) / det;
            t1 >= -1e-12 && t2 >= -1e-12
        };
        let poly = &self.support;
        if poly.iter().any(|&p| in_wedge(p)) || polygon_contains(poly, x) {
            return true;
        }
        let rays = [[-d1[0], -d1[1]], [-d2[0], -d2[1]]];
        let n = poly.len();
        (0..n).any(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            rays.iter().any(|&r| ray_hits_segment(x, r, a, b))
        })
    }

    /// Rigid motion `x -> R(-omega) x + a`; the direction interval turns by `omega`.
    pub fn transformed(&self, motion: &Motion) -> Self {
        Self {
            support: self.support.iter().map(|&p| motion.apply(p)).collect(),
            directions: self.directions.shifted(motion.omega),
        }
    }
}

fn polygon_contains(poly: &[Point], x: Point) -> bool {
    match poly.len() {
        0 => false,
        1 => sub(poly[0], x).iter().all(|c| c.abs() < 1e-12),
        2 => {
            let (a, b) = (poly[0], poly[1]);
            cross(sub(b, a), sub(x, a)).abs() < 1e-12 && dot(sub(x, a), sub(x, b)) <= 1e-12
        }
        n => {
            let mut sign = 0.0;
            for k in 0..n {
                let c = cross(sub(poly[(k + 1) % n], poly[k]), sub(x, poly[k]));
                if c.abs() < 1e-12 {
                    continue;
                }
                if sign == 0.0 {
                    sign = c.signum();
                } else if c.signum() != sign {
                    return false;
                }
            }
            true
        }
    }
}

fn ray_hits_segment(origin: Point, dir: Point, a: Point, b: Point) -> bool {
    let e = sub(b, a);
    let denom = cross(dir, e);
    if denom.abs() < 1e-15 {
        return false;
    }
    let w = sub(a, origin);
    let t = cross(w, e) / denom;
    let u = cross(w, dir) / denom;
    t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u)
}

/// Largest margin `delta` of a line `u.x = c` with `|u|_inf <= 1` separating the two sets
/// `conv(p1) + cone(d1)` and `conv(p2) + cone(d2)`.
fn separation_margin(p1: &[Point], d1: &[Point], p2: &[Point], d2: &[Point]) -> Result<f64> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let ux = lp.add_var(0.0, (-1.0, 1.0));
    let uy = lp.add_var(0.0, (-1.0, 1.0));
    let c = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let delta = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for p in p1 {
        lp.add_constraint([(ux, p[0]), (uy, p[1]), (c, -1.0), (delta, 1.0)], ComparisonOp::Le, 0.0);
    }
    for q in p2 {
        lp.add_constraint([(ux, q[0]), (uy, q[1]), (c, -1.0), (delta, -1.0)], ComparisonOp::Ge, 0.0);
    }
    for d in d1 {
        lp.add_constraint([(ux, d[0]), (uy, d[1])], ComparisonOp::Le, 0.0);
    }
    for e in d2 {
        lp.add_constraint([(ux, e[0]), (uy, e[1])], ComparisonOp::Ge, 0.0);
    }
    let out = lp.solve().map_err(|e| Error::DegenerateGeometry(format!("separation LP: {e}")))?;
    let sol = out.into_solution().map_err(|_| Error::DegenerateGeometry("separation LP interrupted".into()))?;
    Ok(sol.objective())
}

/// Margins at or below this count as touching, hence not disjoint.
pub const SEPARATION_TOLERANCE: f64 = 1e-9;

pub fn cones_disjoint(c1: &GeneralizedCone, c2: &GeneralizedCone) -> Result<bool> {
    Ok(cone_separation(c1, c2)? > SEPARATION_TOLERANCE)
}

/// The separating margin itself; positive iff the cones are strictly separated.
pub fn cone_separation(c1: &GeneralizedCone, c2: &GeneralizedCone) -> Result<f64> {
    for c in [c1, c2] {
        if c.support.is_empty() {
            return Err(Error::DegenerateGeometry("empty support polygon".into()));
        }
    }
    separation_margin(&c1.support, &c1.edge_directions(), &c2.support, &c2.edge_directions())
}

pub fn polygons_disjoint(p1: &[Point], p2: &[Point]) -> Result<bool> {
    if p1.is_empty() || p2.is_empty() {
        return Err(Error::DegenerateGeometry("empty support polygon".into()));
    }
    Ok(separation_margin(p1, &[], p2, &[])? > SEPARATION_TOLERANCE)
}

/// A Euclidean motion `x -> R(-omega) x + a`, with `R` the counter-clockwise rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Motion {
    pub translation: Point,
    pub omega: f64,
}

impl Motion {
    pub fn new(translation: Point, omega: f64) -> Self {
        Self { translation, omega }
    }

    pub fn identity() -> Self {
        Self::new([0.0, 0.0], 0.0)
    }

    pub fn apply(&self, x: Point) -> Point {
        let (s, c) = self.omega.sin_cos();
        [c * x[0] + s * x[1] + self.translation[0], -s * x[0] + c * x[1] + self.translation[1]]
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Motion) -> Motion {
        let (s, c) = other.omega.sin_cos();
        let a = self.translation;
        let ra = [c * a[0] + s * a[1], -s * a[0] + c * a[1]];
        Motion::new([ra[0] + other.translation[0], ra[1] + other.translation[1]], self.omega + other.omega)
    }
}

/// Labeled test functions with supports, Gram matrix `G_ij = <f_i, f_j>` and
/// the index `conj[i]` of the complex conjugate of `f_i`.
#[derive(Clone, Debug)]
pub struct TestFunctionSpace {
    pub labels: Vec<String>,
    pub supports: Vec<Vec<Point>>,
    pub gram: DMatrix<C64>,
    pub conj: Vec<usize>,
    factor: DMatrix<C64>,
}

impl TestFunctionSpace {
    pub fn new(labels: Vec<String>, supports: Vec<Vec<Point>>, gram: DMatrix<C64>, conj: Vec<usize>) -> Result<Self> {
        let k = labels.len();
        if supports.len() != k || gram.nrows() != k || gram.ncols() != k || conj.len() != k {
            return Err(Error::Invalid("test function data have inconsistent sizes".into()));
        }
        let scale = gram.norm().max(1.0);
        let herm = (&gram - gram.adjoint()).norm();
        if herm > 1e-12 * scale {
            return Err(Error::NotHermitian(herm));
        }
        for i in 0..k {
            if conj[i] >= k || conj[conj[i]] != i {
                return Err(Error::Invalid(format!("conjugation is not an involution at {i}")));
            }
            for j in 0..k {
                if (gram[(conj[i], conj[j])] - gram[(i, j)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::Invalid(format!("Gram matrix does not respect conjugation at ({i}, {j})")));
                }
                if i < j && gram[(i, j)].norm() > 1e-12 * scale && polygons_disjoint(&supports[i], &supports[j])? {
                    return Err(Error::Invalid(format!("functions {i} and {j} have disjoint supports but overlap")));
                }
            }
        }
        let eig = gram.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.min();
        if lmin < -1e-12 * scale {
            return Err(Error::Invalid(format!("Gram matrix has negative eigenvalue {lmin:.3e}")));
        }
        let keep: Vec<usize> = (0..k).filter(|&j| eig.eigenvalues[j] > 1e-12 * scale).collect();
        // B = Lambda^{1/2} W^*, so that B^* B = G
        let factor = DMatrix::from_fn(keep.len(), k, |r, i| {
            let j = keep[r];
            eig.eigenvectors[(i, j)].conj() * eig.eigenvalues[j].sqrt()
        });
        Ok(Self { labels, supports, gram, conj, factor })
    }

    /// Real test functions with orthonormal Gram matrix.
    pub fn orthonormal_real(supports: Vec<Vec<Point>>) -> Result<Self> {
        let k = supports.len();
        let labels = (0..k).map(|i| format!("f{i}")).collect();
        Self::new(labels, supports, DMatrix::identity(k, k), (0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of independent modes, the rank of the Gram matrix.
    pub fn modes(&self) -> usize {
        self.factor.nrows()
    }

    pub fn fock_dim(&self) -> usize {
        1 << self.modes()
    }

    fn ladder(&self, mode: usize, creation: bool) -> DMatrix<C64> {
        let d = self.fock_dim();
        let mut m = DMatrix::zeros(d, d);
        for s in 0..d as u64 {
            let step = if creation { create(s, mode as u32) } else { annihilate(s, mode as u32) };
            if let Some((sign, t)) = step {
                m[(t as usize, s as usize)] = C64::new(sign, 0.0);
            }
        }
        m
    }

    /// `c*(f_i) = sum_j B_ji c*_j`.
    pub fn creation(&self, i: usize) -> DMatrix<C64> {
        let d = self.fock_dim();
        (0..self.modes()).fold(DMatrix::zeros(d, d), |acc, j| acc + self.ladder(j, true) * self.factor[(j, i)])
    }

    /// `c(f_i)`, antilinear in `f_i`.
    pub fn annihilation(&self, i: usize) -> DMatrix<C64> {
        self.creation(i).adjoint()
    }

    /// Image of the whole space under a motion. The pullback is unitary, so the Gram matrix is unchanged.
    pub fn transformed(&self, motion: &Motion) -> Self {
        Self {
            supports: self.supports.iter().map(|p| p.iter().map(|&x| motion.apply(x)).collect()).collect(),
            ..self.clone()
        }
    }

    /// Index of a function whose support is the image of `supp f_i` under `motion`.
    pub fn find_image(&self, i: usize, motion: &Motion) -> Result<usize> {
        let image: Vec<Point> = self.supports[i].iter().map(|&x| motion.apply(x)).collect();
        (0..self.len())
            .find(|&j| {
                self.supports[j].len() == image.len()
                    && self.supports[j].iter().zip(&image).all(|(a, b)| (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9)
                    && self.gram[(j, j)] == self.gram[(i, i)]
            })
            .ok_or_else(|| Error::UnknownTransformedFunction(self.labels[i].clone()))
    }
}

/// `Psi(f_i) = c*(f_i) + c(conj f_i)`.
pub fn fermi_field(i: usize, space: &TestFunctionSpace) -> DMatrix<C64> {
    space.creation(i) + space.annihilation(space.conj[i])
}

/// `(<w, XY v>, <w, YX v>)` over all basis vectors of the small Fock space.
pub fn fermi_pairs(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Vec<(C64, C64)> {
    let xy = x * y;
    let yx = y * x;
    xy.iter().zip(yx.iter()).map(|(a, b)| (*a, *b)).collect()
}

/// Exchange phase of `A (x) B` against the reversed product, from the pairs of each factor.
pub fn tensor_exchange(fermi: &[(C64, C64)], circle: &[(C64, C64)]) -> Result<ExchangeMeasurement> {
    let pairs: Vec<(C64, C64)> =
        fermi.iter().flat_map(|&(a, b)| circle.iter().map(move |&(c, d)| (a * c, b * d))).collect();
    phase_from_pairs(&pairs)
}

/// `e^{2 pi i s (2N + 1)}` for the tensor fields of two disjoint cones.
pub fn predicted_cone_phase(spin: f64, c1: &GeneralizedCone, c2: &GeneralizedCone) -> Result<C64> {
    if !cones_disjoint(c1, c2)? {
        return Err(Error::Overlap);
    }
    let n = relative_winding(&c1.directions, &c2.directions)? as f64;
    Ok(C64::from_polar(1.0, crate::TAU * spin * (2.0 * n + 1.0)))
}

/// Point-sampling check for an overlap: a dense family of points of `c1`
/// (segments between support vertices, fanned over its directions, out to
/// distance `r`) is tested for membership in `c2`.
pub fn sampled_overlap(c1: &GeneralizedCone, c2: &GeneralizedCone, r: f64) -> bool {
    let p = &c1.support;
    let n = p.len();
    let mut anchors = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for k in 0..=6 {
                let t = k as f64 / 6.0;
                let q = [p[a][0] * (1.0 - t) + p[b][0] * t, p[a][1] * (1.0 - t) + p[b][1] * t];
                anchors.push(q);
            }
        }
    }
    let (lo, hi) = (c1.directions.lower(), c1.directions.upper());
    for q in anchors {
        for j in 0..=60 {
            let d = direction(lo + (hi - lo) * j as f64 / 60.0);
            let mut t = 0.0;
            while t <= r {
                if c2.contains([q[0] + t * d[0], q[1] + t * d[1]]) {
                    return true;
                }
                t += 0.05 + 0.01 * t;
            }
        }
    }
    false
}


/// `A (x) B` acting on `C^{dim A} (x) Fock`, index `a * dim(Fock) + s`.
pub struct TensorOp<'a> {
    pub fermi: &'a DMatrix<C64>,
    pub circle: &'a dyn FockMap,
}

impl TensorOp<'_> {
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let df = self.fermi.nrows();
        if !v.len().is_multiple_of(df) {
            return Err(Error::Invalid("vector length is not a multiple of the Fermi dimension".into()));
        }
        let dc = v.len() / df;
        let blocks: Vec<Vec<C64>> = v.chunks(dc).map(|b| self.circle.apply(b)).collect::<Result<_>>()?;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for a in 0..df {
            for (b, block) in blocks.iter().enumerate() {
                let z = self.fermi[(a, b)];
                if z != C64::new(0.0, 0.0) {
                    for (o, x) in out[a * dc..(a + 1) * dc].iter_mut().zip(block) {
                        *o += z * x;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Exchange phase of `X Y` against `Y X` on the full tensor space, with product
/// probes `e_a (x) v` and all targets `e_b (x) w`, `w` a band state of charge `q + shift`.
pub fn measure_tensor_exchange(x: &TensorOp, y: &TensorOp, probes: &ProbeSet, shift: i64) -> Result<ExchangeMeasurement> {
    let basis = probes.basis;
    let (df, dc) = (x.fermi.nrows(), basis.dim());
    let mut pairs = Vec::new();
    for a in 0..df {
        for &s in &probes.probes {
            let mut v = vec![C64::new(0.0, 0.0); df * dc];
            v[a * dc + s as usize] = C64::new(1.0, 0.0);
            let xy = x.apply(&y.apply(&v)?)?;
            let yx = y.apply(&x.apply(&v)?)?;
            for b in 0..df {
                for t in probes.targets(basis.charge(s) + shift) {
                    let k = b * dc + t as usize;
                    pairs.push((xy[k], yx[k]));
                }
            }
        }
    }
    phase_from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(cx: f64, cy: f64, h: f64) -> Vec<Point> {
        vec![[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]]
    }

    fn cone(cx: f64, cy: f64, mu: f64, eps: f64) -> GeneralizedCone {
        GeneralizedCone::new(square(cx, cy, 0.5), CoveringInterval::new(mu, eps).unwrap()).unwrap()
    }

    const EAST: f64 = FRAC_PI_2;
    const WEST: f64 = -FRAC_PI_2;

    #[test]
    fn directions_convention() {
        let n0 = direction(0.0);
        assert!((n0[0]).abs() < 1e-15 && (n0[1] - 1.0).abs() < 1e-15);
        assert!((direction(EAST)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_half_planes_are_disjoint() {
        assert!(cones_disjoint(&cone(5.0, 0.0, EAST, 0.2), &cone(-5.0, 0.0, WEST, 0.2)).unwrap());
    }

    #[test]
    fn identical_cones_intersect() {
        let c = cone(1.0, 2.0, 0.3, 0.4);
        assert!(!cones_disjoint(&c, &c).unwrap());
    }

    #[test]
    fn converging_cones_overlap_despite_disjoint_data() {
        // supports and direction arcs are disjoint, but both cones aim at the origin
        let c1 = cone(5.0, 0.0, WEST, 0.2);
        let c2 = cone(-5.0, 0.0, EAST, 0.2);
        assert!(polygons_disjoint(&c1.support, &c2.support).unwrap());
        assert!(crate::covering::projections_disjoint(&c1.directions, &c2.directions));
        assert!(!cones_disjoint(&c1, &c2).unwrap());
        assert!(c1.contains([0.0, 0.0]) && c2.contains([0.0, 0.0]));
    }

    #[test]
    fn degenerate_geometry() {
        let i = CoveringInterval::new(0.0, 0.3).unwrap();
        assert!(matches!(GeneralizedCone::new(vec![], i), Err(Error::DegenerateGeometry(_))));
        let wide = CoveringInterval::new(0.0, 1.7).unwrap();
        assert!(matches!(GeneralizedCone::new(square(0.0, 0.0, 1.0), wide), Err(Error::DegenerateGeometry(_))));
        assert!(polygons_disjoint(&[], &square(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn membership_examples() {
        let c = cone(0.0, 0.0, 0.0, 0.3);
        assert!(c.contains([0.0, 0.0]));
        assert!(c.contains([0.0, 100.0]));
        assert!(c.contains([0.4, -0.4]));
        assert!(!c.contains([0.0, -2.0]));
        assert!(!c.contains([50.0, 10.0]));
        let point = GeneralizedCone::new(vec![[1.0, 1.0]], CoveringInterval::new(EAST, 0.1).unwrap()).unwrap();
        assert!(point.contains([5.0, 1.0]));
        assert!(!point.contains([0.0, 1.0]));
    }

    fn random_triangle(rng: &mut ChaCha8Rng) -> Vec<Point> {
        let c = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        (0..3).map(|_| [c[0] + rng.gen_range(-1.0..1.0), c[1] + rng.gen_range(-1.0..1.0)]).collect()
    }

    #[test]
    fn lp_agrees_with_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut disagreements = 0;
        let mut disjoint_count = 0;
        for _ in 0..100 {
            let c1 = GeneralizedCone::new(
                random_triangle(&mut rng),
                CoveringInterval::new(rng.gen_range(-3.2..3.2), rng.gen_range(0.1..1.2)).unwrap(),
            )
            .unwrap();
            let c2 = GeneralizedCone::new(
                random_triangle(&mut rng),
                CoveringInterval::new(rng.gen_range(-3.2..3.2), rng.gen_range(0.1..1.2)).unwrap(),
            )
            .unwrap();
            let lp = cones_disjoint(&c1, &c2).unwrap();
            let sampled = !(sampled_overlap(&c1, &c2, 400.0) || sampled_overlap(&c2, &c1, 400.0));
            disjoint_count += lp as usize;
            if lp != sampled {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
        assert!(disjoint_count > 5 && disjoint_count < 95);
    }

    #[test]
    fn fermi_field_algebra() {
        let space = TestFunctionSpace::orthonormal_real(vec![square(-3.0, 0.0, 1.0), square(3.0, 0.0, 1.0)]).unwrap();
        let p0 = fermi_field(0, &space);
        let p1 = fermi_field(1, &space);
        let anti = &p0 * &p1 + &p1 * &p0;
        assert!(anti.norm() < 1e-14);
        // Psi(conj f)^* = Psi(f)
        assert!((fermi_field(space.conj[0], &space).adjoint() - &p0).norm() < 1e-14);
        assert_eq!(space.fock_dim(), 4);
    }

    #[test]
    fn gram_car_relations() {
        let g = DMatrix::from_row_slice(3, 3, &[
            C64::new(2.0, 0.0), C64::new(0.3, 0.4), C64::new(0.0, 0.0),
            C64::new(0.3, -0.4), C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.7, 0.0),
        ]);
        // f0 and f1 conjugate to each other would force G_00 = G_11; keep them self-conjugate here
        let sup = vec![square(0.0, 0.0, 1.0), square(0.5, 0.0, 1.0), square(9.0, 9.0, 0.5)];
        let space = TestFunctionSpace::new(vec!["a".into(), "b".into(), "c".into()], sup.clone(), g.clone(), vec![0, 1, 2]);
        // self-conjugate functions need a real Gram matrix
        assert!(space.is_err());
        let g_real = g.map(|z| C64::new(z.re, 0.0));
        let space = TestFunctionSpace::new(vec!["a".into(), "b".into(), "c".into()], sup, g_real.clone(), vec![0, 1, 2]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = space.annihilation(i) * space.creation(j) + space.creation(j) * space.annihilation(i);
                let want = DMatrix::<C64>::identity(space.fock_dim(), space.fock_dim()) * g_real[(i, j)];
                assert!((a - want).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn space_validation() {
        let sup = vec![square(-3.0, 0.0, 1.0), square(3.0, 0.0, 1.0)];
        let labels = vec!["a".to_string(), "b".to_string()];
        let overlap = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(1.0, 0.0)]);
        assert!(TestFunctionSpace::new(labels.clone(), sup.clone(), overlap, vec![0, 1]).is_err());
        let negative = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        assert!(TestFunctionSpace::new(labels.clone(), sup.clone(), negative, vec![0, 1]).is_err());
        assert!(TestFunctionSpace::new(labels, sup, DMatrix::identity(2, 2), vec![1, 1]).is_err());
    }

    #[test]
    fn complex_pair_of_conjugates() {
        // f and conj f on the same support, orthogonal to each other
        let sup = vec![square(0.0, 0.0, 1.0), square(0.0, 0.0, 1.0), square(8.0, 0.0, 1.0)];
        let space = TestFunctionSpace::new(
            vec!["f".into(), "conj f".into(), "g".into()],
            sup,
            DMatrix::identity(3, 3),
            vec![1, 0, 2],
        )
        .unwrap();
        let pf = fermi_field(0, &space);
        assert!((fermi_field(1, &space).adjoint() - &pf).norm() < 1e-14);
        let pg = fermi_field(2, &space);
        assert!((&pf * &pg + &pg * &pf).norm() < 1e-14);
    }

    #[test]
    fn motions() {
        let c = cone(2.0, 1.0, 0.4, 0.3);
        let id = c.transformed(&Motion::identity());
        assert_eq!(id, c);
        let t = c.transformed(&Motion::new([1.0, -2.0], 0.0));
        assert_eq!(t.directions, c.directions);
        assert!((t.support[0][0] - c.support[0][0] - 1.0).abs() < 1e-15);
        let full = c.transformed(&Motion::new([0.0, 0.0], crate::TAU));
        for (a, b) in full.support.iter().zip(&c.support) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        assert_eq!(full.directions.center.winding(), c.directions.center.winding() + 1);
        // a rotated cone is the rotated point set: n_mu turns into n_{mu + omega}
        let m = Motion::new([0.3, 0.7], 0.9);
        let r = c.transformed(&m);
        let apex = c.support[0];
        let d = direction(c.directions.center.omega);
        let far = [apex[0] + 7.0 * d[0], apex[1] + 7.0 * d[1]];
        assert!(r.contains(m.apply(far)));
    }

    #[test]
    fn find_image_in_space() {
        let a = square(0.0, 0.0, 1.0);
        let m = Motion::new([5.0, 0.0], 0.0);
        let b: Vec<Point> = a.iter().map(|&x| m.apply(x)).collect();
        let space = TestFunctionSpace::orthonormal_real(vec![a, b]).unwrap();
        assert_eq!(space.find_image(0, &m).unwrap(), 1);
        assert!(matches!(space.find_image(1, &m), Err(Error::UnknownTransformedFunction(_))));
        let moved = space.transformed(&m);
        assert_eq!(moved.gram, space.gram);
    }

    #[test]
    fn tensor_exchange_carries_fermionic_sign() {
        let space = TestFunctionSpace::orthonormal_real(vec![square(-3.0, 0.0, 1.0), square(3.0, 0.0, 1.0)]).unwrap();
        let f = fermi_pairs(&fermi_field(0, &space), &fermi_field(1, &space));
        let phase = C64::from_polar(1.0, 0.7);
        let circle = vec![(phase * 2.0, C64::new(2.0, 0.0)), (phase * 0.5, C64::new(0.5, 0.0))];
        let t = tensor_exchange(&f, &circle).unwrap();
        assert!((t.phase + phase).norm() < 1e-14);
    }

    #[test]
    fn predicted_cone_phases() {
        let c1 = cone(5.0, 0.0, EAST, 0.2);
        let c2 = cone(-5.0, 0.0, WEST, 0.2);
        assert!((predicted_cone_phase(0.5, &c1, &c2).unwrap() + C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((predicted_cone_phase(0.0, &c1, &c2).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        let c3 = cone(-5.0, 0.0, EAST, 0.2);
        assert_eq!(predicted_cone_phase(0.0, &c1, &c3).unwrap_err(), Error::Overlap);
    }


    #[test]
    fn direct_tensor_matches_factorized() {
        use crate::anyon::{build_field_with, default_probes, AnyonSpec};
        use crate::fock::{slater::exchange_pairs_slater, FockBasis};
        use crate::modes::ModeWindow;
        let window = ModeWindow::new(3).unwrap();
        let basis = FockBasis::new(window).unwrap();
        let probes = default_probes(window).unwrap();
        let space = TestFunctionSpace::orthonormal_real(vec![square(-3.0, 0.0, 1.0), square(3.0, 0.0, 1.0)]).unwrap();
        let (p0, p1) = (fermi_field(0, &space), fermi_field(1, &space));
        for s in [0.5, 0.25] {
            let f1 = build_field_with(&AnyonSpec::new(s, 2.3, 1.0).unwrap(), window, f64::INFINITY).unwrap();
            let f2 = build_field_with(&AnyonSpec::new(s, 0.0, 1.0).unwrap(), window, f64::INFINITY).unwrap();
            let (c1, c2) = (f1.fock(basis).unwrap(), f2.fock(basis).unwrap());
            let direct = measure_tensor_exchange(
                &TensorOp { fermi: &p0, circle: &c1 },
                &TensorOp { fermi: &p1, circle: &c2 },
                &probes,
                2,
            )
            .unwrap();
            let circle = exchange_pairs_slater(&f1.slater().unwrap(), &f2.slater().unwrap(), &probes);
            let factored = tensor_exchange(&fermi_pairs(&p0, &p1), &circle).unwrap();
            assert!((direct.phase - factored.phase).norm() < 1e-9, "s={s}");
            let alone = phase_from_pairs(&circle).unwrap();
            assert!((factored.phase + alone.phase).norm() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn disjoint_cones_have_disjoint_parts(
            x1 in -5.0..5.0f64, y1 in -5.0..5.0f64, m1 in -3.2..3.2f64, e1 in 0.05..1.4f64,
            x2 in -5.0..5.0f64, y2 in -5.0..5.0f64, m2 in -3.2..3.2f64, e2 in 0.05..1.4f64,
        ) {
            let c1 = cone(x1, y1, m1, e1);
            let c2 = cone(x2, y2, m2, e2);
            if cones_disjoint(&c1, &c2).unwrap() {
                prop_assert!(polygons_disjoint(&c1.support, &c2.support).unwrap());
                prop_assert!(crate::covering::projections_disjoint(&c1.directions, &c2.directions));
            }
        }

        #[test]
        fn motion_composition(
            ax in -3.0..3.0f64, ay in -3.0..3.0f64, w1 in -4.0..4.0f64,
            bx in -3.0..3.0f64, by in -3.0..3.0f64, w2 in -4.0..4.0f64,
        ) {
            let m1 = Motion::new([ax, ay], w1);
            let m2 = Motion::new([bx, by], w2);
            let c = cone(1.0, -1.0, 0.2, 0.5);
            let stepwise = c.transformed(&m1).transformed(&m2);
            let composed = c.transformed(&m1.then(&m2));
            for (a, b) in stepwise.support.iter().zip(&composed.support) {
                prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            }
            prop_assert!((stepwise.directions.center.omega - composed.directions.center.omega).abs() < 1e-12);
        }
    }
}
