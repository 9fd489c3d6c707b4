//! The truncated one-particle space `span{e_n : -M <= n <= M}` with `e_n(x) = e^{inx}/sqrt(2pi)`.
//!
//! The zero mode belongs to the plus block. Matrices are indexed by `n + M`,
//! so the minus block occupies indices `0..M` and the plus block `M..=2M`.

use crate::{Error, Result, C64, TAU};
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeWindow {
    pub cutoff: usize,
}

impl ModeWindow {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Invalid("mode cutoff must be positive".into()));
        }
        Ok(Self { cutoff })
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn index(&self, n: i64) -> usize {
        debug_assert!(self.contains(n), "mode {n} outside window {}", self.cutoff);
        (n + self.cutoff as i64) as usize
    }

    pub fn mode(&self, index: usize) -> i64 {
        index as i64 - self.cutoff as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.cutoff
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.cutoff as i64;
        -m..=m
    }

    pub fn plus_range(&self) -> std::ops::Range<usize> {
        self.cutoff..self.dim()
    }

    pub fn minus_range(&self) -> std::ops::Range<usize> {
        0..self.cutoff
    }

    /// Basis vector `e_n` as a column in the window.
    pub fn basis_vector(&self, n: i64) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[self.index(n)] = C64::new(1.0, 0.0);
        v
    }
}

/// A 2pi-periodic function carried as samples on `x_j = 2 pi j / G` plus its spectrum.
#[derive(Clone, Debug)]
pub struct PeriodicFunction {
    samples: Vec<C64>,
    /// `spectrum[k]` is the coefficient of mode `k` (or `k - G` above `G/2`).
    spectrum: Vec<C64>,
}

impl PeriodicFunction {
    pub fn from_samples(samples: Vec<C64>) -> Result<Self> {
        let g = samples.len();
        if g < 4 {
            return Err(Error::GridTooCoarse { grid: g, cutoff: 0, needed: 4 });
        }
        let mut buf = samples.clone();
        FftPlanner::new().plan_fft_forward(g).process(&mut buf);
        let scale = TAU.sqrt() / g as f64;
        let spectrum = buf.into_iter().map(|c| c * scale).collect();
        Ok(Self { samples, spectrum })
    }

    pub fn from_fn(grid: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::from_samples((0..grid).map(|j| f(grid_point(j, grid))).collect())
    }

    pub fn from_real_fn(grid: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Builds the function from coefficients `c_n`, `|n| < G/2`, in the `1/sqrt(2pi)` normalization.
    pub fn from_coefficients(grid: usize, coeffs: impl Fn(i64) -> C64) -> Result<Self> {
        let mut spectrum = vec![C64::new(0.0, 0.0); grid];
        let half = (grid / 2) as i64;
        for n in (1 - half)..half {
            spectrum[n.rem_euclid(grid as i64) as usize] = coeffs(n);
        }
        Ok(Self::from_spectrum(spectrum))
    }

    fn from_spectrum(spectrum: Vec<C64>) -> Self {
        let g = spectrum.len();
        let mut buf = spectrum.clone();
        FftPlanner::new().plan_fft_inverse(g).process(&mut buf);
        let scale = 1.0 / TAU.sqrt();
        let samples = buf.into_iter().map(|c| c * scale).collect();
        Self { samples, spectrum }
    }

    pub fn grid_len(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Largest resolved mode index, `G/2 - 1`.
    pub fn band_limit(&self) -> usize {
        self.grid_len() / 2 - 1
    }

    /// `(1/sqrt(2pi)) int f(x) e^{-inx} dx`; zero beyond the band limit.
    pub fn coeff(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.band_limit() {
            return C64::new(0.0, 0.0);
        }
        self.spectrum[n.rem_euclid(self.grid_len() as i64) as usize]
    }

    /// Evaluates the band-limited interpolant at an arbitrary point.
    pub fn eval(&self, x: f64) -> C64 {
        let b = self.band_limit() as i64;
        (-b..=b)
            .map(|n| self.coeff(n) * C64::from_polar(1.0, n as f64 * x))
            .sum::<C64>()
            / TAU.sqrt()
    }

    /// Spectral derivative. The Nyquist mode is dropped.
    pub fn derivative(&self) -> Self {
        let g = self.grid_len();
        let b = self.band_limit() as i64;
        let mut spectrum = vec![C64::new(0.0, 0.0); g];
        for n in -b..=b {
            let k = n.rem_euclid(g as i64) as usize;
            spectrum[k] = self.spectrum[k] * C64::new(0.0, n as f64);
        }
        Self::from_spectrum(spectrum)
    }

    /// `x -> f(x - omega)`, applied to the spectrum.
    pub fn rotated(&self, omega: f64) -> Self {
        let g = self.grid_len();
        let b = self.band_limit() as i64;
        let mut spectrum = vec![C64::new(0.0, 0.0); g];
        for n in -b..=b {
            let k = n.rem_euclid(g as i64) as usize;
            spectrum[k] = self.spectrum[k] * C64::from_polar(1.0, -(n as f64) * omega);
        }
        Self::from_spectrum(spectrum)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Result<Self> {
        Self::from_samples(self.samples.iter().map(|&z| f(z)).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.grid_len() != other.grid_len() {
            return Err(Error::Invalid("grids differ".into()));
        }
        Self::from_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect())
    }

    /// `max |c_n|` over `|n| > from`, the part of the spectrum a window of that size cannot see.
    pub fn tail(&self, from: usize) -> f64 {
        let b = self.band_limit() as i64;
        (from as i64 + 1..=b)
            .flat_map(|n| [self.coeff(n).norm(), self.coeff(-n).norm()])
            .fold(0.0, f64::max)
    }

    /// Trapezoid rule for `int_0^{2pi} f`.
    pub fn integral(&self) -> C64 {
        self.samples.iter().sum::<C64>() * (TAU / self.grid_len() as f64)
    }
}

pub fn grid_point(j: usize, grid: usize) -> f64 {
    TAU * j as f64 / grid as f64
}

/// Samples `f` on a grid and checks the grid resolves what a window of this cutoff needs.
pub fn analyze(f: impl Fn(f64) -> C64, window: ModeWindow, grid: usize) -> Result<PeriodicFunction> {
    let needed = 4 * window.cutoff + 4;
    if grid < needed {
        return Err(Error::GridTooCoarse { grid, cutoff: window.cutoff, needed });
    }
    PeriodicFunction::from_fn(grid, f)
}

pub fn default_grid(window: ModeWindow) -> usize {
    8 * (window.cutoff + 1)
}

/// A complex matrix on the window with its plus/minus block structure.
#[derive(Clone, Debug, PartialEq)]
pub struct OneParticleOperator {
    pub window: ModeWindow,
    pub matrix: DMatrix<C64>,
}

impl OneParticleOperator {
    pub fn new(window: ModeWindow, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != window.dim() || matrix.ncols() != window.dim() {
            return Err(Error::Invalid(format!(
                "matrix is {}x{}, window needs {}",
                matrix.nrows(),
                matrix.ncols(),
                window.dim()
            )));
        }
        Ok(Self { window, matrix })
    }

    pub fn identity(window: ModeWindow) -> Self {
        Self { window, matrix: DMatrix::identity(window.dim(), window.dim()) }
    }

    pub fn diagonal(window: ModeWindow, f: impl Fn(i64) -> C64) -> Self {
        let d = DVector::from_iterator(window.dim(), window.modes().map(f));
        Self { window, matrix: DMatrix::from_diagonal(&d) }
    }

    /// `e_n -> e_{n+1}`; the top mode is sent to zero.
    pub fn shift(window: ModeWindow) -> Self {
        let d = window.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for i in 0..d - 1 {
            matrix[(i + 1, i)] = C64::new(1.0, 0.0);
        }
        Self { window, matrix }
    }

    /// `U_1(omega) = diag(e^{-in omega})`.
    pub fn rotation(window: ModeWindow, omega: f64) -> Self {
        Self::diagonal(window, |n| C64::from_polar(1.0, -(n as f64) * omega))
    }

    pub fn entry(&self, m: i64, n: i64) -> C64 {
        self.matrix[(self.window.index(m), self.window.index(n))]
    }

    pub fn pp(&self) -> DMatrix<C64> {
        let m = self.window.cutoff;
        self.matrix.view((m, m), (m + 1, m + 1)).into_owned()
    }

    pub fn pm(&self) -> DMatrix<C64> {
        let m = self.window.cutoff;
        self.matrix.view((m, 0), (m + 1, m)).into_owned()
    }

    pub fn mp(&self) -> DMatrix<C64> {
        let m = self.window.cutoff;
        self.matrix.view((0, m), (m, m + 1)).into_owned()
    }

    pub fn mm(&self) -> DMatrix<C64> {
        let m = self.window.cutoff;
        self.matrix.view((0, 0), (m, m)).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self { window: self.window, matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_window(self, other)?;
        Ok(Self { window: self.window, matrix: &self.matrix * &other.matrix })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { window: self.window, matrix: &self.matrix * z }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let mut m = self.matrix.clone();
        m.fill_diagonal(C64::new(0.0, 0.0));
        m.norm()
    }

    /// `e^{itA}` for Hermitian `A`, via the eigendecomposition.
    pub fn exp_i(&self, t: f64) -> Result<Self> {
        let dev = self.hermitian_deviation();
        if dev > 1e-10 * self.matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        let eig = self.matrix.clone().symmetric_eigen();
        let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, t * l));
        let q = &eig.eigenvectors;
        let matrix = q * DMatrix::from_diagonal(&phases) * q.adjoint();
        Ok(Self { window: self.window, matrix })
    }
}

pub(crate) fn same_window(a: &OneParticleOperator, b: &OneParticleOperator) -> Result<()> {
    if a.window != b.window {
        return Err(Error::WindowMismatch(a.window.cutoff, b.window.cutoff));
    }
    Ok(())
}

/// `A_mn = g_{m-n} / sqrt(2pi)`: multiplication by `g` compressed to the window.
pub fn multiplication_operator(g: &PeriodicFunction, window: ModeWindow) -> Result<OneParticleOperator> {
    let needed = 2 * window.cutoff;
    if g.band_limit() < needed {
        return Err(Error::GridTooCoarse {
            grid: g.grid_len(),
            cutoff: window.cutoff,
            needed: 2 * needed + 2,
        });
    }
    let d = window.dim();
    let inv = 1.0 / TAU.sqrt();
    let matrix = DMatrix::from_fn(d, d, |i, j| g.coeff(window.mode(i) - window.mode(j)) * inv);
    Ok(OneParticleOperator { window, matrix })
}

/// `||A_{+-}||_2^2 + ||A_{-+}||_2^2`, which for Hermitian `A` equals
/// `Tr(A_{-+}A_{+-}) + Tr(A_{+-}A_{-+})`.
pub fn hs_offdiag_norm_sq(a: &OneParticleOperator) -> f64 {
    a.pm().norm_squared() + a.mp().norm_squared()
}

/// `U_1(omega) A U_1(omega)^*`.
pub fn rotate_one_particle(a: &OneParticleOperator, omega: f64) -> OneParticleOperator {
    let w = a.window;
    let d = w.dim();
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        let k = (w.mode(i) - w.mode(j)) as f64;
        a.matrix[(i, j)] * C64::from_polar(1.0, -k * omega)
    });
    OneParticleOperator { window: w, matrix }
}

/// Relative singular-value threshold for rank decisions.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Null vectors of a square block, split by where they live.
///
/// A finite section of the minus block always has `dim ker = dim ker*`. The
/// extra null vectors are artifacts localized at the cut `n = -M`, while the
/// genuine ones sit next to the Fermi level `n = -1`. Only the latter count.
fn fermi_side_nullity(block: &DMatrix<C64>, vectors: &DMatrix<C64>, sigma: &[f64], smax: f64) -> usize {
    let m = block.nrows();
    let near_half = m / 2;
    let mut count = 0;
    for (k, &s) in sigma.iter().enumerate() {
        if s > RANK_THRESHOLD * smax {
            continue;
        }
        let v = vectors.column(k);
        // minus block index i is mode i - M; Fermi side is i >= M/2
        let fermi: f64 = (near_half..m).map(|i| v[i].norm_sqr()).sum();
        if fermi >= 0.5 * v.norm_squared() {
            count += 1;
        }
    }
    count
}

/// `dim ker V_{--} - dim ker V_{--}^*`, counting null vectors localized near the Fermi level.
pub fn fredholm_index(v: &OneParticleOperator) -> Result<i64> {
    let block = v.mm();
    let m = block.nrows();
    let svd = block.clone().svd(true, true);
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    for &s in &sigma {
        let r = s / smax;
        if r > RANK_THRESHOLD * 1e-2 && r < RANK_THRESHOLD * 1e2 {
            return Err(Error::IllConditioned { ratio: r });
        }
    }
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    // right singular vectors are the rows of v_t, conjugated
    let right = DMatrix::from_fn(m, m, |i, k| vt[(k, i)].conj());
    let ker = fermi_side_nullity(&block, &right, &sigma, smax);
    let coker = fermi_side_nullity(&block, &u, &sigma, smax);
    Ok(ker as i64 - coker as i64)
}
