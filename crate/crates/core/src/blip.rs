//! The bump mollifier `chi_eps` and the smeared sawtooth `alpha^eps = x_hat * chi_eps`.

use crate::covering::hat;
use crate::modes::{ModeWindow, PeriodicFunction};
use crate::{Error, Result, C64, TAU};
use gauss_quad::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

const PANELS: usize = 24;
const NODES: usize = 24;

fn rule() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(NODES).unwrap())
}

/// Composite Gauss-Legendre on `[a, b]`.
fn integrate(quad: &GaussLegendre, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let lo = a + h * k as f64;
            quad.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// Normalized bump `c exp(-1/(1-(x/eps)^2))` supported in `[-eps, eps]`.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub epsilon: f64,
    norm: f64,
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

pub fn standard_mollifier(epsilon: f64) -> Result<Mollifier> {
    if !(epsilon > 0.0 && epsilon < PI / 2.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let mass = integrate(&rule(), -epsilon, epsilon, |x| raw_bump(x / epsilon));
    Ok(Mollifier { epsilon, norm: 1.0 / mass })
}

impl Mollifier {
    pub fn eval(&self, x: f64) -> f64 {
        self.norm * raw_bump(x / self.epsilon)
    }

    /// `int_{-eps}^{x} chi`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -self.epsilon {
            return 0.0;
        }
        if x >= self.epsilon {
            return 1.0;
        }
        // integrate from the nearer end for accuracy
        if x <= 0.0 {
            integrate(&rule(), -self.epsilon, x, |y| self.eval(y))
        } else {
            1.0 - integrate(&rule(), x, self.epsilon, |y| self.eval(y))
        }
    }

    pub fn total_mass(&self) -> f64 {
        integrate(&rule(), -self.epsilon, self.epsilon, |y| self.eval(y))
    }

    /// `int chi(y) e^{-iky} dy`, real because `chi` is even.
    pub fn fourier(&self, k: f64) -> f64 {
        integrate(&rule(), -self.epsilon, self.epsilon, |y| self.eval(y) * (k * y).cos())
    }

    /// 2pi-periodic sum `sum_k chi(x - 2 pi k)`.
    pub fn periodized(&self, x: f64) -> f64 {
        let h = hat(x);
        self.eval(h) + self.eval(h - TAU)
    }
}

/// `alpha^eps` rotated to `omega`, with its grid representation.
#[derive(Clone, Debug)]
pub struct BlipFunction {
    pub epsilon: f64,
    pub omega: f64,
    pub mollifier: Mollifier,
    pub function: PeriodicFunction,
}

/// Pointwise `alpha^eps(x)` from the closed-form convolution with the sawtooth.
pub fn blip_value(chi: &Mollifier, x: f64) -> f64 {
    let h = hat(x);
    h + TAU * (1.0 - chi.cdf(h)) - TAU * chi.cdf(h - TAU)
}

pub fn blip(chi: &Mollifier, grid: usize) -> Result<BlipFunction> {
    blip_at(chi, 0.0, grid)
}

/// `alpha^eps_omega(x) = alpha^eps(x - omega)` sampled on a grid of `grid` points.
pub fn blip_at(chi: &Mollifier, omega: f64, grid: usize) -> Result<BlipFunction> {
    let function = PeriodicFunction::from_real_fn(grid, |x| blip_value(chi, x - omega))?;
    Ok(BlipFunction { epsilon: chi.epsilon, omega, mollifier: chi.clone(), function })
}

/// Grid used for blips on a window: at least `8(M+1)`, and fine enough to resolve the bump.
pub fn blip_grid(window: ModeWindow) -> usize {
    (8 * (window.cutoff + 1)).max(2048).next_power_of_two()
}

impl BlipFunction {
    pub fn rotated(&self, delta: f64) -> Result<Self> {
        blip_at(&self.mollifier, self.omega + delta, self.function.grid_len())
    }

    pub fn value(&self, x: f64) -> f64 {
        blip_value(&self.mollifier, x - self.omega)
    }

    /// Closed-form Fourier coefficient in the `1/sqrt(2pi)` normalization.
    pub fn exact_coefficient(&self, n: i64) -> C64 {
        let phase = C64::from_polar(1.0, -(n as f64) * self.omega);
        if n == 0 {
            return C64::new(TAU.sqrt() * PI, 0.0);
        }
        C64::new(0.0, TAU.sqrt() / n as f64) * self.mollifier.fourier(n as f64) * phase
    }
}

/// `(alpha^eps)'(x) = 1 - 2 pi sum_k chi(x - omega - 2 pi k)` on the blip's grid.
pub fn blip_derivative(b: &BlipFunction) -> Result<PeriodicFunction> {
    PeriodicFunction::from_real_fn(b.function.grid_len(), |x| {
        1.0 - TAU * b.mollifier.periodized(x - b.omega)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::grid_point;
    use proptest::prelude::*;

    #[test]
    fn mollifier_normalized_and_even() {
        let chi = standard_mollifier(0.3).unwrap();
        assert!((chi.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(chi.eval(0.15), chi.eval(-0.15));
        assert_eq!(chi.eval(0.3), 0.0);
        assert_eq!(chi.eval(-0.31), 0.0);
        assert!((chi.cdf(0.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn epsilon_range() {
        assert!(matches!(standard_mollifier(PI / 2.0), Err(Error::EpsilonOutOfRange(_))));
        assert!(standard_mollifier(0.0).is_err());
        assert!(standard_mollifier(-0.1).is_err());
        assert!(standard_mollifier(1.5).is_ok());
    }

    #[test]
    fn blip_values() {
        for eps in [0.1, 0.3, 1.2] {
            let chi = standard_mollifier(eps).unwrap();
            assert!((blip_value(&chi, PI) - PI).abs() < 1e-14);
            assert!((blip_value(&chi, 0.0) - PI).abs() < 1e-12);
            let b = blip(&chi, 1024).unwrap();
            let mean = b.function.integral().re / TAU;
            assert!((mean - PI).abs() < 1e-10);
        }
    }

    #[test]
    fn value_at_zero_by_direct_convolution() {
        // alpha(0) = int hat(-y) chi(y) dy evaluated by brute-force midpoint sum
        let chi = standard_mollifier(0.4).unwrap();
        let n = 200_000;
        let h = 0.8 / n as f64;
        let direct: f64 = (0..n)
            .map(|k| {
                let y = -0.4 + (k as f64 + 0.5) * h;
                hat(-y) * chi.eval(y) * h
            })
            .sum();
        assert!((direct - PI).abs() < 1e-8);
        assert!((blip_value(&chi, 0.0) - direct).abs() < 1e-8);
    }

    #[test]
    fn linear_away_from_blip() {
        let chi = standard_mollifier(0.5).unwrap();
        let b = blip(&chi, 512).unwrap();
        for (j, s) in b.function.samples().iter().enumerate() {
            let x = grid_point(j, 512);
            if x > 0.5 && x < TAU - 0.5 {
                assert!((s.re - x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let chi = standard_mollifier(0.3).unwrap();
        let b = blip(&chi, 4096).unwrap();
        let d = blip_derivative(&b).unwrap();
        assert!((d.samples()[2048].re - 1.0).abs() < 1e-14);
        assert!((d.samples()[0].re - (1.0 - TAU * chi.eval(0.0))).abs() < 1e-14);
        assert!(d.integral().norm() < 1e-10, "{}", d.integral());
    }

    #[test]
    fn spectral_derivative_matches_closed_form() {
        let chi = standard_mollifier(0.5).unwrap();
        let b = blip(&chi, blip_grid(ModeWindow::new(32).unwrap())).unwrap();
        let closed = blip_derivative(&b).unwrap();
        let spectral = b.function.derivative();
        let err = closed
            .samples()
            .iter()
            .zip(spectral.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn coefficients_decay_fast() {
        // the bump transform oscillates, so pointwise ratios are checked at a width
        // where no zero falls near the sampled modes, and envelopes at several widths
        let chi = standard_mollifier(0.7).unwrap();
        let b = blip(&chi, 4096).unwrap();
        for n in [8i64, 16, 32] {
            assert!(b.function.coeff(2 * n).norm() < 0.25 * b.function.coeff(n).norm());
        }
        for eps in [0.3, 0.5, 1.0, 1.2] {
            let b = blip(&standard_mollifier(eps).unwrap(), 4096).unwrap();
            for n in [8usize, 16, 32] {
                assert!(b.function.tail(2 * n - 1) < 0.25 * b.function.tail(n - 1), "eps={eps} n={n}");
            }
        }
    }

    #[test]
    fn grid_coefficients_match_closed_form() {
        let chi = standard_mollifier(0.6).unwrap();
        let b = blip_at(&chi, 0.9, 2048).unwrap();
        for n in -20..=20 {
            assert!((b.function.coeff(n) - b.exact_coefficient(n)).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn grid_policy() {
        assert_eq!(blip_grid(ModeWindow::new(4).unwrap()), 2048);
        assert!(blip_grid(ModeWindow::new(1000).unwrap()) >= 8 * 1001);
    }

    proptest! {
        #[test]
        fn rotation_compatibility(omega in -7.0..7.0f64, eps in 0.1..1.4f64) {
            let chi = standard_mollifier(eps).unwrap();
            let b = blip(&chi, 2048).unwrap();
            let r = b.rotated(omega).unwrap();
            let spectral = b.function.rotated(omega);
            for j in (0..2048).step_by(4) {
                let x = grid_point(j, 2048);
                prop_assert!((r.function.samples()[j].re - blip_value(&chi, x - omega)).abs() < 1e-12);
                if eps > 0.4 {
                    prop_assert!((spectral.samples()[j] - r.function.samples()[j]).norm() < 1e-8);
                }
            }
        }

        #[test]
        fn periodic_in_argument(x in -20.0..20.0f64) {
            let chi = standard_mollifier(0.7).unwrap();
            prop_assert!((blip_value(&chi, x) - blip_value(&chi, x + TAU)).abs() < 1e-12);
        }
    }
}
