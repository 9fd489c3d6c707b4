//! The Schwinger term `S(A, B) = i Tr(A_{-+} B_{+-} - B_{-+} A_{+-})` and its
//! position-space form `(1/2pi) int alpha beta'` for multiplication operators.

use crate::blip::{blip_at, standard_mollifier};
use crate::covering::hat;
use crate::modes::{multiplication_operator, same_window, ModeWindow, OneParticleOperator, PeriodicFunction};
use crate::{Error, Result, C64, TAU};
use std::f64::consts::PI;

pub fn schwinger_trace(a: &OneParticleOperator, b: &OneParticleOperator) -> Result<C64> {
    same_window(a, b)?;
    let t = (a.mp() * b.pm()).trace() - (b.mp() * a.pm()).trace();
    Ok(C64::i() * t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwingerQuadrature {
    /// `(1/2pi) int alpha beta'`
    pub value: f64,
    /// `(1/4pi) int (alpha beta' - alpha' beta)`
    pub antisymmetrized: f64,
}

pub fn schwinger_quadrature(alpha: &PeriodicFunction, beta: &PeriodicFunction) -> Result<SchwingerQuadrature> {
    if alpha.grid_len() != beta.grid_len() {
        return Err(Error::Invalid("quadrature needs a common grid".into()));
    }
    let da = alpha.derivative();
    let db = beta.derivative();
    let g = alpha.grid_len() as f64;
    let mut value = C64::new(0.0, 0.0);
    let mut anti = C64::new(0.0, 0.0);
    for j in 0..alpha.grid_len() {
        let (a, b) = (alpha.samples()[j], beta.samples()[j]);
        value += a * db.samples()[j];
        anti += a * db.samples()[j] - da.samples()[j] * b;
    }
    // (1/2pi) * (2pi/G) * sum
    Ok(SchwingerQuadrature { value: value.re / g, antisymmetrized: anti.re / (2.0 * g) })
}

/// `hat(omega1 - omega2) - pi`, valid when the two blips do not overlap.
pub fn schwinger_blip_closed_form(omega1: f64, omega2: f64, eps1: f64, eps2: f64) -> Result<f64> {
    let sep = hat(omega1 - omega2);
    let width = eps1 + eps2;
    if !(width < sep && sep < TAU - width) {
        return Err(Error::SeparationViolation { separation: sep, width });
    }
    Ok(sep - PI)
}

#[derive(Clone, Debug)]
pub struct SchwingerResult {
    pub window: ModeWindow,
    pub trace_value: C64,
    pub quadrature_value: f64,
    pub closed_form_value: Option<f64>,
}

impl SchwingerResult {
    pub fn trace_vs_quadrature(&self) -> f64 {
        (self.trace_value - C64::new(self.quadrature_value, 0.0)).norm()
    }

    pub fn quadrature_vs_closed_form(&self) -> Option<f64> {
        self.closed_form_value.map(|c| (c - self.quadrature_value).abs())
    }

    pub fn trace_vs_closed_form(&self) -> Option<f64> {
        self.closed_form_value.map(|c| (self.trace_value - C64::new(c, 0.0)).norm())
    }
}

/// All three routes for a pair of blips.
pub fn blip_schwinger(
    omega1: f64,
    omega2: f64,
    eps1: f64,
    eps2: f64,
    window: ModeWindow,
    grid: usize,
) -> Result<SchwingerResult> {
    let a = blip_at(&standard_mollifier(eps1)?, omega1, grid)?;
    let b = blip_at(&standard_mollifier(eps2)?, omega2, grid)?;
    let quad = schwinger_quadrature(&a.function, &b.function)?;
    let ma = multiplication_operator(&a.function, window)?;
    let mb = multiplication_operator(&b.function, window)?;
    Ok(SchwingerResult {
        window,
        trace_value: schwinger_trace(&ma, &mb)?,
        quadrature_value: quad.value,
        closed_form_value: schwinger_blip_closed_form(omega1, omega2, eps1, eps2).ok(),
    })
}

/// Trace formula for two blips in closed form:
/// `-(1/pi) sum_{k=1}^{2M} min(k, 2M+1-k) |c_k| |d_k| sin(k (omega1 - omega2))`, where
/// `c_k`, `d_k` are the unrotated coefficients' moduli. Used as a cheap check of the matrix route.
pub fn windowed_blip_trace(window: ModeWindow, coeff1: &[f64], coeff2: &[f64], delta: f64) -> f64 {
    let m = window.cutoff;
    (1..=2 * m)
        .map(|k| {
            let w = k.min(2 * m + 1 - k) as f64;
            w * coeff1[k] * coeff2[k] * (k as f64 * delta).sin()
        })
        .sum::<f64>()
        * (-1.0 / PI)
}
