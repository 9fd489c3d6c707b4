//! The spin-`s` field `Phi_omega = e^{i s omega (2Q-1)} Gamma(V_omega) Gamma(e^{i lambda alpha_omega})`
//! on the covering of the circle, its rotation representation and the checks
//! of exchange relations and spin statistics.
//!
//! Every field can be evaluated along two routes. [`Route::Fock`] builds sparse
//! Fock-space operators (dense exponentials up to `M = 4`, Krylov beyond).
//! [`Route::QuasiFree`] evaluates the same truncated operators on Slater
//! determinants and reaches larger windows.

use crate::blip::{blip, blip_grid, standard_mollifier};
use crate::covering::{hat, relative_winding, CoveringInterval, CoveringPoint};
use crate::fock::slater::{measure_exchange_phase_slater, probe_discrepancy, SlaterOp, SlaterProduct, SlaterState};
use crate::fock::{
    implementer_exp, implementer_shift, measure_exchange_phase, phase_from_pairs, second_quantize_diagonal,
    ExchangeMeasurement, FockBasis, FockMap, FockOperator, Implementer, ProbePolicy, ProbeSet,
};
use crate::modes::{multiplication_operator, rotate_one_particle, ModeWindow, OneParticleOperator};
use crate::{Error, Result, C64, TAU};
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnyonSpec {
    pub spin: f64,
    pub lambda: f64,
    pub omega: f64,
    pub epsilon: f64,
}

impl AnyonSpec {
    /// Spin `s <= 1/2` with the default `lambda = -sqrt(1 - 2s)`.
    pub fn new(spin: f64, omega: f64, epsilon: f64) -> Result<Self> {
        if !spin.is_finite() || spin > 0.5 {
            return Err(Error::SpinOutOfRange(spin));
        }
        if !(epsilon > 0.0 && epsilon < PI / 2.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        if !omega.is_finite() {
            return Err(Error::Invalid(format!("omega {omega} is not finite")));
        }
        let lambda = -(1.0 - 2.0 * spin).sqrt();
        if lambda * lambda > 10.0 {
            log::warn!("lambda^2 = {:.1}: the exponential oscillates fast and truncation error grows", lambda * lambda);
        }
        Ok(Self { spin, lambda, omega, epsilon })
    }

    pub fn with_positive_lambda(mut self) -> Self {
        self.lambda = self.lambda.abs();
        self
    }

    pub fn point(&self) -> CoveringPoint {
        CoveringPoint::new(self.omega)
    }

    pub fn interval(&self) -> CoveringInterval {
        CoveringInterval::new(self.omega, self.epsilon).expect("epsilon checked at construction")
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self { omega: self.omega + delta, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    Fock,
    QuasiFree,
}

/// The field on a fixed window, held through its one-particle data.
#[derive(Clone, Debug)]
pub struct AnyonField {
    pub spec: AnyonSpec,
    pub window: ModeWindow,
    pub localization: CoveringInterval,
    /// `max |alpha_n|` over modes the window cannot see.
    pub tail: f64,
    shift: OneParticleOperator,
    alpha: OneParticleOperator,
}

pub fn build_field(spec: &AnyonSpec, window: ModeWindow) -> Result<AnyonField> {
    build_field_with(spec, window, DEFAULT_TAIL_TOLERANCE)
}

/// As [`build_field`], with a custom bound on the unresolved blip coefficients.
pub fn build_field_with(spec: &AnyonSpec, window: ModeWindow, tail_tolerance: f64) -> Result<AnyonField> {
    let chi = standard_mollifier(spec.epsilon)?;
    let b = blip(&chi, blip_grid(window))?;
    let tail = b.function.tail(window.cutoff);
    if tail > tail_tolerance {
        return Err(Error::WindowTooSmall { cutoff: window.cutoff, tail, tolerance: tail_tolerance });
    }
    // rotating the operator, not resampling the function, keeps covariance exact
    let alpha = rotate_one_particle(&multiplication_operator(&b.function, window)?, spec.omega);
    let shift = rotate_one_particle(&OneParticleOperator::shift(window), spec.omega);
    Ok(AnyonField { spec: *spec, window, localization: spec.interval(), tail, shift, alpha })
}

/// One factor of a Fock-space product.
#[derive(Clone, Debug)]
pub enum FockFactor {
    Op(FockOperator),
    Exp(Implementer),
}

impl FockFactor {
    fn adjoint(&self) -> Self {
        match self {
            FockFactor::Op(o) => FockFactor::Op(o.adjoint()),
            FockFactor::Exp(e) => FockFactor::Exp(e.adjoint()),
        }
    }

    fn as_map(&self) -> &dyn FockMap {
        match self {
            FockFactor::Op(o) => o,
            FockFactor::Exp(e) => e,
        }
    }
}

/// `factors[0] factors[1] ...`, applied right to left.
#[derive(Clone, Debug)]
pub struct FockChain {
    pub basis: FockBasis,
    pub factors: Vec<FockFactor>,
}

impl FockChain {
    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis, factors: self.factors.iter().rev().map(FockFactor::adjoint).collect() }
    }

    /// The product as one sparse operator, when every factor is explicit.
    pub fn to_operator(&self) -> Option<FockOperator> {
        let mut acc = FockOperator::identity(self.basis);
        for f in &self.factors {
            match f {
                FockFactor::Op(o) => acc = acc.mul(o).ok()?,
                FockFactor::Exp(e) => acc = acc.mul(e.as_operator()?).ok()?,
            }
        }
        Some(acc)
    }
}

impl FockMap for FockChain {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut w = v.to_vec();
        for f in self.factors.iter().rev() {
            w = f.as_map().apply(&w)?;
        }
        Ok(w)
    }
}

fn charge_phase_operator(basis: FockBasis, quadratic: f64, linear: f64, constant: f64) -> FockOperator {
    FockOperator::diagonal(basis, |st| {
        let q = basis.charge(st) as f64;
        C64::from_polar(1.0, quadratic * q * q + linear * q + constant)
    })
}

impl AnyonField {
    pub fn shift_operator(&self) -> &OneParticleOperator {
        &self.shift
    }

    pub fn alpha_operator(&self) -> &OneParticleOperator {
        &self.alpha
    }

    /// `(linear, constant)` of the dressing `e^{i s omega (2Q - 1)}`.
    fn dressing(&self) -> (f64, f64) {
        let so = self.spec.spin * self.spec.omega;
        (2.0 * so, -so)
    }

    fn check_basis(&self, basis: FockBasis) -> Result<()> {
        if basis.window != self.window {
            return Err(Error::WindowMismatch(basis.window.cutoff, self.window.cutoff));
        }
        Ok(())
    }

    /// `Gamma(V_omega) Gamma(e^{i lambda alpha_omega})`, without the dressing.
    pub fn aux_fock(&self, basis: FockBasis) -> Result<FockChain> {
        self.check_basis(basis)?;
        let g = implementer_shift(&self.shift, basis)?;
        let e = implementer_exp(&self.alpha, self.spec.lambda, basis)?;
        Ok(FockChain { basis, factors: vec![FockFactor::Op(g), FockFactor::Exp(e)] })
    }

    pub fn fock(&self, basis: FockBasis) -> Result<FockChain> {
        let mut chain = self.aux_fock(basis)?;
        let (lin, c) = self.dressing();
        chain.factors.insert(0, FockFactor::Op(charge_phase_operator(basis, 0.0, lin, c)));
        Ok(chain)
    }

    pub fn aux_slater(&self) -> Result<SlaterProduct> {
        Ok(SlaterProduct::new(vec![
            SlaterOp::shift(&self.shift)?,
            SlaterOp::exponential(&self.alpha, self.spec.lambda)?,
        ]))
    }

    pub fn slater(&self) -> Result<SlaterProduct> {
        let (lin, c) = self.dressing();
        Ok(SlaterProduct::new(vec![SlaterOp::charge_phase(0.0, lin, c)]).then(&self.aux_slater()?))
    }
}

/// `U(omega) = e^{i s omega Q^2} U_0(omega)`.
pub fn rotation_rep(omega: f64, spin: f64, basis: FockBasis) -> FockOperator {
    let u0 = second_quantize_diagonal(&OneParticleOperator::rotation(basis.window, omega), basis)
        .expect("rotations are diagonal");
    let dress = charge_phase_operator(basis, spin * omega, 0.0, 0.0);
    dress.mul(&u0).expect("same basis")
}

pub fn rotation_rep_slater(omega: f64, spin: f64, window: ModeWindow) -> SlaterProduct {
    SlaterProduct::new(vec![SlaterOp::charge_phase(spin * omega, 0.0, 0.0), SlaterOp::rotation(window, omega)])
}

/// `-e^{2 pi i s (2N + 1)}` with `N = N(I1, I2)`.
pub fn predicted_phase(spin: f64, i1: &CoveringInterval, i2: &CoveringInterval) -> Result<C64> {
    let n = relative_winding(i1, i2)? as f64;
    Ok(-C64::from_polar(1.0, TAU * spin * (2.0 * n + 1.0)))
}

/// `-e^{-2 pi i s (2N + 1)}`, the phase of `Phi_1 Phi_2^*` against `Phi_2^* Phi_1`.
pub fn predicted_adjoint_phase(spin: f64, i1: &CoveringInterval, i2: &CoveringInterval) -> Result<C64> {
    Ok(predicted_phase(spin, i1, i2)?.conj())
}

/// `e^{-2is(hat(omega1 - omega2) - pi) - i pi}` for the undressed fields.
pub fn aux_predicted_phase(spin: f64, omega1: f64, omega2: f64) -> C64 {
    C64::from_polar(1.0, -2.0 * spin * (hat(omega1 - omega2) - PI) - PI)
}

/// The factor `e^{2is(omega1 - omega2)}` the dressing contributes to the exchange phase.
pub fn dressing_factor(spin: f64, omega1: f64, omega2: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * spin * (omega1 - omega2))
}

/// Default probes: basis states of charge -1, 0, 1 on the modes `-1..=0`,
/// the narrowest band that still reaches all three sectors.
pub fn default_probes(window: ModeWindow) -> Result<ProbeSet> {
    ProbePolicy::central(1).build(FockBasis::new(window)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    pub cutoff: usize,
    pub route: Route,
    pub winding: i64,
    pub measured: C64,
    pub predicted: C64,
    pub error: f64,
    pub max_deviation: f64,
    pub adjoint_measured: C64,
    pub adjoint_predicted: C64,
    pub adjoint_error: f64,
    pub adjoint_max_deviation: f64,
}

impl CommutationReport {
    pub fn worst_error(&self) -> f64 {
        self.error.max(self.adjoint_error)
    }
}

fn exchange(
    f1: &AnyonField,
    f2: &AnyonField,
    probes: &ProbeSet,
    route: Route,
    dressed: bool,
) -> Result<(ExchangeMeasurement, ExchangeMeasurement)> {
    match route {
        Route::Fock => {
            let basis = probes.basis;
            let (x, y) = if dressed { (f1.fock(basis)?, f2.fock(basis)?) } else { (f1.aux_fock(basis)?, f2.aux_fock(basis)?) };
            let direct = measure_exchange_phase(&x, &y, probes, 2)?;
            let adjoint = measure_exchange_phase(&x, &y.adjoint(), probes, 0)?;
            Ok((direct, adjoint))
        }
        Route::QuasiFree => {
            let (x, y) = if dressed { (f1.slater()?, f2.slater()?) } else { (f1.aux_slater()?, f2.aux_slater()?) };
            let direct = measure_exchange_phase_slater(&x, &y, probes)?;
            let adjoint = measure_exchange_phase_slater(&x, &y.adjoint(), probes)?;
            Ok((direct, adjoint))
        }
    }
}

/// Measures `Phi_1 Phi_2` against `Phi_2 Phi_1` and `Phi_1 Phi_2^*` against `Phi_2^* Phi_1`.
pub fn verify_commutation(
    spec1: &AnyonSpec,
    spec2: &AnyonSpec,
    window: ModeWindow,
    probes: &ProbeSet,
    route: Route,
    tail_tolerance: f64,
) -> Result<CommutationReport> {
    if spec1.spin != spec2.spin || spec1.lambda != spec2.lambda {
        return Err(Error::Invalid("both fields must share spin and lambda".into()));
    }
    let (i1, i2) = (spec1.interval(), spec2.interval());
    let winding = relative_winding(&i1, &i2)?;
    let f1 = build_field_with(spec1, window, tail_tolerance)?;
    let f2 = build_field_with(spec2, window, tail_tolerance)?;
    let (direct, adjoint) = exchange(&f1, &f2, probes, route, true)?;
    let predicted = predicted_phase(spec1.spin, &i1, &i2)?;
    let adjoint_predicted = predicted.conj();
    Ok(CommutationReport {
        cutoff: window.cutoff,
        route,
        winding,
        measured: direct.phase,
        predicted,
        error: (direct.phase - predicted).norm(),
        max_deviation: direct.max_deviation,
        adjoint_measured: adjoint.phase,
        adjoint_predicted,
        adjoint_error: (adjoint.phase - adjoint_predicted).norm(),
        adjoint_max_deviation: adjoint.max_deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxReport {
    pub cutoff: usize,
    pub measured: C64,
    pub predicted: C64,
    pub error: f64,
    /// `measured * dressing_factor`, to be compared with [`predicted_phase`].
    pub assembled: C64,
    pub dressed_predicted: C64,
    pub chain_error: f64,
}

/// Exchange phase of the undressed fields and the dressing algebra on top of it.
pub fn verify_aux_commutation(
    spec1: &AnyonSpec,
    spec2: &AnyonSpec,
    window: ModeWindow,
    probes: &ProbeSet,
    route: Route,
    tail_tolerance: f64,
) -> Result<AuxReport> {
    let f1 = build_field_with(spec1, window, tail_tolerance)?;
    let f2 = build_field_with(spec2, window, tail_tolerance)?;
    let (direct, _) = exchange(&f1, &f2, probes, route, false)?;
    let s = spec1.spin;
    let predicted = aux_predicted_phase(s, spec1.omega, spec2.omega);
    let assembled = direct.phase * dressing_factor(s, spec1.omega, spec2.omega);
    let dressed_predicted = predicted_phase(s, &spec1.interval(), &spec2.interval())?;
    Ok(AuxReport {
        cutoff: window.cutoff,
        measured: direct.phase,
        predicted,
        error: (direct.phase - predicted).norm(),
        assembled,
        dressed_predicted,
        chain_error: (assembled - dressed_predicted).norm(),
    })
}

/// `max |<t, U(delta) Phi_omega U(delta)^* v> - <t, Phi_{omega + delta} v>|` over probes.
pub fn covariance_error(spec: &AnyonSpec, delta: f64, window: ModeWindow, probes: &ProbeSet, route: Route, tail_tolerance: f64) -> Result<f64> {
    let f = build_field_with(spec, window, tail_tolerance)?;
    let g = build_field_with(&spec.shifted(delta), window, tail_tolerance)?;
    let s = spec.spin;
    match route {
        Route::QuasiFree => {
            let u = rotation_rep_slater(delta, s, window);
            let lhs = u.clone().then(&f.slater()?).then(&u.adjoint());
            Ok(probe_discrepancy(&lhs, &g.slater()?, probes))
        }
        Route::Fock => {
            let basis = probes.basis;
            let u = rotation_rep(delta, s, basis);
            let phi = f.fock(basis)?;
            let psi = g.fock(basis)?;
            let mut worst: f64 = 0.0;
            for &st in &probes.probes {
                let v = basis.basis_vector(st);
                let a = u.apply_vec(&phi.apply(&u.adjoint().apply_vec(&v))?);
                let b = psi.apply(&v)?;
                worst = worst.max(crate::fock::vec_dist(&a, &b));
            }
            Ok(worst)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinReport {
    pub spin: f64,
    pub cutoff: usize,
    /// Measured phase of `U(2 pi) Phi U(2 pi)^*` against `Phi` on each sector `H_q`.
    pub phases: Vec<(i64, C64)>,
    pub phase_errors: Vec<(i64, f64)>,
    /// `S_{q+2} - 2 S_{q+1} + S_q`, reduced to `(-1/2, 1/2]`.
    pub second_differences: Vec<(i64, f64)>,
    /// Distance of each second difference from `2s` modulo one.
    pub recurrence_error: f64,
    /// Quadratic coefficient of the fit `S_q = a q^2 + b q`, `S_0 = 0`.
    pub fit_quadratic: f64,
    pub fit_linear: f64,
    /// Largest distance modulo one between fitted and measured `S_{q+1} - S_q`.
    pub fit_residual: f64,
}

fn mod_one(x: f64) -> f64 {
    let y = x - x.round();
    if y <= -0.5 {
        y + 1.0
    } else {
        y
    }
}

/// Sector phases of `U(2 pi) Phi U(2 pi)^*` and the recurrence they obey.
pub fn verify_spin_recurrence(spec: &AnyonSpec, window: ModeWindow, charges: &[i64], tail_tolerance: f64) -> Result<SpinReport> {
    let basis = FockBasis::new(window)?;
    let field = build_field_with(spec, window, tail_tolerance)?;
    let phi = field.fock(basis)?;
    let u = rotation_rep(TAU, spec.spin, basis);
    let ud = u.adjoint();
    let policy = ProbePolicy::central(2).with_charges(charges.to_vec());
    let probes = policy.build(basis)?;
    let mut phases = Vec::new();
    for &q in charges {
        let sector = probes.by_charge(q);
        if sector.is_empty() {
            return Err(Error::SectorEmpty(q));
        }
        let mut pairs = Vec::new();
        for st in sector {
            let v = basis.basis_vector(st);
            let plain = phi.apply(&v)?;
            let conj = u.apply_vec(&phi.apply(&ud.apply_vec(&v))?);
            for t in probes.targets(q + 1) {
                pairs.push((conj[t as usize], plain[t as usize]));
            }
        }
        phases.push((q, phase_from_pairs(&pairs)?.phase));
    }
    Ok(spin_report(spec.spin, window.cutoff, phases))
}

/// Reduces measured sector phases `e^{2 pi i (S_{q+1} - S_q)}` to the recurrence data.
pub fn spin_report(spin: f64, cutoff: usize, phases: Vec<(i64, C64)>) -> SpinReport {
    let d: Vec<(i64, f64)> = phases.iter().map(|&(q, p)| (q, p.arg() / TAU)).collect();
    let phase_errors =
        phases.iter().map(|&(q, p)| (q, (p - C64::from_polar(1.0, TAU * spin * (2 * q + 1) as f64)).norm())).collect();
    let mut second = Vec::new();
    for w in d.windows(2) {
        if w[1].0 == w[0].0 + 1 {
            second.push((w[0].0, mod_one(w[1].1 - w[0].1)));
        }
    }
    let recurrence_error = second.iter().map(|&(_, x)| mod_one(x - 2.0 * spin).abs()).fold(0.0, f64::max);
    // lift the second differences next to their circular mean before fitting
    let mean = {
        let z: C64 = second.iter().map(|&(_, x)| C64::from_polar(1.0, TAU * x)).sum();
        z.arg() / TAU
    };
    let lifted: Vec<f64> = second.iter().map(|&(_, x)| mean + mod_one(x - mean)).collect();
    let a = if lifted.is_empty() { 0.0 } else { lifted.iter().sum::<f64>() / lifted.len() as f64 / 2.0 };
    let b = {
        let z: C64 = d.iter().map(|&(q, x)| C64::from_polar(1.0, TAU * (x - a * (2 * q + 1) as f64))).sum();
        z.arg() / TAU
    };
    let fit_residual = d.iter().map(|&(q, x)| mod_one(x - a * (2 * q + 1) as f64 - b).abs()).fold(0.0, f64::max);
    SpinReport {
        spin,
        cutoff,
        phases,
        phase_errors,
        second_differences: second,
        recurrence_error,
        fit_quadratic: a,
        fit_linear: b,
        fit_residual,
    }
}

/// `Phi Omega` in the quasi-free route, with its weight per charge-one particle number.
pub fn vacuum_image(field: &AnyonField) -> Result<SlaterState> {
    Ok(field.slater()?.apply(&SlaterState::vacuum(field.window)))
}
