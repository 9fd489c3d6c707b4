//! Execution of individual cases.

use super::config::{Case, CaseSpec, ConeSide, FieldPair, Schedule};
use super::{Check, Row};
use crate::anyon::{
    build_field_with, default_probes, rotation_rep, vacuum_image, verify_aux_commutation, verify_commutation,
    verify_spin_recurrence, AnyonSpec, CommutationReport, Route,
};
use crate::blip::{blip_at, blip_derivative, blip_grid, standard_mollifier};
use crate::cones::{
    cones_disjoint, fermi_field, fermi_pairs, measure_tensor_exchange, sampled_overlap, tensor_exchange, GeneralizedCone,
    TensorOp, TestFunctionSpace,
};
use crate::covering::{relative_winding, winding_number, CoveringInterval};
use crate::fock::slater::exchange_pairs_slater;
use crate::fock::{
    free_field, implementer_shift, implementer_shift_via_ec, second_quantize_diagonal, shift_vectors, vec_dist,
    ChargeShift, FockBasis, ProbePolicy,
};
use crate::modes::{hs_offdiag_norm_sq, multiplication_operator, ModeWindow, OneParticleOperator, PeriodicFunction};
use crate::schwinger::blip_schwinger;
use crate::{Result, C64, TAU};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

pub(super) struct Output {
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

struct Recorder {
    rows: Vec<Row>,
    checks: Vec<Check>,
    timing: bool,
    clock: Instant,
}

impl Recorder {
    fn new(timing: bool) -> Self {
        Self { rows: Vec::new(), checks: Vec::new(), timing, clock: Instant::now() }
    }

    fn row(&mut self, cutoff: usize, params: &[(&str, f64)], measured: C64, predicted: C64, abs_error: f64) {
        let elapsed_ms = if self.timing { self.clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        self.rows.push(Row {
            cutoff,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            measured,
            predicted,
            abs_error,
            elapsed_ms,
        });
        self.clock = Instant::now();
    }

    fn real_row(&mut self, cutoff: usize, params: &[(&str, f64)], measured: f64, predicted: f64) {
        self.row(cutoff, params, C64::new(measured, 0.0), C64::new(predicted, 0.0), (measured - predicted).abs());
    }

    /// Pass iff `value < tolerance`; the margin is `tolerance - value`.
    fn below(&mut self, claim: &str, value: f64, tolerance: f64, detail: String) {
        self.checks.push(Check { claim: claim.into(), passed: value < tolerance, margin: tolerance - value, detail });
    }

    fn check(&mut self, claim: &str, passed: bool, margin: f64, detail: String) {
        self.checks.push(Check { claim: claim.into(), passed, margin, detail });
    }

    fn schedule(&mut self, claim: &str, label: &str, cutoffs: &[usize], errors: &[f64], schedule: &Schedule) {
        let (passed, margin, detail) = judge_schedule(cutoffs, errors, schedule);
        self.check(claim, passed, margin, format!("{label}: {detail}"));
    }

    fn finish(self) -> Output {
        Output { rows: self.rows, checks: self.checks }
    }
}

/// Strict decrease over the cutoffs, and a final error within `factor` of the first.
/// Errors already below the floor are treated as converged.
pub fn judge_schedule(cutoffs: &[usize], errors: &[f64], schedule: &Schedule) -> (bool, f64, String) {
    let list = cutoffs.iter().zip(errors).map(|(m, e)| format!("M={m}: {e:.2e}")).collect::<Vec<_>>().join(", ");
    let n = errors.len();
    if n == 0 {
        return (false, f64::NEG_INFINITY, "no data".into());
    }
    if errors.iter().all(|&e| e < schedule.floor) {
        return (true, schedule.floor - errors.iter().copied().fold(0.0, f64::max), format!("converged ({list})"));
    }
    let rises: Vec<usize> =
        (1..n).filter(|&k| errors[k] >= errors[k - 1] && errors[k] >= schedule.floor).collect();
    let threshold = schedule.factor * errors[0];
    let last = errors[n - 1];
    let final_ok = n == 1 || last <= threshold || last < schedule.floor;
    let margin = if rises.is_empty() { threshold - last } else { -rises.iter().map(|&k| errors[k] - errors[k - 1]).fold(0.0, f64::max) };
    let mut detail = list;
    if !rises.is_empty() {
        detail += &format!("; rises at M={}", rises.iter().map(|&k| cutoffs[k].to_string()).collect::<Vec<_>>().join(","));
    }
    if !final_ok {
        detail += &format!("; final {last:.2e} above threshold {threshold:.2e}");
    }
    (rises.is_empty() && final_ok, margin, detail)
}

pub(super) fn run(case: &Case, seed: u64, timing: bool) -> Result<Output> {
    let mut rec = Recorder::new(timing);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match &case.spec {
        CaseSpec::Blip { epsilon, omega, cutoffs } => blip_case(&mut rec, *epsilon, *omega, cutoffs)?,
        CaseSpec::HsNorm { epsilon, cutoffs } => hs_case(&mut rec, *epsilon, cutoffs)?,
        CaseSpec::Schwinger { pairs, random, grid, cutoffs } => {
            let mut all = pairs.clone();
            all.extend((0..*random).map(|_| random_blip_pair(&mut rng)));
            schwinger_case(&mut rec, &all, *grid, cutoffs)?
        }
        CaseSpec::ImplementerCheck { cutoff, omegas } => implementer_case(&mut rec, *cutoff, omegas, &mut rng)?,
        CaseSpec::Commutation { fields, windings, cutoffs, schedule } => {
            commutation_case(&mut rec, fields, windings, cutoffs, schedule)?
        }
        CaseSpec::AuxCommutation { fields, cutoffs, schedule } => aux_case(&mut rec, fields, cutoffs, schedule)?,
        CaseSpec::SpinStatistics { spins, omega, epsilon, cutoff, charges } => {
            spin_case(&mut rec, spins, *omega, *epsilon, *cutoff, charges)?
        }
        CaseSpec::SpecialCases { epsilon, separation, cutoffs, schedule } => {
            special_case(&mut rec, *epsilon, *separation, cutoffs, schedule)?
        }
        CaseSpec::Cones { spin, epsilon, cones, windings, cutoffs, tail_tolerance, schedule, random_pairs } => {
            cones_case(&mut rec, *spin, *epsilon, cones, windings, cutoffs, *tail_tolerance, schedule)?;
            if *random_pairs > 0 {
                cone_oracle_case(&mut rec, *random_pairs, &mut rng)?;
            }
        }
        CaseSpec::Winding { pairs } => winding_case(&mut rec, *pairs, &mut rng)?,
    }
    Ok(rec.finish())
}

fn window(m: usize) -> Result<ModeWindow> {
    ModeWindow::new(m)
}

fn blip_case(rec: &mut Recorder, epsilon: f64, omega: f64, cutoffs: &[usize]) -> Result<()> {
    let chi = standard_mollifier(epsilon)?;
    let (mut worst, mut worst_d) = (0.0f64, 0.0f64);
    for &m in cutoffs {
        let w = window(m)?;
        let b = blip_at(&chi, omega, blip_grid(w))?;
        let err = (-(m as i64)..=m as i64)
            .map(|n| (b.function.coeff(n) - b.exact_coefficient(n)).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        let n = m as i64;
        rec.row(m, &[("epsilon", epsilon), ("omega", omega), ("n", n as f64)], b.function.coeff(n), b.exact_coefficient(n), err);
        let spectral = b.function.derivative();
        let closed = blip_derivative(&b)?;
        let d = spectral.samples().iter().zip(closed.samples()).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        worst_d = worst_d.max(d);
    }
    rec.below("blip-fourier", worst, 1e-9, format!("max coefficient error {worst:.2e}"));
    rec.below("blip-derivative", worst_d, 1e-6, format!("max derivative error {worst_d:.2e}"));
    Ok(())
}

fn sawtooth(grid: usize) -> Result<PeriodicFunction> {
    PeriodicFunction::from_coefficients(grid, |n| {
        if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, TAU.sqrt() / n as f64)
        }
    })
}

/// Least-squares slope of `y` against `ln M`.
fn log_slope(cutoffs: &[usize], y: &[f64]) -> f64 {
    let x: Vec<f64> = cutoffs.iter().map(|&m| (m as f64).ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn hs_case(rec: &mut Recorder, epsilon: f64, cutoffs: &[usize]) -> Result<()> {
    let chi = standard_mollifier(epsilon)?;
    let mut smooth = Vec::new();
    let mut raw = Vec::new();
    for &m in cutoffs {
        let w = window(m)?;
        let b = blip_at(&chi, 0.0, blip_grid(w))?;
        smooth.push(hs_offdiag_norm_sq(&multiplication_operator(&b.function, w)?));
        raw.push(hs_offdiag_norm_sq(&multiplication_operator(&sawtooth(8 * (m + 1))?, w)?));
    }
    let limit = *smooth.last().unwrap();
    // (1/pi) sum_{n <= M} 2 pi / n
    let harmonic: Vec<f64> = cutoffs.iter().map(|&m| (1..=m).map(|n| 2.0 / n as f64).sum()).collect();
    for (k, &m) in cutoffs.iter().enumerate() {
        rec.real_row(m, &[("series", 0.0), ("epsilon", epsilon)], smooth[k], limit);
        rec.real_row(m, &[("series", 1.0), ("epsilon", 0.0)], raw[k], harmonic[k]);
    }
    let diffs: Vec<f64> = smooth.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let ratios: Vec<f64> = diffs.windows(2).map(|w| w[0] / w[1]).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    rec.check(
        "hs-smooth",
        min_ratio >= 4.0,
        min_ratio - 4.0,
        format!(
            "successive differences [{}], shrink ratios {ratios:.1?}",
            diffs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    let (sm, so) = (log_slope(cutoffs, &raw), log_slope(cutoffs, &harmonic));
    let rel = (sm / so - 1.0).abs();
    rec.below("hs-sawtooth", rel, 0.05, format!("log-growth slope {sm:.4} vs harmonic oracle {so:.4}"));
    Ok(())
}

/// Admissible blip pair: both separations of the centers exceed `eps1 + eps2`.
pub fn random_blip_pair(rng: &mut impl Rng) -> [f64; 4] {
    loop {
        let (w1, w2) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        let (e1, e2) = (rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0));
        let sep = (w1 - w2).rem_euclid(TAU);
        if sep > e1 + e2 && sep < TAU - e1 - e2 {
            return [w1, w2, e1, e2];
        }
    }
}

fn schwinger_case(rec: &mut Recorder, pairs: &[[f64; 4]], grid: usize, cutoffs: &[usize]) -> Result<()> {
    let (mut worst_q, mut worst_t) = (0.0f64, 0.0f64);
    let mut bad_sequences = Vec::new();
    for (k, &[w1, w2, e1, e2]) in pairs.iter().enumerate() {
        let params = [("pair", k as f64), ("omega1", w1), ("omega2", w2), ("eps1", e1), ("eps2", e2)];
        let mut errors = Vec::new();
        for &m in cutoffs {
            let r = blip_schwinger(w1, w2, e1, e2, window(m)?, grid)?;
            let closed = r.closed_form_value.ok_or(crate::Error::SeparationViolation { separation: (w1 - w2).rem_euclid(TAU), width: e1 + e2 })?;
            if m == cutoffs[0] {
                let q = r.quadrature_vs_closed_form().unwrap();
                worst_q = worst_q.max(q);
                rec.real_row(0, &params, r.quadrature_value, closed);
            }
            let t = r.trace_vs_closed_form().unwrap();
            errors.push(t);
            rec.row(m, &params, r.trace_value, C64::new(closed, 0.0), t);
        }
        worst_t = worst_t.max(*errors.last().unwrap());
        let (ok, _, detail) = judge_schedule(cutoffs, &errors, &Schedule { factor: 1.0, floor: 1e-12 });
        if !ok {
            bad_sequences.push(format!("pair {k}: {detail}"));
        }
    }
    rec.below("schwinger-closed-form", worst_q, 1e-8, format!("quadrature vs closed form, grid {grid}: {worst_q:.2e}"));
    rec.below("schwinger-trace", worst_t, 1e-6, format!("trace route at M={}: {worst_t:.2e}", cutoffs.last().unwrap()));
    rec.check(
        "schwinger-trace-monotone",
        bad_sequences.is_empty(),
        if bad_sequences.is_empty() { 0.0 } else { -(bad_sequences.len() as f64) },
        if bad_sequences.is_empty() { format!("{} pairs decrease monotonically", pairs.len()) } else { bad_sequences.join(" | ") },
    );
    Ok(())
}

fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    z.qr().q()
}

/// The shift composed with random unitaries on the two modes either side of the Fermi level.
///
/// The minus-side unitary never touches the lowest mode, whose cokernel vector
/// the windowed index treats as a truncation artefact.
pub fn dressed_shift(w: ModeWindow, rng: &mut impl Rng) -> Result<OneParticleOperator> {
    let m = w.cutoff;
    let (kp, km) = (2.min(m + 1), 2.min(m.saturating_sub(1)));
    let mut u = DMatrix::identity(w.dim(), w.dim());
    if km > 0 {
        u.view_mut((m - km, m - km), (km, km)).copy_from(&random_unitary(km, rng));
    }
    u.view_mut((m, m), (kp, kp)).copy_from(&random_unitary(kp, rng));
    OneParticleOperator::new(w, u)?.mul(&OneParticleOperator::shift(w))
}

fn implementer_case(rec: &mut Recorder, cutoff: usize, omegas: &[f64], rng: &mut impl Rng) -> Result<()> {
    let w = window(cutoff)?;
    let basis = FockBasis::new(w)?;
    let shift = OneParticleOperator::shift(w);
    let g = implementer_shift(&shift, basis)?;
    let sv = shift_vectors(&shift)?;
    let target = free_field(basis, &sv.e_zero)?.apply_state(basis.vacuum());
    let image = g.apply_state(basis.vacuum());
    let residual = vec_dist(&image, &target);
    rec.row(cutoff, &[("check", 0.0)], crate::fock::inner(&target, &image), C64::new(1.0, 0.0), residual);
    rec.below("implementer-vacuum", residual, 1e-12, format!("|G(V) Omega - e_0| = {residual:.2e}"));

    let dressed = dressed_shift(w, rng)?;
    let mut grading_ok = true;
    for (name, v) in [("shift", &shift), ("dressed shift", &dressed)] {
        let op = implementer_shift(v, basis)?;
        let grade = op.charge_shift(1e-13);
        grading_ok &= grade == ChargeShift::Pure(1);
        if grade != ChargeShift::Pure(1) {
            log::warn!("{name}: grading {grade:?}");
        }
    }
    rec.check("implementer-charge", grading_ok, if grading_ok { 0.0 } else { -1.0 }, "full sector scan of every nonzero entry".into());

    let probes = ProbePolicy::edge_margin(cutoff, 1).with_charges(vec![-2, -1, 0, 1, 2]).build(basis)?;
    let mut worst_cov = 0.0f64;
    for &omega in omegas {
        let u = second_quantize_diagonal(&OneParticleOperator::rotation(w, omega), basis)?;
        let lhs = u.mul(&g)?.mul(&u.adjoint())?;
        let rhs = implementer_shift(&shift.scale(C64::from_polar(1.0, -omega)), basis)?;
        let d = probes.probes.iter().map(|&s| vec_dist(&lhs.apply_state(s), &rhs.apply_state(s))).fold(0.0, f64::max);
        worst_cov = worst_cov.max(d);
        rec.row(cutoff, &[("check", 1.0), ("omega", omega)], C64::new(d, 0.0), C64::new(0.0, 0.0), d);
    }
    rec.below("implementer-covariance", worst_cov, 1e-9, format!("{} truncation-safe probes", probes.probes.len()));

    let mut worst_route = 0.0f64;
    let candidates = [shift.clone(), crate::modes::rotate_one_particle(&shift, 0.7), dressed];
    for (k, v) in candidates.iter().enumerate() {
        let a = implementer_shift(v, basis)?;
        let (b, _) = implementer_shift_via_ec(v, basis)?;
        let d = (0..basis.dim() as u64).map(|s| vec_dist(&a.apply_state(s), &b.apply_state(s))).fold(0.0, f64::max);
        worst_route = worst_route.max(d);
        rec.row(cutoff, &[("check", 2.0), ("operator", k as f64)], C64::new(d, 0.0), C64::new(0.0, 0.0), d);
    }
    rec.below("implementer-routes", worst_route, 1e-8, format!("product form vs normal-ordered form, all {} basis vectors", basis.dim()));
    Ok(())
}

fn specs(f: &FieldPair, omega1: f64) -> Result<(AnyonSpec, AnyonSpec)> {
    let mut a = AnyonSpec::new(f.spin, omega1, f.epsilon)?;
    let mut b = AnyonSpec::new(f.spin, f.omega2, f.epsilon)?;
    if f.positive_lambda {
        a = a.with_positive_lambda();
        b = b.with_positive_lambda();
    }
    Ok((a, b))
}

/// `omega1` moved by whole turns so that `N = winding(omega1 - omega2)` takes the requested value.
fn wound_omega(omega1: f64, omega2: f64, n: i64) -> f64 {
    omega1 + TAU * (n - winding_number(omega1 - omega2)) as f64
}

fn commutation_sweep(f: &FieldPair, omega1: f64, cutoffs: &[usize]) -> Result<Vec<CommutationReport>> {
    let (a, b) = specs(f, omega1)?;
    cutoffs
        .iter()
        .map(|&m| {
            let w = window(m)?;
            verify_commutation(&a, &b, w, &default_probes(w)?, f.route, f.tail_tolerance)
        })
        .collect()
}

fn is_half(spin: f64) -> bool {
    (spin - 0.5).abs() < 1e-15
}

fn commutation_case(rec: &mut Recorder, f: &FieldPair, windings: &[i64], cutoffs: &[usize], schedule: &Schedule) -> Result<()> {
    let windings = if windings.is_empty() { vec![winding_number(f.omega1 - f.omega2)] } else { windings.to_vec() };
    let mut sweeps = Vec::new();
    for &n in &windings {
        let omega1 = wound_omega(f.omega1, f.omega2, n);
        let reports = commutation_sweep(f, omega1, cutoffs)?;
        for r in &reports {
            let p = [("spin", f.spin), ("omega1", omega1), ("omega2", f.omega2), ("N", n as f64)];
            rec.row(r.cutoff, &[&p[..], &[("pairing", 0.0)]].concat(), r.measured, r.predicted, r.error);
            rec.row(r.cutoff, &[&p[..], &[("pairing", 1.0)]].concat(), r.adjoint_measured, r.adjoint_predicted, r.adjoint_error);
        }
        let direct: Vec<f64> = reports.iter().map(|r| r.error).collect();
        let adjoint: Vec<f64> = reports.iter().map(|r| r.adjoint_error).collect();
        if is_half(f.spin) {
            let worst = direct.iter().chain(&adjoint).copied().fold(0.0, f64::max);
            rec.below("exchange-phase", worst, 1e-9, format!("s = 1/2, N = {n}: exact at every cutoff"));
        } else {
            rec.schedule("exchange-phase", &format!("N = {n}, direct"), cutoffs, &direct, schedule);
            rec.schedule("exchange-phase", &format!("N = {n}, adjoint"), cutoffs, &adjoint, schedule);
        }
        sweeps.push((n, reports));
    }
    let step = C64::from_polar(1.0, 2.0 * TAU * f.spin);
    for pair in sweeps.windows(2) {
        let ((n0, r0), (n1, r1)) = (&pair[0], &pair[1]);
        if n1 - n0 != 1 {
            continue;
        }
        let worst = r0
            .iter()
            .zip(r1)
            .map(|(a, b)| (b.measured - a.measured * step).norm().max((b.adjoint_measured - a.adjoint_measured * step.conj()).norm()))
            .fold(0.0, f64::max);
        rec.below("two-pi-shift", worst, 1e-9, format!("N = {n0} -> {n1}: phase ratio e^(4 pi i s) at every cutoff"));
    }
    Ok(())
}

fn aux_case(rec: &mut Recorder, f: &FieldPair, cutoffs: &[usize], schedule: &Schedule) -> Result<()> {
    let (a, b) = specs(f, f.omega1)?;
    let mut errors = Vec::new();
    let mut chain = 0.0f64;
    for &m in cutoffs {
        let w = window(m)?;
        let probes = default_probes(w)?;
        let aux = verify_aux_commutation(&a, &b, w, &probes, f.route, f.tail_tolerance)?;
        let direct = verify_commutation(&a, &b, w, &probes, f.route, f.tail_tolerance)?;
        let p = [("spin", f.spin), ("omega1", f.omega1), ("omega2", f.omega2)];
        rec.row(m, &[&p[..], &[("quantity", 0.0)]].concat(), aux.measured, aux.predicted, aux.error);
        let c = (aux.assembled - direct.measured).norm();
        rec.row(m, &[&p[..], &[("quantity", 1.0)]].concat(), aux.assembled, direct.measured, c);
        chain = chain.max(c);
        errors.push(aux.error);
    }
    if is_half(f.spin) {
        let worst = errors.iter().copied().fold(0.0, f64::max);
        rec.below("aux-exchange-phase", worst, 1e-9, "s = 1/2: exact at every cutoff".into());
    } else {
        rec.schedule("aux-exchange-phase", "undressed exchange", cutoffs, &errors, schedule);
    }
    rec.below("aux-dressing-chain", chain, 1e-9, format!("dressed assembly vs direct measurement: {chain:.2e}"));
    Ok(())
}

fn spin_case(rec: &mut Recorder, spins: &[f64], omega: f64, epsilon: f64, cutoff: usize, charges: &[i64]) -> Result<()> {
    let w = window(cutoff)?;
    let basis = FockBasis::new(w)?;
    let (mut worst_rec, mut worst_fit, mut worst_rep, mut worst_group) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let probes = ProbePolicy::central(2).with_charges(charges.to_vec()).build(basis)?;
    for &s in spins {
        let report = verify_spin_recurrence(&AnyonSpec::new(s, omega, epsilon)?, w, charges, f64::INFINITY)?;
        for (&(q, p), &(_, e)) in report.phases.iter().zip(&report.phase_errors) {
            let predicted = C64::from_polar(1.0, TAU * s * (2 * q + 1) as f64);
            rec.row(cutoff, &[("spin", s), ("q", q as f64)], p, predicted, e);
        }
        worst_rec = worst_rec.max(report.recurrence_error);
        // the second differences fix the quadratic coefficient modulo 1/2
        let coefficient = 2.0 * (report.fit_quadratic - s);
        worst_fit = worst_fit.max(report.fit_residual.max((coefficient - coefficient.round()).abs()));

        let u = rotation_rep(TAU, s, basis);
        for st in 0..basis.dim() as u64 {
            let q = basis.charge(st) as f64;
            let col = u.apply_state(st);
            let mut want = vec![C64::new(0.0, 0.0); basis.dim()];
            want[st as usize] = C64::from_polar(1.0, TAU * s * q * q);
            worst_rep = worst_rep.max(vec_dist(&col, &want));
        }
        let (a, b) = (0.9, -2.3);
        let ab = rotation_rep(a, s, basis).mul(&rotation_rep(b, s, basis))?;
        let sum = rotation_rep(a + b, s, basis);
        for &st in &probes.probes {
            worst_group = worst_group.max(vec_dist(&ab.apply_state(st), &sum.apply_state(st)));
        }
    }
    rec.below("spin-recurrence", worst_rec, 1e-8, format!("S_(q+2) - 2 S_(q+1) + S_q = 2s at M = {cutoff}"));
    rec.below("spin-quadratic", worst_fit, 1e-8, "fit S_q = s q^2 with S_0 = 0".into());
    rec.below("rotation-two-pi", worst_rep, 1e-12, format!("U(2 pi) on every sector, {} states", basis.dim()));
    rec.below("rotation-group-law", worst_group, 1e-10, "U(a) U(b) = U(a + b) on probes".into());
    Ok(())
}

fn special_case(rec: &mut Recorder, epsilon: f64, separation: f64, cutoffs: &[usize], schedule: &Schedule) -> Result<()> {
    let (mut worst_vac, mut worst_boson) = (0.0f64, 0.0f64);
    let omega = 0.8;
    for &m in cutoffs {
        let w = window(m)?;
        let basis = FockBasis::new(w)?;
        let field = build_field_with(&AnyonSpec::new(0.5, omega, epsilon)?, w, f64::INFINITY)?;
        let psi = vacuum_image(&field)?;
        let amp = psi.amplitude(basis, basis.state(&[0]));
        let want = C64::from_polar(1.0, omega / 2.0);
        let e = (amp - want).norm().max((psi.norm() - 1.0).abs());
        worst_vac = worst_vac.max(e);
        rec.row(m, &[("spin", 0.5), ("check", 0.0)], amp, want, e);
    }
    rec.below("special-case-half-vacuum", worst_vac, 1e-12, "Phi Omega = e^(i omega / 2) e_0".into());

    let half = FieldPair {
        spin: 0.5,
        omega1: separation,
        omega2: 0.0,
        epsilon,
        positive_lambda: false,
        route: Route::QuasiFree,
        tail_tolerance: f64::INFINITY,
    };
    for r in commutation_sweep(&half, separation, cutoffs)? {
        worst_boson = worst_boson.max(r.worst_error());
        rec.row(r.cutoff, &[("spin", 0.5), ("check", 1.0)], r.measured, r.predicted, r.error);
    }
    rec.below("special-case-half-boson", worst_boson, 1e-9, "s = 1/2 fields commute at every cutoff".into());

    let zero = FieldPair { spin: 0.0, ..half };
    let reports = commutation_sweep(&zero, separation, cutoffs)?;
    for r in &reports {
        rec.row(r.cutoff, &[("spin", 0.0), ("check", 2.0)], r.measured, r.predicted, r.error);
        rec.row(r.cutoff, &[("spin", 0.0), ("check", 3.0)], r.adjoint_measured, r.adjoint_predicted, r.adjoint_error);
    }
    let errors: Vec<f64> = reports.iter().map(|r| r.error).collect();
    rec.schedule("special-case-zero-fermion", "s = 0, direct pairing", cutoffs, &errors, schedule);
    Ok(())
}

fn cone(side: &ConeSide, center: f64, epsilon: f64) -> Result<GeneralizedCone> {
    GeneralizedCone::new(side.support.clone(), CoveringInterval::new(center, epsilon)?)
}

#[allow(clippy::too_many_arguments)]
fn cones_case(
    rec: &mut Recorder,
    spin: f64,
    epsilon: f64,
    sides: &[ConeSide; 2],
    windings: &[i64],
    cutoffs: &[usize],
    tail_tolerance: f64,
    schedule: &Schedule,
) -> Result<()> {
    let (c1, c2) = (sides[0].center, sides[1].center);
    let base = [cone(&sides[0], c1, epsilon)?, cone(&sides[1], c2, epsilon)?];
    let disjoint = cones_disjoint(&base[0], &base[1])?;
    rec.check("cones-disjoint", disjoint, if disjoint { 0.0 } else { -1.0 }, "the two cones are disjoint".into());
    if !disjoint {
        return Ok(());
    }
    let space = TestFunctionSpace::orthonormal_real(vec![sides[0].support.clone(), sides[1].support.clone()])?;
    let (psi1, psi2) = (fermi_field(0, &space), fermi_field(1, &space));
    let fermi = fermi_pairs(&psi1, &psi2);
    let fermi_adj = fermi_pairs(&psi1, &psi2.adjoint());
    let windings = if windings.is_empty() { vec![winding_number(c1 - c2)] } else { windings.to_vec() };
    let mut worst_sign = 0.0f64;
    let mut worst_direct = 0.0f64;
    for &n in &windings {
        let omega1 = wound_omega(c1, c2, n);
        let i1 = CoveringInterval::new(omega1, epsilon)?;
        let i2 = CoveringInterval::new(c2, epsilon)?;
        let winding = relative_winding(&i1, &i2)?;
        let predicted = C64::from_polar(1.0, TAU * spin * (2 * winding + 1) as f64);
        let (mut direct, mut adjoint) = (Vec::new(), Vec::new());
        for &m in cutoffs {
            let w = window(m)?;
            let probes = default_probes(w)?;
            let f1 = build_field_with(&AnyonSpec::new(spin, omega1, epsilon)?, w, tail_tolerance)?;
            let f2 = build_field_with(&AnyonSpec::new(spin, c2, epsilon)?, w, tail_tolerance)?;
            let (x, y) = (f1.slater()?, f2.slater()?);
            let circle = exchange_pairs_slater(&x, &y, &probes);
            let circle_adj = exchange_pairs_slater(&x, &y.adjoint(), &probes);
            let t = tensor_exchange(&fermi, &circle)?;
            let ta = tensor_exchange(&fermi_adj, &circle_adj)?;
            let alone = crate::fock::phase_from_pairs(&circle)?;
            let alone_adj = crate::fock::phase_from_pairs(&circle_adj)?;
            worst_sign = worst_sign.max((t.phase + alone.phase).norm()).max((ta.phase + alone_adj.phase).norm());
            if m == 4 {
                let basis = probes.basis;
                let (cx, cy) = (f1.fock(basis)?, f2.fock(basis)?);
                let full = measure_tensor_exchange(
                    &TensorOp { fermi: &psi1, circle: &cx },
                    &TensorOp { fermi: &psi2, circle: &cy },
                    &probes,
                    2,
                )?;
                worst_direct = worst_direct.max((full.phase - t.phase).norm());
            }
            let p = [("spin", spin), ("N", winding as f64)];
            let e = (t.phase - predicted).norm();
            let ea = (ta.phase - predicted.conj()).norm();
            rec.row(m, &[&p[..], &[("pairing", 0.0)]].concat(), t.phase, predicted, e);
            rec.row(m, &[&p[..], &[("pairing", 1.0)]].concat(), ta.phase, predicted.conj(), ea);
            direct.push(e);
            adjoint.push(ea);
        }
        if is_half(spin) {
            let worst = direct.iter().chain(&adjoint).copied().fold(0.0, f64::max);
            rec.below("cone-exchange-phase", worst, 1e-9, format!("s = 1/2, N = {winding}: exact at every cutoff"));
        } else {
            rec.schedule("cone-exchange-phase", &format!("N = {winding}, direct"), cutoffs, &direct, schedule);
            rec.schedule("cone-exchange-phase", &format!("N = {winding}, adjoint"), cutoffs, &adjoint, schedule);
        }
    }
    rec.below("cone-tensor-sign", worst_sign, 1e-9, "tensor phase = -(circle phase)".into());
    if cutoffs.contains(&4) {
        rec.below("cone-dense-tensor", worst_direct, 1e-9, "full tensor space at M = 4 vs factorized".into());
    }
    Ok(())
}

fn random_cone(rng: &mut impl Rng) -> Result<GeneralizedCone> {
    let c = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
    let support = (0..3).map(|_| [c[0] + rng.gen_range(-1.0..1.0), c[1] + rng.gen_range(-1.0..1.0)]).collect();
    GeneralizedCone::new(support, CoveringInterval::new(rng.gen_range(-PI..PI), rng.gen_range(0.1..1.2))?)
}

fn cone_oracle_case(rec: &mut Recorder, pairs: usize, rng: &mut impl Rng) -> Result<()> {
    let mut disagreements = 0;
    for k in 0..pairs {
        let (a, b) = (random_cone(rng)?, random_cone(rng)?);
        let lp = cones_disjoint(&a, &b)?;
        let sampled = !(sampled_overlap(&a, &b, 400.0) || sampled_overlap(&b, &a, 400.0));
        if lp != sampled {
            disagreements += 1;
        }
        rec.real_row(0, &[("pair", k as f64)], lp as u8 as f64, sampled as u8 as f64);
    }
    rec.check(
        "cones-lp-oracle",
        disagreements == 0,
        0.0 - disagreements as f64,
        format!("{disagreements} disagreements in {pairs} random pairs"),
    );
    Ok(())
}

fn random_disjoint_intervals(rng: &mut impl Rng) -> Result<(CoveringInterval, CoveringInterval)> {
    loop {
        let a = CoveringInterval::new(rng.gen_range(-20.0..20.0), rng.gen_range(0.05..1.5))?;
        let b = CoveringInterval::new(rng.gen_range(-20.0..20.0), rng.gen_range(0.05..1.5))?;
        if crate::covering::projections_disjoint(&a, &b) {
            return Ok((a, b));
        }
    }
}

fn winding_case(rec: &mut Recorder, pairs: usize, rng: &mut impl Rng) -> Result<()> {
    let mut failures = 0;
    for _ in 0..pairs {
        let (a, b) = random_disjoint_intervals(rng)?;
        let k = rng.gen_range(-5i64..=5);
        let n = relative_winding(&a, &b)?;
        let swapped = relative_winding(&b, &a)?;
        let wound = relative_winding(&a.wound(k), &b)?;
        if swapped != -n - 1 || wound != n + k {
            failures += 1;
        }
    }
    rec.real_row(0, &[("pairs", pairs as f64)], failures as f64, 0.0);
    rec.check("winding-algebra", failures == 0, 0.0 - failures as f64, format!("{failures} failures in {pairs} pairs"));
    Ok(())
}
