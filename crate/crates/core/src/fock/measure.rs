//! Exchange-phase measurement: compare `<w, XY v>` with `<w, YX v>` over probe states.

use super::{FockBasis, FockMap, State};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Which basis states serve as probes `v` and read-out targets `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbePolicy {
    /// Lowest and highest mode a probe may occupy.
    pub band: (i64, i64),
    pub charges: Vec<i64>,
    pub cap: usize,
}

impl ProbePolicy {
    /// All modes at distance at least `margin` from the window edge.
    pub fn edge_margin(cutoff: usize, margin: usize) -> Self {
        let m = cutoff as i64 - margin as i64;
        Self { band: (-m, m), charges: vec![-1, 0, 1], cap: 64 }
    }

    /// The `2 * half_width` modes around the Fermi level, `-half_width..half_width`.
    pub fn central(half_width: usize) -> Self {
        let h = half_width as i64;
        Self { band: (-h, h - 1), charges: vec![-1, 0, 1], cap: 64 }
    }

    pub fn with_charges(mut self, charges: Vec<i64>) -> Self {
        self.charges = charges;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn band_mask(&self, basis: FockBasis) -> Result<State> {
        let (lo, hi) = self.band;
        let w = basis.window;
        if lo > hi || !w.contains(lo) || !w.contains(hi) {
            return Err(Error::Invalid(format!("probe band {lo}..={hi} does not fit window {}", w.cutoff)));
        }
        Ok((lo..=hi).fold(0, |m, n| m | 1 << basis.bit(n)))
    }

    pub fn build(&self, basis: FockBasis) -> Result<ProbeSet> {
        let mask = self.band_mask(basis)?;
        let mut inside = in_band(basis, mask);
        inside.sort_by_key(|&s| (s.count_ones(), s));
        let probes: Vec<State> = inside
            .iter()
            .copied()
            .filter(|&s| self.charges.contains(&basis.charge(s)))
            .take(self.cap)
            .collect();
        Ok(ProbeSet { basis, mask, probes })
    }
}

fn in_band(basis: FockBasis, mask: State) -> Vec<State> {
    // enumerate submasks of the band
    let mut out = Vec::new();
    let mut sub = mask;
    loop {
        out.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    let _ = basis;
    out
}

#[derive(Clone, Debug)]
pub struct ProbeSet {
    pub basis: FockBasis,
    mask: State,
    pub probes: Vec<State>,
}

impl ProbeSet {
    /// Read-out states of charge `q` supported in the band.
    pub fn targets(&self, q: i64) -> Vec<State> {
        let mut t: Vec<State> = in_band(self.basis, self.mask).into_iter().filter(|&s| self.basis.charge(s) == q).collect();
        t.sort_by_key(|&s| (s.count_ones(), s));
        t
    }

    pub fn band_states(&self) -> Vec<State> {
        in_band(self.basis, self.mask)
    }

    pub fn by_charge(&self, q: i64) -> Vec<State> {
        self.probes.iter().copied().filter(|&s| self.basis.charge(s) == q).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeMeasurement {
    /// Unit-modulus phase `p` with `XY ~ p YX`.
    pub phase: C64,
    /// `max |r - p|` over the significant ratios `r`.
    pub max_deviation: f64,
    /// Median of `|r - p|`.
    pub median_deviation: f64,
    pub significant: usize,
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub const ABS_FLOOR: f64 = 1e-10;
pub const REL_FLOOR: f64 = 1e-2;

/// Median phase of `num / den` over pairs whose denominator clears
/// `max(ABS_FLOOR, REL_FLOOR * max |den|)`.
pub fn phase_from_pairs(pairs: &[(C64, C64)]) -> Result<ExchangeMeasurement> {
    let dmax = pairs.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    let floor = ABS_FLOOR.max(REL_FLOOR * dmax);
    let ratios: Vec<C64> = pairs.iter().filter(|p| p.1.norm() > floor).map(|p| p.0 / p.1).collect();
    if ratios.is_empty() {
        return Err(Error::NoSignificantEntries);
    }
    let mean: C64 = ratios.iter().map(|r| r / r.norm().max(1e-300)).sum();
    let reference = if mean.norm() > 1e-12 { mean.arg() } else { ratios[0].arg() };
    let offset = median(ratios.iter().map(|r| wrap(r.arg() - reference)).collect());
    let phase = C64::from_polar(1.0, reference + offset);
    let devs: Vec<f64> = ratios.iter().map(|r| (r - phase).norm()).collect();
    Ok(ExchangeMeasurement {
        phase,
        max_deviation: devs.iter().copied().fold(0.0, f64::max),
        median_deviation: median(devs.clone()),
        significant: ratios.len(),
    })
}

/// Phase `p` with `XY = p YX` read off on the probe set.
///
/// `shift` is the combined charge shift of `XY`; targets are band states in sector `q + shift`.
pub fn measure_exchange_phase(x: &dyn FockMap, y: &dyn FockMap, probes: &ProbeSet, shift: i64) -> Result<ExchangeMeasurement> {
    let basis = probes.basis;
    let mut pairs = Vec::new();
    for &s in &probes.probes {
        let v = basis.basis_vector(s);
        let xy = x.apply(&y.apply(&v)?)?;
        let yx = y.apply(&x.apply(&v)?)?;
        for t in probes.targets(basis.charge(s) + shift) {
            pairs.push((xy[t as usize], yx[t as usize]));
        }
    }
    phase_from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{implementer_shift, FockOperator};
    use crate::modes::{rotate_one_particle, ModeWindow, OneParticleOperator};

    fn basis(m: usize) -> FockBasis {
        FockBasis::new(ModeWindow::new(m).unwrap()).unwrap()
    }

    #[test]
    fn policies() {
        let fb = basis(4);
        let p = ProbePolicy::edge_margin(4, 2).build(fb).unwrap();
        assert!(p.probes.iter().all(|&s| fb.occupied_modes(s).iter().all(|n| n.abs() <= 2)));
        assert_eq!(p.probes[0], 0);
        assert!(p.probes.len() <= 64);
        let c = ProbePolicy::central(2).build(fb).unwrap();
        assert!(c.probes.iter().all(|&s| fb.occupied_modes(s).iter().all(|&n| (-2..=1).contains(&n))));
        assert_eq!(c.band_states().len(), 16);
        assert!(ProbePolicy::central(5).build(fb).is_err());
    }

    #[test]
    fn deterministic_order() {
        let fb = basis(4);
        let a = ProbePolicy::edge_margin(4, 1).build(fb).unwrap();
        let b = ProbePolicy::edge_margin(4, 1).build(fb).unwrap();
        assert_eq!(a.probes, b.probes);
        assert!(a.probes.windows(2).all(|w| (w[0].count_ones(), w[0]) < (w[1].count_ones(), w[1])));
    }

    #[test]
    fn same_operator_has_trivial_phase() {
        let fb = basis(3);
        let g = implementer_shift(&OneParticleOperator::shift(fb.window), fb).unwrap();
        let p = ProbePolicy::edge_margin(3, 1).build(fb).unwrap();
        let m = measure_exchange_phase(&g, &g, &p, 2).unwrap();
        assert!((m.phase - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(m.max_deviation < 1e-14);
    }

    #[test]
    fn shift_exchange_phase() {
        let fb = basis(4);
        let v = OneParticleOperator::shift(fb.window);
        let (w1, w2) = (1.1, -0.4);
        let g1 = implementer_shift(&rotate_one_particle(&v, w1), fb).unwrap();
        let g2 = implementer_shift(&rotate_one_particle(&v, w2), fb).unwrap();
        let p = ProbePolicy::edge_margin(4, 2).build(fb).unwrap();
        let m = measure_exchange_phase(&g1, &g2, &p, 2).unwrap();
        assert!((m.phase - C64::from_polar(1.0, -(w1 - w2))).norm() < 1e-12, "{}", m.phase);
    }

    #[test]
    fn no_significant_entries() {
        let fb = basis(2);
        let z = FockOperator::zero(fb);
        let p = ProbePolicy::edge_margin(2, 0).build(fb).unwrap();
        assert_eq!(measure_exchange_phase(&z, &z, &p, 0), Err(Error::NoSignificantEntries));
    }

    #[test]
    fn median_resists_outliers() {
        let good = C64::from_polar(1.0, 2.0);
        let mut pairs: Vec<(C64, C64)> = (0..9).map(|k| (good * (1.0 + 0.1 * k as f64), C64::new(1.0 + 0.1 * k as f64, 0.0))).collect();
        pairs.push((C64::new(-1.0, 0.0), C64::new(1.0, 0.0)));
        pairs.push((C64::new(5.0, 0.0), C64::new(1e-12, 0.0)));
        let m = phase_from_pairs(&pairs).unwrap();
        assert!((m.phase - good).norm() < 1e-12);
        assert_eq!(m.significant, 10);
    }

    #[test]
    fn wrap_range() {
        for x in [-10.0, -PI, 0.0, PI, 7.0] {
            let y = wrap(x);
            assert!(y > -PI && y <= PI);
            assert!(((x - y) / (2.0 * PI)).fract().abs() < 1e-12 || ((x - y) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
    }
}
