//! Off-diagonal Hilbert-Schmidt norms: bounded for the smooth blip, logarithmic for the sawtooth.
use anyon_circle::blip::{blip_at, blip_grid, standard_mollifier};
use anyon_circle::modes::{hs_offdiag_norm_sq, multiplication_operator, ModeWindow, PeriodicFunction};
use anyon_circle::{C64, TAU};

fn main() -> anyon_circle::Result<()> {
    let chi = standard_mollifier(0.5)?;
    println!("{:>4} {:>14} {:>14} {:>14}", "M", "smooth", "sawtooth", "2 H_M");
    for m in [8usize, 16, 32, 64, 128] {
        let w = ModeWindow::new(m)?;
        let smooth = hs_offdiag_norm_sq(&multiplication_operator(&blip_at(&chi, 0.0, blip_grid(w))?.function, w)?);
        let saw = PeriodicFunction::from_coefficients(8 * (m + 1), |n| {
            if n == 0 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, TAU.sqrt() / n as f64)
            }
        })?;
        let raw = hs_offdiag_norm_sq(&multiplication_operator(&saw, w)?);
        let harmonic: f64 = (1..=m).map(|n| 2.0 / n as f64).sum();
        println!("{m:>4} {smooth:>14.8} {raw:>14.6} {harmonic:>14.6}");
    }
    Ok(())
}
