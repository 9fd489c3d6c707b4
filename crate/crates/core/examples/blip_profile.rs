//! The mollified sawtooth: pointwise profile and spectral accuracy of its coefficients.
use anyon_circle::blip::{blip_at, blip_value, standard_mollifier};
use std::f64::consts::PI;

fn main() -> anyon_circle::Result<()> {
    let chi = standard_mollifier(0.5)?;
    println!("alpha^eps for eps = 0.5 (linear outside the bump around 0):");
    for k in 0..=12 {
        let x = -0.6 + 1.2 * k as f64 / 12.0;
        println!("  x = {x:>6.3}  alpha = {:>8.4}", blip_value(&chi, x));
    }
    println!("  x = {:>6.3}  alpha = {:>8.4}", PI, blip_value(&chi, PI));

    println!("\ncoefficient error against the exact transform, by grid size:");
    for grid in [256usize, 1024, 4096] {
        let b = blip_at(&chi, 1.0, grid)?;
        let err = (-20i64..=20).map(|n| (b.function.coeff(n) - b.exact_coefficient(n)).norm()).fold(0.0, f64::max);
        println!("  grid {grid:>5}: max |n| <= 20 error {err:.2e}");
    }
    Ok(())
}
