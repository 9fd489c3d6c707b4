//! Points and intervals on the covering line, and the relative winding number.
use anyon_circle::covering::{project, relative_winding, CoveringInterval};
use std::f64::consts::TAU;

fn main() -> anyon_circle::Result<()> {
    for omega in [0.3, TAU + 0.3, -0.3, -4.0 * TAU] {
        let (hat, n) = project(omega);
        println!("omega = {omega:>9.4}  ->  hat = {hat:.4}, winding = {n}");
    }

    let base = CoveringInterval::new(0.0, 0.5)?;
    println!("\nN(I1 + 2 pi k, I2) for I1 centred at 2.3 and I2 at 0, both of half-width 0.5:");
    for k in -2..=2 {
        let moved = CoveringInterval::new(2.3, 0.5)?.wound(k);
        let n = relative_winding(&moved, &base)?;
        let back = relative_winding(&base, &moved)?;
        println!("  k = {k:>2}: N(I1, I2) = {n:>2}, N(I2, I1) = {back:>2}");
    }

    let overlapping = CoveringInterval::new(0.8, 0.5)?;
    match relative_winding(&overlapping, &base) {
        Ok(n) => println!("unexpected winding {n}"),
        Err(e) => println!("\noverlapping projections: {e}"),
    }
    Ok(())
}
