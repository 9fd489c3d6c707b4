//! Sector phases of the rotation by 2 pi acting on an anyon field.
//!
//! The phases only fix `S_q` modulo integers, so the fitted coefficients can
//! differ from `s q^2` by an integer-valued quadratic.
use anyon_circle::anyon::{verify_spin_recurrence, AnyonSpec};
use anyon_circle::modes::ModeWindow;

fn main() -> anyon_circle::Result<()> {
    let w = ModeWindow::new(5)?;
    for s in [0.0, 0.25, -0.5, 0.5] {
        let r = verify_spin_recurrence(&AnyonSpec::new(s, 0.4, 1.0)?, w, &[-2, -1, 0, 1], f64::INFINITY)?;
        println!("s = {s:>5}:");
        for (q, p) in &r.phases {
            println!("  H_{q:<2} phase {:+.6}{:+.6}i  (arg / 2 pi = {:+.4})", p.re, p.im, p.arg() / std::f64::consts::TAU);
        }
        println!(
            "  second differences {:?}, recurrence error {:.1e}, fit S_q = {:.4} q^2 + {:.4} q",
            r.second_differences.iter().map(|d| (d.1 * 1e6).round() / 1e6).collect::<Vec<_>>(),
            r.recurrence_error,
            r.fit_quadratic,
            r.fit_linear
        );
    }
    Ok(())
}
