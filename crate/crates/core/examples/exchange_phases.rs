//! Exchange phase of two anyon fields as the window grows.
use anyon_circle::anyon::{default_probes, verify_commutation, AnyonSpec, Route};
use anyon_circle::modes::ModeWindow;
use std::time::Instant;

fn main() -> anyon_circle::Result<()> {
    let eps = 1.0;
    for s in [0.5, 0.0, 0.25, -0.5] {
        for n in [-1i64, 0, 1] {
            let w1 = 2.3 + std::f64::consts::TAU * n as f64;
            let a = AnyonSpec::new(s, w1, eps)?;
            let b = AnyonSpec::new(s, 0.0, eps)?;
            for m in [4usize, 6, 8, 10] {
                let w = ModeWindow::new(m)?;
                let probes = default_probes(w)?;
                let t = Instant::now();
                let r = verify_commutation(&a, &b, w, &probes, Route::QuasiFree, f64::INFINITY)?;
                println!(
                    "s={s:5} N={n:2} M={m:2}  measured={:.6}  predicted={:.6}  err={:.3e}  adj_err={:.3e}  ({:.0} ms)",
                    r.measured, r.predicted, r.error, r.adjoint_error, t.elapsed().as_secs_f64() * 1e3
                );
            }
        }
    }
    Ok(())
}
