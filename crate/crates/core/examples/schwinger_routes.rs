//! The Schwinger term of two blips three ways: grid quadrature, windowed trace, closed form.
use anyon_circle::modes::ModeWindow;
use anyon_circle::schwinger::blip_schwinger;

fn main() -> anyon_circle::Result<()> {
    let (omega1, omega2, eps1, eps2) = (2.0, 0.3, 0.4, 0.6);
    for m in [8usize, 16, 32, 64] {
        let r = blip_schwinger(omega1, omega2, eps1, eps2, ModeWindow::new(m)?, 4096)?;
        println!(
            "M = {m:>2}: trace {:+.10}  quadrature {:+.10}  closed form {:+.10}  |trace - closed| {:.2e}",
            r.trace_value.re,
            r.quadrature_value,
            r.closed_form_value.unwrap(),
            r.trace_vs_closed_form().unwrap()
        );
    }
    match blip_schwinger(0.5, 0.3, 0.4, 0.6, ModeWindow::new(8)?, 4096) {
        Ok(r) => println!("overlapping blips have no closed form: {:?}", r.closed_form_value),
        Err(e) => println!("overlapping blips: {e}"),
    }
    Ok(())
}
