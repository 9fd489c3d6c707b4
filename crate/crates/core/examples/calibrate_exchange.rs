//! Dense-Fock calibration of exchange-phase errors at M = 4.
//!
//! Prints the JSON fixture read by the acceptance suite: for each spin and
//! separation the M = 4 errors of both pairings and the thresholds they imply
//! for the largest cutoff.
use anyon_circle::anyon::{default_probes, verify_commutation, AnyonSpec, Route};
use anyon_circle::modes::ModeWindow;
use serde_json::json;

fn main() -> anyon_circle::Result<()> {
    let (epsilon, omega2, factor) = (1.0, 0.0, 0.1);
    let window = ModeWindow::new(4)?;
    let probes = default_probes(window)?;
    let mut cases = Vec::new();
    for spin in [0.0, 0.25, -0.5] {
        for separation in [2.3, -2.3] {
            let a = AnyonSpec::new(spin, omega2 + separation, epsilon)?;
            let b = AnyonSpec::new(spin, omega2, epsilon)?;
            let r = verify_commutation(&a, &b, window, &probes, Route::Fock, f64::INFINITY)?;
            cases.push(json!({
                "spin": spin,
                "separation": separation,
                "direct_m4": r.error,
                "adjoint_m4": r.adjoint_error,
                "direct_threshold": factor * r.error,
                "adjoint_threshold": factor * r.adjoint_error,
            }));
        }
    }
    let fixture = json!({
        "epsilon": epsilon,
        "omega2": omega2,
        "cutoffs": [4, 6, 8, 10],
        "threshold_factor": factor,
        "cases": cases,
    });
    println!("{}", serde_json::to_string_pretty(&fixture).unwrap());
    Ok(())
}
