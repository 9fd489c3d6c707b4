//! Tensor fields on two generalized cones, with the algebra of each cone generated
//! from a fixed finite list of test-function supports.
//!
//! A support `O` contributes to the cone `(S, I)` when `O + R_+ n_I` lies inside
//! `S + R_+ n_I`; with equal direction intervals that holds iff every vertex of `O`
//! lies in the cone. Every contributing pair across the two cones must then show
//! the same exchange phase.
use anyon_circle::anyon::{build_field_with, default_probes, AnyonSpec};
use anyon_circle::cones::{
    cones_disjoint, fermi_field, fermi_pairs, tensor_exchange, GeneralizedCone, Motion, Point, TestFunctionSpace,
};
use anyon_circle::covering::{relative_winding, CoveringInterval};
use anyon_circle::fock::slater::exchange_pairs_slater;
use anyon_circle::modes::ModeWindow;
use anyon_circle::{C64, TAU};

fn tri(cx: f64, cy: f64) -> Vec<Point> {
    vec![[cx - 0.4, cy - 0.3], [cx + 0.4, cy - 0.3], [cx, cy + 0.4]]
}

fn main() -> anyon_circle::Result<()> {
    let (spin, eps) = (0.25, 1.0);
    let (center_a, center_b) = (2.3, 0.0);
    let cone_a = GeneralizedCone::new(vec![[7.0, -7.0], [8.0, -7.0], [7.5, -6.0]], CoveringInterval::new(center_a, eps)?)?;
    let cone_b = GeneralizedCone::new(vec![[-0.5, 9.5], [0.5, 9.5], [0.0, 10.5]], CoveringInterval::new(center_b, eps)?)?;
    println!("cones disjoint: {}", cones_disjoint(&cone_a, &cone_b)?);

    let o_list = vec![tri(9.0, -6.5), tri(12.0, -8.0), tri(0.0, 12.0), tri(1.0, 15.0), tri(3.0, 3.0)];
    let inside = |cone: &GeneralizedCone| -> Vec<usize> {
        (0..o_list.len()).filter(|&k| o_list[k].iter().all(|&v| cone.contains(v))).collect()
    };
    let (in_a, in_b) = (inside(&cone_a), inside(&cone_b));
    println!("supports generating the cone A algebra: {in_a:?}, cone B: {in_b:?}");

    let space = TestFunctionSpace::orthonormal_real(o_list.clone())?;
    let w = ModeWindow::new(6)?;
    let probes = default_probes(w)?;
    let phi_b = build_field_with(&AnyonSpec::new(spin, center_b, eps)?, w, f64::INFINITY)?.slater()?;
    for k in [0i64, 1] {
        let omega_a = center_a + TAU * k as f64;
        let i_a = CoveringInterval::new(omega_a, eps)?;
        let n = relative_winding(&i_a, &CoveringInterval::new(center_b, eps)?)?;
        let predicted = C64::from_polar(1.0, TAU * spin * (2 * n + 1) as f64);
        let phi_a = build_field_with(&AnyonSpec::new(spin, omega_a, eps)?, w, f64::INFINITY)?.slater()?;
        let circle = exchange_pairs_slater(&phi_a, &phi_b, &probes);
        println!("\nwinding N = {n}, predicted {predicted:.6}");
        for &i in &in_a {
            for &j in &in_b {
                let fermi = fermi_pairs(&fermi_field(i, &space), &fermi_field(j, &space));
                let t = tensor_exchange(&fermi, &circle)?;
                println!("  F[f{i}] F[f{j}]: phase {:.6}  error {:.2e}", t.phase, (t.phase - predicted).norm());
            }
        }
    }

    let turn = Motion::new([0.0, 0.0], TAU);
    let turned = cone_a.transformed(&turn);
    println!(
        "\nfull turn: interval centre {:.4} -> {:.4}, support unchanged: {}",
        cone_a.directions.center.omega,
        turned.directions.center.omega,
        turned.support.iter().zip(&cone_a.support).all(|(p, q)| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12)
    );
    Ok(())
}
