//! The implementer of the one-step shift: vacuum image, charge grading, and the two constructions.
use anyon_circle::fock::{implementer_shift, implementer_shift_via_ec, inner, vec_dist, FockBasis};
use anyon_circle::modes::{fredholm_index, ModeWindow, OneParticleOperator};

fn main() -> anyon_circle::Result<()> {
    let w = ModeWindow::new(3)?;
    let basis = FockBasis::new(w)?;
    let shift = OneParticleOperator::shift(w);
    println!("Fredholm index of the shift: {}", fredholm_index(&shift)?);

    let g = implementer_shift(&shift, basis)?;
    let image = g.apply_state(basis.vacuum());
    let e0 = basis.basis_vector(basis.state(&[0]));
    println!("<e_0, G(V) Omega> = {:.12}", inner(&e0, &image));
    println!("charge shift: {:?}", g.charge_shift(1e-13));

    let (via_ec, phase) = implementer_shift_via_ec(&shift, basis)?;
    let worst = (0..basis.dim() as u64).map(|s| vec_dist(&g.apply_state(s), &via_ec.apply_state(s))).fold(0.0, f64::max);
    println!("normal-ordered construction (phase {phase:.6}) differs by at most {worst:.2e}");

    for s in [basis.state(&[-1]), basis.state(&[1]), basis.state(&[-2, 2])] {
        let out = g.apply_state(s);
        let (t, z) = out.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
        println!(
            "G(V) {:?} = {:.4} {:?}",
            basis.occupied_modes(s),
            z,
            basis.occupied_modes(t as u64)
        );
    }
    Ok(())
}
