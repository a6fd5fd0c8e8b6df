//! Process tomography of a qutrit coupled to a qubit environment: simulate
//! the nine output trajectories, assemble D, and check that it is a valid
//! channel.

use liouville::quantum::{c64, kron, ComplexMatrix, DensityMatrix, HamiltonianModel};
use liouville::tomography::{
    apply_process, build_m, d_from_composite, d_from_tomograms, simulate_tomograms,
    validate_process,
};

fn main() -> liouville::Result<()> {
    // Exchange coupling |2⟩|0⟩ ↔ |0⟩|1⟩ plus a level splitting on the qutrit.
    let mut h = ComplexMatrix::zeros(6, 6);
    h[(4, 1)] = c64(0.7, 0.0);
    h[(1, 4)] = c64(0.7, 0.0);
    let splitting = ComplexMatrix::from_fn(3, 3, |i, j| {
        c64(if i == j { 0.3 * i as f64 } else { 0.0 }, 0.0)
    });
    h += kron(&splitting, &ComplexMatrix::identity(2, 2));
    let model = HamiltonianModel::new(3, 2, h)?;
    let rho_e = DensityMatrix::basis(2, 0);

    let times = [0.0, 0.5, 1.0, 2.0];
    let series = simulate_tomograms(&model, &rho_e, &times)?;
    let m = build_m(3)?;
    for k in 0..times.len() {
        let d = d_from_tomograms(&series, &m, k)?;
        let direct = d_from_composite(&model, &rho_e, times[k])?;
        let diff = (d.matrix() - direct.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        println!(
            "t = {}: tomograms vs direct {diff:.1e}, condition {:.2}",
            times[k],
            d.condition_number()
        );
        print!("{}", validate_process(&d));
    }

    let d = d_from_tomograms(&series, &m, 3)?;
    let out = apply_process(&d, &DensityMatrix::maximally_mixed(3))?;
    println!(
        "image of the maximally mixed state, populations: {:.4} {:.4} {:.4}",
        out.population(0),
        out.population(1),
        out.population(2)
    );
    Ok(())
}
