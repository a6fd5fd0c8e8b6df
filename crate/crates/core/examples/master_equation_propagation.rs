//! Integrates the reconstructed time-local master equation from a new
//! initial state and compares against the exact reduced dynamics.

use liouville::liouvillian::{propagate, reconstruct_series};
use liouville::models::{fock_state, jc_model, jc_process_trajectory, JaynesCummingsParams};
use liouville::quantum::{c64, evolve, kron, partial_trace, DensityMatrix, StateVector, Subsystem};

fn main() -> liouville::Result<()> {
    let params = JaynesCummingsParams::resonant(1.0, 1);
    // Stays below the first singular time t ≈ 0.65.
    let times: Vec<f64> = (0..=500).map(|i| i as f64 * 1e-3).collect();
    let gs = reconstruct_series(&jc_process_trajectory(&params, &times)?)?;

    let psi = StateVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
    let rho0 = DensityMatrix::from_pure(&psi)?;
    let states = propagate(&gs, &rho0)?;

    let model = jc_model(&params)?;
    let field = fock_state(params.field_dim(), params.fock_m)?;
    let joint = DensityMatrix::new(kron(rho0.matrix(), field.matrix()))?;
    for k in (0..times.len()).step_by(100) {
        let exact = partial_trace(
            &evolve(&model, &joint, times[k])?,
            2,
            params.field_dim(),
            Subsystem::System,
        )?;
        println!(
            "t = {:.1}: excited population {:.6}, trace distance to exact {:.2e}",
            times[k],
            states[k].population(1),
            states[k].trace_distance(&exact)
        );
    }
    Ok(())
}
