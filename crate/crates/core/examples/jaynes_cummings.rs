//! An atom exchanging a photon with a single cavity mode in a Fock state.
//! The reconstructed generator is compared with the closed-form rates, and
//! the times where the dynamical map stops being invertible are reported.

use liouville::liouvillian::{lindblad_fit_two_level, reconstruct_series, Quality};
use liouville::models::{
    jc_determinant, jc_gammas_analytic, jc_process_trajectory, JaynesCummingsParams,
};

fn main() -> liouville::Result<()> {
    let params = JaynesCummingsParams::resonant(1.0, 1);
    let times: Vec<f64> = (0..=1300).map(|i| i as f64 * 1e-3).collect();
    let ds = jc_process_trajectory(&params, &times)?;
    let gs = reconstruct_series(&ds)?;

    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "t", "det D", "gamma1", "exact", "gamma3", "exact"
    );
    for k in (0..times.len()).step_by(100) {
        let t = times[k];
        let det = jc_determinant(&params, t);
        match (gs[k].quality(), jc_gammas_analytic(&params, t)) {
            (Quality::Ok, Ok(exact)) => {
                let fit = lindblad_fit_two_level(&gs[k])?;
                println!(
                    "{t:>5.2} {det:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
                    fit.gamma1, exact.gamma1, fit.gamma3, exact.gamma3
                );
            }
            _ => println!("{t:>5.2} {det:>10.5}   singular"),
        }
    }

    // det D changes sign where cos(2t) + cos(2√2 t) vanishes; the rates
    // diverge there and no time-local generator exists.
    for w in ds.windows(2) {
        if (w[0].determinant().re > 0.0) != (w[1].determinant().re > 0.0) {
            println!(
                "det D changes sign between t = {} and {}",
                w[0].t(),
                w[1].t()
            );
        }
    }
    Ok(())
}
