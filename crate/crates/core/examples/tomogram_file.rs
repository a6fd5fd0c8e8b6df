//! Writes decay tomograms to the JSON exchange format, reads them back with
//! full validation and reconstructs the generator from the file.

use liouville::cli::{export_tomograms, ingest_tomograms};
use liouville::liouvillian::{lindblad_fit_two_level, reconstruct_series};
use liouville::models::{example_a_tomograms, AmplitudeDampingParams};
use liouville::tomography::{build_m, d_from_tomograms};

fn main() -> liouville::Result<()> {
    let params = AmplitudeDampingParams::new(2.0)?;
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let series = example_a_tomograms(&params, &times)?;

    let path = std::env::temp_dir().join("liouville_decay_tomograms.json");
    export_tomograms(&series, &path)?;
    println!("wrote {}", path.display());

    let loaded = ingest_tomograms(&path)?;
    assert_eq!(loaded, series);
    let m = build_m(loaded.n())?;
    let ds = (0..loaded.len())
        .map(|k| d_from_tomograms(&loaded, &m, k))
        .collect::<liouville::Result<Vec<_>>>()?;
    let gs = reconstruct_series(&ds)?;
    let rates = lindblad_fit_two_level(&gs[20])?;
    println!(
        "t = {}: gamma1 = {:.8}, gamma2 = {:.8}, gamma3 = {:.1e}",
        gs[20].t(),
        rates.gamma1,
        rates.gamma2,
        rates.gamma3
    );

    // A snapshot with trace 1.2 is refused with its label and time index.
    let text = std::fs::read_to_string(&path)?;
    let mut doc: serde_json::Value = serde_json::from_str(&text)?;
    doc["snapshots"]["1,1"][3][0][0][0] =
        serde_json::json!(0.2 + doc["snapshots"]["1,1"][3][0][0][0].as_f64().unwrap());
    std::fs::write(&path, doc.to_string())?;
    match ingest_tomograms(&path) {
        Err(e) => println!("corrupted file rejected: {e}"),
        Ok(_) => println!("corrupted file unexpectedly accepted"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
