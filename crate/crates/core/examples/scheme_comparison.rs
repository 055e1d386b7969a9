//! Runs an experiment config through the library API and prints the table.
//!
//!     cargo run --example scheme_comparison -- configs/snr_sweep.toml

use isac_elmmse::experiments::{parse_config, run_experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/configs/snr_sweep.toml").to_string()
    });
    let mut cfg = parse_config(&path)?;
    cfg.output_path = std::env::temp_dir().join("scheme_comparison.csv");

    let table = run_experiment(&cfg)?;
    println!(
        "{:>8} {:>22} {:>12} {:>10}",
        "point", "scheme", "mean", "stderr"
    );
    for r in &table.rows {
        println!(
            "{:>8} {:>22} {:>12.5} {:>10.2e}",
            r.sweep_point, r.scheme, r.metric_mean, r.metric_stderr
        );
    }
    println!("written to {}", cfg.output_path.display());
    Ok(())
}
