//! Ergodic error with random signals versus its Jensen lower bound as the
//! frame length grows.

use isac_elmmse::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_tx = 8;
    let corr = CorrelationMatrix::random(n_tx, 1.0, 10.0, 11)?;
    println!(
        "{:>6} {:>12} {:>10} {:>12} {:>10}",
        "L", "ELMMSE", "stderr", "bound", "rel gap"
    );
    for len in [8, 16, 32, 64, 128, 256] {
        let sys = SystemConfig::new(n_tx, 4, len, 1.0, 1.0, 0)?.with_snr_db(10.0);
        let w = water_filling(&sys, &corr).precoder;
        let batch = SignalBatch::sample(&sys, 500, SignalKind::Gaussian, len as u64)?;
        let est = monte_carlo_elmmse(&w, &batch, &sys, &corr)?;
        let bound = jensen_bound(&w, &sys, &corr)?;
        println!(
            "{len:>6} {:>12.5} {:>10.2e} {bound:>12.5} {:>10.2e}",
            est.mean,
            est.std_error,
            (est.mean - bound) / bound
        );
    }
    Ok(())
}
