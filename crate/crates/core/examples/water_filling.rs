//! Closed-form water-filling precoder for a random spatial correlation.
//!
//!     cargo run --example water_filling -- [n_tx] [snr_db]

use isac_elmmse::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_tx: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(8);
    let snr_db: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(10.0);

    let sys = SystemConfig::new(n_tx, 4, 8, 1.0, 1.0, 0)?.with_snr_db(snr_db);
    let corr = CorrelationMatrix::random(n_tx, 1.0, 10.0, 42)?;
    let wf = water_filling(&sys, &corr);

    println!("water level mu = {:.4}", wf.water_level);
    println!("{:>4} {:>10} {:>10}", "k", "lambda", "power");
    for (k, (lam, p)) in corr.eigvals().iter().zip(&wf.powers).enumerate() {
        println!("{k:>4} {lam:>10.4} {p:>10.4}");
    }
    println!("active directions: {}", wf.active_set.len());
    println!(
        "||W||_F^2 = {:.6} (budget {:.6})",
        isac_elmmse::linalg::frob_sq(wf.precoder.matrix()),
        sys.power
    );
    println!(
        "deterministic-training LMMSE = {:.4}",
        deterministic_lmmse(&wf.precoder, &sys, &corr)?
    );
    Ok(())
}
