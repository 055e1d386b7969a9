//! Data-independent precoder trained by stochastic gradient projection,
//! evaluated on a fresh batch against water-filling.

use isac_elmmse::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SystemConfig::new(8, 4, 8, 1.0, 1.0, 0)?.with_snr_db(20.0);
    let corr = CorrelationMatrix::random(8, 1.0, 10.0, 9)?;
    let wf = water_filling(&sys, &corr).precoder;

    let (w, trace) = sgp_optimize(&sys, &corr, &wf, &SgpConfig::default(), 10)?;
    println!(
        "SGP stopped after {} iterations ({:.3} s)",
        trace.iterations(),
        trace.wall_clock
    );
    for (r, f) in trace.objectives().enumerate().step_by(10) {
        println!("  r={r:>4}  mini-batch objective {f:.5}");
    }

    let eval = SignalBatch::sample(&sys, 2000, SignalKind::Gaussian, 77)?;
    let e_wf = monte_carlo_elmmse(&wf, &eval, &sys, &corr)?;
    let e_sgp = monte_carlo_elmmse(&w, &eval, &sys, &corr)?;
    println!(
        "water-filling ELMMSE {:.5} +- {:.5}",
        e_wf.mean, e_wf.std_error
    );
    println!(
        "SGP ELMMSE           {:.5} +- {:.5}",
        e_sgp.mean, e_sgp.std_error
    );
    Ok(())
}
