//! Sample-specific precoder by successive convex approximation, printing the
//! per-iteration history.

use isac_elmmse::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SystemConfig::new(8, 4, 8, 1.0, 1.0, 0)?.with_snr_db(30.0);
    let corr = CorrelationMatrix::random(8, 1.0, 10.0, 5)?;
    let s = SignalBatch::sample(&sys, 1, SignalKind::Gaussian, 6)?.samples()[0].clone();
    let init = Precoder::uniform(8, sys.power);

    let (w, trace) = sca_optimize(&s, &init, &ScaConfig::default(), &sys, &corr)?;
    println!(
        "{:>4} {:>12} {:>10} {:>12}",
        "t", "objective", "step", "gap"
    );
    for r in &trace.records {
        println!(
            "{:>4} {:>12.6} {:>10.4} {:>12.3e}",
            r.iteration, r.objective, r.step_size, r.descent_gap
        );
    }
    let wf = water_filling(&sys, &corr).precoder;
    println!(
        "water-filling on this sample: {:.6}",
        conditional_mse(&wf, &s, &corr, sys.noise_var, sys.n_rx)?
    );
    println!(
        "SCA result:                   {:.6}",
        conditional_mse(&w, &s, &corr, sys.noise_var, sys.n_rx)?
    );
    println!(
        "iterations {} in {:.3} s",
        trace.iterations(),
        trace.wall_clock
    );
    Ok(())
}
