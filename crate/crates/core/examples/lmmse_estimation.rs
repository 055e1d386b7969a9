//! One sensing frame end to end: draw H, Z, S, form Y and estimate H.
//! The empirical error over many frames is compared with the closed form.

use isac_elmmse::estimation::estimate_scene;
use isac_elmmse::model::SensingScene;
use isac_elmmse::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SystemConfig::new(4, 2, 6, 1.0, 1.0, 0)?.with_snr_db(10.0);
    let corr = CorrelationMatrix::random(4, 1.0, 10.0, 1)?;
    let w = Precoder::uniform(4, sys.power);
    let s = SignalBatch::sample(&sys, 1, SignalKind::Gaussian, 2)?.samples()[0].clone();

    let scene = SensingScene::sample(&sys, &corr, 3)?;
    let report = estimate_scene(&scene, &w, &s, &sys, &corr)?;
    println!("single frame squared error: {:.4}", report.squared_error);

    let theory = conditional_mse(&w, &s, &corr, sys.noise_var, sys.n_rx)?;
    let empirical = empirical_mse(&w, &s, &sys, &corr, 20_000, 4)?;
    println!("closed-form conditional MSE: {theory:.5}");
    println!("empirical over 20000 frames: {empirical:.5}");
    println!(
        "relative difference: {:.2e}",
        (empirical - theory).abs() / theory
    );
    Ok(())
}
