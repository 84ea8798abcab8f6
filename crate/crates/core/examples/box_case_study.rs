//! Counting 2 N items on the sensor: 160 seeded placements of 0–3 items,
//! each classified from its estimated force.
//!
//!     cargo run --release --example box_case_study -- [seed] [phase_noise_deg]

use tagforce::harness::{
    default_calibration, run_box_study, scenario_simulator, trial_estimator_config, BoxStudyConfig, ScenarioConfig,
    TrialLayout,
};

fn main() -> tagforce::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let noise: Option<f64> = args.next().and_then(|a| a.parse().ok());

    let mut sim = scenario_simulator(&ScenarioConfig::default(), false)?;
    if let Some(sigma) = noise {
        sim.profile.phase_noise_sigma = sigma;
    }
    let cal = default_calibration(&sim)?;
    let report = run_box_study(
        &sim,
        &cal,
        &TrialLayout::default(),
        &BoxStudyConfig::new(seed),
        &trial_estimator_config(),
    )?;

    println!("accuracy {:.3} over {} trials", report.accuracy, report.trials);
    println!("confusion (rows: true items, columns: predicted)");
    report.write_confusion_csv(std::io::stdout())?;
    let errors = report.errors();
    if errors > 0 {
        println!(
            "{} of {errors} errors are between 2 and 3 items",
            report.confusions_between(2, 3)
        );
    }
    Ok(())
}
