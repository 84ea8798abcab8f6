//! Force staircase (1, 3, 5 N every 20 s) recovered with step detection.
//! Pass `preload` to add the knee model's 1 N weight to every loaded step.
//!
//!     cargo run --release --example knee_step_study -- [seed] [preload]

use tagforce::harness::{
    default_calibration, run_step_study, scenario_simulator, trial_estimator_config, ScenarioConfig,
    StepStudyConfig,
};

fn main() -> tagforce::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(11);
    let preload = if args.iter().any(|a| a == "preload") { 1.0 } else { 0.0 };

    for noiseless in [true, false] {
        let sim = scenario_simulator(&ScenarioConfig::default(), noiseless)?;
        let cal = default_calibration(&sim)?;
        let study = StepStudyConfig::new(seed).with_preload(preload);
        let report = run_step_study(&sim, &cal, &study, &trial_estimator_config())?;
        println!(
            "{} profile, steps detected at {:?} s",
            if noiseless { "noiseless" } else { "default" },
            report.step_times.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
        for p in &report.plateaus {
            println!(
                "  applied {:.1} N -> estimated {:.3} N ({} channels)",
                p.applied_force, p.estimate.force_n, p.estimate.channels_used
            );
        }
    }
    Ok(())
}
