//! Degree-2 calibration from the forward model, its JSON form, and the
//! resolution implied by a given phase accuracy.

use tagforce::estimator::{fit_calibration, resolution_from_phase_accuracy, CalibrationModel, DomainPolicy};
use tagforce::harness::{forward_jump, scenario_simulator, ScenarioConfig};
use tagforce::sensor::force_grid;

fn main() -> tagforce::Result<()> {
    let sim = scenario_simulator(&ScenarioConfig::default(), true)?;
    let forces = force_grid(6.0, 25);
    let phases = forces
        .iter()
        .map(|&f| forward_jump(&sim.curve, &sim.line, &sim.plan, f))
        .collect::<tagforce::Result<Vec<_>>>()?;

    for degree in 1..=3 {
        let m = fit_calibration(&phases, &forces, degree)?;
        println!("degree {degree}: residual rms {:.4} N, monotone {}", m.residual_rms(), m.is_monotone());
    }

    let model = fit_calibration(&phases, &forces, 2)?;
    let json = serde_json::to_string(&model)?;
    println!("{json}");
    let back: CalibrationModel = serde_json::from_str(&json)?;
    assert_eq!(back, model);

    for jump in [-3.2, -9.5, -18.4, -25.0] {
        match model.force_at(jump, DomainPolicy::default()) {
            Ok(f) => println!("jump {jump:6.1} deg -> {f:.3} N"),
            Err(e) => println!("jump {jump:6.1} deg -> {e}"),
        }
    }
    for acc in [0.5, 1.0] {
        println!(
            "phase accuracy {acc} deg over a 15 deg / 6 N span -> {} N",
            resolution_from_phase_accuracy(acc, 15.0, 6.0)?
        );
    }
    Ok(())
}
