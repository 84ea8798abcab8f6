//! Static-force accuracy over seeded trials, with and without dynamic
//! multipath.
//!
//!     cargo run --release --example monte_carlo_accuracy -- [trials] [seed]

use tagforce::harness::{
    default_calibration, median_abs_error, run_static_trials, scenario_simulator, trial_estimator_config,
    trial_plan, ScenarioConfig, TrialLayout,
};
use tagforce::link::MultipathModel;

fn main() -> tagforce::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2024);

    let mut sim = scenario_simulator(&ScenarioConfig::default(), false)?;
    let cal = default_calibration(&sim)?;
    let layout = TrialLayout::default();
    let cfg = trial_estimator_config();
    let plan = trial_plan(seed, trials, (0.0, 6.0));

    let still = run_static_trials(&sim, &cal, &layout, &plan, &cfg)?;
    let m_still = median_abs_error(&still)?;
    println!("static multipath:  median |error| {m_still:.3} N over {trials} trials");

    sim.multipath = MultipathModel::dynamic(5.0);
    let moving = run_static_trials(&sim, &cal, &layout, &plan, &cfg)?;
    let m_moving = median_abs_error(&moving)?;
    println!("dynamic multipath: median |error| {m_moving:.3} N");
    println!("degradation        {:+.3} N", m_moving - m_still);

    let worst = moving
        .iter()
        .filter_map(|o| o.abs_error().map(|e| (e, o.true_force)))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    println!("worst dynamic trial: {:.3} N error at {:.2} N", worst.0, worst.1);
    Ok(())
}
