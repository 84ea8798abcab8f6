//! The estimation pipeline stage by stage on a simulated 0 → 4.2 N step.

use tagforce::estimator::{
    average_across_channels, deflip_180, estimate_force, group_by_channel, per_channel_diff, DomainPolicy,
    EstimatorConfig, TimeWindow, DEFAULT_FLIP_THRESHOLD,
};
use tagforce::harness::{default_calibration, scenario_simulator, ScenarioConfig, TrialLayout};

fn main() -> tagforce::Result<()> {
    let sim = scenario_simulator(&ScenarioConfig::default(), false)?;
    let layout = TrialLayout::default();
    let trace = layout.simulate(&sim, 4.2, 99)?;
    let epc = &sim.profile.tag_epc;
    let (baseline, event) = (layout.baseline, layout.event);

    let series = group_by_channel(&trace, epc);
    println!("{} reads on {} channels", trace.len(), series.len());

    let mut diffs = Vec::new();
    for s in &series {
        let clean = deflip_180(s, DEFAULT_FLIP_THRESHOLD)?;
        if let Some(d) = per_channel_diff(&clean, baseline, event) {
            // ~180° off: the reader's flip state toggled between the windows,
            // where no read on this channel could reveal it. Folding fixes it.
            println!("  channel {:2}: {:8.3} deg", s.channel_index, d);
            diffs.push(tagforce::angle::fold_half_turn(d));
        }
    }
    let avg = average_across_channels(&diffs, Default::default())?;
    println!("average {:.3} deg, std {:.3} deg over {} channels", avg.mean, avg.std, avg.count);

    let cal = default_calibration(&sim)?;
    let cfg = EstimatorConfig {
        domain: DomainPolicy::Clamp,
        ..EstimatorConfig::default()
    };
    let est = estimate_force(&trace, epc, &cal, baseline, event, &cfg)?;
    println!("{est}");

    // Adjacent windows share no channels under a 10 s hop cycle.
    let adjacent = estimate_force(&trace, epc, &cal, TimeWindow::new(4.0, 6.0)?, TimeWindow::new(6.0, 8.0)?, &cfg);
    println!("adjacent windows: {:?}", adjacent.map(|e| e.channels_used));
    Ok(())
}
