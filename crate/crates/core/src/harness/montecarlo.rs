//! Calibration builders and seeded static-force trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angle::wrap180;
use crate::error::{Error, Result};
use crate::estimator::{
    average_across_channels, channel_jumps, estimate_force, fit_calibration, CalibrationModel, DomainPolicy,
    EstimatorConfig, ForceEstimate, TimeWindow,
};
use crate::link::{ChannelPlan, ForceTimeline, LinkSimulator, TagReadRecord};
use crate::sensor::{force_grid, ForceCapacitanceCurve};
use crate::transduction::{reflect_phase, LineSpec};

/// Channel-averaged noise-free phase jump from 0 N to `force`.
pub fn forward_jump(curve: &ForceCapacitanceCurve, line: &LineSpec, plan: &ChannelPlan, force: f64) -> Result<f64> {
    let c0 = curve.c0();
    let c = curve.capacitance_at(force)?;
    let mut sum = 0.0;
    for &f in plan.center_frequencies() {
        let l = line.with_frequency(f);
        sum += wrap180(reflect_phase(c, &l)? - reflect_phase(c0, &l)?);
    }
    Ok(sum / plan.channel_count() as f64)
}

/// Fits force against the forward-model jump at `points` forces spanning
/// the curve's domain.
pub fn forward_model_calibration(
    curve: &ForceCapacitanceCurve,
    line: &LineSpec,
    plan: &ChannelPlan,
    points: usize,
    degree: usize,
) -> Result<CalibrationModel> {
    let forces = force_grid(curve.max_force(), points);
    let phases = forces
        .iter()
        .map(|&f| forward_jump(curve, line, plan, f))
        .collect::<Result<Vec<_>>>()?;
    fit_calibration(&phases, &forces, degree)
}

/// Layout of a single static-force trial: force off until `step_at`, on
/// afterwards, compared across two windows one hop cycle apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialLayout {
    pub duration: f64,
    pub step_at: f64,
    pub baseline: TimeWindow,
    pub event: TimeWindow,
}

impl Default for TrialLayout {
    fn default() -> Self {
        Self {
            duration: 12.0,
            step_at: 6.0,
            baseline: TimeWindow { start: 0.0, end: 2.0 },
            event: TimeWindow { start: 10.0, end: 12.0 },
        }
    }
}

impl TrialLayout {
    pub fn timeline(&self, force: f64) -> Result<ForceTimeline> {
        ForceTimeline::step(self.step_at, 0.0, force)
    }

    pub fn simulate(&self, sim: &LinkSimulator, force: f64, seed: u64) -> Result<Vec<TagReadRecord>> {
        sim.simulate(&self.timeline(force)?, self.duration, seed)
    }
}

/// Calibrates by running the pipeline itself on traces with known forces.
/// With a noiseless simulator and the trial's own seed, the fitted points
/// reproduce exactly.
pub fn pipeline_calibration(
    sim: &LinkSimulator,
    layout: &TrialLayout,
    forces: &[f64],
    degree: usize,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<CalibrationModel> {
    let epc = &sim.profile.tag_epc;
    let mut phases = Vec::with_capacity(forces.len());
    for &f in forces {
        let trace = layout.simulate(sim, f, seed)?;
        let jumps: Vec<f64> = channel_jumps(&trace, epc, layout.baseline, layout.event, config)?
            .into_iter()
            .map(|j| j.1)
            .collect();
        phases.push(average_across_channels(&jumps, config.aggregate)?.mean);
    }
    fit_calibration(&phases, forces, degree)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub true_force: f64,
    pub estimate: Option<ForceEstimate>,
    /// Set when the pipeline failed on this trial.
    pub error: Option<String>,
}

impl TrialOutcome {
    pub fn abs_error(&self) -> Option<f64> {
        self.estimate.map(|e| (e.force_n - self.true_force).abs())
    }
}

/// Per-trial seed and force, derived from one master seed.
pub fn trial_plan(master_seed: u64, trials: usize, force_range: (f64, f64)) -> Vec<(u64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..trials)
        .map(|_| {
            let seed = rng.random::<u64>();
            let force = if force_range.1 > force_range.0 {
                rng.random_range(force_range.0..=force_range.1)
            } else {
                force_range.0
            };
            (seed, force)
        })
        .collect()
}

/// Runs one estimate per `(seed, force)` pair. Estimation failures are
/// recorded in the outcome; simulation failures abort.
pub fn run_static_trials(
    sim: &LinkSimulator,
    calibration: &CalibrationModel,
    layout: &TrialLayout,
    plan: &[(u64, f64)],
    config: &EstimatorConfig,
) -> Result<Vec<TrialOutcome>> {
    let epc = &sim.profile.tag_epc;
    plan.iter()
        .map(|&(seed, force)| {
            let trace = layout.simulate(sim, force, seed)?;
            let (estimate, error) = match estimate_force(&trace, epc, calibration, layout.baseline, layout.event, config)
            {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(TrialOutcome {
                seed,
                true_force: force,
                estimate,
                error,
            })
        })
        .collect()
}

/// Median absolute error over trials that produced an estimate.
pub fn median_abs_error(outcomes: &[TrialOutcome]) -> Result<f64> {
    let errs: Vec<f64> = outcomes.iter().filter_map(TrialOutcome::abs_error).collect();
    if errs.is_empty() {
        return Err(Error::NoUsableChannels);
    }
    Ok(crate::estimator::median(&errs))
}

/// Estimator settings used by trials and case studies: defaults, but with
/// out-of-domain jumps clamped rather than rejected.
pub fn trial_estimator_config() -> EstimatorConfig {
    EstimatorConfig {
        domain: DomainPolicy::Clamp,
        ..EstimatorConfig::default()
    }
}
