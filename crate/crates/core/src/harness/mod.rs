//! Scenario files, reader-export import, Monte-Carlo trials, the two case
//! studies, and the command functions behind the `tagforce` binary.

mod casestudy;
mod config;
mod import;
mod montecarlo;

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use casestudy::{
    classify, run_box_study, run_step_study, BoxStudyConfig, BoxTrial, ClassificationReport, PlateauEstimate,
    StepStudyConfig, StepStudyReport,
};
pub use config::{
    CurveModeName, GeometrySection, HopOrderName, LineSection, MaterialSection, MultipathSection, PlanSection,
    ReaderSection, Scenario, ScenarioConfig, SensorSection, TimelineSection, WindowSection,
};
pub use import::{export_reader_trace, import_reader_trace, PhaseUnits};
pub use montecarlo::{
    forward_jump, forward_model_calibration, median_abs_error, pipeline_calibration, run_static_trials,
    trial_estimator_config, trial_plan, TrialLayout, TrialOutcome,
};

use crate::error::{Error, Result};
use crate::estimator::{estimate_force, fit_calibration, CalibrationModel, EstimatorConfig, ForceEstimate, TimeWindow};
use crate::link::{write_trace, LinkSimulator, MultipathModel, ReaderProfile, TagReadRecord, TraceFormat};
use crate::transduction::{delta_phi_sweep, write_sweep_csv, LineSpec};

/// Forward-model calibration points used by the commands and case studies.
pub const CALIBRATION_POINTS: usize = 25;
pub const CALIBRATION_DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub reads: usize,
    pub channels_covered: usize,
    pub duration_s: f64,
    pub seed: u64,
}

/// Simulates the scenario and writes the trace. `seed` overrides any seed in
/// the config.
pub fn cmd_simulate<W: Write>(
    config: &ScenarioConfig,
    seed: u64,
    format: TraceFormat,
    out: W,
) -> Result<SimulateSummary> {
    let scenario = config.build()?;
    let trace = scenario.simulator.simulate(&scenario.timeline, scenario.duration, seed)?;
    write_trace(&trace, format, out)?;
    Ok(SimulateSummary {
        reads: trace.len(),
        channels_covered: trace.iter().map(|r| r.channel_index).collect::<BTreeSet<_>>().len(),
        duration_s: scenario.duration,
        seed,
    })
}

/// Runs the estimator; a tag that never appears is reported as having no
/// usable channels.
pub fn cmd_estimate(
    trace: &[TagReadRecord],
    calibration: &CalibrationModel,
    baseline: TimeWindow,
    event: TimeWindow,
    epc: &str,
    config: &EstimatorConfig,
) -> Result<ForceEstimate> {
    if !trace.iter().any(|r| r.epc == epc) {
        return Err(Error::NoUsableChannels);
    }
    estimate_force(trace, epc, calibration, baseline, event, config)
}

/// Reads `phase_deg,force_n` rows.
pub fn read_calibration_samples<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        phase_deg: f64,
        force_n: f64,
    }
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(["phase_deg", "force_n"]) {
        return Err(Error::Import {
            line: 1,
            reason: "expected header phase_deg,force_n".into(),
        });
    }
    let (mut phases, mut forces) = (Vec::new(), Vec::new());
    for row in r.deserialize::<Row>() {
        let row = row?;
        phases.push(row.phase_deg);
        forces.push(row.force_n);
    }
    Ok((phases, forces))
}

pub fn cmd_calibrate<R: Read>(samples: R, degree: usize) -> Result<CalibrationModel> {
    let (phases, forces) = read_calibration_samples(samples)?;
    fit_calibration(&phases, &forces, degree)
}

/// `c0_pf,delta_phi_deg` rows for a picofarad grid at a fixed ratio.
pub fn cmd_sweep_phase<W: Write>(c0_grid_pf: &[f64], ratio: f64, line: &LineSpec, out: W) -> Result<()> {
    if c0_grid_pf.is_empty() {
        return Err(Error::input("C0 grid is empty"));
    }
    let grid: Vec<f64> = c0_grid_pf.iter().map(|c| c * 1e-12).collect();
    write_sweep_csv(&delta_phi_sweep(&grid, ratio, line)?, out)
}

/// Simulator for a scenario, optionally with every noise source switched off.
pub fn scenario_simulator(config: &ScenarioConfig, noiseless: bool) -> Result<LinkSimulator> {
    let mut sim = config.build()?.simulator;
    if noiseless {
        sim.profile = ReaderProfile {
            tag_epc: sim.profile.tag_epc.clone(),
            reads_per_second: sim.profile.reads_per_second,
            per_channel_offset: sim.profile.per_channel_offset.clone(),
            phase_step_deg: sim.profile.phase_step_deg,
            ..ReaderProfile::noiseless()
        };
        sim.multipath = MultipathModel::none();
    }
    Ok(sim)
}

/// Forward-model calibration for a simulator's curve, line and plan.
pub fn default_calibration(sim: &LinkSimulator) -> Result<CalibrationModel> {
    forward_model_calibration(&sim.curve, &sim.line, &sim.plan, CALIBRATION_POINTS, CALIBRATION_DEGREE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_default_ten_seconds() {
        let cfg = ScenarioConfig {
            duration_s: 10.0,
            ..ScenarioConfig::default()
        };
        let mut buf = Vec::new();
        let s = cmd_simulate(&cfg, 1, TraceFormat::Jsonl, &mut buf).unwrap();
        // Poisson(900): ±4σ
        assert!((780..=1020).contains(&s.reads), "{}", s.reads);
        assert_eq!(s.channels_covered, 50);
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), s.reads);
    }

    #[test]
    fn simulate_zero_duration() {
        let cfg = ScenarioConfig {
            duration_s: 0.0,
            ..ScenarioConfig::default()
        };
        let mut buf = Vec::new();
        assert_eq!(cmd_simulate(&cfg, 1, TraceFormat::Jsonl, &mut buf).unwrap().reads, 0);
        assert!(buf.is_empty());
    }

    #[test]
    fn calibrate_from_csv() {
        let text = "phase_deg,force_n\n0,0\n-5,1\n-10,2.2\n-15,3.6\n";
        let m = cmd_calibrate(text.as_bytes(), 2).unwrap();
        assert_eq!(m.degree(), 2);
        assert!(cmd_calibrate("phase_deg,force_n\n0,0\n".as_bytes(), 2).is_err());
        assert!(matches!(
            cmd_calibrate("phase,force\n0,0\n".as_bytes(), 1),
            Err(Error::Import { line: 1, .. })
        ));
    }

    #[test]
    fn sweep_rows() {
        let mut buf = Vec::new();
        cmd_sweep_phase(&[0.1, 1.0, 10.0, 100.0], 1.75, &LineSpec::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(matches!(
            cmd_sweep_phase(&[], 1.75, &LineSpec::default(), Vec::new()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn missing_epc() {
        let cal = CalibrationModel::new(vec![0.0, -0.3], (-20.0, 0.0), 0.0).unwrap();
        let w = TimeWindow::new(0.0, 1.0).unwrap();
        let e = cmd_estimate(&[], &cal, w, w, "X", &EstimatorConfig::default());
        assert!(matches!(e, Err(Error::NoUsableChannels)));
    }
}
