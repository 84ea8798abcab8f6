//! Two scenario studies: counting identical items placed on the sensor, and
//! recovering a force staircase with automatic step detection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::montecarlo::{trial_plan, TrialLayout};
use crate::error::{Error, Result};
use crate::estimator::{
    detect_steps, estimate_force, CalibrationModel, EstimatorConfig, ForceEstimate, StepDetectorConfig, TimeWindow,
};
use crate::link::{ForceTimeline, LinkSimulator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStudyConfig {
    /// Force per item, N.
    pub item_force: f64,
    pub max_items: usize,
    pub trials: usize,
    pub seed: u64,
}

impl BoxStudyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            item_force: 2.0,
            max_items: 3,
            trials: 160,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxTrial {
    pub seed: u64,
    pub true_items: usize,
    pub predicted_items: usize,
    pub estimate: ForceEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub item_force: f64,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub trials: usize,
    pub runs: Vec<BoxTrial>,
}

impl ClassificationReport {
    pub fn class_count(&self) -> usize {
        self.confusion.len()
    }

    /// Misclassified trials between classes `a` and `b`, either direction.
    pub fn confusions_between(&self, a: usize, b: usize) -> usize {
        self.confusion[a][b] + self.confusion[b][a]
    }

    pub fn errors(&self) -> usize {
        self.runs.iter().filter(|r| r.true_items != r.predicted_items).count()
    }

    /// `true_items,pred_0,pred_1,...` rows.
    pub fn write_confusion_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["true_items".to_string()];
        header.extend((0..self.class_count()).map(|k| format!("pred_{k}")));
        w.write_record(&header)?;
        for (k, row) in self.confusion.iter().enumerate() {
            let mut rec = vec![k.to_string()];
            rec.extend(row.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nearest class for an estimated force.
pub fn classify(force: f64, item_force: f64, max_items: usize) -> usize {
    ((force / item_force).round().max(0.0) as usize).min(max_items)
}

/// Trial `i` places `i mod (max_items + 1)` items, so classes are balanced.
pub fn run_box_study(
    sim: &LinkSimulator,
    calibration: &CalibrationModel,
    layout: &TrialLayout,
    study: &BoxStudyConfig,
    estimator: &EstimatorConfig,
) -> Result<ClassificationReport> {
    if study.trials == 0 {
        return Err(Error::input("box study needs at least one trial"));
    }
    if !(study.item_force > 0.0) {
        return Err(Error::input(format!("item force must be > 0, got {}", study.item_force)));
    }
    let top = study.item_force * study.max_items as f64;
    if top > sim.curve.max_force() {
        return Err(Error::input(format!(
            "{} items of {} N exceed the curve's {} N range",
            study.max_items,
            study.item_force,
            sim.curve.max_force()
        )));
    }
    let classes = study.max_items + 1;
    let mut confusion = vec![vec![0; classes]; classes];
    let mut runs = Vec::with_capacity(study.trials);
    for (i, (seed, _)) in trial_plan(study.seed, study.trials, (0.0, 0.0)).into_iter().enumerate() {
        let true_items = i % classes;
        let trace = layout.simulate(sim, true_items as f64 * study.item_force, seed)?;
        let estimate = estimate_force(
            &trace,
            &sim.profile.tag_epc,
            calibration,
            layout.baseline,
            layout.event,
            estimator,
        )?;
        let predicted_items = classify(estimate.force_n, study.item_force, study.max_items);
        confusion[true_items][predicted_items] += 1;
        runs.push(BoxTrial {
            seed,
            true_items,
            predicted_items,
            estimate,
        });
    }
    let correct: usize = (0..classes).map(|k| confusion[k][k]).sum();
    Ok(ClassificationReport {
        item_force: study.item_force,
        confusion,
        accuracy: correct as f64 / study.trials as f64,
        trials: study.trials,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStudyConfig {
    /// Loaded plateau forces, applied in order after an unloaded plateau.
    pub levels: Vec<f64>,
    pub plateau_s: f64,
    /// Constant extra load on every loaded plateau (the knee model's own
    /// weight), N.
    pub preload: f64,
    /// Time trimmed from each side of a detected plateau before estimating.
    pub margin_s: f64,
    pub detector: StepDetectorConfig,
    pub seed: u64,
}

impl StepStudyConfig {
    /// 1, 3, 5 N steps every 20 s. The 1 N step is only ~3° of phase, so the
    /// detector runs with a 2° threshold.
    pub fn new(seed: u64) -> Self {
        Self {
            levels: vec![1.0, 3.0, 5.0],
            plateau_s: 20.0,
            preload: 0.0,
            margin_s: 1.0,
            detector: StepDetectorConfig {
                min_jump_deg: 2.0,
                ..StepDetectorConfig::default()
            },
            seed,
        }
    }

    pub fn with_preload(self, preload: f64) -> Self {
        Self { preload, ..self }
    }

    pub fn duration(&self) -> f64 {
        self.plateau_s * (self.levels.len() + 1) as f64
    }

    pub fn timeline(&self) -> Result<ForceTimeline> {
        let mut bp = vec![(0.0, 0.0)];
        bp.extend(
            self.levels
                .iter()
                .enumerate()
                .map(|(k, &f)| ((k + 1) as f64 * self.plateau_s, f + self.preload)),
        );
        ForceTimeline::new(bp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauEstimate {
    pub applied_force: f64,
    pub window: TimeWindow,
    pub estimate: ForceEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStudyReport {
    pub step_times: Vec<f64>,
    pub plateaus: Vec<PlateauEstimate>,
}

impl StepStudyReport {
    /// `applied_n,estimated_n,resolution_n,window_start_s,window_end_s,channels`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "applied_n",
            "estimated_n",
            "resolution_n",
            "window_start_s",
            "window_end_s",
            "channels",
        ])?;
        for p in &self.plateaus {
            w.write_record([
                p.applied_force.to_string(),
                p.estimate.force_n.to_string(),
                p.estimate.resolution_n.to_string(),
                p.window.start.to_string(),
                p.window.end.to_string(),
                p.estimate.channels_used.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Simulates the staircase, locates the steps, and estimates each loaded
/// plateau against the unloaded one.
pub fn run_step_study(
    sim: &LinkSimulator,
    calibration: &CalibrationModel,
    study: &StepStudyConfig,
    estimator: &EstimatorConfig,
) -> Result<StepStudyReport> {
    let timeline = study.timeline()?;
    let duration = study.duration();
    let trace = sim.simulate(&timeline, duration, study.seed)?;
    let epc = &sim.profile.tag_epc;
    let step_times = detect_steps(&trace, epc, &study.detector)?;
    if step_times.len() != study.levels.len() {
        return Err(Error::StepCount {
            found: step_times.len(),
            expected: study.levels.len(),
        });
    }
    let mut edges = vec![0.0];
    edges.extend(&step_times);
    edges.push(duration);
    let baseline = TimeWindow::new(edges[0], edges[1] - study.margin_s)?;
    let mut plateaus = Vec::with_capacity(study.levels.len());
    for (k, &level) in study.levels.iter().enumerate() {
        let window = TimeWindow::new(edges[k + 1] + study.margin_s, edges[k + 2] - study.margin_s)?;
        let estimate = estimate_force(&trace, epc, calibration, baseline, window, estimator)?;
        plateaus.push(PlateauEstimate {
            applied_force: level + study.preload,
            window,
            estimate,
        });
    }
    Ok(StepStudyReport { step_times, plateaus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_class() {
        assert_eq!(classify(-0.4, 2.0, 3), 0);
        assert_eq!(classify(0.99, 2.0, 3), 0);
        assert_eq!(classify(1.01, 2.0, 3), 1);
        assert_eq!(classify(4.9, 2.0, 3), 2);
        assert_eq!(classify(5.1, 2.0, 3), 3);
        assert_eq!(classify(9.0, 2.0, 3), 3);
    }

    #[test]
    fn staircase_timeline() {
        let s = StepStudyConfig::new(0).with_preload(1.0);
        let t = s.timeline().unwrap();
        assert_eq!(t.breakpoints(), &[(0.0, 0.0), (20.0, 2.0), (40.0, 4.0), (60.0, 6.0)]);
        assert_eq!(s.duration(), 80.0);
    }
}
