//! Reader-side force estimation from hopping phase reports.
//!
//! Every channel carries an unknown constant offset, so absolute phase is
//! meaningless across hops. The pipeline therefore works per channel:
//!
//! 1. [`group_by_channel`] splits a trace into per-channel series;
//! 2. [`deflip_180`] removes the reader's latched half-turn artifacts;
//! 3. [`per_channel_diff`] takes the circular difference between an event
//!    window and a baseline window, which cancels the channel offset;
//! 4. [`average_across_channels`] combines the channels, averaging down
//!    zero-mean multipath;
//! 5. a [`CalibrationModel`] maps the averaged jump to force.
//!
//! [`estimate_force`] runs all of it.

mod calibration;
mod steps;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use calibration::{fit_calibration, CalibrationModel, DomainPolicy};
pub use steps::{detect_steps, phase_track, StepDetectorConfig};

use crate::angle::{circular_mean, fold_half_turn, wrap180, wrap360};
use crate::error::{Error, Result};
use crate::link::TagReadRecord;

/// Default jump size treated as a reader half-turn artifact, degrees.
pub const DEFAULT_FLIP_THRESHOLD: f64 = 170.0;

/// Time-ordered phase reports of one tag on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub channel_index: usize,
    /// `(timestamp s, phase deg)`.
    pub samples: Vec<(f64, f64)>,
}

/// Half-open time interval `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::input(format!("empty time window [{start}, {end})")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub jump_threshold: f64,
    pub aggregate: Aggregate,
    /// Fold per-channel differences beyond ±90° back by a half turn. Sensor
    /// swings are far below 90°, so anything larger is a flip that coincided
    /// with a force change and slipped past the jump detector.
    pub fold_half_turns: bool,
    pub domain: DomainPolicy,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            jump_threshold: DEFAULT_FLIP_THRESHOLD,
            aggregate: Aggregate::Mean,
            fold_half_turns: true,
            domain: DomainPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelAverage {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceEstimate {
    /// Event minus baseline phase, averaged over channels, degrees.
    pub phase_jump_deg: f64,
    pub phase_jump_std_deg: f64,
    pub channels_used: usize,
    pub force_n: f64,
    pub resolution_n: f64,
}

impl fmt::Display for ForceEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "force {:.3} N (resolution {:.3} N) from phase jump {:.3} deg, std {:.3} deg over {} channels",
            self.force_n, self.resolution_n, self.phase_jump_deg, self.phase_jump_std_deg, self.channels_used
        )
    }
}

/// Splits `records` of tag `epc` into one series per channel, ordered by
/// channel index. Reads keep their input order within a channel.
pub fn group_by_channel(records: &[TagReadRecord], epc: &str) -> Vec<ChannelSeries> {
    let mut map: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.epc == epc) {
        map.entry(r.channel_index).or_default().push((r.timestamp, r.phase_deg));
    }
    map.into_iter()
        .map(|(channel_index, samples)| ChannelSeries {
            channel_index,
            samples,
        })
        .collect()
}

/// Removes latched 180° reporting flips from a channel series.
///
/// Whenever two consecutive reads differ by more than `jump_threshold`
/// (circularly), a half turn is toggled off everything that follows.
pub fn deflip_180(series: &ChannelSeries, jump_threshold: f64) -> Result<ChannelSeries> {
    if !(jump_threshold > 20.0 && jump_threshold < 180.0) {
        return Err(Error::input(format!(
            "flip threshold must lie in (20, 180) deg, got {jump_threshold}"
        )));
    }
    let mut correction = 0.0;
    let mut out = Vec::with_capacity(series.samples.len());
    let mut prev: Option<f64> = None;
    for &(t, phase) in &series.samples {
        if let Some(p) = prev {
            if wrap180(phase - p).abs() > jump_threshold {
                correction = if correction == 0.0 { 180.0 } else { 0.0 };
            }
        }
        prev = Some(phase);
        out.push((t, wrap360(phase - correction)));
    }
    Ok(ChannelSeries {
        channel_index: series.channel_index,
        samples: out,
    })
}

/// Circular difference (event − baseline) of the window means, in
/// `(-180, 180]`. `None` when either window has no reads on this channel.
///
/// Both means are taken relative to the channel's first read, so a constant
/// channel offset cancels exactly and swapping the windows negates the result.
pub fn per_channel_diff(series: &ChannelSeries, baseline: TimeWindow, event: TimeWindow) -> Option<f64> {
    let reference = series.samples.first()?.1;
    let window_mean = |w: TimeWindow| {
        circular_mean(
            series
                .samples
                .iter()
                .filter(|(t, _)| w.contains(*t))
                .map(|&(_, p)| wrap180(p - reference)),
        )
    };
    let b = window_mean(baseline)?;
    let e = window_mean(event)?;
    Some(wrap180(e - b))
}

/// Combines per-channel differences. The spread is the sample standard
/// deviation; both are computed on deviations from the circular mean so
/// values straddling ±180° average correctly.
pub fn average_across_channels(diffs: &[f64], aggregate: Aggregate) -> Result<ChannelAverage> {
    let center = circular_mean(diffs.iter().copied()).ok_or(Error::NoUsableChannels)?;
    let devs: Vec<f64> = diffs.iter().map(|&d| wrap180(d - center)).collect();
    let n = devs.len();
    let mean_dev = devs.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (devs.iter().map(|d| (d - mean_dev).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let location = match aggregate {
        Aggregate::Mean => mean_dev,
        Aggregate::Median => median(&devs),
    };
    Ok(ChannelAverage {
        mean: wrap180(center + location),
        std,
        count: n,
    })
}

/// Median of a non-empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-channel phase jumps for one tag, keyed by channel index. Channels
/// without reads in both windows are skipped.
pub fn channel_jumps(
    trace: &[TagReadRecord],
    epc: &str,
    baseline: TimeWindow,
    event: TimeWindow,
    config: &EstimatorConfig,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for series in group_by_channel(trace, epc) {
        let clean = deflip_180(&series, config.jump_threshold)?;
        if let Some(d) = per_channel_diff(&clean, baseline, event) {
            let d = if config.fold_half_turns { fold_half_turn(d) } else { d };
            out.push((series.channel_index, d));
        }
    }
    Ok(out)
}

/// Group → de-flip → difference → average → calibrate.
///
/// `resolution_n` is the standard error of the averaged jump propagated
/// through the calibration slope.
pub fn estimate_force(
    trace: &[TagReadRecord],
    epc: &str,
    calibration: &CalibrationModel,
    baseline: TimeWindow,
    event: TimeWindow,
    config: &EstimatorConfig,
) -> Result<ForceEstimate> {
    let jumps = channel_jumps(trace, epc, baseline, event, config)?;
    let diffs: Vec<f64> = jumps.iter().map(|&(_, d)| d).collect();
    let avg = average_across_channels(&diffs, config.aggregate)?;
    let admitted = calibration.admit(avg.mean, config.domain)?;
    let force_n = calibration.evaluate(admitted);
    let resolution_n = calibration.slope(admitted).abs() * avg.std / (avg.count as f64).sqrt();
    Ok(ForceEstimate {
        phase_jump_deg: avg.mean,
        phase_jump_std_deg: avg.std,
        channels_used: avg.count,
        force_n,
        resolution_n,
    })
}

/// Force resolution implied by a phase accuracy when `span_force` newtons
/// produce `span_deg` degrees of swing.
pub fn resolution_from_phase_accuracy(phase_accuracy: f64, span_deg: f64, span_force: f64) -> Result<f64> {
    if !(span_deg > 0.0 && span_force > 0.0) {
        return Err(Error::input("phase and force spans must be positive"));
    }
    if !(phase_accuracy >= 0.0) {
        return Err(Error::input("phase accuracy must be >= 0"));
    }
    Ok(span_force / span_deg * phase_accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, ch: usize, phase: f64, epc: &str) -> TagReadRecord {
        TagReadRecord {
            timestamp: t,
            epc: epc.into(),
            channel_index: ch,
            frequency: 902.25e6,
            phase_deg: phase,
            rssi_dbm: -55.0,
        }
    }

    fn series(phases: &[f64]) -> ChannelSeries {
        ChannelSeries {
            channel_index: 0,
            samples: phases.iter().enumerate().map(|(i, &p)| (i as f64, p)).collect(),
        }
    }

    fn phases(s: &ChannelSeries) -> Vec<f64> {
        s.samples.iter().map(|s| s.1).collect()
    }

    #[test]
    fn grouping() {
        let recs = vec![rec(0.0, 0, 1.0, "A"), rec(0.1, 0, 2.0, "A"), rec(0.2, 1, 3.0, "A"), rec(0.3, 1, 4.0, "B")];
        let g = group_by_channel(&recs, "A");
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].samples.len(), 2);
        assert_eq!(g[1].samples, vec![(0.2, 3.0)]);
        assert!(group_by_channel(&[], "A").is_empty());
        assert!(group_by_channel(&recs, "C").is_empty());
    }

    #[test]
    fn deflip_pure_artifact() {
        let out = deflip_180(&series(&[10.0, 190.0, 190.0, 10.0]), 170.0).unwrap();
        assert_eq!(phases(&out), vec![10.0, 10.0, 10.0, 10.0]);
    }

    #[test]
    fn deflip_keeps_sensor_jump() {
        let s = series(&[100.0, 100.0, 81.6, 81.6]);
        assert_eq!(deflip_180(&s, 170.0).unwrap(), s);
    }

    #[test]
    fn deflip_across_wrap() {
        // 350 → 172 is a -178 jump
        let out = deflip_180(&series(&[350.0, 172.0, 171.0]), 170.0).unwrap();
        assert_eq!(phases(&out), vec![350.0, 352.0, 351.0]);
    }

    #[test]
    fn deflip_threshold_bounds() {
        assert!(deflip_180(&series(&[0.0]), 20.0).is_err());
        assert!(deflip_180(&series(&[0.0]), 180.0).is_err());
    }

    #[test]
    fn diff_examples() {
        let b = TimeWindow::new(0.0, 2.0).unwrap();
        let e = TimeWindow::new(2.0, 4.0).unwrap();
        assert_eq!(per_channel_diff(&series(&[50.0, 50.0, 50.0, 50.0]), b, e), Some(0.0));
        let d = per_channel_diff(&series(&[100.0, 100.0, 118.4, 118.4]), b, e).unwrap();
        assert!((d - 18.4).abs() < 1e-12);
        let shifted = per_channel_diff(&series(&[300.0, 300.0, 318.4, 318.4]), b, e).unwrap();
        assert!((shifted - 18.4).abs() < 1e-12);
        assert_eq!(per_channel_diff(&series(&[100.0, 100.0]), b, e), None);
    }

    #[test]
    fn diff_across_zero() {
        let b = TimeWindow::new(0.0, 2.0).unwrap();
        let e = TimeWindow::new(2.0, 4.0).unwrap();
        let d = per_channel_diff(&series(&[355.0, 355.0, 5.0, 5.0]), b, e).unwrap();
        assert!((d - 10.0).abs() < 1e-12);
    }

    #[test]
    fn averaging() {
        let a = average_across_channels(&[3.5, 3.5, 3.5], Aggregate::Mean).unwrap();
        assert!((a.mean - 3.5).abs() < 1e-12);
        assert!(a.std.abs() < 1e-12);
        assert_eq!(a.count, 3);
        let w = average_across_channels(&[179.0, -179.0], Aggregate::Mean).unwrap();
        assert!((w.mean.abs() - 180.0).abs() < 1e-9);
        let m = average_across_channels(&[1.0, 2.0, 30.0], Aggregate::Median).unwrap();
        assert!((m.mean - 2.0).abs() < 1e-9);
        assert!(matches!(average_across_channels(&[], Aggregate::Mean), Err(Error::NoUsableChannels)));
    }

    #[test]
    fn resolution_arithmetic() {
        assert_eq!(resolution_from_phase_accuracy(0.5, 15.0, 6.0).unwrap(), 0.2);
        assert_eq!(resolution_from_phase_accuracy(1.0, 15.0, 6.0).unwrap(), 0.4);
        assert_eq!(resolution_from_phase_accuracy(0.0, 15.0, 6.0).unwrap(), 0.0);
        assert!(resolution_from_phase_accuracy(1.0, 0.0, 6.0).is_err());
    }

    #[test]
    fn missing_epc_has_no_channels() {
        let recs = vec![rec(0.0, 0, 1.0, "A"), rec(3.0, 0, 2.0, "A")];
        let cal = CalibrationModel::new(vec![0.0, -0.3], (-20.0, 0.0), 0.0).unwrap();
        let b = TimeWindow::new(0.0, 2.0).unwrap();
        let e = TimeWindow::new(2.0, 4.0).unwrap();
        let r = estimate_force(&recs, "Z", &cal, b, e, &EstimatorConfig::default());
        assert!(matches!(r, Err(Error::NoUsableChannels)));
    }

    #[test]
    fn summary_line() {
        let e = ForceEstimate {
            phase_jump_deg: -18.4,
            phase_jump_std_deg: 0.5,
            channels_used: 10,
            force_n: 6.0,
            resolution_n: 0.05,
        };
        assert_eq!(
            e.to_string(),
            "force 6.000 N (resolution 0.050 N) from phase jump -18.400 deg, std 0.500 deg over 10 channels"
        );
    }
}
