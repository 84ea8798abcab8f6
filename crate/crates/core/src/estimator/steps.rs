use serde::{Deserialize, Serialize};

use super::{deflip_180, group_by_channel, median, DEFAULT_FLIP_THRESHOLD};
use crate::angle::{circular_mean, fold_half_turn, wrap180};
use crate::error::Result;
use crate::link::TagReadRecord;

/// Moving-median change-point detector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDetectorConfig {
    /// Reads on each side of a candidate change point.
    pub window_reads: usize,
    /// Smallest median shift reported as a step, degrees.
    pub min_jump_deg: f64,
    /// Minimum spacing between reported steps, seconds.
    pub min_separation_s: f64,
    /// Span after a channel's first read used as that channel's reference.
    pub dwell_s: f64,
    pub jump_threshold: f64,
}

impl Default for StepDetectorConfig {
    fn default() -> Self {
        Self {
            window_reads: 180,
            min_jump_deg: 5.0,
            min_separation_s: 5.0,
            dwell_s: 0.2,
            jump_threshold: DEFAULT_FLIP_THRESHOLD,
        }
    }
}

/// Offset-free phase track: every read re-expressed relative to the mean of
/// its channel's first dwell, merged across channels in time order.
pub fn phase_track(trace: &[TagReadRecord], epc: &str, config: &StepDetectorConfig) -> Result<Vec<(f64, f64)>> {
    let mut track = Vec::new();
    for series in group_by_channel(trace, epc) {
        let clean = deflip_180(&series, config.jump_threshold)?;
        let Some(&(t0, _)) = clean.samples.first() else { continue };
        let reference = circular_mean(
            clean
                .samples
                .iter()
                .take_while(|(t, _)| *t < t0 + config.dwell_s)
                .map(|s| s.1),
        )
        .expect("series has a first read");
        track.extend(clean.samples.iter().map(|&(t, p)| (t, fold_half_turn(wrap180(p - reference)))));
    }
    track.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(track)
}

/// Times at which the tag's phase steps by at least `min_jump_deg`.
pub fn detect_steps(trace: &[TagReadRecord], epc: &str, config: &StepDetectorConfig) -> Result<Vec<f64>> {
    let track = phase_track(trace, epc, config)?;
    let w = config.window_reads.max(1);
    if track.len() < 2 * w {
        return Ok(Vec::new());
    }
    let values: Vec<f64> = track.iter().map(|s| s.1).collect();
    let mut candidates: Vec<(usize, f64)> = (w..=track.len() - w)
        .map(|i| (i, (median(&values[i..i + w]) - median(&values[i - w..i])).abs()))
        .filter(|&(_, score)| score >= config.min_jump_deg)
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    // the median score is flat near a step; the mean difference peaks at it
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in &values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mean_shift = |i: usize| ((prefix[i + w] - prefix[i]) - (prefix[i] - prefix[i - w])).abs() / w as f64;
    let refine = |i: usize| {
        let lo = i.saturating_sub(w / 2).max(w);
        let hi = (i + w / 2).min(track.len() - w);
        (lo..=hi).max_by(|&a, &b| mean_shift(a).total_cmp(&mean_shift(b)).then(b.cmp(&a))).unwrap_or(i)
    };

    let mut accepted: Vec<f64> = Vec::new();
    for (i, _) in candidates {
        let i = refine(i);
        let t = 0.5 * (track[i - 1].0 + track[i].0);
        if accepted.iter().all(|&a| (a - t).abs() >= config.min_separation_s) {
            accepted.push(t);
        }
    }
    accepted.sort_by(f64::total_cmp);
    Ok(accepted)
}
