use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::{ChannelPlan, ForceTimeline, MultipathModel, OffsetSpec, ReaderProfile, TagReadRecord};
use crate::angle::wrap360;
use crate::error::{Error, Result};
use crate::sensor::ForceCapacitanceCurve;
use crate::transduction::{reflect_phase, LineSpec};

// Independent random streams so that changing one noise source leaves the
// draws of every other source untouched.
const STREAM_OFFSETS: u64 = 1;
const STREAM_STATIC_MP: u64 = 2;
const STREAM_ARRIVALS: u64 = 3;
const STREAM_READ_NOISE: u64 = 4;
const STREAM_DYNAMIC_MP: u64 = 5;
const STREAM_FLIPS: u64 = 6;
const STREAM_RSSI: u64 = 7;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Sensor, line and reader configuration for trace generation.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    pub curve: ForceCapacitanceCurve,
    pub line: LineSpec,
    pub plan: ChannelPlan,
    pub profile: ReaderProfile,
    pub multipath: MultipathModel,
}

impl LinkSimulator {
    pub fn new(
        curve: ForceCapacitanceCurve,
        line: LineSpec,
        plan: ChannelPlan,
        profile: ReaderProfile,
        multipath: MultipathModel,
    ) -> Result<Self> {
        line.validate()?;
        profile.validate(plan.channel_count())?;
        multipath.validate()?;
        Ok(Self {
            curve,
            line,
            plan,
            profile,
            multipath,
        })
    }

    /// Per-channel hopping offsets the run with `seed` will use.
    pub fn channel_offsets(&self, seed: u64) -> Vec<f64> {
        let n = self.plan.channel_count();
        match &self.profile.per_channel_offset {
            OffsetSpec::Zero => vec![0.0; n],
            OffsetSpec::Fixed(v) => v.clone(),
            OffsetSpec::Uniform => {
                let mut rng = stream(seed, STREAM_OFFSETS);
                match self.profile.phase_step_deg {
                    Some(step) => {
                        let steps = (360.0 / step).round() as u32;
                        (0..n).map(|_| rng.random_range(0..steps) as f64 * step).collect()
                    }
                    None => (0..n).map(|_| rng.random_range(0.0..360.0)).collect(),
                }
            }
        }
    }

    /// Noise-free sensor phase contribution on `channel` under `force`.
    pub fn sensor_phase(&self, force: f64, channel: usize) -> Result<f64> {
        let f = self
            .plan
            .frequency(channel)
            .ok_or_else(|| Error::input(format!("channel {channel} not in plan")))?;
        reflect_phase(self.curve.capacitance_at(force)?, &self.line.with_frequency(f))
    }

    /// Reported phase for a true phase plus channel offset. A grid-valued
    /// offset is added as a whole number of steps after rounding, so it
    /// shifts the report by exactly that many steps.
    fn report(&self, phase: f64, offset: f64) -> f64 {
        match self.profile.phase_step_deg {
            None => wrap360(phase + offset),
            Some(step) => {
                let steps = (360.0 / step).round() as i64;
                let k = offset / step;
                let (base, shift) = if (k - k.round()).abs() < 1e-9 {
                    (phase, k.round() as i64)
                } else {
                    (phase + offset, 0)
                };
                let m = ((wrap360(base) / step).round() as i64 + shift).rem_euclid(steps);
                m as f64 * step
            }
        }
    }

    /// Generates every read in `[0, duration)`. Deterministic in `seed`.
    pub fn simulate(&self, timeline: &ForceTimeline, duration: f64, seed: u64) -> Result<Vec<TagReadRecord>> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::input(format!("duration must be >= 0, got {duration}")));
        }
        if duration == 0.0 {
            return Ok(Vec::new());
        }
        if timeline.start() > 0.0 {
            return Err(Error::Simulation {
                time: 0.0,
                reason: format!("force timeline starts at {} s", timeline.start()),
            });
        }
        let max_force = self.curve.max_force();
        for &(t, f) in timeline.breakpoints() {
            if t < duration && !(0.0..=max_force).contains(&f) {
                return Err(Error::Simulation {
                    time: t.max(0.0),
                    reason: format!("force {f} N outside curve domain [0, {max_force}] N"),
                });
            }
        }

        let n = self.plan.channel_count();
        let offsets = self.channel_offsets(seed);
        let static_mp: Vec<f64> = {
            let mut rng = stream(seed, STREAM_STATIC_MP);
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    self.multipath.static_sigma * z
                })
                .collect()
        };
        let flips = {
            let mut rng = stream(seed, STREAM_FLIPS);
            let slots = self.plan.slot_at(duration) as usize + 1;
            let mut state = false;
            let mut v = Vec::with_capacity(slots);
            v.push(state);
            for _ in 1..slots {
                let u: f64 = rng.random();
                if u < self.profile.flip_probability {
                    state = !state;
                }
                v.push(state);
            }
            v
        };

        let gap = Exp::new(self.profile.reads_per_second).map_err(|e| Error::input(e.to_string()))?;
        let mut arrivals = stream(seed, STREAM_ARRIVALS);
        let mut read_noise = stream(seed, STREAM_READ_NOISE);
        let mut dyn_noise = stream(seed, STREAM_DYNAMIC_MP);
        let mut rssi_noise = stream(seed, STREAM_RSSI);
        let dyn_sigma = if self.multipath.dynamic_enabled {
            self.multipath.dynamic_sigma
        } else {
            0.0
        };

        let mut out = Vec::new();
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut arrivals);
            if t >= duration {
                break;
            }
            let ch = self.plan.channel_at(t);
            let force = timeline.force_at(t).ok_or_else(|| Error::Simulation {
                time: t,
                reason: "no force defined".into(),
            })?;
            let sensor = self.sensor_phase(force, ch).map_err(|e| Error::Simulation {
                time: t,
                reason: e.to_string(),
            })?;
            let z_read: f64 = StandardNormal.sample(&mut read_noise);
            let z_dyn: f64 = StandardNormal.sample(&mut dyn_noise);
            let z_rssi: f64 = StandardNormal.sample(&mut rssi_noise);
            let flip = if flips[self.plan.slot_at(t) as usize] { 180.0 } else { 0.0 };

            let inner = sensor + static_mp[ch] + dyn_sigma * z_dyn + self.profile.phase_noise_sigma * z_read + flip;
            let phase = self.report(inner, offsets[ch]);
            let rssi = self.profile.rssi_base - self.profile.rssi_force_dip * force / max_force
                + self.profile.rssi_noise_sigma * z_rssi;

            out.push(TagReadRecord {
                timestamp: t,
                epc: self.profile.tag_epc.clone(),
                channel_index: ch,
                frequency: self.plan.center_frequencies()[ch],
                phase_deg: phase,
                rssi_dbm: rssi,
            });
        }
        Ok(out)
    }
}

/// Free-function form of [`LinkSimulator::simulate`].
#[allow(clippy::too_many_arguments)]
pub fn simulate_trace(
    curve: &ForceCapacitanceCurve,
    line: &LineSpec,
    plan: &ChannelPlan,
    profile: &ReaderProfile,
    multipath: &MultipathModel,
    timeline: &ForceTimeline,
    duration: f64,
    seed: u64,
) -> Result<Vec<TagReadRecord>> {
    LinkSimulator::new(curve.clone(), *line, plan.clone(), profile.clone(), multipath.clone())?.simulate(
        timeline, duration, seed,
    )
}
