use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order in which the reader visits channels. The order repeats every
/// `channel_count` hops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopOrder {
    Sequential,
    Shuffled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    center_frequencies: Vec<f64>,
    hop_interval: f64,
    hop_order: HopOrder,
    sequence: Vec<usize>,
}

impl ChannelPlan {
    pub fn new(center_frequencies: Vec<f64>, hop_interval: f64, hop_order: HopOrder) -> Result<Self> {
        if center_frequencies.is_empty() {
            return Err(Error::input("channel plan needs at least one channel"));
        }
        if center_frequencies.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::input("channel frequencies must be positive"));
        }
        if center_frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("channel frequencies must be strictly increasing"));
        }
        if !(hop_interval > 0.0) || !hop_interval.is_finite() {
            return Err(Error::input(format!("hop interval must be > 0, got {hop_interval}")));
        }
        let mut sequence: Vec<usize> = (0..center_frequencies.len()).collect();
        if let HopOrder::Shuffled { seed } = hop_order {
            sequence.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        Ok(Self {
            center_frequencies,
            hop_interval,
            hop_order,
            sequence,
        })
    }

    /// Uniform grid `first + k·spacing` for `k = 0..count`.
    pub fn uniform(count: usize, first: f64, spacing: f64, hop_interval: f64, hop_order: HopOrder) -> Result<Self> {
        Self::new(
            (0..count).map(|k| first + k as f64 * spacing).collect(),
            hop_interval,
            hop_order,
        )
    }

    /// 50 channels at 902.25 + 0.5k MHz, hopping every 200 ms in the shuffled
    /// order fixed by `seed`.
    pub fn fcc(seed: u64) -> Self {
        Self::uniform(50, 902.25e6, 0.5e6, 0.2, HopOrder::Shuffled { seed })
            .expect("static plan is valid")
    }

    pub fn channel_count(&self) -> usize {
        self.center_frequencies.len()
    }

    pub fn center_frequencies(&self) -> &[f64] {
        &self.center_frequencies
    }

    pub fn frequency(&self, channel: usize) -> Option<f64> {
        self.center_frequencies.get(channel).copied()
    }

    pub fn hop_interval(&self) -> f64 {
        self.hop_interval
    }

    pub fn hop_order(&self) -> &HopOrder {
        &self.hop_order
    }

    /// Channel visit order within one hop cycle.
    pub fn hop_sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Duration of a full pass over every channel.
    pub fn cycle_duration(&self) -> f64 {
        self.hop_interval * self.channel_count() as f64
    }

    /// Index of the dwell slot containing `t`.
    pub fn slot_at(&self, t: f64) -> u64 {
        (t / self.hop_interval).floor().max(0.0) as u64
    }

    /// Channel active at time `t >= 0`.
    pub fn channel_at(&self, t: f64) -> usize {
        let slot = self.slot_at(t);
        self.sequence[(slot % self.sequence.len() as u64) as usize]
    }
}

/// The FCC-style plan with a fixed shuffle seed.
pub fn default_channel_plan() -> ChannelPlan {
    ChannelPlan::fcc(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_grid() {
        let p = default_channel_plan();
        assert_eq!(p.channel_count(), 50);
        assert_eq!(p.frequency(0), Some(902.25e6));
        assert_eq!(p.frequency(49), Some(926.75e6));
        assert!(p.center_frequencies().iter().all(|&f| (900e6..=930e6).contains(&f)));
        assert_eq!(p.hop_interval(), 0.2);
    }

    #[test]
    fn same_seed_same_plan() {
        assert_eq!(ChannelPlan::fcc(9), ChannelPlan::fcc(9));
        assert_ne!(ChannelPlan::fcc(9).hop_sequence(), ChannelPlan::fcc(10).hop_sequence());
    }

    #[test]
    fn sequence_is_a_permutation() {
        let p = ChannelPlan::fcc(3);
        let mut s = p.hop_sequence().to_vec();
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn schedule_repeats_each_cycle() {
        let p = ChannelPlan::fcc(5);
        for i in 0..50 {
            let t = 0.2 * i as f64 + 0.1;
            assert_eq!(p.channel_at(t), p.hop_sequence()[i]);
            assert_eq!(p.channel_at(t + p.cycle_duration()), p.channel_at(t));
        }
    }

    #[test]
    fn invalid_plans() {
        assert!(ChannelPlan::new(vec![], 0.2, HopOrder::Sequential).is_err());
        assert!(ChannelPlan::new(vec![2.0, 1.0], 0.2, HopOrder::Sequential).is_err());
        assert!(ChannelPlan::new(vec![1.0, 2.0], 0.0, HopOrder::Sequential).is_err());
    }
}
