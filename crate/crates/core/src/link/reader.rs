use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase resolution of a reader reporting 4096 steps per turn.
pub const READER_PHASE_STEP_DEG: f64 = 360.0 / 4096.0;

/// Source of the per-channel hopping offsets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetSpec {
    /// Drawn once per run, uniform over `[0, 360)` (on the reporting grid
    /// when phases are quantized).
    #[default]
    Uniform,
    Zero,
    /// One fixed offset per channel, degrees.
    Fixed(Vec<f64>),
}

/// Reader reporting behaviour and artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderProfile {
    pub tag_epc: String,
    pub reads_per_second: f64,
    pub per_channel_offset: OffsetSpec,
    /// Probability that the latched 180° flip state toggles at a hop boundary.
    pub flip_probability: f64,
    pub phase_noise_sigma: f64,
    /// Reported phase resolution; `None` reports unquantized phase.
    pub phase_step_deg: Option<f64>,
    pub rssi_base: f64,
    /// RSSI drop at the curve's maximum force, dB.
    pub rssi_force_dip: f64,
    pub rssi_noise_sigma: f64,
}

impl Default for ReaderProfile {
    fn default() -> Self {
        Self {
            tag_epc: "E28011606000020400001F2A".into(),
            reads_per_second: 90.0,
            per_channel_offset: OffsetSpec::Uniform,
            flip_probability: 0.05,
            phase_noise_sigma: 2.0,
            phase_step_deg: Some(READER_PHASE_STEP_DEG),
            rssi_base: -55.0,
            rssi_force_dip: 1.0,
            rssi_noise_sigma: 0.1,
        }
    }
}

impl ReaderProfile {
    /// Default rates and offsets with every noise source and artifact off.
    pub fn noiseless() -> Self {
        Self {
            flip_probability: 0.0,
            phase_noise_sigma: 0.0,
            rssi_noise_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, channel_count: usize) -> Result<()> {
        if !(self.reads_per_second > 0.0) || !self.reads_per_second.is_finite() {
            return Err(Error::input(format!(
                "reads_per_second must be > 0, got {}",
                self.reads_per_second
            )));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::input(format!(
                "flip_probability must be in [0, 1], got {}",
                self.flip_probability
            )));
        }
        if !(self.phase_noise_sigma >= 0.0) || !(self.rssi_noise_sigma >= 0.0) {
            return Err(Error::input("noise sigmas must be >= 0"));
        }
        if let Some(step) = self.phase_step_deg {
            let n = 360.0 / step;
            if !(step > 0.0) || (n - n.round()).abs() > 1e-9 {
                return Err(Error::input(format!(
                    "phase step must divide 360 evenly, got {step}"
                )));
            }
        }
        if let OffsetSpec::Fixed(v) = &self.per_channel_offset {
            if v.len() != channel_count {
                return Err(Error::input(format!(
                    "{} fixed offsets for {channel_count} channels",
                    v.len()
                )));
            }
        }
        Ok(())
    }
}

/// Environmental multipath. Static offsets are per-channel constants drawn
/// once per run from N(0, static_sigma²); dynamic perturbations are
/// zero-mean Gaussian, independent per read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipathModel {
    pub static_sigma: f64,
    pub dynamic_sigma: f64,
    pub dynamic_enabled: bool,
}

impl Default for MultipathModel {
    fn default() -> Self {
        Self {
            static_sigma: 5.0,
            dynamic_sigma: 5.0,
            dynamic_enabled: false,
        }
    }
}

impl MultipathModel {
    pub fn none() -> Self {
        Self {
            static_sigma: 0.0,
            dynamic_sigma: 0.0,
            dynamic_enabled: false,
        }
    }

    pub fn dynamic(sigma: f64) -> Self {
        Self {
            dynamic_sigma: sigma,
            dynamic_enabled: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.static_sigma >= 0.0) || !(self.dynamic_sigma >= 0.0) {
            return Err(Error::input("multipath sigmas must be >= 0"));
        }
        Ok(())
    }
}
