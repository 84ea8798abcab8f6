//! Declarative TOML scenario files.
//!
//! Every section is optional and falls back to the reference setup: the
//! anchored 1 → 1.65 pF curve, a 50 Ω line at 900 MHz, the 50-channel plan,
//! the default noisy reader, static multipath, and a 0 → 3 N step at 6 s
//! observed through `[0, 2)` / `[10, 12)` windows. Unknown keys are
//! rejected and errors carry the offending field path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::TimeWindow;
use crate::link::{ChannelPlan, ForceTimeline, HopOrder, LinkSimulator, MultipathModel, OffsetSpec, ReaderProfile};
use crate::sensor::{
    build_capacitance_curve, force_grid, CurveMode, ForceCapacitanceCurve, Interpolation, MaterialSpec,
    SensorGeometry,
};
use crate::transduction::LineSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub duration_s: f64,
    pub sensor: SensorSection,
    pub line: LineSection,
    pub plan: PlanSection,
    pub reader: ReaderSection,
    pub multipath: MultipathSection,
    pub timeline: TimelineSection,
    pub windows: WindowSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: None,
            duration_s: 12.0,
            sensor: SensorSection::default(),
            line: LineSection::default(),
            plan: PlanSection::default(),
            reader: ReaderSection::default(),
            multipath: MultipathSection::default(),
            timeline: TimelineSection::default(),
            windows: WindowSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveModeName {
    #[default]
    Anchored,
    Hyperelastic,
    UserTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSection {
    pub mode: CurveModeName,
    /// `[force_n, capacitance_pf]` pairs for anchored and user-table modes.
    pub points_pf: Vec<[f64; 2]>,
    pub interpolation: Interpolation,
    /// Hyperelastic sampling grid.
    pub max_force_n: f64,
    pub grid_points: usize,
    pub geometry: GeometrySection,
    pub material: MaterialSection,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            mode: CurveModeName::Anchored,
            points_pf: vec![[0.0, 1.0], [6.0, 1.65]],
            interpolation: Interpolation::MonotoneCubic,
            max_force_n: 6.0,
            grid_points: 25,
            geometry: GeometrySection::default(),
            material: MaterialSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub length_mm: f64,
    pub width_mm: f64,
    pub dielectric_mm: f64,
    pub electrode_mm: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            length_mm: 4.0,
            width_mm: 2.0,
            dielectric_mm: 0.2,
            electrode_mm: 0.035,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSection {
    pub name: String,
    pub relative_permittivity: f64,
    pub shear_modulus_kpa: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        let m = MaterialSpec::ecoflex();
        Self {
            name: m.name,
            relative_permittivity: m.relative_permittivity,
            shear_modulus_kpa: m.shear_modulus / 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineSection {
    pub impedance_ohm: f64,
    pub frequency_mhz: f64,
}

impl Default for LineSection {
    fn default() -> Self {
        Self {
            impedance_ohm: 50.0,
            frequency_mhz: 900.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopOrderName {
    Sequential,
    #[default]
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub channels: usize,
    pub first_mhz: f64,
    pub spacing_mhz: f64,
    pub hop_interval_s: f64,
    pub order: HopOrderName,
    pub order_seed: u64,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            channels: 50,
            first_mhz: 902.25,
            spacing_mhz: 0.5,
            hop_interval_s: 0.2,
            order: HopOrderName::Shuffled,
            order_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReaderSection {
    pub epc: String,
    pub reads_per_second: f64,
    /// `"uniform"`, `"zero"`, or `{ fixed = [..] }` in degrees.
    pub offsets: OffsetSpec,
    pub flip_probability: f64,
    pub phase_noise_deg: f64,
    pub quantize: bool,
    pub phase_step_deg: f64,
    pub rssi_base_dbm: f64,
    pub rssi_force_dip_db: f64,
    pub rssi_noise_db: f64,
}

impl Default for ReaderSection {
    fn default() -> Self {
        let p = ReaderProfile::default();
        Self {
            epc: p.tag_epc,
            reads_per_second: p.reads_per_second,
            offsets: p.per_channel_offset,
            flip_probability: p.flip_probability,
            phase_noise_deg: p.phase_noise_sigma,
            quantize: true,
            phase_step_deg: p.phase_step_deg.unwrap_or(crate::link::READER_PHASE_STEP_DEG),
            rssi_base_dbm: p.rssi_base,
            rssi_force_dip_db: p.rssi_force_dip,
            rssi_noise_db: p.rssi_noise_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultipathSection {
    pub static_sigma_deg: f64,
    pub dynamic_sigma_deg: f64,
    pub dynamic: bool,
}

impl Default for MultipathSection {
    fn default() -> Self {
        let m = MultipathModel::default();
        Self {
            static_sigma_deg: m.static_sigma,
            dynamic_sigma_deg: m.dynamic_sigma,
            dynamic: m.dynamic_enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimelineSection {
    /// `[time_s, force_n]` breakpoints; each force holds until the next.
    pub breakpoints: Vec<[f64; 2]>,
}

impl Default for TimelineSection {
    fn default() -> Self {
        Self {
            breakpoints: vec![[0.0, 0.0], [6.0, 3.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    pub baseline: [f64; 2],
    pub event: [f64; 2],
}

impl Default for WindowSection {
    fn default() -> Self {
        Self {
            baseline: [0.0, 2.0],
            event: [10.0, 12.0],
        }
    }
}

/// A validated scenario ready to simulate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub simulator: LinkSimulator,
    pub timeline: ForceTimeline,
    pub duration: f64,
    pub baseline: TimeWindow,
    pub event: TimeWindow,
    pub seed: Option<u64>,
}

fn config_error(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

fn at(path: &'static str) -> impl Fn(Error) -> Error {
    move |e| config_error(path, e.to_string())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(if path == "." { "" } else { &path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn curve(&self) -> Result<ForceCapacitanceCurve> {
        let s = &self.sensor;
        let g = &s.geometry;
        let geometry = SensorGeometry::new(
            g.length_mm * 1e-3,
            g.width_mm * 1e-3,
            g.dielectric_mm * 1e-3,
            g.electrode_mm * 1e-3,
        )
        .map_err(at("sensor.geometry"))?;
        let material = MaterialSpec::new(
            s.material.name.clone(),
            s.material.relative_permittivity,
            s.material.shear_modulus_kpa * 1e3,
        )
        .map_err(at("sensor.material"))?;
        let points: Vec<(f64, f64)> = s.points_pf.iter().map(|p| (p[0], p[1] * 1e-12)).collect();
        let (mode, grid) = match s.mode {
            CurveModeName::Anchored => (CurveMode::Anchored(points), Vec::new()),
            CurveModeName::UserTable => (CurveMode::UserTable(points), Vec::new()),
            CurveModeName::Hyperelastic => {
                if s.grid_points < 2 || !(s.max_force_n > 0.0) {
                    return Err(config_error(
                        "sensor.grid_points",
                        "hyperelastic mode needs max_force_n > 0 and grid_points >= 2",
                    ));
                }
                (CurveMode::Hyperelastic, force_grid(s.max_force_n, s.grid_points))
            }
        };
        build_capacitance_curve(&geometry, &material, &mode, &grid, s.interpolation).map_err(at("sensor"))
    }

    pub fn line(&self) -> Result<LineSpec> {
        LineSpec::new(self.line.impedance_ohm, self.line.frequency_mhz * 1e6).map_err(at("line"))
    }

    pub fn plan(&self) -> Result<ChannelPlan> {
        let p = &self.plan;
        let order = match p.order {
            HopOrderName::Sequential => HopOrder::Sequential,
            HopOrderName::Shuffled => HopOrder::Shuffled { seed: p.order_seed },
        };
        ChannelPlan::uniform(p.channels, p.first_mhz * 1e6, p.spacing_mhz * 1e6, p.hop_interval_s, order)
            .map_err(at("plan"))
    }

    pub fn profile(&self) -> ReaderProfile {
        let r = &self.reader;
        ReaderProfile {
            tag_epc: r.epc.clone(),
            reads_per_second: r.reads_per_second,
            per_channel_offset: r.offsets.clone(),
            flip_probability: r.flip_probability,
            phase_noise_sigma: r.phase_noise_deg,
            phase_step_deg: r.quantize.then_some(r.phase_step_deg),
            rssi_base: r.rssi_base_dbm,
            rssi_force_dip: r.rssi_force_dip_db,
            rssi_noise_sigma: r.rssi_noise_db,
        }
    }

    pub fn multipath(&self) -> MultipathModel {
        MultipathModel {
            static_sigma: self.multipath.static_sigma_deg,
            dynamic_sigma: self.multipath.dynamic_sigma_deg,
            dynamic_enabled: self.multipath.dynamic,
        }
    }

    /// Validates every section into domain objects.
    pub fn build(&self) -> Result<Scenario> {
        if !(self.duration_s >= 0.0) || !self.duration_s.is_finite() {
            return Err(config_error("duration_s", format!("must be >= 0, got {}", self.duration_s)));
        }
        let plan = self.plan()?;
        self.profile().validate(plan.channel_count()).map_err(at("reader"))?;
        self.multipath().validate().map_err(at("multipath"))?;
        let simulator = LinkSimulator::new(self.curve()?, self.line()?, plan, self.profile(), self.multipath())?;
        let timeline = ForceTimeline::new(self.timeline.breakpoints.iter().map(|b| (b[0], b[1])).collect())
            .map_err(at("timeline.breakpoints"))?;
        let w = &self.windows;
        let baseline = TimeWindow::new(w.baseline[0], w.baseline[1]).map_err(at("windows.baseline"))?;
        let event = TimeWindow::new(w.event[0], w.event[1]).map_err(at("windows.event"))?;
        Ok(Scenario {
            simulator,
            timeline,
            duration: self.duration_s,
            baseline,
            event,
            seed: self.seed,
        })
    }
}
