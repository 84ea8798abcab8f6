//! Sensor design exploration.
//!
//! Each candidate geometry/material pair is pushed through the hyperelastic
//! capacitance model and the reflect-phase equation to find the phase swing
//! Δφ it delivers over its rated force range.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor::{
    build_capacitance_curve, force_grid, nominal_capacitance, solve_compression, CurveMode, Interpolation,
    MaterialSpec, SensorGeometry,
};
use crate::transduction::{delta_phi, reflect_phase, LineSpec};

const PF: f64 = 1e-12;

/// Nominal-capacitance band a design should sit in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceBand {
    pub min: f64,
    pub max: f64,
}

impl CapacitanceBand {
    /// 0.5–20 pF.
    pub const RELAXED: Self = Self {
        min: 0.5 * PF,
        max: 20.0 * PF,
    };
    /// 1–10 pF, where Δφ peaks at 900 MHz.
    pub const STRICT: Self = Self {
        min: 1.0 * PF,
        max: 10.0 * PF,
    };

    pub fn contains(&self, c: f64) -> bool {
        c >= self.min && c <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCandidate {
    pub geometry: SensorGeometry,
    pub material: MaterialSpec,
    pub c0: f64,
    pub c_max: f64,
    pub delta_phi_deg: f64,
    pub force_max: f64,
    /// Set when `c0` falls outside the sweep's capacitance band.
    pub out_of_band: bool,
}

/// Builds the hyperelastic curve over `[0, f_max]` and reports its Δφ.
pub fn evaluate_design(
    geometry: &SensorGeometry,
    material: &MaterialSpec,
    f_max: f64,
    line: &LineSpec,
) -> Result<DesignCandidate> {
    if !(f_max >= 0.0) || !f_max.is_finite() {
        return Err(Error::input(format!("f_max must be >= 0, got {f_max}")));
    }
    let (c0, c_max) = if f_max == 0.0 {
        let c0 = nominal_capacitance(geometry, material)?;
        (c0, c0)
    } else {
        let curve = build_capacitance_curve(
            geometry,
            material,
            &CurveMode::Hyperelastic,
            &force_grid(f_max, 2),
            Interpolation::MonotoneCubic,
        )?;
        (curve.c0(), curve.capacitance_at(f_max)?)
    };
    Ok(DesignCandidate {
        geometry: geometry.clone(),
        material: material.clone(),
        c0,
        c_max,
        delta_phi_deg: delta_phi(c0, c_max, line)?,
        force_max: f_max,
        out_of_band: !CapacitanceBand::RELAXED.contains(c0),
    })
}

fn geometry_key(g: &SensorGeometry) -> [f64; 4] {
    [g.length, g.width, g.dielectric_thickness, g.electrode_thickness]
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Evaluates every geometry × material pair, ranked by Δφ (descending, ties
/// broken by geometry then material).
pub fn sweep_designs(
    geometries: &[SensorGeometry],
    materials: &[MaterialSpec],
    f_max: f64,
    line: &LineSpec,
    band: CapacitanceBand,
) -> Result<Vec<DesignCandidate>> {
    if geometries.is_empty() || materials.is_empty() {
        return Err(Error::input("design sweep needs at least one geometry and one material"));
    }
    let mut out = Vec::with_capacity(geometries.len() * materials.len());
    for g in geometries {
        for m in materials {
            let mut c = evaluate_design(g, m, f_max, line)?;
            c.out_of_band = !band.contains(c.c0);
            out.push(c);
        }
    }
    out.sort_by(|a, b| {
        b.delta_phi_deg
            .total_cmp(&a.delta_phi_deg)
            .then_with(|| lexicographic(&geometry_key(&a.geometry), &geometry_key(&b.geometry)))
            .then_with(|| {
                lexicographic(
                    &[a.material.relative_permittivity, a.material.shear_modulus],
                    &[b.material.relative_permittivity, b.material.shear_modulus],
                )
            })
            .then_with(|| a.material.name.cmp(&b.material.name))
    });
    Ok(out)
}

fn capacitance_ratio(geometry: &SensorGeometry, material: &MaterialSpec, f_max: f64) -> Result<f64> {
    Ok(1.0 / solve_compression(f_max, geometry, material)?)
}

/// Shear modulus for which `C(f_max)/C(0) = target_ratio`, found by
/// bisection on log μ.
pub fn calibrate_modulus(
    geometry: &SensorGeometry,
    material: &MaterialSpec,
    f_max: f64,
    target_ratio: f64,
) -> Result<f64> {
    if !(target_ratio > 1.0) || !target_ratio.is_finite() {
        return Err(Error::Calibration(format!(
            "target capacitance ratio must be > 1, got {target_ratio}"
        )));
    }
    if !(f_max > 0.0) || !f_max.is_finite() {
        return Err(Error::Calibration(format!("f_max must be > 0, got {f_max}")));
    }
    // ratio decreases as μ grows
    let ratio_at = |log_mu: f64| capacitance_ratio(geometry, &material.with_shear_modulus(log_mu.exp()), f_max);
    let (mut lo, mut hi) = (1e-3_f64.ln(), 1e15_f64.ln());
    let r_lo = ratio_at(lo)?;
    let r_hi = ratio_at(hi)?;
    if !(r_lo > target_ratio && r_hi < target_ratio) {
        return Err(Error::Calibration(format!(
            "ratio {target_ratio} not bracketed by μ in [1e-3, 1e15] Pa (ratios {r_hi}..{r_lo})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = ratio_at(mid)?;
        if ((r - target_ratio) / target_ratio).abs() < 1e-9 {
            return Ok(mid.exp());
        }
        if r > target_ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = (0.5 * (lo + hi)).exp();
    let r = capacitance_ratio(geometry, &material.with_shear_modulus(mu), f_max)?;
    if ((r - target_ratio) / target_ratio).abs() < 1e-6 {
        Ok(mu)
    } else {
        Err(Error::Calibration(format!("bisection stalled at ratio {r}")))
    }
}

/// Capacitance ratio that makes a sensor with nominal `c0` swing by
/// `target_deg` of reflect phase.
pub fn ratio_for_delta_phi(c0: f64, target_deg: f64, line: &LineSpec) -> Result<f64> {
    let phi0 = reflect_phase(c0, line)?;
    if !(target_deg > 0.0 && target_deg < phi0) {
        return Err(Error::Calibration(format!(
            "Δφ target {target_deg} deg unreachable from φ(C0) = {phi0} deg"
        )));
    }
    let x = ((phi0 - target_deg) / 2.0).to_radians().tan();
    let c_max = 1.0 / (line.characteristic_impedance * line.angular_frequency() * x);
    Ok(c_max / c0)
}

/// A named design whose shear modulus is tuned so the rated force produces
/// a chosen phase swing. These are qualitative reproductions: the elastic
/// parameters are fitted, not measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPreset {
    pub name: String,
    pub geometry: SensorGeometry,
    pub material: MaterialSpec,
    pub force_max: f64,
    pub target_delta_phi_deg: f64,
}

impl DesignPreset {
    /// 0–2 N: 1 mm × 1 mm plates over 0.1 mm of soft silicone.
    pub fn low_force() -> Self {
        Self {
            name: "low-force".into(),
            geometry: SensorGeometry {
                length: 1e-3,
                width: 1e-3,
                dielectric_thickness: 0.1e-3,
                electrode_thickness: 35e-6,
            },
            material: MaterialSpec {
                name: "soft-silicone".into(),
                relative_permittivity: 2.8,
                shear_modulus: 50e3,
            },
            force_max: 2.0,
            target_delta_phi_deg: 15.0,
        }
    }

    /// 0–6 N reference sensor.
    pub fn reference() -> Self {
        Self {
            name: "reference".into(),
            geometry: SensorGeometry::reference(),
            material: MaterialSpec::ecoflex(),
            force_max: 6.0,
            target_delta_phi_deg: 15.0,
        }
    }

    /// 0–60 N: 4 mm × 4 mm plates over 0.5 mm neoprene (εᵣ 6.7 assumed).
    pub fn high_force() -> Self {
        Self {
            name: "high-force".into(),
            geometry: SensorGeometry {
                length: 4e-3,
                width: 4e-3,
                dielectric_thickness: 0.5e-3,
                electrode_thickness: 35e-6,
            },
            material: MaterialSpec {
                name: "neoprene".into(),
                relative_permittivity: 6.7,
                shear_modulus: 1e6,
            },
            force_max: 60.0,
            target_delta_phi_deg: 15.0,
        }
    }

    pub fn all() -> Vec<Self> {
        vec![Self::low_force(), Self::reference(), Self::high_force()]
    }

    /// Fits μ to the target swing and evaluates the result.
    pub fn calibrated(&self, line: &LineSpec) -> Result<DesignCandidate> {
        let c0 = nominal_capacitance(&self.geometry, &self.material)?;
        let ratio = ratio_for_delta_phi(c0, self.target_delta_phi_deg, line)?;
        let mu = calibrate_modulus(&self.geometry, &self.material, self.force_max, ratio)?;
        evaluate_design(&self.geometry, &self.material.with_shear_modulus(mu), self.force_max, line)
    }
}

/// CSV export: `len_mm,wid_mm,d_mm,eps_r,mu_kpa,c0_pf,cmax_pf,delta_phi_deg,flag`.
pub fn write_design_csv<W: Write>(candidates: &[DesignCandidate], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "len_mm", "wid_mm", "d_mm", "eps_r", "mu_kpa", "c0_pf", "cmax_pf", "delta_phi_deg", "flag",
    ])?;
    for c in candidates {
        w.write_record([
            (c.geometry.length * 1e3).to_string(),
            (c.geometry.width * 1e3).to_string(),
            (c.geometry.dielectric_thickness * 1e3).to_string(),
            c.material.relative_permittivity.to_string(),
            (c.material.shear_modulus / 1e3).to_string(),
            (c.c0 / PF).to_string(),
            (c.c_max / PF).to_string(),
            c.delta_phi_deg.to_string(),
            if c.out_of_band { "out-of-band" } else { "ok" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_design_swing() {
        let c = evaluate_design(&SensorGeometry::reference(), &MaterialSpec::ecoflex(), 6.0, &LineSpec::default())
            .unwrap();
        assert!((15.0..=22.0).contains(&c.delta_phi_deg), "{}", c.delta_phi_deg);
        assert!(!c.out_of_band);
    }

    #[test]
    fn zero_force_zero_swing() {
        let c = evaluate_design(&SensorGeometry::reference(), &MaterialSpec::ecoflex(), 0.0, &LineSpec::default())
            .unwrap();
        assert_eq!(c.delta_phi_deg, 0.0);
        assert_eq!(c.c0, c.c_max);
    }

    #[test]
    fn halving_gap_doubles_c0() {
        let g = SensorGeometry::reference();
        let thin = SensorGeometry {
            dielectric_thickness: g.dielectric_thickness / 2.0,
            ..g.clone()
        };
        let line = LineSpec::default();
        let a = evaluate_design(&g, &MaterialSpec::ecoflex(), 6.0, &line).unwrap();
        let b = evaluate_design(&thin, &MaterialSpec::ecoflex(), 6.0, &line).unwrap();
        assert!((b.c0 / a.c0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_modulus() {
        // closed form: λ = 1/1.65, μ = 6 / (A (λ⁻² − λ)) = 354368.758 Pa
        let mu = calibrate_modulus(&SensorGeometry::reference(), &MaterialSpec::ecoflex(), 6.0, 1.65).unwrap();
        assert!((mu - 354368.75827755313).abs() / mu < 1e-6);
        assert!((mu / 1e3 - 354.0).abs() < 1.0);
    }

    #[test]
    fn doubling_force_doubles_modulus() {
        let g = SensorGeometry::reference();
        let m = MaterialSpec::ecoflex();
        let a = calibrate_modulus(&g, &m, 6.0, 1.65).unwrap();
        let b = calibrate_modulus(&g, &m, 12.0, 1.65).unwrap();
        assert!((b / a - 2.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_ratio_rejected() {
        let r = calibrate_modulus(&SensorGeometry::reference(), &MaterialSpec::ecoflex(), 6.0, 1.0);
        assert!(matches!(r, Err(Error::Calibration(_))));
    }

    #[test]
    fn stiffer_material_swings_less() {
        let g = SensorGeometry::reference();
        let line = LineSpec::default();
        let soft = evaluate_design(&g, &MaterialSpec::ecoflex(), 6.0, &line).unwrap();
        let stiff = evaluate_design(&g, &MaterialSpec::ecoflex().with_shear_modulus(1e6), 6.0, &line).unwrap();
        assert!(stiff.delta_phi_deg < soft.delta_phi_deg);
    }

    #[test]
    fn sweep_ranks_reference_above_100pf_variant() {
        let g = SensorGeometry::reference();
        let big = SensorGeometry {
            dielectric_thickness: 2e-6,
            ..g.clone()
        };
        let ranked = sweep_designs(
            &[big.clone(), g.clone()],
            &[MaterialSpec::ecoflex()],
            6.0,
            &LineSpec::default(),
            CapacitanceBand::RELAXED,
        )
        .unwrap();
        assert_eq!(ranked[0].geometry, g);
        assert!((ranked[1].c0 / PF - 99.12).abs() < 0.01);
        assert!(ranked[1].out_of_band);
        assert!(!ranked[0].out_of_band);
    }

    #[test]
    fn empty_sweep_rejected() {
        assert!(sweep_designs(&[], &[MaterialSpec::ecoflex()], 6.0, &LineSpec::default(), CapacitanceBand::RELAXED)
            .is_err());
    }

    #[test]
    fn low_force_preset_reaches_target() {
        let c = DesignPreset::low_force().calibrated(&LineSpec::default()).unwrap();
        assert!(c.delta_phi_deg >= 10.0);
        assert!((c.delta_phi_deg - 15.0).abs() < 1e-3);
    }

    #[test]
    fn presets_hit_fifteen_degrees() {
        for p in DesignPreset::all() {
            let c = p.calibrated(&LineSpec::default()).unwrap();
            assert!((c.delta_phi_deg - 15.0).abs() < 1e-3, "{}: {}", p.name, c.delta_phi_deg);
        }
    }

    #[test]
    fn ratio_for_swing_inverts_delta_phi() {
        let line = LineSpec::default();
        let r = ratio_for_delta_phi(PF, 18.444803619704473, &line).unwrap();
        assert!((r - 1.65).abs() < 1e-9);
        assert!(ratio_for_delta_phi(PF, 170.0, &line).is_err());
    }

    #[test]
    fn csv_header() {
        let c = evaluate_design(&SensorGeometry::reference(), &MaterialSpec::ecoflex(), 6.0, &LineSpec::default())
            .unwrap();
        let mut buf = Vec::new();
        write_design_csv(&[c], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("len_mm,wid_mm,d_mm,eps_r,mu_kpa,c0_pf,cmax_pf,delta_phi_deg,flag\n4,2,0.2,2.8,354.3,"));
    }
}
