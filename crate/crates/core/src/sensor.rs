//! Mechanical sensor model: force → dielectric compression → capacitance.
//!
//! The sensor is a parallel-plate capacitor with a soft polymer dielectric.
//! Two surrogate deformation models produce a [`ForceCapacitanceCurve`]:
//!
//! - anchored: monotone piecewise-cubic interpolation through known
//!   (force, capacitance) points, by default 1.0 pF at 0 N and 1.65 pF at 6 N;
//! - hyperelastic: incompressible neo-Hookean uniaxial compression, where the
//!   plate gap shrinks to `λ·d₀` and `C(F) = C₀ / λ(F)`.
//!
//! Capacitances are stored in farads everywhere except the CSV format, which
//! uses picofarads.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permittivity of free space used for the parallel-plate estimate, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.85e-12;

/// Shear modulus that makes the reference geometry reach C(6 N)/C(0) ≈ 1.65.
pub const REFERENCE_SHEAR_MODULUS: f64 = 354.3e3;

/// Default anchored curve points, (force N, capacitance F).
pub const DEFAULT_ANCHORS: [(f64, f64); 2] = [(0.0, 1.0e-12), (6.0, 1.65e-12)];

const PF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    /// εᵣ, dimensionless.
    pub relative_permittivity: f64,
    /// μ in Pa.
    pub shear_modulus: f64,
}

impl MaterialSpec {
    pub fn new(name: impl Into<String>, relative_permittivity: f64, shear_modulus: f64) -> Result<Self> {
        let m = Self {
            name: name.into(),
            relative_permittivity,
            shear_modulus,
        };
        m.validate()?;
        Ok(m)
    }

    /// Silicone elastomer with εᵣ = 2.8 and the reference shear modulus.
    pub fn ecoflex() -> Self {
        Self {
            name: "ecoflex-00-30".into(),
            relative_permittivity: 2.8,
            shear_modulus: REFERENCE_SHEAR_MODULUS,
        }
    }

    pub fn with_shear_modulus(&self, shear_modulus: f64) -> Self {
        Self {
            shear_modulus,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_permittivity >= 1.0) {
            return Err(Error::input(format!(
                "relative permittivity must be >= 1, got {}",
                self.relative_permittivity
            )));
        }
        if !(self.shear_modulus > 0.0) || !self.shear_modulus.is_finite() {
            return Err(Error::input(format!(
                "shear modulus must be > 0, got {}",
                self.shear_modulus
            )));
        }
        Ok(())
    }
}

/// Plate and dielectric dimensions, all in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub length: f64,
    pub width: f64,
    /// Uncompressed dielectric thickness d₀.
    pub dielectric_thickness: f64,
    /// Informational only; does not enter any model.
    pub electrode_thickness: f64,
}

impl SensorGeometry {
    pub fn new(length: f64, width: f64, dielectric_thickness: f64, electrode_thickness: f64) -> Result<Self> {
        let g = Self {
            length,
            width,
            dielectric_thickness,
            electrode_thickness,
        };
        g.validate()?;
        Ok(g)
    }

    /// 4 mm × 2 mm plates over a 0.2 mm dielectric.
    pub fn reference() -> Self {
        Self {
            length: 4e-3,
            width: 2e-3,
            dielectric_thickness: 0.2e-3,
            electrode_thickness: 35e-6,
        }
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("width", self.width),
            ("dielectric_thickness", self.dielectric_thickness),
            ("electrode_thickness", self.electrode_thickness),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Parallel-plate capacitance `A·εᵣ·ε₀ / d₀` in farads.
pub fn nominal_capacitance(geometry: &SensorGeometry, material: &MaterialSpec) -> Result<f64> {
    geometry.validate()?;
    material.validate()?;
    Ok(geometry.area() * material.relative_permittivity * VACUUM_PERMITTIVITY / geometry.dielectric_thickness)
}

/// Uniaxial stretch λ of an incompressible neo-Hookean layer under `force`.
///
/// Solves `F = μ·A·(λ⁻² − λ)` by bisection; λ = 1 exactly at zero force.
pub fn solve_compression(force: f64, geometry: &SensorGeometry, material: &MaterialSpec) -> Result<f64> {
    geometry.validate()?;
    material.validate()?;
    if !(force >= 0.0) || !force.is_finite() {
        return Err(Error::input(format!("force must be finite and >= 0, got {force}")));
    }
    if force == 0.0 {
        return Ok(1.0);
    }
    let stiffness = material.shear_modulus * geometry.area();
    let residual = |lambda: f64| stiffness * (lambda.powi(-2) - lambda) - force;
    let tol = 1e-9 * force.max(1.0);

    // residual is decreasing in λ and negative at λ = 1
    let mut lo = 0.5;
    while residual(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::Model(format!(
                "no compression bracket for F = {force} N (μA = {stiffness} N)"
            )));
        }
    }
    let mut hi = 1.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < tol {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // bracket collapsed to machine precision; residual is limited by λ⁻² scaling
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    AnchoredInterpolation,
    Hyperelastic,
    UserTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Fritsch–Carlson slope-limited cubic Hermite.
    #[default]
    MonotoneCubic,
    Linear,
}

/// How [`build_capacitance_curve`] obtains the curve.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveMode {
    /// Interpolate through `(force N, capacitance F)` anchors.
    Anchored(Vec<(f64, f64)>),
    /// Neo-Hookean compression evaluated on the force grid.
    Hyperelastic,
    /// Externally supplied samples, validated and passed through.
    UserTable(Vec<(f64, f64)>),
}

impl CurveMode {
    pub fn anchored_default() -> Self {
        CurveMode::Anchored(DEFAULT_ANCHORS.to_vec())
    }
}

/// Monotone force → capacitance mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceCapacitanceCurve {
    samples: Vec<(f64, f64)>,
    source: CurveSource,
    interpolation: Interpolation,
    tangents: Vec<f64>,
}

impl ForceCapacitanceCurve {
    /// Validates samples: forces strictly increasing from 0, capacitances
    /// positive and strictly increasing.
    pub fn from_samples(samples: Vec<(f64, f64)>, source: CurveSource, interpolation: Interpolation) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::input("a capacitance curve needs at least two samples"));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::input(format!(
                "curve must start at 0 N, starts at {} N",
                samples[0].0
            )));
        }
        for (i, &(f, c)) in samples.iter().enumerate() {
            if !f.is_finite() || !(c > 0.0) || !c.is_finite() {
                return Err(Error::input(format!("sample {i} is invalid: ({f} N, {c} F)")));
            }
            if i > 0 {
                let (pf, pc) = samples[i - 1];
                if !(f > pf) {
                    return Err(Error::input(format!("forces not strictly increasing at sample {i}")));
                }
                if !(c > pc) {
                    return Err(Error::input(format!(
                        "capacitances not strictly increasing at sample {i}"
                    )));
                }
            }
        }
        let tangents = match interpolation {
            Interpolation::MonotoneCubic => fritsch_carlson_tangents(&samples),
            Interpolation::Linear => Vec::new(),
        };
        Ok(Self {
            samples,
            source,
            interpolation,
            tangents,
        })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn source(&self) -> CurveSource {
        self.source
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn max_force(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn c0(&self) -> f64 {
        self.samples[0].1
    }

    /// Capacitance at `force`; no extrapolation past the sampled range.
    pub fn capacitance_at(&self, force: f64) -> Result<f64> {
        let max = self.max_force();
        if !(force >= 0.0 && force <= max) {
            return Err(Error::Range {
                value: force,
                min: 0.0,
                max,
            });
        }
        // first index with sample force > force, minus one
        let k = self.samples.partition_point(|&(f, _)| f <= force);
        if k == 0 {
            return Ok(self.samples[0].1);
        }
        let i = (k - 1).min(self.samples.len() - 2);
        let (x0, y0) = self.samples[i];
        let (x1, y1) = self.samples[i + 1];
        if force == x0 {
            return Ok(y0);
        }
        if force == x1 {
            return Ok(y1);
        }
        let h = x1 - x0;
        let t = (force - x0) / h;
        Ok(match self.interpolation {
            Interpolation::Linear => y0 + t * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (m0, m1) = (self.tangents[i], self.tangents[i + 1]);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
            }
        })
    }

    /// Writes `force_n,capacitance_pf` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["force_n", "capacitance_pf"])?;
        for &(f, c) in &self.samples {
            w.write_record([f.to_string(), (c / PF).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `force_n,capacitance_pf` table as a user-table curve.
    pub fn read_csv<R: Read>(reader: R, interpolation: Interpolation) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["force_n", "capacitance_pf"] {
            return Err(Error::Import {
                line: 1,
                reason: format!("expected header `force_n,capacitance_pf`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut samples = Vec::new();
        for (i, row) in r.deserialize::<(f64, f64)>().enumerate() {
            let (f, c) = row?;
            if !f.is_finite() || !c.is_finite() {
                return Err(Error::Import {
                    line: i + 2,
                    reason: "non-finite value".into(),
                });
            }
            samples.push((f, c * PF));
        }
        Self::from_samples(samples, CurveSource::UserTable, interpolation)
    }
}

fn fritsch_carlson_tangents(samples: &[(f64, f64)]) -> Vec<f64> {
    let n = samples.len();
    let secants: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for k in 1..n - 1 {
        m[k] = 0.5 * (secants[k - 1] + secants[k]);
    }
    for (k, &d) in secants.iter().enumerate() {
        let a = m[k] / d;
        let b = m[k + 1] / d;
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[k] = tau * a * d;
            m[k + 1] = tau * b * d;
        }
    }
    m
}

/// Builds the force → capacitance curve for a sensor.
///
/// `force_grid` is only used by the hyperelastic mode and must start at 0 N
/// and increase strictly.
pub fn build_capacitance_curve(
    geometry: &SensorGeometry,
    material: &MaterialSpec,
    mode: &CurveMode,
    force_grid: &[f64],
    interpolation: Interpolation,
) -> Result<ForceCapacitanceCurve> {
    let nominal = nominal_capacitance(geometry, material)?;
    let curve = match mode {
        CurveMode::Anchored(anchors) => {
            ForceCapacitanceCurve::from_samples(anchors.clone(), CurveSource::AnchoredInterpolation, interpolation)?
        }
        CurveMode::Hyperelastic => {
            let samples = force_grid
                .iter()
                .map(|&f| solve_compression(f, geometry, material).map(|lambda| (f, nominal / lambda)))
                .collect::<Result<Vec<_>>>()?;
            ForceCapacitanceCurve::from_samples(samples, CurveSource::Hyperelastic, interpolation)?
        }
        CurveMode::UserTable(samples) => {
            return ForceCapacitanceCurve::from_samples(samples.clone(), CurveSource::UserTable, interpolation);
        }
    };
    let rel = (curve.c0() - nominal).abs() / nominal;
    if rel > 0.01 {
        return Err(Error::input(format!(
            "curve C(0) = {:.4} pF differs from the geometry's nominal {:.4} pF by {:.2}%",
            curve.c0() / PF,
            nominal / PF,
            rel * 100.0
        )));
    }
    Ok(curve)
}

/// Evenly spaced force grid `0..=max_force` with `points` entries.
pub fn force_grid(max_force: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| max_force * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_nominal_capacitance() {
        let c = nominal_capacitance(&SensorGeometry::reference(), &MaterialSpec::ecoflex()).unwrap();
        assert_relative_eq!(c, 0.9912e-12, max_relative = 1e-12);
        assert!((c / 0.99e-12 - 1.0).abs() < 0.005);
    }

    #[test]
    fn small_plate_nominal_capacitance() {
        let g = SensorGeometry::new(1e-3, 1e-3, 0.1e-3, 35e-6).unwrap();
        let c = nominal_capacitance(&g, &MaterialSpec::ecoflex()).unwrap();
        assert_relative_eq!(c, 0.2478e-12, max_relative = 1e-12);
    }

    #[test]
    fn doubling_gap_halves_capacitance() {
        let g = SensorGeometry::reference();
        let g2 = SensorGeometry {
            dielectric_thickness: 2.0 * g.dielectric_thickness,
            ..g.clone()
        };
        let m = MaterialSpec::ecoflex();
        let c1 = nominal_capacitance(&g, &m).unwrap();
        let c2 = nominal_capacitance(&g2, &m).unwrap();
        assert_relative_eq!(c2, c1 / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(MaterialSpec::new("x", 0.5, 1e5).is_err());
        assert!(MaterialSpec::new("x", 2.0, 0.0).is_err());
        assert!(SensorGeometry::new(1e-3, -1e-3, 1e-4, 1e-5).is_err());
    }

    #[test]
    fn zero_force_is_identity() {
        let l = solve_compression(0.0, &SensorGeometry::reference(), &MaterialSpec::ecoflex()).unwrap();
        assert_eq!(l, 1.0);
    }

    #[test]
    fn six_newton_stretch() {
        // brentq on 354.3e3 * 8e-6 * (l^-2 - l) = 6 gives 0.606019471729622
        let l = solve_compression(6.0, &SensorGeometry::reference(), &MaterialSpec::ecoflex()).unwrap();
        assert!((l - 0.606019471729622).abs() < 1e-9);
    }

    #[test]
    fn negative_force_rejected() {
        let e = solve_compression(-1.0, &SensorGeometry::reference(), &MaterialSpec::ecoflex());
        assert!(matches!(e, Err(Error::Input(_))));
    }

    #[test]
    fn stretch_decreases_with_force() {
        let g = SensorGeometry::reference();
        let m = MaterialSpec::ecoflex();
        let mut prev = 1.0;
        for i in 1..=60 {
            let l = solve_compression(i as f64 * 0.1, &g, &m).unwrap();
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn anchored_default_endpoints() {
        let curve = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::anchored_default(),
            &[],
            Interpolation::MonotoneCubic,
        )
        .unwrap();
        assert_eq!(curve.capacitance_at(0.0).unwrap(), 1.0e-12);
        assert_eq!(curve.capacitance_at(6.0).unwrap(), 1.65e-12);
        assert_eq!(curve.source(), CurveSource::AnchoredInterpolation);
    }

    #[test]
    fn hyperelastic_endpoints() {
        let curve = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::Hyperelastic,
            &force_grid(6.0, 61),
            Interpolation::MonotoneCubic,
        )
        .unwrap();
        assert_relative_eq!(curve.capacitance_at(0.0).unwrap(), 0.9912e-12, max_relative = 1e-12);
        // 0.9912 pF / 0.606019471729622
        let c6 = curve.capacitance_at(6.0).unwrap();
        assert_relative_eq!(c6, 0.9912e-12 / 0.606019471729622, max_relative = 1e-8);
        assert!((c6 / 1e-12 - 1.64).abs() < 0.01);
        let ratio = c6 / curve.c0();
        assert!((1.60..=1.70).contains(&ratio));
    }

    #[test]
    fn user_table_passthrough() {
        let samples = vec![(0.0, 1e-12), (1.0, 1.2e-12), (3.0, 1.3e-12)];
        let curve = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::UserTable(samples.clone()),
            &[],
            Interpolation::Linear,
        )
        .unwrap();
        assert_eq!(curve.samples(), samples.as_slice());
    }

    #[test]
    fn non_monotone_anchors_rejected() {
        let e = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::Anchored(vec![(0.0, 1e-12), (3.0, 1.7e-12), (6.0, 1.65e-12)]),
            &[],
            Interpolation::MonotoneCubic,
        );
        assert!(matches!(e, Err(Error::Input(_))));
    }

    #[test]
    fn anchors_far_from_geometry_rejected() {
        let e = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::Anchored(vec![(0.0, 2e-12), (6.0, 3e-12)]),
            &[],
            Interpolation::MonotoneCubic,
        );
        assert!(e.is_err());
    }

    #[test]
    fn out_of_range_force_is_an_error() {
        let curve =
            ForceCapacitanceCurve::from_samples(DEFAULT_ANCHORS.to_vec(), CurveSource::AnchoredInterpolation, Interpolation::MonotoneCubic)
                .unwrap();
        assert!(matches!(curve.capacitance_at(6.0001), Err(Error::Range { .. })));
        assert!(matches!(curve.capacitance_at(-0.1), Err(Error::Range { .. })));
    }

    #[test]
    fn exact_at_samples_and_between_neighbours() {
        let samples = vec![(0.0, 1.0e-12), (1.0, 1.05e-12), (2.0, 1.3e-12), (6.0, 1.65e-12)];
        for interp in [Interpolation::MonotoneCubic, Interpolation::Linear] {
            let curve = ForceCapacitanceCurve::from_samples(samples.clone(), CurveSource::UserTable, interp).unwrap();
            for w in samples.windows(2) {
                assert_eq!(curve.capacitance_at(w[0].0).unwrap(), w[0].1);
                let mid = curve.capacitance_at(0.5 * (w[0].0 + w[1].0)).unwrap();
                assert!(mid > w[0].1 && mid < w[1].1);
            }
        }
    }

    #[test]
    fn strictly_increasing_on_sweep() {
        let samples = vec![(0.0, 1.0e-12), (0.5, 1.01e-12), (1.0, 1.2e-12), (4.0, 1.5e-12), (6.0, 1.65e-12)];
        let curve =
            ForceCapacitanceCurve::from_samples(samples, CurveSource::UserTable, Interpolation::MonotoneCubic).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..100 {
            let c = curve.capacitance_at(6.0 * i as f64 / 99.0).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn csv_round_trip() {
        let curve = build_capacitance_curve(
            &SensorGeometry::reference(),
            &MaterialSpec::ecoflex(),
            &CurveMode::Hyperelastic,
            &force_grid(6.0, 7),
            Interpolation::MonotoneCubic,
        )
        .unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("force_n,capacitance_pf\n0,0.991"), "{text}");
        let back = ForceCapacitanceCurve::read_csv(buf.as_slice(), Interpolation::MonotoneCubic).unwrap();
        assert_eq!(back.samples().len(), 7);
        for (a, b) in back.samples().iter().zip(curve.samples()) {
            assert_eq!(a.0, b.0);
            assert_relative_eq!(a.1, b.1, max_relative = 1e-14);
        }
    }

    #[test]
    fn csv_bad_header() {
        let e = ForceCapacitanceCurve::read_csv("f,c\n0,1\n".as_bytes(), Interpolation::Linear);
        assert!(matches!(e, Err(Error::Import { line: 1, .. })));
    }
}
