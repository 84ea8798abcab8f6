use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial mapping a phase change (degrees) to force (N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationWire", into = "CalibrationWire")]
pub struct CalibrationModel {
    coefficients: Vec<f64>,
    fit_domain: (f64, f64),
    residual_rms: f64,
    monotone: bool,
}

/// JSON layout: `{degree, coefficients, fit_domain_deg, residual_rms_n}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationWire {
    degree: usize,
    coefficients: Vec<f64>,
    fit_domain_deg: [f64; 2],
    residual_rms_n: f64,
}

impl TryFrom<CalibrationWire> for CalibrationModel {
    type Error = String;

    fn try_from(w: CalibrationWire) -> std::result::Result<Self, String> {
        if w.coefficients.len() != w.degree + 1 {
            return Err(format!(
                "degree {} needs {} coefficients, got {}",
                w.degree,
                w.degree + 1,
                w.coefficients.len()
            ));
        }
        let [lo, hi] = w.fit_domain_deg;
        if !(lo <= hi) {
            return Err(format!("fit domain [{lo}, {hi}] is empty"));
        }
        CalibrationModel::new(w.coefficients, (lo, hi), w.residual_rms_n).map_err(|e| e.to_string())
    }
}

impl From<CalibrationModel> for CalibrationWire {
    fn from(m: CalibrationModel) -> Self {
        Self {
            degree: m.degree(),
            coefficients: m.coefficients,
            fit_domain_deg: [m.fit_domain.0, m.fit_domain.1],
            residual_rms_n: m.residual_rms,
        }
    }
}

/// What to do with a phase jump outside the calibrated range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainPolicy {
    /// Error unless the jump lies within the fit domain widened by `margin_deg`.
    Strict { margin_deg: f64 },
    /// Clamp the jump to the fit domain.
    Clamp,
}

impl Default for DomainPolicy {
    fn default() -> Self {
        DomainPolicy::Strict { margin_deg: 0.5 }
    }
}

impl CalibrationModel {
    /// Builds a model from ascending-order coefficients. Monotonicity over
    /// the domain is checked here.
    pub fn new(coefficients: Vec<f64>, fit_domain: (f64, f64), residual_rms: f64) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Fit("coefficients must be finite and non-empty".into()));
        }
        let mut m = Self {
            coefficients,
            fit_domain,
            residual_rms,
            monotone: false,
        };
        m.monotone = m.check_monotone();
        Ok(m)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Ascending order: `force = c₀ + c₁·Δφ + c₂·Δφ² …`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn fit_domain(&self) -> (f64, f64) {
        self.fit_domain
    }

    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    /// False flags a fit whose force is not strictly monotone in phase over
    /// the fit domain.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn evaluate(&self, phase: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * phase + c)
    }

    /// dF/dΔφ in N per degree.
    pub fn slope(&self, phase: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * phase + k as f64 * c)
    }

    /// Force for a measured jump, applying `policy` at the domain edges.
    pub fn force_at(&self, phase: f64, policy: DomainPolicy) -> Result<f64> {
        Ok(self.evaluate(self.admit(phase, policy)?))
    }

    /// The phase actually fed to the polynomial under `policy`.
    pub fn admit(&self, phase: f64, policy: DomainPolicy) -> Result<f64> {
        let (lo, hi) = self.fit_domain;
        if !phase.is_finite() {
            return Err(Error::Extrapolation { jump_deg: phase, lo, hi });
        }
        match policy {
            DomainPolicy::Clamp => Ok(phase.clamp(lo, hi)),
            DomainPolicy::Strict { margin_deg } => {
                if phase < lo - margin_deg || phase > hi + margin_deg {
                    Err(Error::Extrapolation { jump_deg: phase, lo, hi })
                } else {
                    Ok(phase)
                }
            }
        }
    }

    fn check_monotone(&self) -> bool {
        if self.degree() == 0 {
            return false;
        }
        let (lo, hi) = self.fit_domain;
        let n = 256;
        let slopes: Vec<f64> = (0..=n)
            .map(|i| self.slope(lo + (hi - lo) * i as f64 / n as f64))
            .collect();
        slopes.iter().all(|&s| s > 0.0) || slopes.iter().all(|&s| s < 0.0)
    }
}

/// Least-squares polynomial `force = p(phase)` of the given degree.
pub fn fit_calibration(phases: &[f64], forces: &[f64], degree: usize) -> Result<CalibrationModel> {
    if phases.len() != forces.len() {
        return Err(Error::Fit(format!(
            "{} phases but {} forces",
            phases.len(),
            forces.len()
        )));
    }
    if degree == 0 {
        return Err(Error::Fit("degree must be >= 1".into()));
    }
    let n = phases.len();
    if n < degree + 1 {
        return Err(Error::Fit(format!("degree {degree} needs >= {} samples, got {n}", degree + 1)));
    }
    if phases.iter().chain(forces).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite sample".into()));
    }
    let mut distinct = phases.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::Fit(format!(
            "rank-deficient design: {} distinct phases for degree {degree}",
            distinct.len()
        )));
    }

    let cols = degree + 1;
    let mut design = DMatrix::from_fn(n, cols, |i, j| phases[i].powi(j as i32));
    let scales: Vec<f64> = (0..cols).map(|j| design.column(j).norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::Fit("rank-deficient design: zero column".into()));
    }
    for (j, &s) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit(format!(
            "rank-deficient design (condition {:.3e})",
            smax / smin
        )));
    }
    let rhs = DVector::from_column_slice(forces);
    let scaled = svd.solve(&rhs, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    let coefficients: Vec<f64> = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();

    let lo = distinct[0];
    let hi = distinct[distinct.len() - 1];
    let mut model = CalibrationModel::new(coefficients, (lo, hi), 0.0)?;
    let sse: f64 = phases
        .iter()
        .zip(forces)
        .map(|(&p, &f)| (model.evaluate(p) - f).powi(2))
        .sum();
    model.residual_rms = (sse / n as f64).sqrt();
    Ok(model)
}
