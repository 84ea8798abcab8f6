//! Capacitance → reflected RF phase.
//!
//! A purely capacitive load `Z_L = 1/(jωC)` on a line of impedance `Z₀`
//! reflects with unit magnitude and a phase lag `φ = 2·atan(1/(Z₀ωC))`.
//! Phase is reported as a positive lag in degrees, in `(0°, 180°)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    /// Z₀ in ohms.
    pub characteristic_impedance: f64,
    /// Carrier frequency in Hz.
    pub frequency: f64,
}

impl Default for LineSpec {
    fn default() -> Self {
        Self {
            characteristic_impedance: 50.0,
            frequency: 900e6,
        }
    }
}

impl LineSpec {
    pub fn new(characteristic_impedance: f64, frequency: f64) -> Result<Self> {
        let l = Self {
            characteristic_impedance,
            frequency,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn with_frequency(self, frequency: f64) -> Self {
        Self { frequency, ..self }
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.characteristic_impedance > 0.0) || !self.characteristic_impedance.is_finite() {
            return Err(Error::input(format!(
                "characteristic impedance must be > 0, got {}",
                self.characteristic_impedance
            )));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::input(format!("frequency must be > 0, got {}", self.frequency)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResult {
    pub gamma_real: f64,
    pub gamma_imag: f64,
    pub magnitude: f64,
    /// Argument of Γ in `(-180, 180]`.
    pub phase_deg: f64,
}

impl ReflectionResult {
    pub fn gamma(&self) -> Complex64 {
        Complex64::new(self.gamma_real, self.gamma_imag)
    }

    /// Voltage-wave coefficient `(Z_L − Z₀)/(Z_L + Z₀)`, which is `−Γ`.
    pub fn voltage_gamma(&self) -> Complex64 {
        -self.gamma()
    }
}

fn check_capacitance(capacitance: f64) -> Result<()> {
    if !(capacitance > 0.0) || !capacitance.is_finite() {
        return Err(Error::input(format!("capacitance must be > 0, got {capacitance}")));
    }
    Ok(())
}

/// Reflection coefficient of a capacitor terminating `line`.
///
/// Γ is taken in the current-wave convention `(Z₀ − Z_L)/(Z₀ + Z_L)`, whose
/// argument is the reflect-mode phase lag and tends to 0° for a short.
pub fn reflection_coefficient(capacitance: f64, line: &LineSpec) -> Result<ReflectionResult> {
    check_capacitance(capacitance)?;
    line.validate()?;
    let z0 = Complex64::new(line.characteristic_impedance, 0.0);
    let zl = Complex64::new(0.0, -1.0 / (line.angular_frequency() * capacitance));
    let gamma = (z0 - zl) / (z0 + zl);
    let phase = gamma.arg().to_degrees();
    Ok(ReflectionResult {
        gamma_real: gamma.re,
        gamma_imag: gamma.im,
        magnitude: gamma.norm(),
        phase_deg: if phase <= -180.0 { phase + 360.0 } else { phase },
    })
}

/// Reflect-mode phase `2·atan(1/(Z₀ωC))` in degrees.
pub fn reflect_phase(capacitance: f64, line: &LineSpec) -> Result<f64> {
    check_capacitance(capacitance)?;
    line.validate()?;
    let x = 1.0 / (line.characteristic_impedance * line.angular_frequency() * capacitance);
    Ok(2.0 * x.atan().to_degrees())
}

/// Single-pass (thru) phase, exactly half the reflect phase.
pub fn thru_phase(capacitance: f64, line: &LineSpec) -> Result<f64> {
    Ok(reflect_phase(capacitance, line)? / 2.0)
}

/// Phase swing `φ(C₀) − φ(C_max)` between nominal and maximum capacitance.
pub fn delta_phi(c0: f64, c_max: f64, line: &LineSpec) -> Result<f64> {
    check_capacitance(c0)?;
    check_capacitance(c_max)?;
    if c_max < c0 {
        return Err(Error::input(format!(
            "c_max ({c_max} F) must not be below c0 ({c0} F)"
        )));
    }
    if c_max == c0 {
        return Ok(0.0);
    }
    Ok(reflect_phase(c0, line)? - reflect_phase(c_max, line)?)
}

/// One point of a Δφ sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub c0: f64,
    pub delta_phi_deg: f64,
}

/// Evaluates Δφ with `c_max = ratio·c0` across a grid of nominal capacitances.
pub fn delta_phi_sweep(c0_grid: &[f64], ratio: f64, line: &LineSpec) -> Result<Vec<SweepPoint>> {
    if c0_grid.is_empty() {
        return Err(Error::input("empty C0 grid"));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::input(format!("capacitance ratio must be > 1, got {ratio}")));
    }
    if c0_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("C0 grid must be strictly ascending"));
    }
    c0_grid
        .iter()
        .map(|&c0| {
            Ok(SweepPoint {
                c0,
                delta_phi_deg: delta_phi(c0, ratio * c0, line)?,
            })
        })
        .collect()
}

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::input(format!(
            "log grid needs 0 < lo < hi and >= 2 points, got lo={lo} hi={hi} points={points}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// True if the values rise (weakly) to a single peak and then fall.
pub fn is_unimodal(values: &[f64]) -> bool {
    let Some(peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return true;
    };
    values[..=peak].windows(2).all(|w| w[1] >= w[0]) && values[peak..].windows(2).all(|w| w[1] <= w[0])
}

/// Writes a sweep as `c0_pf,delta_phi_deg` CSV.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["c0_pf", "delta_phi_deg"])?;
    for p in points {
        w.write_record([(p.c0 * 1e12).to_string(), p.delta_phi_deg.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
