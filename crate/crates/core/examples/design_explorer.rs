//! Geometry/material sweep ranked by phase swing, the modulus fit that
//! sets the reference material, and the three force-range presets.

use tagforce::design::{
    calibrate_modulus, sweep_designs, write_design_csv, CapacitanceBand, DesignPreset,
};
use tagforce::sensor::{MaterialSpec, SensorGeometry};
use tagforce::transduction::LineSpec;

fn main() -> tagforce::Result<()> {
    let line = LineSpec::default();
    let reference = SensorGeometry::reference();
    let mu = calibrate_modulus(&reference, &MaterialSpec::ecoflex(), 6.0, 1.65)?;
    println!("shear modulus for C(6 N)/C0 = 1.65: {:.1} kPa", mu / 1e3);

    let geometries: Vec<SensorGeometry> = [0.002, 0.05, 0.1, 0.2, 0.5]
        .iter()
        .map(|&d| SensorGeometry {
            dielectric_thickness: d * 1e-3,
            ..reference.clone()
        })
        .collect();
    let materials = [
        MaterialSpec::ecoflex(),
        MaterialSpec::new("stiffer", 2.8, 1e6)?,
        MaterialSpec::new("high-k", 6.7, 354.3e3)?,
    ];
    let ranked = sweep_designs(&geometries, &materials, 6.0, &line, CapacitanceBand::RELAXED)?;
    println!("\nsweep, best first:");
    write_design_csv(&ranked, std::io::stdout())?;

    println!("\npresets (shear modulus fitted to a 15 deg swing):");
    let presets = DesignPreset::all()
        .iter()
        .map(|p| p.calibrated(&line))
        .collect::<tagforce::Result<Vec<_>>>()?;
    write_design_csv(&presets, std::io::stdout())
}
