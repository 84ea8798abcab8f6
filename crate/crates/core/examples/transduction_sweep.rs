//! Reflect/thru phase of the sensor termination and the Δφ sweep over
//! nominal capacitance. Writes plot-ready CSV to stdout.
//!
//!     cargo run --example transduction_sweep > sweep.csv

use tagforce::transduction::{
    delta_phi, delta_phi_sweep, is_unimodal, log_grid, reflect_phase, reflection_coefficient, thru_phase,
    write_sweep_csv, LineSpec,
};

const PF: f64 = 1e-12;

fn main() -> tagforce::Result<()> {
    let line = LineSpec::default();
    for c in [1.0 * PF, 1.65 * PF] {
        let g = reflection_coefficient(c, &line)?;
        eprintln!(
            "C = {:.2} pF: |Γ| = {:.6}, reflect {:.4} deg, thru {:.4} deg",
            c / PF,
            g.magnitude,
            reflect_phase(c, &line)?,
            thru_phase(c, &line)?
        );
    }
    eprintln!("0→6 N swing (1 → 1.65 pF): {:.3} deg", delta_phi(PF, 1.65 * PF, &line)?);

    let grid = log_grid(0.1 * PF, 100.0 * PF, 31)?;
    let sweep = delta_phi_sweep(&grid, 1.75, &line)?;
    let peak = sweep.iter().max_by(|a, b| a.delta_phi_deg.total_cmp(&b.delta_phi_deg)).unwrap();
    eprintln!(
        "ratio 1.75: peak {:.2} deg at C0 = {:.2} pF, unimodal: {}",
        peak.delta_phi_deg,
        peak.c0 / PF,
        is_unimodal(&sweep.iter().map(|p| p.delta_phi_deg).collect::<Vec<_>>())
    );
    write_sweep_csv(&sweep, std::io::stdout())
}
