//! Force → capacitance curves from the anchored interpolant and the
//! neo-Hookean compression model, side by side.

use tagforce::sensor::{
    build_capacitance_curve, force_grid, nominal_capacitance, solve_compression, CurveMode, Interpolation,
    MaterialSpec, SensorGeometry,
};

fn main() -> tagforce::Result<()> {
    let geometry = SensorGeometry::reference();
    let material = MaterialSpec::ecoflex();
    println!(
        "nominal C0 = {:.4} pF (A = {} mm², d = {} mm, εr = {})",
        nominal_capacitance(&geometry, &material)? * 1e12,
        geometry.area() * 1e6,
        geometry.dielectric_thickness * 1e3,
        material.relative_permittivity
    );

    let grid = force_grid(6.0, 13);
    let anchored = build_capacitance_curve(
        &geometry,
        &material,
        &CurveMode::anchored_default(),
        &grid,
        Interpolation::MonotoneCubic,
    )?;
    let hyper = build_capacitance_curve(&geometry, &material, &CurveMode::Hyperelastic, &grid, Interpolation::MonotoneCubic)?;

    println!("force_n,stretch,anchored_pf,hyperelastic_pf");
    for &f in &grid {
        println!(
            "{f},{:.5},{:.5},{:.5}",
            solve_compression(f, &geometry, &material)?,
            anchored.capacitance_at(f)? * 1e12,
            hyper.capacitance_at(f)? * 1e12
        );
    }
    Ok(())
}
