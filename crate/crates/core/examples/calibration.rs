//! Solving a kernel knob for a target mean.
//!
//! cargo run --release --example calibration

use irg::analytics::{calibrate_parameter, CalibrationStatistic, IntegrationSettings};
use irg::{Kernel, ProbabilityMeasure};

fn main() -> irg::Result<()> {
    let settings = IntegrationSettings {
        outer_samples: 4_000,
        inner_samples: Some(1_000),
        ..IntegrationSettings::default()
    };
    let torus = ProbabilityMeasure::uniform_torus(2)?;

    for s in [250.0, 1000.0, 4000.0] {
        let c = calibrate_parameter(
            &Kernel::HardDisk { r: 0.1 },
            &torus,
            s,
            1.0,
            CalibrationStatistic::Degree(0),
            1e-9,
            &settings,
        )?;
        let oracle = (f64::ln(s) / (std::f64::consts::PI * s)).sqrt();
        println!("s = {s}: r = {:.7} (ln s / s = pi r^2 gives {oracle:.7}), E D0 = {:.6}", c.value, c.achieved);
    }

    // No closed form on the unit cube: bisection over Monte Carlo estimates.
    let cube = ProbabilityMeasure::uniform_cube(2)?;
    let c = calibrate_parameter(
        &Kernel::SoftDisk { p: 0.5, r: 0.1 },
        &cube,
        200.0,
        2.0,
        CalibrationStatistic::Degree(0),
        1e-3,
        &settings,
    )?;
    println!("soft-disk on cube: {} = {:.5} after {} iterations, E D0 = {:.4}", c.knob, c.value, c.iterations, c.achieved);

    match calibrate_parameter(
        &Kernel::Constant { p: 0.1 },
        &torus,
        20.0,
        50.0,
        CalibrationStatistic::Degree(0),
        1e-9,
        &settings,
    ) {
        Ok(c) => println!("unexpected: {c:?}"),
        Err(e) => println!("target above s is unreachable: {e}"),
    }
    Ok(())
}
