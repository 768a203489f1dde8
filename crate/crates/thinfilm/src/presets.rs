//! The two canonical worked configurations: a blow-up run on the unit
//! square of side 10 and a decay run on the square of side 50. Both are
//! used by tests and exposed through the command line as named setups.

use std::f64::consts::PI;

use crate::evolve::SimulationConfig;
use crate::grid::{ExponentField, Field, Grid2D};
use crate::schedule::CoefficientSchedule;

/// Grid of the blow-up example: 150 x 150 interior nodes on (0,10)^2.
pub fn example1_grid() -> Grid2D {
    Grid2D::new(150, 150, 10.0, 10.0).expect("static parameters")
}

/// Initial surface of the blow-up example.
pub fn example1_initial(grid: Grid2D) -> Field {
    Field::from_fn(grid, |x, y| {
        x * y / 400.0
            * (10.0 - x)
            * (10.0 - y)
            * (PI * x / 10.0).sin().powi(2)
            * (PI * y / 10.0).sin().powi(2)
    })
}

/// Exponent peaking at 2 + 5/1.5 at the domain center.
pub fn example1_exponent(grid: Grid2D) -> ExponentField {
    ExponentField::from_fn(grid, |x, y| {
        2.0 + 5.0 / ((x - 5.0) * (x - 5.0) + (y - 5.0) * (y - 5.0) + 1.5)
    })
    .expect("exponent exceeds 2 everywhere")
}

/// Coefficient 10 e^t.
pub fn example1_coefficient() -> CoefficientSchedule {
    CoefficientSchedule::Exponential { a: 10.0, b: 1.0 }
}

/// Full configuration of the blow-up example; t_end = 0.1 comfortably
/// covers the expected escape near t = 0.064.
pub fn example1_config() -> SimulationConfig {
    let grid = example1_grid();
    SimulationConfig::new(
        grid,
        example1_exponent(grid),
        example1_coefficient(),
        -0.95,
        0.9,
        1e-4,
        0.1,
    )
}

/// Grid of the decay example: 500 x 500 interior nodes on (0,50)^2.
pub fn example2_grid() -> Grid2D {
    Grid2D::new(500, 500, 50.0, 50.0).expect("static parameters")
}

/// Four compactly supported bumps of radius 4 centered on a 2 x 2
/// arrangement, scaled by 5.
pub fn example2_initial(grid: Grid2D) -> Field {
    const CENTERS: [(f64, f64); 4] = [(15.0, 15.0), (35.0, 15.0), (15.0, 35.0), (35.0, 35.0)];
    Field::from_fn(grid, |x, y| {
        let mut acc = 0.0;
        for (cx, cy) in CENTERS {
            let r_sq = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            if r_sq < 16.0 {
                acc += (-64.0 / (16.0 - r_sq)).exp();
            }
        }
        5.0 * acc
    })
}

/// Radially growing exponent 2 + (x/25 - 1)^2 + (y/25 - 1)^2.
pub fn example2_exponent(grid: Grid2D) -> ExponentField {
    ExponentField::from_fn(grid, |x, y| {
        let a = x / 25.0 - 1.0;
        let b = y / 25.0 - 1.0;
        2.0 + a * a + b * b
    })
    .expect("exponent exceeds 2 on interior nodes")
}

/// Coefficient (1/400)(1 + (2/pi) arctan t).
pub fn example2_coefficient() -> CoefficientSchedule {
    CoefficientSchedule::ArctanRamp { a: 0.0025 }
}

/// Full configuration of the decay example over [0, 500].
pub fn example2_config() -> SimulationConfig {
    let grid = example2_grid();
    SimulationConfig::new(
        grid,
        example2_exponent(grid),
        example2_coefficient(),
        -0.05,
        0.9,
        0.5,
        500.0,
    )
}
