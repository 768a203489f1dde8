//! Builds the mathematical problem (grid, initial state, exponent field,
//! coefficient schedule) from manifest keys shared by `simulate` and
//! `classify`.

use std::fs::File;
use std::io::BufReader;

use thinfilm::presets;
use thinfilm::schedule::CoefficientSchedule;
use thinfilm::{ExponentField, Field, Grid2D};

use crate::config::Config;

#[derive(Debug)]
pub struct Problem {
    pub grid: Grid2D,
    pub initial: Field,
    pub exponent: ExponentField,
    pub coefficient: CoefficientSchedule,
    pub alpha: f64,
    pub s: f64,
}

pub fn build_problem(cfg: &Config) -> Result<Problem, String> {
    let initial_spec = cfg.require("initial")?.to_owned();
    let grid_keys_present = ["nx", "ny", "lx", "ly"]
        .iter()
        .any(|k| cfg.contains(k));

    let (grid, initial) = match initial_spec.as_str() {
        "example1" | "example2" if grid_keys_present => {
            return Err(format!(
                "config: grid keys nx/ny/lx/ly are fixed by initial={initial_spec} \
                 and cannot be overridden"
            ));
        }
        "example1" => {
            let grid = presets::example1_grid();
            (grid, presets::example1_initial(grid))
        }
        "example2" => {
            let grid = presets::example2_grid();
            (grid, presets::example2_initial(grid))
        }
        "zero" => {
            let nx = cfg.require_usize("nx")?;
            let ny = cfg.require_usize("ny")?;
            let lx = cfg.require_f64("lx")?;
            let ly = cfg.require_f64("ly")?;
            let grid = Grid2D::new(nx, ny, lx, ly).map_err(|e| format!("config: {e}"))?;
            (grid, Field::zeros(grid))
        }
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                if grid_keys_present {
                    return Err(
                        "config: grid keys nx/ny/lx/ly come from the TFF1 header \
                         and cannot be overridden"
                            .into(),
                    );
                }
                let mut r = BufReader::new(
                    File::open(path).map_err(|e| format!("initial field {path}: {e}"))?,
                );
                let field =
                    Field::read_tff(&mut r).map_err(|e| format!("initial field {path}: {e}"))?;
                (field.grid(), field)
            } else {
                return Err(format!(
                    "config: key `initial`: expected example1, example2, zero, or \
                     file:<path.tff>, got {other:?}"
                ));
            }
        }
    };

    let exponent = match cfg.require("p")? {
        "example1" => presets::example1_exponent(grid),
        "example2" => presets::example2_exponent(grid),
        "constant" => {
            let q = cfg.require_f64("p_const")?;
            ExponentField::constant(grid, q).map_err(|e| format!("config: {e}"))?
        }
        other => {
            return Err(format!(
                "config: key `p`: expected example1, example2, or constant, got {other:?}"
            ));
        }
    };

    let coefficient = match cfg.require("k")? {
        "example1" => presets::example1_coefficient(),
        "example2" => presets::example2_coefficient(),
        "constant" => CoefficientSchedule::Constant {
            a: cfg.require_f64("k_a")?,
        },
        "exponential" => CoefficientSchedule::Exponential {
            a: cfg.require_f64("k_a")?,
            b: cfg.require_f64("k_b")?,
        },
        "power" => CoefficientSchedule::PowerBase {
            a: cfg.require_f64("k_a")?,
            b: cfg.require_f64("k_b")?,
            c: cfg.require_f64("k_c")?,
        },
        "arctan" => CoefficientSchedule::ArctanRamp {
            a: cfg.require_f64("k_a")?,
        },
        "table" => {
            let times = cfg
                .get_f64_list("k_times")?
                .ok_or("config: missing required key `k_times`")?;
            let values = cfg
                .get_f64_list("k_values")?
                .ok_or("config: missing required key `k_values`")?;
            CoefficientSchedule::table(times, values).map_err(|e| format!("config: {e}"))?
        }
        other => {
            return Err(format!(
                "config: key `k`: expected example1, example2, constant, exponential, \
                 power, arctan, or table, got {other:?}"
            ));
        }
    };

    Ok(Problem {
        grid,
        initial,
        exponent,
        coefficient,
        alpha: cfg.require_f64("alpha")?,
        s: cfg.require_f64("s")?,
    })
}
