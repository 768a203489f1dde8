//! The classify subcommand: evaluates the blow-up and decay hypotheses
//! for an initial datum and prints a verdict. It checks sufficient
//! conditions only; it is not an oracle for the solution's fate.

use std::fmt::Write as _;
use std::fs;

use thinfilm::functionals::{
    blowup_upper_bound_high_energy, blowup_upper_bound_t, decay_rate_delta1, quadrature_of_square,
    FunctionalReport, TheoremConstants,
};

use crate::config::Config;
use crate::problem::{build_problem, Problem};
use crate::{ensure_out_dir, write_manifest, CommonArgs};

pub fn run(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let problem = build_problem(&cfg)?;
    // Evolution keys are legal here so one manifest can drive both
    // simulate and classify; only the datum and constants matter.
    for key in [
        "dt",
        "t_end",
        "lambda_source",
        "source_implicit",
        "blowup_threshold",
        "snapshot_times",
        "stride",
        "verbatim_denominator",
    ] {
        let _ = cfg.get(key);
    }
    let d_lower = cfg.get_f64("d_lower")?;
    cfg.finish()?;

    let Problem {
        grid,
        initial,
        exponent,
        coefficient,
        alpha,
        s,
    } = problem;
    coefficient
        .validate(0.0)
        .map_err(|e| format!("config: coefficient schedule: {e}"))?;

    let report = FunctionalReport::compute(&initial, 0.0, &exponent, &coefficient, alpha, s)
        .map_err(|e| e.to_string())?;
    let n2 = quadrature_of_square(&initial).map_err(|e| e.to_string())?;
    let constants = TheoremConstants::from_setup(grid, &exponent, &coefficient, alpha, s);
    let j0 = report.energy_j;
    let i0 = report.nehari_i;

    let mut out = String::new();
    let _ = writeln!(out, "j0 = {j0:.6e}");
    let _ = writeln!(out, "i0 = {i0:.6e}");
    let _ = writeln!(out, "f1_initial = {:.6e}", report.f1);
    let _ = writeln!(out, "u0_norm2_sq = {n2:.6e}");
    let _ = writeln!(out, "b2_sq = {:.6e}", constants.b2_sq);
    let _ = writeln!(
        out,
        "p_minus = {:.6}, p_plus = {:.6}, k0 = {:.6e}",
        constants.p_minus, constants.p_plus, constants.k0
    );

    let trivial = report.u_max == 0.0;
    let mut blowup_sufficient = false;

    // Positive-energy route: 0 < J0 below the mass-scaled threshold.
    match blowup_upper_bound_high_energy(&constants, j0, n2) {
        Ok(t_star) => {
            blowup_sufficient = true;
            let _ = writeln!(
                out,
                "blow-up check (positive energy): satisfied, t_star_upper = {t_star:.6e}"
            );
        }
        Err(e) => {
            let _ = writeln!(out, "blow-up check (positive energy): {e}");
        }
    }

    // Negative-energy route needs I0 < 0 on top of the energy condition
    // (J0 < 0, or J0 < d_lower when a well depth is supplied).
    if i0 < 0.0 {
        match blowup_upper_bound_t(&constants, j0, report.f1, d_lower) {
            Ok(bound) => {
                blowup_sufficient = true;
                let _ = writeln!(
                    out,
                    "blow-up check (negative energy): satisfied, c0 = {:.6e}, c1 = {:.6e}, \
                     c2 = {:.6e}, c3 = {:.6e}, t_star_upper = {:.6e}",
                    bound.c0, bound.c1, bound.c2, bound.c3, bound.t_star
                );
            }
            Err(e) => {
                let _ = writeln!(out, "blow-up check (negative energy): {e}");
            }
        }
    } else {
        let _ = writeln!(
            out,
            "blow-up check (negative energy): not applicable, i0 = {i0:.6e} >= 0"
        );
    }

    let decay_candidate = !trivial && i0 > 0.0 && j0 >= 0.0;
    if decay_candidate {
        if let Some(d) = d_lower {
            match decay_rate_delta1(&constants, j0, d) {
                Ok(rate) => {
                    let _ = writeln!(
                        out,
                        "decay rate: delta0 = {:.6e}, delta1 = {:.6e}, envelope = {:.6e}",
                        rate.delta0, rate.delta1, rate.envelope
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "decay rate: {e}");
                }
            }
        }
    }

    let verdict = if trivial {
        "INDETERMINATE"
    } else if blowup_sufficient {
        "BLOWUP_SUFFICIENT"
    } else if decay_candidate {
        "DECAY_CANDIDATE"
    } else {
        "INDETERMINATE"
    };
    let _ = writeln!(out, "verdict = {verdict}");

    print!("{out}");
    ensure_out_dir(&args.out)?;
    let path = args.out.join("classify.txt");
    fs::write(&path, &out).map_err(|e| format!("{}: {e}", path.display()))?;
    write_manifest(&args.out, "classify", args.seed, &[], &cfg)?;
    Ok(0)
}
