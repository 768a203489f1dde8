//! The bounds subcommand: evaluates the lifespan and decay formulas
//! directly from user-supplied scalar constants, formula by formula.

use std::fmt::Write as _;
use std::fs;

use thinfilm::functionals::{
    blowup_upper_bound_high_energy, blowup_upper_bound_t, decay_rate_delta1,
    lifespan_lower_bound, TheoremConstants,
};

use crate::config::Config;
use crate::{ensure_out_dir, write_manifest, CommonArgs};

pub fn run(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let p_minus = cfg.get_f64("p_minus")?;
    let p_plus = cfg.get_f64("p_plus")?;
    let omega_measure = cfg.get_f64("omega_measure")?;
    let lambda1 = cfg.get_f64("lambda1")?;
    let b2_sq = cfg.get_f64("b2_sq")?;
    let k0 = cfg.get_f64("k0")?;
    let j0 = cfg.get_f64("j0")?;
    let f10 = cfg.get_f64("f10")?;
    let u0_norm2_sq = cfg.get_f64("u0_norm2_sq")?;
    let d_lower = cfg.get_f64("d_lower")?;
    let n_dim = cfg.get_usize("n_dim")?;
    let c3_tilde = cfg.get_f64("c3_tilde")?;
    let c4_tilde = cfg.get_f64("c4_tilde")?;
    let kappa_star = cfg.get_f64("kappa_star")?;
    cfg.finish()?;

    // Each formula is gated on the keys it actually reads, so the NaN
    // placeholders below can never reach arithmetic.
    let constants = TheoremConstants {
        p_minus: p_minus.unwrap_or(f64::NAN),
        p_plus: p_plus.unwrap_or(f64::NAN),
        omega_measure: omega_measure.unwrap_or(f64::NAN),
        lambda1: lambda1.unwrap_or(f64::NAN),
        b2_sq: b2_sq.unwrap_or(f64::NAN),
        k0: k0.unwrap_or(f64::NAN),
        s_p: None,
        c3_tilde,
        c4_tilde,
        kappa_star,
    };

    let mut out = String::new();
    let mut computed = 0usize;

    {
        let needed = [
            ("p_minus", p_minus.is_some()),
            ("p_plus", p_plus.is_some()),
            ("omega_measure", omega_measure.is_some()),
            ("lambda1", lambda1.is_some()),
            ("k0", k0.is_some()),
            ("j0", j0.is_some()),
            ("f10", f10.is_some()),
        ];
        let label = "blow-up upper bound (negative energy)";
        match missing(&needed) {
            Some(keys) => {
                let _ = writeln!(out, "{label}: SKIPPED (missing: {keys})");
            }
            None => match blowup_upper_bound_t(&constants, j0.unwrap(), f10.unwrap(), d_lower) {
                Ok(b) => {
                    computed += 1;
                    let _ = writeln!(
                        out,
                        "{label}: c0 = {:.6e}, c1 = {:.6e}, c2 = {:.6e}, c3 = {:.6e}, \
                         t_star_upper = {:.6e}",
                        b.c0, b.c1, b.c2, b.c3, b.t_star
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{label}: {e}");
                }
            },
        }
    }

    {
        let needed = [
            ("p_minus", p_minus.is_some()),
            ("b2_sq", b2_sq.is_some()),
            ("j0", j0.is_some()),
            ("u0_norm2_sq", u0_norm2_sq.is_some()),
        ];
        let label = "blow-up upper bound (positive energy)";
        match missing(&needed) {
            Some(keys) => {
                let _ = writeln!(out, "{label}: SKIPPED (missing: {keys})");
            }
            None => {
                match blowup_upper_bound_high_energy(&constants, j0.unwrap(), u0_norm2_sq.unwrap())
                {
                    Ok(t_star) => {
                        computed += 1;
                        let _ = writeln!(out, "{label}: t_star_upper = {t_star:.6e}");
                    }
                    Err(e) => {
                        let _ = writeln!(out, "{label}: {e}");
                    }
                }
            }
        }
    }

    {
        let needed = [
            ("p_minus", p_minus.is_some()),
            ("p_plus", p_plus.is_some()),
            ("n_dim", n_dim.is_some()),
            ("f10", f10.is_some()),
            ("kappa_star", kappa_star.is_some()),
            ("c3_tilde", c3_tilde.is_some()),
            ("c4_tilde", c4_tilde.is_some()),
        ];
        let label = "lifespan lower bound";
        match missing(&needed) {
            Some(keys) => {
                let _ = writeln!(out, "{label}: SKIPPED (missing: {keys})");
            }
            None => match lifespan_lower_bound(&constants, n_dim.unwrap(), f10.unwrap()) {
                Ok(b) => {
                    computed += 1;
                    let _ = writeln!(
                        out,
                        "{label}: r_plus = {:.6e}, r_minus = {:.6e}, c4 = {:.6e}, \
                         c5 = {:.6e}, t_lower = {:.6e}",
                        b.r_plus, b.r_minus, b.c4, b.c5, b.t_lower
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{label}: {e}");
                }
            },
        }
    }

    {
        let needed = [
            ("p_minus", p_minus.is_some()),
            ("p_plus", p_plus.is_some()),
            ("b2_sq", b2_sq.is_some()),
            ("j0", j0.is_some()),
            ("d_lower", d_lower.is_some()),
        ];
        let label = "decay rate";
        match missing(&needed) {
            Some(keys) => {
                let _ = writeln!(out, "{label}: SKIPPED (missing: {keys})");
            }
            None => match decay_rate_delta1(&constants, j0.unwrap(), d_lower.unwrap()) {
                Ok(rate) => {
                    computed += 1;
                    let _ = writeln!(
                        out,
                        "{label}: delta0 = {:.6e}, delta1 = {:.6e}, envelope = {:.6e}",
                        rate.delta0, rate.delta1, rate.envelope
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{label}: {e}");
                }
            },
        }
    }

    if computed == 0 {
        let _ = writeln!(
            out,
            "no bounds computed; supply the constants named above to enable a formula"
        );
    }

    print!("{out}");
    ensure_out_dir(&args.out)?;
    let path = args.out.join("bounds.txt");
    fs::write(&path, &out).map_err(|e| format!("{}: {e}", path.display()))?;
    write_manifest(&args.out, "bounds", args.seed, &[], &cfg)?;
    Ok(0)
}

/// Comma-joined names of the absent keys, or None when all are present.
fn missing(needed: &[(&str, bool)]) -> Option<String> {
    let absent: Vec<&str> = needed
        .iter()
        .filter(|(_, present)| !present)
        .map(|(key, _)| *key)
        .collect();
    if absent.is_empty() {
        None
    } else {
        Some(absent.join(", "))
    }
}
