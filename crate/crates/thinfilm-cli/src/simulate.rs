//! The simulate subcommand: integrates the manifest's evolution problem
//! and writes the diagnostics table, requested snapshots, and a summary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;

use thinfilm::evolve::write_reports_csv;
use thinfilm::{RunStatus, SimulationConfig, SimulationOutcome};

use crate::config::Config;
use crate::problem::{build_problem, Problem};
use crate::{ensure_out_dir, write_manifest, CommonArgs};

pub fn run(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let problem = build_problem(&cfg)?;
    let dt = cfg.require_f64("dt")?;
    let t_end = cfg.require_f64("t_end")?;
    let lambda_source = cfg.get_f64("lambda_source")?.unwrap_or(0.0);
    let source_implicit = cfg.get_bool("source_implicit")?.unwrap_or(false);
    let blowup_threshold = cfg.get_f64("blowup_threshold")?.unwrap_or(1e8);
    let snapshot_times = cfg.get_f64_list("snapshot_times")?.unwrap_or_default();
    // The config keys are consumed even when a flag overrides them, so
    // the unknown-key check stays meaningful.
    let stride = args.stride.or(cfg.get_usize("stride")?).unwrap_or(1);
    let verbatim =
        args.verbatim_denominator || cfg.get_bool("verbatim_denominator")?.unwrap_or(false);
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
        .validate(t_end)
        .map_err(|e| format!("config: coefficient schedule: {e}"))?;

    let mut sim = SimulationConfig::new(grid, exponent, coefficient, alpha, s, dt, t_end);
    sim.lambda_source = lambda_source;
    sim.source_implicit = source_implicit;
    sim.blowup_threshold = blowup_threshold;
    sim.snapshot_times = snapshot_times;
    sim.report_stride = stride;
    sim.verbatim_denominator = verbatim;

    let outcome = thinfilm::run(&initial, &sim).map_err(|e| e.to_string())?;

    ensure_out_dir(&args.out)?;
    let csv_path = args.out.join("diagnostics.csv");
    let mut w = BufWriter::new(
        File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?,
    );
    write_reports_csv(&mut w, &outcome.reports)
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;

    for (t, field) in &outcome.snapshots {
        let path = args.out.join(format!("snapshot_t{t:.6}.tff"));
        let mut w = BufWriter::new(
            File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?,
        );
        field
            .write_tff(&mut w)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }

    let summary = render_summary(&outcome);
    print!("{summary}");
    let summary_path = args.out.join("summary.txt");
    fs::write(&summary_path, &summary).map_err(|e| format!("{}: {e}", summary_path.display()))?;

    write_manifest(
        &args.out,
        "simulate",
        args.seed,
        &[
            ("stride", stride.to_string()),
            ("verbatim_denominator", verbatim.to_string()),
        ],
        &cfg,
    )?;

    Ok(match outcome.status {
        RunStatus::Completed => 0,
        RunStatus::BlewUp => 2,
        RunStatus::IndefiniteDenominator => 1,
    })
}

fn render_summary(outcome: &SimulationOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status = {}", outcome.status.as_str());
    let _ = writeln!(s, "t_final = {:.6e}", outcome.t_final);
    if let Some(t) = outcome.blowup_time_estimate {
        let _ = writeln!(s, "blowup_time_estimate = {t:.6e}");
    }
    if let (Some(first), Some(last)) = (outcome.reports.first(), outcome.reports.last()) {
        let _ = writeln!(s, "f1_initial = {:.6e}", first.f1);
        let _ = writeln!(s, "f1_final = {:.6e}", last.f1);
        let _ = writeln!(s, "j_final = {:.6e}", last.energy_j);
        let _ = writeln!(s, "umax_final = {:.6e}", last.u_max);
    }
    let _ = writeln!(
        s,
        "conservation_residual_max = {:.6e}",
        outcome.conservation_residual_max
    );
    s
}
