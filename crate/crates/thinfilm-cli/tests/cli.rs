//! End-to-end tests of the thinfilm binary: exit codes, diagnostics,
//! error reporting, and byte-level reproducibility.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use thinfilm::{Field, Grid2D};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thinfilm"))
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(subcommand: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(subcommand)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const SMALL_PROBLEM: &str = "initial = zero\nnx = 16\nny = 16\nlx = 4\nly = 4\n\
    p = constant\np_const = 2.5\nk = constant\nk_a = 0.5\nalpha = -0.2\ns = 0.9\n";

#[test]
fn zero_field_simulate_completes_with_zero_diagnostics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "zero.cfg",
        &format!("{SMALL_PROBLEM}dt = 0.01\nt_end = 0.05\n"),
    );
    let out = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("status = completed"), "{text}");

    let csv = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,J,I,norm_alpha_sq,F1,modular,weighted_modular,umax"
    );
    for line in lines.skip(1) {
        for cell in line.split(',').skip(1) {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
}

#[test]
fn blowup_example_exits_2_with_estimate() {
    let dir = TempDir::new().unwrap();
    // Coarse step keeps the run short; the estimate stays near 0.064.
    let cfg = write_cfg(
        dir.path(),
        "ex1.cfg",
        "initial = example1\np = example1\nk = example1\nalpha = -0.95\ns = 0.9\n\
         dt = 5e-4\nt_end = 0.2\n",
    );
    let out = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("status = blew_up"), "{text}");
    let estimate: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("blowup_time_estimate = "))
        .expect("estimate printed")
        .parse()
        .unwrap();
    assert!((0.05..0.09).contains(&estimate), "estimate {estimate}");
}

#[test]
fn malformed_and_unknown_keys_fail_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "initial zero\n");
    let out = run("simulate", &cfg, &dir.path().join("o1"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("line 1"), "{}", stderr_of(&out));
    // No partial outputs appear on a parse failure.
    assert!(!dir.path().join("o1").exists());

    let cfg = write_cfg(
        dir.path(),
        "unknown.cfg",
        &format!("{SMALL_PROBLEM}dt = 0.01\nt_end = 0.05\n# fine\nmystery = 1\n"),
    );
    let out = run("simulate", &cfg, &dir.path().join("o2"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(
        err.contains("line 15") && err.contains("mystery"),
        "{err}"
    );

    let cfg = write_cfg(
        dir.path(),
        "dup.cfg",
        "nx = 8\nnx = 9\n",
    );
    let out = run("simulate", &cfg, &dir.path().join("o3"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("line 2") && err.contains("duplicate"), "{err}");
}

#[test]
fn stride_flag_overrides_config_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "stride.cfg",
        &format!("{SMALL_PROBLEM}dt = 0.01\nt_end = 0.1\nstride = 1\n"),
    );
    let out = run(
        "simulate",
        &cfg,
        &dir.path().join("out"),
        &["--stride", "5"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let csv = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    // Header, t = 0, then rows 5 and 10 of the ten steps.
    assert_eq!(csv.lines().count(), 4, "{csv}");
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("stride = 5"), "{manifest}");
}

#[test]
fn snapshots_round_trip_through_the_field_format() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "snap.cfg",
        &format!("{SMALL_PROBLEM}dt = 0.01\nt_end = 0.05\nsnapshot_times = 0.02\n"),
    );
    let out = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let path = dir.path().join("out/snapshot_t0.020000.tff");
    let mut r = std::io::BufReader::new(fs::File::open(path).unwrap());
    let field = Field::read_tff(&mut r).unwrap();
    assert_eq!(field.grid().nx(), 16);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "det.cfg",
        "initial = example1\np = example1\nk = example1\nalpha = -0.95\ns = 0.9\n\
         dt = 2e-3\nt_end = 0.02\nsnapshot_times = 0.01\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run("simulate", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run("simulate", &cfg, &b, &[]).status.code(), Some(0));
    for name in [
        "diagnostics.csv",
        "summary.txt",
        "manifest.txt",
        "snapshot_t0.010000.tff",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }

    let se = write_cfg(dir.path(), "se.cfg", "input = step_edge\n");
    let ia = dir.path().join("ia");
    let ib = dir.path().join("ib");
    assert_eq!(run("sharpen", &se, &ia, &[]).status.code(), Some(0));
    assert_eq!(run("sharpen", &se, &ib, &[]).status.code(), Some(0));
    assert_eq!(
        fs::read(ia.join("sharpened.pgm")).unwrap(),
        fs::read(ib.join("sharpened.pgm")).unwrap()
    );
    // A different seed draws different noise.
    let ic = dir.path().join("ic");
    assert_eq!(
        run("sharpen", &se, &ic, &["--seed", "8"]).status.code(),
        Some(0)
    );
    assert_ne!(
        fs::read(ia.join("input.pgm")).unwrap(),
        fs::read(ic.join("input.pgm")).unwrap()
    );
}

#[test]
fn classify_blowup_zero_and_decay_verdicts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "ex1.cfg",
        "initial = example1\np = example1\nk = example1\nalpha = -0.95\ns = 0.9\n",
    );
    let out = run("classify", &cfg, &dir.path().join("c1"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("verdict = BLOWUP_SUFFICIENT"), "{text}");
    assert!(text.contains("t_star_upper"), "{text}");
    let j0: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("j0 = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((j0 + 13.7952).abs() < 0.02 * 13.7952, "j0 {j0}");

    let cfg = write_cfg(dir.path(), "zero.cfg", SMALL_PROBLEM);
    let out = run("classify", &cfg, &dir.path().join("c2"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("verdict = INDETERMINATE"), "{text}");

    // A faint single mode: the gradient term dominates the modular one,
    // so I > 0 and the datum is a decay candidate.
    let grid = Grid2D::new(16, 16, 4.0, 4.0).unwrap();
    let u = Field::from_fn(grid, |x, y| {
        0.01 * (std::f64::consts::PI * x / 4.0).sin() * (std::f64::consts::PI * y / 4.0).sin()
    });
    let tff = dir.path().join("mode.tff");
    u.write_tff(&mut BufWriter::new(fs::File::create(&tff).unwrap()))
        .unwrap();
    let cfg = write_cfg(
        dir.path(),
        "decay.cfg",
        &format!(
            "initial = file:{}\np = constant\np_const = 2.5\nk = constant\nk_a = 0.5\n\
             alpha = -0.2\ns = 0.9\n",
            tff.display()
        ),
    );
    let out = run("classify", &cfg, &dir.path().join("c3"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("verdict = DECAY_CANDIDATE"), "{text}");
}

#[test]
fn bounds_arithmetic_example_and_skip_note() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "b32.cfg",
        "p_minus = 3\nb2_sq = 1\nu0_norm2_sq = 6\nj0 = 0.5\n",
    );
    let out = run("bounds", &cfg, &dir.path().join("b1"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let t: f64 = text
        .lines()
        .find(|l| l.starts_with("blow-up upper bound (positive energy)"))
        .and_then(|l| l.split("t_star_upper = ").nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((t - 32.0).abs() < 1e-9, "{text}");

    let cfg = write_cfg(dir.path(), "empty.cfg", "# nothing\n");
    let out = run("bounds", &cfg, &dir.path().join("b2"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(text.matches("SKIPPED").count(), 4, "{text}");
    assert!(text.contains("no bounds computed"), "{text}");
}

#[test]
fn sharpen_with_zero_stop_time_is_the_identity() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "id.cfg", "input = step_edge\nt_stop = 0\n");
    let out_dir = dir.path().join("out");
    let out = run("sharpen", &cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert_eq!(
        fs::read(out_dir.join("input.pgm")).unwrap(),
        fs::read(out_dir.join("sharpened.pgm")).unwrap()
    );
}

#[test]
fn enhance_with_zero_lambda_matches_sharpen_output() {
    let dir = TempDir::new().unwrap();
    let sharpen_cfg = write_cfg(dir.path(), "s.cfg", "input = step_edge\nt_stop = 0.025\n");
    let enhance_cfg = write_cfg(
        dir.path(),
        "e.cfg",
        "input = step_edge\nt_stop = 0.025\nlambda = 0\n",
    );
    let s_out = dir.path().join("s");
    let e_out = dir.path().join("e");
    assert_eq!(run("sharpen", &sharpen_cfg, &s_out, &[]).status.code(), Some(0));
    assert_eq!(run("enhance", &enhance_cfg, &e_out, &[]).status.code(), Some(0));
    assert_eq!(
        fs::read(s_out.join("sharpened.pgm")).unwrap(),
        fs::read(e_out.join("enhanced.pgm")).unwrap()
    );
}

#[test]
fn compare_writes_all_outputs_and_expected_metric_ordering() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "cmp.cfg", "input = step_edge\n");
    let out_dir = dir.path().join("out");
    let out = run("compare", &cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    for name in ["input.pgm", "proposed.pgm", "backward.pgm", "shock.pgm"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "filter,edge_gain,flat_variance_ratio,out_min,out_max"
    );
    let mut rows = std::collections::HashMap::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let gain: f64 = cells[1].parse().unwrap();
        let flat: f64 = cells[2].parse().unwrap();
        rows.insert(cells[0].to_owned(), (gain, flat));
    }
    for name in ["proposed", "backward_diffusion", "shock"] {
        let (gain, _) = rows[name];
        assert!(gain > 1.0, "{name} gain {gain}");
    }
    // Backward diffusion amplifies the flat noise far more than the
    // other two, which stay near or below the input level.
    assert!(rows["backward_diffusion"].1 > 2.0);
    assert!(rows["proposed"].1 <= 1.5);
    assert!(rows["shock"].1 <= 1.5);
}

#[test]
fn diverging_sharpen_run_reports_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "hot.cfg",
        "input = step_edge\nt_stop = 1.0\nblowup_threshold = 1e4\n",
    );
    let out = run("sharpen", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("diverged"), "{}", stderr_of(&out));
}
