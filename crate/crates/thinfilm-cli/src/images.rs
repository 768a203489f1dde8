//! The sharpen, enhance, and compare subcommands: image in, image out,
//! with the evolution diagnostics or the filter comparison table.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::thread;

use thinfilm::evolve::write_reports_csv;
use thinfilm::imaging::{
    enhance_contrast, flat_variance_ratio, intensity_range, linear_backward_diffusion,
    max_gradient, region_variance, sharpen, shock_filter, step_edge, ImageGray, SharpenRecipe,
};

use crate::config::Config;
use crate::{ensure_out_dir, write_manifest, CommonArgs};

pub fn run_sharpen(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let (input, synthetic) = load_input(&cfg, args.seed)?;
    let recipe = load_recipe(&cfg, 0.025)?;
    cfg.finish()?;

    let (output, outcome) = sharpen(&input, &recipe).map_err(|e| e.to_string())?;

    ensure_out_dir(&args.out)?;
    write_image(&args.out.join("input.pgm"), &input)?;
    write_image(&args.out.join("sharpened.pgm"), &output)?;
    let csv_path = args.out.join("diagnostics.csv");
    let mut w = BufWriter::new(
        File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?,
    );
    write_reports_csv(&mut w, &outcome.reports)
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    write_manifest(&args.out, "sharpen", args.seed, &[], &cfg)?;

    println!(
        "sharpened: edge gain {:.4}, flat variance ratio {:.4}",
        edge_gain(&input, &output),
        flat_ratio(&input, &output, synthetic)
    );
    Ok(0)
}

pub fn run_enhance(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let (input, _) = load_input(&cfg, args.seed)?;
    let recipe = load_recipe(&cfg, 0.03)?;
    let lambda = cfg.get_f64("lambda")?.unwrap_or(10.0);
    cfg.finish()?;

    let (output, outcome) = enhance_contrast(&input, &recipe, lambda).map_err(|e| e.to_string())?;

    ensure_out_dir(&args.out)?;
    write_image(&args.out.join("input.pgm"), &input)?;
    write_image(&args.out.join("enhanced.pgm"), &output)?;
    let csv_path = args.out.join("diagnostics.csv");
    let mut w = BufWriter::new(
        File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?,
    );
    write_reports_csv(&mut w, &outcome.reports)
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    write_manifest(&args.out, "enhance", args.seed, &[], &cfg)?;

    let f1_first = outcome.reports.first().map_or(0.0, |r| r.f1);
    let f1_last = outcome.reports.last().map_or(0.0, |r| r.f1);
    println!(
        "enhanced: edge gain {:.4}, l2 growth {:.4}",
        edge_gain(&input, &output),
        if f1_first > 0.0 {
            (f1_last / f1_first).sqrt()
        } else {
            f64::NAN
        }
    );
    Ok(0)
}

pub fn run_compare(args: &CommonArgs) -> Result<u8, String> {
    let cfg = Config::load(&args.config)?;
    let (input, synthetic) = load_input(&cfg, args.seed)?;
    let recipe = load_recipe(&cfg, 0.025)?;
    let backward_epsilon = cfg.get_f64("backward_epsilon")?.unwrap_or(1e-3);
    let backward_dt = cfg.get_f64("backward_dt")?.unwrap_or(1e-3);
    let backward_t = cfg.get_f64("backward_t")?.unwrap_or(0.2);
    let shock_dt = cfg.get_f64("shock_dt")?.unwrap_or(0.1);
    let shock_t = cfg.get_f64("shock_t")?.unwrap_or(0.5);
    cfg.finish()?;

    // The three filters only read the shared input, so they can run in
    // parallel; determinism is untouched because nothing is shared
    // mutably and each output is written from the joining thread.
    let (proposed, backward, shock) = thread::scope(|scope| {
        let proposed = scope.spawn(|| sharpen(&input, &recipe).map(|(image, _)| image));
        let backward = scope.spawn(|| {
            linear_backward_diffusion(&input, backward_epsilon, backward_dt, backward_t)
        });
        let shock = scope.spawn(|| shock_filter(&input, shock_dt, shock_t));
        (
            proposed.join().expect("sharpen thread panicked"),
            backward.join().expect("backward diffusion thread panicked"),
            shock.join().expect("shock filter thread panicked"),
        )
    });
    let proposed = proposed.map_err(|e| e.to_string())?;
    let backward = backward.map_err(|e| e.to_string())?;
    let shock = shock.map_err(|e| e.to_string())?;

    ensure_out_dir(&args.out)?;
    write_image(&args.out.join("input.pgm"), &input)?;
    write_image(&args.out.join("proposed.pgm"), &proposed)?;
    write_image(&args.out.join("backward.pgm"), &backward)?;
    write_image(&args.out.join("shock.pgm"), &shock)?;

    let csv_path = args.out.join("metrics.csv");
    let mut w = BufWriter::new(
        File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?,
    );
    writeln!(w, "filter,edge_gain,flat_variance_ratio,out_min,out_max")
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    for (name, output) in [
        ("proposed", &proposed),
        ("backward_diffusion", &backward),
        ("shock", &shock),
    ] {
        let (lo, hi) = intensity_range(output);
        let row = format!(
            "{name},{:.16e},{:.16e},{:.16e},{:.16e}",
            edge_gain(&input, output),
            flat_ratio(&input, output, synthetic),
            lo,
            hi
        );
        writeln!(w, "{row}").map_err(|e| format!("{}: {e}", csv_path.display()))?;
        println!("{row}");
    }
    write_manifest(&args.out, "compare", args.seed, &[], &cfg)?;
    Ok(0)
}

/// Reads the input image, either the synthetic benchmark or a PGM file.
/// The second value reports whether the benchmark (with its known flat
/// windows) is in play.
fn load_input(cfg: &Config, seed: u64) -> Result<(ImageGray, bool), String> {
    let spec = cfg.require("input")?;
    if spec == "step_edge" {
        let sigma = cfg.get_f64("noise_sigma")?.unwrap_or(0.01);
        return Ok((step_edge(seed, sigma), true));
    }
    if cfg.contains("noise_sigma") {
        return Err("config: key `noise_sigma` applies only to input = step_edge".into());
    }
    let mut r =
        BufReader::new(File::open(spec).map_err(|e| format!("input image {spec}: {e}"))?);
    let image = ImageGray::read_pgm(&mut r).map_err(|e| format!("input image {spec}: {e}"))?;
    Ok((image, false))
}

/// Recipe defaults with the per-command stop time and any overrides.
fn load_recipe(cfg: &Config, default_t_stop: f64) -> Result<SharpenRecipe, String> {
    let mut recipe = SharpenRecipe {
        t_stop: default_t_stop,
        ..SharpenRecipe::default()
    };
    if let Some(v) = cfg.get_f64("t_stop")? {
        recipe.t_stop = v;
    }
    if let Some(v) = cfg.get_f64("dt")? {
        recipe.dt = v;
    }
    if let Some(v) = cfg.get_f64("intensity_scale")? {
        recipe.intensity_scale = v;
    }
    if let Some(v) = cfg.get_f64("blowup_threshold")? {
        recipe.blowup_threshold = v;
    }
    Ok(recipe)
}

fn write_image(path: &Path, image: &ImageGray) -> Result<(), String> {
    let mut w =
        BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
    image
        .write_pgm(&mut w)
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// Strongest-gradient ratio over all interior nodes, frame included.
fn edge_gain(input: &ImageGray, output: &ImageGray) -> f64 {
    let base = max_gradient(input, 0);
    if base > 0.0 {
        max_gradient(output, 0) / base
    } else {
        f64::NAN
    }
}

/// Noise response: the benchmark uses its two known flat windows, real
/// images fall back to the whole-frame variance ratio.
fn flat_ratio(input: &ImageGray, output: &ImageGray, synthetic: bool) -> f64 {
    if synthetic {
        return flat_variance_ratio(input, output);
    }
    let whole = |im: &ImageGray| region_variance(im, 0, im.width() - 1, 0, im.height() - 1);
    let base = whole(input);
    if base > 0.0 {
        whole(output) / base
    } else {
        f64::NAN
    }
}
