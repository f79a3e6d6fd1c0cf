use crate::config::{to_config_text, Resolver};
use crate::output::OutDir;
use crate::render::{draw_bars, unit_color, View, NEUTRAL};
use anyhow::{bail, Context, Result};
use se2group::lifting::{Contour, BACKGROUND_LABEL};
use se2group::{generate_fhh_stimulus, AngleMode, StimulusConfig};
use serde_json::json;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// single | two: which planted contours to use.
    #[arg(long)]
    scene: Option<String>,
    /// JSON list of contours replacing the scene's.
    #[arg(long, value_name = "FILE")]
    contours: Option<PathBuf>,
    /// Total number of elements, contours included.
    #[arg(long)]
    n_total: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Orientation noise (radians) on contour elements.
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    half_height: Option<f64>,
    #[arg(long)]
    min_sep: Option<f64>,
    /// full | half
    #[arg(long)]
    angle_mode: Option<AngleMode>,
    /// Input level of every element.
    #[arg(long)]
    c: Option<f64>,
    /// Render pixels per world unit.
    #[arg(long)]
    render_scale: Option<f64>,
    /// Rendered bar length in world units.
    #[arg(long)]
    bar_length: Option<f64>,
}

pub fn run(args: Args, mut r: Resolver, out_dir: PathBuf) -> Result<()> {
    let scene = r.value("scene", args.scene, "single".to_string())?;
    let base = match scene.as_str() {
        "single" => StimulusConfig::default(),
        "two" => StimulusConfig::two_units(),
        other => bail!("unknown scene '{other}' (expected single|two)"),
    };
    let contours = match r.optional("contours", args.contours)? {
        Some(path) => {
            let text =
                std::fs::read_to_string(&path).with_context(|| format!("reading contours {}", path.display()))?;
            serde_json::from_str::<Vec<Contour>>(&text)
                .with_context(|| format!("parsing contours {}", path.display()))?
        }
        None => base.contours.clone(),
    };
    let config = StimulusConfig {
        contours,
        n_total: r.value("n-total", args.n_total, base.n_total)?,
        seed: r.value("seed", args.seed, base.seed)?,
        jitter: r.value("jitter", args.jitter, base.jitter)?,
        half_width: r.value("half-width", args.half_width, base.half_width)?,
        half_height: r.value("half-height", args.half_height, base.half_height)?,
        min_separation: r.value("min-sep", args.min_sep, base.min_separation)?,
        angle_mode: r.value("angle-mode", args.angle_mode, base.angle_mode)?,
        c: r.value("c", args.c, base.c)?,
    };
    let scale = r.value("render-scale", args.render_scale, 4.0)?;
    let bar = r.value("bar-length", args.bar_length, 2.5)?;
    let mut resolved = r.finish();
    resolved["contour_geometry"] = serde_json::to_value(&config.contours)?;

    let stimulus = generate_fhh_stimulus(&config)?;
    let mut out = OutDir::create(out_dir)?;
    out.write_text("stimulus.json", &stimulus.to_json(Some(resolved.clone()))?)?;

    let labels = stimulus.labels().unwrap_or(&[]);
    let colors: Vec<[f64; 3]> = labels
        .iter()
        .map(|&l| {
            if l == BACKGROUND_LABEL {
                NEUTRAL
            } else {
                unit_color((l - 1).max(0) as usize)
            }
        })
        .collect();
    let view = View::new(
        (
            -config.half_width,
            -config.half_height,
            config.half_width,
            config.half_height,
        ),
        scale,
    );
    out.write_ppm(
        "stimulus.ppm",
        &draw_bars(stimulus.elements(), &colors, &view, bar),
        &resolved,
    )?;
    out.write_text("stimulus.conf", &to_config_text(&resolved))?;
    let summary = json!({
        "n_elements": stimulus.len(),
        "n_contour": labels.iter().filter(|&&l| l != BACKGROUND_LABEL).count(),
        "files": out.written(),
        "config": resolved,
    });
    out.write_json("stimulus_summary.json", &summary)?;
    println!(
        "stimulus: {} elements -> {}",
        stimulus.len(),
        out.path("stimulus.json").display()
    );
    Ok(())
}
