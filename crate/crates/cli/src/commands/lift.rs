use crate::config::{to_config_text, Resolver};
use crate::output::OutDir;
use anyhow::{Context, Result};
use se2group::{lift_image, AngleMode, FilterBank, GaborParams, GrayImage, LiftOptions};
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Binary PGM (P5) image.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Number of filter orientations.
    #[arg(long)]
    orientations: Option<usize>,
    /// full | half
    #[arg(long)]
    angle_mode: Option<AngleMode>,
    /// Gabor carrier wavelength in pixels.
    #[arg(long)]
    wavelength: Option<f64>,
    /// Gabor envelope standard deviation in pixels.
    #[arg(long)]
    gabor_sigma: Option<f64>,
    #[arg(long)]
    aspect: Option<f64>,
    /// Odd filter side length.
    #[arg(long)]
    support: Option<usize>,
    /// Minimum response for an element.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Non-maximum suppression radius in pixels (0 disables).
    #[arg(long)]
    nms: Option<f64>,
    /// Keep every super-threshold orientation at a pixel.
    #[arg(long)]
    multi_orientation: bool,
}

pub fn run(args: Args, mut r: Resolver, out_dir: PathBuf) -> Result<()> {
    let input: PathBuf = r.required("input", args.input)?;
    let g = GaborParams::default();
    let gabor = GaborParams {
        wavelength: r.value("wavelength", args.wavelength, g.wavelength)?,
        sigma: r.value("gabor-sigma", args.gabor_sigma, g.sigma)?,
        aspect: r.value("aspect", args.aspect, g.aspect)?,
        support: r.value("support", args.support, g.support)?,
    };
    let orientations = r.value("orientations", args.orientations, 16)?;
    let angle_mode = r.value("angle-mode", args.angle_mode, AngleMode::HalfCircle)?;
    let d = LiftOptions::default();
    let options = LiftOptions {
        response_threshold: r.value("threshold", args.threshold, d.response_threshold)?,
        c: r.value("c", args.c, d.c)?,
        nms_radius: r.value("nms", args.nms, d.nms_radius)?,
        multi_orientation: r.switch("multi-orientation", args.multi_orientation, d.multi_orientation)?,
    };
    let resolved = r.finish();

    let bytes = std::fs::read(&input).with_context(|| format!("reading image {}", input.display()))?;
    let image = GrayImage::read_pgm(&bytes[..]).with_context(|| format!("decoding {}", input.display()))?;
    let bank = FilterBank::gabor(&gabor, orientations, angle_mode)?;
    let stimulus = lift_image(&image, &bank, &options)?;
    if stimulus.is_empty() {
        log::warn!(
            "no filter response above {} in {}; the stimulus is empty",
            options.response_threshold,
            input.display()
        );
    }
    let mut out = OutDir::create(out_dir)?;
    out.write_text("lifted.json", &stimulus.to_json(Some(resolved.clone()))?)?;
    out.write_text("lift.conf", &to_config_text(&resolved))?;
    println!(
        "lift: {} elements -> {}",
        stimulus.len(),
        out.path("lifted.json").display()
    );
    Ok(())
}
