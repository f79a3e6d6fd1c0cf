use crate::config::{to_config_text, Resolver};
use crate::output::OutDir;
use crate::render::kernel_projection;
use anyhow::Result;
use se2group::kernel::write_grid;
use se2group::{estimate_kernel, FpParams, GridSpec, KernelConfig, NoiseScaling};
use serde_json::json;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Angular noise σ.
    #[arg(long)]
    sigma: Option<f64>,
    /// Arc-length step Δs.
    #[arg(long)]
    step: Option<f64>,
    /// Steps per path.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// linear | diffusive
    #[arg(long)]
    noise_scaling: Option<NoiseScaling>,
    /// Grid half extent in x and y (default steps · step).
    #[arg(long)]
    half_extent: Option<f64>,
    #[arg(long)]
    nxy: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    /// Smoothing bandwidth in bins, all three axes.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Also average the kernel with its mirror image.
    #[arg(long)]
    reflection: bool,
}

pub fn run(args: Args, mut r: Resolver, out_dir: PathBuf) -> Result<()> {
    let d = FpParams::default();
    let params = FpParams {
        sigma_diff: r.value("sigma", args.sigma, d.sigma_diff)?,
        step_ds: r.value("step", args.step, d.step_ds)?,
        n_steps: r.value("steps", args.steps, d.n_steps)?,
        n_paths: r.value("paths", args.paths, d.n_paths)?,
        seed: r.value("seed", args.seed, d.seed)?,
        noise_scaling: r.value("noise-scaling", args.noise_scaling, d.noise_scaling)?,
    };
    let dg = GridSpec::for_params(&params);
    let half_extent = r.value("half-extent", args.half_extent, dg.x_range.1)?;
    let grid = GridSpec::centered(
        half_extent,
        r.value("nxy", args.nxy, dg.n_x)?,
        r.value("ntheta", args.ntheta, dg.n_theta)?,
    );
    let bw = r.value("bandwidth", args.bandwidth, 1.0)?;
    let config = KernelConfig {
        params,
        grid,
        bandwidth: (bw, bw, bw),
        reflection_symmetric: r.switch("reflection", args.reflection, false)?,
    };
    let resolved = r.finish();

    let estimate = estimate_kernel(&config)?;
    let mut out = OutDir::create(out_dir)?;
    out.write_with("kernel.se2k", |w| {
        Ok(write_grid(&estimate.omega, Some(resolved.clone()), w)?)
    })?;
    out.write_pgm(
        "kernel_gamma_xy.pgm",
        &kernel_projection(&estimate.gamma, 4.0),
        &resolved,
    )?;
    out.write_pgm(
        "kernel_omega_xy.pgm",
        &kernel_projection(&estimate.omega, 4.0),
        &resolved,
    )?;
    out.write_text("kernel.conf", &to_config_text(&resolved))?;
    let s = &estimate.summary;
    let summary = json!({
        "gamma_mass": s.gamma_mass,
        "gamma_max": s.gamma_max,
        "gamma_center_of_mass": [s.gamma_center_of_mass.0, s.gamma_center_of_mass.1],
        "anisotropy_ratio": finite_or_text(s.anisotropy_ratio),
        "out_of_range_fraction": s.out_of_range_fraction,
        "files": out.written(),
        "config": resolved,
    });
    out.write_json("kernel.json", &summary)?;
    println!(
        "kernel: mass {:.4}, anisotropy {:.3}, out of range {:.4} -> {}",
        s.gamma_mass,
        s.anisotropy_ratio,
        s.out_of_range_fraction,
        out.path("kernel.se2k").display()
    );
    Ok(())
}

/// JSON has no infinities; non-finite values are written as strings.
pub fn finite_or_text(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}
