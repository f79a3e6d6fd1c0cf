use super::{load_nonempty_stimulus, load_omega};
use crate::config::{to_config_text, Resolver};
use crate::output::OutDir;
use crate::render::{draw_bars, heat_map, unit_color, View, DIMMED, NEUTRAL};
use anyhow::Result;
use se2group::spectral::{full_spectrum, units_to_json};
use se2group::{build_affinity, extract_units, DiagonalPolicy, ExtractionOptions, PerceptualUnit};
use serde_json::json;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_name = "FILE")]
    stimulus: Option<PathBuf>,
    /// Kernel cache written by `kernel`.
    #[arg(long, value_name = "FILE")]
    kernel: Option<PathBuf>,
    /// Transfer slope γ; the affinity is scaled by γμ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Facilitation μ.
    #[arg(long)]
    mu: Option<f64>,
    /// self | zero
    #[arg(long)]
    diagonal: Option<DiagonalPolicy>,
    /// Stop when the leading eigenvalue falls to this fraction of the first.
    #[arg(long)]
    eigen_stop: Option<f64>,
    /// Membership cut relative to the eigenvector maximum.
    #[arg(long)]
    member_threshold: Option<f64>,
    #[arg(long)]
    max_units: Option<usize>,
    #[arg(long)]
    render_scale: Option<f64>,
    #[arg(long)]
    bar_length: Option<f64>,
}

pub fn run(args: Args, mut r: Resolver, out_dir: PathBuf) -> Result<()> {
    let stimulus_path: PathBuf = r.required("stimulus", args.stimulus)?;
    let kernel_path: PathBuf = r.required("kernel", args.kernel)?;
    let gamma = r.value("gamma", args.gamma, 1.0)?;
    let mu = r.value("mu", args.mu, 1.0)?;
    let diagonal = r.value("diagonal", args.diagonal, DiagonalPolicy::default())?;
    let d = ExtractionOptions::default();
    let options = ExtractionOptions {
        eigen_stop: r.value("eigen-stop", args.eigen_stop, d.eigen_stop)?,
        member_threshold: r.value("member-threshold", args.member_threshold, d.member_threshold)?,
        max_units: r.value("max-units", args.max_units, d.max_units)?,
        ..d
    };
    let scale = r.value("render-scale", args.render_scale, 4.0)?;
    let bar = r.value("bar-length", args.bar_length, 2.5)?;
    let resolved = r.finish();

    let stimulus = load_nonempty_stimulus(&stimulus_path)?;
    let grid = load_omega(&kernel_path)?;
    let affinity = build_affinity(&stimulus, &grid, gamma, mu, diagonal)?;
    let spectrum = full_spectrum(affinity.entries())?;
    let units = extract_units(&affinity, &options)?;

    let mut out = OutDir::create(out_dir)?;
    out.write_json("units.json", &units_to_json(&units))?;
    out.write_text("affinity.csv", &affinity.to_csv())?;
    let mut sidecar = affinity.sidecar();
    sidecar["config"] = resolved.clone();
    out.write_json("affinity.json", &sidecar)?;
    out.write_text("spectrum.csv", &spectrum.to_csv())?;

    let n = stimulus.len();
    let view = View::around(stimulus.elements(), bar, scale);
    if !units.is_empty() {
        let colors = membership_colors(n, &units[..1], &[]);
        out.write_ppm(
            "unit1.ppm",
            &draw_bars(stimulus.elements(), &colors, &view, bar),
            &resolved,
        )?;
    }
    for k in 0..units.len() {
        let colors = membership_colors(n, &units[k..=k], &units[..k]);
        let name = format!("iteration_{:02}.ppm", k + 1);
        out.write_ppm(&name, &draw_bars(stimulus.elements(), &colors, &view, bar), &resolved)?;
    }
    let order = unit_order(n, &units);
    let cell = (300 / n.max(1)).max(1);
    let heat = heat_map(n, |i, j| affinity.entries()[(i, j)], &order, cell);
    out.write_pgm("affinity.pgm", &heat, &resolved)?;
    out.write_text("group.conf", &to_config_text(&resolved))?;

    let eig = &spectrum.eigenvalues;
    let ratio = if eig.len() > 1 && eig[1] > 0.0 {
        json!(eig[0] / eig[1])
    } else {
        json!(null)
    };
    let summary = json!({
        "n_elements": n,
        "n_units": units.len(),
        "unit_sizes": units.iter().map(|u| u.member_indices.len()).collect::<Vec<_>>(),
        "lambda_1": eig.first(),
        "lambda_ratio_12": ratio,
        "render_order": order,
        "files": out.written(),
        "config": resolved,
    });
    out.write_json("group.json", &summary)?;
    println!(
        "group: {} units from {} elements; first unit has {} members -> {}",
        units.len(),
        n,
        units.first().map_or(0, |u| u.member_indices.len()),
        out.path("units.json").display()
    );
    Ok(())
}

/// Current unit in its channel colour, earlier units dimmed, the rest grey.
fn membership_colors(n: usize, current: &[PerceptualUnit], earlier: &[PerceptualUnit]) -> Vec<[f64; 3]> {
    let mut colors = vec![NEUTRAL; n];
    for u in earlier {
        for &i in &u.member_indices {
            colors[i] = DIMMED;
        }
    }
    let k = earlier.len();
    for u in current {
        for &i in &u.member_indices {
            colors[i] = unit_color(k);
        }
    }
    colors
}

/// Members of each unit in extraction order, then everything else.
fn unit_order(n: usize, units: &[PerceptualUnit]) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for u in units {
        for &i in &u.member_indices {
            if !seen[i] {
                seen[i] = true;
                order.push(i);
            }
        }
    }
    order.extend((0..n).filter(|&i| !seen[i]));
    order
}
