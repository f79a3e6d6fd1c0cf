use super::{load_nonempty_stimulus, load_omega};
use crate::config::{to_config_text, Resolver};
use crate::output::OutDir;
use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use se2group::mean_field::{
    omega_matrix, outside_domain_stays_zero, simulate_nonlinear, simulate_reduced, stability_threshold,
    stationary_state,
};
use se2group::{ForcingForm, MeanFieldParams};
use serde_json::json;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_name = "FILE")]
    stimulus: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    kernel: Option<PathBuf>,
    /// Decay rate α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Transfer slope γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Transfer centre and input level (default: the stimulus' level).
    #[arg(long)]
    c: Option<f64>,
    /// Facilitation μ.
    #[arg(long)]
    mu: Option<f64>,
    /// linearized | proportional: forcing of the reduced equation.
    #[arg(long)]
    forcing: Option<ForcingForm>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Keep every n-th step in the trajectory.
    #[arg(long)]
    stride: Option<usize>,
    /// nonlinear | reduced | homogeneous
    #[arg(long)]
    mode: Option<String>,
    /// zero | uniform | random initial state.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    init_amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also run the dynamics with off-stimulus points and report their activity.
    #[arg(long)]
    off_domain: bool,
    /// Stability sweep `start:stop:count` over μ, written to sweep.csv.
    #[arg(long, value_name = "START:STOP:COUNT")]
    mu_sweep: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Nonlinear,
    Reduced,
    Homogeneous,
}

fn parse_mode(s: &str) -> Result<Mode> {
    Ok(match s {
        "nonlinear" => Mode::Nonlinear,
        "reduced" => Mode::Reduced,
        "homogeneous" => Mode::Homogeneous,
        other => bail!("unknown mode '{other}' (expected nonlinear|reduced|homogeneous)"),
    })
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        bail!("sweep '{s}' is not start:stop:count");
    };
    let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
    let n: usize = n.trim().parse()?;
    if n < 2 || !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        bail!("sweep '{s}' needs a finite nonnegative range and at least 2 points");
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

fn initial_state(kind: &str, n: usize, amplitude: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(match kind {
        "zero" => vec![0.0; n],
        "uniform" => vec![amplitude; n],
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| amplitude * rng.random_range(-1.0..=1.0)).collect()
        }
        other => bail!("unknown init '{other}' (expected zero|uniform|random)"),
    })
}

pub fn run(args: Args, mut r: Resolver, out_dir: PathBuf) -> Result<()> {
    let stimulus_path: PathBuf = r.required("stimulus", args.stimulus)?;
    let kernel_path: PathBuf = r.required("kernel", args.kernel)?;
    let stimulus = load_nonempty_stimulus(&stimulus_path)?;
    let d = MeanFieldParams::default();
    let alpha = r.value("alpha", args.alpha, d.alpha)?;
    // time scales follow the decay rate
    let p = MeanFieldParams {
        alpha,
        gamma_slope: r.value("gamma", args.gamma, d.gamma_slope)?,
        c: r.value("c", args.c, stimulus.input_level())?,
        mu: r.value("mu", args.mu, d.mu)?,
        forcing_form: r.value("forcing", args.forcing, d.forcing_form)?,
        dt: r.value("dt", args.dt, d.dt / alpha)?,
        t_end: r.value("t-end", args.t_end, d.t_end / alpha)?,
        stride: r.value("stride", args.stride, d.stride)?,
    };
    let mode_text = r.value("mode", args.mode, "nonlinear".to_string())?;
    let mode = parse_mode(&mode_text)?;
    let default_init = if mode == Mode::Homogeneous { "random" } else { "zero" };
    let init = r.value("init", args.init, default_init.to_string())?;
    let amplitude = r.value("init-amplitude", args.init_amplitude, 0.01)?;
    let seed = r.value("seed", args.seed, 0u64)?;
    let off_domain = r.switch("off-domain", args.off_domain, false)?;
    let sweep_text: Option<String> = r.optional("mu-sweep", args.mu_sweep)?;
    let sweep = sweep_text.as_deref().map(parse_sweep).transpose()?;
    let resolved = r.finish();
    p.validate()?;

    let grid = load_omega(&kernel_path)?;
    let w = omega_matrix(&grid, stimulus.elements(), stimulus.angle_mode());
    let n = stimulus.len();
    let stability = stability_threshold(&w, &p)?;
    let weak = &stability.weak_connectivity;
    if !weak.pass {
        log::warn!(
            "weak connectivity fails (lhs {:.4e} > bound {:.4e}); the reduction to the stimulus is not justified",
            weak.lhs,
            weak.bound
        );
    }
    let a0 = initial_state(&init, n, amplitude, seed)?;
    let trajectory = match mode {
        Mode::Nonlinear => simulate_nonlinear(&w, &vec![p.c; n], &a0, &p)?,
        Mode::Reduced => simulate_reduced(&w, &p, &a0, false)?,
        Mode::Homogeneous => simulate_reduced(&w, &p, &a0, true)?,
    };

    let mut out = OutDir::create(out_dir)?;
    out.write_text("trajectory.csv", &trajectory.to_csv())?;
    out.write_json(
        "trajectory.json",
        &json!({
            "n_units": n,
            "n_samples": trajectory.times.len(),
            "max_abs": trajectory.max_abs(),
            "peak_coupling": trajectory.peak_coupling,
            "config": resolved,
        }),
    )?;

    let mut report = stability.to_json();
    report["reduction_valid"] = json!(weak.pass);
    report["weak_connectivity"]["slack"] = json!(weak.slack);
    if let Some(reason) = &weak.reason {
        report["weak_connectivity"]["reason"] = json!(reason);
    }
    report["mode"] = json!(mode_text);
    report["max_abs"] = json!(trajectory.max_abs());
    if mode == Mode::Reduced && stability.stable {
        let s = stationary_state(&w, &p)?;
        let final_state = trajectory.final_state();
        let gap = s
            .values
            .iter()
            .zip(final_state)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report["stationary"] = json!({
            "residual": s.residual,
            "distance_from_final_state": gap,
            "linear_regime": s.certificate,
        });
    }
    if off_domain {
        let o = outside_domain_stays_zero(&grid, &stimulus, &p, seed)?;
        report["off_domain"] = serde_json::to_value(&o)?;
    }
    if let Some(mus) = &sweep {
        let mut csv = String::from("mu,stable,leading_rate\n");
        for &mu in mus {
            let s = stability_threshold(&w, &MeanFieldParams { mu, ..p })?;
            csv.push_str(&format!("{mu},{},{}\n", s.stable, s.leading_rate));
        }
        out.write_text("sweep.csv", &csv)?;
    }
    report["config"] = resolved.clone();
    out.write_text("simulate.conf", &to_config_text(&resolved))?;
    report["files"] = json!(out.written());
    out.write_json("stability.json", &report)?;
    println!(
        "simulate: lambda_1 {:.4}, mu* {:.4e}, mu {} ({}), weak connectivity {} -> {}",
        stability.lambda_tilde_1,
        stability.mu_star,
        p.mu,
        if stability.stable { "stable" } else { "unstable" },
        if weak.pass { "holds" } else { "fails" },
        out.path("stability.json").display()
    );
    Ok(())
}
