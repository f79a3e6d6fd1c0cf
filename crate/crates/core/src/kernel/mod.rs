//! Monte Carlo estimate of the Fokker–Planck fundamental solution on SE(2)
//! and the symmetrised connectivity kernel built from it.
//!
//! Paths follow the discretised stochastic curve
//!
//! ```text
//! x_{s+1} = x_s + Δs cos θ_s
//! y_{s+1} = y_s + Δs sin θ_s
//! θ_{s+1} = θ_s + Δs · N(0, σ²)
//! ```
//!
//! started at the identity. The kernel is the time-integrated occupation of
//! grid bins, averaged over paths. Pairs of points are evaluated through
//! left-invariance, so one grid around the identity serves every pair.

mod cache;
mod grid;

pub use cache::{read_grid, write_grid, CACHE_FORMAT_VERSION, CACHE_MAGIC};
pub use grid::{GridSpec, KernelGrid, Normalization};

use crate::error::{Error, Result};
use crate::se2::{relative_displacement, AngleMode, CorticalPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fraction of out-of-range visits above which accumulation logs a warning.
pub const OUT_OF_RANGE_WARNING: f64 = 0.05;

/// How the angular increment scales with the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScaling {
    /// `Δθ = Δs · N(0, σ²)`, the literal discretisation.
    #[default]
    Linear,
    /// `Δθ = √Δs · N(0, σ²)`, Brownian scaling.
    Diffusive,
}

impl std::str::FromStr for NoiseScaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "diffusive" => Ok(Self::Diffusive),
            other => Err(format!("unknown noise scaling '{other}' (expected linear|diffusive)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpParams {
    /// Standard deviation σ of the angular noise.
    pub sigma_diff: f64,
    /// Arc-length step Δs.
    pub step_ds: f64,
    /// Number of steps H per path.
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise_scaling: NoiseScaling,
}

impl Default for FpParams {
    fn default() -> Self {
        Self {
            sigma_diff: 0.08,
            step_ds: 1.0,
            n_steps: 100,
            n_paths: 3000,
            seed: 1,
            noise_scaling: NoiseScaling::Linear,
        }
    }
}

impl FpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_diff > 0.0 && self.step_ds > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma ({}) and step ({}) must be positive",
                self.sigma_diff, self.step_ds
            )));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::InvalidParameter("need at least one step and one path".into()));
        }
        Ok(())
    }

    fn angular_step(&self) -> f64 {
        match self.noise_scaling {
            NoiseScaling::Linear => self.step_ds * self.sigma_diff,
            NoiseScaling::Diffusive => self.step_ds.sqrt() * self.sigma_diff,
        }
    }

    fn path_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Walks path `index`, calling `visit` on each of its `H + 1` points.
    fn walk(&self, index: usize, mut visit: impl FnMut(&CorticalPoint)) {
        let mut rng = self.path_rng(index);
        let noise = self.angular_step();
        let (mut x, mut y, mut theta) = (0.0f64, 0.0f64, 0.0f64);
        visit(&CorticalPoint::IDENTITY);
        for _ in 0..self.n_steps {
            let (s, c) = theta.sin_cos();
            x += self.step_ds * c;
            y += self.step_ds * s;
            theta += noise * rng.sample::<f64, _>(StandardNormal);
            let p = CorticalPoint::new(x, y, theta);
            theta = p.theta;
            visit(&p);
        }
    }
}

/// One sample path of `H + 1` points from the identity; stream `index` of the seed.
pub fn sample_path(params: &FpParams, index: usize) -> Vec<CorticalPoint> {
    let mut path = Vec::with_capacity(params.n_steps + 1);
    params.walk(index, |p| path.push(*p));
    path
}

/// All `n_paths` sample paths.
pub fn sample_paths(params: &FpParams) -> Result<Vec<Vec<CorticalPoint>>> {
    params.validate()?;
    Ok((0..params.n_paths)
        .into_par_iter()
        .map(|i| sample_path(params, i))
        .collect())
}

/// Occupation counts of a set of paths.
#[derive(Debug, Clone)]
pub struct Accumulation {
    pub grid: KernelGrid,
    pub total_visits: u64,
    pub out_of_range: u64,
}

impl Accumulation {
    pub fn out_of_range_fraction(&self) -> f64 {
        self.out_of_range as f64 / self.total_visits.max(1) as f64
    }
}

fn finish_accumulation(
    spec: GridSpec,
    counts: Vec<u64>,
    n_paths: usize,
    total: u64,
    outside: u64,
) -> Result<Accumulation> {
    let values = counts.iter().map(|&c| c as f64 / n_paths as f64).collect();
    let grid = KernelGrid::from_values(spec, values)?;
    let acc = Accumulation {
        grid,
        total_visits: total,
        out_of_range: outside,
    };
    if acc.out_of_range_fraction() > OUT_OF_RANGE_WARNING {
        log::warn!(
            "{:.1}% of path visits fall outside the kernel grid",
            100.0 * acc.out_of_range_fraction()
        );
    }
    Ok(acc)
}

/// Histogram of every visit of every path over the grid, divided by the
/// number of paths.
pub fn accumulate_gamma(paths: &[Vec<CorticalPoint>], spec: &GridSpec) -> Result<Accumulation> {
    spec.validate()?;
    let mut counts = vec![0u64; spec.len()];
    let (mut total, mut outside) = (0u64, 0u64);
    for p in paths.iter().flatten() {
        total += 1;
        match spec.bin_of(p) {
            Some(idx) => counts[idx] += 1,
            None => outside += 1,
        }
    }
    finish_accumulation(*spec, counts, paths.len().max(1), total, outside)
}

/// Samples and accumulates in one pass without keeping the paths. Per-worker
/// histograms are integer counts, so the result does not depend on the
/// number of workers.
pub fn estimate_gamma(params: &FpParams, spec: &GridSpec) -> Result<Accumulation> {
    params.validate()?;
    spec.validate()?;
    const CHUNK: usize = 512;
    let n_chunks = params.n_paths.div_ceil(CHUNK);
    let (counts, total, outside) = (0..n_chunks)
        .into_par_iter()
        .fold(
            || (vec![0u64; spec.len()], 0u64, 0u64),
            |(mut counts, mut total, mut outside), chunk| {
                let end = ((chunk + 1) * CHUNK).min(params.n_paths);
                for i in chunk * CHUNK..end {
                    params.walk(i, |p| {
                        total += 1;
                        match spec.bin_of(p) {
                            Some(idx) => counts[idx] += 1,
                            None => outside += 1,
                        }
                    });
                }
                (counts, total, outside)
            },
        )
        .reduce(
            || (vec![0u64; spec.len()], 0, 0),
            |(mut a, ta, oa), (b, tb, ob)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, ta + tb, oa + ob)
            },
        );
    finish_accumulation(*spec, counts, params.n_paths, total, outside)
}

/// Normalised Gaussian taps for a bandwidth in bins, truncated at 3 bandwidths.
fn gaussian_taps(bandwidth: f64) -> Vec<f64> {
    let reach = (3.0 * bandwidth).ceil() as isize;
    let mut taps: Vec<f64> = (-reach..=reach)
        .map(|k| (-((k * k) as f64) / (2.0 * bandwidth * bandwidth)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable local weighted mean with Gaussian taps.
///
/// θ wraps around. On the spatial axes each bin spreads its mass only over
/// in-range neighbours with renormalised weights, so total mass is preserved.
/// A zero bandwidth leaves that axis untouched.
pub fn smooth(grid: &KernelGrid, bandwidth: (f64, f64, f64)) -> Result<KernelGrid> {
    let (bx, by, bt) = bandwidth;
    if [bx, by, bt].iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "smoothing bandwidths must be nonnegative, got {bandwidth:?}"
        )));
    }
    let spec = *grid.spec();
    let mut values = grid.values().to_vec();
    let axes = [(bx, spec.n_x, false), (by, spec.n_y, false), (bt, spec.n_theta, true)];
    for (axis, &(b, n, cyclic)) in axes.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let taps = gaussian_taps(b);
        let reach = (taps.len() / 2) as isize;
        let stride = match axis {
            0 => 1,
            1 => spec.n_x,
            _ => spec.n_x * spec.n_y,
        };
        let mut out = vec![0.0; values.len()];
        for (idx, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let pos = ((idx / stride) % n) as isize;
            let base = idx - pos as usize * stride;
            let target = |k: isize| -> Option<usize> {
                let q = pos + k;
                if cyclic {
                    Some(q.rem_euclid(n as isize) as usize)
                } else if q >= 0 && (q as usize) < n {
                    Some(q as usize)
                } else {
                    None
                }
            };
            let norm: f64 = if cyclic {
                1.0
            } else {
                (-reach..=reach)
                    .filter(|&k| target(k).is_some())
                    .map(|k| taps[(k + reach) as usize])
                    .sum()
            };
            for k in -reach..=reach {
                if let Some(q) = target(k) {
                    out[base + q * stride] += v * taps[(k + reach) as usize] / norm;
                }
            }
        }
        values = out;
    }
    let mut out = KernelGrid::from_values(spec, values)?;
    out.normalization = grid.normalization;
    out.symmetrized = grid.symmetrized;
    out.source_params = grid.source_params;
    out.smoothing = Some(bandwidth);
    Ok(out)
}

/// `ω₀(η) = ½ (Γ₀(η) + Γ₀(η⁻¹))` at every bin centre, with `Γ₀(η⁻¹)` read by
/// interpolation.
pub fn symmetrize(grid: &KernelGrid) -> Result<KernelGrid> {
    let spec = grid.spec();
    if !spec.is_symmetric() {
        return Err(Error::InvalidGrid(format!(
            "symmetrisation needs ranges symmetric about 0, got x {:?} y {:?}",
            spec.x_range, spec.y_range
        )));
    }
    let values = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let eta = spec.center(idx);
            0.5 * (grid.values()[idx] + grid.value_at(&eta.inverse()))
        })
        .collect();
    let mut out = KernelGrid::from_values(*spec, values)?;
    out.normalization = grid.normalization;
    out.smoothing = grid.smoothing;
    out.source_params = grid.source_params;
    out.symmetrized = true;
    Ok(out)
}

/// Averages the grid with its mirror image under `(x, y, θ) -> (x, -y, -θ)`.
/// Bin centres map onto bin centres, so no interpolation is involved.
pub fn reflection_symmetrize(grid: &KernelGrid) -> Result<KernelGrid> {
    let spec = *grid.spec();
    if !spec.is_symmetric() {
        return Err(Error::InvalidGrid("reflection needs a symmetric y range".into()));
    }
    let mut out = grid.clone();
    for it in 0..spec.n_theta {
        let mt = (spec.n_theta - it) % spec.n_theta;
        for iy in 0..spec.n_y {
            let my = spec.n_y - 1 - iy;
            for ix in 0..spec.n_x {
                out.set(ix, iy, it, 0.5 * (grid.get(ix, iy, it) + grid.get(ix, my, mt)));
            }
        }
    }
    Ok(out)
}

/// Connectivity `ω(ξ_i, ξ_j)` between two elements.
///
/// The displacement of each point in the other's frame is looked up and the
/// two readings averaged, so the value is exactly symmetric in its arguments
/// and exactly invariant under moving both points by the same group element
/// (up to rounding in the displacement). In half-circle mode every element
/// stands for both of its directions and the best pairing is taken.
pub fn eval_omega(grid: &KernelGrid, xi_i: &CorticalPoint, xi_j: &CorticalPoint, mode: AngleMode) -> f64 {
    let pair = |a: &CorticalPoint, b: &CorticalPoint| {
        0.5 * (grid.value_at(&relative_displacement(b, a)) + grid.value_at(&relative_displacement(a, b)))
    };
    match mode {
        AngleMode::FullCircle => pair(xi_i, xi_j),
        AngleMode::HalfCircle => {
            let (fi, fj) = (xi_i.flipped(), xi_j.flipped());
            pair(xi_i, xi_j)
                .max(pair(xi_i, &fj))
                .max(pair(&fi, xi_j))
                .max(pair(&fi, &fj))
        }
    }
}

/// Distance implied by `ω ≈ exp(-d²)`: `sqrt(-ln(ω / ω_max))`.
pub fn distance_estimate(omega_value: f64, omega_max: f64) -> Result<f64> {
    if !(omega_value > 0.0) {
        return Err(Error::UndefinedDistance(omega_value));
    }
    if !(omega_max > 0.0) || omega_value > omega_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < omega ({omega_value}) <= omega_max ({omega_max})"
        )));
    }
    Ok((-(omega_value / omega_max).ln()).max(0.0).sqrt())
}

/// Everything needed to go from path parameters to a usable kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub params: FpParams,
    pub grid: GridSpec,
    /// Smoothing bandwidths in bins for (x, y, θ).
    pub bandwidth: (f64, f64, f64),
    /// Also average over the reflection `(x, y, θ) -> (x, -y, -θ)`.
    pub reflection_symmetric: bool,
}

impl KernelConfig {
    pub fn new(params: FpParams) -> Self {
        Self {
            params,
            grid: GridSpec::for_params(&params),
            bandwidth: (1.0, 1.0, 1.0),
            reflection_symmetric: false,
        }
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self::new(FpParams::default())
    }
}

/// Summary statistics reported alongside an estimated kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub gamma_mass: f64,
    pub gamma_max: f64,
    pub gamma_center_of_mass: (f64, f64),
    /// Along-x over along-y projected mass of Γ at 20% of the x range.
    pub anisotropy_ratio: f64,
    pub out_of_range_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct KernelEstimate {
    /// Smoothed fundamental solution Γ (raw scale).
    pub gamma: KernelGrid,
    /// Symmetrised, max-one normalised ω.
    pub omega: KernelGrid,
    pub summary: KernelSummary,
}

/// sample → accumulate → smooth → symmetrise → normalise.
pub fn estimate_kernel(config: &KernelConfig) -> Result<KernelEstimate> {
    let acc = estimate_gamma(&config.params, &config.grid)?;
    let mut gamma = smooth(&acc.grid, config.bandwidth)?;
    gamma.source_params = Some(config.params);
    let mut omega = symmetrize(&gamma)?;
    if config.reflection_symmetric {
        omega = reflection_symmetrize(&omega)?;
    }
    let omega = omega.normalized_max_one()?;
    let x_extent = config.grid.x_range.1 - config.grid.x_range.0;
    let summary = KernelSummary {
        gamma_mass: gamma.total_mass(),
        gamma_max: gamma.max_value(),
        gamma_center_of_mass: gamma.xy_center_of_mass(),
        anisotropy_ratio: gamma.anisotropy_ratio(0.2 * x_extent),
        out_of_range_fraction: acc.out_of_range_fraction(),
    };
    Ok(KernelEstimate { gamma, omega, summary })
}
