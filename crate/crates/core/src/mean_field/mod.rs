//! Mean-field activity dynamics on the lifted domain.
//!
//! Activity obeys `da/dt = -α a + σ(μ W a + h)` with `σ` the piecewise
//! linear transfer function of slope `γ` centred on `c`. On the stimulus
//! support and under weak connectivity the transfer stays in its linear
//! branch, which gives the reduced linear system studied for stability.

use crate::error::{Error, Result};
use crate::kernel::{eval_omega, KernelGrid};
use crate::lifting::StimulusSet;
use crate::se2::{wrap_angle, CorticalPoint};
use crate::spectral::{full_spectrum, top_eigenpair, DEFAULT_MAX_ITER};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Constant forcing used by the reduced linear equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcingForm {
    /// `β = γ c`.
    ProportionalInput,
    /// `β = 1/2`, the middle branch of the transfer function at `s = c`.
    #[default]
    LinearizedSigmoid,
}

impl std::str::FromStr for ForcingForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proportional" | "proportional_input" => Ok(Self::ProportionalInput),
            "linearized" | "linearized_sigmoid" => Ok(Self::LinearizedSigmoid),
            other => Err(format!(
                "unknown forcing form '{other}' (expected proportional|linearized)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub alpha: f64,
    pub gamma_slope: f64,
    pub c: f64,
    pub mu: f64,
    pub forcing_form: ForcingForm,
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `stride`-th step in the returned trajectory.
    pub stride: usize,
}

impl Default for MeanFieldParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma_slope: 1.0,
            c: 1.0,
            mu: 0.01,
            forcing_form: ForcingForm::LinearizedSigmoid,
            dt: 0.1,
            t_end: 50.0,
            stride: 10,
        }
    }
}

impl MeanFieldParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.gamma_slope, self.c, self.mu, self.dt, self.t_end]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("mean-field parameters must be finite".into()));
        }
        if !(self.alpha > 0.0 && self.gamma_slope > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha ({}), gamma ({}) and c ({}) must be positive",
                self.alpha, self.gamma_slope, self.c
            )));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mu must be nonnegative, got {}",
                self.mu
            )));
        }
        if !(self.dt > 0.0 && self.dt < 2.0 / self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must lie in (0, 2/alpha = {})",
                self.dt,
                2.0 / self.alpha
            )));
        }
        if self.t_end < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Forcing constant of the reduced equation.
    pub fn beta(&self) -> f64 {
        match self.forcing_form {
            ForcingForm::ProportionalInput => self.gamma_slope * self.c,
            ForcingForm::LinearizedSigmoid => 0.5,
        }
    }

    /// Half-width `1/(2γ)` of the linear branch.
    pub fn half_width(&self) -> f64 {
        0.5 / self.gamma_slope
    }
}

/// Piecewise linear transfer: 0 below `c - 1/(2γ)`, `γ(s - c) + 1/2` in
/// between, 1 above `c + 1/(2γ)`.
pub fn transfer(s: f64, p: &MeanFieldParams) -> f64 {
    (p.gamma_slope * (s - p.c) + 0.5).clamp(0.0, 1.0)
}

/// Sampled solution of an activity equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Per component maximum of `|a_i(t)|` over every step, sampled or not.
    pub peak_abs: Vec<f64>,
    /// Maximum of `|μ (W a)_i|` over every step and component.
    pub peak_coupling: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn max_abs(&self) -> f64 {
        self.peak_abs.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// CSV with header `time,a_0,...,a_{N-1}`.
    pub fn to_csv(&self) -> String {
        let n = self.peak_abs.len();
        let mut out = String::from("time");
        for i in 0..n {
            out.push_str(&format!(",a_{i}"));
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in s {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn check_square(w: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if !w.is_square() || w.nrows() != n {
        return Err(Error::InvalidParameter(format!(
            "{what} has length {n} but the matrix is {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(())
}

/// Classic fixed-step RK4. `rhs(a, wa, out)` receives `W a` precomputed.
fn integrate(
    w: &DMatrix<f64>,
    a0: &[f64],
    p: &MeanFieldParams,
    rhs: impl Fn(&DVector<f64>, &DVector<f64>, &mut DVector<f64>),
) -> Result<Trajectory> {
    p.validate()?;
    check_square(w, a0.len(), "initial state")?;
    if a0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("initial state is not finite".into()));
    }
    let n = a0.len();
    let steps = (p.t_end / p.dt).round() as usize;
    let mut a = DVector::from_column_slice(a0);
    let mut peak_abs: Vec<f64> = a0.iter().map(|v| v.abs()).collect();
    let mut peak_coupling = 0.0f64;
    let mut times = vec![0.0];
    let mut states = vec![a0.to_vec()];
    let mut k = [
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
    ];
    let mut stage = DVector::zeros(n);
    let h = p.dt;
    for step in 1..=steps {
        let wa = w * &a;
        peak_coupling = wa.iter().fold(peak_coupling, |m, v| m.max((p.mu * v).abs()));
        rhs(&a, &wa, &mut k[0]);
        stage.copy_from(&a);
        stage.axpy(0.5 * h, &k[0], 1.0);
        rhs(&stage, &(w * &stage), &mut k[1]);
        stage.copy_from(&a);
        stage.axpy(0.5 * h, &k[1], 1.0);
        rhs(&stage, &(w * &stage), &mut k[2]);
        stage.copy_from(&a);
        stage.axpy(h, &k[2], 1.0);
        rhs(&stage, &(w * &stage), &mut k[3]);
        for i in 0..n {
            a[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        let t = step as f64 * h;
        for (m, v) in peak_abs.iter_mut().zip(a.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFinite { time: t });
            }
            *m = m.max(v.abs());
        }
        if step % p.stride == 0 || step == steps {
            times.push(t);
            states.push(a.iter().copied().collect());
        }
    }
    let wa = w * &a;
    peak_coupling = wa.iter().fold(peak_coupling, |m, v| m.max((p.mu * v).abs()));
    Ok(Trajectory {
        times,
        states,
        peak_abs,
        peak_coupling,
    })
}

/// `da_i/dt = -α a_i + σ(μ Σ_j W_ij a_j + h_i)` with `W` the ω-matrix.
pub fn simulate_nonlinear(w: &DMatrix<f64>, h: &[f64], a0: &[f64], p: &MeanFieldParams) -> Result<Trajectory> {
    check_square(w, h.len(), "input")?;
    integrate(w, a0, p, |a, wa, out| {
        for i in 0..a.len() {
            out[i] = -p.alpha * a[i] + transfer(p.mu * wa[i] + h[i], p);
        }
    })
}

/// Linear-regime dynamics `da/dt = -α a + γμ W a + β`, or without `β`
/// when `homogeneous` (perturbation dynamics around the uniform state).
pub fn simulate_reduced(w: &DMatrix<f64>, p: &MeanFieldParams, a0: &[f64], homogeneous: bool) -> Result<Trajectory> {
    let beta = if homogeneous { 0.0 } else { p.beta() };
    let gm = p.gamma_slope * p.mu;
    integrate(w, a0, p, |a, wa, out| {
        for i in 0..a.len() {
            out[i] = -p.alpha * a[i] + gm * wa[i] + beta;
        }
    })
}

/// Checks that `μ (W a)_i` keeps the transfer argument inside its linear
/// branch `[c - 1/(2γ), c + 1/(2γ)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearRegimeCertificate {
    pub max_deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

impl LinearRegimeCertificate {
    pub fn new(max_deviation: f64, p: &MeanFieldParams) -> Self {
        let bound = p.half_width();
        Self {
            max_deviation,
            bound,
            holds: max_deviation <= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub values: Vec<f64>,
    /// `|-α a + γμ W a + β|_∞`.
    pub residual: f64,
    pub certificate: LinearRegimeCertificate,
}

/// Solves `(αI - γμW) a = β 1`.
pub fn stationary_state(w: &DMatrix<f64>, p: &MeanFieldParams) -> Result<StationaryState> {
    p.validate()?;
    let n = w.nrows();
    check_square(w, n, "matrix")?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let gm = p.gamma_slope * p.mu;
    let spectrum = full_spectrum(w)?;
    if spectrum
        .eigenvalues
        .iter()
        .any(|l| (p.alpha - gm * l).abs() <= 1e-12 * p.alpha)
    {
        return Err(Error::Singular { mu: p.mu });
    }
    let system = DMatrix::identity(n, n) * p.alpha - w * gm;
    let rhs = DVector::from_element(n, p.beta());
    let a = system.lu().solve(&rhs).ok_or(Error::Singular { mu: p.mu })?;
    let wa = w * &a;
    let residual = (0..n)
        .map(|i| (-p.alpha * a[i] + gm * wa[i] + p.beta()).abs())
        .fold(0.0, f64::max);
    let deviation = wa.iter().map(|v| (p.mu * v).abs()).fold(0.0, f64::max);
    Ok(StationaryState {
        values: a.iter().copied().collect(),
        residual,
        certificate: LinearRegimeCertificate::new(deviation, p),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConnectivityReport {
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
    pub slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn weak_report(lhs: f64, p: &MeanFieldParams) -> WeakConnectivityReport {
    let hw = p.half_width();
    let bound = p.alpha * hw.min(p.c - hw);
    let reason = (p.c < hw).then(|| format!("c = {} is below 1/(2 gamma) = {hw}; the bound is negative", p.c));
    WeakConnectivityReport {
        lhs,
        bound,
        pass: reason.is_none() && lhs <= bound,
        slack: bound - lhs,
        reason,
    }
}

/// `μ max_i Σ_j W_ij ≤ α min(1/(2γ), c - 1/(2γ))` on a discrete domain.
pub fn check_weak_connectivity(w: &DMatrix<f64>, p: &MeanFieldParams) -> WeakConnectivityReport {
    let row_max = (0..w.nrows()).map(|i| w.row(i).iter().sum::<f64>()).fold(0.0, f64::max);
    weak_report(p.mu * row_max, p)
}

/// Same bound for the continuous kernel, `μ ∫ ω`, integrated over the grid.
pub fn check_weak_connectivity_grid(grid: &KernelGrid, p: &MeanFieldParams) -> WeakConnectivityReport {
    let integral = grid.values().iter().sum::<f64>() * grid.spec().bin_volume();
    weak_report(p.mu * integral, p)
}

/// ω-matrix over an arbitrary list of points.
pub fn omega_matrix(grid: &KernelGrid, points: &[CorticalPoint], mode: crate::se2::AngleMode) -> DMatrix<f64> {
    use rayon::prelude::*;
    let n = points.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| eval_omega(grid, &points[i], &points[j], mode)).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            m[(i, i + k)] = v;
            m[(i + k, i)] = v;
        }
    }
    m
}

/// Number of extra orientations placed at each stimulus location.
pub const THETA_RING: usize = 7;

/// Points off the stimulus: `4N` uniform over the bounding box, plus a ring
/// of other orientations at each stimulus position.
pub fn off_domain_samples(stimulus: &StimulusSet, seed: u64) -> Vec<CorticalPoint> {
    let Some((x0, y0, x1, y1)) = stimulus.bounding_box() else {
        return Vec::new();
    };
    let period = stimulus.angle_mode().period();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(stimulus.len() * (4 + THETA_RING));
    for _ in 0..4 * stimulus.len() {
        let x = if x1 > x0 { rng.random_range(x0..=x1) } else { x0 };
        let y = if y1 > y0 { rng.random_range(y0..=y1) } else { y0 };
        let theta = rng.random_range(0.0..period);
        out.push(CorticalPoint::new(x, y, theta));
    }
    for e in stimulus.elements() {
        for k in 1..=THETA_RING {
            let theta = wrap_angle(e.theta + period * k as f64 / (THETA_RING + 1) as f64, period);
            out.push(CorticalPoint { theta, ..*e });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutsideDomainReport {
    pub n_domain: usize,
    pub n_off_domain: usize,
    /// Largest `|a|` seen on any off-domain point at any time.
    pub max_off_domain: f64,
    pub max_abs: f64,
    pub weak_connectivity: WeakConnectivityReport,
    pub pass: bool,
}

/// Runs the nonlinear dynamics on the stimulus plus surrounding off-domain
/// points, with `h = c` on the stimulus and 0 elsewhere, starting from rest.
pub fn outside_domain_stays_zero(
    grid: &KernelGrid,
    stimulus: &StimulusSet,
    p: &MeanFieldParams,
    seed: u64,
) -> Result<OutsideDomainReport> {
    let off = off_domain_samples(stimulus, seed);
    let n = stimulus.len();
    let mut points = stimulus.elements().to_vec();
    points.extend_from_slice(&off);
    let w = omega_matrix(grid, &points, stimulus.angle_mode());
    let weak = check_weak_connectivity(&w, p);
    let h: Vec<f64> = (0..points.len()).map(|i| if i < n { p.c } else { 0.0 }).collect();
    let traj = simulate_nonlinear(&w, &h, &vec![0.0; points.len()], p)?;
    let max_off = traj.peak_abs[n..].iter().fold(0.0, |m: f64, &v| m.max(v));
    Ok(OutsideDomainReport {
        n_domain: n,
        n_off_domain: off.len(),
        max_off_domain: max_off,
        max_abs: traj.max_abs(),
        weak_connectivity: weak,
        pass: max_off < 1e-9,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda_tilde_1: f64,
    pub mu_star: f64,
    pub mu: f64,
    pub stable: bool,
    /// Growth rate `-α + μγλ̃₁` of the leading mode.
    pub leading_rate: f64,
    pub weak_connectivity: WeakConnectivityReport,
}

impl StabilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda_tilde_1": self.lambda_tilde_1,
            "mu_star": if self.mu_star.is_finite() { serde_json::json!(self.mu_star) } else { serde_json::json!("inf") },
            "mu": self.mu,
            "stable": self.stable,
            "leading_rate": self.leading_rate,
            "weak_connectivity": {
                "lhs": self.weak_connectivity.lhs,
                "bound": self.weak_connectivity.bound,
                "pass": self.weak_connectivity.pass,
            },
        })
    }
}

/// Critical facilitation `μ* = α / (γ λ̃₁)` from the leading eigenvalue of
/// the ω-matrix.
pub fn stability_threshold(w: &DMatrix<f64>, p: &MeanFieldParams) -> Result<StabilityReport> {
    p.validate()?;
    if w.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let lambda = match top_eigenpair(w, 1e-12, DEFAULT_MAX_ITER) {
        Ok(pair) => pair.value,
        Err(Error::NoConvergence { .. }) => full_spectrum(w)?.eigenvalues[0],
        Err(e) => return Err(e),
    };
    let mu_star = if lambda > 0.0 {
        p.alpha / (p.gamma_slope * lambda)
    } else {
        f64::INFINITY
    };
    Ok(StabilityReport {
        lambda_tilde_1: lambda,
        mu_star,
        mu: p.mu,
        stable: p.mu < mu_star,
        leading_rate: -p.alpha + p.mu * p.gamma_slope * lambda,
        weak_connectivity: check_weak_connectivity(w, p),
    })
}

/// Least-squares slope of `ln|<a(t), v>|` over the second half of the samples.
pub fn growth_rate(traj: &Trajectory, v: &[f64]) -> Result<f64> {
    let start = traj.times.len() / 2;
    let pts: Vec<(f64, f64)> = traj.times[start..]
        .iter()
        .zip(&traj.states[start..])
        .map(|(&t, s)| (t, s.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs()))
        .filter(|&(_, p)| p > 0.0)
        .map(|(t, p)| (t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two samples with nonzero projection".into(),
        ));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests;
