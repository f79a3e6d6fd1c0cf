//! Oriented receptive profiles obtained by rotating one odd-symmetric mother filter.
//!
//! Rotation uses exact quarter turns plus a residual rotation in
//! `[-π/4, π/4]` done as three Fourier-domain shears. Each shear is a unitary
//! sub-pixel shift of every row (or column), so the L2 norm and the zero mean
//! of the profile are kept to rounding error.

use crate::error::{Error, Result};
use crate::se2::{AngleMode, CorticalPoint};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Square filter with odd side length, centred on the middle tap, row-major.
/// Tap `(col, row)` sits at `(x, y) = (col - c, row - c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter2D {
    size: usize,
    taps: Vec<f64>,
}

impl Filter2D {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || taps.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "filter must be odd-sized square, got size {size} with {} taps",
                taps.len()
            )));
        }
        Ok(Self { size, taps })
    }

    pub fn from_fn(size: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let c = (size / 2) as f64;
        let mut taps = Vec::with_capacity(size * size);
        for row in 0..size {
            for col in 0..size {
                taps.push(f(col as f64 - c, row as f64 - c));
            }
        }
        Self::new(size, taps)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.taps[row * self.size + col]
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.taps.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Relative L2 distance `|a - b| / |b|`.
    pub fn relative_l2_distance(&self, other: &Filter2D) -> f64 {
        let diff: f64 = self.taps.iter().zip(&other.taps).map(|(a, b)| (a - b).powi(2)).sum();
        diff.sqrt() / other.l2_norm()
    }

    fn quarter_turn(&self) -> Filter2D {
        let n = self.size;
        let mut taps = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                taps.push(self.get(row, n - 1 - col));
            }
        }
        Filter2D { size: n, taps }
    }

    /// Returns `g(p) = f(R_{-angle} p)`, the profile turned counter-clockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> Filter2D {
        let quarters = (angle / FRAC_PI_2).round();
        self.rotated_parts(quarters as i64, angle - quarters * FRAC_PI_2)
    }

    /// Rotation by `quarters · π/2 + residual`, with `|residual| <= π/4`.
    fn rotated_parts(&self, quarters: i64, residual: f64) -> Filter2D {
        let mut out = if residual != 0.0 {
            self.shear_rotated(residual)
        } else {
            self.clone()
        };
        for _ in 0..quarters.rem_euclid(4) {
            out = out.quarter_turn();
        }
        out
    }

    /// Small rotation as `X(a) Y(b) X(a)` with `a = -tan(r/2)`, `b = sin r`.
    fn shear_rotated(&self, r: f64) -> Filter2D {
        let a = -(r / 2.0).tan();
        let b = r.sin();
        let mut planner = FftPlanner::new();
        let mut taps = self.taps.clone();
        shear(&mut taps, self.size, a, Axis::X, &mut planner);
        shear(&mut taps, self.size, b, Axis::Y, &mut planner);
        shear(&mut taps, self.size, a, Axis::X, &mut planner);
        Filter2D { size: self.size, taps }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Axis X: row at height `y` moves right by `amount * y`.
/// Axis Y: column at abscissa `x` moves down by `amount * x`.
fn shear(taps: &mut [f64], n: usize, amount: f64, axis: Axis, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let c = (n / 2) as f64;
    let mut line = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        let index = |i: usize| match axis {
            Axis::X => k * n + i,
            Axis::Y => i * n + k,
        };
        let shift = amount * (k as f64 - c);
        for (i, slot) in line.iter_mut().enumerate() {
            *slot = Complex::new(taps[index(i)], 0.0);
        }
        fft.process(&mut line);
        for (f, v) in line.iter_mut().enumerate() {
            // signed frequency; n is odd so there is no Nyquist bin
            let freq = if f <= n / 2 { f as f64 } else { f as f64 - n as f64 };
            *v *= Complex::from_polar(1.0, -TAU * freq * shift / n as f64);
        }
        ifft.process(&mut line);
        for (i, v) in line.iter().enumerate() {
            taps[index(i)] = v.re / n as f64;
        }
    }
}

/// Shape of the sine-phase Gabor mother profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Carrier wavelength in pixels.
    pub wavelength: f64,
    /// Gaussian envelope standard deviation in pixels.
    pub sigma: f64,
    /// Envelope aspect ratio (across / along the preferred orientation).
    pub aspect: f64,
    /// Odd side length of the tap array.
    pub support: usize,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            wavelength: 8.0,
            sigma: 2.5,
            aspect: 1.0,
            support: 21,
        }
    }
}

impl GaborParams {
    /// Odd Gabor tuned to edges running along the x axis, scaled so that its
    /// positive lobe sums to one (unit response to an ideal unit step).
    pub fn mother_profile(&self) -> Result<Filter2D> {
        if !(self.wavelength > 0.0 && self.sigma > 0.0 && self.aspect > 0.0) {
            return Err(Error::InvalidParameter(format!("bad Gabor parameters {self:?}")));
        }
        if self.support.is_multiple_of(2) || self.support < 3 {
            return Err(Error::InvalidParameter(format!(
                "filter support must be odd and >= 3, got {}",
                self.support
            )));
        }
        let (s, lambda, aspect) = (self.sigma, self.wavelength, self.aspect);
        let raw = Filter2D::from_fn(self.support, |x, y| {
            let envelope = (-(x * x + (aspect * y).powi(2)) / (2.0 * s * s)).exp();
            envelope * (TAU * y / lambda).sin()
        })?;
        let scale = 2.0 / raw.l1_norm();
        Ok(Filter2D {
            size: raw.size,
            taps: raw.taps.iter().map(|v| v * scale).collect(),
        })
    }
}

/// `K` rotated copies of a mother profile, evenly spaced over the mode's period.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    mother: Filter2D,
    orientations: usize,
    angle_mode: AngleMode,
    filters: Vec<Filter2D>,
}

impl FilterBank {
    pub fn new(mother: Filter2D, orientations: usize, angle_mode: AngleMode) -> Result<Self> {
        if orientations < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 orientations, got {orientations}"
            )));
        }
        let l1 = mother.l1_norm();
        if l1 == 0.0 || mother.sum().abs() > 1e-10 * l1 {
            return Err(Error::InvalidParameter(
                "mother profile must be non-zero with zero mean".into(),
            ));
        }
        let filters = (0..orientations)
            .map(|j| {
                let (quarters, residual) = bank_angle_parts(j, orientations, angle_mode);
                mother.rotated_parts(quarters, residual)
            })
            .collect();
        Ok(Self {
            mother,
            orientations,
            angle_mode,
            filters,
        })
    }

    pub fn gabor(params: &GaborParams, orientations: usize, angle_mode: AngleMode) -> Result<Self> {
        Self::new(params.mother_profile()?, orientations, angle_mode)
    }

    pub fn mother(&self) -> &Filter2D {
        &self.mother
    }

    pub fn orientations(&self) -> usize {
        self.orientations
    }

    pub fn angle_mode(&self) -> AngleMode {
        self.angle_mode
    }

    pub fn spatial_support(&self) -> usize {
        self.mother.size
    }

    /// Orientation of filter `j`.
    pub fn angle(&self, j: usize) -> f64 {
        self.angle_mode.period() * j as f64 / self.orientations as f64
    }

    pub fn filter(&self, j: usize) -> &Filter2D {
        &self.filters[j]
    }

    pub fn filters(&self) -> &[Filter2D] {
        &self.filters
    }
}

/// Splits bank angle `period · j / k` into quarter turns and a residual,
/// computed from integers so that angles a quarter turn apart share the
/// bit-identical residual.
fn bank_angle_parts(j: usize, k: usize, mode: AngleMode) -> (i64, f64) {
    // angle / (π/2) = quarters_per_period · j / k
    let per_period: usize = match mode {
        AngleMode::FullCircle => 4,
        AngleMode::HalfCircle => 2,
    };
    let numer = per_period * j;
    let quarters = ((2 * numer + k) / (2 * k)) as i64;
    let rem = numer as i64 - quarters * k as i64;
    (quarters, FRAC_PI_2 * rem as f64 / k as f64)
}

/// The receptive profile of the cell at `xi`: the mother profile turned by
/// `xi.theta`, to be centred at `(xi.x, xi.y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedFilter {
    pub center: (f64, f64),
    pub theta: f64,
    pub profile: Filter2D,
}

pub fn gabor_at(xi: &CorticalPoint, bank: &FilterBank) -> OrientedFilter {
    let theta = if xi.theta > PI { xi.theta - TAU } else { xi.theta };
    OrientedFilter {
        center: (xi.x, xi.y),
        theta: xi.theta,
        profile: bank.mother.rotated(theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mother() -> Filter2D {
        GaborParams::default().mother_profile().unwrap()
    }

    /// Direct evaluation of the rotated Gabor formula, no resampling.
    fn analytic(params: &GaborParams, theta: f64) -> Filter2D {
        let raw = |theta: f64| {
            Filter2D::from_fn(params.support, |x, y| {
                let (s, c) = (-theta).sin_cos();
                let (u, v) = (c * x - s * y, s * x + c * y);
                let env = (-(u * u + (params.aspect * v).powi(2)) / (2.0 * params.sigma.powi(2))).exp();
                env * (TAU * v / params.wavelength).sin()
            })
            .unwrap()
        };
        let scale = 2.0 / raw(0.0).l1_norm();
        let r = raw(theta);
        Filter2D {
            size: r.size,
            taps: r.taps.iter().map(|v| v * scale).collect(),
        }
    }

    #[test]
    fn mother_is_odd_and_zero_mean() {
        let m = mother();
        assert!(m.sum().abs() <= 1e-10 * m.l1_norm());
        let flipped = m.rotated(PI);
        for (a, b) in flipped.taps().iter().zip(m.taps()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn identity_action_leaves_profile_unchanged() {
        let bank = FilterBank::gabor(&GaborParams::default(), 8, AngleMode::FullCircle).unwrap();
        let f = gabor_at(&CorticalPoint::new(3.0, 4.0, 0.0), &bank);
        assert_eq!(&f.profile, bank.mother());
        assert_eq!(f.center, (3.0, 4.0));
    }

    #[test]
    fn rotation_preserves_l2_norm_and_mean() {
        let m = mother();
        for theta in [0.1, 0.7, 1.3, 2.9, 4.0, 5.5] {
            let r = m.rotated(theta);
            assert!((r.l2_norm() - m.l2_norm()).abs() < 1e-6 * m.l2_norm());
            assert!(r.sum().abs() <= 1e-10 * m.l1_norm());
        }
    }

    #[test]
    fn round_trip_rotation_recovers_profile() {
        let m = mother();
        for theta in [0.05, 0.4, 0.78, 1.2, 2.0, 3.0, 4.4, 6.0] {
            let back = m.rotated(theta).rotated(-theta);
            let err = back.relative_l2_distance(&m);
            assert!(err < 1e-3, "theta {theta}: relative error {err}");
        }
    }

    #[test]
    fn rotation_matches_analytic_profile() {
        let params = GaborParams {
            support: 31,
            ..GaborParams::default()
        };
        let m = params.mother_profile().unwrap();
        for theta in [0.3, 1.0, 2.5] {
            let err = m.rotated(theta).relative_l2_distance(&analytic(&params, theta));
            assert!(err < 1e-2, "theta {theta}: {err}");
        }
    }

    #[test]
    fn bank_parts_are_exact_for_quarter_turns() {
        for (j, k) in [(0, 16), (4, 16), (5, 16), (9, 16), (15, 16), (3, 8)] {
            let (q, r) = bank_angle_parts(j, k, AngleMode::FullCircle);
            let angle = TAU * j as f64 / k as f64;
            assert!((q as f64 * FRAC_PI_2 + r - angle).abs() < 1e-12);
            assert!(r.abs() <= FRAC_PI_2 / 2.0 + 1e-12);
        }
        assert_eq!(
            bank_angle_parts(1, 16, AngleMode::FullCircle).1,
            bank_angle_parts(5, 16, AngleMode::FullCircle).1
        );
        let (q, r) = bank_angle_parts(3, 4, AngleMode::HalfCircle);
        assert!((q as f64 * FRAC_PI_2 + r - 3.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn bank_rejects_too_few_orientations() {
        assert!(FilterBank::gabor(&GaborParams::default(), 3, AngleMode::FullCircle).is_err());
    }
}
