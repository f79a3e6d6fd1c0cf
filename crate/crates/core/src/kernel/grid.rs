//! Kernel values sampled on a regular (x, y, θ) grid around the identity.

use crate::error::{Error, Result};
use crate::kernel::FpParams;
use crate::se2::{wrap_angle, CorticalPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Bin layout. Spatial bins tile `[min, max)` with centres at
/// `min + (i + 1/2) · width`; θ bins are centred on `k · period / n_theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_y: usize,
    pub n_theta: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub theta_period: f64,
}

impl GridSpec {
    /// Symmetric square grid `[-half_extent, half_extent]²` over the full circle.
    pub fn centered(half_extent: f64, n_xy: usize, n_theta: usize) -> Self {
        Self {
            n_x: n_xy,
            n_y: n_xy,
            n_theta,
            x_range: (-half_extent, half_extent),
            y_range: (-half_extent, half_extent),
            theta_period: TAU,
        }
    }

    /// The default layout for a path model: 101 × 101 × 64 over `[-L, L]²`
    /// with `L = H · Δs`.
    pub fn for_params(params: &FpParams) -> Self {
        Self::centered(params.n_steps as f64 * params.step_ds, 101, 64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_y < 2 || self.n_theta < 2 {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 2 bins, got {} x {} x {}",
                self.n_x, self.n_y, self.n_theta
            )));
        }
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::InvalidGrid("empty or non-finite spatial range".into()));
        }
        if !(self.theta_period > 0.0 && self.theta_period <= TAU) {
            return Err(Error::InvalidGrid(format!("bad theta period {}", self.theta_period)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.n_y as f64
    }

    pub fn dtheta(&self) -> f64 {
        self.theta_period / self.n_theta as f64
    }

    pub fn bin_volume(&self) -> f64 {
        self.dx() * self.dy() * self.dtheta()
    }

    /// Flat index in (θ-major, y, x) order.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (it * self.n_y + iy) * self.n_x + ix
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let ix = idx % self.n_x;
        let iy = (idx / self.n_x) % self.n_y;
        let it = idx / (self.n_x * self.n_y);
        (ix, iy, it)
    }

    pub fn x_center(&self, ix: usize) -> f64 {
        self.x_range.0 + (ix as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, iy: usize) -> f64 {
        self.y_range.0 + (iy as f64 + 0.5) * self.dy()
    }

    pub fn theta_center(&self, it: usize) -> f64 {
        it as f64 * self.dtheta()
    }

    pub fn center(&self, idx: usize) -> CorticalPoint {
        let (ix, iy, it) = self.unflatten(idx);
        CorticalPoint::new(self.x_center(ix), self.y_center(iy), self.theta_center(it))
    }

    /// Bin containing a point, or `None` outside the spatial range.
    pub fn bin_of(&self, p: &CorticalPoint) -> Option<usize> {
        let fx = (p.x - self.x_range.0) / self.dx();
        let fy = (p.y - self.y_range.0) / self.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        if ix >= self.n_x || iy >= self.n_y {
            return None;
        }
        let ft = wrap_angle(p.theta, self.theta_period) / self.dtheta();
        let it = (ft.round() as usize) % self.n_theta;
        Some(self.index(ix, iy, it))
    }

    pub fn is_symmetric(&self) -> bool {
        self.x_range.0 == -self.x_range.1 && self.y_range.0 == -self.y_range.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    MaxOne,
}

/// Nonnegative values on a [`GridSpec`], cyclic in θ.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    spec: GridSpec,
    values: Vec<f64>,
    pub normalization: Normalization,
    pub symmetrized: bool,
    /// Smoothing bandwidths (bins) applied so far.
    pub smoothing: Option<(f64, f64, f64)>,
    pub source_params: Option<FpParams>,
}

impl KernelGrid {
    pub fn zeros(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            values: vec![0.0; spec.len()],
            normalization: Normalization::Raw,
            symmetrized: false,
            smoothing: None,
            source_params: None,
        })
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidGrid(format!(
                "grid value {v} is not a nonnegative number"
            )));
        }
        Ok(Self {
            values,
            ..Self::zeros(spec)?
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize, it: usize) -> f64 {
        self.values[self.spec.index(ix, iy, it)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, it: usize, v: f64) {
        let idx = self.spec.index(ix, iy, it);
        self.values[idx] = v;
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Trilinear interpolation at a displacement, cyclic in θ; 0 outside the
    /// spatial range, edge-clamped between the outermost bin centre and the edge.
    pub fn value_at(&self, p: &CorticalPoint) -> f64 {
        let s = &self.spec;
        if !(p.x >= s.x_range.0 && p.x <= s.x_range.1 && p.y >= s.y_range.0 && p.y <= s.y_range.1) {
            return 0.0;
        }
        let (ix, tx) = lerp_coord((p.x - s.x_range.0) / s.dx() - 0.5, s.n_x);
        let (iy, ty) = lerp_coord((p.y - s.y_range.0) / s.dy() - 0.5, s.n_y);
        let ft = wrap_angle(p.theta, s.theta_period) / s.dtheta();
        let it0 = (ft.floor() as usize) % s.n_theta;
        let it1 = (it0 + 1) % s.n_theta;
        let tt = ft - ft.floor();

        let plane = |it: usize| {
            let v00 = self.get(ix, iy, it);
            let v10 = self.get(ix + 1, iy, it);
            let v01 = self.get(ix, iy + 1, it);
            let v11 = self.get(ix + 1, iy + 1, it);
            let lo = v00 + tx * (v10 - v00);
            let hi = v01 + tx * (v11 - v01);
            lo + ty * (hi - lo)
        };
        let (a, b) = (plane(it0), plane(it1));
        a + tt * (b - a)
    }

    /// Rescales so the maximum is one.
    pub fn normalized_max_one(&self) -> Result<KernelGrid> {
        let max = self.max_value();
        if !(max > 0.0) {
            return Err(Error::InvalidGrid("cannot normalise an all-zero grid".into()));
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v /= max);
        out.normalization = Normalization::MaxOne;
        Ok(out)
    }

    /// Sum over θ: the (x, y) projection, row-major `[iy][ix]`.
    pub fn xy_projection(&self) -> Vec<f64> {
        let s = &self.spec;
        let mut proj = vec![0.0; s.n_x * s.n_y];
        for (idx, v) in self.values.iter().enumerate() {
            let (ix, iy, _) = s.unflatten(idx);
            proj[iy * s.n_x + ix] += v;
        }
        proj
    }

    /// Centre of mass of the (x, y) projection.
    pub fn xy_center_of_mass(&self) -> (f64, f64) {
        let s = &self.spec;
        let proj = self.xy_projection();
        let (mut m, mut mx, mut my) = (0.0, 0.0, 0.0);
        for iy in 0..s.n_y {
            for ix in 0..s.n_x {
                let v = proj[iy * s.n_x + ix];
                m += v;
                mx += v * s.x_center(ix);
                my += v * s.y_center(iy);
            }
        }
        (mx / m, my / m)
    }

    /// Projected mass near `(±r, 0)` over projected mass near `(0, ±r)`.
    /// Infinite when nothing lies on the y axis at that radius.
    pub fn anisotropy_ratio(&self, radius: f64) -> f64 {
        let s = &self.spec;
        let proj = self.xy_projection();
        let at = |x: f64, y: f64| {
            s.bin_of(&CorticalPoint::new(x, y, 0.0)).map_or(0.0, |idx| {
                let (ix, iy, _) = s.unflatten(idx);
                proj[iy * s.n_x + ix]
            })
        };
        let along_x = at(radius, 0.0) + at(-radius, 0.0);
        let along_y = at(0.0, radius) + at(0.0, -radius);
        if along_y == 0.0 {
            if along_x > 0.0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else {
            along_x / along_y
        }
    }
}

/// Splits a fractional bin-centre coordinate into a base index and weight,
/// clamped so that `base + 1` stays in range.
#[inline]
fn lerp_coord(f: f64, n: usize) -> (usize, f64) {
    let f = f.clamp(0.0, (n - 1) as f64);
    let i = (f.floor() as usize).min(n - 2);
    (i, f - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> GridSpec {
        GridSpec::centered(5.0, 5, 8)
    }

    #[test]
    fn degenerate_grid_rejected() {
        let mut s = small_spec();
        s.n_theta = 1;
        assert!(KernelGrid::zeros(s).is_err());
    }

    #[test]
    fn identity_sits_on_a_bin_centre() {
        let s = small_spec();
        let idx = s.bin_of(&CorticalPoint::IDENTITY).unwrap();
        let c = s.center(idx);
        assert_eq!((c.x, c.y, c.theta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn interpolation_reproduces_bin_values_and_wraps_theta() {
        let s = small_spec();
        let vals: Vec<f64> = (0..s.len()).map(|i| (i % 7) as f64).collect();
        let g = KernelGrid::from_values(s, vals).unwrap();
        for idx in [0, 13, 77, s.len() - 1] {
            assert!((g.value_at(&s.center(idx)) - g.values()[idx]).abs() < 1e-12);
        }
        // halfway between the last θ bin and θ = 0 wraps around
        let half = s.dtheta() * (s.n_theta as f64 - 0.5);
        let v = g.value_at(&CorticalPoint::new(0.0, 0.0, half));
        let expect = 0.5 * (g.get(2, 2, 7) + g.get(2, 2, 0));
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn outside_range_is_zero() {
        let g = KernelGrid::from_values(small_spec(), vec![1.0; 200]).unwrap();
        assert_eq!(g.value_at(&CorticalPoint::new(5.1, 0.0, 0.0)), 0.0);
        assert_eq!(g.value_at(&CorticalPoint::new(4.9, 0.0, 0.0)), 1.0);
    }

    #[test]
    fn negative_values_rejected() {
        let mut v = vec![0.0; 200];
        v[3] = -1.0;
        assert!(KernelGrid::from_values(small_spec(), v).is_err());
    }
}
