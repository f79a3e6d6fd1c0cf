//! Lifting of images to position-orientation space, and synthetic stimuli.

mod filter;
mod stimulus;

pub use filter::{gabor_at, Filter2D, FilterBank, GaborParams, OrientedFilter};
pub use stimulus::{
    generate_fhh_stimulus, Contour, StimulusConfig, StimulusSet, BACKGROUND_LABEL, DUPLICATE_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::se2::CorticalPoint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftOptions {
    /// Minimum filter response for a pixel to be emitted.
    pub response_threshold: f64,
    /// Input level `c` of the resulting stimulus.
    pub c: f64,
    /// Greedy non-maximum suppression radius in pixels (0 disables).
    pub nms_radius: f64,
    /// Emit every super-threshold orientation instead of only the best one.
    pub multi_orientation: bool,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self {
            response_threshold: 0.25,
            c: 1.0,
            nms_radius: 2.0,
            multi_orientation: false,
        }
    }
}

/// Responses of every filter of the bank at every pixel, `[pixel][orientation]`.
///
/// The response is the correlation `h(x, y, θ) = Σ ψ_(x,y,θ)(x', y') I(x', y')`
/// with the image clamped at its border. In full-circle mode the sign is kept
/// (it encodes contrast polarity); in half-circle mode the magnitude is used.
pub fn filter_responses(image: &GrayImage, bank: &FilterBank) -> Vec<Vec<f64>> {
    let r = bank.filter(0).radius() as isize;
    let signed = matches!(bank.angle_mode(), crate::se2::AngleMode::FullCircle);
    (0..image.width * image.height)
        .into_par_iter()
        .map(|idx| {
            let (col, row) = ((idx % image.width) as isize, (idx / image.width) as isize);
            bank.filters()
                .iter()
                .map(|f| {
                    let mut acc = 0.0;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let tap = f.get((dx + r) as usize, (dy + r) as usize);
                            acc += tap * image.get_clamped(col + dx, row + dy);
                        }
                    }
                    if signed {
                        acc
                    } else {
                        acc.abs()
                    }
                })
                .collect()
        })
        .collect()
}

/// Lifts an image to a sparse set of oriented elements.
///
/// Each pixel whose best response exceeds the threshold is a candidate.
/// Candidates are accepted greedily by decreasing strength (ties by raster
/// order) unless an accepted pixel lies within `nms_radius`. Positions are
/// pixel coordinates `(x, y) = (col, row)`.
pub fn lift_image(image: &GrayImage, bank: &FilterBank, options: &LiftOptions) -> Result<StimulusSet> {
    if !(options.response_threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "response threshold must be positive, got {}",
            options.response_threshold
        )));
    }
    let responses = filter_responses(image, bank);
    let mut candidates: Vec<(usize, usize, f64)> = responses
        .iter()
        .enumerate()
        .filter_map(|(idx, resp)| {
            let (best, strength) = argmax(resp);
            (strength > options.response_threshold).then_some((idx, best, strength))
        })
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));

    let radius2 = options.nms_radius * options.nms_radius;
    let mut kept: Vec<(usize, usize)> = Vec::new();
    let pos = |idx: usize| ((idx % image.width) as f64, (idx / image.width) as f64);
    for &(idx, best, _) in &candidates {
        let (x, y) = pos(idx);
        let blocked = options.nms_radius > 0.0
            && kept.iter().any(|&(k, _)| {
                let (kx, ky) = pos(k);
                (kx - x).powi(2) + (ky - y).powi(2) <= radius2
            });
        if !blocked {
            kept.push((idx, best));
        }
    }
    kept.sort_unstable();

    let mut elements = Vec::new();
    for (idx, best) in kept {
        let (x, y) = pos(idx);
        if options.multi_orientation {
            for (j, &v) in responses[idx].iter().enumerate() {
                if v > options.response_threshold {
                    elements.push(CorticalPoint::new(x, y, bank.angle(j)));
                }
            }
        } else {
            elements.push(CorticalPoint::new(x, y, bank.angle(best)));
        }
    }
    StimulusSet::new(elements, options.c, bank.angle_mode(), None)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se2::{angle_distance, AngleMode};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn bank(mode: AngleMode) -> FilterBank {
        FilterBank::gabor(&GaborParams::default(), 16, mode).unwrap()
    }

    fn step_edge(n: usize) -> GrayImage {
        GrayImage::from_fn(n, n, |_, row| if row >= n / 2 { 1.0 } else { 0.0 })
    }

    #[test]
    fn constant_image_lifts_to_nothing() {
        let img = GrayImage::filled(32, 32, 0.6);
        let s = lift_image(&img, &bank(AngleMode::FullCircle), &LiftOptions::default()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn threshold_above_max_response_lifts_to_nothing() {
        let opts = LiftOptions {
            response_threshold: 10.0,
            ..LiftOptions::default()
        };
        let s = lift_image(&step_edge(32), &bank(AngleMode::HalfCircle), &opts).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn non_positive_threshold_rejected() {
        let opts = LiftOptions {
            response_threshold: 0.0,
            ..LiftOptions::default()
        };
        assert!(lift_image(&step_edge(16), &bank(AngleMode::HalfCircle), &opts).is_err());
    }

    /// Brute-force oracle: correlate analytically evaluated Gabors at all K
    /// orientations at an edge pixel and confirm the lifted argmax.
    #[test]
    fn horizontal_edge_lifts_to_horizontal_elements() {
        let params = GaborParams::default();
        let img = step_edge(40);
        for mode in [AngleMode::FullCircle, AngleMode::HalfCircle] {
            let b = bank(mode);
            let s = lift_image(&img, &b, &LiftOptions::default()).unwrap();
            assert!(!s.is_empty());
            for p in s.elements() {
                // the response ridge is a few rows wide; NMS keeps it to within 2 px
                assert!((p.y - 19.5).abs() <= 1.5, "element off the edge: {p:?}");
                assert!(angle_distance(p.theta, 0.0, AngleMode::HalfCircle) < 1e-12);
            }

            let (col, row) = (20isize, 20isize);
            let r = (params.support / 2) as isize;
            let oracle: Vec<f64> = (0..16)
                .map(|j| {
                    let theta = b.angle(j);
                    let mut acc = 0.0;
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let (s, c) = (-theta).sin_cos();
                            let (x, y) = (dx as f64, dy as f64);
                            let v = s * x + c * y;
                            let u = c * x - s * y;
                            let env = (-(u * u + v * v) / (2.0 * params.sigma.powi(2))).exp();
                            acc += env * (TAU * v / params.wavelength).sin() * img.get_clamped(col + dx, row + dy);
                        }
                    }
                    if mode == AngleMode::FullCircle {
                        acc
                    } else {
                        acc.abs()
                    }
                })
                .collect();
            let (best, _) = argmax(&oracle);
            assert!(angle_distance(b.angle(best), 0.0, AngleMode::HalfCircle) < 1e-12);
        }
    }

    #[test]
    fn lifting_is_equivariant_under_quarter_turns() {
        // a tilted bar on a 41x41 canvas
        let n = 41;
        let img = GrayImage::from_fn(n, n, |col, row| {
            let (x, y) = (col as f64 - 20.0, row as f64 - 20.0);
            let (s, c) = (0.4f64).sin_cos();
            let along = c * x + s * y;
            let across = -s * x + c * y;
            if along.abs() <= 12.0 && across.abs() <= 2.0 {
                1.0
            } else {
                0.0
            }
        });
        let opts = LiftOptions {
            nms_radius: 0.0,
            ..LiftOptions::default()
        };
        for mode in [AngleMode::FullCircle, AngleMode::HalfCircle] {
            let b = bank(mode);
            let base = lift_image(&img, &b, &opts).unwrap();
            let turned = lift_image(&img.rotate_quarter(), &b, &opts).unwrap();
            assert!(base.len() > 10);
            assert_eq!(base.len(), turned.len());
            for p in base.elements() {
                // (x, y) -> (-y, x) about the centre, orientation + π/2
                let (ex, ey) = (20.0 - (p.y - 20.0), 20.0 + (p.x - 20.0));
                let q = turned
                    .elements()
                    .iter()
                    .min_by(|a, b| {
                        let da = (a.x - ex).hypot(a.y - ey);
                        let db = (b.x - ex).hypot(b.y - ey);
                        da.total_cmp(&db)
                    })
                    .unwrap();
                assert!(
                    (q.x - ex).abs() <= 1.0 && (q.y - ey).abs() <= 1.0,
                    "no counterpart for {p:?}"
                );
                let d = angle_distance(q.theta, p.theta + FRAC_PI_2, mode);
                assert!(d < 1e-9, "orientation {} vs {}", q.theta, p.theta + FRAC_PI_2);
            }
        }
    }

    #[test]
    fn raising_threshold_shrinks_the_set() {
        let img = step_edge(32);
        let b = bank(AngleMode::HalfCircle);
        let mut last = usize::MAX;
        for t in [0.05, 0.2, 0.4, 0.6, 0.9] {
            let opts = LiftOptions {
                response_threshold: t,
                nms_radius: 0.0,
                ..LiftOptions::default()
            };
            let n = lift_image(&img, &b, &opts).unwrap().len();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn nms_spaces_out_elements() {
        let s = lift_image(&step_edge(40), &bank(AngleMode::HalfCircle), &LiftOptions::default()).unwrap();
        for (i, a) in s.elements().iter().enumerate() {
            for b in &s.elements()[i + 1..] {
                assert!((a.x - b.x).hypot(a.y - b.y) > 2.0);
            }
        }
    }

    #[test]
    fn flip_symmetry_of_bank() {
        let b = bank(AngleMode::FullCircle);
        // filter at θ + π is the negated filter at θ
        for (a, c) in b.filter(1).taps().iter().zip(b.filter(9).taps()) {
            assert!((a + c).abs() < 1e-12);
        }
        assert!((b.angle(8) - PI).abs() < 1e-15);
    }
}
