//! Discrete input domains: sets of oriented elements where the input equals `c`.

use crate::error::{Error, Result};
use crate::se2::{angle_distance, wrap_angle, AngleMode, CorticalPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

/// Elements closer than this in position and orientation count as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

/// Label given to background (non-contour) elements.
pub const BACKGROUND_LABEL: i64 = 0;

/// The activated set `{xi_i : h(xi_i) = c}` together with the input level.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusSet {
    elements: Vec<CorticalPoint>,
    input_level: f64,
    angle_mode: AngleMode,
    labels: Option<Vec<i64>>,
}

impl StimulusSet {
    pub fn new(
        elements: Vec<CorticalPoint>,
        input_level: f64,
        angle_mode: AngleMode,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        if !(input_level > 0.0 && input_level.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "input level c must be positive, got {input_level}"
            )));
        }
        if let Some(l) = &labels {
            if l.len() != elements.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {} elements",
                    l.len(),
                    elements.len()
                )));
            }
        }
        if let Some(p) = elements.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite element {p:?}")));
        }
        let period = angle_mode.period();
        let elements: Vec<CorticalPoint> = elements
            .into_iter()
            .map(|p| CorticalPoint {
                theta: wrap_angle(p.theta, period),
                ..p
            })
            .collect();
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate().skip(i + 1) {
                if (a.x - b.x).abs() < DUPLICATE_TOLERANCE
                    && (a.y - b.y).abs() < DUPLICATE_TOLERANCE
                    && angle_distance(a.theta, b.theta, angle_mode) < DUPLICATE_TOLERANCE
                {
                    return Err(Error::InvalidParameter(format!("elements {i} and {j} are duplicates")));
                }
            }
        }
        Ok(Self {
            elements,
            input_level,
            angle_mode,
            labels,
        })
    }

    pub fn empty(input_level: f64, angle_mode: AngleMode) -> Self {
        Self {
            elements: Vec::new(),
            input_level,
            angle_mode,
            labels: None,
        }
    }

    pub fn elements(&self) -> &[CorticalPoint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn input_level(&self) -> f64 {
        self.input_level
    }

    pub fn angle_mode(&self) -> AngleMode {
        self.angle_mode
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Indices of elements carrying `label`.
    pub fn indices_with_label(&self, label: i64) -> Vec<usize> {
        self.labels
            .iter()
            .flatten()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Reorders elements (and labels) so that `order[k]` becomes element `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let elements = order.iter().map(|&i| self.elements[i]).collect();
        let labels = self.labels.as_ref().map(|l| order.iter().map(|&i| l[i]).collect());
        Self::new(elements, self.input_level, self.angle_mode, labels)
    }

    /// Applies a group element to every element of the set.
    pub fn transformed(&self, g: &CorticalPoint) -> Self {
        Self {
            elements: self.elements.iter().map(|p| g.compose(p)).collect(),
            ..self.clone()
        }
    }

    /// Axis-aligned bounding box `(x_min, y_min, x_max, y_max)`.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.elements.first()?;
        Some(
            self.elements
                .iter()
                .fold((first.x, first.y, first.x, first.y), |(x0, y0, x1, y1), p| {
                    (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y))
                }),
        )
    }

    pub fn to_json(&self, metadata: Option<serde_json::Value>) -> Result<String> {
        let file = StimulusFile {
            angle_mode: self.angle_mode,
            c: self.input_level,
            elements: self
                .elements
                .iter()
                .enumerate()
                .map(|(i, p)| ElementRecord {
                    x: p.x,
                    y: p.y,
                    theta: p.theta,
                    label: self.labels.as_ref().map(|l| l[i]),
                })
                .collect(),
            metadata,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StimulusFile = serde_json::from_str(text)?;
        let has_labels = file.elements.iter().any(|e| e.label.is_some());
        let labels = has_labels.then(|| {
            file.elements
                .iter()
                .map(|e| e.label.unwrap_or(BACKGROUND_LABEL))
                .collect()
        });
        let elements = file
            .elements
            .iter()
            .map(|e| CorticalPoint::new(e.x, e.y, e.theta))
            .collect();
        Self::new(elements, file.c, file.angle_mode, labels)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StimulusFile {
    angle_mode: AngleMode,
    c: f64,
    elements: Vec<ElementRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ElementRecord {
    x: f64,
    y: f64,
    theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<i64>,
}

/// A smooth curve sampled into oriented elements tangent to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Contour {
    /// Circular arc from `start` sweeping `sweep` radians (counter-clockwise if positive).
    Arc {
        cx: f64,
        cy: f64,
        radius: f64,
        start: f64,
        sweep: f64,
        samples: usize,
    },
    /// Straight segment starting at `(x0, y0)` heading along `angle`.
    Line {
        x0: f64,
        y0: f64,
        angle: f64,
        length: f64,
        samples: usize,
    },
}

impl Contour {
    pub fn samples(&self) -> usize {
        match *self {
            Contour::Arc { samples, .. } | Contour::Line { samples, .. } => samples,
        }
    }

    /// Positions with analytic tangent orientation, evenly spaced in arc length.
    pub fn sample_points(&self) -> Vec<CorticalPoint> {
        let n = self.samples();
        let frac = |k: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
        match *self {
            Contour::Arc {
                cx,
                cy,
                radius,
                start,
                sweep,
                ..
            } => (0..n)
                .map(|k| {
                    let phi = start + sweep * frac(k);
                    let tangent = phi + FRAC_PI_2.copysign(sweep);
                    CorticalPoint::new(cx + radius * phi.cos(), cy + radius * phi.sin(), tangent)
                })
                .collect(),
            Contour::Line {
                x0, y0, angle, length, ..
            } => (0..n)
                .map(|k| {
                    let s = length * frac(k);
                    CorticalPoint::new(x0 + s * angle.cos(), y0 + s * angle.sin(), angle)
                })
                .collect(),
        }
    }
}

/// Field–Hayes–Hess style display: a few smooth contours hidden among
/// randomly placed, randomly oriented elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusConfig {
    pub n_total: usize,
    pub contours: Vec<Contour>,
    /// Standard deviation (radians) of the orientation noise on contour elements.
    pub jitter: f64,
    pub seed: u64,
    /// Field of view `[-half_width, half_width] × [-half_height, half_height]`.
    pub half_width: f64,
    pub half_height: f64,
    /// Minimum distance between a background element and any other element.
    pub min_separation: f64,
    pub angle_mode: AngleMode,
    pub c: f64,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        Self {
            n_total: 150,
            contours: vec![default_arc()],
            jitter: 0.0,
            seed: 7,
            half_width: 60.0,
            half_height: 60.0,
            min_separation: 4.0,
            angle_mode: AngleMode::HalfCircle,
            c: 1.0,
        }
    }
}

/// Gently curved arc through the middle of the field, about 3.7 units
/// between samples.
fn default_arc() -> Contour {
    let sweep = 70.0 / 150.0;
    Contour::Arc {
        cx: 0.0,
        cy: -150.0,
        radius: 150.0,
        start: FRAC_PI_2 - 0.5 * sweep,
        sweep,
        samples: 20,
    }
}

impl StimulusConfig {
    /// Two planted units: the default arc and a shorter straight contour
    /// below it.
    pub fn two_units() -> Self {
        Self {
            contours: vec![
                default_arc(),
                Contour::Line {
                    x0: -25.0,
                    y0: -35.0,
                    angle: 0.15,
                    length: 44.0,
                    samples: 12,
                },
            ],
            ..Self::default()
        }
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Builds a stimulus: contour samples first (labels `1..`), then background
/// elements (label 0) uniform in position and orientation.
///
/// Contour jitter and background placement draw from separate streams of the
/// seeded generator, so the background does not depend on the jitter setting.
pub fn generate_fhh_stimulus(config: &StimulusConfig) -> Result<StimulusSet> {
    let contour_total: usize = config.contours.iter().map(Contour::samples).sum();
    if contour_total > config.n_total {
        return Err(Error::ContourTooLarge {
            needed: contour_total,
            available: config.n_total,
        });
    }
    if config.jitter < 0.0 || !config.jitter.is_finite() {
        return Err(Error::InvalidParameter(format!("jitter {} < 0", config.jitter)));
    }
    if !(config.half_width > 0.0 && config.half_height > 0.0) {
        return Err(Error::InvalidParameter("field of view must be non-empty".into()));
    }

    let mut jitter_rng = ChaCha8Rng::seed_from_u64(config.seed);
    jitter_rng.set_stream(1);
    let mut placement_rng = ChaCha8Rng::seed_from_u64(config.seed);
    placement_rng.set_stream(2);

    let mut elements = Vec::with_capacity(config.n_total);
    let mut labels = Vec::with_capacity(config.n_total);
    for (k, contour) in config.contours.iter().enumerate() {
        for p in contour.sample_points() {
            let noise: f64 = if config.jitter > 0.0 {
                config.jitter * jitter_rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            elements.push(CorticalPoint::new(p.x, p.y, p.theta + noise));
            labels.push(k as i64 + 1);
        }
    }

    let period = config.angle_mode.period();
    let min_sep2 = config.min_separation.max(0.0).powi(2);
    while elements.len() < config.n_total {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let x = placement_rng.random_range(-config.half_width..config.half_width);
            let y = placement_rng.random_range(-config.half_height..config.half_height);
            let theta = placement_rng.random_range(0.0..period);
            let clear = elements
                .iter()
                .all(|p| (p.x - x).powi(2) + (p.y - y).powi(2) >= min_sep2.max(1e-18));
            if clear {
                elements.push(CorticalPoint::new(x, y, theta));
                labels.push(BACKGROUND_LABEL);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidParameter(format!(
                "cannot place {} elements with separation {} in the field of view",
                config.n_total, config.min_separation
            )));
        }
    }
    StimulusSet::new(elements, config.c, config.angle_mode, Some(labels))
}
