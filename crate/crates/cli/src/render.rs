//! Static renders: oriented-bar stimuli, heat maps and kernel projections.

use se2group::{CorticalPoint, GrayImage, KernelGrid, RgbImage};

pub const BACKGROUND: [f64; 3] = [0.0, 0.0, 0.0];
pub const NEUTRAL: [f64; 3] = [0.55, 0.55, 0.55];
pub const DIMMED: [f64; 3] = [0.2, 0.2, 0.2];

/// Unit `k` (0-based) gets a pure channel, so overlapping memberships stay
/// separable by channel.
pub fn unit_color(k: usize) -> [f64; 3] {
    match k % 3 {
        0 => [1.0, 0.0, 0.0],
        1 => [0.0, 1.0, 0.0],
        _ => [0.0, 0.4, 1.0],
    }
}

/// Maps a world rectangle onto pixels, y up.
#[derive(Debug, Clone, Copy)]
pub struct View {
    x_min: f64,
    y_max: f64,
    scale: f64,
    pub width: usize,
    pub height: usize,
}

impl View {
    pub fn new(bounds: (f64, f64, f64, f64), scale: f64) -> Self {
        let (x0, y0, x1, y1) = bounds;
        Self {
            x_min: x0,
            y_max: y1,
            scale,
            width: (((x1 - x0) * scale).ceil() as usize).max(1),
            height: (((y1 - y0) * scale).ceil() as usize).max(1),
        }
    }

    /// Bounding box of `points` grown by `margin` on every side.
    pub fn around(points: &[CorticalPoint], margin: f64, scale: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, 1.0f64, 1.0f64);
        if let Some(p) = points.first() {
            (x0, y0, x1, y1) = (p.x, p.y, p.x, p.y);
            for p in points {
                x0 = x0.min(p.x);
                y0 = y0.min(p.y);
                x1 = x1.max(p.x);
                y1 = y1.max(p.y);
            }
        }
        Self::new((x0 - margin, y0 - margin, x1 + margin, y1 + margin), scale)
    }

    fn to_pixel(self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x_min) * self.scale, (self.y_max - y) * self.scale)
    }
}

/// Draws each element as an anti-aliased bar of `length` world units
/// centred on it and aligned with its orientation.
pub fn draw_bars(points: &[CorticalPoint], colors: &[[f64; 3]], view: &View, length: f64) -> RgbImage {
    let mut img = RgbImage::filled(view.width, view.height, BACKGROUND);
    let half_thick = (0.12 * length * view.scale).max(0.6);
    for (p, &color) in points.iter().zip(colors) {
        let (cx, cy) = view.to_pixel(p.x, p.y);
        // pixel rows grow downwards
        let (s, c) = p.theta.sin_cos();
        let half = 0.5 * length * view.scale;
        let (ax, ay) = (cx - half * c, cy + half * s);
        let (bx, by) = (cx + half * c, cy - half * s);
        let pad = half_thick + 1.0;
        let c0 = (ax.min(bx) - pad).floor() as isize;
        let c1 = (ax.max(bx) + pad).ceil() as isize;
        let r0 = (ay.min(by) - pad).floor() as isize;
        let r1 = (ay.max(by) + pad).ceil() as isize;
        for row in r0..=r1 {
            for col in c0..=c1 {
                let d = segment_distance(col as f64 + 0.5, row as f64 + 0.5, (ax, ay), (bx, by));
                let alpha = (half_thick + 0.5 - d).clamp(0.0, 1.0);
                if alpha > 0.0 {
                    img.blend(col, row, color, alpha);
                }
            }
        }
    }
    img
}

fn segment_distance(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((px - qx).powi(2) + (py - qy).powi(2)).sqrt()
}

/// Square heat image of a matrix with rows and columns taken in `order`,
/// each entry drawn as a `cell` × `cell` block, scaled to the largest entry.
pub fn heat_map(n: usize, entry: impl Fn(usize, usize) -> f64, order: &[usize], cell: usize) -> GrayImage {
    let max = order
        .iter()
        .flat_map(|&i| order.iter().map(move |&j| (i, j)))
        .map(|(i, j)| entry(i, j))
        .fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    let size = n * cell;
    GrayImage::from_fn(size, size, |col, row| {
        entry(order[row / cell], order[col / cell]) * scale
    })
}

/// θ-summed (x, y) projection of a kernel, log-scaled to `[0, 1]` over
/// `decades` orders of magnitude below the maximum, y up.
pub fn kernel_projection(grid: &KernelGrid, decades: f64) -> GrayImage {
    let s = grid.spec();
    let proj = grid.xy_projection();
    let max = proj.iter().copied().fold(0.0f64, f64::max);
    GrayImage::from_fn(s.n_x, s.n_y, |col, row| {
        let v = proj[(s.n_y - 1 - row) * s.n_x + col];
        if max <= 0.0 || v <= 0.0 {
            0.0
        } else {
            (1.0 + (v / max).log10() / decades).clamp(0.0, 1.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_bar_lights_its_row() {
        let view = View::new((-5.0, -5.0, 5.0, 5.0), 4.0);
        let img = draw_bars(&[CorticalPoint::new(0.0, 0.0, 0.0)], &[[1.0, 1.0, 1.0]], &view, 6.0);
        assert_eq!((img.width, img.height), (40, 40));
        let at = |c: usize, r: usize| img.data[r * img.width + c][0];
        assert!(at(20, 20) > 0.9 && at(10, 20) > 0.9);
        assert_eq!(at(20, 5), 0.0);
        assert_eq!(at(2, 20), 0.0);
    }

    #[test]
    fn vertical_bar_lights_its_column() {
        let view = View::new((-5.0, -5.0, 5.0, 5.0), 4.0);
        let p = CorticalPoint::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let img = draw_bars(&[p], &[[0.0, 1.0, 0.0]], &view, 6.0);
        let at = |c: usize, r: usize| img.data[r * img.width + c];
        assert!(at(20, 10)[1] > 0.9 && at(20, 10)[0] == 0.0);
        assert_eq!(at(10, 20)[1], 0.0);
    }

    #[test]
    fn world_y_points_up() {
        let view = View::new((0.0, 0.0, 10.0, 10.0), 1.0);
        let img = draw_bars(&[CorticalPoint::new(5.0, 9.0, 0.0)], &[[1.0; 3]], &view, 2.0);
        let top: f64 = (0..10).map(|c| img.data[c + img.width][0]).sum();
        let bottom: f64 = (0..10).map(|c| img.data[c + 8 * img.width][0]).sum();
        assert!(top > 0.0 && bottom == 0.0);
    }

    #[test]
    fn heat_map_follows_order() {
        let m = [[1.0, 0.0], [0.0, 0.5]];
        let img = heat_map(2, |i, j| m[i][j], &[1, 0], 3);
        assert_eq!((img.width, img.height), (6, 6));
        assert_eq!(img.get(0, 0), 0.5);
        assert_eq!(img.get(5, 5), 1.0);
        assert_eq!(img.get(0, 5), 0.0);
    }
}
