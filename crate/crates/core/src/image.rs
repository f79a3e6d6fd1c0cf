//! Minimal grayscale / RGB rasters with binary PGM (P5) and PPM (P6) I/O.

use crate::error::{Error, Result};
use std::io::{Read, Write};

/// Grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    /// Pixel lookup with coordinates clamped to the border.
    #[inline]
    pub fn get_clamped(&self, col: isize, row: isize) -> f64 {
        let c = col.clamp(0, self.width as isize - 1) as usize;
        let r = row.clamp(0, self.height as isize - 1) as usize;
        self.get(c, r)
    }

    /// Exact quarter turn counter-clockwise in the (x = col, y = row) frame,
    /// i.e. `new(x, y) = old(R_{-π/2}(x, y))` about the image centre.
    /// Only defined for square images.
    pub fn rotate_quarter(&self) -> GrayImage {
        assert_eq!(self.width, self.height, "quarter turn needs a square image");
        let n = self.width;
        GrayImage::from_fn(n, n, |col, row| self.get(row, n - 1 - col))
    }

    pub fn read_pgm(mut reader: impl Read) -> Result<GrayImage> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        let (magic, width, height, maxval, offset) = parse_pnm_header(&bytes)?;
        if magic != "P5" {
            return Err(Error::Format(format!("expected binary PGM (P5), got {magic}")));
        }
        if maxval == 0 || maxval > 255 {
            return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
        }
        let pixels = &bytes[offset..];
        if pixels.len() < width * height {
            return Err(Error::Format("truncated PGM raster".into()));
        }
        let scale = maxval as f64;
        let data = pixels[..width * height].iter().map(|&b| b as f64 / scale).collect();
        Ok(GrayImage { width, height, data })
    }

    pub fn write_pgm(&self, writer: impl Write) -> Result<()> {
        self.write_pgm_with_comment(writer, "")
    }

    /// P5 with `comment` in the header (one `#` line per input line).
    pub fn write_pgm_with_comment(&self, mut writer: impl Write, comment: &str) -> Result<()> {
        write!(
            writer,
            "P5\n{}{} {}\n255\n",
            header_comment(comment),
            self.width,
            self.height
        )?;
        let raster: Vec<u8> = self.data.iter().map(|&v| to_byte(v)).collect();
        writer.write_all(&raster)?;
        Ok(())
    }
}

/// RGB image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn filled(width: usize, height: usize, value: [f64; 3]) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Alpha-blends `color` into the pixel; out-of-bounds writes are dropped.
    pub fn blend(&mut self, col: isize, row: isize, color: [f64; 3], alpha: f64) {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return;
        }
        let px = &mut self.data[row as usize * self.width + col as usize];
        for (p, c) in px.iter_mut().zip(color) {
            *p = *p * (1.0 - alpha) + c * alpha;
        }
    }

    pub fn write_ppm(&self, writer: impl Write) -> Result<()> {
        self.write_ppm_with_comment(writer, "")
    }

    pub fn write_ppm_with_comment(&self, mut writer: impl Write, comment: &str) -> Result<()> {
        write!(
            writer,
            "P6\n{}{} {}\n255\n",
            header_comment(comment),
            self.width,
            self.height
        )?;
        let raster: Vec<u8> = self.data.iter().flat_map(|px| px.map(to_byte)).collect();
        writer.write_all(&raster)?;
        Ok(())
    }
}

fn header_comment(comment: &str) -> String {
    comment.lines().map(|l| format!("# {l}\n")).collect()
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn parse_pnm_header(bytes: &[u8]) -> Result<(String, usize, usize, usize, usize)> {
    let mut tokens = Vec::with_capacity(4);
    let mut i = 0;
    while tokens.len() < 4 {
        // skip whitespace and comments
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::Format("truncated PNM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    i += 1;
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PNM header field '{s}'")))
    };
    Ok((
        tokens[0].clone(),
        num(&tokens[1])?,
        num(&tokens[2])?,
        num(&tokens[3])?,
        i,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = GrayImage::from_fn(5, 3, |c, r| ((c + 5 * r) * 17 % 256) as f64 / 255.0);
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        let back = GrayImage::read_pgm(&buf[..]).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_header_with_comment() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255]);
        let img = GrayImage::read_pgm(&bytes[..]).unwrap();
        assert_eq!(img.data, vec![0.0, 1.0]);
    }

    #[test]
    fn comments_survive_a_round_trip() {
        let img = GrayImage::from_fn(3, 2, |c, r| (c + r) as f64 * 51.0 / 255.0);
        let mut buf = Vec::new();
        img.write_pgm_with_comment(&mut buf, "{\"sigma\": 0.08}\nsecond line")
            .unwrap();
        assert!(buf.starts_with(b"P5\n# {\"sigma\": 0.08}\n# second line\n3 2\n"));
        assert_eq!(GrayImage::read_pgm(&buf[..]).unwrap(), img);
    }

    #[test]
    fn rejects_ascii_pgm() {
        assert!(GrayImage::read_pgm(&b"P2\n1 1\n255\n0\n"[..]).is_err());
    }

    #[test]
    fn four_quarter_turns_are_identity() {
        let img = GrayImage::from_fn(7, 7, |c, r| (c * 7 + r) as f64);
        let back = img.rotate_quarter().rotate_quarter().rotate_quarter().rotate_quarter();
        assert_eq!(back, img);
        // (x, y) = (1, 0) relative to centre moves to (0, 1)
        let mut dot = GrayImage::new(7, 7);
        dot.set(4, 3, 1.0);
        assert_eq!(dot.rotate_quarter().get(3, 4), 1.0);
    }
}
