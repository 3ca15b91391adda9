//! Phase portraits: each pixel is colored by `arg f(z)` on a cyclic hue
//! wheel at full saturation and brightness, and written as binary PPM.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted width or height.
pub const MAX_SIDE: usize = 4096;

#[derive(Debug, Error)]
pub enum PortraitError {
    #[error("resolution {width}x{height} must lie between 1x1 and {MAX_SIDE}x{MAX_SIDE}")]
    Resolution { width: usize, height: usize },
    #[error("window must have positive, finite extent")]
    Window,
    #[error("cannot parse resolution `{0}`; expected WxH")]
    Parse(String),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, PortraitError>;

/// Rectangular display window `[re.0, re.1] x [im.0, im.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Window {
    pub const fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    fn valid(&self) -> bool {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
        ok(self.re) && ok(self.im)
    }
}

/// Parses `WxH`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| PortraitError::Parse(s.into()))?;
    let w: usize = w.trim().parse().map_err(|_| PortraitError::Parse(s.into()))?;
    let h: usize = h.trim().parse().map_err(|_| PortraitError::Parse(s.into()))?;
    check_resolution(w, h)?;
    Ok((w, h))
}

fn check_resolution(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(PortraitError::Resolution { width, height });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major from the top-left pixel.
    pub pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ppm()).map_err(|source| PortraitError::Io { path: path.display().to_string(), source })
    }
}

/// Point at the center of pixel `(x, y)`; row 0 is the top of the window.
pub fn pixel_point(window: &Window, width: usize, height: usize, x: usize, y: usize) -> Complex64 {
    let re = window.re.0 + (x as f64 + 0.5) / width as f64 * (window.re.1 - window.re.0);
    let im = window.im.1 - (y as f64 + 0.5) / height as f64 * (window.im.1 - window.im.0);
    Complex64::new(re, im)
}

/// Hue wheel: red on the positive real axis, cyan on the negative real axis.
/// Non-finite values are black.
pub fn phase_color(v: Complex64) -> [u8; 3] {
    if !v.is_finite() {
        return [0, 0, 0];
    }
    let turns = (v.arg() / std::f64::consts::TAU).rem_euclid(1.0);
    let h = 6.0 * turns;
    let sector = (h.floor() as usize).min(5);
    let frac = h - sector as f64;
    let (r, g, b) = match sector {
        0 => (1.0, frac, 0.0),
        1 => (1.0 - frac, 1.0, 0.0),
        2 => (0.0, 1.0, frac),
        3 => (0.0, 1.0 - frac, 1.0),
        4 => (frac, 0.0, 1.0),
        _ => (1.0, 0.0, 1.0 - frac),
    };
    let q = |x: f64| (255.0 * x).round() as u8;
    [q(r), q(g), q(b)]
}

/// Phase portrait of `f(z) + shift` over the window.
pub fn render<F>(f: F, window: &Window, width: usize, height: usize, shift: Complex64) -> Result<Image>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    check_resolution(width, height)?;
    if !window.valid() {
        return Err(PortraitError::Window);
    }
    let pixels = (0..height)
        .into_par_iter()
        .flat_map_iter(|y| {
            let f = &f;
            (0..width).map(move |x| phase_color(f(pixel_point(window, width, height, x, y)) + shift))
        })
        .collect();
    Ok(Image { width, height, pixels })
}
