//! HSV color conversion, region histograms, and Bhattacharyya
//! distance/similarity between normalized histograms.
//!
//! Histograms use N = n_h * n_s + n_v bins: pixels whose saturation and
//! value both clear their thresholds land in a joint (hue, saturation) bin;
//! everything else lands in a value-only bin. Boundary inputs (h = 360,
//! s = 1, v = 1) clamp to the top bin so results are reproducible
//! bit-for-bit.

use crate::error::{Error, Result};
use crate::scene_io::Frame;

/// Bin counts and the saturation/value thresholds for histogram routing.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramConfig {
    pub n_h: u32,
    pub n_s: u32,
    pub n_v: u32,
    pub sat_threshold: f64,
    pub val_threshold: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { n_h: 10, n_s: 10, n_v: 10, sat_threshold: 0.1, val_threshold: 0.2 }
    }
}

impl HistogramConfig {
    /// Total bin count N = n_h * n_s + n_v.
    pub fn total_bins(&self) -> usize {
        self.n_h as usize * self.n_s as usize + self.n_v as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 || self.n_s == 0 || self.n_v == 0 {
            return Err(Error::Config {
                key: "n_h/n_s/n_v".to_string(),
                reason: "bin counts must be positive".to_string(),
            });
        }
        if self.total_bins() < 2 {
            return Err(Error::Config {
                key: "n_h/n_s/n_v".to_string(),
                reason: "total bins must be >= 2".to_string(),
            });
        }
        if self.total_bins() > u16::MAX as usize {
            return Err(Error::Config {
                key: "n_h/n_s/n_v".to_string(),
                reason: format!("total bins must fit in u16, got {}", self.total_bins()),
            });
        }
        for (key, v) in [("sat_threshold", self.sat_threshold), ("val_threshold", self.val_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config {
                    key: key.to_string(),
                    reason: format!("must be in [0, 1], got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Standard hexcone conversion. Returns (h in degrees [0, 360), s in [0, 1],
/// v in [0, 1]); h is defined as 0 when s = 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let rf = r as f64 / 255.0;
    let gf = g as f64 / 255.0;
    let bf = b as f64 / 255.0;
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;

    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        60.0 * ((gf - bf) / delta)
    } else if max == gf {
        60.0 * (2.0 + (bf - rf) / delta)
    } else {
        60.0 * (4.0 + (rf - gf) / delta)
    };
    let h = if h < 0.0 { h + 360.0 } else { h };
    // Guard the wrap: h = 360 - eps rounding must stay inside [0, 360).
    let h = if h >= 360.0 { 0.0 } else { h };
    (h, s, v)
}

/// Maps an RGB triple to its histogram bin index in [0, N).
pub fn bin_index(config: &HistogramConfig, r: u8, g: u8, b: u8) -> usize {
    let (h, s, v) = rgb_to_hsv(r, g, b);
    if s > config.sat_threshold && v > config.val_threshold {
        let hi = ((h / 360.0 * config.n_h as f64) as usize).min(config.n_h as usize - 1);
        let si = ((s * config.n_s as f64) as usize).min(config.n_s as usize - 1);
        hi * config.n_s as usize + si
    } else {
        let vi = ((v * config.n_v as f64) as usize).min(config.n_v as usize - 1);
        config.n_h as usize * config.n_s as usize + vi
    }
}

/// Integer pixel rectangle, possibly extending beyond the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub w: i64,
    pub h: i64,
}

impl PixelRect {
    /// Rectangle of real side lengths centered at (cx, cy), rounded to pixel
    /// bounds. Side lengths round to at least one pixel.
    pub fn centered(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        let w = width.round().max(1.0) as i64;
        let h = height.round().max(1.0) as i64;
        Self {
            x0: (cx - width / 2.0).round() as i64,
            y0: (cy - height / 2.0).round() as i64,
            w,
            h,
        }
    }

    /// From a blob bbox (x0, y0, w, h).
    pub fn from_bbox(bbox: (u32, u32, u32, u32)) -> Self {
        Self { x0: bbox.0 as i64, y0: bbox.1 as i64, w: bbox.2 as i64, h: bbox.3 as i64 }
    }

    /// Intersection with a width x height frame; `None` when empty.
    pub fn clip(&self, width: u32, height: u32) -> Option<PixelRect> {
        let x0 = self.x0.max(0);
        let y0 = self.y0.max(0);
        let x1 = (self.x0 + self.w).min(width as i64);
        let y1 = (self.y0 + self.h).min(height as i64);
        if x1 > x0 && y1 > y0 {
            Some(PixelRect { x0, y0, w: x1 - x0, h: y1 - y0 })
        } else {
            None
        }
    }
}

/// A normalized appearance histogram (bins sum to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    /// Normalizes raw counts to sum 1. All-zero counts are rejected; a
    /// silent uniform histogram would corrupt association scores.
    pub fn from_counts(counts: Vec<f64>) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        Ok(Self { bins: counts.into_iter().map(|c| c / total).collect() })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Histogram of the frame pixels inside `region`, clipped to the frame.
/// A region fully outside the frame is an error.
pub fn compute_histogram(
    frame: &Frame,
    region: PixelRect,
    config: &HistogramConfig,
) -> Result<Histogram> {
    let clipped = region.clip(frame.width(), frame.height()).ok_or(Error::EmptyRegion)?;
    let mut counts = vec![0.0f64; config.total_bins()];
    for y in clipped.y0..clipped.y0 + clipped.h {
        for x in clipped.x0..clipped.x0 + clipped.w {
            let (r, g, b) = frame.rgb_at(x as u32, y as u32);
            counts[bin_index(config, r, g, b)] += 1.0;
        }
    }
    Histogram::from_counts(counts)
}

/// Per-pixel bin indices for one frame, so repeated region histograms (one
/// per particle per object) cost a counting pass instead of an HSV
/// conversion each. Produces exactly the same histograms as
/// [`compute_histogram`].
#[derive(Debug, Clone)]
pub struct BinnedFrame {
    width: u32,
    height: u32,
    n_bins: usize,
    indices: Vec<u16>,
}

impl BinnedFrame {
    pub fn new(frame: &Frame, config: &HistogramConfig) -> Result<Self> {
        config.validate()?;
        let pixels = frame.pixels();
        let mut indices = Vec::with_capacity(pixels.len() / 3);
        for rgb in pixels.chunks_exact(3) {
            indices.push(bin_index(config, rgb[0], rgb[1], rgb[2]) as u16);
        }
        Ok(Self {
            width: frame.width(),
            height: frame.height(),
            n_bins: config.total_bins(),
            indices,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Histogram of `region` clipped to the frame; error when fully outside.
    pub fn histogram(&self, region: PixelRect) -> Result<Histogram> {
        let clipped = region.clip(self.width, self.height).ok_or(Error::EmptyRegion)?;
        let mut counts = vec![0.0f64; self.n_bins];
        for y in clipped.y0..clipped.y0 + clipped.h {
            let row = y as usize * self.width as usize;
            for x in clipped.x0..clipped.x0 + clipped.w {
                counts[self.indices[row + x as usize] as usize] += 1.0;
            }
        }
        Histogram::from_counts(counts)
    }
}

/// Bhattacharyya coefficient, clamped to [0, 1] against floating-point
/// overshoot on normalized inputs.
fn coefficient(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::BinCountMismatch { left: a.len(), right: b.len() });
    }
    let sum: f64 = a.bins.iter().zip(&b.bins).map(|(x, y)| (x * y).sqrt()).sum();
    Ok(sum.clamp(0.0, 1.0))
}

/// Bhattacharyya distance d = sqrt(1 - sum sqrt(q_ref * q)), in [0, 1].
///
/// The radicand is accumulated as 0.5 * sum (sqrt(x) - sqrt(y))^2, which
/// equals 1 - sum sqrt(x * y) for normalized inputs but stays exactly zero
/// on identical histograms instead of inheriting summation noise.
pub fn bhattacharyya_distance(q_ref: &Histogram, q: &Histogram) -> Result<f64> {
    if q_ref.len() != q.len() {
        return Err(Error::BinCountMismatch { left: q_ref.len(), right: q.len() });
    }
    let radicand: f64 = q_ref
        .bins
        .iter()
        .zip(&q.bins)
        .map(|(x, y)| {
            let d = x.sqrt() - y.sqrt();
            0.5 * d * d
        })
        .sum();
    Ok(radicand.clamp(0.0, 1.0).sqrt())
}

/// Similarity pi = 1 - d^2: the Bhattacharyya coefficient itself, in [0, 1].
pub fn similarity(q_ref: &Histogram, q: &Histogram) -> Result<f64> {
    coefficient(q_ref, q)
}
