//! Running-average background model, foreground masking, and blob extraction
//! by 8-connected components.

use crate::error::{Error, Result};
use crate::scene_io::Frame;

/// Per-pixel, per-channel exponential moving average of the scene.
///
/// The first frame seeds the mean directly; afterwards each update blends
/// `mean = (1 - alpha) * mean + alpha * pixel` in floating point with no
/// intermediate rounding.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    width: u32,
    height: u32,
    alpha: f64,
    mean: Vec<f64>,
    initialized: bool,
}

impl BackgroundModel {
    pub fn new(width: u32, height: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config {
                key: "alpha".to_string(),
                reason: format!("learning rate must be in (0, 1], got {alpha}"),
            });
        }
        Ok(Self {
            width,
            height,
            alpha,
            mean: vec![0.0; width as usize * height as usize * 3],
            initialized: false,
        })
    }

    pub fn initialized(&self) -> bool {
        self.initialized
    }

    /// Mean value for channel `c` (0..3) at (x, y).
    pub fn mean_at(&self, x: u32, y: u32, c: usize) -> f64 {
        self.mean[(y as usize * self.width as usize + x as usize) * 3 + c]
    }

    fn check_dimensions(&self, frame: &Frame) -> Result<()> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::DimensionMismatch {
                expected_width: self.width,
                expected_height: self.height,
                got_width: frame.width(),
                got_height: frame.height(),
            });
        }
        Ok(())
    }

    /// Folds a frame into the running average.
    pub fn update(&mut self, frame: &Frame) -> Result<()> {
        self.check_dimensions(frame)?;
        let pixels = frame.pixels();
        if !self.initialized {
            for (m, &p) in self.mean.iter_mut().zip(pixels) {
                *m = p as f64;
            }
            self.initialized = true;
            return Ok(());
        }
        let alpha = self.alpha;
        for (m, &p) in self.mean.iter_mut().zip(pixels) {
            *m = (1.0 - alpha) * *m + alpha * p as f64;
        }
        Ok(())
    }

    /// Foreground test: a pixel is foreground iff the maximum absolute
    /// channel difference against the mean strictly exceeds `fg_threshold`.
    pub fn subtract(&self, frame: &Frame, fg_threshold: f64) -> Result<ForegroundMask> {
        if !self.initialized {
            return Err(Error::UninitializedBackground);
        }
        self.check_dimensions(frame)?;
        let pixels = frame.pixels();
        let mut bits = vec![false; self.width as usize * self.height as usize];
        for (i, bit) in bits.iter_mut().enumerate() {
            let off = i * 3;
            let mut max_diff = 0.0f64;
            for c in 0..3 {
                let diff = (pixels[off + c] as f64 - self.mean[off + c]).abs();
                if diff > max_diff {
                    max_diff = diff;
                }
            }
            *bit = max_diff > fg_threshold;
        }
        Ok(ForegroundMask { width: self.width, height: self.height, bits })
    }
}

/// Binary foreground mask, one boolean per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForegroundMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::Config {
                key: "mask".to_string(),
                reason: format!("bit buffer is {} entries, expected {}", bits.len(), width * height),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// A connected foreground region: the detection unit handed to association.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    /// Arithmetic mean of member pixel coordinates.
    pub centroid: (f64, f64),
    /// Tight bounds (x0, y0, w, h).
    pub bbox: (u32, u32, u32, u32),
    /// Member pixel count.
    pub area: usize,
}

/// 8-connected components with area >= `min_area`, sorted by (y0, x0).
pub fn extract_blobs(mask: &ForegroundMask, min_area: usize) -> Vec<Blob> {
    let width = mask.width as usize;
    let height = mask.height as usize;
    let mut visited = vec![false; mask.bits.len()];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();

    for start in 0..mask.bits.len() {
        if !mask.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut area = 0usize;
        let mut sum_x = 0u64;
        let mut sum_y = 0u64;
        let mut min_x = usize::MAX;
        let mut min_y = usize::MAX;
        let mut max_x = 0usize;
        let mut max_y = 0usize;
        while let Some(idx) = stack.pop() {
            let x = idx % width;
            let y = idx / width;
            area += 1;
            sum_x += x as u64;
            sum_y += y as u64;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx as usize >= width || ny as usize >= height {
                        continue;
                    }
                    let nidx = ny as usize * width + nx as usize;
                    if mask.bits[nidx] && !visited[nidx] {
                        visited[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        if area >= min_area {
            blobs.push(Blob {
                centroid: (sum_x as f64 / area as f64, sum_y as f64 / area as f64),
                bbox: (
                    min_x as u32,
                    min_y as u32,
                    (max_x - min_x + 1) as u32,
                    (max_y - min_y + 1) as u32,
                ),
                area,
            });
        }
    }
    blobs.sort_by_key(|b| (b.bbox.1, b.bbox.0));
    blobs
}
