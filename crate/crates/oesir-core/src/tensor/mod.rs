//! Dense-array numerics: feature maps, ROIAlign, pooling descriptors,
//! PCA whitening, and HoG.
//!
//! All operations are pure functions of immutable inputs and may be called
//! concurrently.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

mod hog;
mod pool;
mod roi;
mod whiten;

pub use hog::hog_descriptor;
pub use pool::{pool_global, PoolMethod};
pub use roi::{pool_object_embedding, roi_align, RoiGrid};
pub use whiten::{apply_whitening, fit_whitening, WhiteningTransform};

/// Dense `height x width x channels` activation grid, row-major, with a
/// spatial stride tying cell `(x, y)` to image coordinates `(x*stride, y*stride)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    channels: usize,
    stride: f32,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, channels: usize, stride: f32, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::InvalidArgument("feature map dims must be >= 1"));
        }
        if !(stride > 0.0) || !stride.is_finite() {
            return Err(Error::InvalidArgument("feature map stride must be positive"));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimMismatch { expected: width * height * channels, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature map data"));
        }
        Ok(Self { width, height, channels, stride, data })
    }

    /// Zero-filled map; callers fill it in-place.
    pub fn zeros(width: usize, height: usize, channels: usize, stride: f32) -> Self {
        Self { width, height, channels, stride, data: alloc::vec![0.0; width * height * channels] }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn stride(&self) -> f32 {
        self.stride
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Contiguous channel slice at one cell.
    #[inline]
    pub fn cell(&self, y: usize, x: usize) -> &[f32] {
        let base = (y * self.width + x) * self.channels;
        &self.data[base..base + self.channels]
    }
}

/// Axis-aligned bounding box in image pixel coordinates; `x2 > x1`, `y2 > y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x1: f32,
    pub y1: f32,
    pub x2: f32,
    pub y2: f32,
}

impl BBox {
    pub fn new(x1: f32, y1: f32, x2: f32, y2: f32) -> Result<Self> {
        let b = Self { x1, y1, x2, y2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("box coordinates"));
        }
        if self.x2 <= self.x1 || self.y2 <= self.y1 {
            return Err(Error::DegenerateBox("x2 <= x1 or y2 <= y1"));
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> f32 {
        self.x2 - self.x1
    }

    #[inline]
    pub fn height(&self) -> f32 {
        self.y2 - self.y1
    }

    #[inline]
    pub fn area(&self) -> f32 {
        self.width() * self.height()
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x1 < other.x2 && other.x1 < self.x2 && self.y1 < other.y2 && other.y1 < self.y2
    }
}

/// Scored, class-labeled bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f32,
    pub class_id: u32,
}

impl Detection {
    pub fn new(bbox: BBox, score: f32, class_id: u32) -> Result<Self> {
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidArgument("detection score must be in [0,1]"));
        }
        Ok(Self { bbox, score, class_id })
    }
}

/// Fixed-length f32 vector descriptor. `normalized` marks unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: Vec<f32>,
    normalized: bool,
}

impl Descriptor {
    /// Wrap raw (not necessarily normalized) values.
    pub fn raw(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("descriptor dim must be >= 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("descriptor values"));
        }
        Ok(Self { values, normalized: false })
    }

    /// L2-normalize, consuming self. Errors on (near-)zero norm.
    pub fn into_normalized(mut self) -> Result<Self> {
        let norm = l2_norm(&self.values);
        if norm < 1e-12 {
            return Err(Error::ZeroNormDescriptor);
        }
        for v in &mut self.values {
            *v /= norm;
        }
        self.normalized = true;
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

#[inline]
pub(crate) fn l2_norm(v: &[f32]) -> f32 {
    let s: f64 = v.iter().map(|x| f64::from(*x) * f64::from(*x)).sum();
    s.sqrt() as f32
}

/// Squared Euclidean distance between equal-length slices.
#[inline]
pub fn squared_l2(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}
