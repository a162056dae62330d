//! Deterministic synthetic world: procedural scenes, splice generation with
//! ground truth, a fixed filter-bank feature extractor, and a detection
//! oracle.
//!
//! Every operation here is a pure function of `(inputs, seed)`; repeated
//! calls are byte-identical. Nothing is learned and nothing is downloaded.

use alloc::vec::Vec;

use crate::tensor::{BBox, Detection, FeatureMap};
use crate::{Error, Result};

mod filterbank;
mod oracle;
mod raster;
mod scene;
mod splice;
mod texture;

pub use filterbank::{filter_bank_features, FeatureKind, FILTER_BANK_SEED};
pub use oracle::{detect_scene, detect_spliced, OracleParams};
pub use raster::Raster;
pub use scene::{generate_scene, SceneParams};
pub use splice::{splice, Placement};

/// Bit mask over a local region of the image; `(x0, y0)` is the region origin
/// in image pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    x0: usize,
    y0: usize,
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl RegionMask {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimMismatch { expected: width * height, got: bits.len() });
        }
        Ok(Self { x0, y0, width, height, bits })
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        if x < self.x0 || y < self.y0 {
            return false;
        }
        let (lx, ly) = (x - self.x0, y - self.y0);
        lx < self.width && ly < self.height && self.bits[ly * self.width + lx]
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Image-space pixels set in this mask.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        let (x0, y0) = (self.x0, self.y0);
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (x0 + i % w, y0 + i / w))
    }

    /// Tight image-space bounding box of the set pixels (x2/y2 exclusive).
    pub fn tight_bbox(&self) -> Option<BBox> {
        let mut min_x = usize::MAX;
        let mut min_y = usize::MAX;
        let mut max_x = 0usize;
        let mut max_y = 0usize;
        let mut any = false;
        for (x, y) in self.pixels() {
            any = true;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        if !any {
            return None;
        }
        Some(BBox {
            x1: min_x as f32,
            y1: min_y as f32,
            x2: (max_x + 1) as f32,
            y2: (max_y + 1) as f32,
        })
    }
}

/// Full-image binary mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, bits: alloc::vec![false; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimMismatch { expected: width * height, got: bits.len() });
        }
        Ok(Self { width, height, bits })
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
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// One placed object: its detection-style record plus the exact pixel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub detection: Detection,
    pub mask: RegionMask,
}

/// A procedural scene: layered raster, exact object masks, and the seed that
/// reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub image: Raster,
    pub objects: Vec<SceneObject>,
    pub seed: u64,
    pub background_id: u32,
}

/// A spliced query: donor object composited into a base scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SplicedPair {
    pub spliced: Raster,
    /// Scene id of the donor (where the object came from).
    pub source_id: u64,
    /// Scene id of the base (what the query is a manipulated version of).
    pub target_id: u64,
    /// Pixels written by the composite; everything outside is identical to
    /// the base raster.
    pub gt_mask: BinaryMask,
    pub spliced_box: BBox,
}

/// Multi-scale feature pyramid plus the teacher map.
///
/// `f2`/`f3`/`f4` play the detector-backbone role (strides 4/8/16, channels
/// 16/32/64); `teacher` is an independent filter stack at stride 16 with 64
/// channels that the students learn to reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleFeatures {
    pub f2: FeatureMap,
    pub f3: FeatureMap,
    pub f4: FeatureMap,
    pub teacher: FeatureMap,
}

impl MultiScaleFeatures {
    /// Check the stride/shape contract against the source image size.
    pub fn validate(&self, image_width: usize, image_height: usize) -> Result<()> {
        let ceil_div = |a: usize, b: usize| a.div_ceil(b);
        let checks = [
            (&self.f2, 4usize, 16usize),
            (&self.f3, 8, 32),
            (&self.f4, 16, 64),
            (&self.teacher, 16, 64),
        ];
        for (fm, stride, channels) in checks {
            if fm.stride() != stride as f32 || fm.channels() != channels {
                return Err(Error::ShapeMismatch("feature pyramid stride/channel contract"));
            }
            if fm.width() != ceil_div(image_width, stride) || fm.height() != ceil_div(image_height, stride) {
                return Err(Error::ShapeMismatch("feature pyramid spatial dims"));
            }
        }
        Ok(())
    }
}
