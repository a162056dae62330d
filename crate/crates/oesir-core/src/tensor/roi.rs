//! ROIAlign and object-embedding pooling.

use alloc::vec::Vec;
use num_traits::Float;

use super::{BBox, Descriptor, FeatureMap};
use crate::{Error, Result};

/// Output of [`roi_align`]: an `out_size x out_size x channels` grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiGrid {
    out_size: usize,
    channels: usize,
    data: Vec<f32>,
}

impl RoiGrid {
    pub fn new(out_size: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != out_size * out_size * channels {
            return Err(Error::DimMismatch {
                expected: out_size * out_size * channels,
                got: data.len(),
            });
        }
        Ok(Self { out_size, channels, data })
    }

    #[inline]
    pub fn out_size(&self) -> usize {
        self.out_size
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.out_size + x) * self.channels + c]
    }
}

/// Bilinear sample of channel values at a (clamped) feature-grid coordinate.
/// Feature values sit at integer grid coordinates.
#[inline]
fn bilinear_into(fm: &FeatureMap, x: f32, y: f32, acc: &mut [f32]) {
    let w = fm.width();
    let h = fm.height();
    let x = x.max(0.0).min((w - 1) as f32);
    let y = y.max(0.0).min((h - 1) as f32);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f32;
    let fy = y - y0 as f32;
    let w00 = (1.0 - fy) * (1.0 - fx);
    let w01 = (1.0 - fy) * fx;
    let w10 = fy * (1.0 - fx);
    let w11 = fy * fx;
    let c00 = fm.cell(y0, x0);
    let c01 = fm.cell(y0, x1);
    let c10 = fm.cell(y1, x0);
    let c11 = fm.cell(y1, x1);
    for c in 0..acc.len() {
        acc[c] += w00 * c00[c] + w01 * c01[c] + w10 * c10[c] + w11 * c11[c];
    }
}

/// Pool a box from a feature map into a fixed `out_size` grid.
///
/// The box (image coordinates) is mapped to feature coordinates by dividing
/// by the map stride and clamped to the map extent. Each output bin averages
/// `sampling_ratio^2` bilinear samples at
/// `coord = bin_origin + (s + 0.5) * step - 0.5`, with sample coordinates
/// clamped to `[0, W-1] x [0, H-1]` before interpolation.
pub fn roi_align(fm: &FeatureMap, bbox: &BBox, out_size: usize, sampling_ratio: usize) -> Result<RoiGrid> {
    bbox.validate()?;
    if out_size == 0 {
        return Err(Error::InvalidArgument("out_size must be >= 1"));
    }
    if sampling_ratio == 0 {
        return Err(Error::InvalidArgument("sampling_ratio must be >= 1"));
    }
    let stride = fm.stride();
    let (fw, fh) = (fm.width() as f32, fm.height() as f32);
    let extent = BBox { x1: 0.0, y1: 0.0, x2: fw * stride, y2: fh * stride };
    if !bbox.intersects(&extent) {
        return Err(Error::DegenerateBox("box does not intersect image extent"));
    }

    // Feature coordinates, clamped to the map extent.
    let fx1 = (bbox.x1 / stride).max(0.0);
    let fy1 = (bbox.y1 / stride).max(0.0);
    let fx2 = (bbox.x2 / stride).min(fw);
    let fy2 = (bbox.y2 / stride).min(fh);
    if fx2 - fx1 <= 1e-6 || fy2 - fy1 <= 1e-6 {
        return Err(Error::DegenerateBox("zero area in feature coordinates after clamping"));
    }

    let channels = fm.channels();
    let bin_w = (fx2 - fx1) / out_size as f32;
    let bin_h = (fy2 - fy1) / out_size as f32;
    let step_x = bin_w / sampling_ratio as f32;
    let step_y = bin_h / sampling_ratio as f32;
    let inv_count = 1.0 / (sampling_ratio * sampling_ratio) as f32;

    let mut data = alloc::vec![0.0f32; out_size * out_size * channels];
    for by in 0..out_size {
        let oy = fy1 + by as f32 * bin_h;
        for bx in 0..out_size {
            let ox = fx1 + bx as f32 * bin_w;
            let bin = &mut data[(by * out_size + bx) * channels..][..channels];
            for sy in 0..sampling_ratio {
                let y = oy + (sy as f32 + 0.5) * step_y - 0.5;
                for sx in 0..sampling_ratio {
                    let x = ox + (sx as f32 + 0.5) * step_x - 0.5;
                    bilinear_into(fm, x, y, bin);
                }
            }
            for v in bin.iter_mut() {
                *v *= inv_count;
            }
        }
    }
    RoiGrid::new(out_size, channels, data)
}

/// Channelwise spatial max over an ROI grid, L2-normalized.
pub fn pool_object_embedding(roi: &RoiGrid) -> Result<Descriptor> {
    let c = roi.channels();
    let mut maxes = alloc::vec![f32::NEG_INFINITY; c];
    for y in 0..roi.out_size() {
        for x in 0..roi.out_size() {
            let base = (y * roi.out_size() + x) * c;
            for (k, m) in maxes.iter_mut().enumerate() {
                let v = roi.data()[base + k];
                if v > *m {
                    *m = v;
                }
            }
        }
    }
    Descriptor::raw(maxes)?.into_normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::squared_l2;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use rand::Rng as _;

    /// Naive reference: enumerate every sample point and bilinear-interpolate
    /// with scalar arithmetic. Kept deliberately simple.
    pub(crate) fn roi_align_oracle(
        fm: &FeatureMap,
        bbox: &BBox,
        out_size: usize,
        sampling_ratio: usize,
    ) -> Vec<f32> {
        let stride = fm.stride();
        let fx1 = (bbox.x1 / stride).max(0.0);
        let fy1 = (bbox.y1 / stride).max(0.0);
        let fx2 = (bbox.x2 / stride).min(fm.width() as f32);
        let fy2 = (bbox.y2 / stride).min(fm.height() as f32);
        let bin_w = (fx2 - fx1) / out_size as f32;
        let bin_h = (fy2 - fy1) / out_size as f32;
        let sample = |x: f32, y: f32, c: usize| -> f32 {
            let x = x.max(0.0).min((fm.width() - 1) as f32);
            let y = y.max(0.0).min((fm.height() - 1) as f32);
            let x0 = x.floor() as usize;
            let y0 = y.floor() as usize;
            let x1 = (x0 + 1).min(fm.width() - 1);
            let y1 = (y0 + 1).min(fm.height() - 1);
            let fx = x - x0 as f32;
            let fy = y - y0 as f32;
            (1.0 - fy) * ((1.0 - fx) * fm.get(y0, x0, c) + fx * fm.get(y0, x1, c))
                + fy * ((1.0 - fx) * fm.get(y1, x0, c) + fx * fm.get(y1, x1, c))
        };
        let mut out = Vec::new();
        for by in 0..out_size {
            for bx in 0..out_size {
                for c in 0..fm.channels() {
                    let mut acc = 0.0;
                    for sy in 0..sampling_ratio {
                        for sx in 0..sampling_ratio {
                            let x = fx1 + bx as f32 * bin_w + (sx as f32 + 0.5) * (bin_w / sampling_ratio as f32) - 0.5;
                            let y = fy1 + by as f32 * bin_h + (sy as f32 + 0.5) * (bin_h / sampling_ratio as f32) - 0.5;
                            acc += sample(x, y, c);
                        }
                    }
                    out.push(acc / (sampling_ratio * sampling_ratio) as f32);
                }
            }
        }
        out
    }

    #[test]
    fn constant_map_pools_to_constant() {
        let fm = FeatureMap::new(5, 4, 3, 2.0, vec![5.0; 5 * 4 * 3]).unwrap();
        let b = BBox::new(1.0, 1.0, 9.0, 7.0).unwrap();
        let roi = roi_align(&fm, &b, 3, 2).unwrap();
        assert!(roi.data().iter().all(|v| (v - 5.0).abs() < 1e-6));
    }

    #[test]
    fn hand_case_2x2_center_sample() {
        let fm = FeatureMap::new(2, 2, 1, 1.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = BBox::new(0.0, 0.0, 2.0, 2.0).unwrap();
        let roi = roi_align(&fm, &b, 1, 1).unwrap();
        assert!((roi.data()[0] - 2.5).abs() < 1e-6, "got {}", roi.data()[0]);
    }

    #[test]
    fn degenerate_box_is_an_error() {
        let fm = FeatureMap::new(4, 4, 1, 4.0, vec![1.0; 16]).unwrap();
        // Entirely outside the 16x16 image extent.
        let outside = BBox::new(20.0, 20.0, 24.0, 24.0).unwrap();
        assert!(matches!(roi_align(&fm, &outside, 2, 1), Err(Error::DegenerateBox(_))));
        // Sliver that clamps to zero width.
        let sliver = BBox::new(-8.0, 0.0, 0.0000001, 8.0).unwrap();
        assert!(matches!(roi_align(&fm, &sliver, 2, 1), Err(Error::DegenerateBox(_))));
    }

    fn random_case(rng: &mut crate::rng::Rng) -> (FeatureMap, BBox) {
        let w = rng.gen_range(2..12);
        let h = rng.gen_range(2..12);
        let c = rng.gen_range(1..4);
        let stride = [1.0f32, 2.0, 4.0, 8.0][rng.gen_range(0..4)];
        let data: Vec<f32> = (0..w * h * c).map(|_| rng.gen_range(-4.0f32..4.0)).collect();
        let fm = FeatureMap::new(w, h, c, stride, data).unwrap();
        let iw = w as f32 * stride;
        let ih = h as f32 * stride;
        let x1 = rng.gen_range(-0.2 * iw..0.8 * iw);
        let y1 = rng.gen_range(-0.2 * ih..0.8 * ih);
        let bw = rng.gen_range(0.1 * iw..0.9 * iw);
        let bh = rng.gen_range(0.1 * ih..0.9 * ih);
        (fm, BBox::new(x1, y1, x1 + bw, y1 + bh).unwrap())
    }

    #[test]
    fn matches_enumeration_oracle_on_randomized_inputs() {
        let mut rng = crate::rng::stream(2024, "roi-oracle", 0);
        for _ in 0..200 {
            let (fm, b) = random_case(&mut rng);
            let out_size = rng.gen_range(1..6);
            let sr = rng.gen_range(1..5);
            let got = match roi_align(&fm, &b, out_size, sr) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let want = roi_align_oracle(&fm, &b, out_size, sr);
            for (g, w) in got.data().iter().zip(&want) {
                assert!((g - w).abs() < 1e-6, "got {g}, want {w}");
            }
        }
    }

    #[test]
    fn pool_object_embedding_hand_case() {
        // Constant per channel (3, 4) -> maxes (3, 4) -> normalized (0.6, 0.8).
        let mut data = vec![0.0; 2 * 2 * 2];
        for cell in 0..4 {
            data[cell * 2] = 3.0;
            data[cell * 2 + 1] = 4.0;
        }
        let roi = RoiGrid::new(2, 2, data).unwrap();
        let d = pool_object_embedding(&roi).unwrap();
        assert!((d.values()[0] - 0.6).abs() < 1e-6);
        assert!((d.values()[1] - 0.8).abs() < 1e-6);
    }

    #[test]
    fn pool_object_embedding_zero_roi_errors() {
        let roi = RoiGrid::new(3, 2, vec![0.0; 18]).unwrap();
        assert_eq!(pool_object_embedding(&roi), Err(Error::ZeroNormDescriptor));
    }

    #[test]
    fn pool_object_embedding_is_permutation_invariant() {
        let mut rng = crate::rng::stream(7, "perm", 0);
        let data: Vec<f32> = (0..4 * 4 * 3).map(|_| rng.gen_range(0.0f32..2.0)).collect();
        let roi = RoiGrid::new(4, 3, data.clone()).unwrap();
        let d1 = pool_object_embedding(&roi).unwrap();
        // Reverse the spatial cells, keep channel tuples together.
        let mut permuted = Vec::with_capacity(data.len());
        for cell in (0..16).rev() {
            permuted.extend_from_slice(&data[cell * 3..cell * 3 + 3]);
        }
        let d2 = pool_object_embedding(&RoiGrid::new(4, 3, permuted).unwrap()).unwrap();
        assert_eq!(d1.values(), d2.values());
    }

    proptest! {
        // roi_align is linear in the feature map.
        #[test]
        fn linearity_in_the_map(seed in 0u64..500) {
            let mut rng = crate::rng::stream(seed, "roi-linear", 1);
            let (fm_x, b) = random_case(&mut rng);
            let data_y: Vec<f32> = (0..fm_x.data().len()).map(|_| rng.gen_range(-2.0f32..2.0)).collect();
            let fm_y = FeatureMap::new(fm_x.width(), fm_x.height(), fm_x.channels(), fm_x.stride(), data_y).unwrap();
            let (a, bb) = (0.7f32, -1.3f32);
            let mixed: Vec<f32> = fm_x.data().iter().zip(fm_y.data()).map(|(x, y)| a * x + bb * y).collect();
            let fm_m = FeatureMap::new(fm_x.width(), fm_x.height(), fm_x.channels(), fm_x.stride(), mixed).unwrap();
            if let (Ok(rx), Ok(ry), Ok(rm)) = (
                roi_align(&fm_x, &b, 3, 2),
                roi_align(&fm_y, &b, 3, 2),
                roi_align(&fm_m, &b, 3, 2),
            ) {
                let want: Vec<f32> = rx.data().iter().zip(ry.data()).map(|(x, y)| a * x + bb * y).collect();
                let err = squared_l2(rm.data(), &want);
                prop_assert!(err.sqrt() < 1e-5 * want.len() as f32);
            }
        }
    }
}
