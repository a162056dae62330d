//! Global descriptors: MAC, SPoC, GeM, and R-MAC pooling over a feature map.

use alloc::vec::Vec;
use num_traits::Float;

use super::{Descriptor, FeatureMap};
use crate::{Error, Result};

/// GeM clamp floor; responses below this are lifted before the p-th power so
/// negative or zero activations never hit a fractional exponent.
const GEM_CLAMP: f32 = 1e-6;

/// Default number of R-MAC grid levels.
pub const RMAC_DEFAULT_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoolMethod {
    /// Channelwise max.
    Mac,
    /// Channelwise mean.
    Spoc,
    /// Generalized mean: `(mean of clamped x^p)^(1/p)`, `p >= 1`.
    Gem { p: f32 },
    /// Sum of L2-normalized regional MAC descriptors over a multi-level grid.
    Rmac { levels: usize },
}

fn mac_region(fm: &FeatureMap, x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<f32> {
    let c = fm.channels();
    let mut maxes = alloc::vec![f32::NEG_INFINITY; c];
    for y in y0..y1 {
        for x in x0..x1 {
            let cell = fm.cell(y, x);
            for (m, v) in maxes.iter_mut().zip(cell) {
                if *v > *m {
                    *m = *v;
                }
            }
        }
    }
    maxes
}

/// Square-region grid for one R-MAC level: side `2*min(W,H)/(l+1)`, windows
/// spread so consecutive ones overlap by at least 40%.
fn rmac_regions(width: usize, height: usize, level: usize) -> Vec<(usize, usize, usize, usize)> {
    let side = 2.0 * width.min(height) as f32 / (level as f32 + 1.0);
    let side = side.max(1.0);
    let positions = |extent: usize| -> Vec<f32> {
        let extent = extent as f32;
        if extent <= side {
            return alloc::vec![0.0];
        }
        let span = extent - side;
        let n = 1 + (span / (0.6 * side)).ceil() as usize;
        (0..n).map(|i| span * i as f32 / (n - 1) as f32).collect()
    };
    let mut regions = Vec::new();
    for y in positions(height) {
        for x in positions(width) {
            let x0 = x.floor() as usize;
            let y0 = y.floor() as usize;
            let x1 = ((x + side).ceil() as usize).min(width).max(x0 + 1);
            let y1 = ((y + side).ceil() as usize).min(height).max(y0 + 1);
            regions.push((x0, x1, y0, y1));
        }
    }
    regions
}

/// Pool a whole feature map into one L2-normalized descriptor of `channels` dims.
pub fn pool_global(fm: &FeatureMap, method: PoolMethod) -> Result<Descriptor> {
    let c = fm.channels();
    let cells = (fm.width() * fm.height()) as f64;
    let raw: Vec<f32> = match method {
        PoolMethod::Mac => mac_region(fm, 0, fm.width(), 0, fm.height()),
        PoolMethod::Spoc => {
            let mut sums = alloc::vec![0.0f64; c];
            for y in 0..fm.height() {
                for x in 0..fm.width() {
                    for (s, v) in sums.iter_mut().zip(fm.cell(y, x)) {
                        *s += f64::from(*v);
                    }
                }
            }
            sums.iter().map(|s| (s / cells) as f32).collect()
        }
        PoolMethod::Gem { p } => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidArgument("gem exponent p must be >= 1"));
            }
            let pd = f64::from(p);
            let mut sums = alloc::vec![0.0f64; c];
            for y in 0..fm.height() {
                for x in 0..fm.width() {
                    for (s, v) in sums.iter_mut().zip(fm.cell(y, x)) {
                        *s += f64::from(v.max(GEM_CLAMP)).powf(pd);
                    }
                }
            }
            sums.iter().map(|s| (s / cells).powf(1.0 / pd) as f32).collect()
        }
        PoolMethod::Rmac { levels } => {
            if levels == 0 {
                return Err(Error::InvalidArgument("rmac levels must be >= 1"));
            }
            let mut acc = alloc::vec![0.0f32; c];
            for level in 1..=levels {
                for (x0, x1, y0, y1) in rmac_regions(fm.width(), fm.height(), level) {
                    let region = mac_region(fm, x0, x1, y0, y1);
                    // Zero regions carry no direction; they contribute nothing.
                    match Descriptor::raw(region).and_then(Descriptor::into_normalized) {
                        Ok(d) => {
                            for (a, v) in acc.iter_mut().zip(d.values()) {
                                *a += v;
                            }
                        }
                        Err(Error::ZeroNormDescriptor) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            acc
        }
    };
    Descriptor::raw(raw)?.into_normalized()
}

/// Un-normalized pooled values; test seam for the hand-computable examples.
pub(crate) fn pool_raw(fm: &FeatureMap, method: PoolMethod) -> Result<Vec<f32>> {
    match method {
        PoolMethod::Mac => Ok(mac_region(fm, 0, fm.width(), 0, fm.height())),
        PoolMethod::Spoc | PoolMethod::Gem { .. } | PoolMethod::Rmac { .. } => {
            // Reuse pool_global's arithmetic pre-normalization by recomputing here.
            let c = fm.channels();
            let cells = (fm.width() * fm.height()) as f64;
            match method {
                PoolMethod::Spoc => {
                    let mut sums = alloc::vec![0.0f64; c];
                    for y in 0..fm.height() {
                        for x in 0..fm.width() {
                            for (s, v) in sums.iter_mut().zip(fm.cell(y, x)) {
                                *s += f64::from(*v);
                            }
                        }
                    }
                    Ok(sums.iter().map(|s| (s / cells) as f32).collect())
                }
                PoolMethod::Gem { p } => {
                    if !(p >= 1.0) || !p.is_finite() {
                        return Err(Error::InvalidArgument("gem exponent p must be >= 1"));
                    }
                    let pd = f64::from(p);
                    let mut sums = alloc::vec![0.0f64; c];
                    for y in 0..fm.height() {
                        for x in 0..fm.width() {
                            for (s, v) in sums.iter_mut().zip(fm.cell(y, x)) {
                                *s += f64::from(v.max(GEM_CLAMP)).powf(pd);
                            }
                        }
                    }
                    Ok(sums.iter().map(|s| (s / cells).powf(1.0 / pd) as f32).collect())
                }
                _ => unreachable!(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng as _;

    fn map_1ch(values: &[f32], w: usize, h: usize) -> FeatureMap {
        FeatureMap::new(w, h, 1, 1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn gem_p1_equals_spoc_on_positive_maps() {
        let mut rng = crate::rng::stream(11, "gem1", 0);
        for _ in 0..50 {
            let w = rng.gen_range(1..6);
            let h = rng.gen_range(1..6);
            let c = rng.gen_range(1..4);
            let data: Vec<f32> = (0..w * h * c).map(|_| rng.gen_range(0.01f32..3.0)).collect();
            let fm = FeatureMap::new(w, h, c, 1.0, data).unwrap();
            let g = pool_raw(&fm, PoolMethod::Gem { p: 1.0 }).unwrap();
            let s = pool_raw(&fm, PoolMethod::Spoc).unwrap();
            for (a, b) in g.iter().zip(&s) {
                assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gem_p2_hand_case() {
        // values {1, 3}: mean of squares = 5, sqrt(5) = 2.2360679...
        let fm = map_1ch(&[1.0, 3.0], 2, 1);
        let g = pool_raw(&fm, PoolMethod::Gem { p: 2.0 }).unwrap();
        assert!((g[0] - 5.0f32.sqrt()).abs() < 1e-5, "got {}", g[0]);
    }

    #[test]
    fn gem_high_p_approaches_mac() {
        // Small 2x2 maps keep the (1/N)^(1/p) gap under 2%.
        let mut rng = crate::rng::stream(13, "gem100", 0);
        for _ in 0..50 {
            let data: Vec<f32> = (0..4).map(|_| rng.gen_range(0.5f32..1.0)).collect();
            let fm = map_1ch(&data, 2, 2);
            let g = pool_raw(&fm, PoolMethod::Gem { p: 100.0 }).unwrap()[0];
            let m = pool_raw(&fm, PoolMethod::Mac).unwrap()[0];
            assert!((g - m).abs() / m < 0.02, "gem {g} vs mac {m}");
        }
    }

    #[test]
    fn all_zero_map_is_zero_norm_error() {
        let fm = map_1ch(&[0.0; 9], 3, 3);
        for method in [
            PoolMethod::Mac,
            PoolMethod::Spoc,
            PoolMethod::Rmac { levels: RMAC_DEFAULT_LEVELS },
        ] {
            assert_eq!(pool_global(&fm, method), Err(Error::ZeroNormDescriptor), "{method:?}");
        }
    }

    #[test]
    fn gem_rejects_bad_p() {
        let fm = map_1ch(&[1.0], 1, 1);
        assert!(pool_global(&fm, PoolMethod::Gem { p: 0.5 }).is_err());
        assert!(pool_global(&fm, PoolMethod::Gem { p: f32::NAN }).is_err());
    }

    #[test]
    fn rmac_covers_the_map_and_normalizes() {
        let mut rng = crate::rng::stream(17, "rmac", 0);
        let data: Vec<f32> = (0..8 * 6 * 4).map(|_| rng.gen_range(0.0f32..1.0)).collect();
        let fm = FeatureMap::new(8, 6, 4, 1.0, data).unwrap();
        let d = pool_global(&fm, PoolMethod::Rmac { levels: 3 }).unwrap();
        assert_eq!(d.dim(), 4);
        let norm: f32 = d.values().iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rmac_regions_overlap_and_stay_in_bounds() {
        for (w, h) in [(8usize, 8usize), (13, 7), (32, 32), (5, 9)] {
            for level in 1..=3 {
                let regions = rmac_regions(w, h, level);
                assert!(!regions.is_empty());
                for (x0, x1, y0, y1) in regions {
                    assert!(x0 < x1 && x1 <= w, "{w}x{h} l{level}: x {x0}..{x1}");
                    assert!(y0 < y1 && y1 <= h, "{w}x{h} l{level}: y {y0}..{y1}");
                }
            }
        }
    }
}
