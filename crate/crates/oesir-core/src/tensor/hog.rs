//! Histogram-of-oriented-gradients descriptor over a grayscale patch.

use num_traits::Float;

use super::Descriptor;
use crate::{Error, Result};

/// HoG over a `width x height` grayscale patch (row-major f32).
///
/// The patch is split into `cells x cells` cells. Gradients come from central
/// differences on interior pixels; each pixel votes its magnitude into the
/// unsigned-orientation histogram of its cell with linear interpolation
/// between the two nearest bin centers (bin centers at `k * pi / bins`,
/// circular modulo pi). Cell histograms are concatenated and L2-normalized.
pub fn hog_descriptor(
    patch: &[f32],
    width: usize,
    height: usize,
    cells: usize,
    bins: usize,
) -> Result<Descriptor> {
    if cells == 0 {
        return Err(Error::InvalidArgument("cells must be >= 1"));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("bins must be >= 2"));
    }
    if width < cells || height < cells {
        return Err(Error::InvalidArgument("patch must be at least cells x cells pixels"));
    }
    if patch.len() != width * height {
        return Err(Error::DimMismatch { expected: width * height, got: patch.len() });
    }
    if patch.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hog patch"));
    }

    let bin_width = core::f32::consts::PI / bins as f32;
    let mut hist = alloc::vec![0.0f32; cells * cells * bins];
    for y in 1..height.saturating_sub(1) {
        for x in 1..width.saturating_sub(1) {
            let gx = 0.5 * (patch[y * width + x + 1] - patch[y * width + x - 1]);
            let gy = 0.5 * (patch[(y + 1) * width + x] - patch[(y - 1) * width + x]);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += core::f32::consts::PI;
            }
            if theta >= core::f32::consts::PI {
                theta -= core::f32::consts::PI;
            }
            let pos = theta / bin_width;
            let lo = pos.floor() as usize % bins;
            let hi = (lo + 1) % bins;
            let frac = pos - pos.floor();
            let cx = x * cells / width;
            let cy = y * cells / height;
            let cell = (cy * cells + cx) * bins;
            hist[cell + lo] += mag * (1.0 - frac);
            hist[cell + hi] += mag * frac;
        }
    }
    Descriptor::raw(hist)
        .and_then(Descriptor::into_normalized)
        .map_err(|e| if e == Error::ZeroNormDescriptor { Error::ZeroNormDescriptor } else { e })
}
