//! PCA whitening: fit on a descriptor sample, project and re-normalize.

use alloc::vec::Vec;
use num_traits::Float;

use super::{l2_norm, Descriptor};
use crate::{Error, Result};

/// Default variance floor added to eigenvalues before the inverse square root.
pub const WHITEN_DEFAULT_EPS: f32 = 1e-6;

/// Centering + decorrelating projection learned from a descriptor sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    mean: Vec<f32>,
    /// Row-major `dim_out x dim_in`; row k is the k-th principal axis scaled
    /// by `1/sqrt(lambda_k + eps)`.
    projection: Vec<f32>,
    dim_in: usize,
    dim_out: usize,
}

impl WhiteningTransform {
    pub fn new(mean: Vec<f32>, projection: Vec<f32>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_out == 0 || dim_out > dim_in {
            return Err(Error::InvalidArgument("dim_out must satisfy 1 <= dim_out <= dim_in"));
        }
        if mean.len() != dim_in {
            return Err(Error::DimMismatch { expected: dim_in, got: mean.len() });
        }
        if projection.len() != dim_in * dim_out {
            return Err(Error::DimMismatch { expected: dim_in * dim_out, got: projection.len() });
        }
        if mean.iter().chain(projection.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("whitening transform"));
        }
        Ok(Self { mean, projection, dim_in, dim_out })
    }

    #[inline]
    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    #[inline]
    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    #[inline]
    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    #[inline]
    pub fn projection(&self) -> &[f32] {
        &self.projection
    }

    /// Linear part: `projection * (x - mean)`, without re-normalization.
    pub fn project(&self, values: &[f32]) -> Result<Vec<f32>> {
        if values.len() != self.dim_in {
            return Err(Error::DimMismatch { expected: self.dim_in, got: values.len() });
        }
        let mut out = alloc::vec![0.0f32; self.dim_out];
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.projection[k * self.dim_in..(k + 1) * self.dim_in];
            let mut acc = 0.0f64;
            for ((v, m), r) in values.iter().zip(&self.mean).zip(row) {
                acc += f64::from(v - m) * f64::from(*r);
            }
            *o = acc as f32;
        }
        Ok(out)
    }
}

/// Jacobi eigendecomposition of a symmetric matrix (row-major `n x n`).
/// Returns `(eigenvalues, eigenvectors)` with eigenvector k in column k,
/// sorted by descending eigenvalue.
fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[idx(r, c)] * a[idx(r, c)];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[idx(j, j)].partial_cmp(&a[idx(i, i)]).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = alloc::vec![0.0f64; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        vals.push(a[idx(old_col, old_col)]);
        for r in 0..n {
            vecs[idx(r, new_col)] = v[idx(r, old_col)];
        }
    }
    (vals, vecs)
}

/// Learn a PCA whitening transform from descriptor samples.
///
/// Rows of the projection are the top-`dim_out` eigenvectors of the sample
/// covariance scaled by `1/sqrt(lambda_k + eps)`; the eigenvector sign is
/// fixed by making its largest-magnitude coordinate positive.
pub fn fit_whitening(samples: &[Descriptor], dim_out: usize, eps: f32) -> Result<WhiteningTransform> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("whitening needs at least 2 samples"));
    }
    let dim_in = samples[0].dim();
    for s in samples {
        if s.dim() != dim_in {
            return Err(Error::DimMismatch { expected: dim_in, got: s.dim() });
        }
    }
    if dim_out == 0 || dim_out > dim_in {
        return Err(Error::InvalidArgument("dim_out must satisfy 1 <= dim_out <= dim_in"));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidArgument("eps must be a finite non-negative value"));
    }

    let n = samples.len() as f64;
    let mut mean = alloc::vec![0.0f64; dim_in];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += f64::from(*v);
        }
    }
    for m in &mut mean {
        *m /= n;
    }

    let mut cov = alloc::vec![0.0f64; dim_in * dim_in];
    let mut centered = alloc::vec![0.0f64; dim_in];
    for s in samples {
        for (c, (v, m)) in centered.iter_mut().zip(s.values().iter().zip(&mean)) {
            *c = f64::from(*v) - m;
        }
        for r in 0..dim_in {
            let cr = centered[r];
            for c in r..dim_in {
                cov[r * dim_in + c] += cr * centered[c];
            }
        }
    }
    for r in 0..dim_in {
        for c in r..dim_in {
            let val = cov[r * dim_in + c] / n;
            cov[r * dim_in + c] = val;
            cov[c * dim_in + r] = val;
        }
    }

    let (vals, vecs) = symmetric_eigen(cov, dim_in);
    let mut projection = alloc::vec![0.0f32; dim_out * dim_in];
    for k in 0..dim_out {
        let lambda = vals[k].max(0.0);
        let scale = 1.0 / (lambda + f64::from(eps)).sqrt();
        // Sign convention: largest-|component| coordinate positive.
        let mut pivot = 0;
        let mut best = 0.0f64;
        for r in 0..dim_in {
            let m = vecs[r * dim_in + k].abs();
            if m > best {
                best = m;
                pivot = r;
            }
        }
        let flip = if vecs[pivot * dim_in + k] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..dim_in {
            projection[k * dim_in + r] = (vecs[r * dim_in + k] * flip * scale) as f32;
        }
    }
    let mean32: Vec<f32> = mean.iter().map(|m| *m as f32).collect();
    WhiteningTransform::new(mean32, projection, dim_in, dim_out)
}

/// Project a descriptor through a fitted transform and L2-normalize.
pub fn apply_whitening(t: &WhiteningTransform, d: &Descriptor) -> Result<Descriptor> {
    let projected = t.project(d.values())?;
    if l2_norm(&projected) < 1e-12 {
        return Err(Error::ZeroNormDescriptor);
    }
    Descriptor::raw(projected)?.into_normalized()
}
