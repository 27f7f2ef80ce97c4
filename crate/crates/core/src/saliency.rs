//! Structure-tensor saliency: smoothed structure tensor, the adaptive
//! saliency coherence exponent (ASCE) map and the enhancement factor that
//! protects target energy during shrinkage.
//!
//! Frames are `rows × cols` matrices; `x` runs along columns and `y` along
//! rows, so `ix` is the column derivative.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::{Cube, Mat};
use crate::{Error, Result};

/// Parameters of the coherence map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsceParams {
    /// Gaussian integration scale of the structure tensor.
    pub sigma: f64,
    /// Weights of the corner, coherence and edge terms.
    pub alpha: [f64; 3],
    /// Smoothing constant in the coherence and edge denominators.
    pub delta: f64,
}

impl Default for AsceParams {
    fn default() -> Self {
        AsceParams {
            sigma: 1.5,
            alpha: [1.0, 1.0, 1.0],
            delta: 1e-3,
        }
    }
}

impl AsceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::arg(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.alpha.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::arg(format!("alpha must be >= 0, got {:?}", self.alpha)));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::arg(format!("delta must be > 0, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Per-pixel entries of the smoothed structure tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureField {
    pub jxx: Mat,
    pub jxy: Mat,
    pub jyy: Mat,
    pub sigma: f64,
}

/// Image gradient: central differences inside, one-sided at the borders.
pub fn gradient(frame: &Mat) -> Result<(Mat, Mat)> {
    let (rows, cols) = frame.shape();
    if rows < 2 || cols < 2 {
        return Err(Error::arg(format!(
            "gradient needs a frame of at least 2x2, got {rows}x{cols}"
        )));
    }
    let ix = Mat::from_fn(rows, cols, |r, c| {
        if c == 0 {
            frame[(r, 1)] - frame[(r, 0)]
        } else if c == cols - 1 {
            frame[(r, c)] - frame[(r, c - 1)]
        } else {
            0.5 * (frame[(r, c + 1)] - frame[(r, c - 1)])
        }
    });
    let iy = Mat::from_fn(rows, cols, |r, c| {
        if r == 0 {
            frame[(1, c)] - frame[(0, c)]
        } else if r == rows - 1 {
            frame[(r, c)] - frame[(r - 1, c)]
        } else {
            0.5 * (frame[(r + 1, c)] - frame[(r - 1, c)])
        }
    });
    Ok((ix, iy))
}

/// Normalized Gaussian taps over `[-⌈3σ⌉, ⌈3σ⌉]`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = math::ceil(3.0 * sigma) as usize;
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            math::exp(-x * x / (2.0 * sigma * sigma))
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable convolution with replicate boundary.
pub fn gaussian_blur(img: &Mat, sigma: f64) -> Mat {
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as isize;
    let (rows, cols) = img.shape();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = Mat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (t, w) in taps.iter().enumerate() {
                let cc = clamp(c as isize + t as isize - radius, cols);
                acc += w * img[(r, cc)];
            }
            tmp[(r, c)] = acc;
        }
    }
    let mut out = Mat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (t, w) in taps.iter().enumerate() {
                let rr = clamp(r as isize + t as isize - radius, rows);
                acc += w * tmp[(rr, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

pub fn structure_tensor(frame: &Mat, sigma: f64) -> Result<StructureField> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("sigma must be > 0, got {sigma}")));
    }
    let (ix, iy) = gradient(frame)?;
    let (rows, cols) = frame.shape();
    let prod = |f: fn(f64, f64) -> f64| {
        Mat::from_fn(rows, cols, |r, c| f(ix[(r, c)], iy[(r, c)]))
    };
    Ok(StructureField {
        jxx: gaussian_blur(&prod(|x, _| x * x), sigma),
        jxy: gaussian_blur(&prod(|x, y| x * y), sigma),
        jyy: gaussian_blur(&prod(|_, y| y * y), sigma),
        sigma,
    })
}

/// Closed-form eigenvalues `(e₊, e₋)` of a symmetric 2×2 matrix, clamped
/// at zero. Fails if the matrix is indefinite beyond round-off.
pub fn eigen_pair(jxx: f64, jxy: f64, jyy: f64) -> Result<(f64, f64)> {
    let scale = jxx.abs() + jyy.abs() + jxy.abs();
    let tol = 1e-9 * scale;
    let half_tr = 0.5 * (jxx + jyy);
    let half_diff = 0.5 * (jxx - jyy);
    let disc = math::sqrt(half_diff * half_diff + jxy * jxy);
    let e_plus = half_tr + disc;
    let det = jxx * jyy - jxy * jxy;
    // det / e₊ keeps the small eigenvalue accurate
    let e_minus = if e_plus > 0.0 { det / e_plus } else { half_tr - disc };
    if jxx < -tol || jyy < -tol || e_minus < -tol || !e_plus.is_finite() {
        return Err(Error::numeric(format!(
            "structure tensor not PSD: [[{jxx}, {jxy}], [{jxy}, {jyy}]]"
        )));
    }
    Ok((e_plus.max(0.0), e_minus.max(0.0)))
}

pub fn eigen_pairs(field: &StructureField) -> Result<(Mat, Mat)> {
    let (rows, cols) = field.jxx.shape();
    let mut plus = Mat::zeros(rows, cols);
    let mut minus = Mat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let (p, m) = eigen_pair(field.jxx[(r, c)], field.jxy[(r, c)], field.jyy[(r, c)])?;
            plus[(r, c)] = p;
            minus[(r, c)] = m;
        }
    }
    Ok((plus, minus))
}

/// Corner, coherence and edge terms for one eigenvalue pair.
pub fn coherence_terms(e_plus: f64, e_minus: f64, delta: f64) -> [f64; 3] {
    let c1 = math::sqrt((e_plus * e_minus).abs());
    let c2 = ((e_plus + e_minus) / math::sqrt(e_plus - e_minus + delta)).abs();
    let c3 = e_plus * e_minus / (e_plus + e_minus + delta);
    [c1, c2, c3]
}

/// Largest value strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// ASCE map of one frame, in `[0, 1)`.
pub fn asce(frame: &Mat, params: &AsceParams) -> Result<Mat> {
    params.validate()?;
    let field = structure_tensor(frame, params.sigma)?;
    let (plus, minus) = eigen_pairs(&field)?;
    let (rows, cols) = frame.shape();
    Ok(Mat::from_fn(rows, cols, |r, c| {
        let terms = coherence_terms(plus[(r, c)], minus[(r, c)], params.delta);
        let s: f64 = terms.iter().zip(&params.alpha).map(|(t, a)| t * a).sum();
        // 1 - exp(-s) rounds to 1 once s exceeds ~37
        (1.0 - math::exp(-s)).clamp(0.0, BELOW_ONE)
    }))
}

/// Per-frame ASCE maps stacked along mode 3.
pub fn asce_stack(frames: &[Mat], params: &AsceParams) -> Result<Cube> {
    let maps = frames
        .iter()
        .map(|f| asce(f, params))
        .collect::<Result<Vec<_>>>()?;
    Cube::from_frames(&maps)
}

/// Per-frame threshold `mean + 5·variance` of an ASCE map.
pub fn enhancement_threshold(map: &[f64]) -> f64 {
    let (mean, std) = math::mean_std(map);
    mean + 5.0 * std * std
}

/// Enhancement factor: entries at or above their frame's threshold get
/// `1 + value`, the rest keep their value.
pub fn enhancement_factor(asce_stack: &Cube) -> Cube {
    let [_, _, n3] = asce_stack.dims();
    let mut out = asce_stack.clone();
    for k in 0..n3 {
        let t = enhancement_threshold(asce_stack.slice(k));
        for v in out.slice_mut(k) {
            if *v >= t {
                *v += 1.0;
            }
        }
    }
    out
}

/// Enhancement factor straight from frames.
pub fn enhancement_cube(frames: &[Mat], params: &AsceParams) -> Result<Cube> {
    Ok(enhancement_factor(&asce_stack(frames, params)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_frame_gives_zero() {
        let f = Mat::from_fn(16, 16, |_, _| 0.3);
        let (ix, iy) = gradient(&f).unwrap();
        assert!(ix.as_slice().iter().chain(iy.as_slice()).all(|&v| v == 0.0));
        let a = asce(&f, &AsceParams::default()).unwrap();
        assert!(a.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp() {
        let f = Mat::from_fn(12, 12, |_, c| c as f64);
        let (ix, iy) = gradient(&f).unwrap();
        assert!(ix.as_slice().iter().all(|&v| v == 1.0));
        assert!(iy.as_slice().iter().all(|&v| v == 0.0));
        let st = structure_tensor(&f, 1.0).unwrap();
        for r in 0..12 {
            for c in 0..12 {
                assert!((st.jxx[(r, c)] - 1.0).abs() < 1e-12);
                assert_eq!(st.jxy[(r, c)], 0.0);
                assert_eq!(st.jyy[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn eigen_closed_forms() {
        assert_eq!(eigen_pair(0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(eigen_pair(1.0, 0.0, 0.0).unwrap(), (1.0, 0.0));
        let (p, m) = eigen_pair(2.0, 1.0, 2.0).unwrap();
        assert!((p - 3.0).abs() < 1e-15 && (m - 1.0).abs() < 1e-15);
        assert!(eigen_pair(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn argument_errors() {
        assert!(gradient(&Mat::zeros(1, 5)).is_err());
        assert!(structure_tensor(&Mat::zeros(4, 4), 0.0).is_err());
        let bad = AsceParams {
            alpha: [1.0, -1.0, 0.0],
            ..AsceParams::default()
        };
        assert!(asce(&Mat::zeros(4, 4), &bad).is_err());
    }

    #[test]
    fn constant_map_all_pass() {
        let c = Cube::filled([8, 8, 2], 0.2);
        let w = enhancement_factor(&c);
        assert!(w.as_slice().iter().all(|&v| (v - 1.2).abs() < 1e-15));
    }

    #[test]
    fn single_hot_pixel_passes_alone() {
        let mut c = Cube::filled([64, 64, 1], 0.01);
        c[(20, 30, 0)] = 0.9;
        // mean = (0.9 + 4095·0.01)/4096, var = p(1-p)(0.89)² with p = 1/4096
        let p = 1.0 / 4096.0;
        let want = (0.9 + 4095.0 * 0.01) / 4096.0 + 5.0 * p * (1.0 - p) * 0.89 * 0.89;
        assert!((enhancement_threshold(c.slice(0)) - want).abs() < 1e-15);
        let w = enhancement_factor(&c);
        let hot: Vec<_> = w.as_slice().iter().filter(|&&v| v >= 1.0).collect();
        assert_eq!(hot.len(), 1);
        assert!((w[(20, 30, 0)] - 1.9).abs() < 1e-15);
    }
}
