//! Periodic first-order differences and the spectra of their Gram operators.
//!
//! Along an axis of length `n`, `(D x)_i = x_{(i+1) mod n} − x_i` and
//! `(Dᵀ y)_i = y_{(i−1) mod n} − y_i`. `DᵀD` is circulant with stencil
//! `[−1, 2, −1]`, so the DFT diagonalizes it with eigenvalue
//! `2 − 2 cos(2πk/n)` at frequency `k`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;
use crate::tensor::{Cube, Mat, Mode};
use crate::{Error, Result};

/// Eigenvalues of the periodic `DᵀD` indexed by DFT frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffSpectrum {
    values: Vec<f64>,
}

impl DiffSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Spectrum of `DᵀD` for a periodic axis of length `n`.
pub fn diff_gram_spectrum(n: usize) -> Result<DiffSpectrum> {
    if n == 0 {
        return Err(Error::arg("difference spectrum length must be >= 1"));
    }
    let values = (0..n)
        .map(|k| {
            // exact zero at k = 0 and exact symmetry values[k] == values[n-k]
            let kk = k.min(n - k);
            2.0 - 2.0 * math::cos(2.0 * PI * kk as f64 / n as f64)
        })
        .collect();
    Ok(DiffSpectrum { values })
}

/// Matrix-free periodic difference operator along one mode.
pub trait PeriodicDiff: Sized {
    /// Forward difference `D` along `mode`.
    fn diff(&self, mode: Mode) -> Result<Self>;
    /// Adjoint `Dᵀ` along `mode`.
    fn diff_adjoint(&self, mode: Mode) -> Result<Self>;
}

/// Applies `out[i] = x[i + shift] − x[i]` (indices mod `n`) along an axis
/// described by `(outer, n, inner)` strides of a contiguous buffer.
fn shifted_difference(data: &[f64], outer: usize, n: usize, inner: usize, forward: bool) -> Vec<f64> {
    let mut out = alloc::vec![0.0; data.len()];
    for o in 0..outer {
        let base = o * n * inner;
        for i in 0..n {
            let other = if forward { (i + 1) % n } else { (i + n - 1) % n };
            let dst = base + i * inner;
            let src = base + other * inner;
            for t in 0..inner {
                out[dst + t] = data[src + t] - data[dst + t];
            }
        }
    }
    out
}

/// `(outer, n, inner)` for a cube axis under the frame-major layout.
fn cube_strides(dims: [usize; 3], mode: Mode) -> (usize, usize, usize) {
    let [n1, n2, n3] = dims;
    match mode {
        Mode::One => (n3, n1, n2),
        Mode::Two => (n3 * n1, n2, 1),
        Mode::Three => (1, n3, n1 * n2),
    }
}

impl PeriodicDiff for Cube {
    fn diff(&self, mode: Mode) -> Result<Self> {
        let (o, n, i) = cube_strides(self.dims(), mode);
        Ok(Cube::from_vec_unchecked(
            self.dims(),
            shifted_difference(self.as_slice(), o, n, i, true),
        ))
    }

    fn diff_adjoint(&self, mode: Mode) -> Result<Self> {
        let (o, n, i) = cube_strides(self.dims(), mode);
        Ok(Cube::from_vec_unchecked(
            self.dims(),
            shifted_difference(self.as_slice(), o, n, i, false),
        ))
    }
}

/// For matrices, [`Mode::One`] differences along the row index (so
/// `a.diff(Mode::One)` is `D·A`) and [`Mode::Two`] along the column index.
impl PeriodicDiff for Mat {
    fn diff(&self, mode: Mode) -> Result<Self> {
        let (o, n, i) = mat_strides(self, mode)?;
        Ok(Mat::from_vec_unchecked(
            self.rows(),
            self.cols(),
            shifted_difference(self.as_slice(), o, n, i, true),
        ))
    }

    fn diff_adjoint(&self, mode: Mode) -> Result<Self> {
        let (o, n, i) = mat_strides(self, mode)?;
        Ok(Mat::from_vec_unchecked(
            self.rows(),
            self.cols(),
            shifted_difference(self.as_slice(), o, n, i, false),
        ))
    }
}

fn mat_strides(m: &Mat, mode: Mode) -> Result<(usize, usize, usize)> {
    match mode {
        Mode::One => Ok((1, m.rows(), m.cols())),
        Mode::Two => Ok((m.rows(), m.cols(), 1)),
        Mode::Three => Err(Error::arg(format!(
            "matrices have two modes, got {mode:?}"
        ))),
    }
}

/// Dense periodic difference matrix, for tests and oracles.
pub fn dense_diff_matrix(n: usize) -> Mat {
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        d[(i, i)] -= 1.0;
        d[(i, (i + 1) % n)] += 1.0;
    }
    d
}
