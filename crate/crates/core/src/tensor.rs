//! Dense 3-way cubes and 2-way matrices in `f64`.
//!
//! A [`Cube`] of dims `(n1, n2, n3)` is stored frame-major: frontal slice
//! `k` is a contiguous row-major `n1 × n2` block. Indices are zero-based.
//!
//! Unfoldings follow the cyclic convention: the mode-`n` unfolding has one
//! row per index of mode `n`, and its columns enumerate the remaining two
//! indices in cyclic order after `n`, the first of them varying slowest:
//!
//! | mode | row  | column          |
//! |------|------|-----------------|
//! | 1    | `i`  | `j * n3 + k`    |
//! | 2    | `j`  | `k * n1 + i`    |
//! | 3    | `k`  | `i * n2 + j`    |
//!
//! With this convention `unfold(x ×ₙ U, n) = U · unfold(x, n)` and the
//! mode-3 unfolding rows are the frames vectorized row-major.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math;
use crate::{Error, Result};

/// Tensor mode (axis), one-based as in the usual mode-n notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    /// Zero-based axis.
    pub fn axis(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(Error::arg(format!("mode must be 1, 2 or 3, got {n}"))),
        }
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Rejects length mismatch and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite matrix entry at {bad}")));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::arg(format!(
                "matmul shape mismatch: {}x{} · {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Mat {
        let n = self.cols;
        let mut g = Mat::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for a in 0..n {
                let ra = row[a];
                for b in a..n {
                    g.data[a * n + b] += ra * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g.data[a * n + b] = g.data[b * n + a];
            }
        }
        g
    }

    pub fn fro_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        Mat::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Norm selector for [`Cube::norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Fro,
    L1,
}

/// Dense 3-way array, frame-major (see module docs).
#[derive(Clone, Debug, PartialEq)]
pub struct Cube {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Cube {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Cube {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn filled(dims: [usize; 3], value: f64) -> Self {
        Cube {
            dims,
            data: vec![value; dims[0] * dims[1] * dims[2]],
        }
    }

    /// Builds a cube from frame-major data. Every dim must be at least one
    /// and every entry finite.
    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::arg(format!("cube dims must be >= 1, got {dims:?}")));
        }
        if data.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::arg(format!(
                "cube data length {} does not match dims {dims:?}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("non-finite cube entry at {bad}")));
        }
        Ok(Cube { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    data.push(f(i, j, k));
                }
            }
        }
        Cube { dims, data }
    }

    pub(crate) fn from_vec_unchecked(dims: [usize; 3], data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims[0] * dims[1] * dims[2]);
        Cube { dims, data }
    }

    /// Stacks equally sized frames along mode 3.
    pub fn from_frames(frames: &[Mat]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::arg("cannot stack an empty frame list"))?;
        let (n1, n2) = first.shape();
        let mut data = Vec::with_capacity(n1 * n2 * frames.len());
        for (k, f) in frames.iter().enumerate() {
            if f.shape() != (n1, n2) {
                return Err(Error::arg(format!(
                    "frame {k} has shape {:?}, expected {:?}",
                    f.shape(),
                    (n1, n2)
                )));
            }
            data.extend_from_slice(f.as_slice());
        }
        Cube::from_vec([n1, n2, frames.len()], data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && k < self.dims[2]);
        (k * self.dims[0] + i) * self.dims[1] + j
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.dims[0] * self.dims[1];
        &self.data[k * n..(k + 1) * n]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.dims[0] * self.dims[1];
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Frontal slice `k` as an `n1 × n2` matrix.
    pub fn frame(&self, k: usize) -> Mat {
        Mat::from_vec_unchecked(self.dims[0], self.dims[1], self.slice(k).to_vec())
    }

    pub fn frames(&self) -> Vec<Mat> {
        (0..self.dims[2]).map(|k| self.frame(k)).collect()
    }

    /// Mode-3 fiber `(i, j, :)`.
    pub fn fiber(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dims[2]).map(|k| self[(i, j, k)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Cube {
        Cube::from_vec_unchecked(self.dims, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise combination of two same-dims cubes.
    pub fn zip_map(&self, other: &Cube, f: impl Fn(f64, f64) -> f64) -> Result<Cube> {
        self.check_same_dims(other)?;
        Ok(Cube::from_vec_unchecked(
            self.dims,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Cube) -> Result<Cube> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Cube) -> Result<Cube> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Cube {
        self.map(|v| v * s)
    }

    pub(crate) fn check_same_dims(&self, other: &Cube) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::arg(format!(
                "cube dims mismatch: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Fro => math::sqrt(self.data.iter().map(|v| v * v).sum()),
            NormKind::L1 => self.data.iter().map(|v| v.abs()).sum(),
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.norm(NormKind::Fro)
    }

    pub fn inner(&self, other: &Cube) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Mode-`n` unfolding (column order in the module docs).
    pub fn unfold(&self, mode: Mode) -> Mat {
        let [n1, n2, n3] = self.dims;
        match mode {
            Mode::One => Mat::from_fn(n1, n2 * n3, |i, c| self[(i, c / n3, c % n3)]),
            Mode::Two => Mat::from_fn(n2, n3 * n1, |j, c| self[(c % n1, j, c / n1)]),
            Mode::Three => Mat::from_vec_unchecked(n3, n1 * n2, self.data.clone()),
        }
    }

    /// Inverse of [`Cube::unfold`].
    pub fn fold(m: &Mat, mode: Mode, dims: [usize; 3]) -> Result<Cube> {
        let [n1, n2, n3] = dims;
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::arg(format!("cube dims must be >= 1, got {dims:?}")));
        }
        let expected = match mode {
            Mode::One => (n1, n2 * n3),
            Mode::Two => (n2, n3 * n1),
            Mode::Three => (n3, n1 * n2),
        };
        if m.shape() != expected {
            return Err(Error::arg(format!(
                "cannot fold {:?} matrix along {mode:?} into {dims:?}, expected {expected:?}",
                m.shape()
            )));
        }
        Ok(match mode {
            Mode::One => Cube::from_fn(dims, |i, j, k| m[(i, j * n3 + k)]),
            Mode::Two => Cube::from_fn(dims, |i, j, k| m[(j, k * n1 + i)]),
            Mode::Three => Cube::from_vec_unchecked(dims, m.as_slice().to_vec()),
        })
    }

    /// Mode-`n` product `self ×ₙ u`: contracts `u`'s columns against axis `n`.
    pub fn mode_product(&self, u: &Mat, mode: Mode) -> Result<Cube> {
        let [n1, n2, n3] = self.dims;
        let axis = mode.axis();
        if u.cols() != self.dims[axis] {
            return Err(Error::arg(format!(
                "mode-{} product needs {} columns, matrix has {}",
                axis + 1,
                self.dims[axis],
                u.cols()
            )));
        }
        let p = u.rows();
        let mut out_dims = self.dims;
        out_dims[axis] = p;
        if p == 0 {
            return Err(Error::arg("mode product with an empty matrix"));
        }
        let mut out = Cube::zeros(out_dims);
        match mode {
            Mode::Three => {
                let plane = n1 * n2;
                for q in 0..p {
                    let dst = &mut out.data[q * plane..(q + 1) * plane];
                    for k in 0..n3 {
                        let w = u[(q, k)];
                        if w == 0.0 {
                            continue;
                        }
                        let src = &self.data[k * plane..(k + 1) * plane];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
            Mode::One => {
                for k in 0..n3 {
                    for q in 0..p {
                        let dst_off = (k * p + q) * n2;
                        for i in 0..n1 {
                            let w = u[(q, i)];
                            if w == 0.0 {
                                continue;
                            }
                            let src_off = (k * n1 + i) * n2;
                            for j in 0..n2 {
                                out.data[dst_off + j] += w * self.data[src_off + j];
                            }
                        }
                    }
                }
            }
            Mode::Two => {
                for k in 0..n3 {
                    for i in 0..n1 {
                        let src = &self.data[(k * n1 + i) * n2..(k * n1 + i + 1) * n2];
                        let dst_off = (k * n1 + i) * p;
                        for q in 0..p {
                            let s: f64 = u.row(q).iter().zip(src).map(|(a, b)| a * b).sum();
                            out.data[dst_off + q] = s;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize, usize)> for Cube {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[self.offset(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Cube {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        let o = self.offset(i, j, k);
        &mut self.data[o]
    }
}
