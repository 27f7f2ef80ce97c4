//! Complex discrete Fourier transform of arbitrary length.
//!
//! Powers of two use an iterative radix-2 transform; other lengths go
//! through Bluestein's chirp-z reformulation on a padded power-of-two
//! transform. Forward is `X_k = Σ x_n e^{-2πi kn/N}`; the inverse carries
//! the `1/N` factor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math;

#[derive(Clone, Debug)]
struct Radix2 {
    n: usize,
    /// `e^{-2πi k/n}` for `k < n/2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(math::cos(a), math::sin(a))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Radix2 { n, twiddles, bitrev }
    }

    /// Unnormalized transform; `inverse` conjugates the twiddles.
    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Clone, Debug)]
struct Bluestein {
    /// `e^{-πi k²/n}`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, padded and wrapped.
    kernel: Vec<Complex64>,
    inner: Radix2,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                // k² mod 2n keeps the angle small for large n
                let kk = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                let a = -PI * kk / n as f64;
                Complex64::new(math::cos(a), math::sin(a))
            })
            .collect();
        let inner = Radix2::new(m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.run(&mut kernel, false);
        Bluestein {
            chirp,
            kernel,
            inner,
        }
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool, scratch: &mut Vec<Complex64>) {
        let n = buf.len();
        let m = self.inner.n;
        scratch.clear();
        scratch.resize(m, Complex64::new(0.0, 0.0));
        // inverse DFT = conj(forward(conj(x)))
        for k in 0..n {
            let x = if inverse { buf[k].conj() } else { buf[k] };
            scratch[k] = x * self.chirp[k];
        }
        self.inner.run(scratch, false);
        for (s, kf) in scratch.iter_mut().zip(&self.kernel) {
            *s *= kf;
        }
        self.inner.run(scratch, true);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            let y = scratch[k] * scale * self.chirp[k];
            buf[k] = if inverse { y.conj() } else { y };
        }
    }
}

#[derive(Clone, Debug)]
enum Algo {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Precomputed transform for one length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    algo: Algo,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "FFT length must be positive");
        let algo = if n == 1 {
            Algo::Trivial
        } else if n.is_power_of_two() {
            Algo::Radix2(Radix2::new(n))
        } else {
            Algo::Bluestein(Bluestein::new(n))
        };
        FftPlan { n, algo }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform of `buf` (length must equal the plan's).
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.run(buf, false, scratch);
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        self.run(buf, true, scratch);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool, scratch: &mut Vec<Complex64>) {
        assert_eq!(buf.len(), self.n, "buffer length does not match FFT plan");
        match &self.algo {
            Algo::Trivial => {}
            Algo::Radix2(r) => r.run(buf, inverse),
            Algo::Bluestein(b) => b.run(buf, inverse, scratch),
        }
    }
}

/// Separable 2-D transform over a row-major `rows × cols` buffer.
#[derive(Clone, Debug)]
pub struct Fft2 {
    row_plan: FftPlan,
    col_plan: FftPlan,
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        Fft2 {
            row_plan: FftPlan::new(cols),
            col_plan: FftPlan::new(rows),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Fft2Scratch) {
        self.run(buf, false, scratch);
    }

    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut Fft2Scratch) {
        self.run(buf, true, scratch);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool, scratch: &mut Fft2Scratch) {
        let cols = self.row_plan.len();
        let rows = self.col_plan.len();
        assert_eq!(buf.len(), rows * cols);
        for row in buf.chunks_mut(cols) {
            if inverse {
                self.row_plan.inverse(row, &mut scratch.inner);
            } else {
                self.row_plan.forward(row, &mut scratch.inner);
            }
        }
        if rows == 1 {
            return;
        }
        scratch.column.resize(rows, Complex64::new(0.0, 0.0));
        for c in 0..cols {
            for r in 0..rows {
                scratch.column[r] = buf[r * cols + c];
            }
            if inverse {
                self.col_plan.inverse(&mut scratch.column, &mut scratch.inner);
            } else {
                self.col_plan.forward(&mut scratch.column, &mut scratch.inner);
            }
            for r in 0..rows {
                buf[r * cols + c] = scratch.column[r];
            }
        }
    }
}

/// Reusable work buffers for [`Fft2`].
#[derive(Clone, Debug, Default)]
pub struct Fft2Scratch {
    inner: Vec<Complex64>,
    column: Vec<Complex64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    acc += v * Complex64::new(a.cos(), a.sin());
                }
                if inverse {
                    acc / n as f64
                } else {
                    acc
                }
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|t| Complex64::new((t as f64 * 0.37).sin() + 0.1 * t as f64, (t as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        let mut scratch = Vec::new();
        for n in 1..=40 {
            let plan = FftPlan::new(n);
            let x = signal(n);
            let mut y = x.clone();
            plan.forward(&mut y, &mut scratch);
            let want = naive_dft(&x, false);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "n={n}");
            }
            plan.inverse(&mut y, &mut scratch);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-10, "roundtrip n={n}");
            }
        }
    }

    #[test]
    fn two_dimensional_roundtrip() {
        let (rows, cols) = (6, 8);
        let plan = Fft2::new(rows, cols);
        let x = signal(rows * cols);
        let mut y = x.clone();
        let mut s = Fft2Scratch::default();
        plan.forward(&mut y, &mut s);
        // DC term equals the sum
        let sum: Complex64 = x.iter().sum();
        assert!((y[0] - sum).norm() < 1e-9);
        plan.inverse(&mut y, &mut s);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
