//! Small dense symmetric eigendecomposition (cyclic Jacobi).
//!
//! Only used on `r × r` Gram matrices, where `r` is the decomposition rank,
//! so the cubic cost per sweep is irrelevant next to the FFT work.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::Mat;
use crate::{Error, Result};

/// `m = V diag(values) Vᵀ`; eigenvectors are the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix. Eigenvalues come back in
/// descending order.
pub fn sym_eigen(m: &Mat) -> Result<SymEigen> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::arg(format!("sym_eigen needs a square matrix, got {:?}", m.shape())));
    }
    if !m.is_finite() {
        return Err(Error::numeric("non-finite entry in symmetric eigen input"));
    }
    let mut a = m.clone();
    // symmetrize against round-off in the caller's Gram accumulation
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let mut v = Mat::identity(n);
    let scale = a.fro_norm();
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off <= (f64::EPSILON * scale) * (f64::EPSILON * scale) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// Eigendecomposition of a Gram matrix with eigenvalues clamped at zero.
pub fn gram_eigen(m: &Mat) -> Result<SymEigen> {
    let mut e = sym_eigen(m)?;
    for v in &mut e.values {
        *v = v.max(0.0);
    }
    Ok(e)
}
