//! Shrinkage operators and reweighting rules.
//!
//! These are the only places where sparsity enters the solver: elementwise
//! soft thresholding (the prox of a weighted ℓ1 norm), fiber-wise group
//! shrinkage along mode 3 (the prox of a weighted ℓ2,1 norm), and the
//! reciprocal-magnitude weights that turn both into reweighted penalties.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::{Cube, Mat};
use crate::{Error, Result};

/// Default smoothing constant for all weights.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Scalar soft threshold `sign(x)·max(|x| − θ, 0)`.
#[inline]
pub fn shrink(x: f64, theta: f64) -> f64 {
    let m = x.abs() - theta;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Threshold argument of [`soft_threshold`].
#[derive(Clone, Copy, Debug)]
pub enum Threshold<'a> {
    Scalar(f64),
    PerEntry(&'a Cube),
}

impl From<f64> for Threshold<'_> {
    fn from(v: f64) -> Self {
        Threshold::Scalar(v)
    }
}

impl<'a> From<&'a Cube> for Threshold<'a> {
    fn from(c: &'a Cube) -> Self {
        Threshold::PerEntry(c)
    }
}

/// Elementwise soft thresholding. Thresholds must be nonnegative.
pub fn soft_threshold<'a>(x: &Cube, theta: impl Into<Threshold<'a>>) -> Result<Cube> {
    match theta.into() {
        Threshold::Scalar(t) => {
            if !(t >= 0.0) {
                return Err(Error::arg(format!("threshold must be >= 0, got {t}")));
            }
            Ok(x.map(|v| shrink(v, t)))
        }
        Threshold::PerEntry(t) => {
            x.check_same_dims(t)?;
            if let Some(bad) = t.as_slice().iter().find(|&&v| !(v >= 0.0)) {
                return Err(Error::arg(format!("threshold must be >= 0, got {bad}")));
            }
            x.zip_map(t, shrink)
        }
    }
}

/// Group shrinkage of every mode-3 fiber `z(i, j, :)` with threshold
/// `xi(i, j)`: the fiber is scaled by `(‖f‖₂ − ξ)/‖f‖₂` when `ξ < ‖f‖₂` and
/// zeroed otherwise.
pub fn group_shrink_fibers(z: &Cube, xi: &Mat) -> Result<Cube> {
    let [n1, n2, n3] = z.dims();
    if xi.shape() != (n1, n2) {
        return Err(Error::arg(format!(
            "group thresholds have shape {:?}, fibers are indexed by {:?}",
            xi.shape(),
            (n1, n2)
        )));
    }
    if let Some(bad) = xi.as_slice().iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::arg(format!("group threshold must be >= 0, got {bad}")));
    }
    let norms = fiber_norms(z);
    let plane = n1 * n2;
    let scales: Vec<f64> = norms
        .iter()
        .zip(xi.as_slice())
        .map(|(&n, &t)| if t < n { (n - t) / n } else { 0.0 })
        .collect();
    let mut out = z.clone();
    for k in 0..n3 {
        for (v, s) in out.as_mut_slice()[k * plane..(k + 1) * plane].iter_mut().zip(&scales) {
            *v *= s;
        }
    }
    Ok(out)
}

/// Euclidean norms of the mode-3 fibers, row-major over `(i, j)`.
pub(crate) fn fiber_norms(z: &Cube) -> Vec<f64> {
    let [n1, n2, n3] = z.dims();
    let plane = n1 * n2;
    let mut acc = alloc::vec![0.0; plane];
    for k in 0..n3 {
        for (a, v) in acc.iter_mut().zip(z.slice(k)) {
            *a += v * v;
        }
    }
    acc.into_iter().map(math::sqrt).collect()
}

/// Which magnitude a weight is the reciprocal of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReweightKind {
    /// `1/(‖z(i,j,:)‖₂ + ε)`, one weight per mode-3 fiber.
    Group,
    /// `1/(|z(i,j,k)| + ε)` for the spatial-factor column differences.
    Elementwise,
    /// `1/(|t(i,j,k)| + ε)` for the target cube.
    Target,
}

/// Weights produced by [`reweight`].
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Group(Mat),
    Elementwise(Cube),
}

impl Weights {
    pub fn into_mat(self) -> Option<Mat> {
        match self {
            Weights::Group(m) => Some(m),
            Weights::Elementwise(_) => None,
        }
    }

    pub fn into_cube(self) -> Option<Cube> {
        match self {
            Weights::Elementwise(c) => Some(c),
            Weights::Group(_) => None,
        }
    }
}

pub fn reweight(z: &Cube, kind: ReweightKind, epsilon: f64) -> Result<Weights> {
    Ok(match kind {
        ReweightKind::Group => Weights::Group(group_weights(z, epsilon)?),
        ReweightKind::Elementwise | ReweightKind::Target => {
            Weights::Elementwise(elementwise_weights(z, epsilon)?)
        }
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(())
}

pub fn group_weights(z: &Cube, epsilon: f64) -> Result<Mat> {
    check_epsilon(epsilon)?;
    let [n1, n2, _] = z.dims();
    let w = fiber_norms(z).into_iter().map(|n| 1.0 / (n + epsilon)).collect();
    Ok(Mat::from_vec_unchecked(n1, n2, w))
}

pub fn elementwise_weights(z: &Cube, epsilon: f64) -> Result<Cube> {
    check_epsilon(epsilon)?;
    Ok(z.map(|v| 1.0 / (v.abs() + epsilon)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn scalar_cases() {
        assert_eq!(shrink(3.0, 1.0), 2.0);
        assert_eq!(shrink(-0.5, 1.0), 0.0);
        assert_eq!(shrink(-3.0, 1.0), -2.0);
        let x = Cube::from_vec([3, 1, 1], vec![3.0, -0.5, 0.25]).unwrap();
        assert_eq!(soft_threshold(&x, 0.0).unwrap(), x);
        assert!(soft_threshold(&x, -1.0).is_err());
        let neg = Cube::filled([3, 1, 1], -0.1);
        assert!(soft_threshold(&x, &neg).is_err());
    }

    #[test]
    fn fiber_scaling() {
        let z = Cube::from_vec([1, 1, 2], vec![3.0, 4.0]).unwrap();
        let out = group_shrink_fibers(&z, &Mat::from_vec(1, 1, vec![1.0]).unwrap()).unwrap();
        assert!((out.as_slice()[0] - 2.4).abs() < 1e-15);
        assert!((out.as_slice()[1] - 3.2).abs() < 1e-15);
        let zeroed = group_shrink_fibers(&z, &Mat::from_vec(1, 1, vec![5.0]).unwrap()).unwrap();
        assert_eq!(zeroed.as_slice(), &[0.0, 0.0]);
        let id = group_shrink_fibers(&z, &Mat::zeros(1, 1)).unwrap();
        assert_eq!(id, z);
        assert!(group_shrink_fibers(&z, &Mat::zeros(2, 1)).is_err());
    }

    #[test]
    fn weights() {
        let zero = Cube::zeros([2, 2, 3]);
        let w = elementwise_weights(&zero, 0.01).unwrap();
        assert!(w.as_slice().iter().all(|&v| (v - 100.0).abs() < 1e-12));
        let g = group_weights(&zero, 0.01).unwrap();
        assert!(g.as_slice().iter().all(|&v| (v - 100.0).abs() < 1e-12));
        let f = Cube::from_vec([1, 1, 2], vec![3.0, 4.0]).unwrap();
        let g = reweight(&f, ReweightKind::Group, 0.01).unwrap().into_mat().unwrap();
        assert!((g[(0, 0)] - 1.0 / 5.01).abs() < 1e-15);
        assert!((g[(0, 0)] - 0.1996).abs() < 1e-4);
        assert!(reweight(&f, ReweightKind::Target, 0.0).is_err());
        assert!(reweight(&f, ReweightKind::Elementwise, -1.0).is_err());
    }
}
