use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdd_core::diff::{dense_diff_matrix, diff_gram_spectrum, PeriodicDiff};
use sdd_core::fft::FftPlan;
use sdd_core::{Cube, Mat, Mode};
use num_complex::Complex64;

fn rand_cube(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> Cube {
    Cube::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
}

#[test]
fn matches_dense_matrix_along_each_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=16 {
        let d = dense_diff_matrix(n);
        for mode in Mode::ALL {
            let mut dims = [3, 2, 4];
            dims[mode.axis()] = n;
            let x = rand_cube(&mut rng, dims);
            let want = x.mode_product(&d, mode).unwrap();
            let want_t = x.mode_product(&d.transpose(), mode).unwrap();
            let got = x.diff(mode).unwrap();
            let got_t = x.diff_adjoint(mode).unwrap();
            for (a, b) in got.as_slice().iter().zip(want.as_slice()) {
                assert!((a - b).abs() < 1e-14, "n={n} {mode:?}");
            }
            for (a, b) in got_t.as_slice().iter().zip(want_t.as_slice()) {
                assert!((a - b).abs() < 1e-14, "n={n} {mode:?} adjoint");
            }
        }
    }
}

#[test]
fn matrix_modes() {
    let a = Mat::from_fn(5, 3, |r, c| (r * r + c) as f64);
    let d5 = dense_diff_matrix(5);
    let d3 = dense_diff_matrix(3);
    assert_eq!(a.diff(Mode::One).unwrap(), d5.matmul(&a).unwrap());
    assert_eq!(a.diff(Mode::Two).unwrap(), a.matmul(&d3.transpose()).unwrap());
    assert!(a.diff(Mode::Three).is_err());
}

#[test]
fn adjoint_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for t in 0..100 {
        let dims = [rng.random_range(1..8), rng.random_range(1..8), rng.random_range(1..8)];
        let x = rand_cube(&mut rng, dims);
        let y = rand_cube(&mut rng, dims);
        let mode = Mode::ALL[t % 3];
        let lhs = x.diff(mode).unwrap().inner(&y).unwrap();
        let rhs = x.inner(&y.diff_adjoint(mode).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "case {t}");
    }
}

#[test]
fn linearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = rand_cube(&mut rng, [4, 5, 6]);
    let y = rand_cube(&mut rng, [4, 5, 6]);
    for mode in Mode::ALL {
        let lhs = x.scale(2.5).add(&y.scale(-0.5)).unwrap().diff(mode).unwrap();
        let rhs = x.diff(mode).unwrap().scale(2.5).add(&y.diff(mode).unwrap().scale(-0.5)).unwrap();
        for (a, b) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

#[test]
fn constants_are_annihilated() {
    let x = Cube::filled([3, 4, 5], 7.0);
    for mode in Mode::ALL {
        assert!(x.diff(mode).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn spectrum_matches_energy_via_fft() {
    // ‖Dv‖² = Σ_k λ_k |v̂_k|² / n
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [1usize, 2, 3, 5, 8, 12, 17, 30] {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Mat::from_vec(n, 1, v.clone()).unwrap();
        let energy: f64 = m.diff(Mode::One).unwrap().as_slice().iter().map(|x| x * x).sum();
        let plan = FftPlan::new(n);
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        plan.forward(&mut buf, &mut Vec::new());
        let spec = diff_gram_spectrum(n).unwrap();
        let via: f64 = spec.values().iter().zip(&buf).map(|(l, c)| l * c.norm_sqr()).sum::<f64>() / n as f64;
        assert!((energy - via).abs() < 1e-10 * (1.0 + energy), "n={n}");
    }
}

#[test]
fn spectrum_against_dense_eigenvalues() {
    for n in [2usize, 4, 7, 10] {
        let d = dense_diff_matrix(n);
        let g = d.transpose().matmul(&d).unwrap();
        let dm = DMatrix::from_row_slice(n, n, g.as_slice());
        let mut dense: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ours = diff_gram_spectrum(n).unwrap().values().to_vec();
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ours.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12, "n={n}");
        }
    }
    let four = diff_gram_spectrum(4).unwrap();
    for (a, b) in four.values().iter().zip([0.0, 2.0, 4.0, 2.0]) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn spectrum_symmetry_and_range() {
    for n in 1..64 {
        let s = diff_gram_spectrum(n).unwrap();
        assert_eq!(s.len(), n);
        assert_eq!(s.values()[0], 0.0);
        for k in 1..n {
            assert_eq!(s.values()[k], s.values()[n - k]);
            assert!(s.values()[k] > 0.0 && s.values()[k] <= 4.0);
        }
    }
    assert!(diff_gram_spectrum(0).is_err());
}
