//! Proximal alternating minimization of the directional low-rank model.
//!
//! The outer loop updates, in order, the temporal factor `A` (a Sylvester
//! equation solved in closed form), the spatial factor `B` (an inner ADMM
//! loop over the splits `Z1 = B ×₁ D1`, `Z2 = B ×₂ D2`) and the target cube
//! `T` (a reweighted soft threshold scaled by the enhancement factor).
//! Both linear solves are diagonalized: the small Gram matrix by a
//! symmetric eigendecomposition, the circulant difference Grams by DFTs.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diff::{diff_gram_spectrum, PeriodicDiff};
use crate::fft::{Fft2, Fft2Scratch, FftPlan};
use crate::linalg::gram_eigen;
use crate::prox::{elementwise_weights, group_shrink_fibers, group_weights, soft_threshold};
use crate::tensor::{Cube, Mat, Mode, NormKind};
use crate::{Error, Result};

/// Model and optimizer knobs.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Rank of the temporal factor (columns of `A`).
    pub rank: usize,
    /// Weight of the temporal-difference penalty on `A`.
    pub lambda: f64,
    /// Weight of the target sparsity term.
    pub gamma: f64,
    /// ADMM penalty.
    pub beta: f64,
    /// Proximal constant of the `A` and `B` updates.
    pub rho: f64,
    /// Proximal constant of the `T` update.
    pub t_prox: f64,
    /// Use `rho` for the `T` update instead of `t_prox`.
    pub bind_t_prox_to_rho: bool,
    /// Reweighting smoothing constant.
    pub epsilon: f64,
    pub k_max: usize,
    pub l_max: usize,
    pub tol_outer: f64,
    pub tol_inner: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rank: 10,
            lambda: 1.0,
            gamma: 0.03,
            beta: 15000.0,
            rho: 0.05,
            t_prox: 0.01,
            bind_t_prox_to_rho: false,
            epsilon: 0.01,
            k_max: 50,
            l_max: 10,
            tol_outer: 1e-5,
            tol_inner: 1e-5,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("rho", self.rho),
            ("t_prox", self.t_prox),
            ("epsilon", self.epsilon),
            ("tol_outer", self.tol_outer),
            ("tol_inner", self.tol_inner),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::arg(format!("{name} must be a finite value > 0, got {v}")));
            }
        }
        if self.rank == 0 {
            return Err(Error::arg("rank must be >= 1"));
        }
        if self.k_max == 0 || self.l_max == 0 {
            return Err(Error::arg("iteration caps must be >= 1"));
        }
        Ok(())
    }

    /// Proximal constant actually used by the `T` update.
    pub fn effective_t_prox(&self) -> f64 {
        if self.bind_t_prox_to_rho {
            self.rho
        } else {
            self.t_prox
        }
    }
}

/// All iterates of the alternating scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionState {
    pub a: Mat,
    pub b: Cube,
    pub t: Cube,
    pub z1: Cube,
    pub z2: Cube,
    pub p1: Cube,
    pub p2: Cube,
}

/// One outer iteration's diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// One-based outer iteration index.
    pub iteration: usize,
    /// `‖F^k − F^{k−1}‖_F / ‖F^{k−1}‖_F` with `F = B ×₃ A`.
    pub rel_change: f64,
    /// `‖Y − F − T‖_F`.
    pub residual: f64,
    /// `Σ_{ij} ‖(B ×₁ D1)(i,j,:)‖₂` (unweighted).
    pub group_term: f64,
    /// `‖B ×₂ D2‖₁` (unweighted).
    pub column_term: f64,
    /// `λ‖D3 A‖_F²`.
    pub temporal_term: f64,
    /// `γ‖W ⊙ T‖₁` (unweighted by the reweighting).
    pub target_term: f64,
    pub inner_iters: usize,
}

/// Per-outer-iteration history of a solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// FFT plans and difference spectra for one cube shape.
#[derive(Clone, Debug)]
pub struct Workspace {
    dims: [usize; 3],
    fft2: Fft2,
    fft_t: FftPlan,
    spec_rows: Vec<f64>,
    spec_cols: Vec<f64>,
    spec_time: Vec<f64>,
}

impl Workspace {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        let [n1, n2, n3] = dims;
        Ok(Workspace {
            dims,
            fft2: Fft2::new(n1, n2),
            fft_t: FftPlan::new(n3),
            spec_rows: diff_gram_spectrum(n1)?.values().to_vec(),
            spec_cols: diff_gram_spectrum(n2)?.values().to_vec(),
            spec_time: diff_gram_spectrum(n3)?.values().to_vec(),
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
}

fn ensure_finite_cube(name: &str, c: &Cube) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!("{name} has non-finite entries")))
    }
}

fn ensure_finite_mat(name: &str, m: &Mat) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::numeric(format!("{name} has non-finite entries")))
    }
}

/// `Σ_p x_p · y_p` over two frames.
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Temporal-factor update: solves
/// `A·M + 2λ·D3ᵀD3·A + ρ·A = R` with `M = B₍₃₎B₍₃₎ᵀ` and
/// `R = (Y₍₃₎ − T₍₃₎)B₍₃₎ᵀ + ρ·A_prev`.
pub fn solve_a(y: &Cube, t: &Cube, b: &Cube, a_prev: &Mat, lambda: f64, rho: f64) -> Result<Mat> {
    let ws = Workspace::new(y.dims())?;
    solve_a_with(&ws, y, t, b, a_prev, lambda, rho)
}

pub fn solve_a_with(
    ws: &Workspace,
    y: &Cube,
    t: &Cube,
    b: &Cube,
    a_prev: &Mat,
    lambda: f64,
    rho: f64,
) -> Result<Mat> {
    let [n1, n2, n3] = y.dims();
    let r = b.dims()[2];
    y.check_same_dims(t)?;
    if b.dims()[..2] != [n1, n2] || a_prev.shape() != (n3, r) || ws.dims != y.dims() {
        return Err(Error::arg(format!(
            "solve_a shapes inconsistent: y {:?}, b {:?}, a {:?}",
            y.dims(),
            b.dims(),
            a_prev.shape()
        )));
    }
    if !(lambda >= 0.0) || !(rho > 0.0) {
        return Err(Error::arg(format!("need lambda >= 0 and rho > 0, got {lambda}, {rho}")));
    }
    ensure_finite_cube("y", y)?;
    ensure_finite_cube("t", t)?;
    ensure_finite_cube("b", b)?;
    ensure_finite_mat("a_prev", a_prev)?;

    let resid = y.sub(t)?;
    let mut m = Mat::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let v = dot(b.slice(i), b.slice(j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut rhs = Mat::zeros(n3, r);
    for k in 0..n3 {
        for j in 0..r {
            rhs[(k, j)] = dot(resid.slice(k), b.slice(j)) + rho * a_prev[(k, j)];
        }
    }
    let eig = gram_eigen(&m)?;
    let rot = rhs.matmul(&eig.vectors)?;
    let mut solved = Mat::zeros(n3, r);
    let mut buf = vec![Complex64::new(0.0, 0.0); n3];
    let mut scratch = Vec::new();
    for j in 0..r {
        for k in 0..n3 {
            buf[k] = Complex64::new(rot[(k, j)], 0.0);
        }
        ws.fft_t.forward(&mut buf, &mut scratch);
        for (f, v) in buf.iter_mut().enumerate() {
            *v /= eig.values[j] + 2.0 * lambda * ws.spec_time[f] + rho;
        }
        ws.fft_t.inverse(&mut buf, &mut scratch);
        for k in 0..n3 {
            solved[(k, j)] = buf[k].re;
        }
    }
    let a = solved.matmul(&eig.vectors.transpose())?;
    ensure_finite_mat("A update", &a)?;
    Ok(a)
}

/// Spatial-factor linear solve:
/// `B ×₃ (AᵀA) + ρB + β(B ×₁ D1ᵀD1 + B ×₂ D2ᵀD2) = K`.
pub fn solve_b_quadratic(k_rhs: &Cube, a: &Mat, beta: f64, rho: f64) -> Result<Cube> {
    let [n1, n2, _] = k_rhs.dims();
    let ws = Workspace::new([n1, n2, a.rows()])?;
    solve_b_quadratic_with(&ws, k_rhs, a, beta, rho)
}

pub fn solve_b_quadratic_with(
    ws: &Workspace,
    k_rhs: &Cube,
    a: &Mat,
    beta: f64,
    rho: f64,
) -> Result<Cube> {
    let [n1, n2, r] = k_rhs.dims();
    if a.cols() != r || ws.dims[..2] != [n1, n2] {
        return Err(Error::arg(format!(
            "solve_b shapes inconsistent: k {:?}, a {:?}",
            k_rhs.dims(),
            a.shape()
        )));
    }
    if !(beta >= 0.0) || !(rho > 0.0) {
        return Err(Error::arg(format!("need beta >= 0 and rho > 0, got {beta}, {rho}")));
    }
    ensure_finite_cube("k", k_rhs)?;
    ensure_finite_mat("a", a)?;

    let eig = gram_eigen(&a.gram())?;
    // rotate the rank axis into the eigenbasis: K̂ = K ×₃ Vᵀ
    let k_hat = k_rhs.mode_product(&eig.vectors.transpose(), Mode::Three)?;
    let plane = n1 * n2;
    let mut b_hat = Cube::zeros([n1, n2, r]);
    let mut buf = vec![Complex64::new(0.0, 0.0); plane];
    let mut scratch = Fft2Scratch::default();
    for j in 0..r {
        for (dst, &src) in buf.iter_mut().zip(k_hat.slice(j)) {
            *dst = Complex64::new(src, 0.0);
        }
        ws.fft2.forward(&mut buf, &mut scratch);
        let base = eig.values[j] + rho;
        for p in 0..n1 {
            let row_term = beta * ws.spec_rows[p];
            for q in 0..n2 {
                buf[p * n2 + q] /= base + row_term + beta * ws.spec_cols[q];
            }
        }
        ws.fft2.inverse(&mut buf, &mut scratch);
        for (dst, src) in b_hat.slice_mut(j).iter_mut().zip(&buf) {
            *dst = src.re;
        }
    }
    let b = b_hat.mode_product(&eig.vectors, Mode::Three)?;
    ensure_finite_cube("B update", &b)?;
    Ok(b)
}

/// Result of the inner ADMM loop.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmOutput {
    pub b: Cube,
    pub z1: Cube,
    pub z2: Cube,
    pub p1: Cube,
    pub p2: Cube,
    pub inner_iters: usize,
    /// `‖B ×₁ D1 − Z1‖_F` after each inner iteration.
    pub feasibility_gaps: Vec<f64>,
    /// Relative change of `B` at each inner iteration.
    pub rel_changes: Vec<f64>,
}

fn rel_change(new: &Cube, old: &Cube) -> f64 {
    let denom = old.fro_norm();
    let num = new
        .as_slice()
        .iter()
        .zip(old.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let num = crate::math::sqrt(num);
    if denom > 0.0 {
        num / denom
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Spatial-factor update by ADMM, with splits and multipliers starting at zero.
pub fn admm_b(y: &Cube, t: &Cube, a: &Mat, b_prev: &Cube, cfg: &SolverConfig) -> Result<AdmmOutput> {
    cfg.validate()?;
    let ws = Workspace::new(y.dims())?;
    admm_b_with(&ws, y, t, a, b_prev, cfg)
}

pub fn admm_b_with(
    ws: &Workspace,
    y: &Cube,
    t: &Cube,
    a: &Mat,
    b_prev: &Cube,
    cfg: &SolverConfig,
) -> Result<AdmmOutput> {
    let [n1, n2, n3] = y.dims();
    let r = a.cols();
    if a.rows() != n3 || b_prev.dims() != [n1, n2, r] {
        return Err(Error::arg(format!(
            "admm_b shapes inconsistent: y {:?}, a {:?}, b {:?}",
            y.dims(),
            a.shape(),
            b_prev.dims()
        )));
    }
    let beta = cfg.beta;
    let data_term = y.sub(t)?.mode_product(&a.transpose(), Mode::Three)?;
    let dims = [n1, n2, r];
    let mut z1 = Cube::zeros(dims);
    let mut z2 = Cube::zeros(dims);
    let mut p1 = Cube::zeros(dims);
    let mut p2 = Cube::zeros(dims);
    let mut b = b_prev.clone();
    let mut gaps = Vec::new();
    let mut changes = Vec::new();
    let mut iters = 0;
    while iters < cfg.l_max {
        // K = (Y−T)×₃Aᵀ + β·D1ᵀ(Z1 − P1/β) + β·D2ᵀ(Z2 − P2/β) + ρ·B_prev
        let v1 = z1.zip_map(&p1, |z, p| beta * z - p)?.diff_adjoint(Mode::One)?;
        let v2 = z2.zip_map(&p2, |z, p| beta * z - p)?.diff_adjoint(Mode::Two)?;
        let mut k_rhs = data_term.clone();
        for (((k, a1), a2), bp) in k_rhs
            .as_mut_slice()
            .iter_mut()
            .zip(v1.as_slice())
            .zip(v2.as_slice())
            .zip(b_prev.as_slice())
        {
            *k += a1 + a2 + cfg.rho * bp;
        }
        let b_new = solve_b_quadratic_with(ws, &k_rhs, a, beta, cfg.rho)?;

        let d1b = b_new.diff(Mode::One)?;
        let d2b = b_new.diff(Mode::Two)?;
        let z1_hat = d1b.zip_map(&p1, |d, p| d + p / beta)?;
        let w1 = group_weights(&z1_hat, cfg.epsilon)?;
        z1 = group_shrink_fibers(&z1_hat, &w1.map(|w| w / beta))?;
        let z2_hat = d2b.zip_map(&p2, |d, p| d + p / beta)?;
        let w2 = elementwise_weights(&z2_hat, cfg.epsilon)?;
        z2 = soft_threshold(&z2_hat, &w2.scale(1.0 / beta))?;

        let gap1 = d1b.sub(&z1)?;
        p1 = p1.zip_map(&gap1, |p, g| p + beta * g)?;
        p2 = p2.zip_map(&d2b.sub(&z2)?, |p, g| p + beta * g)?;

        iters += 1;
        let change = rel_change(&b_new, &b);
        b = b_new;
        gaps.push(gap1.fro_norm());
        changes.push(change);
        if !p1.is_finite() || !p2.is_finite() || !b.is_finite() {
            return Err(Error::numeric(format!("ADMM iterate non-finite at inner step {iters}")));
        }
        if change < cfg.tol_inner {
            break;
        }
    }
    Ok(AdmmOutput {
        b,
        z1,
        z2,
        p1,
        p2,
        inner_iters: iters,
        feasibility_gaps: gaps,
        rel_changes: changes,
    })
}

/// Target update: `T̂ = (Y − B×₃A + τ·T_prev)/(1 + τ)`, then
/// `T = shrink(W ⊙ T̂, γ·W_S/(1 + τ))` with `W_S = 1/(|T̂| + ε)` and
/// `τ` the effective target proximal constant.
pub fn update_t(
    y: &Cube,
    a: &Mat,
    b: &Cube,
    t_prev: &Cube,
    w_asce: &Cube,
    cfg: &SolverConfig,
) -> Result<Cube> {
    let background = b.mode_product(a, Mode::Three)?;
    update_t_from_background(y, &background, t_prev, w_asce, cfg)
}

pub(crate) fn update_t_from_background(
    y: &Cube,
    background: &Cube,
    t_prev: &Cube,
    w_asce: &Cube,
    cfg: &SolverConfig,
) -> Result<Cube> {
    y.check_same_dims(background)?;
    y.check_same_dims(t_prev)?;
    y.check_same_dims(w_asce)?;
    let tau = cfg.effective_t_prox();
    let scale = 1.0 / (1.0 + tau);
    let t_hat = Cube::from_vec_unchecked(
        y.dims(),
        y.as_slice()
            .iter()
            .zip(background.as_slice())
            .zip(t_prev.as_slice())
            .map(|((yv, f), tp)| (yv - f + tau * tp) * scale)
            .collect(),
    );
    let ws = elementwise_weights(&t_hat, cfg.epsilon)?;
    let boosted = t_hat.zip_map(w_asce, |t, w| t * w)?;
    soft_threshold(&boosted, &ws.scale(cfg.gamma * scale))
}

/// Output of [`decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Background `F = B ×₃ A`.
    pub background: Cube,
    /// Sparse target cube `T`.
    pub target: Cube,
    pub a: Mat,
    pub b: Cube,
    pub trace: SolveTrace,
}

/// Seeded uniform `[0, 1)` initialization of `A` (row-major) then `B`
/// (frame-major), from a ChaCha8 stream.
pub fn initial_factors(dims: [usize; 3], rank: usize, seed: u64) -> (Mat, Cube) {
    let [n1, n2, n3] = dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Mat::from_fn(n3, rank, |_, _| rng.random::<f64>());
    let b = Cube::from_fn([n1, n2, rank], |_, _, _| rng.random::<f64>());
    (a, b)
}

fn group_norm_sum(c: &Cube) -> f64 {
    crate::prox::fiber_norms(c).iter().sum()
}

/// Runs the full alternating scheme on one cube.
pub fn decompose(y: &Cube, w_asce: &Cube, cfg: &SolverConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let dims = y.dims();
    if dims[2] < 2 {
        return Err(Error::arg("decompose needs at least 2 frames"));
    }
    y.check_same_dims(w_asce)?;
    ensure_finite_cube("y", y)?;
    ensure_finite_cube("w_asce", w_asce)?;
    let ws = Workspace::new(dims)?;

    let (mut a, mut b) = initial_factors(dims, cfg.rank, cfg.seed);
    let mut t = Cube::zeros(dims);
    let mut f_prev = b.mode_product(&a, Mode::Three)?;
    let mut trace = SolveTrace::default();
    let fail = |reason: String, trace: &SolveTrace| Error::SolverFailure {
        reason,
        trace: Box::new(trace.clone()),
    };

    for k in 1..=cfg.k_max {
        a = solve_a_with(&ws, y, &t, &b, &a, cfg.lambda, cfg.rho)
            .map_err(|e| fail(format!("A update at iteration {k}: {e}"), &trace))?;
        let admm = admm_b_with(&ws, y, &t, &a, &b, cfg)
            .map_err(|e| fail(format!("B update at iteration {k}: {e}"), &trace))?;
        b = admm.b;
        let f = b.mode_product(&a, Mode::Three)?;
        t = update_t_from_background(y, &f, &t, w_asce, cfg)?;
        if !t.is_finite() || !f.is_finite() {
            return Err(fail(format!("non-finite iterate at iteration {k}"), &trace));
        }

        let change = rel_change(&f, &f_prev);
        let residual = crate::math::sqrt(
            y.as_slice()
                .iter()
                .zip(f.as_slice())
                .zip(t.as_slice())
                .map(|((yv, fv), tv)| (yv - fv - tv) * (yv - fv - tv))
                .sum(),
        );
        let d3a = a.diff(Mode::One)?;
        let temporal = d3a.as_slice().iter().map(|v| v * v).sum::<f64>();
        trace.records.push(IterationRecord {
            iteration: k,
            rel_change: change,
            residual,
            group_term: group_norm_sum(&b.diff(Mode::One)?),
            column_term: b.diff(Mode::Two)?.norm(NormKind::L1),
            temporal_term: cfg.lambda * temporal,
            target_term: cfg.gamma
                * t.zip_map(w_asce, |tv, wv| tv * wv)?.norm(NormKind::L1),
            inner_iters: admm.inner_iters,
        });
        f_prev = f;
        if change < cfg.tol_outer {
            break;
        }
    }
    Ok(Decomposition {
        background: f_prev,
        target: t,
        a,
        b,
        trace,
    })
}
