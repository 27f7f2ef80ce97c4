use sdd_core::metrics::{
    bsf, cg, directional_variance, gscr, roc, scr, GtPoint, RegionClass, TargetAnnotation,
    DEFAULT_NEIGHBORHOOD, DEFAULT_OMEGA, DEFAULT_ROC_WINDOW,
};
use sdd_core::pipeline::BBox;
use sdd_core::{Error, Mat};

const W: f64 = DEFAULT_OMEGA;

/// 3×3 image with `center` in the middle and `ring` around it, read clockwise.
fn ringed(center: f64, ring: [f64; 8]) -> Mat {
    let order = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)];
    let mut m = Mat::zeros(3, 3);
    for (v, (r, c)) in ring.iter().zip(order) {
        m[(r, c)] = *v;
    }
    m[(1, 1)] = center;
    m
}

fn center_ann() -> TargetAnnotation {
    TargetAnnotation { frame: 0, bbox: BBox { r0: 1, c0: 1, r1: 1, c1: 1 }, d: 1 }
}

const ALT02: [f64; 8] = [0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0];

#[test]
fn defaults() {
    assert_eq!(DEFAULT_OMEGA, 0.01);
    assert_eq!(DEFAULT_NEIGHBORHOOD, 30);
    assert_eq!(DEFAULT_ROC_WINDOW, 5);
    assert_eq!(TargetAnnotation::new(0, BBox { r0: 0, c0: 0, r1: 0, c1: 0 }).d, 30);
}

#[test]
fn scr_examples() {
    let flat = ringed(100.0, [0.0; 8]);
    assert!((scr(&flat, &center_ann(), W).unwrap() - 10000.0).abs() < 1e-9);
    let alt = ringed(10.0, ALT02);
    assert!((scr(&alt, &center_ann(), W).unwrap() - 9.0 / 1.01).abs() < 1e-12);
    let level = ringed(1.0, ALT02);
    assert_eq!(scr(&level, &center_ann(), W).unwrap(), 0.0);
}

#[test]
fn ring_is_clipped_box_minus_target() {
    let img = Mat::from_fn(10, 10, |r, c| (r * 10 + c) as f64);
    let ann = TargetAnnotation { frame: 0, bbox: BBox { r0: 1, c0: 1, r1: 2, c1: 2 }, d: 2 };
    // rows 0..=4, cols 0..=4 minus the 2×2 box
    assert_eq!(ann.ring_values(&img).unwrap().len(), 25 - 4);
    assert_eq!(ann.target_max(&img).unwrap(), 22.0);
    let outside = TargetAnnotation { frame: 0, bbox: BBox { r0: 9, c0: 9, r1: 10, c1: 10 }, d: 1 };
    assert!(matches!(scr(&img, &outside, W), Err(Error::Argument(_))));
}

#[test]
fn bsf_examples() {
    // ring σ_in = 10 (alternating 0/20), suppressed ring all zero
    let orig = ringed(50.0, [0.0, 20.0, 0.0, 20.0, 0.0, 20.0, 0.0, 20.0]);
    let zero = ringed(50.0, [0.0; 8]);
    assert!((bsf(&orig, &zero, &center_ann(), W).unwrap() - 1000.0).abs() < 1e-9);
    let same = bsf(&orig, &orig, &center_ann(), W).unwrap();
    assert!((same - 10.0 / 10.01).abs() < 1e-12 && same < 1.0);
    let s2 = ringed(0.0, [0.0, 4.0, 0.0, 4.0, 0.0, 4.0, 0.0, 4.0]);
    let s05 = ringed(0.0, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    assert!((bsf(&s2, &s05, &center_ann(), W).unwrap() - 2.0 / 0.51).abs() < 1e-12);
    assert!(bsf(&s2, &Mat::zeros(4, 4), &center_ann(), W).is_err());
}

#[test]
fn gscr_examples() {
    let alt = ringed(10.0, ALT02);
    assert!((gscr(&alt, &alt, &center_ann(), W).unwrap() - 1.0).abs() < 1e-15);
    let clean = ringed(100.0, [0.0; 8]);
    let g = gscr(&alt, &clean, &center_ann(), W).unwrap();
    assert!((g - 10000.0 / (9.0 / 1.01)).abs() < 1e-6);
    assert!((g - 1122.2).abs() < 0.05);
    let dead = ringed(1.0, ALT02);
    assert!(matches!(gscr(&dead, &clean, &center_ann(), W), Err(Error::UndefinedMetric(_))));
}

#[test]
fn cg_examples() {
    let alt = ringed(10.0, ALT02);
    let out = ringed(10.0, [0.0; 8]);
    assert_eq!(cg(&alt, &alt, &center_ann()).unwrap(), 1.0);
    assert!((cg(&alt, &out, &center_ann()).unwrap() - 10.0 / 9.0).abs() < 1e-15);
    let doubled = out.map(|v| 2.0 * v);
    assert!((cg(&alt, &doubled, &center_ann()).unwrap() - 20.0 / 9.0).abs() < 1e-15);
    let dead = ringed(1.0, ALT02);
    assert!(matches!(cg(&dead, &out, &center_ann()), Err(Error::UndefinedMetric(_))));
}

#[test]
fn metrics_ignore_a_common_offset() {
    let orig = ringed(10.0, [0.0, 2.0, 1.0, 3.0, 0.5, 2.5, 1.5, 0.25]);
    let out = ringed(7.0, [0.0, 0.5, 0.25, 0.0, 0.125, 0.0, 0.5, 0.0]);
    let shift = |m: &Mat| m.map(|v| v + 32.0);
    let a = center_ann();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
    assert!(close(scr(&shift(&orig), &a, W).unwrap(), scr(&orig, &a, W).unwrap()));
    assert!(close(bsf(&shift(&orig), &shift(&out), &a, W).unwrap(), bsf(&orig, &out, &a, W).unwrap()));
    assert!(close(gscr(&shift(&orig), &shift(&out), &a, W).unwrap(), gscr(&orig, &out, &a, W).unwrap()));
    assert!(close(cg(&shift(&orig), &shift(&out), &a).unwrap(), cg(&orig, &out, &a).unwrap()));
}

fn gt(frame: usize, row: f64, col: f64) -> GtPoint {
    GtPoint { frame, row, col }
}

#[test]
fn roc_perfect_single_detection() {
    let mut m = Mat::zeros(16, 16);
    m[(8, 8)] = 1.0;
    let curve = roc(&[m], &[gt(0, 8.0, 8.0)], 5).unwrap();
    assert!(curve.points.iter().any(|p| p.fa == 0.0 && p.pd == 1.0));
    assert_eq!(curve.auc_normalized, 1.0);
    assert_eq!(curve.pd_at(0.0), 1.0);
}

#[test]
fn roc_without_detections() {
    let curve = roc(&[Mat::zeros(8, 8), Mat::zeros(8, 8)], &[gt(1, 3.0, 3.0)], 5).unwrap();
    assert!(curve.points.iter().all(|p| p.pd == 0.0));
    assert_eq!(curve.auc_raw, 0.0);
    assert_eq!(curve.auc_normalized, 0.0);
    assert!(roc(&[Mat::zeros(8, 8)], &[], 5).is_err());
    assert!(roc(&[Mat::zeros(8, 8)], &[gt(3, 1.0, 1.0)], 5).is_err());
}

#[test]
fn roc_true_before_spurious() {
    let mut maps = Vec::new();
    let mut gts = Vec::new();
    for k in 0..10 {
        let mut m = Mat::zeros(32, 32);
        m[(10, 10 + k)] = 2.0 + k as f64 * 0.01;
        m[(25, 25)] = 1.0;
        maps.push(m);
        gts.push(gt(k, 10.0, (10 + k) as f64));
    }
    let curve = roc(&maps, &gts, 5).unwrap();
    let first_full = curve.points.iter().position(|p| p.pd == 1.0).unwrap();
    assert_eq!(curve.points[first_full].fa, 0.0);
    assert!(curve.points.iter().any(|p| p.fa == 1.0));
    assert_eq!(curve.auc_normalized, 1.0);
    for w in curve.points.windows(2) {
        assert!(w[0].fa <= w[1].fa && w[0].pd <= w[1].pd);
    }
    // a negative score counts by magnitude
    maps[0][(10, 10)] = -2.0;
    assert_eq!(roc(&maps, &gts, 5).unwrap().pd_at(0.0), 1.0);
}

#[test]
fn roc_window_bounds() {
    let mut m = Mat::zeros(20, 20);
    m[(10, 13)] = 1.0;
    // 3 px off the center misses a 5×5 window but hits a 7×7 one
    assert_eq!(roc(&[m.clone()], &[gt(0, 10.0, 10.0)], 5).unwrap().pd_at(10.0), 0.0);
    assert_eq!(roc(&[m], &[gt(0, 10.0, 10.0)], 7).unwrap().pd_at(10.0), 1.0);
}

fn whole(m: &Mat) -> BBox {
    BBox { r0: 0, c0: 0, r1: m.rows() - 1, c1: m.cols() - 1 }
}

#[test]
fn directional_variance_examples() {
    let flat = Mat::from_fn(6, 6, |_, _| 4.0);
    let v = directional_variance(&flat, whole(&flat)).unwrap();
    assert_eq!((v.horizontal, v.vertical, v.diagonal, v.anti_diagonal), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(v.class(), RegionClass::Homogeneous);

    let stripes = Mat::from_fn(6, 7, |_, c| if c % 2 == 0 { 0.0 } else { 10.0 });
    let s = directional_variance(&stripes, whole(&stripes)).unwrap();
    assert!((s.horizontal - 100.0).abs() < 1e-12);
    assert_eq!(s.vertical, 0.0);
    assert_eq!(s.class(), RegionClass::Clutter);

    assert!(directional_variance(&flat, BBox { r0: 2, c0: 2, r1: 2, c1: 5 }).is_err());
    assert!(directional_variance(&flat, BBox { r0: 0, c0: 0, r1: 6, c1: 5 }).is_err());
}

#[test]
fn rotation_swaps_directions() {
    let img = Mat::from_fn(7, 9, |r, c| ((r * 7 + c * c * 3) % 11) as f64);
    let (rows, cols) = img.shape();
    // 90° counter-clockwise: rot[r][c] = img[c][cols-1-r]
    let rot = Mat::from_fn(cols, rows, |r, c| img[(c, cols - 1 - r)]);
    let a = directional_variance(&img, whole(&img)).unwrap();
    let b = directional_variance(&rot, whole(&rot)).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
    assert!(close(a.horizontal, b.vertical) && close(a.vertical, b.horizontal));
    assert!(close(a.diagonal, b.anti_diagonal) && close(a.anti_diagonal, b.diagonal));
}

#[test]
fn class_bands() {
    let mk = |m: f64| sdd_core::metrics::DirectionalVariance { horizontal: m, vertical: 0.0, diagonal: 0.0, anti_diagonal: 0.0 };
    assert_eq!(mk(10.0).class(), RegionClass::Homogeneous);
    assert_eq!(mk(15.0).class(), RegionClass::Target);
    assert_eq!(mk(20.0).class(), RegionClass::Clutter);
}
