//! Detection quality indicators: SCR and its gain, background suppression
//! factor, contrast gain, ROC with AUC, and the directional-variance
//! diagnostic used to tell clutter edges from homogeneous regions.
//!
//! All statistics are population statistics; "standard deviation" is the
//! square root of the population variance.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::pipeline::{connected_components, BBox};
use crate::tensor::Mat;
use crate::{Error, Result};

/// Default smoothing term of SCR and BSF.
pub const DEFAULT_OMEGA: f64 = 0.01;
/// Default neighborhood half-width around a target.
pub const DEFAULT_NEIGHBORHOOD: usize = 30;
/// Side of the window a detection must hit around a ground-truth target.
pub const DEFAULT_ROC_WINDOW: usize = 5;

/// A target extent in one frame plus the neighborhood width around it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetAnnotation {
    pub frame: usize,
    pub bbox: BBox,
    /// Neighborhood half-width `d`.
    pub d: usize,
}

impl TargetAnnotation {
    pub fn new(frame: usize, bbox: BBox) -> Self {
        TargetAnnotation {
            frame,
            bbox,
            d: DEFAULT_NEIGHBORHOOD,
        }
    }

    /// Annotation of a `size × size` box centered on `(row, col)`, clipped
    /// to the image.
    pub fn centered(frame: usize, row: f64, col: f64, size: usize, shape: (usize, usize)) -> Self {
        let half = (size / 2) as isize;
        let r = math::round(row) as isize;
        let c = math::round(col) as isize;
        let clip = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
        let bbox = BBox {
            r0: clip(r - half, shape.0),
            c0: clip(c - half, shape.1),
            r1: clip(r - half + size as isize - 1, shape.0),
            c1: clip(c - half + size as isize - 1, shape.1),
        };
        TargetAnnotation::new(frame, bbox)
    }

    fn check(&self, shape: (usize, usize)) -> Result<()> {
        let b = self.bbox;
        if b.r0 > b.r1 || b.c0 > b.c1 || b.r1 >= shape.0 || b.c1 >= shape.1 {
            return Err(Error::arg(format!(
                "target box {b:?} is empty or outside a {}x{} image",
                shape.0, shape.1
            )));
        }
        Ok(())
    }

    /// Pixels of the `(a+2d) × (b+2d)` neighborhood (clipped) outside the box.
    pub fn ring_values(&self, image: &Mat) -> Result<Vec<f64>> {
        self.check(image.shape())?;
        let (rows, cols) = image.shape();
        let b = self.bbox;
        let r_lo = b.r0.saturating_sub(self.d);
        let c_lo = b.c0.saturating_sub(self.d);
        let r_hi = (b.r1 + self.d).min(rows - 1);
        let c_hi = (b.c1 + self.d).min(cols - 1);
        let mut out = Vec::new();
        for r in r_lo..=r_hi {
            for c in c_lo..=c_hi {
                if !b.contains(r, c) {
                    out.push(image[(r, c)]);
                }
            }
        }
        Ok(out)
    }

    /// Maximum intensity inside the box.
    pub fn target_max(&self, image: &Mat) -> Result<f64> {
        self.check(image.shape())?;
        let b = self.bbox;
        let mut m = f64::NEG_INFINITY;
        for r in b.r0..=b.r1 {
            for c in b.c0..=b.c1 {
                m = m.max(image[(r, c)]);
            }
        }
        Ok(m)
    }
}

/// `|M_t − μ_b|` together with `σ_b`.
fn contrast_stats(image: &Mat, ann: &TargetAnnotation) -> Result<(f64, f64)> {
    let m_t = ann.target_max(image)?;
    let (mu, sigma) = math::mean_std(&ann.ring_values(image)?);
    Ok(((m_t - mu).abs(), sigma))
}

/// Signal-to-clutter ratio `|M_t − μ_b| / (σ_b + ω)`.
pub fn scr(image: &Mat, ann: &TargetAnnotation, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let (con, sigma) = contrast_stats(image, ann)?;
    Ok(con / (sigma + omega))
}

/// Background suppression factor `σ_in / (σ_out + ω)` over the ring.
pub fn bsf(original: &Mat, suppressed: &Mat, ann: &TargetAnnotation, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    check_shapes(original, suppressed)?;
    let (_, s_in) = math::mean_std(&ann.ring_values(original)?);
    let (_, s_out) = math::mean_std(&ann.ring_values(suppressed)?);
    Ok(s_in / (s_out + omega))
}

/// SCR gain: SCR of the separated target image over SCR of the original.
pub fn gscr(original: &Mat, target_img: &Mat, ann: &TargetAnnotation, omega: f64) -> Result<f64> {
    check_shapes(original, target_img)?;
    let s_in = scr(original, ann, omega)?;
    if s_in == 0.0 {
        return Err(Error::UndefinedMetric("input SCR is zero".into()));
    }
    Ok(scr(target_img, ann, omega)? / s_in)
}

/// Contrast gain `CON_out / CON_in` with `CON = |M_t − μ_b|`.
pub fn cg(original: &Mat, target_img: &Mat, ann: &TargetAnnotation) -> Result<f64> {
    check_shapes(original, target_img)?;
    let (con_in, _) = contrast_stats(original, ann)?;
    if con_in == 0.0 {
        return Err(Error::UndefinedMetric("input contrast is zero".into()));
    }
    let (con_out, _) = contrast_stats(target_img, ann)?;
    Ok(con_out / con_in)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) {
        return Err(Error::arg(format!("omega must be > 0, got {omega}")));
    }
    Ok(())
}

fn check_shapes(a: &Mat, b: &Mat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::arg(format!(
            "image shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Ground-truth target center in one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GtPoint {
    pub frame: usize,
    pub row: f64,
    pub col: f64,
}

impl From<&TargetAnnotation> for GtPoint {
    fn from(a: &TargetAnnotation) -> Self {
        GtPoint {
            frame: a.frame,
            row: 0.5 * (a.bbox.r0 + a.bbox.r1) as f64,
            col: 0.5 * (a.bbox.c0 + a.bbox.c1) as f64,
        }
    }
}

/// One operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    /// False detections per image.
    pub fa: f64,
    /// Probability of detection.
    pub pd: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    /// Sorted by `fa`, with `pd` made nondecreasing (upper envelope).
    pub points: Vec<RocPoint>,
    /// Trapezoid area over `fa` (false alarms per image, not a rate).
    pub auc_raw: f64,
    /// `auc_raw / max(fa)`, or the best `pd` at `fa = 0` when no point has
    /// false alarms.
    pub auc_normalized: f64,
}

impl RocCurve {
    /// Best `pd` achievable with at most `fa` false alarms per image.
    pub fn pd_at(&self, fa: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.fa <= fa)
            .map(|p| p.pd)
            .fold(0.0, f64::max)
    }
}

/// Maximum number of thresholds swept.
const MAX_THRESHOLDS: usize = 256;

/// Counts detected targets and false components of each frame at one threshold.
fn operating_point(maps: &[Mat], gt_by_frame: &[Vec<GtPoint>], threshold: f64, half: isize) -> (usize, usize) {
    let mut detected = 0;
    let mut false_alarms = 0;
    for (frame, map) in maps.iter().enumerate() {
        let (rows, cols) = map.shape();
        let mask: Vec<bool> = map.as_slice().iter().map(|v| v.abs() >= threshold).collect();
        let gts = &gt_by_frame[frame];
        let in_window = |g: &GtPoint, r: usize, c: usize| {
            let gr = math::round(g.row) as isize;
            let gc = math::round(g.col) as isize;
            (r as isize - gr).abs() <= half && (c as isize - gc).abs() <= half
        };
        for g in gts {
            let gr = math::round(g.row) as isize;
            let gc = math::round(g.col) as isize;
            let mut hit = false;
            'scan: for r in (gr - half).max(0)..=(gr + half).min(rows as isize - 1) {
                for c in (gc - half).max(0)..=(gc + half).min(cols as isize - 1) {
                    if mask[r as usize * cols + c as usize] {
                        hit = true;
                        break 'scan;
                    }
                }
            }
            if hit {
                detected += 1;
            }
        }
        for comp in connected_components(&mask, rows, cols) {
            let matched = comp
                .iter()
                .any(|&(r, c)| gts.iter().any(|g| in_window(g, r, c)));
            if !matched {
                false_alarms += 1;
            }
        }
    }
    (detected, false_alarms)
}

/// ROC by sweeping a threshold over per-frame score maps (absolute values).
pub fn roc(score_maps: &[Mat], ground_truth: &[GtPoint], window: usize) -> Result<RocCurve> {
    if ground_truth.is_empty() {
        return Err(Error::arg("ROC needs at least one ground-truth target"));
    }
    if score_maps.is_empty() {
        return Err(Error::arg("ROC needs at least one score map"));
    }
    let mut gt_by_frame = alloc::vec![Vec::new(); score_maps.len()];
    for g in ground_truth {
        if g.frame >= score_maps.len() {
            return Err(Error::arg(format!(
                "ground truth references frame {} but only {} maps given",
                g.frame,
                score_maps.len()
            )));
        }
        gt_by_frame[g.frame].push(*g);
    }
    let half = (window / 2) as isize;
    let mut values: Vec<f64> = score_maps
        .iter()
        .flat_map(|m| m.as_slice().iter().map(|v| v.abs()))
        .filter(|v| *v > 0.0)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup();
    let thresholds: Vec<f64> = if values.len() <= MAX_THRESHOLDS {
        values
    } else {
        let last = values.len() - 1;
        (0..MAX_THRESHOLDS)
            .map(|i| values[i * last / (MAX_THRESHOLDS - 1)])
            .collect()
    };
    let n_gt = ground_truth.len() as f64;
    let n_img = score_maps.len() as f64;
    let mut points = alloc::vec![RocPoint {
        threshold: f64::INFINITY,
        fa: 0.0,
        pd: 0.0,
    }];
    for t in thresholds {
        let (det, fa) = operating_point(score_maps, &gt_by_frame, t, half);
        points.push(RocPoint {
            threshold: t,
            fa: fa as f64 / n_img,
            pd: det as f64 / n_gt,
        });
    }
    points.sort_by(|a, b| a.fa.total_cmp(&b.fa).then(a.pd.total_cmp(&b.pd)));
    let mut best = 0.0f64;
    for p in &mut points {
        best = best.max(p.pd);
        p.pd = best;
    }
    let auc_raw: f64 = points
        .windows(2)
        .map(|w| (w[1].fa - w[0].fa) * 0.5 * (w[0].pd + w[1].pd))
        .sum();
    let max_fa = points.last().map(|p| p.fa).unwrap_or(0.0);
    let auc_normalized = if max_fa > 0.0 {
        auc_raw / max_fa
    } else {
        points.iter().filter(|p| p.fa == 0.0).map(|p| p.pd).fold(0.0, f64::max)
    };
    Ok(RocCurve {
        points,
        auc_raw,
        auc_normalized,
    })
}

/// Variances of adjacent-pixel differences in four directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalVariance {
    /// Along a row (column step).
    pub horizontal: f64,
    /// Along a column (row step).
    pub vertical: f64,
    /// Step `(+1, +1)`.
    pub diagonal: f64,
    /// Step `(+1, −1)`.
    pub anti_diagonal: f64,
}

/// Bands of the directional-variance diagnostic (8-bit intensity scale).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionClass {
    /// Largest variance in `[0, 10]`.
    Homogeneous,
    /// Largest variance in `(10, 20)`; the target band starts at 5 and
    /// overlaps the homogeneous one, which wins the overlap.
    Target,
    /// Largest variance `≥ 20`.
    Clutter,
}

impl DirectionalVariance {
    pub fn max(&self) -> f64 {
        self.horizontal
            .max(self.vertical)
            .max(self.diagonal)
            .max(self.anti_diagonal)
    }

    pub fn class(&self) -> RegionClass {
        let m = self.max();
        if m >= 20.0 {
            RegionClass::Clutter
        } else if m > 10.0 {
            RegionClass::Target
        } else {
            RegionClass::Homogeneous
        }
    }
}

pub fn directional_variance(image: &Mat, region: BBox) -> Result<DirectionalVariance> {
    let (rows, cols) = image.shape();
    if region.r1 >= rows || region.c1 >= cols || region.r1 < region.r0 + 1 || region.c1 < region.c0 + 1 {
        return Err(Error::arg(format!(
            "region {region:?} must be at least 2x2 and inside a {rows}x{cols} image"
        )));
    }
    let mut h = Vec::new();
    let mut v = Vec::new();
    let mut d = Vec::new();
    let mut a = Vec::new();
    for r in region.r0..=region.r1 {
        for c in region.c0..=region.c1 {
            let x = image[(r, c)];
            if c < region.c1 {
                h.push(image[(r, c + 1)] - x);
            }
            if r < region.r1 {
                v.push(image[(r + 1, c)] - x);
                if c < region.c1 {
                    d.push(image[(r + 1, c + 1)] - x);
                }
                if c > region.c0 {
                    a.push(image[(r + 1, c - 1)] - x);
                }
            }
        }
    }
    let var = |xs: &[f64]| {
        let (_, s) = math::mean_std(xs);
        s * s
    };
    Ok(DirectionalVariance {
        horizontal: var(&h),
        vertical: var(&v),
        diagonal: var(&d),
        anti_diagonal: var(&a),
    })
}
