//! End-to-end detection: clip the sequence into cubes, build the
//! enhancement factor per cube, decompose, then threshold every target
//! slice and extract 8-connected components.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::saliency::{enhancement_cube, AsceParams};
use crate::solver::{decompose, SolveTrace, SolverConfig};
use crate::tensor::{Cube, Mat};
use crate::{Error, Result};

/// Inclusive pixel box `[r0, r1] × [c0, c1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BBox {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

impl BBox {
    pub fn contains(&self, r: usize, c: usize) -> bool {
        r >= self.r0 && r <= self.r1 && c >= self.c0 && c <= self.c1
    }

    pub fn height(&self) -> usize {
        self.r1 - self.r0 + 1
    }

    pub fn width(&self) -> usize {
        self.c1 - self.c0 + 1
    }
}

/// One connected component of a segmented target slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    /// Global frame index.
    pub frame: usize,
    /// `|t|`-weighted centroid `(row, col)`.
    pub centroid: (f64, f64),
    pub bbox: BBox,
    /// Largest `|t|` in the component.
    pub score: f64,
    /// Pixel count.
    pub area: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Frames per cube.
    pub cube_len: usize,
    /// Frames between cube starts; equal to `cube_len` for disjoint cubes.
    pub stride: usize,
    /// Floor of the segmentation threshold.
    pub c_min: f64,
    /// Standard deviations above the slice mean for the threshold.
    pub d_thresh: f64,
    pub solver: SolverConfig,
    pub asce: AsceParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cube_len: 30,
            stride: 30,
            c_min: 0.1,
            d_thresh: 5.0,
            solver: SolverConfig::default(),
            asce: AsceParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cube_len < 2 {
            return Err(Error::arg(format!("cube_len must be >= 2, got {}", self.cube_len)));
        }
        if self.stride == 0 || self.stride > self.cube_len {
            return Err(Error::arg(format!(
                "stride must be in [1, cube_len], got {}",
                self.stride
            )));
        }
        if !(self.c_min >= 0.0) || !(self.d_thresh >= 0.0) {
            return Err(Error::arg("c_min and d_thresh must be >= 0"));
        }
        self.solver.validate()?;
        self.asce.validate()
    }
}

/// A window of the sequence ready for decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct ClippedCube {
    /// Global index of the cube's first slice.
    pub start: usize,
    pub cube: Cube,
    /// Number of real (unpadded) slices.
    pub valid: usize,
    /// First slice this cube is responsible for segmenting; earlier ones
    /// belong to a previous overlapping cube.
    pub owned_from: usize,
}

impl ClippedCube {
    /// Whether slice `k` is padding.
    pub fn is_padded(&self, k: usize) -> bool {
        k >= self.valid
    }

    /// Slices whose detections this cube reports.
    pub fn owned_slices(&self) -> core::ops::Range<usize> {
        self.owned_from..self.valid
    }
}

/// Windows of `cube_len` frames every `stride` frames. A final short window
/// is padded by repeating the last frame; padded slices are never segmented.
pub fn clip_cubes(frames: &[Mat], cube_len: usize, stride: usize) -> Result<Vec<ClippedCube>> {
    if frames.len() < 2 {
        return Err(Error::arg(format!("need at least 2 frames, got {}", frames.len())));
    }
    if cube_len < 2 || stride == 0 || stride > cube_len {
        return Err(Error::arg(format!(
            "invalid windowing: cube_len {cube_len}, stride {stride}"
        )));
    }
    let shape = frames[0].shape();
    if let Some(k) = frames.iter().position(|f| f.shape() != shape) {
        return Err(Error::arg(format!(
            "frame {k} has shape {:?}, expected {shape:?}",
            frames[k].shape()
        )));
    }
    let n = frames.len();
    let mut out = Vec::new();
    let mut start = 0;
    let mut covered = 0;
    loop {
        let end = (start + cube_len).min(n);
        let mut window: Vec<Mat> = frames[start..end].to_vec();
        let last = window[window.len() - 1].clone();
        window.resize(cube_len, last);
        out.push(ClippedCube {
            start,
            cube: Cube::from_frames(&window)?,
            valid: end - start,
            owned_from: covered - start,
        });
        covered = end;
        if start + cube_len >= n {
            break;
        }
        start += stride;
    }
    Ok(out)
}

/// 8-connected components of a row-major mask, each listed in scan order.
pub fn connected_components(mask: &[bool], rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; mask.len()];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(p) = stack.pop() {
            let (r, c) = (p / cols, p % cols);
            comp.push((r, c));
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let rr = r as isize + dr;
                    let cc = c as isize + dc;
                    if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                        continue;
                    }
                    let q = rr as usize * cols + cc as usize;
                    if mask[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Segmentation threshold `max(c_min, μ + d·σ)` of one slice.
pub fn segmentation_threshold(t_slice: &Mat, c_min: f64, d_thresh: f64) -> f64 {
    let (mu, sigma) = math::mean_std(t_slice.as_slice());
    c_min.max(mu + d_thresh * sigma)
}

/// Thresholds one target slice and returns the binary mask (0/1) with the
/// components found in it, tagged with `frame`.
pub fn segment_targets(t_slice: &Mat, c_min: f64, d_thresh: f64, frame: usize) -> (Mat, Vec<Detection>) {
    let (rows, cols) = t_slice.shape();
    let threshold = segmentation_threshold(t_slice, c_min, d_thresh);
    let flags: Vec<bool> = t_slice.as_slice().iter().map(|v| v.abs() >= threshold).collect();
    let mask = Mat::from_fn(rows, cols, |r, c| if flags[r * cols + c] { 1.0 } else { 0.0 });
    let detections = connected_components(&flags, rows, cols)
        .into_iter()
        .map(|comp| {
            let mut bbox = BBox {
                r0: usize::MAX,
                c0: usize::MAX,
                r1: 0,
                c1: 0,
            };
            let (mut wsum, mut rsum, mut csum, mut score) = (0.0, 0.0, 0.0, 0.0f64);
            for &(r, c) in &comp {
                let w = t_slice[(r, c)].abs();
                bbox.r0 = bbox.r0.min(r);
                bbox.c0 = bbox.c0.min(c);
                bbox.r1 = bbox.r1.max(r);
                bbox.c1 = bbox.c1.max(c);
                wsum += w;
                rsum += w * r as f64;
                csum += w * c as f64;
                score = score.max(w);
            }
            Detection {
                frame,
                centroid: (rsum / wsum, csum / wsum),
                bbox,
                score,
                area: comp.len(),
            }
        })
        .collect();
    (mask, detections)
}

/// Segmentation output of one cube.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeResult {
    pub start: usize,
    /// Global frame indices of the owned slices, in order.
    pub frames: Vec<usize>,
    pub detections: Vec<Detection>,
    pub target_frames: Vec<Mat>,
    pub background_frames: Vec<Mat>,
    pub masks: Vec<Mat>,
    pub trace: SolveTrace,
}

/// Enhancement factor, decomposition and segmentation of one clipped cube.
pub fn detect_cube(clip: &ClippedCube, cfg: &PipelineConfig) -> Result<CubeResult> {
    let w_asce = enhancement_cube(&clip.cube.frames(), &cfg.asce)?;
    let dec = decompose(&clip.cube, &w_asce, &cfg.solver)?;
    let mut out = CubeResult {
        start: clip.start,
        frames: Vec::new(),
        detections: Vec::new(),
        target_frames: Vec::new(),
        background_frames: Vec::new(),
        masks: Vec::new(),
        trace: dec.trace,
    };
    for k in clip.owned_slices() {
        let global = clip.start + k;
        let t_slice = dec.target.frame(k);
        let (mask, dets) = segment_targets(&t_slice, cfg.c_min, cfg.d_thresh, global);
        out.frames.push(global);
        out.detections.extend(dets);
        out.masks.push(mask);
        out.target_frames.push(t_slice);
        out.background_frames.push(dec.background.frame(k));
    }
    Ok(out)
}

/// Whole-sequence result, in frame order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceResult {
    pub detections: Vec<Detection>,
    pub target_frames: Vec<Mat>,
    pub background_frames: Vec<Mat>,
    pub masks: Vec<Mat>,
    /// One trace per cube.
    pub traces: Vec<SolveTrace>,
}

impl SequenceResult {
    /// Appends cube results; they must arrive in cube order.
    pub fn merge(cubes: Vec<CubeResult>) -> Self {
        let mut out = SequenceResult::default();
        for c in cubes {
            out.detections.extend(c.detections);
            out.target_frames.extend(c.target_frames);
            out.background_frames.extend(c.background_frames);
            out.masks.extend(c.masks);
            out.traces.push(c.trace);
        }
        sort_detections(&mut out.detections);
        out
    }
}

/// Orders detections by `(frame, row, col)`.
pub fn sort_detections(dets: &mut [Detection]) {
    dets.sort_by(|a, b| {
        a.frame
            .cmp(&b.frame)
            .then(a.centroid.0.total_cmp(&b.centroid.0))
            .then(a.centroid.1.total_cmp(&b.centroid.1))
    });
}

/// Runs every cube in order. On a solver failure the error names the cube
/// and carries the detections of the cubes finished before it.
pub fn detect_sequence(frames: &[Mat], cfg: &PipelineConfig) -> Result<SequenceResult> {
    cfg.validate()?;
    let clips = clip_cubes(frames, cfg.cube_len, cfg.stride)?;
    let mut done = Vec::with_capacity(clips.len());
    for (index, clip) in clips.iter().enumerate() {
        match detect_cube(clip, cfg) {
            Ok(r) => done.push(r),
            Err(source) => {
                let partial = SequenceResult::merge(done);
                return Err(Error::CubeFailure {
                    cube: index,
                    first_frame: clip.start,
                    source: Box::new(source),
                    partial_detections: partial.detections,
                });
            }
        }
    }
    Ok(SequenceResult::merge(done))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize) -> Vec<Mat> {
        (0..n).map(|k| Mat::from_fn(4, 5, |r, c| (r + c + k) as f64)).collect()
    }

    #[test]
    fn windowing_arithmetic() {
        assert_eq!(clip_cubes(&frames(60), 30, 30).unwrap().len(), 2);
        let c = clip_cubes(&frames(35), 30, 30).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].valid, 5);
        assert_eq!((0..30).filter(|&k| c[1].is_padded(k)).count(), 25);
        assert_eq!(c[1].cube.frame(29), frames(35)[34]);
        let one = clip_cubes(&frames(30), 30, 30).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].cube, Cube::from_frames(&frames(30)).unwrap());
    }

    #[test]
    fn overlapping_windows_own_disjoint_frames() {
        let c = clip_cubes(&frames(50), 30, 10).unwrap();
        let mut owned = Vec::new();
        for clip in &c {
            owned.extend(clip.owned_slices().map(|k| clip.start + k));
        }
        assert_eq!(owned, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn windowing_errors() {
        assert!(clip_cubes(&frames(1), 30, 30).is_err());
        let mut f = frames(5);
        f[3] = Mat::zeros(2, 2);
        assert!(clip_cubes(&f, 4, 4).is_err());
        assert!(clip_cubes(&frames(5), 4, 5).is_err());
    }

    #[test]
    fn zero_slice_has_no_detections() {
        let (mask, dets) = segment_targets(&Mat::zeros(16, 16), 0.1, 5.0, 0);
        assert!(dets.is_empty());
        assert!(mask.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_hot_slice() {
        let mut s = Mat::zeros(64, 64);
        s[(10, 20)] = 10.0;
        // μ = 10/4096, σ² = 100/4096 − μ²
        let mu = 10.0 / 4096.0;
        let sigma = (100.0f64 / 4096.0 - mu * mu).sqrt();
        let t = segmentation_threshold(&s, 0.0, 5.0);
        assert!((t - (mu + 5.0 * sigma)).abs() < 1e-12);
        assert!((t - 0.783_59).abs() < 1e-4);
        let (_, dets) = segment_targets(&s, 0.0, 5.0, 7);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].area, 1);
        assert_eq!(dets[0].score, 10.0);
        assert_eq!(dets[0].frame, 7);
        assert_eq!(dets[0].centroid, (10.0, 20.0));
    }

    #[test]
    fn two_blobs() {
        let mut s = Mat::zeros(32, 32);
        for (r, c) in [(4, 4), (4, 5), (5, 4), (5, 5)] {
            s[(r, c)] = 5.0;
        }
        for (r, c) in [(20, 10), (20, 11), (21, 10), (21, 11)] {
            s[(r, c)] = 3.0;
        }
        let (_, dets) = segment_targets(&s, 0.1, 3.0, 0);
        assert_eq!(dets.len(), 2);
        assert_eq!(dets[0].bbox, BBox { r0: 4, c0: 4, r1: 5, c1: 5 });
        assert_eq!(dets[1].bbox, BBox { r0: 20, c0: 10, r1: 21, c1: 11 });
        assert_eq!(dets[0].area, 4);
        assert_eq!(dets[1].centroid, (20.5, 10.5));
    }

    #[test]
    fn diagonal_neighbors_connect() {
        let mask = [true, false, false, true];
        assert_eq!(connected_components(&mask, 2, 2).len(), 1);
    }
}
