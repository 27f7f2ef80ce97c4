//! Seeded synthetic infrared sequences with ground truth.
//!
//! A scene is a smooth background (a plane plus slowly drifting Gaussian
//! bumps, low rank across frames), static oriented step edges as
//! directional clutter, moving Gaussian point targets whose amplitude is
//! solved per frame to hit a requested SCR, and white Gaussian noise.
//! Frames come out on the 8-bit intensity scale, clamped and rounded.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::metrics::{scr, TargetAnnotation, DEFAULT_NEIGHBORHOOD, DEFAULT_OMEGA};
use crate::pipeline::BBox;
use crate::tensor::Mat;
use crate::{Error, Result};

/// Largest 8-bit intensity.
pub const CONTAINER_MAX: f64 = 255.0;

/// Relative SCR tolerance the amplitude search must reach.
pub const SCR_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundSpec {
    /// Mean gray level.
    pub level: f64,
    /// Peak-to-peak amplitude of the tilted plane across the frame.
    pub gradient: f64,
    pub bumps: usize,
    /// Peak amplitude of each bump (sign drawn at random).
    pub bump_amplitude: f64,
    /// Gaussian scale of each bump in pixels.
    pub bump_scale: f64,
    /// Bump drift `(rows, cols)` per frame.
    pub drift: (f64, f64),
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        BackgroundSpec {
            level: 30.0,
            gradient: 20.0,
            bumps: 3,
            bump_amplitude: 10.0,
            bump_scale: 10.0,
            drift: (0.1, 0.05),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClutterSpec {
    pub edges: usize,
    /// Height of each step.
    pub step: f64,
    /// Edge direction in degrees; random per edge when `None`.
    pub orientation: Option<f64>,
}

impl Default for ClutterSpec {
    fn default() -> Self {
        ClutterSpec {
            edges: 2,
            step: 15.0,
            orientation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetSpec {
    /// Center `(row, col)` in frame 0.
    pub start: (f64, f64),
    /// Pixels per frame `(rows, cols)`.
    pub velocity: (f64, f64),
    /// Gaussian blob scale in pixels.
    pub sigma: f64,
    /// Requested SCR in every frame.
    pub scr: f64,
}

impl TargetSpec {
    pub fn position(&self, frame: usize) -> (f64, f64) {
        (
            self.start.0 + self.velocity.0 * frame as f64,
            self.start.1 + self.velocity.1 * frame as f64,
        )
    }

    /// Side of the square box used as the target extent.
    pub fn box_size(&self) -> usize {
        2 * math::round(1.5 * self.sigma) as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
    pub background: BackgroundSpec,
    pub clutter: ClutterSpec,
    pub targets: Vec<TargetSpec>,
    /// Standard deviation of the additive noise, 8-bit scale.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            rows: 64,
            cols: 64,
            frames: 30,
            background: BackgroundSpec::default(),
            clutter: ClutterSpec::default(),
            targets: Vec::new(),
            noise_std: 1.5,
            seed: 0,
        }
    }
}

impl SceneSpec {
    /// The benchmark scene: 64×64×30, default background and two edges,
    /// one target with a seeded trajectory kept 10 px from the borders.
    pub fn standard(seed: u64, scr: f64, noise_std: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7a26_e7);
        let (rows, cols, frames) = (64usize, 64usize, 30usize);
        let margin = 10.0;
        let speed = 0.3 + 0.4 * rng.random::<f64>();
        let angle = 2.0 * PI * rng.random::<f64>();
        let velocity = (speed * math::sin(angle), speed * math::cos(angle));
        let travel = (velocity.0 * (frames - 1) as f64, velocity.1 * (frames - 1) as f64);
        let pick = |rng: &mut ChaCha8Rng, n: usize, d: f64| {
            let lo = margin - d.min(0.0);
            let hi = n as f64 - 1.0 - margin - d.max(0.0);
            lo + (hi - lo) * rng.random::<f64>()
        };
        let start = (pick(&mut rng, rows, travel.0), pick(&mut rng, cols, travel.1));
        SceneSpec {
            rows,
            cols,
            frames,
            targets: vec![TargetSpec {
                start,
                velocity,
                sigma: 0.7 + 0.8 * rng.random::<f64>(),
                scr,
            }],
            noise_std,
            seed,
            ..SceneSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 || self.frames < 1 {
            return Err(Error::Spec(format!(
                "scene must be at least 2x2x1, got {}x{}x{}",
                self.rows, self.cols, self.frames
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Spec("noise_std must be >= 0".into()));
        }
        if !(self.background.bump_scale > 0.0) {
            return Err(Error::Spec("bump_scale must be > 0".into()));
        }
        for (n, t) in self.targets.iter().enumerate() {
            if !(t.scr > 0.0) {
                return Err(Error::Spec(format!("target {n}: SCR must be > 0")));
            }
            if !(t.sigma > 0.0) {
                return Err(Error::Spec(format!("target {n}: sigma must be > 0")));
            }
            for f in [0, self.frames - 1] {
                let (r, c) = t.position(f);
                if r < 0.0 || c < 0.0 || r > (self.rows - 1) as f64 || c > (self.cols - 1) as f64 {
                    return Err(Error::Spec(format!(
                        "target {n} leaves the frame at frame {f}: ({r:.2}, {c:.2})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A straight step edge: pixels with `normal · (x − anchor) ≥ 0` are raised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeLine {
    pub anchor: (f64, f64),
    pub normal: (f64, f64),
    pub step: f64,
}

impl EdgeLine {
    /// Signed distance of pixel `(r, c)` from the edge line.
    pub fn signed_distance(&self, r: f64, c: f64) -> f64 {
        self.normal.0 * (r - self.anchor.0) + self.normal.1 * (c - self.anchor.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetTruth {
    pub id: usize,
    /// Subpixel center.
    pub row: f64,
    pub col: f64,
    pub bbox: BBox,
    /// Blob peak amplitude used in this frame.
    pub amplitude: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameTruth {
    pub targets: Vec<TargetTruth>,
    /// 1 where any target layer is at least 1% of its peak, else 0.
    pub mask: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub frames: Vec<FrameTruth>,
}

impl GroundTruth {
    /// `(frame, row, col)` of every target in every frame.
    pub fn centroids(&self) -> Vec<(usize, f64, f64)> {
        self.frames
            .iter()
            .enumerate()
            .flat_map(|(k, f)| f.targets.iter().map(move |t| (k, t.row, t.col)))
            .collect()
    }

    pub fn annotations(&self) -> Vec<TargetAnnotation> {
        self.frames
            .iter()
            .enumerate()
            .flat_map(|(k, f)| f.targets.iter().map(move |t| TargetAnnotation::new(k, t.bbox)))
            .collect()
    }
}

/// Generated sequence plus everything needed to score it.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticScene {
    /// Frames on the 8-bit scale (integral values in `[0, 255]`).
    pub frames: Vec<Mat>,
    pub truth: GroundTruth,
    pub edges: Vec<EdgeLine>,
}

impl SyntheticScene {
    /// Frames divided by the container maximum.
    pub fn normalized_frames(&self) -> Vec<Mat> {
        self.frames.iter().map(|f| f.map(|v| v / CONTAINER_MAX)).collect()
    }

    /// Distance from `(r, c)` to the nearest clutter edge.
    pub fn edge_distance(&self, r: f64, c: f64) -> f64 {
        self.edges
            .iter()
            .map(|e| e.signed_distance(r, c).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

struct Bump {
    center: (f64, f64),
    amplitude: f64,
}

fn gaussian_blob(r: f64, c: f64, center: (f64, f64), sigma: f64) -> f64 {
    let dr = r - center.0;
    let dc = c - center.1;
    math::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma))
}

/// Bounding box of a `size × size` target centered at the nearest pixel.
fn target_box(pos: (f64, f64), size: usize, rows: usize, cols: usize) -> BBox {
    TargetAnnotation::centered(0, pos.0, pos.1, size, (rows, cols)).bbox
}

fn quantize(v: f64) -> f64 {
    math::round(v.clamp(0.0, CONTAINER_MAX))
}

/// Generates a scene. Target amplitudes are found by bisection so the SCR
/// measured on the final 8-bit frame is within 5% of the request.
pub fn generate(spec: &SceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let (rows, cols) = (spec.rows, spec.cols);
    let mut layout = ChaCha8Rng::seed_from_u64(spec.seed);

    let bg = &spec.background;
    let tilt = 2.0 * PI * layout.random::<f64>();
    let bumps: Vec<Bump> = (0..bg.bumps)
        .map(|_| {
            let sign = if layout.random::<bool>() { 1.0 } else { -1.0 };
            Bump {
                center: (
                    layout.random::<f64>() * rows as f64,
                    layout.random::<f64>() * cols as f64,
                ),
                amplitude: sign * bg.bump_amplitude * (0.5 + 0.5 * layout.random::<f64>()),
            }
        })
        .collect();
    let edges: Vec<EdgeLine> = (0..spec.clutter.edges)
        .map(|_| {
            let deg = spec
                .clutter
                .orientation
                .unwrap_or_else(|| 180.0 * layout.random::<f64>());
            let theta = deg * PI / 180.0;
            // normal is perpendicular to the edge direction (sin θ, cos θ)
            EdgeLine {
                anchor: (
                    rows as f64 * (0.25 + 0.5 * layout.random::<f64>()),
                    cols as f64 * (0.25 + 0.5 * layout.random::<f64>()),
                ),
                normal: (math::cos(theta), -math::sin(theta)),
                step: spec.clutter.step,
            }
        })
        .collect();

    let diag = math::sqrt((rows * rows + cols * cols) as f64).max(1.0);
    let (tr, tc) = (math::sin(tilt), math::cos(tilt));
    let center = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);

    let mut frames = Vec::with_capacity(spec.frames);
    let mut truth = Vec::with_capacity(spec.frames);
    for k in 0..spec.frames {
        let shift = (bg.drift.0 * k as f64, bg.drift.1 * k as f64);
        let base = Mat::from_fn(rows, cols, |r, c| {
            let (rf, cf) = (r as f64, c as f64);
            let plane = bg.gradient * ((rf - center.0) * tr + (cf - center.1) * tc) / diag;
            let bumps: f64 = bumps
                .iter()
                .map(|b| {
                    let at = (b.center.0 + shift.0, b.center.1 + shift.1);
                    b.amplitude * gaussian_blob(rf, cf, at, bg.bump_scale)
                })
                .sum();
            let clutter: f64 = edges
                .iter()
                .filter(|e| e.signed_distance(rf, cf) >= 0.0)
                .map(|e| e.step)
                .sum();
            bg.level + plane + bumps + clutter
        });
        let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        noise_rng.set_stream(k as u64 + 1);
        let noise = Mat::from_fn(rows, cols, |_, _| {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            spec.noise_std * z
        });
        let clean = Mat::from_fn(rows, cols, |r, c| base[(r, c)] + noise[(r, c)]);

        let layers: Vec<(Mat, (f64, f64), BBox)> = spec
            .targets
            .iter()
            .map(|t| {
                let pos = t.position(k);
                let layer = Mat::from_fn(rows, cols, |r, c| gaussian_blob(r as f64, c as f64, pos, t.sigma));
                (layer, pos, target_box(pos, t.box_size(), rows, cols))
            })
            .collect();
        let compose = |amps: &[f64]| {
            Mat::from_fn(rows, cols, |r, c| {
                let t: f64 = layers
                    .iter()
                    .zip(amps)
                    .map(|((l, _, _), a)| a * l[(r, c)])
                    .sum();
                quantize(clean[(r, c)] + t)
            })
        };

        let mut amps = vec![0.0; spec.targets.len()];
        // two passes so each target sees the others at their final size
        for _pass in 0..2 {
            for n in 0..amps.len() {
                let ann = TargetAnnotation {
                    frame: k,
                    bbox: layers[n].2,
                    d: DEFAULT_NEIGHBORHOOD,
                };
                let want = spec.targets[n].scr;
                let measure = |a: f64, amps: &mut [f64]| -> Result<f64> {
                    amps[n] = a;
                    scr(&compose(amps), &ann, DEFAULT_OMEGA)
                };
                let mut hi = CONTAINER_MAX;
                if measure(hi, &mut amps)? < want * (1.0 - SCR_TOLERANCE) {
                    return Err(Error::Spec(format!(
                        "target {n} cannot reach SCR {want} in frame {k} within the 8-bit range"
                    )));
                }
                let mut lo = 0.0;
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if measure(mid, &mut amps)? < want {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let lo_err = (measure(lo, &mut amps)? - want).abs();
                let hi_err = (measure(hi, &mut amps)? - want).abs();
                amps[n] = if lo_err < hi_err { lo } else { hi };
            }
        }
        let frame = compose(&amps);
        for (n, t) in spec.targets.iter().enumerate() {
            let ann = TargetAnnotation::new(k, layers[n].2);
            let got = scr(&frame, &ann, DEFAULT_OMEGA)?;
            if (got - t.scr).abs() > SCR_TOLERANCE * t.scr {
                return Err(Error::Spec(format!(
                    "target {n} in frame {k}: SCR {got:.3} misses the requested {} by more than 5%",
                    t.scr
                )));
            }
            // the target must stay within the container at its peak
            let (pr, pc) = layers[n].1;
            let peak = clean[(math::round(pr) as usize, math::round(pc) as usize)] + amps[n];
            if peak > CONTAINER_MAX + 0.5 {
                return Err(Error::Spec(format!(
                    "target {n} in frame {k} would exceed the container maximum"
                )));
            }
        }
        let mask = Mat::from_fn(rows, cols, |r, c| {
            let on = layers.iter().any(|(l, _, _)| l[(r, c)] >= 0.01);
            if on {
                1.0
            } else {
                0.0
            }
        });
        truth.push(FrameTruth {
            targets: layers
                .iter()
                .zip(&amps)
                .enumerate()
                .map(|(id, ((_, pos, bbox), &amplitude))| TargetTruth {
                    id,
                    row: pos.0,
                    col: pos.1,
                    bbox: *bbox,
                    amplitude,
                    sigma: spec.targets[id].sigma,
                })
                .collect(),
            mask,
        });
        frames.push(frame);
    }
    Ok(SyntheticScene {
        frames,
        truth: GroundTruth { frames: truth },
        edges,
    })
}
