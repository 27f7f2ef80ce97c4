use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use sdd_core::metrics::{self, GtPoint, TargetAnnotation};
use sdd_core::pipeline::{clip_cubes, detect_cube, CubeResult, PipelineConfig, SequenceResult};
use sdd_core::saliency::{asce as asce_map, AsceParams};
use sdd_core::synth::generate;
use sdd_core::Mat;

use crate::config::{self, ConfigError};
use crate::io;
use crate::records::{self, MetricsRow};
use crate::{AsceArgs, DetectArgs, EvalArgs, RocArgs, SynthArgs};

pub fn synth(a: &SynthArgs) -> Result<()> {
    let spec = config::scene_from_entries(&config::read_entries(&a.spec)?)?;
    print!("# resolved scene\n{}", config::render_scene(&spec));
    let scene = generate(&spec)?;
    let frames_dir = a.out.join("frames");
    for (k, f) in scene.frames.iter().enumerate() {
        io::write_gray8(&io::frame_path(&frames_dir, "frame", k, "pgm"), f)?;
    }
    let gt: Vec<GtPoint> = scene
        .truth
        .centroids()
        .into_iter()
        .map(|(frame, row, col)| GtPoint { frame, row, col })
        .collect();
    records::write_ground_truth(&a.out.join("gt.csv"), &gt)?;
    eprintln!("wrote {} frames and {} ground-truth points to {}", scene.frames.len(), gt.len(), a.out.display());
    Ok(())
}

pub fn asce(a: &AsceArgs) -> Result<()> {
    let params = AsceParams {
        sigma: a.sigma,
        alpha: config::parse_alpha(&a.alpha)?,
        delta: a.delta,
    };
    params.validate().map_err(|e| ConfigError(e.to_string()))?;
    let [a1, a2, a3] = params.alpha;
    println!("# resolved parameters\nsigma = {}\nalpha = {a1},{a2},{a3}\ndelta = {}", params.sigma, params.delta);
    let frames = io::load_sequence(&a.input)?;
    let maps = frames
        .par_iter()
        .map(|f| asce_map(f, &params))
        .collect::<sdd_core::Result<Vec<Mat>>>()?;
    for (k, m) in maps.iter().enumerate() {
        io::write_unit16(&io::frame_path(&a.out, "asce", k, "png"), m)?;
    }
    eprintln!("wrote {} ASCE maps to {}", maps.len(), a.out.display());
    Ok(())
}

fn resolve_pipeline(a: &DetectArgs) -> Result<PipelineConfig> {
    let mut entries = match &a.config {
        Some(p) => config::read_entries(p)?,
        None => Vec::new(),
    };
    entries.extend(config::flag_entries(&a.set)?);
    let mut cfg = PipelineConfig::default();
    config::apply_pipeline(&mut cfg, &entries)?;
    Ok(cfg)
}

fn write_sequence_outputs(out: &Path, seq: &SequenceResult) -> Result<()> {
    let targets = out.join("target");
    let backgrounds = out.join("background");
    let masks = out.join("mask");
    for (k, ((t, b), m)) in seq
        .target_frames
        .iter()
        .zip(&seq.background_frames)
        .zip(&seq.masks)
        .enumerate()
    {
        io::write_unit16(&io::frame_path(&targets, "target", k, "png"), t)?;
        io::write_unit16(&io::frame_path(&backgrounds, "background", k, "png"), b)?;
        io::write_gray8(&io::frame_path(&masks, "mask", k, "png"), &m.map(|v| v * 255.0))?;
    }
    io::write_raw_cube(&out.join("target.sdd"), &seq.target_frames)?;
    io::write_raw_cube(&out.join("background.sdd"), &seq.background_frames)?;
    Ok(())
}

pub fn detect(a: &DetectArgs) -> Result<()> {
    let cfg = resolve_pipeline(a)?;
    print!("# resolved config\n{}", config::render_pipeline(&cfg));
    let frames = io::load_sequence(&a.input)?;
    let clips = clip_cubes(&frames, cfg.cube_len, cfg.stride)?;
    // cubes are independent; results are merged in cube order
    let results: Vec<sdd_core::Result<CubeResult>> = clips.par_iter().map(|c| detect_cube(c, &cfg)).collect();
    let mut done = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(c) => done.push(c),
            Err(source) => {
                let partial = SequenceResult::merge(done);
                records::write_detections(&a.out.join("detections.partial.csv"), &partial.detections)?;
                records::write_trace(&a.out.join("trace.partial.csv"), &partial.traces)?;
                return Err(sdd_core::Error::CubeFailure {
                    cube: index,
                    first_frame: clips[index].start,
                    source: Box::new(source),
                    partial_detections: partial.detections,
                }
                .into());
            }
        }
    }
    let seq = SequenceResult::merge(done);
    records::write_detections(&a.out.join("detections.csv"), &seq.detections)?;
    records::write_trace(&a.out.join("trace.csv"), &seq.traces)?;
    write_sequence_outputs(&a.out, &seq)?;
    eprintln!(
        "{} detections in {} frames ({} cubes); outputs in {}",
        seq.detections.len(),
        frames.len(),
        seq.traces.len(),
        a.out.display()
    );
    Ok(())
}

fn defined(r: sdd_core::Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(sdd_core::Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    println!(
        "# resolved parameters\nbox = {}\nd = {}\nomega = {}\nscale = {}\nwindow = {}",
        a.box_size, a.d, a.omega, a.scale, a.window
    );
    if a.box_size == 0 || !(a.omega > 0.0) || !(a.scale > 0.0) {
        return Err(ConfigError("box, omega and scale must be positive".into()).into());
    }
    let gt = records::read_ground_truth(&a.gt)?;
    let dets = records::read_detections(&a.detections)?;
    let orig = io::load_sequence(&a.orig)?;
    let target = io::load_sequence(&a.target)?;
    if orig.len() != target.len() {
        bail!("{} has {} frames, {} has {}", a.orig.display(), orig.len(), a.target.display(), target.len());
    }
    let half = (a.window / 2) as f64;
    let mut rows = Vec::with_capacity(gt.len());
    for g in &gt {
        let (Some(o), Some(t)) = (orig.get(g.frame), target.get(g.frame)) else {
            bail!("{}: frame {} is outside the {}-frame sequence", a.gt.display(), g.frame, orig.len());
        };
        if o.shape() != t.shape() {
            bail!("frame {} shapes differ: {:?} vs {:?}", g.frame, o.shape(), t.shape());
        }
        let mut ann = TargetAnnotation::centered(g.frame, g.row, g.col, a.box_size, o.shape());
        ann.d = a.d;
        let o = o.map(|v| v * a.scale);
        let t = t.map(|v| v * a.scale);
        let detected = dets.iter().any(|d| {
            d.frame == g.frame
                && (d.centroid.0.round() - g.row.round()).abs() <= half
                && (d.centroid.1.round() - g.col.round()).abs() <= half
        });
        rows.push(MetricsRow {
            gt: *g,
            detected,
            bsf: defined(metrics::bsf(&o, &t, &ann, a.omega))?,
            gscr: defined(metrics::gscr(&o, &t, &ann, a.omega))?,
            cg: defined(metrics::cg(&o, &t, &ann))?,
        });
    }
    let path = a.out.join("metrics.csv");
    records::write_metrics(&path, &rows)?;
    let hits = rows.iter().filter(|r| r.detected).count();
    eprintln!("{hits}/{} ground-truth targets detected; metrics in {}", rows.len(), path.display());
    Ok(())
}

pub fn roc(a: &RocArgs) -> Result<()> {
    println!("# resolved parameters\nwindow = {}", a.window);
    let scores = io::load_sequence(&a.scores)?;
    let gt = records::read_ground_truth(&a.gt)?;
    let curve = metrics::roc(&scores, &gt, a.window).context("computing the ROC")?;
    let path = a.out.join("roc.csv");
    records::write_roc(&path, &curve)?;
    eprintln!(
        "auc_raw {:.6}, auc_normalized {:.6}; curve in {}",
        curve.auc_raw,
        curve.auc_normalized,
        path.display()
    );
    Ok(())
}
