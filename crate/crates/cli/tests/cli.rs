use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sdd_cli::io::{decode_raw_cube, encode_raw_cube, load_sequence, read_raw_cube, write_gray8, write_raw_cube, write_unit16};
use sdd_cli::records::{read_detections, read_ground_truth};
use sdd_core::Mat;

fn sdd(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sdd"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SDD_THREADS", t),
        None => cmd.env_remove("SDD_THREADS"),
    };
    cmd.output().expect("running sdd")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a standard scene with `frames` frames and returns its directory.
fn make_scene(root: &Path, seed: u64, frames: usize) -> PathBuf {
    let spec = root.join(format!("spec{seed}.txt"));
    fs::write(&spec, format!("preset = standard\nseed = {seed}\nscr = 8\nnoise_std = 5\nframes = {frames}\n")).unwrap();
    let out = root.join(format!("scene{seed}"));
    let o = sdd(&["synth", "--spec", p(&spec), "--out", p(&out)], None);
    assert!(o.status.success(), "synth failed: {}", stderr(&o));
    out
}

#[test]
fn synth_detect_eval_roc_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = make_scene(tmp.path(), 1, 30);
    let gt = read_ground_truth(&scene.join("gt.csv")).unwrap();
    assert_eq!(gt.len(), 30);
    assert_eq!(fs::read_dir(scene.join("frames")).unwrap().count(), 30);

    let det = tmp.path().join("det");
    let o = sdd(&["detect", "--in", p(&scene.join("frames")), "--out", p(&det)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("gamma = 0.03") && stdout.contains("cube_len = 30"), "{stdout}");
    let dets = read_detections(&det.join("detections.csv")).unwrap();
    assert!(!dets.is_empty());
    for sub in ["target", "background", "mask"] {
        assert_eq!(fs::read_dir(det.join(sub)).unwrap().count(), 30, "{sub}");
    }
    let targets = read_raw_cube(&det.join("target.sdd")).unwrap();
    assert_eq!(targets.len(), 30);
    let masks = load_sequence(&det.join("mask")).unwrap();
    assert!(masks.iter().all(|m| m.as_slice().iter().all(|&v| v == 0.0 || v == 1.0)));

    let ev = tmp.path().join("eval");
    let o = sdd(
        &[
            "eval", "--detections", p(&det.join("detections.csv")), "--gt", p(&scene.join("gt.csv")),
            "--orig", p(&scene.join("frames")), "--target", p(&det.join("target.sdd")), "--out", p(&ev),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = fs::read_to_string(ev.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "frame,row,col,detected,bsf,gscr,cg");
    assert_eq!(lines.len(), 32);
    assert!(lines[31].starts_with("mean,,,"));

    let o = sdd(&["roc", "--scores", p(&det.join("target.sdd")), "--gt", p(&scene.join("gt.csv")), "--out", p(&ev)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let roc = fs::read_to_string(ev.join("roc.csv")).unwrap();
    assert!(roc.starts_with("threshold,fa,pd,auc_raw,auc_normalized\n"));
}

#[test]
fn detect_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = make_scene(tmp.path(), 2, 40);
    let mut outputs = Vec::new();
    for (i, threads) in [Some("1"), Some("4"), None].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let o = sdd(&["detect", "--in", p(&scene.join("frames")), "--out", p(&out)], threads);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((
            fs::read(out.join("detections.csv")).unwrap(),
            fs::read(out.join("trace.csv")).unwrap(),
            fs::read(out.join("target.sdd")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.txt");
    fs::write(&cfg, "gamma = 0.05\nmystery_knob = 1\n").unwrap();
    let o = sdd(&["detect", "--in", "unused", "--config", p(&cfg), "--out", p(tmp.path())], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mystery_knob"));
    let o = sdd(&["detect", "--in", "unused", "--set", "nope=1", "--out", p(tmp.path())], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sdd(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(sdd(&["detect"], None).status.code(), Some(2));
    assert_eq!(sdd(&["--help"], None).status.code(), Some(0));
    let o = sdd(&["roc", "--scores", "x", "--gt", "y"], Some("many"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing");
    let o = sdd(&["detect", "--in", p(&missing), "--out", p(tmp.path())], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing"));
}

#[test]
fn solver_failure_has_its_own_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = make_scene(tmp.path(), 3, 30);
    let out = tmp.path().join("det");
    let o = sdd(&["detect", "--in", p(&scene.join("frames")), "--set", "lambda=1e308", "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("cube 0"));
    assert!(out.join("detections.partial.csv").exists());
    assert!(!out.join("detections.csv").exists());
}

#[test]
fn roc_on_the_single_detection_example() {
    let tmp = tempfile::tempdir().unwrap();
    let mut m = Mat::zeros(16, 16);
    m[(8, 8)] = 1.0;
    let scores = tmp.path().join("scores.sdd");
    write_raw_cube(&scores, &[m]).unwrap();
    let gt = tmp.path().join("gt.csv");
    fs::write(&gt, "frame,row,col\n0,8,8\n").unwrap();
    let o = sdd(&["roc", "--scores", p(&scores), "--gt", p(&gt), "--out", p(tmp.path())], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("roc.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1.000000")), "{text}");
    assert!(text.lines().any(|l| l.contains(",0.000000,1.000000,")), "{text}");
}

#[test]
fn raw_cube_round_trip_is_bit_identical() {
    let frames: Vec<Mat> = (0..3)
        .map(|k| Mat::from_fn(4, 5, |r, c| (r * 5 + c + 20 * k) as f64 / 64.0 - 0.3))
        .collect();
    let bytes = encode_raw_cube(&frames).unwrap();
    assert_eq!(&bytes[..4], b"SDD1");
    assert_eq!(&bytes[4..16], &[4, 0, 0, 0, 5, 0, 0, 0, 3, 0, 0, 0]);
    assert_eq!(bytes.len(), 16 + 4 * 60);
    // frame-major, row-major within a frame
    assert_eq!(&bytes[16 + 4 * 21..16 + 4 * 22], &(frames[1][(0, 1)] as f32).to_le_bytes());
    let back = decode_raw_cube(&bytes).unwrap();
    assert_eq!(encode_raw_cube(&back).unwrap(), bytes);

    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.sdd");
    write_raw_cube(&path, &back).unwrap();
    assert_eq!(fs::read(&path).unwrap(), bytes);

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(decode_raw_cube(&bad).unwrap_err().to_string().contains("magic"));
    assert!(decode_raw_cube(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn image_directories_load_normalized_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("seq");
    let img = Mat::from_fn(8, 6, |r, c| (r * 6 + c) as f64 * 5.0);
    for k in 0..3 {
        write_gray8(&dir.join(format!("f{k}.pgm")), &img.map(|v| v + k as f64)).unwrap();
    }
    fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let frames = load_sequence(&dir).unwrap();
    assert_eq!(frames.len(), 3);
    assert_eq!(frames[2][(1, 1)], (35.0 + 2.0) / 255.0);

    let wide = tmp.path().join("wide");
    write_unit16(&wide.join("a.png"), &Mat::from_fn(2, 2, |r, c| if r + c == 0 { 1.0 } else { 0.5 })).unwrap();
    let w = load_sequence(&wide).unwrap();
    assert_eq!(w[0][(0, 0)], 1.0);
    assert_eq!(w[0][(1, 1)], 32768.0 / 65535.0);
}

#[test]
fn mismatched_frame_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("seq");
    for k in 0..3 {
        write_gray8(&dir.join(format!("f{k}.pgm")), &Mat::zeros(8, 8)).unwrap();
    }
    write_gray8(&dir.join("f1.pgm"), &Mat::zeros(8, 9)).unwrap();
    let err = format!("{:#}", load_sequence(&dir).unwrap_err());
    assert!(err.contains("f1.pgm"), "{err}");
    fs::write(dir.join("f2.pgm"), b"not an image").unwrap();
    write_gray8(&dir.join("f1.pgm"), &Mat::zeros(8, 8)).unwrap();
    let err = format!("{:#}", load_sequence(&dir).unwrap_err());
    assert!(err.contains("f2.pgm"), "{err}");
}

#[test]
fn identical_frames_load_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("seq");
    let img = Mat::from_fn(64, 64, |r, c| ((r * 3 + c) % 256) as f64);
    for k in 0..30 {
        write_gray8(&dir.join(format!("frame_{k:03}.pgm")), &img).unwrap();
    }
    let frames = load_sequence(&dir).unwrap();
    assert_eq!(frames.len(), 30);
    assert!(frames.iter().all(|f| f == &frames[0]));
}
