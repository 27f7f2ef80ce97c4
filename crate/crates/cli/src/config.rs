//! Flat `key = value` configuration for `detect` and scene recipes for
//! `synth`. Blank lines and `#` comments are ignored. Unknown keys are
//! rejected with [`ConfigError`], which maps to exit code 2.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sdd_core::pipeline::PipelineConfig;
use sdd_core::synth::{SceneSpec, TargetSpec};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// One `key = value` entry with where it came from, for error messages.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: String,
}

pub fn parse_entries(text: &str, source: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = format!("{source}:{}", n + 1);
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!("{origin}: expected key = value, got {line:?}")));
        };
        out.push(Entry {
            key: k.trim().to_string(),
            value: v.trim().to_string(),
            origin,
        });
    }
    Ok(out)
}

pub fn read_entries(path: &Path) -> anyhow::Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(parse_entries(&text, &path.display().to_string())?)
}

/// Entries from `--set key=value` flags.
pub fn flag_entries(flags: &[String]) -> Result<Vec<Entry>, ConfigError> {
    flags
        .iter()
        .map(|f| {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("--set expects key=value, got {f:?}")))?;
            Ok(Entry {
                key: k.trim().to_string(),
                value: v.trim().to_string(),
                origin: "--set".into(),
            })
        })
        .collect()
}

fn parse<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError(format!("{}: bad value {:?} for {}", e.origin, e.value, e.key)))
}

fn parse_list<const N: usize>(e: &Entry) -> Result<[f64; N], ConfigError> {
    let bad = || ConfigError(format!("{}: {} needs {N} comma-separated numbers, got {:?}", e.origin, e.key, e.value));
    let parts: Vec<f64> = e
        .value
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| bad())
}

/// Parses `a,b,c` weights given on the command line.
pub fn parse_alpha(value: &str) -> Result<[f64; 3], ConfigError> {
    parse_list::<3>(&Entry {
        key: "alpha".into(),
        value: value.into(),
        origin: "--alpha".into(),
    })
}

/// Keys accepted by [`apply_pipeline`], in the order they are printed.
pub const PIPELINE_KEYS: &[&str] = &[
    "cube_len", "stride", "c_min", "d_thresh", "rank", "lambda", "gamma", "beta", "rho", "t_prox",
    "bind_t_prox_to_rho", "epsilon", "k_max", "l_max", "tol_outer", "tol_inner", "seed", "sigma",
    "alpha", "delta",
];

/// Applies entries in order. `stride` follows `cube_len` unless set.
pub fn apply_pipeline(cfg: &mut PipelineConfig, entries: &[Entry]) -> Result<(), ConfigError> {
    let mut stride_set = false;
    for e in entries {
        let s = &mut cfg.solver;
        match e.key.as_str() {
            "cube_len" => {
                cfg.cube_len = parse(e)?;
                if !stride_set {
                    cfg.stride = cfg.cube_len;
                }
            }
            "stride" => {
                cfg.stride = parse(e)?;
                stride_set = true;
            }
            "c_min" => cfg.c_min = parse(e)?,
            "d_thresh" => cfg.d_thresh = parse(e)?,
            "rank" => s.rank = parse(e)?,
            "lambda" => s.lambda = parse(e)?,
            "gamma" => s.gamma = parse(e)?,
            "beta" => s.beta = parse(e)?,
            "rho" => s.rho = parse(e)?,
            "t_prox" => s.t_prox = parse(e)?,
            "bind_t_prox_to_rho" => s.bind_t_prox_to_rho = parse(e)?,
            "epsilon" => s.epsilon = parse(e)?,
            "k_max" => s.k_max = parse(e)?,
            "l_max" => s.l_max = parse(e)?,
            "tol_outer" => s.tol_outer = parse(e)?,
            "tol_inner" => s.tol_inner = parse(e)?,
            "seed" => s.seed = parse(e)?,
            "sigma" => cfg.asce.sigma = parse(e)?,
            "alpha" => cfg.asce.alpha = parse_list::<3>(e)?,
            "delta" => cfg.asce.delta = parse(e)?,
            other => return Err(ConfigError(format!("{}: unknown config key {other:?}", e.origin))),
        }
    }
    cfg.validate().map_err(|err| ConfigError(format!("invalid config: {err}")))
}

/// The resolved configuration in the same `key = value` syntax.
pub fn render_pipeline(cfg: &PipelineConfig) -> String {
    let s = &cfg.solver;
    let a = cfg.asce.alpha;
    let values: Vec<String> = vec![
        cfg.cube_len.to_string(),
        cfg.stride.to_string(),
        cfg.c_min.to_string(),
        cfg.d_thresh.to_string(),
        s.rank.to_string(),
        s.lambda.to_string(),
        s.gamma.to_string(),
        s.beta.to_string(),
        s.rho.to_string(),
        s.t_prox.to_string(),
        s.bind_t_prox_to_rho.to_string(),
        s.epsilon.to_string(),
        s.k_max.to_string(),
        s.l_max.to_string(),
        s.tol_outer.to_string(),
        s.tol_inner.to_string(),
        s.seed.to_string(),
        cfg.asce.sigma.to_string(),
        format!("{},{},{}", a[0], a[1], a[2]),
        cfg.asce.delta.to_string(),
    ];
    let mut out = String::new();
    for (k, v) in PIPELINE_KEYS.iter().zip(values) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Builds a scene recipe. `preset = standard` starts from the benchmark
/// scene (using `seed`, `scr` and `noise_std`); every other key then
/// overrides a field. Any `target = row,col,v_row,v_col,sigma,scr` lines
/// replace the preset's targets.
pub fn scene_from_entries(entries: &[Entry]) -> Result<SceneSpec, ConfigError> {
    let find = |k: &str| entries.iter().rev().find(|e| e.key == k);
    let preset = find("preset");
    let mut spec = match preset.map(|e| e.value.as_str()) {
        Some("standard") => {
            let seed = find("seed").map(parse).transpose()?.unwrap_or(0);
            let scr = find("scr").map(parse).transpose()?.unwrap_or(8.0);
            let noise = find("noise_std").map(parse).transpose()?.unwrap_or(5.0);
            SceneSpec::standard(seed, scr, noise)
        }
        Some(other) => {
            let e = preset.unwrap();
            return Err(ConfigError(format!("{}: unknown preset {other:?}", e.origin)));
        }
        None => SceneSpec::default(),
    };
    let mut targets = Vec::new();
    for e in entries {
        let bg = &mut spec.background;
        match e.key.as_str() {
            "preset" => {}
            "scr" if preset.is_some() => {}
            "rows" => spec.rows = parse(e)?,
            "cols" => spec.cols = parse(e)?,
            "frames" => spec.frames = parse(e)?,
            "seed" => spec.seed = parse(e)?,
            "noise_std" => spec.noise_std = parse(e)?,
            "level" => bg.level = parse(e)?,
            "gradient" => bg.gradient = parse(e)?,
            "bumps" => bg.bumps = parse(e)?,
            "bump_amplitude" => bg.bump_amplitude = parse(e)?,
            "bump_scale" => bg.bump_scale = parse(e)?,
            "drift" => {
                let [r, c] = parse_list::<2>(e)?;
                bg.drift = (r, c);
            }
            "edges" => spec.clutter.edges = parse(e)?,
            "edge_step" => spec.clutter.step = parse(e)?,
            "edge_orientation" => {
                spec.clutter.orientation = match e.value.as_str() {
                    "random" => None,
                    _ => Some(parse(e)?),
                }
            }
            "target" => {
                let [r, c, vr, vc, sigma, scr] = parse_list::<6>(e)?;
                targets.push(TargetSpec {
                    start: (r, c),
                    velocity: (vr, vc),
                    sigma,
                    scr,
                });
            }
            other => return Err(ConfigError(format!("{}: unknown scene key {other:?}", e.origin))),
        }
    }
    if !targets.is_empty() {
        spec.targets = targets;
    }
    Ok(spec)
}

pub fn render_scene(spec: &SceneSpec) -> String {
    let bg = &spec.background;
    let mut out = String::new();
    let _ = writeln!(out, "rows = {}", spec.rows);
    let _ = writeln!(out, "cols = {}", spec.cols);
    let _ = writeln!(out, "frames = {}", spec.frames);
    let _ = writeln!(out, "seed = {}", spec.seed);
    let _ = writeln!(out, "noise_std = {}", spec.noise_std);
    let _ = writeln!(out, "level = {}", bg.level);
    let _ = writeln!(out, "gradient = {}", bg.gradient);
    let _ = writeln!(out, "bumps = {}", bg.bumps);
    let _ = writeln!(out, "bump_amplitude = {}", bg.bump_amplitude);
    let _ = writeln!(out, "bump_scale = {}", bg.bump_scale);
    let _ = writeln!(out, "drift = {},{}", bg.drift.0, bg.drift.1);
    let _ = writeln!(out, "edges = {}", spec.clutter.edges);
    let _ = writeln!(out, "edge_step = {}", spec.clutter.step);
    match spec.clutter.orientation {
        Some(o) => {
            let _ = writeln!(out, "edge_orientation = {o}");
        }
        None => {
            let _ = writeln!(out, "edge_orientation = random");
        }
    }
    for t in &spec.targets {
        let _ = writeln!(
            out,
            "target = {},{},{},{},{},{}",
            t.start.0, t.start.1, t.velocity.0, t.velocity.1, t.sigma, t.scr
        );
    }
    out
}
