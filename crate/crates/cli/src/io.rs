//! Sequence files: the raw `SDD1` cube format and directories of 8/16-bit
//! grayscale PGM or PNG frames. Every file is written through a temporary
//! file in the target directory and renamed into place.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma};
use sdd_core::Mat;
use tempfile::NamedTempFile;

pub const RAW_MAGIC: &[u8; 4] = b"SDD1";
const HEADER_LEN: usize = 16;

/// Writes `path` atomically: the closure fills a temporary sibling file,
/// which is then renamed over `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = NamedTempFile::new_in(&dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush().with_context(|| format!("writing {}", path.display()))?;
    }
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?))
}

/// Encodes frames as a raw cube: magic, `n1 n2 n3` as u32 LE, then f32 LE
/// values frame by frame, each frame row-major.
pub fn encode_raw_cube(frames: &[Mat]) -> Result<Vec<u8>> {
    let Some(first) = frames.first() else {
        bail!("cannot write an empty sequence");
    };
    let (n1, n2) = first.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n1 * n2 * frames.len());
    out.extend_from_slice(RAW_MAGIC);
    for d in [n1, n2, frames.len()] {
        out.extend_from_slice(&u32::try_from(d)?.to_le_bytes());
    }
    for (k, f) in frames.iter().enumerate() {
        if f.shape() != (n1, n2) {
            bail!("frame {k} is {:?}, expected {:?}", f.shape(), (n1, n2));
        }
        for &v in f.as_slice() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_raw_cube(bytes: &[u8]) -> Result<Vec<Mat>> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != RAW_MAGIC {
        bail!("bad magic: expected SDD1");
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (n1, n2, n3) = (dim(0), dim(1), dim(2));
    let expected = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(HEADER_LEN))
        .context("cube dimensions overflow")?;
    if bytes.len() != expected {
        bail!("payload is {} bytes, dims {n1}x{n2}x{n3} need {expected}", bytes.len());
    }
    let plane = n1 * n2;
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    (0..n3)
        .map(|k| Ok(Mat::from_vec(n1, n2, values[k * plane..(k + 1) * plane].to_vec())?))
        .collect()
}

pub fn write_raw_cube(path: &Path, frames: &[Mat]) -> Result<()> {
    let bytes = encode_raw_cube(frames)?;
    write_atomic(path, |w| Ok(w.write_all(&bytes)?))
}

pub fn read_raw_cube(path: &Path) -> Result<Vec<Mat>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .with_context(|| format!("reading {}", path.display()))?;
    decode_raw_cube(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn is_frame_file(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
}

/// PGM and PNG files of a directory in lexicographic file-name order.
pub fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .with_context(|| format!("listing {}", dir.display()))?;
    files.retain(|p| is_frame_file(p));
    files.sort();
    if files.is_empty() {
        bail!("{} contains no .pgm or .png frames", dir.display());
    }
    Ok(files)
}

/// Loads one grayscale frame normalized by its container maximum.
pub fn read_frame(path: &Path) -> Result<Mat> {
    let img = ImageReader::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .with_guessed_format()
        .with_context(|| format!("reading {}", path.display()))?
        .decode()
        .with_context(|| format!("decoding {}", path.display()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => bail!(
            "{} is {:?}, expected 8 or 16-bit grayscale",
            path.display(),
            other.color()
        ),
    };
    Ok(Mat::from_vec(h, w, data)?)
}

/// Loads a sequence from a raw cube file (values taken as stored) or a
/// directory of frames (normalized to `[0, 1]`).
pub fn load_sequence(path: &Path) -> Result<Vec<Mat>> {
    if path.is_dir() {
        let files = frame_files(path)?;
        let mut frames = Vec::with_capacity(files.len());
        for f in &files {
            let m = read_frame(f)?;
            if let Some(first) = frames.first() {
                let first: &Mat = first;
                if m.shape() != first.shape() {
                    bail!(
                        "{} is {}x{}, but {} is {}x{}",
                        f.display(),
                        m.rows(),
                        m.cols(),
                        files[0].display(),
                        first.rows(),
                        first.cols()
                    );
                }
            }
            frames.push(m);
        }
        Ok(frames)
    } else {
        read_raw_cube(path)
    }
}

fn encode_image<P>(path: &Path, buf: ImageBuffer<Luma<P>, Vec<P>>) -> Result<()>
where
    P: image::Primitive,
    DynamicImage: From<ImageBuffer<Luma<P>, Vec<P>>>,
{
    let format = ImageFormat::from_path(path)
        .with_context(|| format!("no image format for {}", path.display()))?;
    let img = DynamicImage::from(buf);
    write_atomic(path, |w| {
        img.write_to(w, format)?;
        Ok(())
    })
}

fn dims_u32(m: &Mat) -> Result<(u32, u32)> {
    Ok((u32::try_from(m.cols())?, u32::try_from(m.rows())?))
}

/// 8-bit frame from values already in `[0, 255]` (rounded and clamped).
pub fn write_gray8(path: &Path, m: &Mat) -> Result<()> {
    let (w, h) = dims_u32(m)?;
    let data: Vec<u8> = m.as_slice().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    encode_image(path, ImageBuffer::<Luma<u8>, _>::from_raw(w, h, data).context("image buffer")?)
}

/// 16-bit frame from `[0, 1]` values, clamped and scaled by 65535.
pub fn write_unit16(path: &Path, m: &Mat) -> Result<()> {
    let (w, h) = dims_u32(m)?;
    let data: Vec<u16> = m
        .as_slice()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    encode_image(path, ImageBuffer::<Luma<u16>, _>::from_raw(w, h, data).context("image buffer")?)
}

/// `dir/{prefix}_{frame:06}.{ext}`.
pub fn frame_path(dir: &Path, prefix: &str, frame: usize, ext: &str) -> PathBuf {
    dir.join(format!("{prefix}_{frame:06}.{ext}"))
}
