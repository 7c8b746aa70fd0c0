//! On-disk streams: a directory of numbered frame files plus `manifest.json`.
//!
//! Float frames are stored as PFM (little-endian `f32`, scanlines bottom to
//! top), quantized frames as binary PGM/PPM with maxval 255 or 65535 (16-bit
//! samples big-endian). Files are written byte-for-byte deterministically.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoder::BlurredPair;
use crate::error::{Error, Result};
use crate::frame::{BitDepth, Frame};
use crate::plane::ImagePlane;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Latent,
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamManifest {
    pub version: u32,
    pub role: Role,
    pub frame_count: usize,
    pub width: usize,
    pub height: usize,
    pub bit_depth: BitDepth,
    pub pair_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_width_hint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StreamManifest {
    /// Manifest describing `frames` (dims and depth taken from the first frame).
    pub fn describe(frames: &[Frame], role: Role, pair_id: impl Into<String>) -> Self {
        let (height, width) = frames.first().map_or((0, 0), |f| f.dims());
        Self {
            version: MANIFEST_VERSION,
            role,
            frame_count: frames.len(),
            width,
            height,
            bit_depth: frames.first().map_or(BitDepth::Float32, |f| f.bit_depth()),
            pair_id: pair_id.into(),
            kernel_width_hint: None,
            seed: None,
        }
    }

    /// JSON text with keys in sorted order.
    pub fn to_json(&self) -> String {
        // serde_json maps are BTreeMaps, so going through `Value` sorts keys.
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.frame_count == 0 {
            return Err("frame_count must be at least 1".into());
        }
        if self.width == 0 || self.height == 0 {
            return Err("dimensions must be positive".into());
        }
        Ok(())
    }
}

/// File name of frame `index` for the given depth and channel count.
pub fn frame_file_name(index: usize, depth: BitDepth, channels: usize) -> String {
    let ext = match (depth, channels) {
        (BitDepth::Float32, _) => "pfm",
        (_, 1) => "pgm",
        _ => "ppm",
    };
    format!("frame_{index:06}.{ext}")
}

/// Serializes one frame into its container format.
pub fn encode_frame_file(frame: &Frame) -> Vec<u8> {
    let (h, w) = frame.dims();
    let channels = frame.channels();
    let planes = frame.planes();
    match frame.bit_depth() {
        BitDepth::Float32 => {
            let magic = if channels == 3 { "PF" } else { "Pf" };
            let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
            out.reserve(h * w * channels * 4);
            for r in (0..h).rev() {
                for c in 0..w {
                    for p in planes {
                        out.extend_from_slice(&(p[(r, c)] as f32).to_le_bytes());
                    }
                }
            }
            out
        }
        depth => {
            let max = depth.max_level().expect("integer depth");
            let magic = if channels == 3 { "P6" } else { "P5" };
            let mut out = format!("{magic}\n{w} {h}\n{max}\n").into_bytes();
            let maxf = max as f64;
            for r in 0..h {
                for c in 0..w {
                    for p in planes {
                        let level = (p[(r, c)].clamp(0.0, 1.0) * maxf).round() as u32;
                        if max > 255 {
                            out.extend_from_slice(&(level as u16).to_be_bytes());
                        } else {
                            out.push(level as u8);
                        }
                    }
                }
            }
            out
        }
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> HeaderReader<'a> {
    fn violation(&self, reason: impl Into<String>) -> Error {
        Error::FormatViolation {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_space(&mut self, comments: bool) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if comments && b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, comments: bool) -> Result<&'a str> {
        self.skip_space(comments);
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.violation("unexpected end of header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::FormatViolation {
            path: self.path.to_path_buf(),
            offset: start,
            reason: "non-ASCII header token".into(),
        })
    }

    fn number<T: std::str::FromStr>(&mut self, comments: bool, what: &str) -> Result<T> {
        let start = self.pos;
        let tok = self.token(comments)?;
        tok.parse().map_err(|_| Error::FormatViolation {
            path: self.path.to_path_buf(),
            offset: start,
            reason: format!("bad {what} `{tok}`"),
        })
    }

    /// Consumes the single whitespace byte that ends a header.
    fn end_header(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(self.pos)
            }
            _ => Err(self.violation("header not terminated by whitespace")),
        }
    }
}

/// Parses a PFM/PGM/PPM file into a frame.
pub fn decode_frame_file(bytes: &[u8], path: &Path, index: u64) -> Result<Frame> {
    let mut rd = HeaderReader {
        bytes,
        pos: 0,
        path,
    };
    let magic = rd.token(false)?;
    let (channels, float) = match magic {
        "Pf" => (1, true),
        "PF" => (3, true),
        "P5" => (1, false),
        "P6" => (3, false),
        other => {
            return Err(Error::FormatViolation {
                path: path.to_path_buf(),
                offset: 0,
                reason: format!("unknown magic `{other}`"),
            })
        }
    };
    let comments = !float;
    let w: usize = rd.number(comments, "width")?;
    let h: usize = rd.number(comments, "height")?;
    if w == 0 || h == 0 {
        return Err(rd.violation("zero dimension"));
    }
    let mut planes: Vec<Vec<f64>> = vec![Vec::with_capacity(w * h); channels];
    let depth;
    if float {
        let scale: f64 = rd.number(false, "scale")?;
        if scale == 0.0 || !scale.is_finite() {
            return Err(rd.violation("scale must be finite and nonzero"));
        }
        let data = rd.end_header()?;
        let need = w * h * channels * 4;
        if bytes.len() - data != need {
            return Err(Error::FormatViolation {
                path: path.to_path_buf(),
                offset: bytes.len().min(data + need),
                reason: format!("expected {need} data bytes, found {}", bytes.len() - data),
            });
        }
        for v in planes.iter_mut() {
            v.resize(w * h, 0.0);
        }
        for (k, chunk) in bytes[data..].chunks_exact(4).enumerate() {
            let raw: [u8; 4] = chunk.try_into().unwrap();
            let value = if scale < 0.0 {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            let pixel = k / channels;
            // Scanlines are stored bottom to top.
            let (r, c) = (h - 1 - pixel / w, pixel % w);
            planes[k % channels][r * w + c] = value as f64;
        }
        depth = BitDepth::Float32;
    } else {
        let max: u32 = rd.number(true, "maxval")?;
        depth = match max {
            255 => BitDepth::U8,
            65535 => BitDepth::U16,
            other => return Err(rd.violation(format!("unsupported maxval {other}"))),
        };
        let data = rd.end_header()?;
        let width = if max > 255 { 2 } else { 1 };
        let need = w * h * channels * width;
        if bytes.len() - data != need {
            return Err(Error::FormatViolation {
                path: path.to_path_buf(),
                offset: bytes.len().min(data + need),
                reason: format!("expected {need} data bytes, found {}", bytes.len() - data),
            });
        }
        let maxf = max as f64;
        for (k, chunk) in bytes[data..].chunks_exact(width).enumerate() {
            let level = if width == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            } else {
                chunk[0] as u32
            };
            if level > max {
                return Err(Error::FormatViolation {
                    path: path.to_path_buf(),
                    offset: data + k * width,
                    reason: format!("sample {level} exceeds maxval {max}"),
                });
            }
            planes[k % channels].push(level as f64 / maxf);
        }
    }
    let planes = planes
        .into_iter()
        .map(|s| ImagePlane::new(h, w, s))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::FormatViolation {
            path: path.to_path_buf(),
            offset: 0,
            reason: e.to_string(),
        })?;
    Frame::new(planes, depth, index)
}

/// Writes `frames` and their manifest into `dir`, creating it if needed.
pub fn write_stream(frames: &[Frame], manifest: &StreamManifest, dir: &Path) -> Result<()> {
    manifest.validate().map_err(Error::DimMismatch)?;
    if frames.len() != manifest.frame_count {
        return Err(Error::DimMismatch(format!(
            "manifest lists {} frames, got {}",
            manifest.frame_count,
            frames.len()
        )));
    }
    let channels = frames[0].channels();
    for (i, f) in frames.iter().enumerate() {
        if f.dims() != (manifest.height, manifest.width) {
            return Err(Error::DimMismatch(format!(
                "frame {i} is {:?}, manifest says {}x{}",
                f.dims(),
                manifest.height,
                manifest.width
            )));
        }
        if f.bit_depth() != manifest.bit_depth {
            return Err(Error::DimMismatch(format!(
                "frame {i} has depth {}, manifest says {}",
                f.bit_depth(),
                manifest.bit_depth
            )));
        }
        if f.channels() != channels {
            return Err(Error::DimMismatch(format!(
                "frame {i} changes channel count"
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(i, f.bit_depth(), f.channels()));
        fs::write(&path, encode_frame_file(f)).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<StreamManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: StreamManifest =
        serde_json::from_str(&text).map_err(|e| Error::CorruptManifest {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    manifest
        .validate()
        .map_err(|reason| Error::CorruptManifest { path, reason })?;
    Ok(manifest)
}

fn find_frame(dir: &Path, index: usize, depth: BitDepth) -> Option<PathBuf> {
    let candidates: &[usize] = match depth {
        BitDepth::Float32 => &[1],
        _ => &[1, 3],
    };
    candidates
        .iter()
        .map(|&c| dir.join(frame_file_name(index, depth, c)))
        .find(|p| p.is_file())
}

/// Reads a stream written by [`write_stream`].
pub fn read_stream(dir: &Path) -> Result<(Vec<Frame>, StreamManifest)> {
    let manifest = read_manifest(dir)?;
    let mut frames = Vec::with_capacity(manifest.frame_count);
    for i in 0..manifest.frame_count {
        let path = find_frame(dir, i, manifest.bit_depth).ok_or(Error::MissingFrame(i))?;
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let frame = decode_frame_file(&bytes, &path, i as u64)?;
        if frame.dims() != (manifest.height, manifest.width)
            || frame.bit_depth() != manifest.bit_depth
        {
            return Err(Error::FormatViolation {
                path,
                offset: 0,
                reason: format!(
                    "frame is {:?} at {}, manifest says {}x{} at {}",
                    frame.dims(),
                    frame.bit_depth(),
                    manifest.height,
                    manifest.width,
                    manifest.bit_depth
                ),
            });
        }
        frames.push(frame);
    }
    Ok((frames, manifest))
}

/// Reads a public and a private stream and pairs them frame by frame.
///
/// The kernel width hint is carried only when both manifests state the same
/// value.
pub fn pair_streams(public_dir: &Path, private_dir: &Path) -> Result<Vec<BlurredPair>> {
    let pm = read_manifest(public_dir)?;
    let qm = read_manifest(private_dir)?;
    if pm.pair_id != qm.pair_id {
        return Err(Error::PairMismatch(format!(
            "pair ids differ: `{}` vs `{}`",
            pm.pair_id, qm.pair_id
        )));
    }
    if (pm.height, pm.width) != (qm.height, qm.width) {
        return Err(Error::PairMismatch(format!(
            "dimensions differ: {}x{} vs {}x{}",
            pm.height, pm.width, qm.height, qm.width
        )));
    }
    if pm.frame_count != qm.frame_count {
        return Err(Error::PairMismatch(format!(
            "frame counts differ: {} vs {}",
            pm.frame_count, qm.frame_count
        )));
    }
    let hint = match (pm.kernel_width_hint, qm.kernel_width_hint) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    };
    let (public, _) = read_stream(public_dir)?;
    let (private, _) = read_stream(private_dir)?;
    public
        .into_iter()
        .zip(private)
        .map(|(p, q)| {
            BlurredPair::new(p, q, hint, pm.pair_id.clone())
                .map_err(|e| Error::PairMismatch(e.to_string()))
        })
        .collect()
}
