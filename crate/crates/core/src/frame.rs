use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::ImagePlane;

/// Storage precision of a frame's samples.
///
/// Samples are always held as `f64` in memory; quantized depths keep them on
/// the grid `k / (2^bits - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitDepth {
    Float32,
    U16,
    U8,
}

impl BitDepth {
    /// Integer bit width, `None` for float storage.
    pub fn bits(self) -> Option<u32> {
        match self {
            BitDepth::Float32 => None,
            BitDepth::U16 => Some(16),
            BitDepth::U8 => Some(8),
        }
    }

    pub fn max_level(self) -> Option<u32> {
        self.bits().map(|b| ((1u64 << b) - 1) as u32)
    }

    pub fn is_quantized(self) -> bool {
        self.bits().is_some()
    }
}

impl std::str::FromStr for BitDepth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "float32" | "f32" => Ok(BitDepth::Float32),
            "u16" => Ok(BitDepth::U16),
            "u8" => Ok(BitDepth::U8),
            other => Err(format!(
                "unknown bit depth `{other}` (expected float32, u16 or u8)"
            )),
        }
    }
}

impl std::fmt::Display for BitDepth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BitDepth::Float32 => "float32",
            BitDepth::U16 => "u16",
            BitDepth::U8 => "u8",
        })
    }
}

/// A video frame: one luma plane or three RGB planes of equal size.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    planes: Vec<ImagePlane>,
    bit_depth: BitDepth,
    index: u64,
}

impl Frame {
    pub fn new(planes: Vec<ImagePlane>, bit_depth: BitDepth, index: u64) -> Result<Self> {
        if planes.len() != 1 && planes.len() != 3 {
            return Err(Error::InvalidFrame(format!(
                "expected 1 or 3 planes, got {}",
                planes.len()
            )));
        }
        let dims = planes[0].dims();
        if planes.iter().any(|p| p.dims() != dims) {
            return Err(Error::InvalidFrame("planes differ in size".into()));
        }
        Ok(Self {
            planes,
            bit_depth,
            index,
        })
    }

    /// Single-plane float frame.
    pub fn gray(plane: ImagePlane, index: u64) -> Self {
        Self {
            planes: vec![plane],
            bit_depth: BitDepth::Float32,
            index,
        }
    }

    pub fn planes(&self) -> &[ImagePlane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<ImagePlane> {
        self.planes
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.bit_depth
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn with_index(mut self, index: u64) -> Self {
        self.index = index;
        self
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    /// Luma plane; Rec.601 weights for RGB frames.
    pub fn luma(&self) -> Cow<'_, ImagePlane> {
        match self.planes.as_slice() {
            [y] => Cow::Borrowed(y),
            [r, g, b] => {
                let (h, w) = r.dims();
                let samples = r
                    .samples()
                    .iter()
                    .zip(g.samples())
                    .zip(b.samples())
                    .map(|((r, g), b)| 0.299 * r + 0.587 * g + 0.114 * b)
                    .collect();
                Cow::Owned(ImagePlane::new(h, w, samples).expect("planes share dims"))
            }
            _ => unreachable!("frames hold 1 or 3 planes"),
        }
    }

    /// Applies `f` to every plane; the result is a float frame.
    pub fn map_planes(&self, f: impl Fn(&ImagePlane) -> ImagePlane) -> Frame {
        Frame {
            planes: self.planes.iter().map(f).collect(),
            bit_depth: BitDepth::Float32,
            index: self.index,
        }
    }

    pub fn scaled(&self, c: f64) -> Frame {
        self.map_planes(|p| p.scaled(c))
    }

    pub(crate) fn with_planes(&self, planes: Vec<ImagePlane>, bit_depth: BitDepth) -> Frame {
        Frame {
            planes,
            bit_depth,
            index: self.index,
        }
    }
}
