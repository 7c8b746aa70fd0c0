use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// One channel of a frame, stored row-major.
///
/// The plane doubles as the coefficient array of the bivariate polynomial
/// `b(z1, z2) = sum samples[m][n] * z1^m * z2^n`: the row index is the power
/// of `z1` and the column index the power of `z2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane {
    height: usize,
    width: usize,
    samples: Vec<f64>,
}

impl ImagePlane {
    pub fn new(height: usize, width: usize, samples: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidPlane(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if samples.len() != height * width {
            return Err(Error::InvalidPlane(format!(
                "{height}x{width} plane needs {} samples, got {}",
                height * width,
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPlane(format!(
                "non-finite sample at ({}, {})",
                pos / width,
                pos % width
            )));
        }
        Ok(Self {
            height,
            width,
            samples,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "plane dimensions must be positive");
        Self {
            height,
            width,
            samples: vec![0.0; height * width],
        }
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        let mut p = Self::zeros(height, width);
        p.samples.fill(value);
        p
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = Self::zeros(height, width);
        for r in 0..height {
            for c in 0..width {
                p.samples[r * width + c] = f(r, c);
            }
        }
        p
    }

    /// Builds a plane from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::InvalidPlane("ragged rows".into()));
        }
        let samples = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(height, width, samples)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.samples[r * self.width..(r + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.width)
    }

    pub fn sum(&self) -> f64 {
        self.samples.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Top-left `height x width` window.
    pub fn crop(&self, height: usize, width: usize) -> Self {
        assert!(height <= self.height && width <= self.width);
        Self::from_fn(height, width, |r, c| self[(r, c)])
    }

    /// Zero-pads on the bottom and right up to `height x width`.
    pub fn zero_pad(&self, height: usize, width: usize) -> Self {
        assert!(height >= self.height && width >= self.width);
        let mut out = Self::zeros(height, width);
        for (r, row) in self.rows().enumerate() {
            out.samples[r * width..r * width + self.width].copy_from_slice(row);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut samples = vec![0.0; self.samples.len()];
        crate::poly::transpose_into(&self.samples, self.height, self.width, &mut samples);
        Self {
            height: self.width,
            width: self.height,
            samples,
        }
    }

    /// Euclidean distance to another plane of the same dimensions.
    pub fn distance(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &ImagePlane) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for ImagePlane {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.height && c < self.width);
        &self.samples[r * self.width + c]
    }
}

impl IndexMut<(usize, usize)> for ImagePlane {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.height && c < self.width);
        &mut self.samples[r * self.width + c]
    }
}
