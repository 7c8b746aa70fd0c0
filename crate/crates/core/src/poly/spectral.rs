use std::f64::consts::TAU;

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{Axis, ComplexMatrix};
use crate::error::{Error, Result};
use crate::plane::ImagePlane;

/// Largest allowed deviation of a sample point's modulus from 1.
pub const UNIT_CIRCLE_TOLERANCE: f64 = 1e-12;

/// A plane evaluated at points on the unit circle along one axis.
///
/// `slices[i]` holds the coefficients of the 1D polynomial obtained by fixing
/// the sampled variable at `points[i]`; its length is the plane's extent along
/// the other axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSliceSet {
    pub axis: Axis,
    pub points: Vec<Complex64>,
    pub slices: Vec<Vec<Complex64>>,
}

impl SpectralSliceSet {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

/// `exp(-2 pi i k / n)` for `k = 0..n`, the sample points of an `n`-point DFT.
pub fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / n as f64))
        .collect()
}

/// Evaluates `plane` at arbitrary unit-circle `points` along `axis`.
///
/// For `Axis::Z1`, `slice_i[n] = sum_m plane[m][n] * points[i]^m`; `Axis::Z2`
/// is the same with rows and columns exchanged.
pub fn axis_dft(plane: &ImagePlane, axis: Axis, points: &[Complex64]) -> Result<SpectralSliceSet> {
    for (index, w) in points.iter().enumerate() {
        let modulus = w.norm();
        if (modulus - 1.0).abs() > UNIT_CIRCLE_TOLERANCE {
            return Err(Error::NonUnitSamplePoint { index, modulus });
        }
    }
    let (h, w) = plane.dims();
    let slices = points
        .iter()
        .map(|&z| match axis {
            // Horner over rows, highest power first.
            Axis::Z1 => {
                let mut acc = vec![Complex64::new(0.0, 0.0); w];
                for m in (0..h).rev() {
                    for (a, &s) in acc.iter_mut().zip(plane.row(m)) {
                        *a = *a * z + s;
                    }
                }
                acc
            }
            // Precomputed powers turn each row into an independent dot product.
            Axis::Z2 => {
                let powers: Vec<Complex64> =
                    std::iter::successors(Some(Complex64::new(1.0, 0.0)), |p| Some(p * z))
                        .take(w)
                        .collect();
                plane
                    .rows()
                    .map(|row| {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (p, &s) in powers.iter().zip(row) {
                            re += p.re * s;
                            im += p.im * s;
                        }
                        Complex64::new(re, im)
                    })
                    .collect()
            }
        })
        .collect();
    Ok(SpectralSliceSet {
        axis,
        points: points.to_vec(),
        slices,
    })
}

/// Evaluates `plane` at all `t`-th roots of unity along `axis`.
///
/// Powers of a `t`-th root repeat with period `t`, so the plane is first
/// folded modulo `t` along the axis and then a `t`-point DFT is applied to
/// the folded array. This costs one pass over the plane plus `O(t^2)` work per
/// line, instead of `t` full passes.
pub fn evaluate_at_roots(plane: &ImagePlane, axis: Axis, t: usize) -> SpectralSliceSet {
    assert!(t >= 1);
    let points = roots_of_unity(t);
    let (h, w) = plane.dims();
    let (along, across) = match axis {
        Axis::Z1 => (h, w),
        Axis::Z2 => (w, h),
    };
    // folded[r][j]: sum of samples whose axis index is congruent to r mod t.
    let mut folded = vec![0.0; t * across];
    match axis {
        Axis::Z1 => {
            for (m, row) in plane.rows().enumerate() {
                let dst = &mut folded[(m % t) * across..(m % t + 1) * across];
                for (d, &s) in dst.iter_mut().zip(row) {
                    *d += s;
                }
            }
        }
        Axis::Z2 => {
            let mut acc = vec![0.0; t];
            for (m, row) in plane.rows().enumerate() {
                acc.fill(0.0);
                for chunk in row.chunks(t) {
                    for (a, &s) in acc.iter_mut().zip(chunk) {
                        *a += s;
                    }
                }
                for (r, &a) in acc.iter().enumerate() {
                    folded[r * across + m] = a;
                }
            }
        }
    }
    debug_assert!(along >= 1);
    let slices = (0..t)
        .map(|i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); across];
            for r in 0..t {
                let z = points[(i * r) % t];
                for (a, &s) in acc.iter_mut().zip(&folded[r * across..(r + 1) * across]) {
                    *a += z * s;
                }
            }
            acc
        })
        .collect();
    SpectralSliceSet {
        axis,
        points,
        slices,
    }
}

/// Full DFT along `axis`: the plane evaluated at every `n`-th root of unity,
/// where `n` is the plane's extent along that axis.
pub fn axis_dft_roots(plane: &ImagePlane, axis: Axis) -> SpectralSliceSet {
    let (h, w) = plane.dims();
    let mut planner = FftPlanner::<f64>::new();
    let (n, across, mut buf) = match axis {
        Axis::Z1 => {
            // Column-major copy so each column is a contiguous FFT line.
            let mut buf = vec![Complex64::new(0.0, 0.0); h * w];
            for (m, row) in plane.rows().enumerate() {
                for (c, &s) in row.iter().enumerate() {
                    buf[c * h + m] = Complex64::new(s, 0.0);
                }
            }
            (h, w, buf)
        }
        Axis::Z2 => (
            w,
            h,
            plane
                .samples()
                .iter()
                .map(|&s| Complex64::new(s, 0.0))
                .collect(),
        ),
    };
    planner.plan_fft_forward(n).process(&mut buf);
    let slices = (0..n)
        .map(|k| (0..across).map(|j| buf[j * n + k]).collect())
        .collect();
    SpectralSliceSet {
        axis,
        points: roots_of_unity(n),
        slices,
    }
}

/// Smallest length `>= n` whose only prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Row-major `rows x cols` to row-major `cols x rows`, in cache blocks.
pub fn transpose_into<T: Copy>(src: &[T], rows: usize, cols: usize, dst: &mut [T]) {
    const BLOCK: usize = 32;
    assert_eq!(src.len(), rows * cols);
    assert_eq!(dst.len(), rows * cols);
    for r0 in (0..rows).step_by(BLOCK) {
        for c0 in (0..cols).step_by(BLOCK) {
            for r in r0..(r0 + BLOCK).min(rows) {
                for c in c0..(c0 + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

// Shared planners: plans are cached by length, so repeated frames of one
// size skip twiddle setup.
fn real_plans() -> std::sync::MutexGuard<'static, RealFftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<RealFftPlanner<f64>>> = OnceLock::new();
    PLANNER
        .get_or_init(|| Mutex::new(RealFftPlanner::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

fn complex_plans() -> std::sync::MutexGuard<'static, FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

// Columns handled together by the blocked column passes.
const COLUMN_BLOCK: usize = 16;

// In-place DFT of every column of a row-major `rows x cols` array.
fn columns_in_place(data: &mut [Complex64], rows: usize, cols: usize, fft: &dyn Fft<f64>) {
    let mut block = vec![Complex64::new(0.0, 0.0); COLUMN_BLOCK * rows];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for c0 in (0..cols).step_by(COLUMN_BLOCK) {
        let bw = COLUMN_BLOCK.min(cols - c0);
        for r in 0..rows {
            let row = &data[r * cols + c0..r * cols + c0 + bw];
            for (j, &z) in row.iter().enumerate() {
                block[j * rows + r] = z;
            }
        }
        fft.process_with_scratch(&mut block[..bw * rows], &mut scratch);
        for r in 0..rows {
            let row = &mut data[r * cols + c0..r * cols + c0 + bw];
            for (j, z) in row.iter_mut().enumerate() {
                *z = block[j * rows + r];
            }
        }
    }
}

/// Planned 2D real-input DFT on a fixed `rows x cols` grid.
///
/// Spectra hold the `cols / 2 + 1` nonredundant columns, row-major, which is
/// all a pointwise spectral product needs.
#[derive(Clone)]
pub struct RealGrid {
    rows: usize,
    cols: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl RealGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        let (r2c, c2r) = {
            let mut real = real_plans();
            (real.plan_fft_forward(cols), real.plan_fft_inverse(cols))
        };
        let (col_fwd, col_inv) = {
            let mut complex = complex_plans();
            (
                complex.plan_fft_forward(rows),
                complex.plan_fft_inverse(rows),
            )
        };
        Self {
            rows,
            cols,
            r2c,
            c2r,
            col_fwd,
            col_inv,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn half_cols(&self) -> usize {
        self.cols / 2 + 1
    }

    pub fn spectrum_len(&self) -> usize {
        self.rows * self.half_cols()
    }

    /// Spectrum of `plane` zero padded to the grid.
    pub fn forward(&self, plane: &ImagePlane) -> Vec<Complex64> {
        let (h, w) = plane.dims();
        assert!(h <= self.rows && w <= self.cols, "plane larger than grid");
        let half = self.half_cols();
        let mut spec = vec![Complex64::new(0.0, 0.0); self.spectrum_len()];
        let mut input = self.r2c.make_input_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for (row, out) in plane.rows().zip(spec.chunks_exact_mut(half)) {
            input[..w].copy_from_slice(row);
            input[w..].fill(0.0);
            self.r2c
                .process_with_scratch(&mut input, out, &mut scratch)
                .expect("buffer sizes come from the plan");
        }
        columns_in_place(&mut spec, self.rows, half, self.col_fwd.as_ref());
        spec
    }

    /// Energies of the DFT slices of the plane behind `spec`, along both axes.
    ///
    /// Slice `k` along `Z1` is the plane evaluated at `exp(-2 pi i k / rows)`
    /// in `z1`; by Parseval along `z2` its energy is the energy of row `k` of
    /// the full 2D spectrum, divided by `cols`. Columns mirror the same way.
    /// Returns `(z1, z2)` for `k` in `0..=rows / 2` and `l` in `0..=cols / 2`,
    /// without the constant Parseval factors.
    pub fn axis_energies(&self, spec: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(spec.len(), self.spectrum_len());
        let half = self.half_cols();
        // Bins 0 and (for even widths) cols/2 have no mirror image in the
        // other half; every other stored bin stands for two.
        let unpaired = if self.cols.is_multiple_of(2) {
            half - 1
        } else {
            0
        };
        let mut rows = Vec::with_capacity(self.rows);
        let mut edges = Vec::with_capacity(self.rows);
        let mut z2 = vec![0.0; half];
        for line in spec.chunks_exact(half) {
            let mut total = 0.0;
            for (e, z) in z2.iter_mut().zip(line) {
                let p = z.norm_sqr();
                *e += p;
                total += p;
            }
            let mut edge = line[0].norm_sqr();
            if unpaired > 0 {
                edge += line[unpaired].norm_sqr();
            }
            rows.push(total);
            edges.push(edge);
        }
        // Bin (k, cols - l) is the conjugate of bin (rows - k, l).
        let z1 = (0..=self.rows / 2)
            .map(|k| {
                let m = (self.rows - k) % self.rows;
                rows[k] + rows[m] - edges[m]
            })
            .collect();
        (z1, z2)
    }

    /// The DFT slice of the plane behind `spec` at `bin` along `axis`, i.e.
    /// the plane evaluated at `exp(-2 pi i bin / n)` in that variable, as a
    /// polynomial in the other one. Coefficients cover the grid extent, so
    /// those past the plane are (numerically) zero.
    pub fn axis_slice(&self, spec: &[Complex64], axis: Axis, bin: usize) -> Vec<Complex64> {
        assert_eq!(spec.len(), self.spectrum_len());
        let half = self.half_cols();
        let mut line: Vec<Complex64> = match axis {
            Axis::Z1 => {
                assert!(bin < self.rows);
                let mirror = (self.rows - bin) % self.rows;
                (0..self.cols)
                    .map(|l| {
                        if l < half {
                            spec[bin * half + l]
                        } else {
                            spec[mirror * half + self.cols - l].conj()
                        }
                    })
                    .collect()
            }
            Axis::Z2 => {
                assert!(bin < half);
                (0..self.rows).map(|k| spec[k * half + bin]).collect()
            }
        };
        complex_plans()
            .plan_fft_inverse(line.len())
            .process(&mut line);
        let scale = 1.0 / line.len() as f64;
        line.iter_mut().for_each(|z| *z *= scale);
        line
    }

    /// Inverse transform of a grid spectrum, keeping the top-left
    /// `height x width` block. Normalized so that `inverse(forward(x)) = x`.
    pub fn inverse_cropped(
        &self,
        mut spec: Vec<Complex64>,
        height: usize,
        width: usize,
    ) -> ImagePlane {
        assert_eq!(spec.len(), self.spectrum_len());
        assert!(height <= self.rows && width <= self.cols);
        let half = self.half_cols();
        columns_in_place(&mut spec, self.rows, half, self.col_inv.as_ref());
        let scale = 1.0 / (self.rows * self.cols) as f64;
        let mut output = self.c2r.make_output_vec();
        let mut scratch = self.c2r.make_scratch_vec();
        let mut samples = Vec::with_capacity(height * width);
        for line in spec.chunks_exact_mut(half).take(height) {
            // A real signal has real DC (and Nyquist) bins; drop rounding noise.
            line[0].im = 0.0;
            if self.cols.is_multiple_of(2) {
                line[half - 1].im = 0.0;
            }
            self.c2r
                .process_with_scratch(line, &mut output, &mut scratch)
                .expect("buffer sizes come from the plan");
            samples.extend(output[..width].iter().map(|v| v * scale));
        }
        ImagePlane::new(height, width, samples).expect("sizes agree")
    }
}

/// Per-slice energy `sum |slice|^2` of a slice set.
pub fn axis_energy(set: &SpectralSliceSet) -> Vec<f64> {
    set.slices
        .iter()
        .map(|s| s.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

fn transform2(m: &ComplexMatrix, direction: FftDirection) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let mut planner = FftPlanner::<f64>::new();
    // nalgebra storage is column-major: columns are contiguous.
    let mut data = m.clone();
    planner
        .plan_fft(rows, direction)
        .process(data.as_mut_slice());
    let mut t = data.transpose();
    planner.plan_fft(cols, direction).process(t.as_mut_slice());
    t.transpose()
}

/// Unnormalized forward 2D DFT. Any dimensions are supported.
pub fn fft2(m: &ComplexMatrix) -> ComplexMatrix {
    transform2(m, FftDirection::Forward)
}

/// Inverse 2D DFT, normalized by `1 / (rows * cols)`.
pub fn ifft2(m: &ComplexMatrix) -> ComplexMatrix {
    let scale = 1.0 / (m.nrows() * m.ncols()) as f64;
    transform2(m, FftDirection::Inverse) * Complex64::new(scale, 0.0)
}

pub fn fft2_real(plane: &ImagePlane) -> ComplexMatrix {
    let (h, w) = plane.dims();
    fft2(&ComplexMatrix::from_fn(h, w, |r, c| {
        Complex64::new(plane[(r, c)], 0.0)
    }))
}
