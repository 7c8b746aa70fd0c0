//! Recovery of the blur kernel and latent frame from a blurred pair.
//!
//! The two blurred frames are bivariate polynomials `b1 = l * k1` and
//! `b2 = l * k2` sharing the latent image `l` as their greatest common
//! divisor. Decoding runs in four timed stages:
//!
//! 1. **Polynomial evaluation.** Both frames are evaluated on the unit circle
//!    along each axis, once at every DFT point to pick a slice for width
//!    estimation and once at the `t`-th roots of unity for the cofactor solves.
//! 2. **Kernel degree estimation.** Leading Bézout blocks of one 1D slice pair
//!    are singular exactly from size `t` upward, which gives the kernel width.
//! 3. **1D kernel estimation.** Each of the `t` slice pairs per axis yields
//!    one row (or column) of the kernel's partial transform, up to a scale.
//! 4. **2D kernel estimation and FFT.** The per-row and per-column scales are
//!    resolved jointly by homogeneous least squares, the two estimates are
//!    averaged into one kernel, and the public frame is divided by it in the
//!    Fourier domain.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{
    validate_kernel_width, BlurKernel, BlurredPair, MAX_KERNEL_WIDTH, MIN_KERNEL_WIDTH,
};
use crate::error::{Error, Result, Stage};
use crate::frame::Frame;
use crate::plane::ImagePlane;
use crate::poly::{
    bezout_leading_block, cofactor_null_solve_with, conv2_fft, conv2_full, evaluate_at_roots,
    fast_len, ifft2, null_space_solve, numerical_singularity, roots_of_unity, Axis, ComplexMatrix,
    RealGrid, SpectralSliceSet, DEFAULT_MIN_GAP,
};

/// Default relative singularity threshold for Bézout blocks.
pub const DEFAULT_TAU: f64 = 1e-6;
/// Relative division regularizer for float streams whose samples are all
/// single-precision values: the squared f32 rounding step.
pub const F32_EPSILON: f64 = (f32::EPSILON as f64) * (f32::EPSILON as f64);
/// Relative division regularizer for double-precision float streams.
pub const F64_EPSILON: f64 = f64::EPSILON * f64::EPSILON;

/// Odd widths 9 through 25.
pub fn default_search() -> Vec<usize> {
    (9..=25).step_by(2).collect()
}

#[derive(Clone, Debug)]
pub struct DecoderConfig {
    /// Candidate kernel widths, odd, within 3..=63.
    pub search: Vec<usize>,
    /// Relative singular value threshold for Bézout blocks.
    pub tau: f64,
    /// Division regularizer relative to the squared peak kernel spectrum.
    /// `None` picks one from the stream's bit depth (see [`auto_epsilon`]).
    pub epsilon: Option<f64>,
    /// Use the pair's kernel width hint instead of estimating the width.
    pub trust_hint: bool,
    /// Minimum conditioning gap of each 1D cofactor solve.
    pub min_gap: f64,
    /// Run the per-slice cofactor solves of one frame on the rayon pool.
    pub parallel_slices: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            search: default_search(),
            tau: DEFAULT_TAU,
            epsilon: None,
            trust_hint: false,
            min_gap: DEFAULT_MIN_GAP,
            parallel_slices: false,
        }
    }
}

/// Outcome of kernel width estimation.
#[derive(Clone, Debug, PartialEq)]
pub struct WidthEstimate {
    pub width: usize,
    /// No tested block was singular; `width` is the largest candidate.
    pub clamped: bool,
    /// `(block size, sigma_min / sigma_max)` for every block that was tested.
    pub ratios: Vec<(usize, f64)>,
}

/// Per-sample cofactor solutions, each known only up to a complex scale.
///
/// For `Axis::Z1`, row `i` holds the coefficients of `k1(w_i, z2)`; for
/// `Axis::Z2`, column `j` holds those of `k1(z1, w_j)`, with `w` the `t`-th
/// roots of unity. Each row (resp. column) has unit norm.
#[derive(Clone, Debug)]
pub struct ScaledKernelTransform {
    pub axis: Axis,
    pub values: ComplexMatrix,
    pub gaps: Vec<f64>,
}

impl ScaledKernelTransform {
    pub fn width(&self) -> usize {
        self.values.nrows()
    }
}

/// Joint solution for the unknown row scales `lambda` and column scales `mu`.
#[derive(Clone, Debug)]
pub struct ScaleResolution {
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    /// `||S x||_2` of the stacked consistency system at the solution.
    pub residual: f64,
}

/// Wall-clock time per pipeline stage, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub polynomial_evaluation: f64,
    pub kernel_degree_estimation: f64,
    pub kernel_estimation_1d: f64,
    pub kernel_estimation_2d_fft: f64,
    pub total: f64,
}

impl StageTimings {
    pub fn stage(&self, stage: Stage) -> f64 {
        match stage {
            Stage::PolynomialEvaluation => self.polynomial_evaluation,
            Stage::KernelDegreeEstimation => self.kernel_degree_estimation,
            Stage::KernelEstimation1d => self.kernel_estimation_1d,
            Stage::KernelEstimation2dFft => self.kernel_estimation_2d_fft,
        }
    }

    pub fn stage_sum(&self) -> f64 {
        STAGES.iter().map(|s| self.stage(*s)).sum()
    }

    pub fn largest_stage(&self) -> Stage {
        *STAGES
            .iter()
            .max_by(|a, b| self.stage(**a).total_cmp(&self.stage(**b)))
            .unwrap()
    }

    fn add_assign(&mut self, other: &StageTimings) {
        self.polynomial_evaluation += other.polynomial_evaluation;
        self.kernel_degree_estimation += other.kernel_degree_estimation;
        self.kernel_estimation_1d += other.kernel_estimation_1d;
        self.kernel_estimation_2d_fft += other.kernel_estimation_2d_fft;
        self.total += other.total;
    }

    fn scale(&mut self, c: f64) {
        self.polynomial_evaluation *= c;
        self.kernel_degree_estimation *= c;
        self.kernel_estimation_1d *= c;
        self.kernel_estimation_2d_fft *= c;
        self.total *= c;
    }

    /// Stage-wise mean.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a StageTimings>) -> StageTimings {
        let mut acc = StageTimings::default();
        let mut n = 0usize;
        for t in items {
            acc.add_assign(t);
            n += 1;
        }
        if n > 0 {
            acc.scale(1.0 / n as f64);
        }
        acc
    }
}

/// Stages in pipeline order.
pub const STAGES: [Stage; 4] = [
    Stage::PolynomialEvaluation,
    Stage::KernelDegreeEstimation,
    Stage::KernelEstimation1d,
    Stage::KernelEstimation2dFft,
];

#[derive(Clone, Debug)]
pub struct DecodedFrame {
    pub latent: Frame,
    pub kernel_estimate: BlurKernel,
    pub width_used: usize,
    pub stage_timings: StageTimings,
    /// `||L * K - B1|| / ||B1||` over all planes.
    pub validation_residual: f64,
}

/// Sorts and checks a width search set.
pub fn validate_search(search: &[usize]) -> Result<Vec<usize>> {
    let mut s = search.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return Err(Error::InvalidArgument(
            "empty kernel width search set".into(),
        ));
    }
    if let Some(&bad) = s
        .iter()
        .find(|&&w| w % 2 == 0 || !(MIN_KERNEL_WIDTH..=MAX_KERNEL_WIDTH).contains(&w))
    {
        return Err(Error::InvalidKernelWidth(bad));
    }
    Ok(s)
}

/// Slice pairs of maximal joint energy along each axis, for width estimation.
pub struct DegreeSlices {
    pub z1: (Vec<Complex64>, Vec<Complex64>),
    pub z2: (Vec<Complex64>, Vec<Complex64>),
    grid: RealGrid,
    public_spectrum: Vec<Complex64>,
}

impl DegreeSlices {
    pub fn axis(&self, axis: Axis) -> (&[Complex64], &[Complex64]) {
        let (p, q) = match axis {
            Axis::Z1 => &self.z1,
            Axis::Z2 => &self.z2,
        };
        (p, q)
    }
}

/// Evaluates both planes on a DFT grid and picks, per axis, the sample whose
/// slice pair has maximal joint energy. The slices are read back from the
/// grid spectra.
///
/// The grid is zero padded to 5-smooth sizes so the transform stays fast for
/// any frame size; it is the same grid the final division runs on, so the
/// public plane's spectrum is kept for it. Both planes are real, so slices
/// `k` and `n - k` are conjugate with equal energy and only the first half is
/// searched.
pub fn degree_slices(b1: &ImagePlane, b2: &ImagePlane) -> DegreeSlices {
    let (h, w) = b1.dims();
    let grid = RealGrid::new(fast_len(h), fast_len(w));
    let public_spectrum = grid.forward(b1);
    let spectrum2 = grid.forward(b2);
    let (e1z1, e1z2) = grid.axis_energies(&public_spectrum);
    let (e2z1, e2z2) = grid.axis_energies(&spectrum2);
    let argmax = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x + y)
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map_or(0, |(k, _)| k)
    };
    let pair = |axis: Axis, bin: usize| {
        let extent = match axis {
            Axis::Z1 => w,
            Axis::Z2 => h,
        };
        let slice = |spec: &[Complex64]| {
            let mut s = grid.axis_slice(spec, axis, bin);
            s.truncate(extent);
            s
        };
        (slice(&public_spectrum), slice(&spectrum2))
    };
    DegreeSlices {
        z1: pair(Axis::Z1, argmax(&e1z1, &e2z1)),
        z2: pair(Axis::Z2, argmax(&e1z2, &e2z2)),
        grid,
        public_spectrum,
    }
}

/// Kernel width from one 1D slice pair: the smallest candidate size whose
/// leading Bézout block is numerically singular.
///
/// For `p = l * u`, `q = l * v` with `deg u = deg v = t - 1` and coprime
/// `u, v`, the Bézout matrix has rank `t - 1`, so every leading block of size
/// `t` or more is singular while smaller ones are generically regular.
pub fn width_from_slices(
    p: &[Complex64],
    q: &[Complex64],
    search: &[usize],
    tau: f64,
) -> Result<WidthEstimate> {
    let search = validate_search(search)?;
    let mut ratios = Vec::with_capacity(search.len());
    for &s in &search {
        let block = bezout_leading_block(p, q, s)?;
        let verdict = numerical_singularity(&block, tau);
        ratios.push((s, verdict.ratio));
        if verdict.singular {
            return Ok(WidthEstimate {
                width: s,
                clamped: false,
                ratios,
            });
        }
    }
    Ok(WidthEstimate {
        width: *search.last().unwrap(),
        clamped: true,
        ratios,
    })
}

fn estimate_width_planes(
    b1: &ImagePlane,
    b2: &ImagePlane,
    search: &[usize],
    tau: f64,
) -> Result<WidthEstimate> {
    let slices = degree_slices(b1, b2);
    let (p1, q1) = slices.axis(Axis::Z1);
    let (p2, q2) = slices.axis(Axis::Z2);
    let z1 = width_from_slices(p1, q1, search, tau)?;
    let z2 = width_from_slices(p2, q2, search, tau)?;
    if z1.width != z2.width {
        return Err(Error::InconsistentAxes {
            z1: z1.width,
            z2: z2.width,
        });
    }
    Ok(z1)
}

/// Estimates the kernel width of a pair from its luma planes, checking that
/// both axes agree (kernels are square).
pub fn estimate_kernel_width(
    pair: &BlurredPair,
    search: &[usize],
    tau: f64,
) -> Result<WidthEstimate> {
    estimate_width_planes(&pair.public.luma(), &pair.private.luma(), search, tau)
}

/// Solves the 1D cofactor problem for every slice of two matching slice sets.
pub fn solve_cofactor_slices(
    s1: &SpectralSliceSet,
    s2: &SpectralSliceSet,
    t: usize,
    min_gap: f64,
    parallel: bool,
) -> Result<ScaledKernelTransform> {
    assert_eq!(s1.axis, s2.axis);
    assert_eq!(s1.len(), t);
    assert_eq!(s2.len(), t);
    let axis = s1.axis;
    let solve = |i: usize| -> Result<(Vec<Complex64>, f64)> {
        let sol = cofactor_null_solve_with(&s1.slices[i], &s2.slices[i], t, min_gap).map_err(
            |e| match e {
                Error::IllConditioned { gap, .. } => Error::IllConditionedSlice {
                    axis,
                    index: i,
                    gap,
                },
                other => other,
            },
        )?;
        let norm = sol.k1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::IllConditionedSlice {
                axis,
                index: i,
                gap: sol.gap,
            });
        }
        Ok((sol.k1.iter().map(|z| z / norm).collect(), sol.gap))
    };
    let solved: Vec<_> = if parallel {
        (0..t).into_par_iter().map(solve).collect::<Result<_>>()?
    } else {
        (0..t).map(solve).collect::<Result<_>>()?
    };
    let mut values = ComplexMatrix::zeros(t, t);
    let mut gaps = Vec::with_capacity(t);
    for (i, (k1, gap)) in solved.into_iter().enumerate() {
        for (j, z) in k1.into_iter().enumerate() {
            match axis {
                Axis::Z1 => values[(i, j)] = z,
                Axis::Z2 => values[(j, i)] = z,
            }
        }
        gaps.push(gap);
    }
    Ok(ScaledKernelTransform { axis, values, gaps })
}

/// Evaluates both planes at the `t`-th roots of unity along `axis` and solves
/// each slice pair for the public kernel's cofactor.
pub fn sample_cofactors(
    b1: &ImagePlane,
    b2: &ImagePlane,
    t: usize,
    axis: Axis,
    min_gap: f64,
) -> Result<ScaledKernelTransform> {
    let s1 = evaluate_at_roots(b1, axis, t);
    let s2 = evaluate_at_roots(b2, axis, t);
    solve_cofactor_slices(&s1, &s2, t, min_gap, false)
}

/// Applies the `t`-point DFT along the axis a transform was not sampled on,
/// giving `diag(lambda) * K^` for `Z1` or `K^ * diag(mu)` for `Z2`, where
/// `K^` is the 2D DFT of the kernel.
pub fn complete_spectrum(a: &ScaledKernelTransform) -> ComplexMatrix {
    let t = a.width();
    let w = roots_of_unity(t);
    match a.axis {
        Axis::Z1 => ComplexMatrix::from_fn(t, t, |i, k| {
            (0..t).map(|n| a.values[(i, n)] * w[(k * n) % t]).sum()
        }),
        Axis::Z2 => ComplexMatrix::from_fn(t, t, |k, j| {
            (0..t).map(|m| a.values[(m, j)] * w[(k * m) % t]).sum()
        }),
    }
}

/// Resolves row scales of `a_prime = diag(lambda) K^` against column scales of
/// `b_prime = K^ diag(mu)`.
///
/// Every entry gives one homogeneous equation `mu_j a'_ij - lambda_i b'_ij = 0`
/// in the `2t` unknowns; the `t^2 x 2t` system is solved for its unit null
/// vector.
pub fn resolve_spectra(
    a_prime: &ComplexMatrix,
    b_prime: &ComplexMatrix,
) -> Result<ScaleResolution> {
    let t = a_prime.nrows();
    if a_prime.shape() != (t, t) || b_prime.shape() != (t, t) {
        return Err(Error::DimMismatch(format!(
            "spectra are {:?} and {:?}",
            a_prime.shape(),
            b_prime.shape()
        )));
    }
    let mut s = ComplexMatrix::zeros(t * t, 2 * t);
    for i in 0..t {
        for j in 0..t {
            let row = i * t + j;
            s[(row, i)] = -b_prime[(i, j)];
            s[(row, t + j)] = a_prime[(i, j)];
        }
    }
    let sol = null_space_solve(&s);
    let max = sol.vector.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if let Some(z) = sol.vector.iter().find(|z| !(z.norm() >= 1e-10 * max)) {
        return Err(Error::DegenerateScales {
            value: z.norm(),
            max,
        });
    }
    let residual = sol.residual();
    let (lambda, mu) = sol.vector.split_at(t);
    Ok(ScaleResolution {
        lambda: lambda.to_vec(),
        mu: mu.to_vec(),
        residual,
    })
}

/// Scale resolution for a `Z1` and a `Z2` transform of the same width.
pub fn resolve_scales(
    a: &ScaledKernelTransform,
    b: &ScaledKernelTransform,
) -> Result<ScaleResolution> {
    if a.axis != Axis::Z1 || b.axis != Axis::Z2 {
        return Err(Error::InvalidArgument(
            "expected a Z1 and a Z2 transform".into(),
        ));
    }
    resolve_spectra(&complete_spectrum(a), &complete_spectrum(b))
}

// Inverse transform of a scaled spectrum, normalized to unit (complex) sum,
// checked for realness, with negatives clamped.
fn spatial_estimate(spectrum: &ComplexMatrix) -> Result<ImagePlane> {
    let t = spectrum.nrows();
    let k = ifft2(spectrum);
    let total: Complex64 = k.iter().sum();
    let energy: f64 = k.iter().map(|z| z.norm_sqr()).sum();
    if !(total.norm() > 1e-12 * energy.sqrt()) {
        return Err(Error::NonRealKernel { fraction: 1.0 });
    }
    let k = k / total;
    let energy: f64 = k.iter().map(|z| z.norm_sqr()).sum();
    let imag: f64 = k.iter().map(|z| z.im * z.im).sum();
    let fraction = imag / energy;
    if fraction > 0.01 {
        return Err(Error::NonRealKernel { fraction });
    }
    let plane = ImagePlane::from_fn(t, t, |r, c| k[(r, c)].re.max(0.0));
    let sum = plane.sum();
    if !(sum > 0.0) {
        return Err(Error::NonRealKernel { fraction });
    }
    Ok(plane.scaled(1.0 / sum))
}

/// Builds the kernel from both scaled spectra: each is unscaled, inverse
/// transformed and normalized, and the two estimates are averaged.
pub fn assemble_kernel(
    a_prime: &ComplexMatrix,
    b_prime: &ComplexMatrix,
    scales: &ScaleResolution,
) -> Result<BlurKernel> {
    let t = a_prime.nrows();
    let ka = spatial_estimate(&ComplexMatrix::from_fn(t, t, |i, j| {
        a_prime[(i, j)] / scales.lambda[i]
    }))?;
    let kb = spatial_estimate(&ComplexMatrix::from_fn(t, t, |i, j| {
        b_prime[(i, j)] / scales.mu[j]
    }))?;
    let avg = ImagePlane::from_fn(t, t, |r, c| 0.5 * (ka[(r, c)] + kb[(r, c)]));
    BlurKernel::normalized(avg)
}

/// Divides a blurred plane by a kernel in the Fourier domain.
///
/// `B^ conj(K^) / (|K^|^2 + epsilon)` is evaluated on a grid at least as large
/// as the blurred plane, so the circular product equals the linear
/// convolution; with `epsilon = 0` and exact inputs this is exact polynomial
/// division. The result is cropped to the latent size.
pub fn spectral_deblur(blurred: &ImagePlane, kernel: &BlurKernel, epsilon: f64) -> ImagePlane {
    let (h, w) = blurred.dims();
    SpectralDivider::new(RealGrid::new(fast_len(h), fast_len(w)), kernel).apply(blurred, epsilon)
}

struct SpectralDivider {
    grid: RealGrid,
    kernel_spectrum: Vec<Complex64>,
    t: usize,
}

impl SpectralDivider {
    fn new(grid: RealGrid, kernel: &BlurKernel) -> Self {
        Self {
            kernel_spectrum: grid.forward(kernel.weights()),
            grid,
            t: kernel.width(),
        }
    }

    fn peak_power(&self) -> f64 {
        self.kernel_spectrum
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm_sqr()))
    }

    fn apply(&self, blurred: &ImagePlane, epsilon: f64) -> ImagePlane {
        let (h, w) = blurred.dims();
        self.apply_spectrum(self.grid.forward(blurred), (h, w), epsilon)
    }

    /// Division of a plane of size `dims` given its grid spectrum.
    fn apply_spectrum(
        &self,
        mut spec: Vec<Complex64>,
        (h, w): (usize, usize),
        epsilon: f64,
    ) -> ImagePlane {
        assert!(
            h >= self.t && w >= self.t,
            "blurred plane smaller than kernel"
        );
        for (b, k) in spec.iter_mut().zip(&self.kernel_spectrum) {
            *b = *b * k.conj() / (k.norm_sqr() + epsilon);
        }
        self.grid
            .inverse_cropped(spec, h - self.t + 1, w - self.t + 1)
    }
}

/// Relative regularizer used when none is configured.
///
/// The squared sample precision of the stream, so exact data is divided
/// (almost) directly and noisier data gets a proportionally larger guard.
/// Float streams get [`F32_EPSILON`] when every sample is a single-precision
/// value and [`F64_EPSILON`] otherwise. Quantized streams get the squared
/// quantization step, found as the coarsest power-of-two level spacing shared
/// by every sample (so bit-degraded streams get a larger guard).
pub fn auto_epsilon(pair: &BlurredPair) -> f64 {
    let frames = [&pair.public, &pair.private];
    let samples = || {
        frames
            .into_iter()
            .flat_map(|f| f.planes())
            .flat_map(|p| p.samples().iter().copied())
    };
    let depth = pair.public.bit_depth();
    let (Some(bits), Some(max)) = (depth.bits(), depth.max_level()) else {
        return if samples().all(|v| v as f32 as f64 == v) {
            F32_EPSILON
        } else {
            F64_EPSILON
        };
    };
    let maxf = max as f64;
    let mut zeros = bits - 1;
    for v in samples() {
        let level = (v * maxf).round() as u32;
        if level != 0 {
            zeros = zeros.min(level.trailing_zeros());
        }
    }
    let step = (1u64 << zeros) as f64 / maxf;
    step * step
}

/// `||conv(latent, kernel) - public|| / ||public||` summed over planes.
pub fn validation_residual(latent: &Frame, kernel: &BlurKernel, public: &Frame) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, b) in latent.planes().iter().zip(public.planes()) {
        let re = conv2_fft(l, kernel.weights());
        num += re.distance(b).powi(2);
        den += b.norm().powi(2);
    }
    (num / den).sqrt()
}

/// Cross-convolution check `B1 * k2 = L * k1 * k2 = B2 * k1`.
///
/// Returns `||B1 * k2 - B2 * k1|| / ||B1 * k2||` over all planes.
pub fn validate_pair(pair: &BlurredPair, k1: &BlurKernel, k2: &BlurKernel) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (b1, b2) in pair.public.planes().iter().zip(pair.private.planes()) {
        let x = conv2_full(b1, k2.weights());
        let y = conv2_full(b2, k1.weights());
        num += x.distance(&y).powi(2);
        den += x.norm().powi(2);
    }
    (num / den).sqrt()
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline on one pair and reconstructs the latent frame from
/// the public stream.
pub fn decode_frame(pair: &BlurredPair, cfg: &DecoderConfig) -> Result<DecodedFrame> {
    let mut timings = StageTimings::default();
    let start = Instant::now();

    let clock = Instant::now();
    let b1 = pair.public.luma();
    let b2 = pair.private.luma();
    let hinted = match (cfg.trust_hint, pair.kernel_width_hint) {
        (true, Some(t)) => {
            validate_kernel_width(t).map_err(|e| e.in_stage(Stage::KernelDegreeEstimation))?;
            Some(t)
        }
        _ => None,
    };
    let degree_input = hinted.is_none().then(|| degree_slices(&b1, &b2));
    timings.polynomial_evaluation += ms(clock);

    let clock = Instant::now();
    let t = match (hinted, &degree_input) {
        (Some(t), _) => t,
        (None, Some(slices)) => {
            let stage = Stage::KernelDegreeEstimation;
            let estimate = |axis| {
                let (p, q) = slices.axis(axis);
                width_from_slices(p, q, &cfg.search, cfg.tau).map_err(|e| e.in_stage(stage))
            };
            let z1 = estimate(Axis::Z1)?;
            let z2 = estimate(Axis::Z2)?;
            if z1.width != z2.width {
                return Err(Error::InconsistentAxes {
                    z1: z1.width,
                    z2: z2.width,
                }
                .in_stage(stage));
            }
            z1.width
        }
        (None, None) => unreachable!(),
    };
    timings.kernel_degree_estimation += ms(clock);

    let (h, w) = pair.dims();
    if h < t || w < t {
        return Err(Error::FrameTooSmall {
            height: h,
            width: w,
            kernel_width: t,
        }
        .in_stage(Stage::KernelDegreeEstimation));
    }

    let clock = Instant::now();
    let rows1 = evaluate_at_roots(&b1, Axis::Z1, t);
    let rows2 = evaluate_at_roots(&b2, Axis::Z1, t);
    let cols1 = evaluate_at_roots(&b1, Axis::Z2, t);
    let cols2 = evaluate_at_roots(&b2, Axis::Z2, t);
    timings.polynomial_evaluation += ms(clock);

    let clock = Instant::now();
    let stage = Stage::KernelEstimation1d;
    let a = solve_cofactor_slices(&rows1, &rows2, t, cfg.min_gap, cfg.parallel_slices)
        .map_err(|e| e.in_stage(stage))?;
    let b = solve_cofactor_slices(&cols1, &cols2, t, cfg.min_gap, cfg.parallel_slices)
        .map_err(|e| e.in_stage(stage))?;
    timings.kernel_estimation_1d += ms(clock);

    let clock = Instant::now();
    let stage = Stage::KernelEstimation2dFft;
    let a_prime = complete_spectrum(&a);
    let b_prime = complete_spectrum(&b);
    let scales = resolve_spectra(&a_prime, &b_prime).map_err(|e| e.in_stage(stage))?;
    let kernel = assemble_kernel(&a_prime, &b_prime, &scales).map_err(|e| e.in_stage(stage))?;
    // A gray public plane is its own luma, already transformed on this grid.
    let reuse = degree_input.filter(|_| pair.public.channels() == 1);
    let divider = match &reuse {
        Some(slices) => SpectralDivider::new(slices.grid.clone(), &kernel),
        None => SpectralDivider::new(RealGrid::new(fast_len(h), fast_len(w)), &kernel),
    };
    let epsilon = cfg.epsilon.unwrap_or_else(|| auto_epsilon(pair)) * divider.peak_power();
    let planes = match reuse {
        Some(slices) => vec![divider.apply_spectrum(slices.public_spectrum, (h, w), epsilon)],
        None => pair
            .public
            .planes()
            .iter()
            .map(|p| divider.apply(p, epsilon))
            .collect(),
    };
    timings.kernel_estimation_2d_fft += ms(clock);
    timings.total = ms(start);

    let latent = Frame::new(planes, crate::frame::BitDepth::Float32, pair.public.index())?;
    let validation_residual = validation_residual(&latent, &kernel, &pair.public);
    Ok(DecodedFrame {
        latent,
        kernel_estimate: kernel,
        width_used: t,
        stage_timings: timings,
        validation_residual,
    })
}
