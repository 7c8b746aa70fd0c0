//! Kernel generation and the forward (blurring) half of the codec.
//!
//! A latent frame is convolved with two random, normalized blur kernels whose
//! bivariate polynomials are coprime. The first result is the public stream,
//! the second the private one; recovering the latent frame needs both.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::{BitDepth, Frame};
use crate::plane::ImagePlane;
use crate::poly::{axis_dft, conv2_full, singular_values, sylvester_matrix, Axis};

/// Pairs whose coprimality margin is at or below this are rejected.
pub const DEFAULT_COPRIMALITY_THRESHOLD: f64 = 1e-6;
/// Random unit-circle restrictions per axis used by [`generate_coprime_pair`].
pub const DEFAULT_COPRIMALITY_TRIALS: usize = 4;
pub const DEFAULT_MAX_RETRIES: usize = 16;
pub const MIN_KERNEL_WIDTH: usize = 3;
pub const MAX_KERNEL_WIDTH: usize = 63;

const KERNEL_SUM_TOLERANCE: f64 = 1e-9;
const RANGE_TOLERANCE: f64 = 1e-9;

/// A square, odd-sized, nonnegative blur kernel whose weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    weights: ImagePlane,
}

impl BlurKernel {
    pub fn new(weights: ImagePlane) -> Result<Self> {
        let (h, w) = weights.dims();
        if h != w || h % 2 == 0 {
            return Err(Error::InvalidKernel(format!(
                "kernel must be square with odd width, got {h}x{w}"
            )));
        }
        if let Some(v) = weights.samples().iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidKernel(format!("negative weight {v}")));
        }
        let sum = weights.sum();
        if (sum - 1.0).abs() > KERNEL_SUM_TOLERANCE {
            return Err(Error::InvalidKernel(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Scales nonnegative `weights` to unit sum.
    pub fn normalized(weights: ImagePlane) -> Result<Self> {
        let sum = weights.sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidKernel(format!("weights sum to {sum}")));
        }
        Self::new(weights.scaled(1.0 / sum))
    }

    /// The 1x1 kernel that leaves frames unchanged.
    pub fn identity() -> Self {
        Self {
            weights: ImagePlane::filled(1, 1, 1.0),
        }
    }

    pub fn width(&self) -> usize {
        self.weights.width()
    }

    pub fn weights(&self) -> &ImagePlane {
        &self.weights
    }
}

/// Two equal-width kernels accepted as coprime.
#[derive(Clone, Debug, PartialEq)]
pub struct CoprimePair {
    pub k1: BlurKernel,
    pub k2: BlurKernel,
    pub coprimality_margin: f64,
    pub seed: u64,
}

impl CoprimePair {
    pub fn width(&self) -> usize {
        self.k1.width()
    }

    pub fn swapped(&self) -> Self {
        Self {
            k1: self.k2.clone(),
            k2: self.k1.clone(),
            ..self.clone()
        }
    }
}

/// Public and private blurrings of one latent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurredPair {
    pub public: Frame,
    pub private: Frame,
    pub kernel_width_hint: Option<usize>,
    pub pair_id: String,
}

impl BlurredPair {
    pub fn new(
        public: Frame,
        private: Frame,
        kernel_width_hint: Option<usize>,
        pair_id: impl Into<String>,
    ) -> Result<Self> {
        if public.dims() != private.dims() || public.channels() != private.channels() {
            return Err(Error::DimMismatch(format!(
                "public frame is {:?}x{}, private frame is {:?}x{}",
                public.dims(),
                public.channels(),
                private.dims(),
                private.channels()
            )));
        }
        Ok(Self {
            public,
            private,
            kernel_width_hint,
            pair_id: pair_id.into(),
        })
    }

    /// The same pair with the roles of the two frames exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            public: self.private.clone(),
            private: self.public.clone(),
            ..self.clone()
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.public.dims()
    }
}

/// Derives the kernel seed of frame `index` from a stream seed.
pub fn frame_seed(stream_seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the combined words
    let mut z = stream_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifier shared by the public and private streams of one encoding run.
pub fn pair_id_for(stream_seed: u64, kernel_width: usize) -> String {
    format!(
        "cbp-t{kernel_width}-{:016x}",
        frame_seed(stream_seed, u64::MAX)
    )
}

pub fn validate_kernel_width(t: usize) -> Result<()> {
    if t.is_multiple_of(2) || !(MIN_KERNEL_WIDTH..=MAX_KERNEL_WIDTH).contains(&t) {
        return Err(Error::InvalidKernelWidth(t));
    }
    Ok(())
}

fn random_kernel(rng: &mut impl Rng, t: usize) -> BlurKernel {
    let weights = ImagePlane::from_fn(t, t, |_, _| rng.random::<f64>());
    BlurKernel::normalized(weights).expect("uniform draws have positive sum")
}

/// Draws a seeded pair of `t x t` kernels with i.i.d. uniform weights and
/// keeps drawing until the pair passes [`coprimality_check`].
pub fn generate_coprime_pair(t: usize, seed: u64, max_retries: usize) -> Result<CoprimePair> {
    validate_kernel_width(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_retries.max(1) {
        let k1 = random_kernel(&mut rng, t);
        let k2 = random_kernel(&mut rng, t);
        let margin = coprimality_check(&k1, &k2, DEFAULT_COPRIMALITY_TRIALS);
        if margin > DEFAULT_COPRIMALITY_THRESHOLD {
            return Ok(CoprimePair {
                k1,
                k2,
                coprimality_margin: margin,
                seed,
            });
        }
    }
    Err(Error::CoprimalityFailure {
        width: t,
        seed,
        retries: max_retries.max(1),
    })
}

fn trim_high(mut v: Vec<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    let scale = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    while v.last().is_some_and(|z| z.norm() <= 1e-14 * scale) {
        v.pop();
    }
    v
}

/// Numerical coprimality margin of two kernels.
///
/// Both kernels are restricted to 1D polynomials by fixing one variable at a
/// random unit-circle point, for `trials` points along each axis. The margin
/// is the smallest `sigma_min / sigma_max` over the Sylvester matrices of the
/// restricted pairs; a common bivariate factor survives every restriction and
/// drives the margin to zero. Points come from a fixed-seed generator, so the
/// margin is a deterministic function of the kernels.
pub fn coprimality_check(k1: &BlurKernel, k2: &BlurKernel, trials: usize) -> f64 {
    assert_eq!(k1.width(), k2.width(), "kernel widths differ");
    let mut rng = ChaCha8Rng::seed_from_u64(0xC091_213E);
    let mut margin = f64::INFINITY;
    for _ in 0..trials.max(1) {
        let r =
            num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
        for axis in [Axis::Z1, Axis::Z2] {
            let p = axis_dft(k1.weights(), axis, &[r]).expect("unit point");
            let q = axis_dft(k2.weights(), axis, &[r]).expect("unit point");
            let p = trim_high(p.slices.into_iter().next().unwrap());
            let q = trim_high(q.slices.into_iter().next().unwrap());
            let ratio = if p.is_empty() || q.is_empty() {
                0.0
            } else {
                let sv = singular_values(&sylvester_matrix(&p, &q));
                match (sv.first(), sv.last()) {
                    (Some(&max), Some(&min)) if max > 0.0 => min / max,
                    (Some(_), Some(_)) => 0.0,
                    // Two constants share no root.
                    _ => 1.0,
                }
            };
            margin = margin.min(ratio);
        }
    }
    margin
}

/// Blurs every plane of `latent` with both kernels of `pair`.
///
/// Convolutions are full, so output frames grow by `t - 1` in each direction.
pub fn encode_frame(latent: &Frame, pair: &CoprimePair) -> Result<BlurredPair> {
    let t = pair.width();
    let (h, w) = latent.dims();
    if h < t || w < t {
        return Err(Error::FrameTooSmall {
            height: h,
            width: w,
            kernel_width: t,
        });
    }
    let public = latent.map_planes(|p| conv2_full(p, pair.k1.weights()));
    let private = latent.map_planes(|p| conv2_full(p, pair.k2.weights()));
    BlurredPair::new(public, private, Some(t), pair_id_for(pair.seed, t))
}

/// Rounds every sample to the nearest level `k / (2^bits - 1)`.
pub fn quantize_frame(f: &Frame, depth: BitDepth) -> Result<Frame> {
    let Some(max) = depth.max_level() else {
        return Err(Error::InvalidArgument(
            "quantization needs an integer depth".into(),
        ));
    };
    let max = max as f64;
    let mut planes = Vec::with_capacity(f.channels());
    for p in f.planes() {
        if let Some(&value) = p
            .samples()
            .iter()
            .find(|v| **v < -RANGE_TOLERANCE || **v > 1.0 + RANGE_TOLERANCE)
        {
            return Err(Error::RangeExceeded { value });
        }
        planes.push(p.map(|v| (v.clamp(0.0, 1.0) * max).round() / max));
    }
    Ok(f.with_planes(planes, depth))
}

/// Zeroes the `drop` least significant bits of every integer sample.
pub fn degrade_bits(f: &Frame, drop: u32) -> Result<Frame> {
    let (Some(bits), Some(max)) = (f.bit_depth().bits(), f.bit_depth().max_level()) else {
        return Err(Error::NotQuantized);
    };
    if drop >= bits {
        return Err(Error::InvalidArgument(format!(
            "cannot drop {drop} bits from a {bits}-bit frame"
        )));
    }
    let mask = !((1u32 << drop) - 1);
    let maxf = max as f64;
    let planes = f
        .planes()
        .iter()
        .map(|p| p.map(|v| (((v * maxf).round() as u32) & mask) as f64 / maxf))
        .collect();
    Ok(f.with_planes(planes, f.bit_depth()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(t: usize, r: usize, c: usize) -> BlurKernel {
        let mut w = ImagePlane::zeros(t, t);
        w[(r, c)] = 1.0;
        BlurKernel::new(w).unwrap()
    }

    #[test]
    fn kernel_validation() {
        assert!(BlurKernel::new(ImagePlane::filled(2, 2, 0.25)).is_err());
        assert!(BlurKernel::new(ImagePlane::filled(3, 3, 0.2)).is_err());
        assert!(BlurKernel::new(ImagePlane::from_fn(3, 3, |r, _| if r == 0 {
            -0.1
        } else {
            0.55 / 3.0
        }))
        .is_err());
        assert!(BlurKernel::normalized(ImagePlane::filled(3, 3, 2.0)).is_ok());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_coprime_pair(9, 42, DEFAULT_MAX_RETRIES).unwrap();
        let b = generate_coprime_pair(9, 42, DEFAULT_MAX_RETRIES).unwrap();
        assert_eq!(a, b);
        assert!(a.coprimality_margin > 1e-6);
        assert_ne!(a.k1, a.k2);
    }

    #[test]
    fn small_kernels_are_normalized() {
        let p = generate_coprime_pair(3, 7, DEFAULT_MAX_RETRIES).unwrap();
        for k in [&p.k1, &p.k2] {
            assert_eq!(k.width(), 3);
            assert!((k.weights().sum() - 1.0).abs() <= 1e-9);
            assert!(k.weights().samples().iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn rejects_bad_widths() {
        for t in [1, 2, 8, 65] {
            assert!(matches!(
                generate_coprime_pair(t, 0, 4),
                Err(Error::InvalidKernelWidth(_))
            ));
        }
    }

    #[test]
    fn distinct_deltas_are_coprime() {
        let m = coprimality_check(&delta(3, 1, 1), &delta(3, 0, 0), 4);
        assert!(m > 1e-6, "{m}");
    }

    #[test]
    fn identical_kernels_are_not() {
        let p = generate_coprime_pair(5, 3, DEFAULT_MAX_RETRIES).unwrap();
        assert!(coprimality_check(&p.k1, &p.k1, 4) <= 1e-12);
    }

    #[test]
    fn shared_factor_is_detected() {
        let p = generate_coprime_pair(3, 11, DEFAULT_MAX_RETRIES).unwrap();
        let s = ImagePlane::from_rows(&[[0.3, 0.7], [0.9, 0.2]]).unwrap();
        // 3x3 cofactors times a common 2x2 factor give 4x4, so pad to 5x5.
        let grow = |k: &BlurKernel| {
            BlurKernel::normalized(conv2_full(k.weights(), &s).zero_pad(5, 5)).unwrap()
        };
        let m = coprimality_check(&grow(&p.k1), &grow(&p.k2), 4);
        assert!(m <= 1e-8, "{m}");
    }

    #[test]
    fn identity_encoding() {
        let latent = Frame::gray(ImagePlane::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap(), 0);
        let pair = CoprimePair {
            k1: BlurKernel::identity(),
            k2: BlurKernel::identity(),
            coprimality_margin: 1.0,
            seed: 0,
        };
        let out = encode_frame(&latent, &pair).unwrap();
        assert_eq!(out.public.planes(), latent.planes());
        assert_eq!(out.private.planes(), latent.planes());
    }

    #[test]
    fn constant_image_stays_constant_inside() {
        let pair = generate_coprime_pair(3, 1, DEFAULT_MAX_RETRIES).unwrap();
        let out = encode_frame(&Frame::gray(ImagePlane::filled(8, 8, 1.0), 0), &pair).unwrap();
        for f in [&out.public, &out.private] {
            assert_eq!(f.dims(), (10, 10));
            let p = &f.planes()[0];
            for r in 2..8 {
                for c in 2..8 {
                    assert!((p[(r, c)] - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn too_small_frames_are_rejected() {
        let pair = generate_coprime_pair(5, 1, DEFAULT_MAX_RETRIES).unwrap();
        let err = encode_frame(&Frame::gray(ImagePlane::zeros(4, 9), 0), &pair).unwrap_err();
        assert!(matches!(err, Error::FrameTooSmall { .. }));
    }

    #[test]
    fn quantize_to_nearest_level() {
        let f = Frame::gray(ImagePlane::filled(1, 1, 0.5), 0);
        let q = quantize_frame(&f, BitDepth::U8).unwrap();
        assert_eq!(q.planes()[0][(0, 0)], 128.0 / 255.0);
        assert_eq!(q.bit_depth(), BitDepth::U8);
        assert_eq!(quantize_frame(&q, BitDepth::U8).unwrap(), q);
    }

    #[test]
    fn quantize_error_bound_u16() {
        let f = Frame::gray(
            ImagePlane::from_fn(16, 16, |r, c| ((r * 16 + c) as f64 * 0.6180339).fract()),
            0,
        );
        let q = quantize_frame(&f, BitDepth::U16).unwrap();
        assert!(q.planes()[0].max_abs_diff(&f.planes()[0]) <= 0.5 / 65535.0 + 1e-15);
    }

    #[test]
    fn quantize_range_check() {
        let f = Frame::gray(ImagePlane::filled(1, 2, 1.01), 0);
        assert!(matches!(
            quantize_frame(&f, BitDepth::U8),
            Err(Error::RangeExceeded { .. })
        ));
        let edge = Frame::gray(ImagePlane::filled(1, 1, 1.0 + 5e-10), 0);
        assert!(quantize_frame(&edge, BitDepth::U8).is_ok());
    }

    #[test]
    fn degrade_masks_low_bits() {
        let f = Frame::new(
            vec![ImagePlane::filled(1, 1, 0b1011_0111 as f64 / 255.0)],
            BitDepth::U8,
            0,
        )
        .unwrap();
        let d = degrade_bits(&f, 3).unwrap();
        assert_eq!(d.planes()[0][(0, 0)] * 255.0, 0b1011_0000 as f64);
        assert_eq!(degrade_bits(&f, 0).unwrap(), f);
        assert!(matches!(
            degrade_bits(&f, 8),
            Err(Error::InvalidArgument(_))
        ));
        let float = Frame::gray(ImagePlane::zeros(1, 1), 0);
        assert!(matches!(degrade_bits(&float, 1), Err(Error::NotQuantized)));
    }

    #[test]
    fn frame_seeds_differ() {
        assert_ne!(frame_seed(1, 0), frame_seed(1, 1));
        assert_ne!(frame_seed(1, 0), frame_seed(2, 0));
    }
}
