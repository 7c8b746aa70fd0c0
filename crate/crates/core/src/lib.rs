//! Coprime blurred pair codec.
//!
//! A latent frame `L` is hidden behind two blurrings `B1 = L * K1` (public)
//! and `B2 = L * K2` (private) with random kernels whose z-transforms are
//! coprime. Holding both streams, the latent frame is the polynomial GCD of
//! `b1` and `b2`; [`decoder::decode_frame`] recovers it together with `K1`.
//!
//! ```
//! use coprime_blur::{decode_frame, encode_frame, generate_coprime_pair, DecoderConfig, Frame, ImagePlane};
//!
//! let latent = Frame::gray(ImagePlane::from_fn(24, 24, |r, c| ((r * 7 + c * 13) % 17) as f64 / 17.0), 0);
//! let pair = generate_coprime_pair(3, 42, 16)?;
//! let blurred = encode_frame(&latent, &pair)?;
//! let cfg = DecoderConfig { search: vec![3, 5, 7], ..Default::default() };
//! let decoded = decode_frame(&blurred, &cfg)?;
//! assert_eq!(decoded.width_used, 3);
//! assert!(decoded.latent.planes()[0].max_abs_diff(&latent.planes()[0]) < 1e-6);
//! # Ok::<(), coprime_blur::Error>(())
//! ```

// Negated float comparisons are used on purpose so NaN takes the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod plane;
pub mod poly;
pub mod stream_io;

pub use decoder::{decode_frame, DecodedFrame, DecoderConfig, StageTimings};
pub use encoder::{encode_frame, generate_coprime_pair, BlurKernel, BlurredPair, CoprimePair};
pub use error::{Error, Result, Stage};
pub use frame::{BitDepth, Frame};
pub use metrics::psnr;

pub use plane::ImagePlane;
