//! Hide a frame behind a coprime blur pair and recover it from both streams.
//!
//! `cargo run --release --example roundtrip -- [kernel_width seed]`

use coprime_blur::bench::random_latent;
use coprime_blur::decoder::validate_pair;
use coprime_blur::{decode_frame, encode_frame, generate_coprime_pair, psnr, DecoderConfig, Frame};

fn main() -> coprime_blur::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let t = args.first().copied().unwrap_or(9) as usize;
    let seed = args.get(1).copied().unwrap_or(7);

    let latent = Frame::gray(random_latent(96, 96, seed), 0);
    let pair = generate_coprime_pair(t, seed, 16)?;
    println!(
        "kernels {t}x{t}, coprimality margin {:.3e}",
        pair.coprimality_margin
    );

    let blurred = encode_frame(&latent, &pair)?;
    let (h, w) = blurred.dims();
    println!("public and private frames are {h}x{w}");
    println!(
        "public stream alone: {:.2} dB",
        psnr(&latent, &blurred.public.map_planes(|p| p.crop(96, 96)))?
    );

    let search: Vec<usize> = (3..=t.max(9) + 4).step_by(2).collect();
    let cfg = DecoderConfig {
        search,
        ..DecoderConfig::default()
    };
    let decoded = decode_frame(&blurred, &cfg)?;
    let swapped = decode_frame(&blurred.swapped(), &cfg)?;
    println!("estimated width {}", decoded.width_used);
    println!(
        "kernel error {:.3e}",
        decoded
            .kernel_estimate
            .weights()
            .max_abs_diff(pair.k1.weights())
    );
    println!(
        "reconstruction {:.2} dB, residual {:.3e}",
        psnr(&latent, &decoded.latent)?,
        decoded.validation_residual
    );
    println!(
        "cross-convolution residual {:.3e}",
        validate_pair(&blurred, &decoded.kernel_estimate, &swapped.kernel_estimate)
    );
    let s = decoded.stage_timings;
    println!(
        "stages (ms): evaluation {:.2}, degree {:.2}, 1d {:.2}, 2d+fft {:.2}, total {:.2}",
        s.polynomial_evaluation,
        s.kernel_degree_estimation,
        s.kernel_estimation_1d,
        s.kernel_estimation_2d_fft,
        s.total
    );
    Ok(())
}
