//! Clearance tiers: users who receive fewer bits of the 8-bit streams get a
//! worse reconstruction.

use coprime_blur::encoder::{degrade_bits, quantize_frame};
use coprime_blur::{
    decode_frame, encode_frame, generate_coprime_pair, psnr, BitDepth, BlurredPair, DecoderConfig,
    Frame, ImagePlane,
};

fn main() -> coprime_blur::Result<()> {
    let scene = Frame::gray(
        ImagePlane::from_fn(64, 64, |r, c| {
            let (x, y) = (c as f64 / 63.0, r as f64 / 63.0);
            0.5 + 0.25 * (9.0 * x).sin() * (7.0 * y).cos() + 0.2 * ((r / 8 + c / 8) % 2) as f64
        }),
        0,
    );
    let t = 3;
    let blurred = encode_frame(&scene, &generate_coprime_pair(t, 11, 16)?)?;
    let public = quantize_frame(&blurred.public, BitDepth::U8)?;
    let private = quantize_frame(&blurred.private, BitDepth::U8)?;
    let cfg = DecoderConfig {
        trust_hint: true,
        ..DecoderConfig::default()
    };
    println!(
        "public stream only: {:.2} dB",
        psnr(&scene, &public.map_planes(|p| p.crop(64, 64)))?
    );
    for drop in [0, 2, 4, 6] {
        let pair = BlurredPair::new(
            degrade_bits(&public, drop)?,
            degrade_bits(&private, drop)?,
            Some(t),
            "tiers",
        )?;
        match decode_frame(&pair, &cfg) {
            Ok(d) => println!("drop {drop} bits: {:.2} dB", psnr(&scene, &d.latent)?),
            Err(e) => println!("drop {drop} bits: decode failed ({e})"),
        }
    }
    Ok(())
}
