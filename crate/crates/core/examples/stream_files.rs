//! Encode a short latent stream to public/private directories on disk,
//! pair them back up and decode every frame.
//!
//! `cargo run --release --example stream_files -- [out_dir]`

use std::path::PathBuf;

use coprime_blur::bench::random_latent;
use coprime_blur::encoder::{frame_seed, pair_id_for};
use coprime_blur::stream_io::{pair_streams, read_stream, write_stream, Role, StreamManifest};
use coprime_blur::{decode_frame, encode_frame, generate_coprime_pair, psnr, DecoderConfig, Frame};

fn main() -> coprime_blur::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cbp-stream-example"));
    let (t, seed) = (5, 2024);

    let latent: Vec<Frame> = (0..4)
        .map(|i| Frame::gray(random_latent(48, 64, i), i))
        .collect();
    let mut public = Vec::new();
    let mut private = Vec::new();
    for (i, frame) in latent.iter().enumerate() {
        let pair = generate_coprime_pair(t, frame_seed(seed, i as u64), 16)?;
        let b = encode_frame(frame, &pair)?;
        public.push(b.public);
        private.push(b.private);
    }
    let id = pair_id_for(seed, t);
    for (frames, role, name) in [
        (&public, Role::Public, "public"),
        (&private, Role::Private, "private"),
    ] {
        let mut m = StreamManifest::describe(frames, role, id.clone());
        m.kernel_width_hint = Some(t);
        write_stream(frames, &m, &root.join(name))?;
    }
    println!("wrote {}", root.display());
    println!(
        "{}",
        StreamManifest::describe(&public, Role::Public, id).to_json()
    );

    let (stored, _) = read_stream(&root.join("public"))?;
    let rounding = stored
        .iter()
        .zip(&public)
        .map(|(a, b)| a.planes()[0].max_abs_diff(&b.planes()[0]))
        .fold(0.0, f64::max);
    println!("samples stored as float32, max rounding {rounding:.1e}");

    let cfg = DecoderConfig {
        trust_hint: true,
        ..DecoderConfig::default()
    };
    for (i, pair) in pair_streams(&root.join("public"), &root.join("private"))?
        .iter()
        .enumerate()
    {
        let d = decode_frame(pair, &cfg)?;
        println!(
            "frame {i}: {:.2} dB, residual {:.2e}",
            psnr(&latent[i], &d.latent)?,
            d.validation_residual
        );
    }
    Ok(())
}
