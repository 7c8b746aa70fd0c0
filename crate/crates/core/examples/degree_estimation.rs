//! Kernel width estimation from the Bézout blocks of one slice pair.
//!
//! Blocks smaller than the kernel width are regular; the block of size `t`
//! and every larger one are singular.

use coprime_blur::bench::random_latent;
use coprime_blur::decoder::{degree_slices, width_from_slices, DEFAULT_TAU};
use coprime_blur::poly::Axis;
use coprime_blur::{encode_frame, generate_coprime_pair, Frame};

fn main() -> coprime_blur::Result<()> {
    let search: Vec<usize> = (3..=15).step_by(2).collect();
    for t in [3, 5, 9, 11] {
        let latent = Frame::gray(random_latent(96, 96, t as u64), 0);
        let blurred = encode_frame(&latent, &generate_coprime_pair(t, 100 + t as u64, 16)?)?;
        let slices = degree_slices(&blurred.public.planes()[0], &blurred.private.planes()[0]);
        for axis in [Axis::Z1, Axis::Z2] {
            let (p, q) = slices.axis(axis);
            let est = width_from_slices(p, q, &search, DEFAULT_TAU)?;
            let ratios: Vec<String> = est
                .ratios
                .iter()
                .map(|(s, r)| format!("{s}:{r:.0e}"))
                .collect();
            println!(
                "t={t:>2} {axis:?}: estimate {:>2}  [{}]",
                est.width,
                ratios.join(" ")
            );
        }
    }
    Ok(())
}
