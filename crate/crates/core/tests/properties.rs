//! Property tests for the structural invariants of the codec.

mod common;

use common::{poly_mul, q, trim, Q};
use coprime_blur::encoder::{degrade_bits, quantize_frame, DEFAULT_MAX_RETRIES};
use coprime_blur::poly::{
    axis_dft, bezout_leading_block, cofactor_null_solve, conv1_full, conv2_full, roots_of_unity,
    Axis,
};
use coprime_blur::stream_io::{Role, StreamManifest};
use coprime_blur::{encode_frame, generate_coprime_pair, BitDepth, Frame, ImagePlane};
use num_complex::Complex64;
use proptest::prelude::*;

fn plane(max_h: usize, max_w: usize) -> impl Strategy<Value = ImagePlane> {
    (1..=max_h, 1..=max_w).prop_flat_map(|(h, w)| {
        prop::collection::vec(0.0f64..1.0, h * w)
            .prop_map(move |s| ImagePlane::new(h, w, s).unwrap())
    })
}

fn int_plane(max: usize) -> impl Strategy<Value = ImagePlane> {
    (1..=max, 1..=max).prop_flat_map(|(h, w)| {
        prop::collection::vec(-6i32..=6, h * w).prop_map(move |s| {
            ImagePlane::new(h, w, s.into_iter().map(f64::from).collect()).unwrap()
        })
    })
}

fn complex_poly(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_len).prop_map(|v| {
        v.into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect()
    })
}

fn odd_width() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![3usize, 5, 7])
}

// Bivariate polynomial product on exact rationals, indexed [z1 power][z2 power].
fn bivariate_product(a: &ImagePlane, b: &ImagePlane) -> Vec<Vec<Q>> {
    let rows = |p: &ImagePlane| -> Vec<Vec<Q>> {
        p.rows()
            .map(|r| r.iter().map(|&x| q(x as i64)).collect())
            .collect()
    };
    let (ra, rb) = (rows(a), rows(b));
    let mut out = vec![Vec::<Q>::new(); ra.len() + rb.len() - 1];
    for (i, x) in ra.iter().enumerate() {
        for (j, y) in rb.iter().enumerate() {
            let prod = poly_mul(x, y);
            let acc = &mut out[i + j];
            if acc.len() < prod.len() {
                acc.resize(prod.len(), q(0));
            }
            for (k, c) in prod.into_iter().enumerate() {
                acc[k] = acc[k].clone() + c;
            }
        }
    }
    out.into_iter().map(trim).collect()
}

fn bits(f: &Frame) -> Vec<u32> {
    f.planes()
        .iter()
        .flat_map(|p| p.samples().iter().map(|&x| (x as f32).to_bits()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn convolution_is_polynomial_product(a in int_plane(6), b in int_plane(6)) {
        let c = conv2_full(&a, &b);
        let exact = bivariate_product(&a, &b);
        let (h, w) = c.dims();
        prop_assert_eq!(h, exact.len());
        for (i, row) in exact.iter().enumerate() {
            for j in 0..w {
                let want = row.get(j).map_or(0.0, common::q_to_f64);
                prop_assert_eq!(c[(i, j)], want);
            }
        }
    }

    #[test]
    fn bezout_is_antisymmetric(p in complex_poly(8), q in complex_poly(8), s in 1usize..8) {
        prop_assume!(p.iter().any(|c| c.norm() > 0.0) && q.iter().any(|c| c.norm() > 0.0));
        let pq = bezout_leading_block(&p, &q, s).unwrap();
        let qp = bezout_leading_block(&q, &p, s).unwrap();
        prop_assert!((pq + qp).iter().all(|c| c.norm() == 0.0));
        let pp = bezout_leading_block(&p, &p, s).unwrap();
        prop_assert!(pp.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dc_slices_are_axis_sums(p in plane(9, 9)) {
        let one = [Complex64::new(1.0, 0.0)];
        let z1 = axis_dft(&p, Axis::Z1, &one).unwrap();
        let z2 = axis_dft(&p, Axis::Z2, &one).unwrap();
        let (h, w) = p.dims();
        for n in 0..w {
            let sum: f64 = (0..h).map(|m| p[(m, n)]).sum();
            prop_assert!((z1.slices[0][n] - sum).norm() <= 1e-12);
        }
        for m in 0..h {
            let sum: f64 = p.row(m).iter().sum();
            prop_assert!((z2.slices[0][m] - sum).norm() <= 1e-12);
        }
    }

    #[test]
    fn inverse_dft_restores_coefficients(p in plane(9, 9)) {
        let (h, w) = p.dims();
        let roots = roots_of_unity(h);
        let set = axis_dft(&p, Axis::Z1, &roots).unwrap();
        for m in 0..h {
            for n in 0..w {
                let back: Complex64 = (0..h)
                    .map(|k| set.slices[k][n] * roots[(k * m) % h].conj())
                    .sum::<Complex64>()
                    / h as f64;
                prop_assert!((back - p[(m, n)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn cofactor_direction_ignores_common_scale(
        l in complex_poly(6),
        k1 in complex_poly(3),
        k2 in complex_poly(3),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 0.1 && l.len() >= 2 && k1.len() == 3 && k2.len() == 3);
        let p = conv1_full(&l, &k1);
        let q = conv1_full(&l, &k2);
        let Ok(base) = cofactor_null_solve(&p, &q, 3) else { return Ok(()) };
        let ps: Vec<_> = p.iter().map(|x| x * c).collect();
        let qs: Vec<_> = q.iter().map(|x| x * c).collect();
        let scaled = cofactor_null_solve(&ps, &qs, 3).unwrap();
        let tol = 1e-8 / base.gap.max(1e-6);
        for (a, b) in base.k1.iter().chain(&base.k2).zip(scaled.k1.iter().chain(&scaled.k2)) {
            prop_assert!((a - b).norm() <= tol, "{a} vs {b}, gap {}", base.gap);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn encoding_preserves_mass(latent in plane(16, 16).prop_filter("t fits", |p| p.height() >= 7 && p.width() >= 7),
                               t in odd_width(), seed in any::<u64>()) {
        let pair = generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES).unwrap();
        let frame = Frame::gray(latent.clone(), 0);
        let out = encode_frame(&frame, &pair).unwrap();
        let mass = latent.sum();
        for f in [&out.public, &out.private] {
            prop_assert!((f.planes()[0].sum() - mass).abs() <= 1e-6 * mass.abs().max(1e-12));
        }
    }

    #[test]
    fn encoding_is_deterministic(latent in plane(12, 12).prop_filter("t fits", |p| p.height() >= 5 && p.width() >= 5),
                                 t in prop::sample::select(vec![3usize, 5]), seed in any::<u64>()) {
        let frame = Frame::gray(latent, 0);
        let a = encode_frame(&frame, &generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES).unwrap()).unwrap();
        let b = encode_frame(&frame, &generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES).unwrap()).unwrap();
        prop_assert_eq!(bits(&a.public), bits(&b.public));
        prop_assert_eq!(bits(&a.private), bits(&b.private));
    }

    #[test]
    fn swapping_kernels_swaps_streams(latent in plane(12, 12).prop_filter("t fits", |p| p.height() >= 5 && p.width() >= 5),
                                      t in prop::sample::select(vec![3usize, 5]), seed in any::<u64>()) {
        let frame = Frame::gray(latent, 0);
        let pair = generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES).unwrap();
        let a = encode_frame(&frame, &pair).unwrap();
        let b = encode_frame(&frame, &pair.swapped()).unwrap();
        prop_assert_eq!(&a.public, &b.private);
        prop_assert_eq!(&a.private, &b.public);
    }

    #[test]
    fn quantization_is_idempotent(p in plane(10, 10), depth in prop::sample::select(vec![BitDepth::U8, BitDepth::U16])) {
        let once = quantize_frame(&Frame::gray(p, 0), depth).unwrap();
        let twice = quantize_frame(&once, depth).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.bit_depth(), depth);
    }

    #[test]
    fn degrading_masks_low_bits(p in plane(10, 10), depth in prop::sample::select(vec![BitDepth::U8, BitDepth::U16]), drop in 0u32..8) {
        let f = quantize_frame(&Frame::gray(p, 0), depth).unwrap();
        let g = degrade_bits(&f, drop).unwrap();
        let max = f64::from(depth.max_level().unwrap());
        for (a, b) in f.planes()[0].samples().iter().zip(g.planes()[0].samples()) {
            let (ia, ib) = ((a * max).round() as u32, (b * max).round() as u32);
            prop_assert_eq!(ib, ia & !((1u32 << drop) - 1));
        }
    }

    #[test]
    fn manifest_json_has_sorted_keys(h in 1usize..50, w in 1usize..50, count in 1usize..5,
                                     hint in prop::option::of(3usize..30), seed in prop::option::of(any::<u64>())) {
        let frames = vec![Frame::gray(ImagePlane::zeros(h, w), 0); count];
        let mut m = StreamManifest::describe(&frames, Role::Public, "id");
        m.kernel_width_hint = hint;
        m.seed = seed;
        let text = m.to_json();
        prop_assert_eq!(&text, &m.to_json());
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"').and_then(|r| r.split('"').next()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        prop_assert_eq!(keys, sorted);
    }
}
