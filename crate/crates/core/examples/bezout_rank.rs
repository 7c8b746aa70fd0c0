//! The Bézout matrix of two polynomials loses one rank per degree of their
//! common factor, which is what the width estimator looks for.

use coprime_blur::poly::{bezout_leading_block, conv1_full, numerical_singularity};
use num_complex::Complex64;

fn poly(c: &[f64]) -> Vec<Complex64> {
    c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn main() -> coprime_blur::Result<()> {
    let u = poly(&[2.0, -1.0, 3.0]);
    let v = poly(&[1.0, 4.0, 1.0]);
    let mut common = poly(&[1.0]);
    for root_factor in [[1.0, 0.5], [-0.3, 1.0], [2.0, 1.0], [0.7, -1.0]] {
        let (p, q) = (conv1_full(&common, &u), conv1_full(&common, &v));
        let n = p.len() - 1;
        let mut first_singular = None;
        for s in 1..=n {
            let block = bezout_leading_block(&p, &q, s)?;
            if numerical_singularity(&block, 1e-9).singular {
                first_singular = Some(s);
                break;
            }
        }
        let g = common.len() - 1;
        let found = first_singular.map_or("none".to_string(), |s| s.to_string());
        println!(
            "deg gcd {g}, deg p {n}: rank law gives rank {}, first singular block {found}",
            n - g
        );
        common = conv1_full(&common, &poly(&root_factor));
    }
    Ok(())
}
