use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Leading `s x s` block of the Bézout matrix of `p` and `q`.
///
/// The Bézout matrix is defined by
/// `(p(x) q(y) - p(y) q(x)) / (x - y) = sum_ij B[i][j] x^i y^j`
/// with coefficients stored low degree first. Entry `(i, j)` only involves
/// coefficients up to index `i + j + 1`, so the block is assembled directly
/// from the first `2s` coefficients without forming the full matrix.
pub fn bezout_leading_block(p: &[Complex64], q: &[Complex64], s: usize) -> Result<ComplexMatrix> {
    let zero = Complex64::new(0.0, 0.0);
    if p.iter().all(|c| *c == zero) {
        return Err(Error::DegenerateInput("p is the zero polynomial"));
    }
    if q.iter().all(|c| *c == zero) {
        return Err(Error::DegenerateInput("q is the zero polynomial"));
    }
    let coeff = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or(zero);
    Ok(ComplexMatrix::from_fn(s, s, |i, j| {
        (0..=i.min(j)).fold(zero, |acc, k| {
            let hi = i + j + 1 - k;
            acc + (coeff(p, hi) * coeff(q, k) - coeff(q, hi) * coeff(p, k))
        })
    }))
}

/// Sylvester matrix of `p` (degree `m`) and `q` (degree `n`), size `(m+n) x (m+n)`.
///
/// Column `j < n` holds `p` shifted down by `j`; column `n + j` holds `q`
/// shifted down by `j`. Degrees are taken from the slice lengths, so callers
/// should trim vanishing leading coefficients first.
pub fn sylvester_matrix(p: &[Complex64], q: &[Complex64]) -> ComplexMatrix {
    let m = p.len().saturating_sub(1);
    let n = q.len().saturating_sub(1);
    let size = m + n;
    let mut s = ComplexMatrix::zeros(size, size);
    for j in 0..n {
        for (k, &c) in p.iter().enumerate() {
            s[(j + k, j)] = c;
        }
    }
    for j in 0..m {
        for (k, &c) in q.iter().enumerate() {
            s[(j + k, n + j)] = c;
        }
    }
    s
}
