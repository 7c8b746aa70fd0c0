use num_complex::Complex64;

use super::spectral::{fast_len, RealGrid};
use crate::plane::ImagePlane;

/// Full 2D linear convolution, i.e. the coefficient array of `a(z1,z2) * b(z1,z2)`.
///
/// The output is `(Ma + Mb - 1) x (Na + Nb - 1)`.
pub fn conv2_full(a: &ImagePlane, b: &ImagePlane) -> ImagePlane {
    let (ma, na) = a.dims();
    let (mb, nb) = b.dims();
    let (mo, no) = (ma + mb - 1, na + nb - 1);
    let mut out = ImagePlane::zeros(mo, no);
    let dst = out.samples_mut();
    // Accumulate one scaled copy of `a` per kernel tap; rows stay contiguous.
    for kr in 0..mb {
        for kc in 0..nb {
            let w = b[(kr, kc)];
            if w == 0.0 {
                continue;
            }
            for (r, row) in a.rows().enumerate() {
                let base = (r + kr) * no + kc;
                for (d, &s) in dst[base..base + na].iter_mut().zip(row) {
                    *d += w * s;
                }
            }
        }
    }
    out
}

/// Full 2D linear convolution through the FFT.
///
/// Same contract as [`conv2_full`] up to rounding; used where the direct sum
/// would dominate run time (large frames against large kernels).
pub fn conv2_fft(a: &ImagePlane, b: &ImagePlane) -> ImagePlane {
    let (mo, no) = (a.height() + b.height() - 1, a.width() + b.width() - 1);
    let grid = RealGrid::new(fast_len(mo), fast_len(no));
    let mut prod = grid.forward(a);
    for (x, y) in prod.iter_mut().zip(grid.forward(b)) {
        *x *= y;
    }
    grid.inverse_cropped(prod, mo, no)
}

/// Full 1D convolution of complex coefficient vectors (polynomial product).
pub fn conv1_full(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
