//! Numerical kernel shared by the encoder and decoder.
//!
//! Images are treated as bivariate polynomials (see [`ImagePlane`]), blurring
//! is polynomial multiplication ([`conv2_full`]), and evaluating a plane on the
//! unit circle along one axis ([`axis_dft`]) turns the 2D problem into a set of
//! 1D polynomial pairs. The 1D pairs are analysed with Bézout blocks
//! ([`bezout_leading_block`]) and solved for their cofactors with a small
//! dense SVD ([`cofactor_null_solve`]).
//!
//! Every function here is pure and thread-safe.
//!
//! [`ImagePlane`]: crate::ImagePlane

mod bezout;
mod conv;
mod linalg;
mod spectral;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bezout::{bezout_leading_block, sylvester_matrix};
pub use conv::{conv1_full, conv2_fft, conv2_full};
pub use linalg::{
    cofactor_null_solve, cofactor_null_solve_with, homogeneous_lsq, null_space_solve,
    numerical_singularity, singular_values, CofactorSolution, NullSolution, Singularity,
    DEFAULT_MIN_GAP,
};
pub use spectral::{
    axis_dft, axis_dft_roots, axis_energy, evaluate_at_roots, fast_len, fft2, fft2_real, ifft2,
    roots_of_unity, transpose_into, RealGrid, SpectralSliceSet, UNIT_CIRCLE_TOLERANCE,
};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Axis of an image polynomial: `Z1` runs down the rows, `Z2` across the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Z1,
    Z2,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Z1 => Axis::Z2,
            Axis::Z2 => Axis::Z1,
        }
    }
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
pub fn normalize_phase(v: &mut [Complex64]) {
    let Some(pivot) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
    else {
        return;
    };
    let r = pivot.norm();
    if r == 0.0 {
        return;
    }
    let rot = pivot.conj() / r;
    for x in v.iter_mut() {
        *x *= rot;
    }
}
