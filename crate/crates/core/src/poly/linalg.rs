use num_complex::Complex64;

use super::{normalize_phase, ComplexMatrix};
use crate::error::{Error, Result};

/// Default lower bound on `sigma_{2t-1} / sigma_max` for a cofactor solve.
pub const DEFAULT_MIN_GAP: f64 = 1e-10;

/// Result of a numerical singularity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub singular: bool,
    /// `sigma_min / sigma_max`, or 0 for the zero matrix.
    pub ratio: f64,
}

/// Unit null direction of a matrix together with its spectrum.
#[derive(Debug, Clone)]
pub struct NullSolution {
    /// Right singular vector of the smallest singular value, phase-normalized.
    pub vector: Vec<Complex64>,
    /// Singular values in descending order, one per column.
    pub singular_values: Vec<f64>,
}

impl NullSolution {
    /// `||A x||_2` for the returned unit vector, i.e. the smallest singular value.
    pub fn residual(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Cofactor pair recovered from one 1D polynomial pair.
#[derive(Debug, Clone)]
pub struct CofactorSolution {
    pub k1: Vec<Complex64>,
    pub k2: Vec<Complex64>,
    /// Second-smallest over largest singular value of the cofactor system.
    pub gap: f64,
    /// Smallest over largest singular value; near zero when the pair really
    /// shares a factor of the expected degree.
    pub null_ratio: f64,
}

// Reduces a tall matrix to its square R factor, which has the same singular
// values and right singular vectors; pads a wide matrix with zero rows.
fn squared_up(a: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = a.shape();
    if rows > cols {
        a.clone().qr().r()
    } else if rows < cols {
        a.clone().resize_vertically(cols, Complex64::new(0.0, 0.0))
    } else {
        a.clone()
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = squared_up(a).singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Decides whether a small square matrix is numerically singular.
///
/// `singular` holds when `sigma_min / sigma_max < tau` or the matrix is zero.
pub fn numerical_singularity(a: &ComplexMatrix, tau: f64) -> Singularity {
    let sv = singular_values(a);
    let (Some(&max), Some(&min)) = (sv.first(), sv.last()) else {
        return Singularity {
            singular: true,
            ratio: 0.0,
        };
    };
    if max == 0.0 {
        return Singularity {
            singular: true,
            ratio: 0.0,
        };
    }
    let ratio = min / max;
    Singularity {
        singular: ratio < tau,
        ratio,
    }
}

/// Unit vector minimizing `||A x||_2`, with the full singular spectrum.
pub fn null_space_solve(a: &ComplexMatrix) -> NullSolution {
    let cols = a.ncols();
    assert!(cols > 0, "null space of a matrix without columns");
    let svd = squared_up(a).svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    // Rows of V^H are conjugated right singular vectors.
    let mut vector: Vec<Complex64> = v_t.row(idx).iter().map(|z| z.conj()).collect();
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut vector {
        *z /= norm;
    }
    normalize_phase(&mut vector);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    NullSolution {
        vector,
        singular_values,
    }
}

/// Homogeneous least squares: the unit `x` minimizing `||A x||_2`.
pub fn homogeneous_lsq(a: &ComplexMatrix) -> Vec<Complex64> {
    null_space_solve(a).vector
}

/// [`cofactor_null_solve_with`] using [`DEFAULT_MIN_GAP`].
pub fn cofactor_null_solve(p: &[Complex64], q: &[Complex64], t: usize) -> Result<CofactorSolution> {
    cofactor_null_solve_with(p, q, t, DEFAULT_MIN_GAP)
}

/// Recovers cofactors `k1, k2` of length `t` with `p * k2 = q * k1`.
///
/// If `p = l * k1*` and `q = l * k2*` with coprime cofactors, the stacked
/// convolution system `[C(p) | -C(q)] [k2; k1] = 0` has a one-dimensional null
/// space spanned by `(k2*, k1*)`. The returned pair is that null vector,
/// unit-norm and phase-normalized, split back into its halves.
///
/// Fails with [`Error::IllConditioned`] when the second-smallest singular
/// value is below `min_gap` relative to the largest, meaning the null space is
/// not one-dimensional (wrong `t`, a common factor between the cofactors, or
/// a degenerate pair).
pub fn cofactor_null_solve_with(
    p: &[Complex64],
    q: &[Complex64],
    t: usize,
    min_gap: f64,
) -> Result<CofactorSolution> {
    assert!(t >= 1, "cofactor length must be positive");
    let n = p.len().max(q.len());
    let zero = Complex64::new(0.0, 0.0);
    let mut a = ComplexMatrix::zeros(n + t - 1, 2 * t);
    for j in 0..t {
        for (k, &c) in p.iter().enumerate() {
            a[(j + k, j)] = c;
        }
        for (k, &c) in q.iter().enumerate() {
            a[(j + k, t + j)] = zero - c;
        }
    }
    let sol = null_space_solve(&a);
    let sv = &sol.singular_values;
    let max = sv[0];
    let (gap, null_ratio) = if max > 0.0 {
        (sv[sv.len() - 2] / max, sv[sv.len() - 1] / max)
    } else {
        (0.0, 0.0)
    };
    if !(gap >= min_gap) {
        return Err(Error::IllConditioned {
            gap,
            threshold: min_gap,
        });
    }
    let (k2, k1) = sol.vector.split_at(t);
    Ok(CofactorSolution {
        k1: k1.to_vec(),
        k2: k2.to_vec(),
        gap,
        null_ratio,
    })
}
