//! Exact-arithmetic oracles and synthetic data shared by the integration tests.
#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use coprime_blur::encoder::DEFAULT_MAX_RETRIES;
use coprime_blur::{
    encode_frame, generate_coprime_pair, BlurredPair, CoprimePair, Frame, ImagePlane,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut impl Rng, h: usize, w: usize) -> ImagePlane {
    ImagePlane::from_fn(h, w, |_, _| rng.random::<f64>())
}

/// Random `h x h` latent, a seeded coprime pair of width `t`, and the encoding.
pub fn synthetic(h: usize, t: usize, seed: u64) -> (Frame, CoprimePair, BlurredPair) {
    let mut r = rng(seed ^ 0x5EED);
    let latent = Frame::gray(random_plane(&mut r, h, h), 0);
    let pair = generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES).unwrap();
    let blurred = encode_frame(&latent, &pair).unwrap();
    (latent, pair, blurred)
}

/// Exact field arithmetic needed by polynomial Euclid and Gaussian elimination.
pub trait Field:
    Clone
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Self;
}

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
}

impl Field for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

/// `a + b w` in the cyclotomic field Q(w), `w^2 + w + 1 = 0`.
///
/// `w` is embedded as `exp(-2 pi i / 3)`, matching the library's roots of unity.
#[derive(Clone, Debug, PartialEq)]
pub struct Q3 {
    pub a: Q,
    pub b: Q,
}

impl Q3 {
    pub fn rational(a: Q) -> Self {
        Q3 { a, b: q(0) }
    }

    /// `w^k`.
    pub fn root_power(k: usize) -> Self {
        match k % 3 {
            0 => Q3 { a: q(1), b: q(0) },
            1 => Q3 { a: q(0), b: q(1) },
            _ => Q3 { a: q(-1), b: q(-1) },
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let w = Complex64::from_polar(1.0, -std::f64::consts::TAU / 3.0);
        q_to_f64(&self.a) + w * q_to_f64(&self.b)
    }
}

impl Add for Q3 {
    type Output = Q3;
    fn add(self, o: Q3) -> Q3 {
        Q3 {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }
}

impl Sub for Q3 {
    type Output = Q3;
    fn sub(self, o: Q3) -> Q3 {
        Q3 {
            a: self.a - o.a,
            b: self.b - o.b,
        }
    }
}

impl Neg for Q3 {
    type Output = Q3;
    fn neg(self) -> Q3 {
        Q3 {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl Mul for Q3 {
    type Output = Q3;
    fn mul(self, o: Q3) -> Q3 {
        let bd = &self.b * &o.b;
        Q3 {
            a: &self.a * &o.a - &bd,
            b: &self.a * &o.b + &self.b * &o.a - bd,
        }
    }
}

impl Field for Q3 {
    fn zero() -> Self {
        Q3 { a: q(0), b: q(0) }
    }
    fn one() -> Self {
        Q3 { a: q(1), b: q(0) }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn inv(&self) -> Self {
        // conjugate a + b w^2 = (a - b) - b w; norm a^2 - ab + b^2
        let norm = &self.a * &self.a - &self.a * &self.b + &self.b * &self.b;
        Q3 {
            a: (&self.a - &self.b) / &norm,
            b: -(&self.b) / norm,
        }
    }
}

/// Polynomial with coefficients low degree first, no trailing zeros.
pub fn trim<F: Field>(mut p: Vec<F>) -> Vec<F> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn degree<F: Field>(p: &[F]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn poly_mul<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![F::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    trim(out)
}

/// Quotient and remainder of `a / b`, `b` nonzero.
pub fn poly_divmod<F: Field>(a: &[F], b: &[F]) -> (Vec<F>, Vec<F>) {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = b[db].inv();
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut quot = vec![F::zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap().clone() * lead_inv.clone();
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] = r[shift + k].clone() - c.clone() * bk.clone();
        }
        quot[shift] = c;
        r.pop();
        r = trim(r);
    }
    (trim(quot), r)
}

/// Monic greatest common divisor by the Euclidean algorithm.
pub fn poly_gcd<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divmod(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().expect("gcd of two zero polynomials").inv();
    x.into_iter().map(|c| c * lead.clone()).collect()
}

/// Full `n x n` Bézout matrix, `n = max(deg p, deg q)`, computed by dividing
/// `p(x) q(y) - p(y) q(x)` by `x - y` coefficient by coefficient.
pub fn bezout_exact<F: Field>(p: &[F], q: &[F]) -> Vec<Vec<F>> {
    let n = p.len().max(q.len()) - 1;
    let at = |v: &[F], k: usize| v.get(k).cloned().unwrap_or_else(F::zero);
    // F[a][b] = p_a q_b - p_b q_a
    let f = |a: usize, b: usize| at(p, a) * at(q, b) - at(p, b) * at(q, a);
    // (x - y) G = F  =>  G[i][j] = F[i+1][j] + G[i+1][j-1]
    let mut g = vec![vec![F::zero(); n + 1]; n + 1];
    for j in 0..n {
        for i in (0..n).rev() {
            let prev = if j == 0 {
                F::zero()
            } else {
                g[i + 1][j - 1].clone()
            };
            g[i][j] = f(i + 1, j) + prev;
        }
    }
    g.truncate(n);
    g.iter_mut().for_each(|row| row.truncate(n));
    g
}

/// Rank by fraction-exact Gaussian elimination.
pub fn rank<F: Field>(m: &[Vec<F>]) -> usize {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        let inv = a[rank][c].inv();
        for r in rank + 1..rows {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone() * inv.clone();
            let pivot_row = a[rank].clone();
            for (x, p) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        rank += 1;
    }
    rank
}

/// Leading `s x s` block of a square matrix, zero-extended past its size.
pub fn leading_block<F: Field>(m: &[Vec<F>], s: usize) -> Vec<Vec<F>> {
    (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    m.get(i)
                        .and_then(|r| r.get(j))
                        .cloned()
                        .unwrap_or_else(F::zero)
                })
                .collect()
        })
        .collect()
}

pub fn random_rational(rng: &mut impl Rng) -> Q {
    let n = rng.random_range(-9i64..=9);
    let d = rng.random_range(1i64..=5);
    q_frac(n, d)
}

/// Random rational polynomial of exact degree `deg`.
pub fn random_rational_poly(rng: &mut impl Rng, deg: usize) -> Vec<Q> {
    let mut p: Vec<Q> = (0..=deg).map(|_| random_rational(rng)).collect();
    while Field::is_zero(&p[deg]) {
        p[deg] = random_rational(rng);
    }
    p
}

pub fn q_poly_to_complex(p: &[Q]) -> Vec<Complex64> {
    p.iter().map(|c| Complex64::new(q_to_f64(c), 0.0)).collect()
}

pub fn as_int(x: f64) -> i64 {
    assert_eq!(x.fract(), 0.0, "{x} is not an integer");
    x as i64
}

/// Exact slices of an integer plane at the powers of `w` along rows (`by_rows`
/// evaluates `z1`, leaving polynomials in `z2`) or along columns.
pub fn exact_slices_q3(plane: &ImagePlane, by_rows: bool) -> Vec<Vec<Q3>> {
    let (h, w) = plane.dims();
    (0..3)
        .map(|i| {
            let (outer, inner) = if by_rows { (w, h) } else { (h, w) };
            trim(
                (0..outer)
                    .map(|n| {
                        (0..inner).fold(Q3::zero(), |acc, m| {
                            let v = if by_rows {
                                plane[(m, n)]
                            } else {
                                plane[(n, m)]
                            };
                            acc + Q3::root_power(i * m) * Q3::rational(q(as_int(v)))
                        })
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Smallest complex `c` minimizing `|x - c y|`, with the residual's max norm.
pub fn scale_aligned_error(x: &[Complex64], y: &[Complex64]) -> f64 {
    let num: Complex64 = y.iter().zip(x).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = y.iter().map(|a| a.norm_sqr()).sum();
    let c = num / den;
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - c * b).norm())
        .fold(0.0, f64::max)
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}
