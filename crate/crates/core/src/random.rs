//! Seeded generators for test grids and property suites.
//!
//! Every generator takes an explicit RNG built from a 64-bit seed with
//! [`seeded_rng`], so runs are reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::{identity, qr_full, ComplexMatrix, ONE};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Entries with independent standard normal real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), normal(rng)))
}

pub fn real_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(rng), 0.0))
}

/// Gaussian entries rounded to multiples of 1/8. Products and sums of a few
/// such numbers are exact in binary floating point, so rank deficiencies
/// built from them survive the arithmetic exactly.
pub fn dyadic<R: Rng + ?Sized>(rows: usize, cols: usize, real: bool, rng: &mut R) -> ComplexMatrix {
    let round = |x: f64| (x * 8.0).round() / 8.0;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re = round(normal(rng));
        let im = if real { 0.0 } else { round(normal(rng)) };
        Complex64::new(re, im)
    })
}

/// A Haar-like random unitary matrix.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let (q, _) = qr_full(&complex_gaussian(n, n, rng));
    q
}

/// Unitary times a diagonal with entries in `[1, 2]`: condition number ≤ 2.
pub fn well_conditioned<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = unitary(n, rng);
    let v = unitary(n, rng);
    let mut d = identity(n);
    for k in 0..n {
        d[(k, k)] = Complex64::new(rng.random_range(1.0..2.0), 0.0);
    }
    u * d * v.adjoint()
}

/// Integer matrix with determinant ±1 and small entries, built from a few
/// elementary row operations. Its inverse is integer too.
pub fn unimodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = identity(n);
    if n < 2 {
        if rng.random_bool(0.5) {
            m[(0, 0)] = -ONE;
        }
        return m;
    }
    for _ in 0..(2 * n) {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let k = [-1.0, 1.0][rng.random_range(0..2)];
        let row_j = m.row(j).into_owned();
        let mut row_i = m.row_mut(i);
        row_i += row_j * Complex64::new(k, 0.0);
    }
    // keep entries small so later products stay exact
    if m.iter().any(|z| z.norm() > 8.0) {
        return identity(n);
    }
    m
}

/// Rank-`rank` product of two dyadic factors, exact in floating point.
pub fn low_rank_dyadic<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rank: usize,
    real: bool,
    rng: &mut R,
) -> ComplexMatrix {
    let left = dyadic(rows, rank, real, rng);
    let right = dyadic(rank, cols, real, rng);
    left * right
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{det, rank_with_tolerance};

    #[test]
    fn same_seed_same_stream() {
        let a = complex_gaussian(3, 3, &mut seeded_rng(99));
        let b = complex_gaussian(3, 3, &mut seeded_rng(99));
        assert_eq!(a, b);
        assert_ne!(a, complex_gaussian(3, 3, &mut seeded_rng(100)));
    }

    #[test]
    fn unimodular_has_unit_determinant() {
        let mut rng = seeded_rng(1);
        for n in 1..=5 {
            let u = unimodular(n, &mut rng);
            assert!((det(&u).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn low_rank_is_exactly_deficient() {
        let mut rng = seeded_rng(2);
        let m = low_rank_dyadic(4, 4, 2, false, &mut rng);
        assert_eq!(rank_with_tolerance(&m, None).rank, 2);
    }
}
