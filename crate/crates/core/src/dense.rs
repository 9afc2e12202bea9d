//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. All functions
//! take their inputs by reference and return fresh values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SylvError};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Builds a matrix from row-major data.
pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "entry count does not match shape");
    ComplexMatrix::from_row_slice(rows, cols, data)
}

/// Builds a matrix from row-major real data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "entry count does not match shape");
    ComplexMatrix::from_fn(rows, cols, |i, j| Complex64::new(data[i * cols + j], 0.0))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Checks that every entry is finite; `name` labels the error.
pub fn ensure_finite(m: &ComplexMatrix, name: &str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(SylvError::NonFinite {
                    name: name.to_string(),
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(())
}

/// Portable form of a matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(SylvError::Format(format!(
                "{}x{} matrix needs {} entries, found {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.entries.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }
}

/// `#[serde(with = ...)]` adapter writing matrices as [`MatrixJson`].
pub mod matrix_serde {
    use super::{ComplexMatrix, MatrixJson};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::{ComplexMatrix, MatrixJson};
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(
            m: &Option<ComplexMatrix>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            m.as_ref().map(MatrixJson::from).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<ComplexMatrix>, D::Error> {
            Option::<MatrixJson>::deserialize(d)?
                .map(|j| j.to_matrix())
                .transpose()
                .map_err(serde::de::Error::custom)
        }
    }
}

/// `#[serde(with = ...)]` adapter that keeps non-finite reals representable:
/// `"inf"`, `"-inf"` and `"nan"` stand in for what JSON numbers cannot hold.
pub mod float_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            x if x.is_finite() => s.serialize_f64(x),
            x if x.is_nan() => s.serialize_str("nan"),
            x if x > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {t:?}"
                ))),
            },
        }
    }
}

/// Stacks the columns of `x` into a single column.
pub fn vec(x: &ComplexMatrix) -> ComplexMatrix {
    // nalgebra storage is column-major, which is exactly the vec ordering.
    ComplexMatrix::from_column_slice(x.len(), 1, x.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.ncols() != 1 || v.nrows() != rows * cols {
        return Err(SylvError::DimensionMismatch(format!(
            "cannot reshape {}x{} into {rows}x{cols}",
            v.nrows(),
            v.ncols()
        )));
    }
    Ok(ComplexMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// Kronecker product `p ⊗ q`.
pub fn kron(p: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    let (pr, pc) = p.shape();
    let (qr, qc) = q.shape();
    let mut out = zeros(pr * qr, pc * qc);
    for pj in 0..pc {
        for pi in 0..pr {
            let s = p[(pi, pj)];
            if s == ZERO {
                continue;
            }
            for qj in 0..qc {
                for qi in 0..qr {
                    out[(pi * qr + qi, pj * qc + qj)] = s * q[(qi, qj)];
                }
            }
        }
    }
    out
}

/// The `mn × mn` permutation with `Π·vec(X) = vec(Xᵀ)` for `X` of size `m × n`.
pub fn commutation_matrix(m: usize, n: usize) -> ComplexMatrix {
    let mut pi = zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            // X[i,j] sits at i + j*m in vec(X) and at j + i*n in vec(Xᵀ).
            pi[(j + i * n, i + j * m)] = ONE;
        }
    }
    pi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
}

impl RankResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Ratio of the singular value nearest the cut to the tolerance, in
    /// decades. Small values mean the rank call was close.
    pub fn margin_decades(&self) -> f64 {
        let tol = self.tolerance_used.max(f64::MIN_POSITIVE);
        self.singular_values
            .iter()
            .map(|&s| (s.max(f64::MIN_POSITIVE) / tol).log10().abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// The default cut `max(rows, cols)·ε·σ_max`.
pub fn default_rank_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    (rows.max(cols) as f64 * f64::EPSILON * sigma_max).max(f64::MIN_POSITIVE)
}

/// Numerical rank from the singular values. `tol` overrides the default cut.
pub fn rank_with_tolerance(m: &ComplexMatrix, tol: Option<f64>) -> RankResult {
    let sv = singular_values(m);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let tolerance_used = tol.unwrap_or_else(|| default_rank_tol(m.nrows(), m.ncols(), sigma_max));
    let rank = sv.iter().filter(|&&s| s > tolerance_used).count();
    RankResult {
        rank,
        singular_values: sv,
        tolerance_used,
    }
}

/// Minimum-norm least-squares solution of `m·x = b` and `‖m·x − b‖₂`.
pub fn solve_linear(m: &ComplexMatrix, b: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    solve_linear_tol(m, b, None)
}

pub fn solve_linear_tol(
    m: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: Option<f64>,
) -> Result<(ComplexMatrix, f64)> {
    if m.nrows() != b.nrows() {
        return Err(SylvError::DimensionMismatch(format!(
            "system has {} rows but right-hand side has {}",
            m.nrows(),
            b.nrows()
        )));
    }
    if m.is_empty() {
        return Ok((zeros(m.ncols(), b.ncols()), b.norm()));
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol.unwrap_or_else(|| default_rank_tol(m.nrows(), m.ncols(), sigma_max));
    let x = svd
        .solve(b, cut)
        .map_err(|e| SylvError::Precondition(e.to_string()))?;
    let residual = (m * &x - b).norm();
    Ok((x, residual))
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(SylvError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.is_empty() {
        return Ok(ONE);
    }
    Ok(m.clone().lu().determinant())
}

/// Inverse of a square matrix; fails when it is numerically singular.
pub fn inverse(m: &ComplexMatrix, name: &str, tol: Option<f64>) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(SylvError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let r = rank_with_tolerance(m, tol);
    if r.rank < m.nrows() {
        return Err(SylvError::SingularMatrix(name.to_string()));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| SylvError::SingularMatrix(name.to_string()))
}

/// Orthonormal basis of the numerical right null space, one vector per column.
pub fn null_space(m: &ComplexMatrix, tol: Option<f64>) -> ComplexMatrix {
    let (r, c) = m.shape();
    if c == 0 {
        return zeros(0, 0);
    }
    // Pad with zero rows so the SVD yields a full set of right singular vectors.
    let padded = if r < c {
        let mut p = zeros(c, c);
        p.rows_mut(0, r).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol.unwrap_or_else(|| default_rank_tol(r, c, sigma_max));
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let mut basis = zeros(c, null.len());
    for (out, &k) in null.iter().enumerate() {
        for j in 0..c {
            basis[(j, out)] = v_t[(k, j)].conj();
        }
    }
    basis
}

/// Full Householder QR: `m = q·r` with `q` unitary (`rows × rows`) and `r`
/// upper trapezoidal.
pub fn qr_full(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (rows, cols) = m.shape();
    let mut r = m.clone();
    let mut q = identity(rows);
    for k in 0..cols.min(rows.saturating_sub(1)) {
        let x: DVector<Complex64> = r.view((k, k), (rows - k, 1)).column(0).into_owned();
        let norm_x = x.norm();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let alpha = -phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= Complex64::new(vnorm, 0.0);
        // r[k.., ..] -= 2 v (v* r[k.., ..])
        let mut block = r.rows_mut(k, rows - k);
        let w = v.adjoint() * &block;
        block -= (&v * w) * Complex64::new(2.0, 0.0);
        // q[.., k..] -= 2 (q[.., k..] v) v*
        let mut qblock = q.columns_mut(k, rows - k);
        let u = &qblock * &v;
        qblock -= (u * v.adjoint()) * Complex64::new(2.0, 0.0);
    }
    (q, r)
}

/// Eigenvalues of a square matrix via a Schur decomposition.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let t = schur_form(m);
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > f64::EPSILON * scale {
            // 2×2 diagonal block left by the iteration.
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Triangular Schur factor. The QR iteration occasionally stalls on highly
/// structured input; a fixed unitary similarity breaks the symmetry and
/// leaves the eigenvalues unchanged.
fn schur_form(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    let mut work = m.clone();
    for attempt in 0..4u32 {
        if let Some(s) = nalgebra::linalg::Schur::try_new(work.clone(), f64::EPSILON, 10_000) {
            return s.unpack().1;
        }
        let angle = 0.3 + attempt as f64;
        let (q, _) = qr_full(&ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::from_polar(1.0, angle * (i * n + j + 1) as f64)
                + if i == j { ONE * 2.0 } else { ZERO }
        }));
        work = q.adjoint() * &work * q;
    }
    nalgebra::linalg::Schur::new(work).unpack().1
}
