//! The vectorized linear system behind each equation. Answers S, US, SR, OR
//! and UR by rank and solves for `X`; every spectral decision is checked
//! against it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{
    commutation_matrix, default_rank_tol, kron, matrix_serde, null_space, rank_with_tolerance,
    solve_linear_tol, unvec, vec, zeros, ComplexMatrix, RankResult, ZERO,
};
use crate::equation::{GSylvInstance, Instance, StarEquationInstance};
use crate::error::{Result, SylvError};
use crate::pencil::StarKind;
use crate::tolerance::{is_borderline, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// `Bᵀ⊗A − Dᵀ⊗C`, `pq × mn`.
    #[serde(rename = "GSYLV")]
    Gsylv,
    /// `Bᵀ⊗A + (Dᵀ⊗C)Π`, `pq × mn`.
    #[serde(rename = "STAR_T")]
    StarT,
    /// Real and imaginary parts split, `2pq × 2mn`, unknowns
    /// `[vec Re X; vec Im X]`.
    #[serde(rename = "STAR_C")]
    StarC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedSystem {
    pub matrix: ComplexMatrix,
    pub layout: Layout,
    /// `(m, n)`.
    pub unknown_shape: (usize, usize),
    /// `(p, q)`.
    pub rhs_shape: (usize, usize),
}

fn real_split(m: &ComplexMatrix, rows: usize) -> ComplexMatrix {
    // [vec Re; vec Im] for a column vector
    let mut out = zeros(2 * rows, 1);
    for i in 0..rows {
        out[(i, 0)] = Complex64::new(m[(i, 0)].re, 0.0);
        out[(rows + i, 0)] = Complex64::new(m[(i, 0)].im, 0.0);
    }
    out
}

impl VectorizedSystem {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Right-hand side vector for `E`.
    pub fn rhs(&self, e: &ComplexMatrix) -> Result<ComplexMatrix> {
        if e.shape() != self.rhs_shape {
            return Err(SylvError::DimensionMismatch(format!(
                "E must be {}x{}, got {}x{}",
                self.rhs_shape.0,
                self.rhs_shape.1,
                e.nrows(),
                e.ncols()
            )));
        }
        let v = vec(e);
        Ok(match self.layout {
            Layout::StarC => real_split(&v, v.nrows()),
            _ => v,
        })
    }

    /// Unknown vector for `X`.
    pub fn unknown_vector(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = vec(x);
        match self.layout {
            Layout::StarC => real_split(&v, v.nrows()),
            _ => v,
        }
    }

    /// `X` from the unknown vector.
    pub fn unknown_matrix(&self, v: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (m, n) = self.unknown_shape;
        match self.layout {
            Layout::StarC => {
                let k = m * n;
                if v.nrows() != 2 * k {
                    return Err(SylvError::DimensionMismatch(format!(
                        "expected {} unknowns, got {}",
                        2 * k,
                        v.nrows()
                    )));
                }
                let z = ComplexMatrix::from_fn(k, 1, |i, _| {
                    Complex64::new(v[(i, 0)].re, v[(k + i, 0)].re)
                });
                unvec(&z, m, n)
            }
            _ => unvec(v, m, n),
        }
    }
}

pub fn build_star_system(inst: &StarEquationInstance) -> VectorizedSystem {
    let (p, q, m, n) = inst.sizes();
    let k1 = kron(&inst.b().transpose(), inst.a());
    let k2 = kron(&inst.d().transpose(), inst.c()) * commutation_matrix(m, n);
    let (matrix, layout) = match inst.star() {
        StarKind::Transpose => (k1 + k2, Layout::StarT),
        StarKind::ConjugateTranspose => {
            let plus = &k1 + &k2;
            let minus = &k1 - &k2;
            let (r, c) = (p * q, m * n);
            let mut big = zeros(2 * r, 2 * c);
            let re = |z: Complex64| Complex64::new(z.re, 0.0);
            let im = |z: Complex64| Complex64::new(z.im, 0.0);
            for i in 0..r {
                for j in 0..c {
                    big[(i, j)] = re(plus[(i, j)]);
                    big[(i, c + j)] = -im(minus[(i, j)]);
                    big[(r + i, j)] = im(plus[(i, j)]);
                    big[(r + i, c + j)] = re(minus[(i, j)]);
                }
            }
            (big, Layout::StarC)
        }
    };
    VectorizedSystem {
        matrix,
        layout,
        unknown_shape: (m, n),
        rhs_shape: (p, q),
    }
}

pub fn build_gsylv_system(inst: &GSylvInstance) -> VectorizedSystem {
    let (p, q, m, n) = inst.sizes();
    let matrix = kron(&inst.b().transpose(), inst.a()) - kron(&inst.d().transpose(), inst.c());
    VectorizedSystem {
        matrix,
        layout: Layout::Gsylv,
        unknown_shape: (m, n),
        rhs_shape: (p, q),
    }
}

pub fn build_system(inst: &Instance) -> VectorizedSystem {
    match inst {
        Instance::Star(i) => build_star_system(i),
        Instance::GSylv(i) => build_gsylv_system(i),
    }
}

/// The coupled system in `(vec X, vec Y)` for `⋆ = *`:
/// `AXB + CYD = 0`, `D*XC* + B*YA* = 0`.
pub fn conjugate_pair_matrix(inst: &StarEquationInstance) -> ComplexMatrix {
    let (a, b, c, d) = (inst.a(), inst.b(), inst.c(), inst.d());
    let tl = kron(&b.transpose(), a);
    let tr = kron(&d.transpose(), c);
    let bl = kron(&c.map(|z| z.conj()), &d.adjoint());
    let br = kron(&a.map(|z| z.conj()), &b.adjoint());
    let (r1, c1) = tl.shape();
    let (r2, c2) = br.shape();
    let mut m2 = zeros(r1 + r2, c1 + c2);
    m2.view_mut((0, 0), (r1, c1)).copy_from(&tl);
    m2.view_mut((0, c1), (r1, c2)).copy_from(&tr);
    m2.view_mut((r1, 0), (r2, c1)).copy_from(&bl);
    m2.view_mut((r1, c1), (r2, c2)).copy_from(&br);
    m2
}

/// Rank-based answers for every right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub layout: Layout,
    pub rows: usize,
    pub cols: usize,
    pub rank: RankResult,
    pub sr: bool,
    pub or: bool,
    pub ur: bool,
    /// The singular value nearest the cut lies within 10× of it.
    pub borderline: bool,
}

fn verdict_from_rank(layout: Layout, rows: usize, cols: usize, rank: RankResult) -> OracleVerdict {
    let sr = rank.rank == rows;
    let or = rank.rank == cols;
    let borderline = rank
        .singular_values
        .iter()
        .any(|&s| is_borderline(s, rank.tolerance_used));
    OracleVerdict {
        layout,
        rows,
        cols,
        sr,
        or,
        ur: rows == cols && sr && or,
        borderline,
        rank,
    }
}

pub fn analyze_system(sys: &VectorizedSystem, tol: &Tolerances) -> OracleVerdict {
    let rank = rank_with_tolerance(&sys.matrix, tol.rank_tol);
    verdict_from_rank(sys.layout, sys.rows(), sys.cols(), rank)
}

pub fn oracle(inst: &Instance, tol: &Tolerances) -> OracleVerdict {
    analyze_system(&build_system(inst), tol)
}

pub fn oracle_ur(inst: &Instance, tol: &Tolerances) -> bool {
    oracle(inst, tol).ur
}

pub fn oracle_sr(inst: &Instance, tol: &Tolerances) -> bool {
    oracle(inst, tol).sr
}

pub fn oracle_or(inst: &Instance, tol: &Tolerances) -> bool {
    oracle(inst, tol).or
}

/// Whether the homogeneous `⋆ = *` equation has only the zero solution,
/// decided on the coupled `(X, Y)` system.
pub fn oracle_us_conjugate_pair(inst: &StarEquationInstance, tol: &Tolerances) -> Result<bool> {
    if inst.star() != StarKind::ConjugateTranspose {
        return Err(SylvError::Precondition(
            "the coupled system applies to the conjugate transpose only".into(),
        ));
    }
    let m2 = conjugate_pair_matrix(inst);
    let r = rank_with_tolerance(&m2, tol.rank_tol);
    Ok(r.rank == m2.ncols())
}

/// Answers for one fixed right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedRhsVerdict {
    /// A solution exists.
    pub s: bool,
    /// Exactly one solution exists.
    pub us: bool,
    pub rank: usize,
    pub augmented_rank: usize,
}

/// `S`: `rank [M | e] = rank M`; `US`: `S` and full column rank.
pub fn fixed_rhs(inst: &Instance, e: &ComplexMatrix, tol: &Tolerances) -> Result<FixedRhsVerdict> {
    let sys = build_system(inst);
    let rhs = sys.rhs(e)?;
    let base = rank_with_tolerance(&sys.matrix, tol.rank_tol);
    // rescale e so its column is comparable to M and the same cut applies
    let enorm = rhs.norm();
    let sigma = base.sigma_max();
    let scaled = if enorm > 0.0 && sigma > 0.0 {
        rhs * Complex64::new(sigma / enorm, 0.0)
    } else {
        rhs
    };
    let mut aug = zeros(sys.rows(), sys.cols() + 1);
    aug.view_mut((0, 0), (sys.rows(), sys.cols()))
        .copy_from(&sys.matrix);
    aug.set_column(sys.cols(), &scaled.column(0));
    let cut = tol
        .rank_tol
        .unwrap_or_else(|| default_rank_tol(sys.rows(), sys.cols() + 1, sigma.max(scaled.norm())));
    let augmented = rank_with_tolerance(&aug, Some(cut));
    let s = augmented.rank == base.rank;
    Ok(FixedRhsVerdict {
        s,
        us: s && base.rank == sys.cols(),
        rank: base.rank,
        augmented_rank: augmented.rank,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(with = "matrix_serde")]
    pub x: ComplexMatrix,
    /// `‖lhs(X) − E‖_F` by direct evaluation of the equation.
    pub residual_fro: f64,
    pub unique: bool,
}

/// Minimum-norm least-squares solution; `unique` is the UR verdict.
pub fn solve(inst: &Instance, tol: &Tolerances) -> Result<Solution> {
    let e = inst
        .rhs()
        .ok_or_else(|| SylvError::Precondition("solving needs a right-hand side E".into()))?;
    let sys = build_system(inst);
    let rhs = sys.rhs(e)?;
    let (v, _) = solve_linear_tol(&sys.matrix, &rhs, tol.rank_tol)?;
    let x = sys.unknown_matrix(&v)?;
    let residual_fro = (inst.apply(&x)? - e).norm();
    let unique = analyze_system(&sys, tol).ur;
    Ok(Solution {
        x,
        residual_fro,
        unique,
    })
}

/// A nonzero `X` with `lhs(X) = 0`, if the homogeneous equation has one.
pub fn kernel_witness(inst: &Instance, tol: &Tolerances) -> Option<ComplexMatrix> {
    let sys = build_system(inst);
    let null = null_space(&sys.matrix, tol.rank_tol);
    if null.ncols() == 0 {
        return None;
    }
    let v = null.columns(0, 1).into_owned();
    let x = sys.unknown_matrix(&v).ok()?;
    if x.iter().all(|z| *z == ZERO) {
        None
    } else {
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{from_real_rows, identity};
    use crate::random::{complex_gaussian, seeded_rng};

    fn s(x: f64) -> ComplexMatrix {
        from_real_rows(1, 1, &[x])
    }

    fn star(a: f64, b: f64, c: f64, d: f64, k: StarKind) -> StarEquationInstance {
        StarEquationInstance::new(s(a), s(b), s(c), s(d), k).unwrap()
    }

    #[test]
    fn scalar_layouts() {
        let g = GSylvInstance::new(s(2.0), s(3.0), s(5.0), s(7.0)).unwrap();
        assert_eq!(build_gsylv_system(&g).matrix, s(3.0 * 2.0 - 7.0 * 5.0));
        let t = star(2.0, 3.0, 5.0, 7.0, StarKind::Transpose);
        assert_eq!(build_star_system(&t).matrix, s(2.0 * 3.0 + 5.0 * 7.0));
        let c = star(1.0, 1.0, 1.0, 1.0, StarKind::ConjugateTranspose);
        let sys = build_star_system(&c);
        assert_eq!(sys.matrix, from_real_rows(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn system_matches_direct_evaluation() {
        let mut rng = seeded_rng(31);
        for trial in 0..120 {
            let (p, q, m, n) = (1 + trial % 3, 1 + (trial / 3) % 3, 2, 3);
            let (a, b, c, d) = (
                complex_gaussian(p, m, &mut rng),
                complex_gaussian(n, q, &mut rng),
                complex_gaussian(p, n, &mut rng),
                complex_gaussian(m, q, &mut rng),
            );
            let x = complex_gaussian(m, n, &mut rng);
            let mut instances: Vec<Instance> = [StarKind::Transpose, StarKind::ConjugateTranspose]
                .into_iter()
                .map(|k| {
                    StarEquationInstance::new(a.clone(), b.clone(), c.clone(), d.clone(), k)
                        .unwrap()
                        .into()
                })
                .collect();
            let cg = complex_gaussian(p, m, &mut rng);
            let dg = complex_gaussian(n, q, &mut rng);
            instances.push(
                GSylvInstance::new(a.clone(), b.clone(), cg, dg)
                    .unwrap()
                    .into(),
            );
            for inst in instances {
                let sys = build_system(&inst);
                let lhs = inst.apply(&x).unwrap();
                let got = &sys.matrix * sys.unknown_vector(&x);
                let want = sys.rhs(&lhs).unwrap();
                assert!((got - &want).norm() <= 1e-12 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn identity_instance() {
        for k in [StarKind::Transpose, StarKind::ConjugateTranspose] {
            let inst: Instance =
                StarEquationInstance::new(identity(2), identity(2), zeros(2, 2), zeros(2, 2), k)
                    .unwrap()
                    .into();
            assert!(oracle_ur(&inst, &Tolerances::default()));
        }
    }

    #[test]
    fn scalar_conjugate_case_is_not_unique() {
        let inst = star(1.0, 1.0, 1.0, 1.0, StarKind::ConjugateTranspose);
        let tol = Tolerances::default();
        assert!(!oracle_ur(&inst.clone().into(), &tol));
        assert!(!oracle_us_conjugate_pair(&inst, &tol).unwrap());
        // i·t solves 2 Re x = 0
        let w = kernel_witness(&inst.clone().into(), &tol).unwrap();
        assert!(w[(0, 0)].re.abs() < 1e-14 && w[(0, 0)].im.abs() > 0.1);
        let t = star(1.0, 1.0, 1.0, 1.0, StarKind::Transpose);
        assert!(oracle_ur(&t.into(), &tol));
    }

    #[test]
    fn identity_pair_system_kernel_is_trivial() {
        let inst = StarEquationInstance::new(
            identity(2),
            identity(2),
            zeros(2, 2),
            zeros(2, 2),
            StarKind::ConjugateTranspose,
        )
        .unwrap();
        assert!(oracle_us_conjugate_pair(&inst, &Tolerances::default()).unwrap());
    }

    #[test]
    fn non_square_systems_are_never_ur() {
        let mut rng = seeded_rng(5);
        let inst: Instance = StarEquationInstance::new(
            complex_gaussian(2, 3, &mut rng),
            complex_gaussian(1, 2, &mut rng),
            complex_gaussian(2, 1, &mut rng),
            complex_gaussian(3, 2, &mut rng),
            StarKind::Transpose,
        )
        .unwrap()
        .into();
        let v = oracle(&inst, &Tolerances::default());
        assert_eq!((v.rows, v.cols), (4, 3));
        assert!(!v.ur);
        assert!(v.or);
    }

    #[test]
    fn fixed_rhs_examples() {
        let tol = Tolerances::default();
        let inst: Instance = star(1.0, 1.0, 1.0, 1.0, StarKind::ConjugateTranspose).into();
        // 2 Re x = e: solvable for real e, not for imaginary e.
        let real = fixed_rhs(&inst, &s(3.0), &tol).unwrap();
        assert!(real.s && !real.us);
        let imag = fixed_rhs(
            &inst,
            &ComplexMatrix::from_element(1, 1, Complex64::new(0.0, 1.0)),
            &tol,
        )
        .unwrap();
        assert!(!imag.s);
    }

    #[test]
    fn solve_identity_echoes_rhs() {
        let mut rng = seeded_rng(9);
        let e = complex_gaussian(2, 2, &mut rng);
        for k in [StarKind::Transpose, StarKind::ConjugateTranspose] {
            let inst: Instance =
                StarEquationInstance::new(identity(2), identity(2), zeros(2, 2), zeros(2, 2), k)
                    .unwrap()
                    .with_rhs(e.clone())
                    .unwrap()
                    .into();
            let sol = solve(&inst, &Tolerances::default()).unwrap();
            assert!((sol.x - &e).norm() < 1e-14);
            assert!(sol.residual_fro < 1e-14);
            assert!(sol.unique);
        }
    }
}
