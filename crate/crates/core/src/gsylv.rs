//! Solvability of `AXB − CXD = E` from the Kronecker structure of the
//! pencils `A − λC` and `Dᵀ − λBᵀ`.
//!
//! Minimal indices come from kernel dimensions of staircase matrices,
//! eigenvalues of singular pencils from rank-completed regular pencils, and
//! every eigenvalue claim is confirmed by a rank drop below the normal rank.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{rank_with_tolerance, singular_values, zeros, ComplexMatrix};
use crate::equation::GSylvInstance;
use crate::error::{Result, SylvError};
use crate::pencil::{is_regular, spectrum, ExtendedComplex, Pencil, SpectrumMultiset};
use crate::random::{complex_gaussian, seeded_rng};
use crate::star::Confidence;
use crate::tolerance::{is_borderline, Tolerances};

const NORMAL_RANK_SEED: u64 = 0x6e72;
const AUGMENT_SEEDS: [u64; 4] = [0xa1, 0xa2, 0xa3, 0xa4];

/// `M_ε(A, C)`: `ε` block columns with `A` on the block diagonal and `C`
/// directly below it, of size `p(ε+1) × mε`.
pub fn staircase_matrix(a: &ComplexMatrix, c: &ComplexMatrix, eps: usize) -> Result<ComplexMatrix> {
    if a.shape() != c.shape() {
        return Err(SylvError::DimensionMismatch(format!(
            "staircase needs equal shapes, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let (p, m) = a.shape();
    let mut out = zeros(p * (eps + 1), m * eps);
    for j in 0..eps {
        out.view_mut((j * p, j * m), (p, m)).copy_from(a);
        out.view_mut(((j + 1) * p, j * m), (p, m)).copy_from(c);
    }
    Ok(out)
}

/// `(M, N)` with `N` rescaled to the norm of `M`. Kernel dimensions of the
/// staircase matrices do not change under this scaling.
fn balanced(m: &ComplexMatrix, n: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (nm, nn) = (m.norm(), n.norm());
    if nm > 0.0 && nn > 0.0 {
        (m.clone(), n * Complex64::new(nm / nn, 0.0))
    } else {
        (m.clone(), n.clone())
    }
}

/// Right minimal indices and the kernel dimensions behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalIndices {
    pub right: Vec<usize>,
    pub left: Vec<usize>,
    /// `ν_ε = mε − rank M_ε(M, N)` for `ε = 1, 2, …`.
    pub right_kernel_dims: Vec<usize>,
    /// The same on `(Mᵀ, Nᵀ)`.
    pub left_kernel_dims: Vec<usize>,
    /// False when the dimensions do not come from any index multiset.
    pub consistent: bool,
    /// Some singular value sat within a decade of the rank cut.
    pub borderline: bool,
}

/// `ν_ε` for `ε = 1..=max_eps`.
fn kernel_dims(
    m: &ComplexMatrix,
    n: &ComplexMatrix,
    max_eps: usize,
    tol: &Tolerances,
) -> (Vec<usize>, bool) {
    let (m, n) = balanced(m, n);
    let mut borderline = false;
    let dims = (1..=max_eps)
        .map(|eps| {
            let s = staircase_matrix(&m, &n, eps).expect("equal shapes");
            let r = rank_with_tolerance(&s, tol.rank_tol);
            borderline |= r.margin_decades() < 1.0;
            s.ncols() - r.rank
        })
        .collect();
    (dims, borderline)
}

/// A polynomial kernel vector of degree below `ε` exists for each block
/// `L_k` with `k < ε`, and the space of them has dimension
/// `ν_ε = Σ_{kᵢ<ε} (ε − kᵢ)`. So `ν_ε − ν_{ε−1}` counts the indices below
/// `ε` and its increments count each index value.
pub fn indices_from_kernel_dims(dims: &[usize]) -> (Vec<usize>, bool) {
    let mut below = vec![0i64];
    let mut prev = 0i64;
    for &d in dims {
        below.push(d as i64 - prev);
        prev = d as i64;
    }
    let mut consistent = true;
    let mut out = Vec::new();
    for k in 0..dims.len() {
        let count = below[k + 1] - below[k];
        if count < 0 {
            consistent = false;
            continue;
        }
        out.extend(std::iter::repeat_n(k, count as usize));
    }
    (out, consistent)
}

/// Minimal indices of `P(λ) = M + λN`: right from `M_ε(M, N)`, left from
/// `M_ε(Mᵀ, Nᵀ)`. An index never exceeds the number of rows (right) or
/// columns (left), which bounds `ε`.
pub fn minimal_indices(p: &Pencil, tol: &Tolerances) -> MinimalIndices {
    let (right_kernel_dims, b1) = kernel_dims(p.constant(), p.linear(), p.rows() + 1, tol);
    let (left_kernel_dims, b2) = kernel_dims(
        &p.constant().transpose(),
        &p.linear().transpose(),
        p.cols() + 1,
        tol,
    );
    let (right, c1) = indices_from_kernel_dims(&right_kernel_dims);
    let (left, c2) = indices_from_kernel_dims(&left_kernel_dims);
    MinimalIndices {
        right,
        left,
        right_kernel_dims,
        left_kernel_dims,
        consistent: c1 && c2,
        borderline: b1 || b2,
    }
}

/// A sample point scale where neither part of the pencil dominates.
fn balance_scale(p: &Pencil) -> f64 {
    let (c, l) = (p.constant().norm(), p.linear().norm());
    if c > 0.0 && l > 0.0 {
        c / l
    } else {
        1.0
    }
}

/// Largest rank of `P(λ)` over two seeded random points.
pub fn normal_rank(p: &Pencil, tol: &Tolerances) -> usize {
    let mut rng = seeded_rng(NORMAL_RANK_SEED);
    let scale = balance_scale(p);
    (0..2)
        .map(|_| {
            let z = complex_gaussian(1, 1, &mut rng)[(0, 0)] * scale;
            rank_with_tolerance(&p.eval(z), tol.rank_tol).rank
        })
        .max()
        .unwrap_or(0)
}

/// `σ_r(P(λ)) / (‖M‖ + |λ|·‖N‖)` with `r` the normal rank, and
/// `σ_r(N)/‖N‖` at `∞`. Near zero exactly at eigenvalues.
pub fn rank_drop(p: &Pencil, at: ExtendedComplex, normal_rank: usize) -> f64 {
    if normal_rank == 0 {
        return f64::INFINITY;
    }
    let (m, scale) = match at {
        ExtendedComplex::Finite(z) => (
            p.eval(z),
            p.constant().norm() + z.norm() * p.linear().norm(),
        ),
        ExtendedComplex::Infinity => (p.linear().clone(), p.linear().norm()),
    };
    if scale == 0.0 {
        return 0.0;
    }
    singular_values(&m)
        .get(normal_rank - 1)
        .copied()
        .unwrap_or(0.0)
        / scale
}

/// Eigenvalues of the regular part of a possibly singular pencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularPart {
    pub spectrum: SpectrumMultiset,
    pub normal_rank: usize,
    /// The pencil itself is square and regular.
    pub regular: bool,
    /// Some rank-drop confirmation landed near `drop_tol`.
    pub borderline: bool,
}

/// `[[P, U(λ)], [V(λ), 0]]` with seeded random linear borders sized to
/// make the pencil square of size `rows + cols − r`.
fn rank_completed(p: &Pencil, r: usize, seed: u64) -> Pencil {
    let mut rng = seeded_rng(seed);
    let (rows, cols) = (p.rows(), p.cols());
    let (kr, kl) = (cols - r, rows - r);
    let size = rows + kr;
    let entry = |m: &ComplexMatrix| {
        let s = m.norm() / ((rows * cols) as f64).sqrt();
        Complex64::new(if s > 0.0 { s } else { 1.0 }, 0.0)
    };
    let (sc, sl) = (entry(p.constant()), entry(p.linear()));
    let mut c0 = zeros(size, size);
    let mut c1 = zeros(size, size);
    c0.view_mut((0, 0), (rows, cols)).copy_from(p.constant());
    c1.view_mut((0, 0), (rows, cols)).copy_from(p.linear());
    c0.view_mut((0, cols), (rows, kl))
        .copy_from(&(complex_gaussian(rows, kl, &mut rng) * sc));
    c1.view_mut((0, cols), (rows, kl))
        .copy_from(&(complex_gaussian(rows, kl, &mut rng) * sl));
    c0.view_mut((rows, 0), (kr, cols))
        .copy_from(&(complex_gaussian(kr, cols, &mut rng) * sc));
    c1.view_mut((rows, 0), (kr, cols))
        .copy_from(&(complex_gaussian(kr, cols, &mut rng) * sl));
    Pencil::new(c0, c1).expect("same shape")
}

/// For a regular pencil, its spectrum. Otherwise two seeded rank-completed
/// regular pencils are solved; eigenvalues found by both (within
/// `√cluster_tol`) whose rank drop in the original pencil is at most
/// `drop_tol` are kept, with the multiplicity seen in the first trial.
pub fn regular_part_eigenvalues(p: &Pencil, tol: &Tolerances) -> RegularPart {
    if p.is_square() && is_regular(p, tol).regular {
        if let Ok(s) = spectrum(p, tol) {
            return RegularPart {
                spectrum: s,
                normal_rank: p.rows(),
                regular: true,
                borderline: false,
            };
        }
    }
    let r = normal_rank(p, tol);
    let empty = RegularPart {
        spectrum: SpectrumMultiset::empty(tol.cluster_tol),
        normal_rank: r,
        regular: false,
        borderline: false,
    };
    if r == 0 {
        return empty;
    }
    let trials: Vec<SpectrumMultiset> = AUGMENT_SEEDS
        .iter()
        .filter_map(|&seed| spectrum(&rank_completed(p, r, seed), tol).ok())
        .take(2)
        .collect();
    let [first, second] = trials.as_slice() else {
        return empty;
    };
    let reach = tol.cluster_tol.sqrt();
    let mut borderline = false;
    let mut values = Vec::new();
    for cluster in &first.clusters {
        let seen_twice = second
            .clusters
            .iter()
            .any(|other| cluster.value.chordal_distance(&other.value) <= reach);
        if !seen_twice {
            continue;
        }
        let drop = rank_drop(p, cluster.value, r);
        borderline |= is_borderline(drop, tol.drop_tol);
        if drop <= tol.drop_tol {
            values.extend(std::iter::repeat_n(cluster.value, cluster.multiplicity));
        }
    }
    RegularPart {
        spectrum: SpectrumMultiset::from_values(&values, tol.cluster_tol),
        normal_rank: r,
        regular: false,
        borderline,
    }
}

/// What the Kronecker canonical form of a pencil contains, without the
/// transformations that reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerStructure {
    pub rows: usize,
    pub cols: usize,
    /// `ε` of each block `L_ε`.
    pub right_minimal_indices: Vec<usize>,
    /// `η` of each block `L_ηᵀ`.
    pub left_minimal_indices: Vec<usize>,
    /// Finite eigenvalues of the regular part.
    pub finite_eigenvalues: SpectrumMultiset,
    pub infinite_multiplicity: usize,
    pub normal_rank: usize,
    /// Sizes add up: `Σε + Σ(η+1) + reg = rows`, `Σ(ε+1) + Ση + reg = cols`
    /// and `normal_rank = cols − #ε = rows − #η`, with `reg` the total
    /// eigenvalue multiplicity.
    pub consistent: bool,
    pub borderline: bool,
}

impl KroneckerStructure {
    pub fn is_regular(&self) -> bool {
        self.rows == self.cols
            && self.right_minimal_indices.is_empty()
            && self.left_minimal_indices.is_empty()
    }

    pub fn has_eigenvalues(&self) -> bool {
        self.infinite_multiplicity > 0 || !self.finite_eigenvalues.is_empty()
    }

    /// Direct sum of blocks `L_ε` with every `ε ≤ bound`.
    pub fn only_right_blocks_up_to(&self, bound: usize) -> bool {
        !self.has_eigenvalues()
            && self.left_minimal_indices.is_empty()
            && self.right_minimal_indices.iter().all(|&e| e <= bound)
    }

    /// Direct sum of blocks `L_ηᵀ` with every `η ≤ bound`.
    pub fn only_left_blocks_up_to(&self, bound: usize) -> bool {
        !self.has_eigenvalues()
            && self.right_minimal_indices.is_empty()
            && self.left_minimal_indices.iter().all(|&h| h <= bound)
    }

    /// `s` when the form is a direct sum of blocks `L_s`, `s ≥ 1`.
    pub fn all_right_blocks(&self) -> Option<usize> {
        let s = *self.right_minimal_indices.first()?;
        (s >= 1
            && self.only_right_blocks_up_to(s)
            && self.right_minimal_indices.iter().all(|&e| e == s))
        .then_some(s)
    }

    /// `s` when the form is a direct sum of blocks `L_sᵀ`, `s ≥ 1`.
    pub fn all_left_blocks(&self) -> Option<usize> {
        let s = *self.left_minimal_indices.first()?;
        (s >= 1
            && self.only_left_blocks_up_to(s)
            && self.left_minimal_indices.iter().all(|&h| h == s))
        .then_some(s)
    }

    /// The whole eigenvalue multiset of the regular part, `∞` included.
    pub fn eigenvalues(&self) -> SpectrumMultiset {
        let mut values = self.finite_eigenvalues.values();
        values.extend(std::iter::repeat_n(
            ExtendedComplex::Infinity,
            self.infinite_multiplicity,
        ));
        SpectrumMultiset::from_values(&values, self.finite_eigenvalues.cluster_tol)
    }
}

pub fn kronecker_structure(p: &Pencil, tol: &Tolerances) -> KroneckerStructure {
    let indices = minimal_indices(p, tol);
    let part = regular_part_eigenvalues(p, tol);
    let infinite_multiplicity = part.spectrum.m_infinity();
    let finite_eigenvalues = part.spectrum.without(ExtendedComplex::Infinity);
    let (rows, cols) = (p.rows(), p.cols());
    let reg = part.spectrum.total();
    let se: usize = indices.right.iter().sum();
    let sh: usize = indices.left.iter().sum();
    let (ne, nh) = (indices.right.len(), indices.left.len());
    let consistent = indices.consistent
        && se + sh + nh + reg == rows
        && se + ne + sh + reg == cols
        && part.normal_rank + ne == cols
        && part.normal_rank + nh == rows;
    KroneckerStructure {
        rows,
        cols,
        right_minimal_indices: indices.right,
        left_minimal_indices: indices.left,
        finite_eigenvalues,
        infinite_multiplicity,
        normal_rank: part.normal_rank,
        consistent,
        borderline: indices.borderline || part.borderline,
    }
}

/// `A − λC`.
pub fn ac_pencil(inst: &GSylvInstance) -> Pencil {
    Pencil::a_minus_lambda_c(inst.a(), inst.c()).expect("same shape")
}

/// `Dᵀ − λBᵀ`.
pub fn db_pencil(inst: &GSylvInstance) -> Pencil {
    Pencil::a_minus_lambda_c(&inst.d().transpose(), &inst.b().transpose()).expect("same shape")
}

/// An eigenvalue of one pencil at which the other also loses rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonEigenvalue {
    pub value: ExtendedComplex,
    #[serde(with = "crate::dense::float_serde")]
    pub drop_ac: f64,
    #[serde(with = "crate::dense::float_serde")]
    pub drop_db: f64,
}

/// Each eigenvalue of either pencil is tested against the other by rank
/// drop. Testing both directions covers the case where one copy is
/// computed poorly, e.g. inside a Jordan block.
fn common_eigenvalues(
    ac: (&Pencil, &KroneckerStructure),
    db: (&Pencil, &KroneckerStructure),
    tol: &Tolerances,
) -> (Vec<CommonEigenvalue>, bool) {
    let mut out: Vec<CommonEigenvalue> = Vec::new();
    let mut borderline = false;
    for (own, other, own_is_ac) in [(ac, db, true), (db, ac, false)] {
        for value in own.1.eigenvalues().clusters.iter().map(|c| c.value) {
            let drop_other = rank_drop(other.0, value, other.1.normal_rank);
            let drop_own = rank_drop(own.0, value, own.1.normal_rank);
            borderline |= is_borderline(drop_other, tol.drop_tol);
            if drop_other > tol.drop_tol {
                continue;
            }
            if out
                .iter()
                .any(|c| c.value.chordal_distance(&value) <= tol.cluster_tol.sqrt())
            {
                continue;
            }
            let (drop_ac, drop_db) = if own_is_ac {
                (drop_own, drop_other)
            } else {
                (drop_other, drop_own)
            };
            out.push(CommonEigenvalue {
                value,
                drop_ac,
                drop_db,
            });
        }
    }
    (out, borderline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvabilityReport {
    pub sr: bool,
    pub or: bool,
    pub ur: bool,
    /// `A − λC`.
    pub ac: KroneckerStructure,
    /// `Dᵀ − λBᵀ`.
    pub db: KroneckerStructure,
    pub common_eigenvalues: Vec<CommonEigenvalue>,
    pub which_clause_fired: String,
    pub confidence: Confidence,
    pub notes: Vec<String>,
}

/// If `x` has blocks `L_ηᵀ`, `y` must be a direct sum of blocks `L_ε` with
/// `ε` at most the smallest `η`.
fn left_blocks_admissible(x: &KroneckerStructure, y: &KroneckerStructure) -> bool {
    x.left_minimal_indices
        .iter()
        .min()
        .is_none_or(|&eta| y.only_right_blocks_up_to(eta))
}

/// If `x` has blocks `L_ε`, `y` must be a direct sum of blocks `L_ηᵀ` with
/// `η` at most the smallest `ε`.
fn right_blocks_admissible(x: &KroneckerStructure, y: &KroneckerStructure) -> bool {
    x.right_minimal_indices
        .iter()
        .min()
        .is_none_or(|&eps| y.only_left_blocks_up_to(eps))
}

/// SR, OR and UR from the Kronecker structures of `A − λC` and `Dᵀ − λBᵀ`.
pub fn decide_sr_or_ur(inst: &GSylvInstance, tol: &Tolerances) -> SolvabilityReport {
    let (pac, pdb) = (ac_pencil(inst), db_pencil(inst));
    let ac = kronecker_structure(&pac, tol);
    let db = kronecker_structure(&pdb, tol);
    let (common, common_borderline) = common_eigenvalues((&pac, &ac), (&pdb, &db), tol);
    let disjoint = common.is_empty();

    let sr_blocks = left_blocks_admissible(&ac, &db) && left_blocks_admissible(&db, &ac);
    let or_blocks = right_blocks_admissible(&ac, &db) && right_blocks_admissible(&db, &ac);
    let sr = disjoint && sr_blocks;
    let or = disjoint && or_blocks;

    let regular_clause = ac.is_regular() && db.is_regular() && disjoint;
    let singular_clause = match (
        ac.all_right_blocks(),
        db.all_left_blocks(),
        ac.all_left_blocks(),
        db.all_right_blocks(),
    ) {
        (Some(s), Some(t), _, _) | (_, _, Some(s), Some(t)) if s == t => Some(s),
        _ => None,
    };
    let ur = regular_clause || singular_clause.is_some();

    let mut fired = Vec::new();
    if !disjoint {
        fired.push(format!("common eigenvalue {}", common[0].value));
    }
    if !sr_blocks {
        fired.push("a left singular block meets a block other than a smaller L_ε".to_string());
    }
    if !or_blocks {
        fired.push("a right singular block meets a block other than a smaller L_ηᵀ".to_string());
    }
    if regular_clause {
        fired.push("both pencils regular with disjoint spectra".to_string());
    }
    if let Some(s) = singular_clause {
        fired.push(format!("one pencil is a sum of L_{s}, the other of L_{s}ᵀ"));
    }
    if fired.is_empty() {
        fired.push("no obstruction, but neither UR situation holds".to_string());
    }

    let mut notes = Vec::new();
    if ur != (sr && or) {
        notes.push("UR differs from SR ∧ OR; the structures are inconsistent".to_string());
    }
    for (name, s) in [("A − λC", &ac), ("Dᵀ − λBᵀ", &db)] {
        if !s.consistent {
            notes.push(format!(
                "{name}: block sizes do not add up to the pencil size"
            ));
        }
    }
    notes.push("eigenvalue disjointness is tested on supports".to_string());
    let borderline = ac.borderline || db.borderline || common_borderline || notes.len() > 1;
    SolvabilityReport {
        sr,
        or,
        ur,
        ac,
        db,
        common_eigenvalues: common,
        which_clause_fired: fired.join("; "),
        confidence: if borderline {
            Confidence::Borderline
        } else {
            Confidence::Confident
        },
        notes,
    }
}

/// Whether `p/m = n/q = d` with `d = 1`, `s/(s+1)` or `(s+1)/s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioCondition {
    pub holds: bool,
    /// `p/m` in lowest terms.
    pub d: (usize, usize),
    pub ratios_equal: bool,
    pub s: Option<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A necessary condition for UR, in exact integer arithmetic.
pub fn ratio_necessary_condition(p: usize, m: usize, n: usize, q: usize) -> RatioCondition {
    let g = gcd(p, m).max(1);
    let d = (p / g, m / g);
    let ratios_equal = p * q == n * m;
    let s = if d.0 + 1 == d.1 {
        Some(d.0)
    } else if d.0 == d.1 + 1 {
        Some(d.1)
    } else {
        None
    };
    let form = d.0 == d.1 || s.is_some_and(|s| s >= 1);
    RatioCondition {
        holds: ratios_equal && form,
        d,
        ratios_equal,
        s: s.filter(|&s| s >= 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StaircaseClause {
    /// `p = m`, `q = n`, both pencils regular with disjoint spectra.
    SquareRegular,
    /// `p < m`, `n < q`, `M_s(A, C)` and `M_s(B, D)` invertible.
    RightSingular,
    /// `p > m`, `n > q`, `M_s(Aᵀ, Cᵀ)` and `M_s(Bᵀ, Dᵀ)` invertible.
    LeftSingular,
    /// The sizes fit none of the three situations.
    SizesExcluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseDecision {
    pub answer: bool,
    pub clause: StaircaseClause,
    pub s: Option<usize>,
    /// `σ_min` of each square staircase matrix tested, with its rank cut.
    pub staircase_sigma_min: Vec<(String, f64, f64)>,
    pub confidence: Confidence,
}

/// `s` with `s = small/(large − small)` for both pairs, if a positive integer.
fn staircase_s(small1: usize, large1: usize, small2: usize, large2: usize) -> Option<usize> {
    let (g1, g2) = (large1 - small1, large2 - small2);
    (small1.is_multiple_of(g1)
        && small2.is_multiple_of(g2)
        && small1 / g1 == small2 / g2
        && small1 / g1 >= 1)
        .then_some(small1 / g1)
}

/// UR without the canonical form: the three situations on sizes, pencil
/// regularity and staircase invertibility.
pub fn decide_ur_staircase(inst: &GSylvInstance, tol: &Tolerances) -> StaircaseDecision {
    let (p, q, m, n) = inst.sizes();
    let mut sigmas = Vec::new();
    let mut borderline = false;
    let mut invertible = |name: &str, x: &ComplexMatrix, y: &ComplexMatrix, s: usize| {
        let st = staircase_matrix(x, y, s).expect("equal shapes");
        if st.nrows() != st.ncols() {
            return false;
        }
        let (bx, by) = balanced(x, y);
        let r = rank_with_tolerance(
            &staircase_matrix(&bx, &by, s).expect("equal shapes"),
            tol.rank_tol,
        );
        borderline |= is_borderline(r.sigma_min(), r.tolerance_used);
        sigmas.push((name.to_string(), r.sigma_min(), r.tolerance_used));
        r.rank == st.ncols()
    };
    let (clause, s, answer) = if p == m && q == n {
        let (pac, pdb) = (ac_pencil(inst), db_pencil(inst));
        let (rac, rdb) = (is_regular(&pac, tol).regular, is_regular(&pdb, tol).regular);
        let answer = rac && rdb && {
            let ac = kronecker_structure(&pac, tol);
            let db = kronecker_structure(&pdb, tol);
            let (common, b) = common_eigenvalues((&pac, &ac), (&pdb, &db), tol);
            borderline |= b;
            common.is_empty()
        };
        (StaircaseClause::SquareRegular, None, answer)
    } else if p < m && n < q {
        match staircase_s(p, m, n, q) {
            Some(s) => {
                let ok = invertible("M_s(A, C)", inst.a(), inst.c(), s)
                    & invertible("M_s(B, D)", inst.b(), inst.d(), s);
                (StaircaseClause::RightSingular, Some(s), ok)
            }
            None => (StaircaseClause::SizesExcluded, None, false),
        }
    } else if p > m && n > q {
        match staircase_s(m, p, q, n) {
            Some(s) => {
                let ok = invertible(
                    "M_s(Aᵀ, Cᵀ)",
                    &inst.a().transpose(),
                    &inst.c().transpose(),
                    s,
                ) & invertible(
                    "M_s(Bᵀ, Dᵀ)",
                    &inst.b().transpose(),
                    &inst.d().transpose(),
                    s,
                );
                (StaircaseClause::LeftSingular, Some(s), ok)
            }
            None => (StaircaseClause::SizesExcluded, None, false),
        }
    } else {
        (StaircaseClause::SizesExcluded, None, false)
    };
    StaircaseDecision {
        answer,
        clause,
        s,
        staircase_sigma_min: sigmas,
        confidence: if borderline {
            Confidence::Borderline
        } else {
            Confidence::Confident
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{from_real_rows, identity};
    use crate::kcf::{KcfPrescription, KroneckerBlock};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pencil_of(blocks: Vec<KroneckerBlock>) -> Pencil {
        let (a, c) = KcfPrescription::new(blocks).canonical();
        Pencil::a_minus_lambda_c(&a, &c).unwrap()
    }

    #[test]
    fn staircase_shapes() {
        let a = from_real_rows(1, 2, &[1.0, 0.0]);
        let c = from_real_rows(1, 2, &[0.0, 1.0]);
        let m1 = staircase_matrix(&a, &c, 1).unwrap();
        assert_eq!(m1, identity(2));
        let m2 = staircase_matrix(&a, &c, 2).unwrap();
        assert_eq!(m2.shape(), (3, 4));
        assert_eq!(rank_with_tolerance(&m2, None).rank, 3);
        let x = from_real_rows(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let st = staircase_matrix(&x, &(&x * Complex64::new(2.0, 0.0)), 1).unwrap();
        assert_eq!(st.shape(), (4, 3));
        assert!(staircase_matrix(&x, &a, 1).is_err());
    }

    #[test]
    fn counting_rule_table() {
        // {0}, {1}, {0, 2}, {1, 1}, {3}
        let cases: [(&[usize], &[usize]); 5] = [
            (&[1, 2, 3], &[0]),
            (&[0, 1, 2], &[1]),
            (&[1, 2, 4, 6], &[0, 2]),
            (&[0, 2, 4], &[1, 1]),
            (&[0, 0, 0, 1, 2], &[3]),
        ];
        for (dims, want) in cases {
            let (got, ok) = indices_from_kernel_dims(dims);
            assert!(ok);
            assert_eq!(got, want, "{dims:?}");
        }
        assert!(!indices_from_kernel_dims(&[2, 3, 3]).1);
    }

    #[test]
    fn indices_of_simple_pencils() {
        let reg =
            Pencil::a_minus_lambda_c(&from_real_rows(2, 2, &[1.0, 0.0, 0.0, 2.0]), &identity(2))
                .unwrap();
        let idx = minimal_indices(&reg, &tol());
        assert!(idx.right.is_empty() && idx.left.is_empty());
        let l1 = pencil_of(vec![KroneckerBlock::Right(1)]);
        let idx = minimal_indices(&l1, &tol());
        assert_eq!((idx.right, idx.left), (vec![1], vec![]));
        let mixed = pencil_of(vec![
            KroneckerBlock::Right(0),
            KroneckerBlock::Right(2),
            KroneckerBlock::finite(5.0, 2),
            KroneckerBlock::Left(1),
        ]);
        let idx = minimal_indices(&mixed, &tol());
        assert_eq!((idx.right, idx.left), (vec![0, 2], vec![1]));
    }

    #[test]
    fn regular_part_of_singular_pencils() {
        let l1 = pencil_of(vec![KroneckerBlock::Right(1)]);
        assert!(regular_part_eigenvalues(&l1, &tol()).spectrum.is_empty());
        let l1_seven = pencil_of(vec![
            KroneckerBlock::Right(1),
            KroneckerBlock::finite(7.0, 1),
        ]);
        let part = regular_part_eigenvalues(&l1_seven, &tol());
        assert_eq!(part.spectrum.total(), 1);
        assert_eq!(part.spectrum.multiplicity_at(ExtendedComplex::real(7.0)), 1);
        let j2inf = pencil_of(vec![KroneckerBlock::infinite(2)]);
        let part = regular_part_eigenvalues(&j2inf, &tol());
        assert_eq!(part.spectrum.m_infinity(), 2);
    }

    #[test]
    fn structure_of_a_mixed_form() {
        let p = pencil_of(vec![
            KroneckerBlock::Right(1),
            KroneckerBlock::Left(2),
            KroneckerBlock::finite(-0.5, 2),
            KroneckerBlock::infinite(1),
        ]);
        let s = kronecker_structure(&p, &tol());
        assert!(s.consistent, "{s:?}");
        assert_eq!(s.right_minimal_indices, vec![1]);
        assert_eq!(s.left_minimal_indices, vec![2]);
        assert_eq!(s.infinite_multiplicity, 1);
        assert_eq!(s.finite_eigenvalues.total(), 2);
    }

    #[test]
    fn ratio_condition_cases() {
        let r = ratio_necessary_condition(2, 2, 3, 3);
        assert!(r.holds && r.d == (1, 1));
        let r = ratio_necessary_condition(2, 3, 4, 6);
        assert!(r.holds && r.d == (2, 3) && r.s == Some(2));
        assert!(!ratio_necessary_condition(2, 5, 2, 5).holds);
        assert!(!ratio_necessary_condition(1, 2, 2, 3).holds);
        let r = ratio_necessary_condition(3, 2, 3, 2);
        assert!(r.holds && r.s == Some(2));
    }

    #[test]
    fn staircase_decider_on_l1_pairs() {
        let a = from_real_rows(1, 2, &[1.0, 0.0]);
        let c = from_real_rows(1, 2, &[0.0, 1.0]);
        let inst = GSylvInstance::new(a.clone(), a.clone(), c.clone(), c.clone()).unwrap();
        let d = decide_ur_staircase(&inst, &tol());
        assert!(d.answer);
        assert_eq!((d.clause, d.s), (StaircaseClause::RightSingular, Some(1)));
        let inst = GSylvInstance::new(a.clone(), a.clone(), c, a).unwrap();
        assert!(!decide_ur_staircase(&inst, &tol()).answer);
    }
}
