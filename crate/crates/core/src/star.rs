//! Unique solvability of `AXB + CX⋆D = E` for every `E`.
//!
//! The decision reads the spectrum of `Q(λ) = [[λD⋆, B⋆], [A, λC]]` after
//! dropping dimension-induced eigenvalues, or the spectrum of one of four
//! same-size pencils `P₁ … P₄`, together with invertibility of one
//! coefficient. The reduction of a `p = m > n = q` equation to an `n × n`
//! one is exposed for inspection.

use serde::{Deserialize, Serialize};

use crate::dense::{
    default_rank_tol, identity, inverse, matrix_serde, null_space, qr_full, rank_with_tolerance,
    singular_values, zeros, ComplexMatrix, ONE,
};
use crate::equation::{Instance, StarEquationInstance};
use crate::error::{Result, SylvError};
use crate::oracle;
use crate::pencil::{
    build_q, core_spectrum_hat, core_spectrum_tilde, is_reciprocal_free, is_regular,
    spectrum_with_counts, unimodular_pair_condition, Exclusion, ExtendedComplex, Pencil,
    ReciprocalCheck, RegularityCheck, SpectrumMultiset, StarKind,
};
use crate::tolerance::{is_borderline, Tolerances, BORDERLINE_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremCase {
    /// `mn ≠ pq`: the vectorized system is not square.
    SizeMismatch,
    /// `p ∉ {m, n}`: every coefficient is rectangular.
    AllRectangular,
    /// `p = m ≠ n = q`.
    #[serde(rename = "CASE1_pm")]
    Case1Pm,
    /// `p = n ≠ m = q`.
    #[serde(rename = "CASE2_pn")]
    Case2Pn,
    /// `p = m = n = q`.
    #[serde(rename = "CASE3_SQUARE")]
    Case3Square,
    /// Same-size pencils `P₁ … P₄`.
    SmallPencil,
    /// Same-size pencils, but no invertibility precondition holds.
    NoPrecondition,
    /// `AX + X⋆D = E` through `A − λD⋆`.
    StarSylvester,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Confidence {
    Confident,
    /// Some rank, coefficient, cluster or reciprocal-pair test landed within
    /// a factor 10 of its tolerance.
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// The whole spectrum.
    Full,
    /// Dimension-induced infinite eigenvalues removed.
    Hat,
    /// Dimension-induced zero eigenvalues removed.
    Tilde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityCheck {
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub sigma_min: f64,
    pub tolerance: f64,
    pub invertible: bool,
}

impl InvertibilityCheck {
    pub fn borderline(&self) -> bool {
        self.rows == self.cols && is_borderline(self.sigma_min, self.tolerance)
    }
}

pub fn check_invertible(name: &str, m: &ComplexMatrix, tol: &Tolerances) -> InvertibilityCheck {
    let r = rank_with_tolerance(m, tol.rank_tol);
    InvertibilityCheck {
        matrix: name.to_string(),
        rows: m.nrows(),
        cols: m.ncols(),
        sigma_min: r.sigma_min(),
        tolerance: r.tolerance_used,
        invertible: m.is_square() && r.rank == m.nrows(),
    }
}

/// Spectral test on one pencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEvidence {
    /// `Q`, `P1` … `P4` or `P`.
    pub pencil: String,
    pub regularity: RegularityCheck,
    pub spectrum: Option<SpectrumMultiset>,
    pub spectrum_used: SpectrumKind,
    /// The set that went into the reciprocal test, before `±1` exclusion.
    pub tested_set: Option<SpectrumMultiset>,
    pub reciprocal: Option<ReciprocalCheck>,
    /// `m₁ = m₋₁ ≤ 1` for `Q`, `m₁ ≤ 1` for the same-size pencils (`⊤` only).
    pub unimodular_pair: Option<bool>,
    pub passed: bool,
    pub borderline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct URDecision {
    pub answer: bool,
    pub theorem_case: TheoremCase,
    /// `(p, q, m, n)`.
    pub sizes: (usize, usize, usize, usize),
    /// `mn = pq`.
    pub sizes_compatible: bool,
    pub invertibility: Vec<InvertibilityCheck>,
    pub spectral: Vec<SpectralEvidence>,
    pub confidence: Confidence,
    pub notes: Vec<String>,
}

impl URDecision {
    fn new(case: TheoremCase, sizes: (usize, usize, usize, usize)) -> Self {
        let (p, q, m, n) = sizes;
        Self {
            answer: false,
            theorem_case: case,
            sizes,
            sizes_compatible: m * n == p * q,
            invertibility: Vec::new(),
            spectral: Vec::new(),
            confidence: Confidence::Confident,
            notes: Vec::new(),
        }
    }

    fn finish(mut self, answer: bool) -> Self {
        self.answer = answer;
        let borderline = self
            .invertibility
            .iter()
            .any(InvertibilityCheck::borderline)
            || self.spectral.iter().any(|s| s.borderline);
        if borderline {
            self.confidence = Confidence::Borderline;
        }
        self
    }

    fn borderline_note(&mut self, note: String) {
        self.confidence = Confidence::Borderline;
        self.notes.push(note);
    }
}

/// How dimension-induced eigenvalues are removed before testing.
#[derive(Debug, Clone, Copy)]
enum Removal {
    None,
    Hat { m: usize, n: usize },
    Tilde { m: usize, n: usize },
}

/// Which variant of the reciprocal condition applies.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Flavor {
    /// `Λ∖{±1}` reciprocal free and `m₁ = m₋₁ ≤ 1` (the `2n × 2n` pencil).
    Doubled,
    /// `Λ∖{1}` reciprocal free and `m₁ ≤ 1` (the `n × n` pencils).
    Single,
}

fn polynomial_borderline(reg: &RegularityCheck) -> bool {
    reg.polynomial.as_ref().is_some_and(|poly| {
        poly.degree != poly.coefficient_degree
            || poly.valuation != poly.coefficient_valuation
            || poly
                .scaled_coefficients
                .iter()
                .any(|&[re, im]| is_borderline(re.hypot(im), poly.coeff_tol))
    })
}

fn spectral_test(
    label: &str,
    pencil: &Pencil,
    removal: Removal,
    flavor: Flavor,
    star: StarKind,
    tol: &Tolerances,
    notes: &mut Vec<String>,
) -> SpectralEvidence {
    let regularity = is_regular(pencil, tol);
    let mut evidence = SpectralEvidence {
        pencil: label.to_string(),
        borderline: polynomial_borderline(&regularity),
        regularity,
        spectrum: None,
        spectrum_used: match removal {
            Removal::None => SpectrumKind::Full,
            Removal::Hat { .. } => SpectrumKind::Hat,
            Removal::Tilde { .. } => SpectrumKind::Tilde,
        },
        tested_set: None,
        reciprocal: None,
        unimodular_pair: None,
        passed: false,
    };
    if !evidence.regularity.regular {
        notes.push(format!("{label} is singular"));
        return evidence;
    }
    let poly = evidence
        .regularity
        .polynomial
        .as_ref()
        .expect("regular pencils are square");
    let spectrum = spectrum_with_counts(pencil, poly, tol).expect("regular pencil has a spectrum");
    let core = match removal {
        Removal::None => Ok(spectrum.clone()),
        Removal::Hat { m, n } => core_spectrum_hat(&spectrum, m, n),
        Removal::Tilde { m, n } => core_spectrum_tilde(&spectrum, m, n),
    };
    let core = match core {
        Ok(core) => core,
        Err(e) => {
            // Exact arithmetic rules this out; treat every copy as induced.
            notes.push(format!("{label}: {e}; all copies removed"));
            evidence.borderline = true;
            let target = match removal {
                Removal::Tilde { .. } => ExtendedComplex::ZERO,
                _ => ExtendedComplex::Infinity,
            };
            spectrum.without(target)
        }
    };
    let (exclusion, pair) = match (star, flavor) {
        (StarKind::ConjugateTranspose, _) => (Exclusion::Nothing, None),
        (StarKind::Transpose, Flavor::Doubled) => (
            Exclusion::PlusMinusOne,
            Some(unimodular_pair_condition(&spectrum)),
        ),
        (StarKind::Transpose, Flavor::Single) => (
            Exclusion::PlusOne,
            Some(spectrum.multiplicity_at(ExtendedComplex::ONE) <= 1),
        ),
    };
    let reciprocal = is_reciprocal_free(&core, star, exclusion, tol.pair_tol);
    evidence.borderline |= reciprocal.borderline() || spectrum.has_borderline_cluster();
    evidence.passed = reciprocal.free && pair.unwrap_or(true);
    evidence.unimodular_pair = pair;
    evidence.reciprocal = Some(reciprocal);
    evidence.tested_set = Some(core);
    evidence.spectrum = Some(spectrum);
    evidence
}

/// Unique solvability for every `E` from the spectrum of `Q(λ)`.
pub fn decide_ur_star(inst: &StarEquationInstance, tol: &Tolerances) -> URDecision {
    let sizes = inst.sizes();
    let (p, q, m, n) = sizes;
    if m * n != p * q {
        let mut d = URDecision::new(TheoremCase::SizeMismatch, sizes);
        d.notes.push(format!("mn = {} but pq = {}", m * n, p * q));
        return d.finish(false);
    }
    if p != m && p != n {
        let mut d = URDecision::new(TheoremCase::AllRectangular, sizes);
        d.notes.push(
            "no coefficient is square; the homogeneous equation has a nonzero solution".into(),
        );
        return d.finish(false);
    }
    let star = inst.star();
    let qp = build_q(inst.a(), inst.b(), inst.c(), inst.d(), star).expect("validated shapes");
    let (case, removal, required) = if p == m && p == n {
        (TheoremCase::Case3Square, Removal::None, None)
    } else if p == m {
        let req = if m > n {
            ("B", inst.b())
        } else {
            ("A", inst.a())
        };
        (TheoremCase::Case1Pm, Removal::Hat { m, n }, Some(req))
    } else {
        let req = if m > n {
            ("C", inst.c())
        } else {
            ("D", inst.d())
        };
        (TheoremCase::Case2Pn, Removal::Tilde { m, n }, Some(req))
    };
    let mut d = URDecision::new(case, sizes);
    let mut invertible = true;
    if let Some((name, matrix)) = required {
        let check = check_invertible(name, matrix, tol);
        invertible = check.invertible;
        if !invertible {
            d.notes.push(format!("{name} is singular"));
        }
        d.invertibility.push(check);
    }
    let evidence = spectral_test("Q", &qp, removal, Flavor::Doubled, star, tol, &mut d.notes);
    let passed = evidence.passed;
    d.spectral.push(evidence);
    d.finish(invertible && passed)
}

/// One of the same-size pencils of a `⋆`-equation:
/// `P₁ = B⋆ − λD⋆A⁻¹C` (`p = m ≤ n`, `A` invertible),
/// `P₂ = A⋆ − λDB⁻¹C⋆` (`p = m ≥ n`, `B` invertible),
/// `P₃ = D⋆ − λB⋆C⁻¹A` (`p = n ≤ m`, `C` invertible),
/// `P₄ = C⋆ − λBD⁻¹A⋆` (`p = n ≥ m`, `D` invertible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallPencil {
    P1,
    P2,
    P3,
    P4,
}

impl SmallPencil {
    pub const ALL: [SmallPencil; 4] = [
        SmallPencil::P1,
        SmallPencil::P2,
        SmallPencil::P3,
        SmallPencil::P4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SmallPencil::P1 => "P1",
            SmallPencil::P2 => "P2",
            SmallPencil::P3 => "P3",
            SmallPencil::P4 => "P4",
        }
    }

    /// The coefficient that must be invertible.
    pub fn required(self) -> &'static str {
        match self {
            SmallPencil::P1 => "A",
            SmallPencil::P2 => "B",
            SmallPencil::P3 => "C",
            SmallPencil::P4 => "D",
        }
    }

    pub fn shape_ok(self, (p, q, m, n): (usize, usize, usize, usize)) -> bool {
        match self {
            SmallPencil::P1 => p == m && m <= n && n == q,
            SmallPencil::P2 => p == m && m >= n && n == q,
            SmallPencil::P3 => p == n && n <= m && m == q,
            SmallPencil::P4 => p == n && n >= m && m == q,
        }
    }

    fn coefficient(self, inst: &StarEquationInstance) -> &ComplexMatrix {
        match self {
            SmallPencil::P1 => inst.a(),
            SmallPencil::P2 => inst.b(),
            SmallPencil::P3 => inst.c(),
            SmallPencil::P4 => inst.d(),
        }
    }
}

fn assemble_small_pencil(
    inst: &StarEquationInstance,
    which: SmallPencil,
    inv: &ComplexMatrix,
) -> Pencil {
    let star = inst.star();
    let s = |x: &ComplexMatrix| star.apply(x);
    let (a, b, c, dm) = (inst.a(), inst.b(), inst.c(), inst.d());
    let (constant, linear) = match which {
        SmallPencil::P1 => (s(b), -(s(dm) * inv * c)),
        SmallPencil::P2 => (s(a), -(dm * inv * s(c))),
        SmallPencil::P3 => (s(dm), -(s(b) * inv * a)),
        SmallPencil::P4 => (s(c), -(b * inv * s(a))),
    };
    Pencil::new(constant, linear).expect("conformable by the size conditions")
}

/// Builds `P₁ … P₄`, failing when the sizes do not fit or the required
/// coefficient is numerically singular.
pub fn small_pencil(
    inst: &StarEquationInstance,
    which: SmallPencil,
    tol: &Tolerances,
) -> Result<Pencil> {
    let (p, q, m, n) = inst.sizes();
    if !which.shape_ok((p, q, m, n)) {
        return Err(SylvError::Precondition(format!(
            "{} is not defined for (p, q, m, n) = ({p}, {q}, {m}, {n})",
            which.label()
        )));
    }
    let name = which.required();
    let check = check_invertible(name, which.coefficient(inst), tol);
    if !check.invertible {
        return Err(SylvError::SingularMatrix(format!(
            "{name} (sigma_min {:.3e} <= {:.3e})",
            check.sigma_min, check.tolerance
        )));
    }
    let inv = inverse(which.coefficient(inst), name, tol.rank_tol)?;
    Ok(assemble_small_pencil(inst, which, &inv))
}

/// Unique solvability from the same-size pencils [`SmallPencil`].
/// The answer is true when any branch whose precondition holds passes.
pub fn decide_ur_star_smallpencil(inst: &StarEquationInstance, tol: &Tolerances) -> URDecision {
    let sizes = inst.sizes();
    let (_, _, m, n) = sizes;
    let star = inst.star();
    let mut d = URDecision::new(TheoremCase::SmallPencil, sizes);
    let mut answers = Vec::new();
    for which in SmallPencil::ALL {
        if !which.shape_ok(sizes) {
            continue;
        }
        let name = which.required();
        let check = check_invertible(name, which.coefficient(inst), tol);
        let ok = check.invertible;
        d.invertibility.push(check);
        if !ok {
            continue;
        }
        let Ok(inv) = inverse(which.coefficient(inst), name, tol.rank_tol) else {
            continue;
        };
        let pencil = assemble_small_pencil(inst, which, &inv);
        // The linear part has rank ≤ min(m, n), which forces |m − n| infinite
        // eigenvalues; they are dropped exactly as for Q.
        let removal = if m == n {
            Removal::None
        } else {
            Removal::Hat { m, n }
        };
        let ev = spectral_test(
            which.label(),
            &pencil,
            removal,
            Flavor::Single,
            star,
            tol,
            &mut d.notes,
        );
        answers.push(ev.passed);
        d.spectral.push(ev);
    }
    if answers.is_empty() {
        d.theorem_case = TheoremCase::NoPrecondition;
        d.notes
            .push("no branch has its size and invertibility precondition".into());
        return d.finish(false);
    }
    let answer = answers.iter().any(|&x| x);
    if answer && !answers.iter().all(|&x| x) {
        d.borderline_note("applicable branches disagree".into());
    }
    d.finish(answer)
}

/// `AX + X⋆D = E` with `A: m×n`, `D: n×m`: unique for every `E` iff
/// `A − λD⋆` is regular and its spectrum passes the reciprocal test.
pub fn decide_ur_star_sylvester(
    a: &ComplexMatrix,
    dm: &ComplexMatrix,
    star: StarKind,
    tol: &Tolerances,
) -> Result<URDecision> {
    let (m, n) = a.shape();
    if dm.shape() != (n, m) {
        return Err(SylvError::DimensionMismatch(format!(
            "D must be {n}x{m}, got {}x{}",
            dm.nrows(),
            dm.ncols()
        )));
    }
    // As the general equation: A·X·I + I·X⋆·D with X: n×m.
    let mut d = URDecision::new(TheoremCase::StarSylvester, (m, m, n, m));
    let pencil = Pencil::new(a.clone(), -star.apply(dm))?;
    let ev = spectral_test(
        "P",
        &pencil,
        Removal::None,
        Flavor::Single,
        star,
        tol,
        &mut d.notes,
    );
    let passed = ev.passed;
    d.spectral.push(ev);
    Ok(d.finish(passed))
}

/// `AX + X⋆D = E` as a general instance `(A, I, I, D)`.
pub fn star_sylvester_instance(
    a: &ComplexMatrix,
    dm: &ComplexMatrix,
    star: StarKind,
) -> Result<StarEquationInstance> {
    let m = a.nrows();
    StarEquationInstance::new(a.clone(), identity(m), identity(m), dm.clone(), star)
}

/// The `n × n` equation `Â₁₁Y₁ + Ĉ₁Y₁⋆D₁ = 0` that a `p = m ≥ n = q`
/// equation with invertible `B` reduces to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSquareEquation {
    #[serde(with = "matrix_serde")]
    pub a_hat11: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    pub c_hat1: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    pub d1: ComplexMatrix,
    /// Unitary with `Q_m·D·B⁻¹ = [D₁; 0]`.
    #[serde(with = "matrix_serde")]
    pub q_m: ComplexMatrix,
    /// Unitary with `U·A·Q_m⋆ = [[Â₁₁, 0], [Â₂₁, Â₂₂]]`.
    #[serde(with = "matrix_serde")]
    pub u: ComplexMatrix,
    pub b_inverse_used: bool,
    /// `+∞` when `Â₂₂` is empty.
    #[serde(with = "crate::dense::float_serde")]
    pub a_hat22_sigma_min: f64,
    pub star: StarKind,
}

impl ReducedSquareEquation {
    pub fn instance(&self) -> StarEquationInstance {
        let n = self.a_hat11.nrows();
        StarEquationInstance::new(
            self.a_hat11.clone(),
            identity(n),
            self.c_hat1.clone(),
            self.d1.clone(),
            self.star,
        )
        .expect("reduced blocks are n×n")
    }

    /// `Q̂(λ) = [[λD₁⋆, I], [Â₁₁, λĈ₁]]`.
    pub fn q_hat(&self) -> Pencil {
        let n = self.a_hat11.nrows();
        build_q(
            &self.a_hat11,
            &identity(n),
            &self.c_hat1,
            &self.d1,
            self.star,
        )
        .expect("reduced blocks are n×n")
    }
}

/// Deflates the `m − n` dimension-induced infinite eigenvalues of a
/// `p = m ≥ n = q` equation with invertible `B`. When the block `[Ã₁₂; Ã₂₂]`
/// of `A·Q_m⋆` loses column rank, the homogeneous equation has a nonzero
/// solution, returned in [`SylvError::Nonunique`].
pub fn reduce_to_square(
    inst: &StarEquationInstance,
    tol: &Tolerances,
) -> Result<ReducedSquareEquation> {
    let (p, q, m, n) = inst.sizes();
    if !(p == m && n == q && m >= n) {
        return Err(SylvError::Precondition(format!(
            "reduction needs p = m ≥ n = q, got (p, q, m, n) = ({p}, {q}, {m}, {n})"
        )));
    }
    let star = inst.star();
    let b_inv = inverse(inst.b(), "B", tol.rank_tol)?;
    let (w, r) = qr_full(&(inst.d() * &b_inv));
    let q_m = w.adjoint();
    let d1 = r.rows(0, n).into_owned();
    let aq = inst.a() * star.apply(&q_m);
    let k = aq.columns(n, m - n).into_owned();
    // K inherits the rounding of two unitary factorizations and A·Q_m⋆, so
    // its cut scales with ‖A‖ and carries a safety factor.
    let k_tol = tol.rank_tol.unwrap_or_else(|| {
        let a_norm = singular_values(inst.a()).first().copied().unwrap_or(0.0);
        BORDERLINE_FACTOR * default_rank_tol(m, m, a_norm)
    });
    let k_rank = rank_with_tolerance(&k, Some(k_tol));
    if k_rank.rank < m - n {
        let z = null_space(&k, Some(k_tol));
        let mut y = zeros(m, n);
        for i in 0..(m - n) {
            y[(n + i, 0)] = z[(i, 0)];
        }
        return Err(SylvError::Nonunique {
            witness: star.apply(&q_m) * y,
        });
    }
    let (w2, r2) = qr_full(&k);
    // Move the first m − n rows to the bottom.
    let mut swap = zeros(m, m);
    for i in 0..n {
        swap[(i, m - n + i)] = ONE;
    }
    for i in 0..(m - n) {
        swap[(n + i, i)] = ONE;
    }
    let u = swap * w2.adjoint();
    let a_hat = &u * &aq;
    let c_hat = &u * inst.c();
    let a_hat22_sigma_min = if m > n {
        rank_with_tolerance(&r2.rows(0, m - n).into_owned(), Some(k_tol)).sigma_min()
    } else {
        f64::INFINITY
    };
    Ok(ReducedSquareEquation {
        a_hat11: a_hat.view((0, 0), (n, n)).into_owned(),
        c_hat1: c_hat.rows(0, n).into_owned(),
        d1,
        q_m,
        u,
        b_inverse_used: true,
        a_hat22_sigma_min,
        star,
    })
}

/// A nonzero solution of the homogeneous equation when `mn = pq` and
/// `p ∉ {m, n}`.
pub fn rectangular_nonuniqueness_witness(
    inst: &StarEquationInstance,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let (p, q, m, n) = inst.sizes();
    if m * n != p * q || p == m || p == n {
        return Err(SylvError::Precondition(format!(
            "witness needs mn = pq and p ∉ {{m, n}}, got (p, q, m, n) = ({p}, {q}, {m}, {n})"
        )));
    }
    let star = inst.star();
    let first = |mat: &ComplexMatrix| -> Result<ComplexMatrix> {
        let ns = null_space(mat, tol.rank_tol);
        if ns.ncols() == 0 {
            return Err(SylvError::Precondition(
                "expected a nontrivial null space".into(),
            ));
        }
        Ok(ns.columns(0, 1).into_owned())
    };
    if p < m.min(n) {
        let u = first(inst.a())?;
        let v = first(inst.c())?;
        return Ok(&u * star.apply(&v));
    }
    if p > m.max(n) {
        let v = first(&star.apply(inst.b()))?;
        let u = first(&star.apply(inst.d()))?;
        return Ok(&u * star.apply(&v));
    }
    oracle::kernel_witness(&Instance::Star(inst.clone()), tol)
        .ok_or_else(|| SylvError::Precondition("vectorized system has full column rank".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{from_real_rows, I};
    use crate::random::{complex_gaussian, seeded_rng};

    fn s(x: f64) -> ComplexMatrix {
        from_real_rows(1, 1, &[x])
    }

    fn scalar(a: f64, b: f64, c: f64, d: f64, star: StarKind) -> StarEquationInstance {
        StarEquationInstance::new(s(a), s(b), s(c), s(d), star).unwrap()
    }

    fn eq1() -> StarEquationInstance {
        StarEquationInstance::new(
            identity(2),
            s(0.0),
            from_real_rows(2, 1, &[1.0, 0.0]),
            from_real_rows(2, 1, &[1.0, 0.0]),
            StarKind::Transpose,
        )
        .unwrap()
    }

    fn eq2() -> StarEquationInstance {
        StarEquationInstance::new(
            from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            s(1.0),
            from_real_rows(2, 1, &[1.0, 0.0]),
            from_real_rows(2, 1, &[1.0, 0.0]),
            StarKind::Transpose,
        )
        .unwrap()
    }

    #[test]
    fn counterexample_pair() {
        let tol = Tolerances::default();
        let d1 = decide_ur_star(&eq1(), &tol);
        assert!(!d1.answer);
        assert_eq!(d1.theorem_case, TheoremCase::Case1Pm);
        assert!(!d1.invertibility[0].invertible);
        let d2 = decide_ur_star(&eq2(), &tol);
        assert!(d2.answer);
        let s1 = d1.spectral[0].spectrum.clone().unwrap();
        let s2 = d2.spectral[0].spectrum.clone().unwrap();
        assert!(s1.approx_eq(&s2, 1e-6));
    }

    #[test]
    fn scalar_pair() {
        let tol = Tolerances::default();
        assert!(decide_ur_star(&scalar(1.0, 1.0, 1.0, 1.0, StarKind::Transpose), &tol).answer);
        assert!(
            !decide_ur_star(
                &scalar(1.0, 1.0, 1.0, 1.0, StarKind::ConjugateTranspose),
                &tol
            )
            .answer
        );
    }

    #[test]
    fn identity_equation() {
        for star in [StarKind::Transpose, StarKind::ConjugateTranspose] {
            for n in 1..=3 {
                let inst = StarEquationInstance::new(
                    identity(n),
                    identity(n),
                    zeros(n, n),
                    zeros(n, n),
                    star,
                )
                .unwrap();
                let d = decide_ur_star(&inst, &Tolerances::default());
                assert!(d.answer);
                assert_eq!(d.spectral[0].spectrum.as_ref().unwrap().m_infinity(), 2 * n);
            }
        }
    }

    #[test]
    fn size_cases() {
        let mut rng = seeded_rng(1);
        let inst = StarEquationInstance::new(
            complex_gaussian(1, 2, &mut rng),
            complex_gaussian(2, 4, &mut rng),
            complex_gaussian(1, 2, &mut rng),
            complex_gaussian(2, 4, &mut rng),
            StarKind::Transpose,
        )
        .unwrap();
        assert_eq!(
            decide_ur_star(&inst, &Tolerances::default()).theorem_case,
            TheoremCase::AllRectangular
        );
        let inst = StarEquationInstance::new(
            complex_gaussian(2, 3, &mut rng),
            complex_gaussian(2, 2, &mut rng),
            complex_gaussian(2, 2, &mut rng),
            complex_gaussian(3, 2, &mut rng),
            StarKind::Transpose,
        )
        .unwrap();
        assert_eq!(
            decide_ur_star(&inst, &Tolerances::default()).theorem_case,
            TheoremCase::SizeMismatch
        );
    }

    #[test]
    fn reduction_of_counterexample() {
        let tol = Tolerances::default();
        let red = reduce_to_square(&eq2(), &tol).unwrap();
        assert!(decide_ur_star(&red.instance(), &tol).answer);
        // B = 0 in the other one
        assert!(matches!(
            reduce_to_square(&eq1(), &tol),
            Err(SylvError::SingularMatrix(_))
        ));
    }

    #[test]
    fn small_pencil_scalars() {
        let tol = Tolerances::default();
        let d = decide_ur_star_sylvester(&s(2.0), &s(3.0), StarKind::Transpose, &tol).unwrap();
        assert!(d.answer);
        let d =
            decide_ur_star_sylvester(&s(1.0), &s(1.0), StarKind::ConjugateTranspose, &tol).unwrap();
        assert!(!d.answer);
        let d = decide_ur_star_sylvester(&s(1.0), &s(1.0), StarKind::Transpose, &tol).unwrap();
        assert!(d.answer);
        let d = decide_ur_star_sylvester(&identity(2), &zeros(2, 2), StarKind::Transpose, &tol)
            .unwrap();
        assert!(d.answer);
    }

    #[test]
    fn imaginary_unit_separates_the_stars() {
        // AX + X⋆D with A = i, D = 1: spectrum {i}
        let tol = Tolerances::default();
        let a = ComplexMatrix::from_element(1, 1, I);
        let t = decide_ur_star_sylvester(&a, &s(1.0), StarKind::Transpose, &tol).unwrap();
        assert!(t.answer);
        let c = decide_ur_star_sylvester(&a, &s(1.0), StarKind::ConjugateTranspose, &tol).unwrap();
        assert!(!c.answer);
    }

    #[test]
    fn witness_cases() {
        let tol = Tolerances::default();
        let mut rng = seeded_rng(2);
        for (p, q, m, n) in [(1, 4, 2, 2), (4, 1, 2, 2), (3, 4, 2, 6), (3, 4, 6, 2)] {
            for star in [StarKind::Transpose, StarKind::ConjugateTranspose] {
                let inst = StarEquationInstance::new(
                    complex_gaussian(p, m, &mut rng),
                    complex_gaussian(n, q, &mut rng),
                    complex_gaussian(p, n, &mut rng),
                    complex_gaussian(m, q, &mut rng),
                    star,
                )
                .unwrap();
                let x = rectangular_nonuniqueness_witness(&inst, &tol).unwrap();
                assert!(x.norm() > 0.1);
                let res = inst.apply(&x).unwrap().norm();
                assert!(
                    res <= 1e-10 * inst.coefficient_scale() * x.norm(),
                    "{p} {q} {m} {n}: {res}"
                );
            }
        }
    }
}
