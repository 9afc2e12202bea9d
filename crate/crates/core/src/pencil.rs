//! Matrix pencils `P(λ) = N + λM`: regularity, spectra with multiplicities,
//! reversal, the block pencil `Q(λ)` of the ⋆-Sylvester equation, removal of
//! dimension-induced eigenvalues and the reciprocal-pair predicates.
//!
//! The spectrum of a regular `n × n` pencil comes from its determinant
//! polynomial: `det P(λ)` is sampled at `n + 1` points on a circle, the
//! coefficients are recovered by an inverse DFT, vanishing leading and
//! trailing coefficients give the infinite and zero eigenvalues, and the
//! remaining roots are the eigenvalues of a companion matrix.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dense::{self, ComplexMatrix, ONE, ZERO};
use crate::error::{Result, SylvError};
use crate::tolerance::{is_borderline, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StarKind {
    #[serde(rename = "T")]
    Transpose,
    #[serde(rename = "C")]
    ConjugateTranspose,
}

impl StarKind {
    pub fn apply(self, m: &ComplexMatrix) -> ComplexMatrix {
        match self {
            StarKind::Transpose => m.transpose(),
            StarKind::ConjugateTranspose => m.adjoint(),
        }
    }

    pub fn apply_scalar(self, z: Complex64) -> Complex64 {
        match self {
            StarKind::Transpose => z,
            StarKind::ConjugateTranspose => z.conj(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            StarKind::Transpose => "T",
            StarKind::ConjugateTranspose => "*",
        }
    }
}

/// `P(λ) = constant + λ·linear`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    constant: ComplexMatrix,
    linear: ComplexMatrix,
}

impl Pencil {
    pub fn new(constant: ComplexMatrix, linear: ComplexMatrix) -> Result<Self> {
        if constant.shape() != linear.shape() {
            return Err(SylvError::DimensionMismatch(format!(
                "pencil coefficients {}x{} and {}x{}",
                constant.nrows(),
                constant.ncols(),
                linear.nrows(),
                linear.ncols()
            )));
        }
        Ok(Self { constant, linear })
    }

    /// The pencil `A − λC`.
    pub fn a_minus_lambda_c(a: &ComplexMatrix, c: &ComplexMatrix) -> Result<Self> {
        Self::new(a.clone(), -c)
    }

    pub fn constant(&self) -> &ComplexMatrix {
        &self.constant
    }

    pub fn linear(&self) -> &ComplexMatrix {
        &self.linear
    }

    pub fn rows(&self) -> usize {
        self.constant.nrows()
    }

    pub fn cols(&self) -> usize {
        self.constant.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn eval(&self, lambda: Complex64) -> ComplexMatrix {
        &self.constant + &self.linear * lambda
    }

    /// `rev P(λ) = linear + λ·constant`.
    pub fn rev(&self) -> Self {
        Self {
            constant: self.linear.clone(),
            linear: self.constant.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            constant: self.constant.transpose(),
            linear: self.linear.transpose(),
        }
    }

    /// `left · P(λ) · right`.
    pub fn transform(&self, left: &ComplexMatrix, right: &ComplexMatrix) -> Result<Self> {
        if left.ncols() != self.rows() || right.nrows() != self.cols() {
            return Err(SylvError::DimensionMismatch(
                "pencil transformation does not conform".into(),
            ));
        }
        Ok(Self {
            constant: left * &self.constant * right,
            linear: left * &self.linear * right,
        })
    }

    fn norms(&self) -> (f64, f64) {
        (self.constant.norm(), self.linear.norm())
    }
}

/// A point of the extended complex plane `ℂ ∪ {∞}` (a single unsigned ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtendedComplex {
    pub const ZERO: Self = ExtendedComplex::Finite(ZERO);
    pub const ONE: Self = ExtendedComplex::Finite(ONE);
    pub const MINUS_ONE: Self = ExtendedComplex::Finite(Complex64::new(-1.0, 0.0));

    pub fn real(x: f64) -> Self {
        ExtendedComplex::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtendedComplex::Finite(z) => Some(*z),
            ExtendedComplex::Infinity => None,
        }
    }

    /// `1/λ` with `0 ↔ ∞`.
    pub fn reciprocal(&self) -> Self {
        match self {
            ExtendedComplex::Infinity => ExtendedComplex::ZERO,
            ExtendedComplex::Finite(z) if *z == ZERO => ExtendedComplex::Infinity,
            ExtendedComplex::Finite(z) => ExtendedComplex::Finite(z.inv()),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            ExtendedComplex::Infinity => ExtendedComplex::Infinity,
            ExtendedComplex::Finite(z) => ExtendedComplex::Finite(z.conj()),
        }
    }

    /// Chordal distance on the Riemann sphere; bounded by 1.
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        match (self, other) {
            (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 0.0,
            (ExtendedComplex::Finite(a), ExtendedComplex::Infinity)
            | (ExtendedComplex::Infinity, ExtendedComplex::Finite(a)) => {
                1.0 / (1.0 + a.norm_sqr()).sqrt()
            }
            (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) => {
                (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        ExtendedComplex::Finite(z)
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Infinity => write!(f, "inf"),
            ExtendedComplex::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

impl Serialize for ExtendedComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedComplex::Infinity => s.serialize_str("inf"),
            ExtendedComplex::Finite(z) => [z.re, z.im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Pair([f64; 2]),
        }
        match Repr::deserialize(d)? {
            Repr::Tag(t) if t == "inf" => Ok(ExtendedComplex::Infinity),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "expected \"inf\" or [re, im], got {t:?}"
            ))),
            Repr::Pair([re, im]) => Ok(ExtendedComplex::Finite(Complex64::new(re, im))),
        }
    }
}

/// One eigenvalue with its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: ExtendedComplex,
    pub multiplicity: usize,
    /// Largest chordal distance from `value` to a computed member.
    pub spread: f64,
}

/// Eigenvalues grouped into clusters, each with a multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMultiset {
    pub clusters: Vec<Cluster>,
    pub cluster_tol: f64,
}

impl SpectrumMultiset {
    pub fn empty(cluster_tol: f64) -> Self {
        Self {
            clusters: Vec::new(),
            cluster_tol,
        }
    }

    /// Groups `values` by single linkage on the chordal metric. A cluster
    /// touching ∞ is ∞; otherwise its value is the centroid of its members,
    /// which is far more accurate than any single member of a multiple root.
    pub fn from_values(values: &[ExtendedComplex], cluster_tol: f64) -> Self {
        let n = values.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if values[i].chordal_distance(&values[j]) <= cluster_tol {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[rj] = ri;
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            match groups.iter_mut().find(|(root, _)| *root == r) {
                Some((_, members)) => members.push(i),
                None => groups.push((r, vec![i])),
            }
        }
        let clusters = groups
            .into_iter()
            .map(|(_, members)| {
                let value = if members.iter().any(|&k| values[k].is_infinite()) {
                    ExtendedComplex::Infinity
                } else {
                    let sum: Complex64 = members.iter().filter_map(|&k| values[k].finite()).sum();
                    ExtendedComplex::Finite(sum / members.len() as f64)
                };
                let spread = members
                    .iter()
                    .map(|&k| value.chordal_distance(&values[k]))
                    .fold(0.0, f64::max);
                Cluster {
                    value,
                    multiplicity: members.len(),
                    spread,
                }
            })
            .collect();
        Self {
            clusters,
            cluster_tol,
        }
    }

    pub fn from_clusters(clusters: Vec<Cluster>, cluster_tol: f64) -> Self {
        Self {
            clusters,
            cluster_tol,
        }
    }

    /// Every eigenvalue repeated by multiplicity.
    pub fn values(&self) -> Vec<ExtendedComplex> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// `m_λ`: multiplicity of eigenvalues within `cluster_tol` of `target`.
    pub fn multiplicity_at(&self, target: ExtendedComplex) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.value.chordal_distance(&target) <= self.cluster_tol)
            .map(|c| c.multiplicity)
            .sum()
    }

    pub fn m_infinity(&self) -> usize {
        self.multiplicity_at(ExtendedComplex::Infinity)
    }

    pub fn m_zero(&self) -> usize {
        self.multiplicity_at(ExtendedComplex::ZERO)
    }

    /// Drops every cluster within `cluster_tol` of `target`.
    pub fn without(&self, target: ExtendedComplex) -> Self {
        Self {
            clusters: self
                .clusters
                .iter()
                .filter(|c| c.value.chordal_distance(&target) > self.cluster_tol)
                .copied()
                .collect(),
            cluster_tol: self.cluster_tol,
        }
    }

    /// `{λ⁻¹}` with `0 ↔ ∞`.
    pub fn inverted(&self) -> Self {
        Self {
            clusters: self
                .clusters
                .iter()
                .map(|c| Cluster {
                    value: c.value.reciprocal(),
                    ..*c
                })
                .collect(),
            cluster_tol: self.cluster_tol,
        }
    }

    /// Multiset equality up to `tol` in the chordal metric: every group of
    /// nearby eigenvalues has the same total multiplicity on both sides.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.total() != other.total() {
            return false;
        }
        let count = |s: &Self, at: &ExtendedComplex| -> usize {
            s.clusters
                .iter()
                .filter(|c| c.value.chordal_distance(at) <= tol)
                .map(|c| c.multiplicity)
                .sum()
        };
        self.clusters
            .iter()
            .chain(other.clusters.iter())
            .all(|c| count(self, &c.value) == count(other, &c.value))
    }

    /// Smallest chordal distance between two distinct clusters.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.clusters.iter().enumerate() {
            for b in &self.clusters[i + 1..] {
                best = best.min(a.value.chordal_distance(&b.value));
            }
        }
        best
    }

    /// True when some cluster decision was close to `cluster_tol`.
    pub fn has_borderline_cluster(&self) -> bool {
        let spread = self.clusters.iter().map(|c| c.spread).fold(0.0, f64::max);
        (spread > 0.0 && is_borderline(spread, self.cluster_tol))
            || is_borderline(self.min_separation(), self.cluster_tol)
    }
}

/// Coefficients of `det P(λ)` recovered by interpolation on a circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetPolynomial {
    pub size: usize,
    /// Circle radius `r`; the samples are at `λ_k = r·e^{2πik/(n+1)}`.
    pub radius: f64,
    /// Coefficients of `det P(r·z)` in `z`, lowest power first.
    pub scaled_coefficients: Vec<[f64; 2]>,
    /// Largest [`det_noise_scale`] over the samples.
    pub scale: f64,
    /// Scaled coefficients at or below this magnitude count as zero.
    pub coeff_tol: f64,
    /// `n − m_∞`; `None` when `det ≡ 0`.
    pub degree: Option<usize>,
    /// `m_0`, the algebraic multiplicity of the eigenvalue 0.
    pub valuation: Option<usize>,
    /// Index of the highest coefficient above `coeff_tol`.
    pub coefficient_degree: Option<usize>,
    /// Index of the lowest coefficient above `coeff_tol`.
    pub coefficient_valuation: Option<usize>,
}

impl DetPolynomial {
    fn coeff(&self, k: usize) -> Complex64 {
        let [re, im] = self.scaled_coefficients[k];
        Complex64::new(re, im)
    }

    /// Ratio between the smallest kept and the largest dropped coefficient,
    /// both relative to `coeff_tol`, in decades. Small means the degree call
    /// was close.
    pub fn margin_decades(&self) -> f64 {
        let tol = self.coeff_tol.max(f64::MIN_POSITIVE);
        self.scaled_coefficients
            .iter()
            .map(|&[re, im]| (re.hypot(im).max(f64::MIN_POSITIVE) / tol).log10().abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Coefficients of `det P(λ)` in `λ`, lowest power first.
    pub fn coefficients(&self) -> Vec<Complex64> {
        (0..=self.size)
            .map(|k| self.coeff(k) / self.radius.powi(k as i32))
            .collect()
    }
}

/// Bound on how far `det M` moves under a backward error `‖E‖ ≤ n·ε·‖M‖`,
/// divided by `n·ε`: `Σₖ ‖E‖ᵏ·sₙ₋ₖ(σ) / (n·ε)`, with `sⱼ` the elementary
/// symmetric functions of the singular values. The first term is
/// `‖M‖·‖adj M‖`; the others matter once the rank drops by two or more.
pub fn det_noise_scale(m: &ComplexMatrix) -> f64 {
    let sv = dense::singular_values(m);
    let n = sv.len();
    if n == 0 {
        return 1.0;
    }
    let mut sym = vec![0.0; n + 1];
    sym[0] = 1.0;
    for &x in &sv {
        for j in (1..=n).rev() {
            sym[j] += sym[j - 1] * x;
        }
    }
    let unit = n as f64 * f64::EPSILON;
    let delta = unit * sv[0];
    let mut power = 1.0;
    let mut total = 0.0;
    for k in 1..=n {
        power *= delta;
        total += power * sym[n - k];
    }
    total / unit
}

/// Samples and interpolates `det P(λ)`. The pencil must be square.
pub fn det_polynomial(p: &Pencil, tol: &Tolerances) -> Result<DetPolynomial> {
    if !p.is_square() {
        return Err(SylvError::NotSquare {
            rows: p.rows(),
            cols: p.cols(),
        });
    }
    let n = p.rows();
    let (nc, nl) = p.norms();
    let radius = (nc / nl.max(f64::EPSILON)).max(1.0);
    let points = n + 1;
    let mut samples = Vec::with_capacity(points);
    let mut scale: f64 = 0.0;
    for k in 0..points {
        let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64);
        let m = p.eval(z * radius);
        scale = scale.max(det_noise_scale(&m));
        samples.push((z, dense::det(&m)?));
    }
    let coeffs: Vec<Complex64> = (0..points)
        .map(|j| {
            samples
                .iter()
                .map(|(z, v)| v * z.powi(-(j as i32)))
                .sum::<Complex64>()
                / points as f64
        })
        .collect();
    let coeff_tol = tol.coeff_tol_factor * n.max(1) as f64 * f64::EPSILON * scale;
    let nonzero: Vec<usize> = (0..points)
        .filter(|&j| coeffs[j].norm() > coeff_tol)
        .collect();
    let (coefficient_degree, coefficient_valuation) =
        (nonzero.last().copied(), nonzero.first().copied());
    // Small coefficients of a badly scaled determinant sink into its noise
    // bound; kernel dimensions give the multiplicities of 0 and ∞ directly.
    let (degree, valuation) = match coefficient_degree {
        Some(_) => {
            let zeros = zero_multiplicity(p.constant(), p.linear(), tol);
            let infinities = zero_multiplicity(p.linear(), p.constant(), tol);
            if zeros + infinities <= n {
                (Some(n - infinities), Some(zeros))
            } else {
                (coefficient_degree, coefficient_valuation)
            }
        }
        None => (None, None),
    };
    Ok(DetPolynomial {
        size: n,
        radius,
        scaled_coefficients: coeffs.iter().map(|z| [z.re, z.im]).collect(),
        scale,
        coeff_tol,
        degree,
        valuation,
        coefficient_degree,
        coefficient_valuation,
    })
}

/// Algebraic multiplicity of 0 as an eigenvalue of the regular pencil
/// `M + λN`: the kernel of the `k`-block lower bidiagonal Toeplitz matrix
/// with `M` on the diagonal and `N` below it has dimension
/// `Σⱼ min(k, kⱼ)` over the Jordan blocks `kⱼ` at 0. `N` is rescaled to the
/// size of `M` first, which leaves those dimensions unchanged.
pub fn zero_multiplicity(m: &ComplexMatrix, n: &ComplexMatrix, tol: &Tolerances) -> usize {
    let size = m.nrows();
    let (nm, nn) = (m.norm(), n.norm());
    let n = if nm > 0.0 && nn > 0.0 {
        n * Complex64::new(nm / nn, 0.0)
    } else {
        n.clone()
    };
    let mut previous = 0;
    for k in 1..=size {
        let mut t = dense::zeros(k * size, k * size);
        for j in 0..k {
            t.view_mut((j * size, j * size), (size, size)).copy_from(m);
            if j > 0 {
                t.view_mut((j * size, (j - 1) * size), (size, size))
                    .copy_from(&n);
            }
        }
        let nullity = k * size - dense::rank_with_tolerance(&t, tol.rank_tol).rank;
        if nullity == previous {
            break;
        }
        previous = nullity;
    }
    previous
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCheck {
    pub regular: bool,
    pub rows: usize,
    pub cols: usize,
    /// Absent for rectangular pencils.
    pub polynomial: Option<DetPolynomial>,
}

pub fn is_regular(p: &Pencil, tol: &Tolerances) -> RegularityCheck {
    if !p.is_square() {
        return RegularityCheck {
            regular: false,
            rows: p.rows(),
            cols: p.cols(),
            polynomial: None,
        };
    }
    let poly = det_polynomial(p, tol).expect("square pencil");
    RegularityCheck {
        regular: poly.degree.is_some(),
        rows: p.rows(),
        cols: p.cols(),
        polynomial: Some(poly),
    }
}

/// Eigenvalues of a regular pencil with multiplicities; `m_0` and `m_∞`
/// come from [`zero_multiplicity`].
pub fn spectrum(p: &Pencil, tol: &Tolerances) -> Result<SpectrumMultiset> {
    let poly = det_polynomial(p, tol)?;
    spectrum_with_counts(p, &poly, tol)
}

/// Eigenvalues from the shifted standard problem `P(μ)⁻¹·M`, whose
/// eigenvalues are `θ = 1/(μ − λ)`. The polynomial fixes how many are
/// infinite (the smallest `|θ|`) and how many are zero; the values come
/// from a Schur decomposition, which resolves semisimple multiple
/// eigenvalues to working precision where polynomial roots would not.
pub fn spectrum_with_counts(
    p: &Pencil,
    poly: &DetPolynomial,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    let (Some(degree), Some(valuation)) = (poly.degree, poly.valuation) else {
        return Err(SylvError::SingularPencil);
    };
    let n = poly.size;
    let mut values = Vec::with_capacity(n);
    values.extend(std::iter::repeat_n(ExtendedComplex::ZERO, valuation));
    values.extend(std::iter::repeat_n(ExtendedComplex::Infinity, n - degree));
    if degree > valuation {
        let (mu, shifted) = best_shift(p, poly.radius);
        let Some(inv) = shifted.try_inverse() else {
            return Err(SylvError::SingularPencil);
        };
        let mut theta = dense::eigenvalues(&(inv * p.linear()));
        theta.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let mut finite: Vec<Complex64> = theta[n - degree..]
            .iter()
            .map(|t| polish(p, mu - ONE / t, tol.cluster_tol))
            .collect();
        finite.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        values.extend(
            finite[valuation..]
                .iter()
                .map(|&z| ExtendedComplex::Finite(z)),
        );
    }
    Ok(SpectrumMultiset::from_values(&values, tol.cluster_tol))
}

/// A shift where `P(μ)` is best conditioned, from a few angles on the
/// sampling circle and on the circle where both parts balance.
fn best_shift(p: &Pencil, radius: f64) -> (Complex64, ComplexMatrix) {
    const ANGLES: [f64; 5] = [0.7, 2.1, 3.3, 4.6, 5.8];
    let (c, l) = (p.constant().norm(), p.linear().norm());
    let mut radii = vec![radius];
    if c > 0.0 && l > 0.0 && (c / l - radius).abs() > 1e-3 * radius {
        radii.push(c / l);
    }
    radii
        .iter()
        .flat_map(|&r| ANGLES.iter().map(move |&t| Complex64::from_polar(r, t)))
        .map(|mu| {
            let m = p.eval(mu);
            let sv = dense::singular_values(&m);
            let ratio = sv.last().copied().unwrap_or(0.0)
                / sv.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
            (ratio, mu, m)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, mu, m)| (mu, m))
        .expect("nonempty")
}

/// Smallest singular value of `P(λ)` relative to the size of its parts, with
/// the matching left and right singular vectors.
fn smallest_triplet(
    p: &Pencil,
    lambda: Complex64,
) -> (f64, DVector<Complex64>, DVector<Complex64>) {
    let svd = p.eval(lambda).svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let k = svd.singular_values.argmin().0;
    let scale = (p.constant().norm() + lambda.norm() * p.linear().norm()).max(f64::MIN_POSITIVE);
    (
        svd.singular_values[k] / scale,
        u.column(k).into_owned(),
        v_t.row(k).adjoint(),
    )
}

/// Rayleigh quotient steps `λ ← −y*Mx / y*Nx` on the smallest singular pair
/// of `P(λ) = M + λN`. A step is kept only while it stays within `reach` of
/// the start and lowers the relative smallest singular value.
fn polish(p: &Pencil, start: Complex64, reach: f64) -> Complex64 {
    let limit = reach * start.norm().max(1.0);
    let (mut best, mut cur) = (smallest_triplet(p, start).0, start);
    for _ in 0..3 {
        let (_, y, x) = smallest_triplet(p, cur);
        let den = (y.adjoint() * p.linear() * &x)[(0, 0)];
        if den.norm() == 0.0 {
            break;
        }
        let next = -(y.adjoint() * p.constant() * &x)[(0, 0)] / den;
        let res = smallest_triplet(p, next).0;
        if (next - start).norm() > limit || res >= best {
            break;
        }
        (best, cur) = (res, next);
    }
    cur
}

/// Roots of the interpolated determinant. Less accurate than
/// [`spectrum_with_counts`]; kept as an independent cross-check.
pub fn spectrum_from_polynomial(
    poly: &DetPolynomial,
    tol: &Tolerances,
) -> Result<SpectrumMultiset> {
    let (Some(degree), Some(valuation)) = (poly.degree, poly.valuation) else {
        return Err(SylvError::SingularPencil);
    };
    let mut values = Vec::with_capacity(poly.size);
    values.extend(std::iter::repeat_n(ExtendedComplex::ZERO, valuation));
    values.extend(std::iter::repeat_n(
        ExtendedComplex::Infinity,
        poly.size - degree,
    ));
    let k = degree - valuation;
    if k > 0 {
        let lead = poly.coeff(degree);
        let mut companion = dense::zeros(k, k);
        for i in 0..k {
            // monic coefficient of z^(k-1-i)
            companion[(0, i)] = -poly.coeff(valuation + k - 1 - i) / lead;
        }
        for i in 1..k {
            companion[(i, i - 1)] = ONE;
        }
        values.extend(
            dense::eigenvalues(&companion)
                .into_iter()
                .map(|z| ExtendedComplex::Finite(z * poly.radius)),
        );
    }
    Ok(SpectrumMultiset::from_values(&values, tol.cluster_tol))
}

/// `Q(λ) = [[λD⋆, B⋆], [A, λC]]`, of size `(q+p) × (m+n)`.
pub fn build_q(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    star: StarKind,
) -> Result<Pencil> {
    let (p, m) = a.shape();
    let (n, q) = b.shape();
    if c.shape() != (p, n) || d.shape() != (m, q) {
        return Err(SylvError::DimensionMismatch(format!(
            "Q(λ) needs A p×m, B n×q, C p×n, D m×q; got A {p}x{m}, B {n}x{q}, C {}x{}, D {}x{}",
            c.nrows(),
            c.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    let mut constant = dense::zeros(q + p, m + n);
    let mut linear = dense::zeros(q + p, m + n);
    constant.view_mut((0, m), (q, n)).copy_from(&star.apply(b));
    constant.view_mut((q, 0), (p, m)).copy_from(a);
    linear.view_mut((0, 0), (q, m)).copy_from(&star.apply(d));
    linear.view_mut((q, m), (p, n)).copy_from(c);
    Pencil::new(constant, linear)
}

fn remove_dimension_induced(
    s: &SpectrumMultiset,
    m: usize,
    n: usize,
    target: ExtendedComplex,
    label: &'static str,
) -> Result<SpectrumMultiset> {
    let forced = m.abs_diff(n);
    let found = s.multiplicity_at(target);
    if found < forced {
        return Err(SylvError::DimensionInducedUndercount {
            at: label,
            expected: forced,
            found,
        });
    }
    Ok(if found == forced {
        s.without(target)
    } else {
        s.clone()
    })
}

/// Core eigenvalues when `p = m`: the `|m − n|` forced infinite eigenvalues
/// are dropped when there are exactly that many, otherwise nothing is.
pub fn core_spectrum_hat(s: &SpectrumMultiset, m: usize, n: usize) -> Result<SpectrumMultiset> {
    remove_dimension_induced(s, m, n, ExtendedComplex::Infinity, "infinity")
}

/// Core eigenvalues when `p = n`, with 0 in place of ∞.
pub fn core_spectrum_tilde(s: &SpectrumMultiset, m: usize, n: usize) -> Result<SpectrumMultiset> {
    remove_dimension_induced(s, m, n, ExtendedComplex::ZERO, "zero")
}

/// Values removed from the set before the reciprocal-pair test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exclusion {
    Nothing,
    PlusOne,
    PlusMinusOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalCheck {
    pub free: bool,
    /// Smallest pair metric seen (`|λμ⋆ − 1|`, or chordal distance to 0 for
    /// pairs involving ∞). Infinite when no pair was tested.
    #[serde(with = "crate::dense::float_serde")]
    pub closest: f64,
    pub offending_pair: Option<(ExtendedComplex, ExtendedComplex)>,
    pub pair_tol: f64,
}

impl ReciprocalCheck {
    pub fn borderline(&self) -> bool {
        is_borderline(self.closest, self.pair_tol)
    }
}

fn reciprocal_metric(a: &ExtendedComplex, b: &ExtendedComplex, star: StarKind) -> f64 {
    match (a, b) {
        (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 1.0,
        (ExtendedComplex::Infinity, z @ ExtendedComplex::Finite(_))
        | (z @ ExtendedComplex::Finite(_), ExtendedComplex::Infinity) => {
            z.chordal_distance(&ExtendedComplex::ZERO)
        }
        (ExtendedComplex::Finite(x), ExtendedComplex::Finite(y)) => {
            (x * star.apply_scalar(*y) - ONE).norm()
        }
    }
}

/// Whether no two eigenvalues (an eigenvalue with itself included) satisfy
/// `λ = μ⁻¹` for `⊤`, or `λ = (conj μ)⁻¹` for `*`.
pub fn is_reciprocal_free(
    s: &SpectrumMultiset,
    star: StarKind,
    exclusion: Exclusion,
    pair_tol: f64,
) -> ReciprocalCheck {
    let excluded: &[ExtendedComplex] = match exclusion {
        Exclusion::Nothing => &[],
        Exclusion::PlusOne => &[ExtendedComplex::ONE],
        Exclusion::PlusMinusOne => &[ExtendedComplex::ONE, ExtendedComplex::MINUS_ONE],
    };
    let support: Vec<ExtendedComplex> = s
        .clusters
        .iter()
        .map(|c| c.value)
        .filter(|v| {
            excluded
                .iter()
                .all(|e| v.chordal_distance(e) > s.cluster_tol)
        })
        .collect();
    let mut closest = f64::INFINITY;
    let mut offending_pair = None;
    for (i, a) in support.iter().enumerate() {
        for b in &support[i..] {
            let metric = reciprocal_metric(a, b, star);
            if metric < closest {
                closest = metric;
                if metric < pair_tol {
                    offending_pair = Some((*a, *b));
                }
            }
        }
    }
    ReciprocalCheck {
        free: offending_pair.is_none(),
        closest,
        offending_pair,
        pair_tol,
    }
}

/// `m₁ = m₋₁ ≤ 1`.
pub fn unimodular_pair_condition(s: &SpectrumMultiset) -> bool {
    let plus = s.multiplicity_at(ExtendedComplex::ONE);
    let minus = s.multiplicity_at(ExtendedComplex::MINUS_ONE);
    plus == minus && plus <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{from_real_rows, identity, zeros};
    use crate::random::{complex_gaussian, seeded_rng, well_conditioned};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn set(values: &[ExtendedComplex]) -> SpectrumMultiset {
        SpectrumMultiset::from_values(values, 1e-6)
    }

    fn r(x: f64) -> ExtendedComplex {
        ExtendedComplex::real(x)
    }

    fn scalar(x: f64) -> ComplexMatrix {
        from_real_rows(1, 1, &[x])
    }

    #[test]
    fn build_q_scalar_identity() {
        let q = build_q(
            &scalar(1.0),
            &scalar(1.0),
            &scalar(0.0),
            &scalar(0.0),
            StarKind::Transpose,
        )
        .unwrap();
        assert_eq!(q.constant(), &from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(q.linear(), &zeros(2, 2));
    }

    #[test]
    fn build_q_counterexamples() {
        let d = from_real_rows(2, 1, &[1.0, 0.0]);
        let c = from_real_rows(2, 1, &[1.0, 0.0]);
        let q1 = build_q(&identity(2), &scalar(0.0), &c, &d, StarKind::Transpose).unwrap();
        assert_eq!(
            q1.constant(),
            &from_real_rows(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert_eq!(
            q1.linear(),
            &from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
        );
        let a2 = from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let q2 = build_q(&a2, &scalar(1.0), &c, &d, StarKind::Transpose).unwrap();
        assert_eq!(
            q2.constant(),
            &from_real_rows(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert_eq!(q2.linear(), q1.linear());

        // det Q1 = det Q2 = -λ², so both are regular with spectrum {0, 0, ∞}.
        for q in [&q1, &q2] {
            let check = is_regular(q, &tol());
            assert!(check.regular);
            let coeffs = check.polynomial.unwrap().coefficients();
            assert!((coeffs[2] + ONE).norm() < 1e-14);
            for k in [0, 1, 3] {
                assert!(coeffs[k].norm() < 1e-14);
            }
        }
        let s1 = spectrum(&q1, &tol()).unwrap();
        assert_eq!(s1.m_zero(), 2);
        assert_eq!(s1.m_infinity(), 1);
        assert!(s1.approx_eq(&spectrum(&q2, &tol()).unwrap(), 1e-6));
    }

    #[test]
    fn regularity_examples() {
        let p = Pencil::new(
            from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        assert!(is_regular(&p, &tol()).regular);
        let zero = Pencil::new(zeros(2, 2), zeros(2, 2)).unwrap();
        assert!(!is_regular(&zero, &tol()).regular);
        assert!(matches!(
            spectrum(&zero, &tol()),
            Err(SylvError::SingularPencil)
        ));
        let rect = Pencil::new(zeros(2, 3), zeros(2, 3)).unwrap();
        assert!(!is_regular(&rect, &tol()).regular);
    }

    #[test]
    fn singular_pencil_with_random_coefficients() {
        // [[a, λb], [a, λb]]-type: rows proportional for every λ.
        let mut rng = seeded_rng(4);
        let row_c = complex_gaussian(1, 3, &mut rng);
        let row_l = complex_gaussian(1, 3, &mut rng);
        let mut c = zeros(3, 3);
        let mut l = zeros(3, 3);
        for i in 0..2 {
            c.row_mut(i)
                .copy_from(&(&row_c * Complex64::new(i as f64 + 1.0, 0.0)));
            l.row_mut(i)
                .copy_from(&(&row_l * Complex64::new(i as f64 + 1.0, 0.0)));
        }
        c.row_mut(2).copy_from(&complex_gaussian(1, 3, &mut rng));
        l.row_mut(2).copy_from(&complex_gaussian(1, 3, &mut rng));
        assert!(!is_regular(&Pencil::new(c, l).unwrap(), &tol()).regular);
    }

    #[test]
    fn spectrum_examples() {
        // diag(λ−2, λ−3, 1)
        let p = Pencil::new(
            from_real_rows(3, 3, &[-2.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.0, 1.0]),
            from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        let s = spectrum(&p, &tol()).unwrap();
        assert!(s.approx_eq(&set(&[r(2.0), r(3.0), ExtendedComplex::Infinity]), 1e-9));

        let p = Pencil::new(from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]), zeros(2, 2)).unwrap();
        let s = spectrum(&p, &tol()).unwrap();
        assert_eq!(s.m_infinity(), 2);
        assert_eq!(s.clusters.len(), 1);

        // a=b=c=d=1, ⊤: det Q = λ² − 1
        let one = scalar(1.0);
        let q = build_q(&one, &one, &one, &one, StarKind::Transpose).unwrap();
        let s = spectrum(&q, &tol()).unwrap();
        assert!(s.approx_eq(&set(&[r(1.0), r(-1.0)]), 1e-12));
    }

    #[test]
    fn core_spectrum_examples() {
        let s = set(&[r(2.0), ExtendedComplex::Infinity]);
        assert_eq!(core_spectrum_hat(&s, 2, 1).unwrap().values(), vec![r(2.0)]);
        let s = set(&[ExtendedComplex::Infinity, ExtendedComplex::Infinity]);
        assert_eq!(core_spectrum_hat(&s, 2, 1).unwrap().total(), 2);
        let s = set(&[r(2.0)]);
        assert!(matches!(
            core_spectrum_hat(&s, 3, 1),
            Err(SylvError::DimensionInducedUndercount {
                expected: 2,
                found: 0,
                ..
            })
        ));

        let s = set(&[r(0.0), r(5.0)]);
        assert_eq!(
            core_spectrum_tilde(&s, 2, 1).unwrap().values(),
            vec![r(5.0)]
        );
        let s = set(&[r(0.0), r(0.0)]);
        assert_eq!(core_spectrum_tilde(&s, 2, 1).unwrap().total(), 2);
    }

    #[test]
    fn reciprocal_examples() {
        let t = StarKind::Transpose;
        let c = StarKind::ConjugateTranspose;
        assert!(is_reciprocal_free(&set(&[r(2.0), r(3.0)]), t, Exclusion::Nothing, 1e-8).free);
        assert!(!is_reciprocal_free(&set(&[r(2.0), r(0.5)]), t, Exclusion::Nothing, 1e-8).free);
        let i = set(&[ExtendedComplex::Finite(dense::I)]);
        assert!(is_reciprocal_free(&i, t, Exclusion::Nothing, 1e-8).free);
        assert!(!is_reciprocal_free(&i, c, Exclusion::Nothing, 1e-8).free);

        // 0 and ∞ are mutual reciprocals; ∞ alone is fine.
        let zi = set(&[r(0.0), ExtendedComplex::Infinity]);
        assert!(!is_reciprocal_free(&zi, t, Exclusion::Nothing, 1e-8).free);
        assert!(!is_reciprocal_free(&zi, c, Exclusion::Nothing, 1e-8).free);
        let ii = set(&[ExtendedComplex::Infinity, ExtendedComplex::Infinity]);
        assert!(is_reciprocal_free(&ii, c, Exclusion::Nothing, 1e-8).free);

        // ±1 are self-reciprocal unless excluded.
        let pm = set(&[r(1.0), r(-1.0), r(3.0)]);
        assert!(!is_reciprocal_free(&pm, t, Exclusion::Nothing, 1e-8).free);
        assert!(!is_reciprocal_free(&pm, t, Exclusion::PlusOne, 1e-8).free);
        assert!(is_reciprocal_free(&pm, t, Exclusion::PlusMinusOne, 1e-8).free);
    }

    #[test]
    fn unimodular_pair_examples() {
        assert!(unimodular_pair_condition(&set(&[r(1.0), r(-1.0)])));
        assert!(!unimodular_pair_condition(&set(&[
            r(1.0),
            r(1.0),
            r(-1.0),
            r(-1.0)
        ])));
        assert!(!unimodular_pair_condition(&set(&[r(1.0)])));
        assert!(unimodular_pair_condition(&set(&[r(3.0)])));
    }

    #[test]
    fn clustering_merges_near_infinite_roots() {
        let s = set(&[ExtendedComplex::Infinity, r(1e13), r(2.0)]);
        assert_eq!(s.m_infinity(), 2);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn serde_uses_inf_tag() {
        let v = vec![ExtendedComplex::Infinity, r(1.5)];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"["inf",[1.5,0.0]]"#);
        let back: Vec<ExtendedComplex> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtendedComplex>(r#""nan""#).is_err());
    }

    fn random_regular_pencil(seed: u64, n: usize) -> Pencil {
        let mut rng = seeded_rng(seed);
        Pencil::new(
            complex_gaussian(n, n, &mut rng),
            complex_gaussian(n, n, &mut rng),
        )
        .unwrap()
    }

    #[test]
    fn reversal_inverts_spectrum() {
        for seed in 0..100u64 {
            let n = 1 + (seed as usize % 6);
            let p = random_regular_pencil(seed, n);
            let s = spectrum(&p, &tol()).unwrap();
            let srev = spectrum(&p.rev(), &tol()).unwrap();
            assert_eq!(s.total(), n);
            assert!(s.inverted().approx_eq(&srev, 1e-6), "seed {seed}");
        }
    }

    #[test]
    fn reversal_with_structural_zeros_and_infinities() {
        // rank-deficient linear part -> infinite eigenvalues; rank-deficient
        // constant part -> zero eigenvalues.
        let mut rng = seeded_rng(77);
        for _ in 0..30 {
            let n = 4;
            let mut c = complex_gaussian(n, n, &mut rng);
            let mut l = complex_gaussian(n, n, &mut rng);
            c.column_mut(0).fill(ZERO);
            l.row_mut(1).fill(ZERO);
            let p = Pencil::new(c, l).unwrap();
            let s = spectrum(&p, &tol()).unwrap();
            assert_eq!(s.m_infinity(), 1);
            assert_eq!(s.m_zero(), 1);
            assert!(s
                .inverted()
                .approx_eq(&spectrum(&p.rev(), &tol()).unwrap(), 1e-6));
        }
    }

    #[test]
    fn q_spectrum_is_invariant_under_block_swap() {
        let mut rng = seeded_rng(21);
        for _ in 0..20 {
            let n = 2;
            let (a, b, c, d) = (
                complex_gaussian(n, n, &mut rng),
                complex_gaussian(n, n, &mut rng),
                complex_gaussian(n, n, &mut rng),
                complex_gaussian(n, n, &mut rng),
            );
            let q = build_q(&a, &b, &c, &d, StarKind::Transpose).unwrap();
            let mut swap = zeros(2 * n, 2 * n);
            swap.view_mut((0, n), (n, n)).copy_from(&identity(n));
            swap.view_mut((n, 0), (n, n)).copy_from(&identity(n));
            let swapped = q.transform(&swap, &swap).unwrap();
            let s = spectrum(&q, &tol()).unwrap();
            assert!(s.approx_eq(&spectrum(&swapped, &tol()).unwrap(), 1e-6));
        }
    }

    #[test]
    fn matches_eigenvalues_of_c_inverse_a() {
        let mut rng = seeded_rng(8);
        for n in 1..=8 {
            let a = complex_gaussian(n, n, &mut rng);
            let c = well_conditioned(n, &mut rng);
            let p = Pencil::a_minus_lambda_c(&a, &c).unwrap();
            let s = spectrum(&p, &tol()).unwrap();
            let reference = dense::eigenvalues(&(c.clone().try_inverse().unwrap() * &a));
            let mut got: Vec<Complex64> = s.values().iter().map(|v| v.finite().unwrap()).collect();
            for z in reference {
                let (k, d) = got
                    .iter()
                    .enumerate()
                    .map(|(k, w)| (k, (w - z).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .unwrap();
                assert!(d < 1e-8, "n={n}: {d}");
                got.remove(k);
            }
        }
    }

    proptest! {
        #[test]
        fn reciprocal_free_ignores_order_and_duplicates(
            raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..6),
            seed in any::<u64>(),
        ) {
            let vals: Vec<ExtendedComplex> =
                raw.iter().map(|&(a, b)| ExtendedComplex::Finite(Complex64::new(a, b))).collect();
            let mut shuffled = vals.clone();
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.push(vals[k]);
            for star in [StarKind::Transpose, StarKind::ConjugateTranspose] {
                for ex in [Exclusion::Nothing, Exclusion::PlusMinusOne] {
                    let x = is_reciprocal_free(&set(&vals), star, ex, 1e-8).free;
                    let y = is_reciprocal_free(&set(&shuffled), star, ex, 1e-8).free;
                    prop_assert_eq!(x, y);
                }
            }
        }
    }
}
