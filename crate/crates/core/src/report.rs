//! Instance files in and structured reports out.
//!
//! Matrices travel as `{rows, cols, entries}` with row-major `[re, im]`
//! pairs; eigenvalues at infinity are the string `"inf"`.

use serde::{Deserialize, Serialize};

use crate::dense::{ComplexMatrix, MatrixJson};
use crate::equation::{GSylvInstance, Instance, StarEquationInstance};
use crate::error::{Result, SylvError};
use crate::gsylv::{
    ac_pencil, db_pencil, decide_sr_or_ur, decide_ur_staircase, kronecker_structure,
    ratio_necessary_condition, KroneckerStructure, RatioCondition, SolvabilityReport,
    StaircaseDecision,
};
use crate::oracle::{self, FixedRhsVerdict, OracleVerdict};
use crate::pencil::{
    build_q, core_spectrum_hat, core_spectrum_tilde, is_regular, spectrum_with_counts,
    ExtendedComplex, Pencil, RegularityCheck, SpectrumMultiset, StarKind,
};
use crate::star::{
    decide_ur_star, decide_ur_star_smallpencil, small_pencil, Confidence, SmallPencil,
    SpectrumKind, TheoremCase, URDecision,
};
use crate::tolerance::Tolerances;

pub const TOOL_NAME: &str = "sylvkit";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    /// `AXB + CX⋆D = E`.
    StarSylvester,
    /// `AXB − CXD = E`.
    GenSylvester,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarTag {
    T,
    C,
}

impl From<StarTag> for StarKind {
    fn from(t: StarTag) -> Self {
        match t {
            StarTag::T => StarKind::Transpose,
            StarTag::C => StarKind::ConjugateTranspose,
        }
    }
}

impl From<StarKind> for StarTag {
    fn from(k: StarKind) -> Self {
        match k {
            StarKind::Transpose => StarTag::T,
            StarKind::ConjugateTranspose => StarTag::C,
        }
    }
}

/// On-disk form of an equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub equation: EquationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarTag>,
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "B")]
    pub b: MatrixJson,
    #[serde(rename = "C")]
    pub c: MatrixJson,
    #[serde(rename = "D")]
    pub d: MatrixJson,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<MatrixJson>,
    /// Free text, e.g. where a reproducer came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// 1-based line and column of the first `"key":` in `text`, if any.
fn key_position(text: &str, key: &str) -> Option<(usize, usize)> {
    let quoted = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = text[from..].find(&quoted) {
        let at = from + off;
        let rest = text[at + quoted.len()..].trim_start();
        if rest.starts_with(':') {
            let before = &text[..at];
            let line = before.matches('\n').count() + 1;
            let column = at - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            return Some((line, column));
        }
        from = at + quoted.len();
    }
    None
}

/// Pretty JSON with innermost arrays such as `[re, im]` kept on one line.
pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    let bytes = text.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(text.len());
    let (mut i, mut in_string) = (0, false);
    while i < bytes.len() {
        let c = bytes[i];
        if in_string {
            if c == b'\\' {
                out.extend_from_slice(&bytes[i..i + 2]);
                i += 2;
                continue;
            }
            in_string = c != b'"';
        } else if c == b'"' {
            in_string = true;
        } else if c == b'[' {
            // innermost arrays hold only numbers, null or bare literals
            if let Some(len) = text[i + 1..].find(']') {
                let inner = &text[i + 1..i + 1 + len];
                if !inner.contains(['[', '{', '"']) {
                    let items: Vec<&str> = inner.split(',').map(str::trim).collect();
                    out.push(b'[');
                    out.extend_from_slice(items.join(", ").as_bytes());
                    out.push(b']');
                    i += len + 2;
                    continue;
                }
            }
        }
        out.push(c);
        i += 1;
    }
    String::from_utf8(out).expect("only ASCII whitespace was removed")
}

fn anchored(text: Option<&str>, key: &str, message: String) -> SylvError {
    let (line, column) = text.and_then(|t| key_position(t, key)).unwrap_or((1, 1));
    SylvError::Input {
        line,
        column,
        message,
    }
}

impl InstanceFile {
    /// Parses and validates; every error carries a line and column.
    pub fn parse(text: &str) -> Result<(Self, Instance)> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| SylvError::Input {
            line: e.line().max(1),
            column: e.column().max(1),
            message: e.to_string(),
        })?;
        let inst = file.validate(Some(text))?;
        Ok((file, inst))
    }

    fn matrix(&self, key: &str, j: &MatrixJson, text: Option<&str>) -> Result<ComplexMatrix> {
        if j.rows == 0 || j.cols == 0 {
            return Err(anchored(
                text,
                key,
                format!("{key} must have at least one row and column"),
            ));
        }
        if let Some(k) = j
            .entries
            .iter()
            .position(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(anchored(
                text,
                key,
                format!("{key} has a non-finite entry at index {k}"),
            ));
        }
        j.to_matrix()
            .map_err(|e| anchored(text, key, format!("{key}: {e}")))
    }

    /// Checks shapes against the equation type and builds the instance.
    pub fn validate(&self, text: Option<&str>) -> Result<Instance> {
        let star: Option<StarKind> = match (self.equation, self.star) {
            (EquationKind::StarSylvester, Some(s)) => Some(s.into()),
            (EquationKind::GenSylvester, None) => None,
            (EquationKind::StarSylvester, None) => {
                return Err(anchored(
                    text,
                    "equation",
                    "star_sylvester needs \"star\": \"T\" or \"C\"".into(),
                ))
            }
            (EquationKind::GenSylvester, Some(_)) => {
                return Err(anchored(
                    text,
                    "star",
                    "gen_sylvester takes no \"star\"".into(),
                ))
            }
        };
        let a = self.matrix("A", &self.a, text)?;
        let b = self.matrix("B", &self.b, text)?;
        let c = self.matrix("C", &self.c, text)?;
        let d = self.matrix("D", &self.d, text)?;
        let e = match &self.e {
            Some(j) => Some(self.matrix("E", j, text)?),
            None => None,
        };
        let (p, m) = a.shape();
        let (n, q) = b.shape();
        let expected = match self.equation {
            EquationKind::StarSylvester => [("C", &c, (p, n)), ("D", &d, (m, q))],
            EquationKind::GenSylvester => [("C", &c, (p, m)), ("D", &d, (n, q))],
        };
        for (key, mat, shape) in expected {
            if mat.shape() != shape {
                return Err(anchored(
                    text,
                    key,
                    format!(
                        "{key} must be {}x{} given A {p}x{m} and B {n}x{q}, got {}x{}",
                        shape.0,
                        shape.1,
                        mat.nrows(),
                        mat.ncols()
                    ),
                ));
            }
        }
        if let Some(e) = &e {
            if e.shape() != (p, q) {
                return Err(anchored(
                    text,
                    "E",
                    format!("E must be {p}x{q}, got {}x{}", e.nrows(), e.ncols()),
                ));
            }
        }
        let built = match star {
            Some(star) => StarEquationInstance::new(a, b, c, d, star)
                .and_then(|i| match e {
                    Some(e) => i.with_rhs(e),
                    None => Ok(i),
                })
                .map(Instance::Star),
            None => GSylvInstance::new(a, b, c, d)
                .and_then(|i| match e {
                    Some(e) => i.with_rhs(e),
                    None => Ok(i),
                })
                .map(Instance::GSylv),
        };
        built.map_err(|e| anchored(text, "A", e.to_string()))
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let (equation, star, mats) = match inst {
            Instance::Star(i) => (
                EquationKind::StarSylvester,
                Some(i.star().into()),
                [i.a(), i.b(), i.c(), i.d()],
            ),
            Instance::GSylv(i) => (
                EquationKind::GenSylvester,
                None,
                [i.a(), i.b(), i.c(), i.d()],
            ),
        };
        Self {
            equation,
            star,
            a: mats[0].into(),
            b: mats[1].into(),
            c: mats[2].into(),
            d: mats[3].into(),
            e: inst.rhs().map(MatrixJson::from),
            note: None,
            seed: None,
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(self)
    }
}

/// Which deciders `analyze` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Spectral,
    Oracle,
    #[default]
    Both,
}

impl Backend {
    fn spectral(self) -> bool {
        self != Backend::Oracle
    }

    fn oracle(self) -> bool {
        self != Backend::Spectral
    }
}

/// A deliberately wrong spectral decider, for exercising the disagreement
/// path of the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Negates the `⋆`-equation answer on square coefficients.
    StarSquareNegated,
    /// Negates the SR answer of the generalized equation.
    GSylvSrNegated,
}

fn star_square_negated(inst: &StarEquationInstance, tol: &Tolerances) -> URDecision {
    let mut d = decide_ur_star(inst, tol);
    if d.theorem_case == TheoremCase::Case3Square {
        d.answer = !d.answer;
    }
    d
}

fn gsylv_sr_negated(inst: &GSylvInstance, tol: &Tolerances) -> SolvabilityReport {
    let mut r = decide_sr_or_ur(inst, tol);
    r.sr = !r.sr;
    r
}

/// The spectral deciders, swappable so that a faulty build can be simulated.
#[derive(Debug, Clone, Copy)]
pub struct Deciders {
    pub star_ur: fn(&StarEquationInstance, &Tolerances) -> URDecision,
    pub gsylv: fn(&GSylvInstance, &Tolerances) -> SolvabilityReport,
}

impl Default for Deciders {
    fn default() -> Self {
        Self {
            star_ur: decide_ur_star,
            gsylv: decide_sr_or_ur,
        }
    }
}

impl Deciders {
    pub fn with_fault(fault: Option<Fault>) -> Self {
        let mut d = Self::default();
        match fault {
            Some(Fault::StarSquareNegated) => d.star_ur = star_square_negated,
            Some(Fault::GSylvSrNegated) => d.gsylv = gsylv_sr_negated,
            None => {}
        }
        d
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOptions {
    pub tol: Tolerances,
    pub backend: Backend,
    pub deciders: Deciders,
}

/// One question answered by up to two backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// `None` when the spectral route does not settle the question.
    pub spectral: Option<bool>,
    pub oracle: Option<bool>,
    /// Present when both answered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    /// How the spectral answer was reached.
    pub basis: String,
}

impl Decision {
    fn new(spectral: Option<bool>, oracle: Option<bool>, basis: impl Into<String>) -> Self {
        let agree = match (spectral, oracle) {
            (Some(s), Some(o)) => Some(s == o),
            _ => None,
        };
        Self {
            spectral,
            oracle,
            agree,
            basis: basis.into(),
        }
    }

    /// The oracle answer when available, else the spectral one.
    pub fn value(&self) -> Option<bool> {
        self.oracle.or(self.spectral)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decisions {
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Decision>,
    #[serde(rename = "US", default, skip_serializing_if = "Option::is_none")]
    pub us: Option<Decision>,
    #[serde(rename = "SR")]
    pub sr: Decision,
    #[serde(rename = "OR")]
    pub or: Decision,
    #[serde(rename = "UR")]
    pub ur: Decision,
}

impl Decisions {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Decision)> {
        [("S", self.s.as_ref()), ("US", self.us.as_ref())]
            .into_iter()
            .filter_map(|(k, d)| d.map(|d| (k, d)))
            .chain([("SR", &self.sr), ("OR", &self.or), ("UR", &self.ur)])
    }

    /// `(spectral, oracle)` per question, for bit-for-bit comparisons.
    pub fn booleans(&self) -> Vec<(&'static str, Option<bool>, Option<bool>)> {
        self.iter()
            .map(|(k, d)| (k, d.spectral, d.oracle))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarEvidence {
    /// From the spectrum of `Q(λ)`.
    pub main: URDecision,
    /// From the same-size pencils, where a precondition holds.
    pub small_pencil: URDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSylvEvidence {
    pub kronecker: SolvabilityReport,
    pub staircase: StaircaseDecision,
    pub ratio: RatioCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEvidence {
    pub verdict: OracleVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rhs: Option<FixedRhsVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gsylv: Option<GSylvEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEvidence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub equation: EquationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarTag>,
    pub sizes: Sizes,
    pub has_rhs: bool,
}

impl InstanceSummary {
    pub fn of(inst: &Instance) -> Self {
        let (p, q, m, n) = inst.sizes();
        let (equation, star) = match inst {
            Instance::Star(i) => (EquationKind::StarSylvester, Some(i.star().into())),
            Instance::GSylv(_) => (EquationKind::GenSylvester, None),
        };
        Self {
            equation,
            star,
            sizes: Sizes { p, q, m, n },
            has_rhs: inst.rhs().is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    #[serde(rename = "X")]
    pub x: MatrixJson,
    /// `‖lhs(X) − E‖_F` by direct evaluation.
    pub residual_fro: f64,
    /// False means `X` is the minimum-norm least-squares answer.
    pub unique: bool,
}

/// Eigenvalues removed as dimension-induced before a test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSpectrum {
    pub kind: SpectrumKind,
    pub removed_value: ExtendedComplex,
    pub removed_count: usize,
    pub spectrum: SpectrumMultiset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PencilChoice {
    Q,
    P1,
    P2,
    P3,
    P4,
    AC,
    DB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub pencil: PencilChoice,
    pub rows: usize,
    pub cols: usize,
    pub regular: bool,
    /// Determinant evidence for square pencils.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularityCheck>,
    /// Eigenvalues with multiplicities (of the regular part when singular).
    pub spectrum: SpectrumMultiset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<CoreSpectrum>,
    /// Minimal indices and regular part, for singular or rectangular pencils.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<KroneckerStructure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: String,
    pub total: usize,
    pub agree: usize,
    pub ur_true: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstDisagreement {
    pub index: usize,
    pub category: String,
    pub instance: InstanceFile,
    pub report: ReportFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub max_dim: usize,
    pub count: usize,
    pub agree: usize,
    pub categories: Vec<CategoryCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_disagreement: Option<Box<FirstDisagreement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<String>,
}

impl SuiteSummary {
    pub fn headline(&self) -> String {
        format!("{}/{} agree", self.agree, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Solve,
    Spectrum,
    Suite,
}

/// Everything the CLI prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<Decisions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<Confidence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disagreements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteSummary>,
}

impl ReportFile {
    pub fn new(command: Command, tol: &Tolerances) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command,
            input: None,
            seed: None,
            tolerances: *tol,
            backend: None,
            instance: None,
            decisions: None,
            confidence: None,
            disagreements: Vec::new(),
            evidence: None,
            solution: None,
            spectrum: None,
            suite: None,
        }
    }

    pub fn agreed(&self) -> bool {
        self.disagreements.is_empty()
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SylvError::Input {
            line: e.line().max(1),
            column: e.column().max(1),
            message: e.to_string(),
        })
    }
}

fn push_if_disagree(
    out: &mut Vec<String>,
    what: &str,
    a: bool,
    b: bool,
    a_name: &str,
    b_name: &str,
) {
    if a != b {
        out.push(format!("{what}: {a_name} says {a}, {b_name} says {b}"));
    }
}

fn star_decisions(
    inst: &StarEquationInstance,
    opts: &AnalyzeOptions,
    oracle: Option<&OracleEvidence>,
    evidence: &mut Evidence,
    disagreements: &mut Vec<String>,
) -> (Decisions, bool) {
    let (p, q, m, n) = inst.sizes();
    let spectral = opts.backend.spectral().then(|| {
        let main = (opts.deciders.star_ur)(inst, &opts.tol);
        let small_pencil = decide_ur_star_smallpencil(inst, &opts.tol);
        StarEvidence { main, small_pencil }
    });
    let ur = spectral.as_ref().map(|s| s.main.answer);
    let mut borderline = false;
    if let Some(s) = &spectral {
        borderline |= s.main.confidence == Confidence::Borderline;
        if s.small_pencil.theorem_case != TheoremCase::NoPrecondition {
            push_if_disagree(
                disagreements,
                "UR",
                s.main.answer,
                s.small_pencil.answer,
                "Q pencil",
                "small pencil",
            );
        }
    }
    // The vectorized operator is (pq)×(mn): when it is square SR, OR and UR
    // coincide, otherwise the short side rules one of them out.
    let (sr, sr_basis) = if m * n == p * q {
        (ur, "square operator: SR = UR")
    } else if m * n > p * q {
        (None, "more unknowns than equations: not settled spectrally")
    } else {
        (
            spectral.as_ref().map(|_| false),
            "more equations than unknowns: SR false",
        )
    };
    let (or, or_basis) = if m * n == p * q {
        (ur, "square operator: OR = UR")
    } else if m * n > p * q {
        (
            spectral.as_ref().map(|_| false),
            "more unknowns than equations: OR false",
        )
    } else {
        (None, "more equations than unknowns: not settled spectrally")
    };
    let ur_basis = spectral
        .as_ref()
        .map(|s| format!("{:?}", s.main.theorem_case))
        .unwrap_or_default();
    let verdict = oracle.map(|o| &o.verdict);
    let decisions = fixed_rhs_decisions(
        inst.rhs().is_some(),
        Decision::new(sr, verdict.map(|v| v.sr), sr_basis),
        Decision::new(or, verdict.map(|v| v.or), or_basis),
        Decision::new(ur, verdict.map(|v| v.ur), ur_basis),
        oracle,
    );
    evidence.star = spectral;
    (decisions, borderline)
}

fn gsylv_decisions(
    inst: &GSylvInstance,
    opts: &AnalyzeOptions,
    oracle: Option<&OracleEvidence>,
    evidence: &mut Evidence,
    disagreements: &mut Vec<String>,
) -> (Decisions, bool) {
    let (p, q, m, n) = inst.sizes();
    let spectral = opts.backend.spectral().then(|| GSylvEvidence {
        kronecker: (opts.deciders.gsylv)(inst, &opts.tol),
        staircase: decide_ur_staircase(inst, &opts.tol),
        ratio: ratio_necessary_condition(p, m, n, q),
    });
    let mut borderline = false;
    if let Some(g) = &spectral {
        borderline |= g.kronecker.confidence == Confidence::Borderline
            || g.staircase.confidence == Confidence::Borderline;
        push_if_disagree(
            disagreements,
            "UR",
            g.kronecker.ur,
            g.staircase.answer,
            "Kronecker",
            "staircase",
        );
        if g.kronecker.ur && !g.ratio.holds {
            disagreements.push("UR: Kronecker says true but the ratio condition fails".into());
        }
    }
    let k = spectral.as_ref().map(|g| &g.kronecker);
    let basis = k.map(|k| k.which_clause_fired.clone()).unwrap_or_default();
    let verdict = oracle.map(|o| &o.verdict);
    let decisions = fixed_rhs_decisions(
        inst.rhs().is_some(),
        Decision::new(k.map(|k| k.sr), verdict.map(|v| v.sr), basis.clone()),
        Decision::new(k.map(|k| k.or), verdict.map(|v| v.or), basis.clone()),
        Decision::new(k.map(|k| k.ur), verdict.map(|v| v.ur), basis),
        oracle,
    );
    evidence.gsylv = spectral;
    (decisions, borderline)
}

/// `S` and `US` for the given `E`: the spectral side answers only when
/// SR or UR already settles them, or OR rules uniqueness out.
fn fixed_rhs_decisions(
    has_rhs: bool,
    sr: Decision,
    or: Decision,
    ur: Decision,
    oracle: Option<&OracleEvidence>,
) -> Decisions {
    let (s, us) = if has_rhs {
        let fixed = oracle.and_then(|o| o.fixed_rhs.as_ref());
        let s_spec = (sr.spectral == Some(true)).then_some(true);
        let us_spec = match (ur.spectral, or.spectral) {
            (Some(true), _) => Some(true),
            (_, Some(false)) => Some(false),
            _ => None,
        };
        (
            Some(Decision::new(s_spec, fixed.map(|f| f.s), "SR implies S")),
            Some(Decision::new(
                us_spec,
                fixed.map(|f| f.us),
                "UR implies US; not OR excludes it",
            )),
        )
    } else {
        (None, None)
    };
    Decisions { s, us, sr, or, ur }
}

/// Runs the requested backends and cross-checks them.
pub fn analyze(inst: &Instance, opts: &AnalyzeOptions) -> ReportFile {
    let mut report = ReportFile::new(Command::Analyze, &opts.tol);
    report.backend = Some(opts.backend);
    report.instance = Some(InstanceSummary::of(inst));
    let oracle = opts.backend.oracle().then(|| OracleEvidence {
        verdict: oracle::oracle(inst, &opts.tol),
        fixed_rhs: inst
            .rhs()
            .and_then(|e| oracle::fixed_rhs(inst, e, &opts.tol).ok()),
    });
    let mut evidence = Evidence {
        star: None,
        gsylv: None,
        oracle: None,
    };
    let mut disagreements = Vec::new();
    let (decisions, spectral_borderline) = match inst {
        Instance::Star(i) => {
            star_decisions(i, opts, oracle.as_ref(), &mut evidence, &mut disagreements)
        }
        Instance::GSylv(i) => {
            gsylv_decisions(i, opts, oracle.as_ref(), &mut evidence, &mut disagreements)
        }
    };
    for (name, d) in decisions.iter() {
        if let (Some(s), Some(o)) = (d.spectral, d.oracle) {
            push_if_disagree(&mut disagreements, name, s, o, "spectral", "oracle");
        }
    }
    let oracle_borderline = oracle.as_ref().is_some_and(|o| o.verdict.borderline);
    report.confidence = Some(if spectral_borderline || oracle_borderline {
        Confidence::Borderline
    } else {
        Confidence::Confident
    });
    evidence.oracle = oracle;
    report.decisions = Some(decisions);
    report.disagreements = disagreements;
    report.evidence = Some(evidence);
    report
}

/// `analyze` plus the least-squares solution from the oracle.
pub fn solve(inst: &Instance, opts: &AnalyzeOptions) -> Result<ReportFile> {
    let sol = oracle::solve(inst, &opts.tol)?;
    let mut report = analyze(inst, opts);
    report.command = Command::Solve;
    report.solution = Some(SolutionReport {
        x: (&sol.x).into(),
        residual_fro: sol.residual_fro,
        unique: sol.unique,
    });
    Ok(report)
}

fn star_only(inst: &Instance, choice: PencilChoice) -> Result<&StarEquationInstance> {
    match inst {
        Instance::Star(i) => Ok(i),
        Instance::GSylv(_) => Err(SylvError::Precondition(format!(
            "pencil {choice:?} belongs to star_sylvester equations"
        ))),
    }
}

fn square_spectrum(
    choice: PencilChoice,
    pencil: &Pencil,
    tol: &Tolerances,
) -> Result<SpectrumReport> {
    let regularity = is_regular(pencil, tol);
    let (rows, cols) = (pencil.rows(), pencil.cols());
    if regularity.regular {
        let poly = regularity
            .polynomial
            .as_ref()
            .expect("regular pencils are square");
        let spectrum = spectrum_with_counts(pencil, poly, tol)?;
        Ok(SpectrumReport {
            pencil: choice,
            rows,
            cols,
            regular: true,
            regularity: Some(regularity),
            spectrum,
            core: None,
            structure: None,
        })
    } else {
        let structure = kronecker_structure(pencil, tol);
        Ok(SpectrumReport {
            pencil: choice,
            rows,
            cols,
            regular: false,
            regularity: Some(regularity),
            spectrum: structure.eigenvalues(),
            core: None,
            structure: Some(structure),
        })
    }
}

fn with_core(
    mut rep: SpectrumReport,
    kind: SpectrumKind,
    m: usize,
    n: usize,
) -> Result<SpectrumReport> {
    if !rep.regular || m == n {
        return Ok(rep);
    }
    let (core, removed_value) = match kind {
        SpectrumKind::Tilde => (
            core_spectrum_tilde(&rep.spectrum, m, n)?,
            ExtendedComplex::ZERO,
        ),
        _ => (
            core_spectrum_hat(&rep.spectrum, m, n)?,
            ExtendedComplex::Infinity,
        ),
    };
    rep.core = Some(CoreSpectrum {
        kind,
        removed_value,
        removed_count: rep.spectrum.total() - core.total(),
        spectrum: core,
    });
    Ok(rep)
}

/// Spectrum of one of the pencils attached to an instance.
pub fn spectrum(inst: &Instance, choice: PencilChoice, tol: &Tolerances) -> Result<ReportFile> {
    let (p, _, m, n) = inst.sizes();
    let rep = match choice {
        PencilChoice::Q => {
            let i = star_only(inst, choice)?;
            let q = build_q(i.a(), i.b(), i.c(), i.d(), i.star())?;
            let rep = square_spectrum(choice, &q, tol)?;
            if p == m && p != n {
                with_core(rep, SpectrumKind::Hat, m, n)?
            } else if p == n && p != m {
                with_core(rep, SpectrumKind::Tilde, m, n)?
            } else {
                rep
            }
        }
        PencilChoice::P1 | PencilChoice::P2 | PencilChoice::P3 | PencilChoice::P4 => {
            let i = star_only(inst, choice)?;
            let which = match choice {
                PencilChoice::P1 => SmallPencil::P1,
                PencilChoice::P2 => SmallPencil::P2,
                PencilChoice::P3 => SmallPencil::P3,
                _ => SmallPencil::P4,
            };
            let pencil = small_pencil(i, which, tol)?;
            with_core(
                square_spectrum(choice, &pencil, tol)?,
                SpectrumKind::Hat,
                m,
                n,
            )?
        }
        PencilChoice::AC | PencilChoice::DB => {
            let i = match inst {
                Instance::GSylv(i) => i,
                Instance::Star(_) => {
                    return Err(SylvError::Precondition(format!(
                        "pencil {choice:?} belongs to gen_sylvester equations"
                    )))
                }
            };
            let pencil = if choice == PencilChoice::AC {
                ac_pencil(i)
            } else {
                db_pencil(i)
            };
            let structure = kronecker_structure(&pencil, tol);
            let regularity = pencil.is_square().then(|| is_regular(&pencil, tol));
            SpectrumReport {
                pencil: choice,
                rows: pencil.rows(),
                cols: pencil.cols(),
                regular: structure.is_regular(),
                regularity,
                spectrum: structure.eigenvalues(),
                core: None,
                structure: Some(structure),
            }
        }
    };
    let mut report = ReportFile::new(Command::Spectrum, tol);
    report.instance = Some(InstanceSummary::of(inst));
    report.spectrum = Some(rep);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::from_real_rows;

    const EQ2: &str = r#"{
  "equation": "star_sylvester",
  "star": "T",
  "A": {"rows": 2, "cols": 2, "entries": [[0,0],[0,0],[0,0],[1,0]]},
  "B": {"rows": 1, "cols": 1, "entries": [[1,0]]},
  "C": {"rows": 2, "cols": 1, "entries": [[1,0],[0,0]]},
  "D": {"rows": 2, "cols": 1, "entries": [[1,0],[0,0]]}
}"#;

    #[test]
    fn suite_reports_round_trip() {
        let opts = AnalyzeOptions::default();
        for case in crate::suite::suite_cases(11, 3, 120) {
            let rep = analyze(&case.instance, &opts);
            let back = ReportFile::from_json(&rep.to_json()).unwrap();
            assert_eq!(back.to_json(), rep.to_json(), "{}", case.category);
        }
    }

    #[test]
    fn compact_pairs_survive_strings_with_brackets() {
        let v = serde_json::json!({"note": "E = [1; 0] \"[x]\" ⋆", "m": [[1.0, -2.5], [0.0, 3.0]], "s": ["inf", [1.0, 2.0]]});
        let text = to_pretty_json(&v);
        assert!(text.contains("[1.0, -2.5]"), "{text}");
        assert!(text.contains("\"inf\","), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn parses_and_round_trips() {
        let (file, inst) = InstanceFile::parse(EQ2).unwrap();
        assert_eq!(inst.sizes(), (2, 1, 2, 1));
        let again = InstanceFile::parse(&file.to_json()).unwrap();
        assert_eq!(again.1, inst);
    }

    #[test]
    fn shape_errors_point_at_the_matrix() {
        let bad = EQ2.replace(
            r#""D": {"rows": 2, "cols": 1"#,
            r#""D": {"rows": 1, "cols": 2"#,
        );
        match InstanceFile::parse(&bad) {
            Err(SylvError::Input { line, message, .. }) => {
                assert_eq!(line, 7);
                assert!(message.contains("D must be 2x1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_the_parser_position() {
        let bad = EQ2.replace("\"B\": {", "\"B\" {");
        match InstanceFile::parse(&bad) {
            Err(SylvError::Input { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn star_presence_must_match_the_equation() {
        let no_star = EQ2.replace("  \"star\": \"T\",\n", "");
        assert!(matches!(
            InstanceFile::parse(&no_star),
            Err(SylvError::Input { line: 2, .. })
        ));
        let gen = EQ2.replace("star_sylvester", "gen_sylvester");
        assert!(matches!(
            InstanceFile::parse(&gen),
            Err(SylvError::Input { line: 3, .. })
        ));
    }

    #[test]
    fn analyze_reports_both_backends() {
        let (_, inst) = InstanceFile::parse(EQ2).unwrap();
        let r = analyze(&inst, &AnalyzeOptions::default());
        let d = r.decisions.as_ref().unwrap();
        assert_eq!((d.ur.spectral, d.ur.oracle), (Some(true), Some(true)));
        assert!(r.agreed());
        let back = ReportFile::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn faults_are_caught() {
        let (_, inst) = InstanceFile::parse(EQ2).unwrap();
        let inst = match inst {
            Instance::Star(i) => Instance::GSylv(
                GSylvInstance::new(i.a().clone(), i.b().clone(), i.a().clone(), i.b().clone())
                    .unwrap(),
            ),
            g => g,
        };
        let opts = AnalyzeOptions {
            deciders: Deciders::with_fault(Some(Fault::GSylvSrNegated)),
            ..Default::default()
        };
        assert!(!analyze(&inst, &opts).agreed());
    }

    #[test]
    fn scalar_q_spectrum() {
        let one = from_real_rows(1, 1, &[1.0]);
        let i = StarEquationInstance::new(
            one.clone(),
            one.clone(),
            one.clone(),
            one,
            StarKind::Transpose,
        )
        .unwrap();
        let r = spectrum(&Instance::Star(i), PencilChoice::Q, &Tolerances::default()).unwrap();
        let s = r.spectrum.unwrap().spectrum;
        assert_eq!(s.total(), 2);
        assert_eq!(s.multiplicity_at(ExtendedComplex::ONE), 1);
        assert_eq!(s.multiplicity_at(ExtendedComplex::MINUS_ONE), 1);
    }

    #[test]
    fn small_pencil_needs_its_coefficient() {
        let (zero, one) = (from_real_rows(1, 1, &[0.0]), from_real_rows(1, 1, &[1.0]));
        let i = StarEquationInstance::new(zero, one.clone(), one.clone(), one, StarKind::Transpose)
            .unwrap();
        match spectrum(&Instance::Star(i), PencilChoice::P1, &Tolerances::default()) {
            Err(SylvError::SingularMatrix(msg)) => assert!(msg.starts_with('A')),
            other => panic!("{other:?}"),
        }
    }
}
