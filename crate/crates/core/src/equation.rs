//! Validated coefficient sets for the two equation families.

use serde::{Deserialize, Serialize};

use crate::dense::{ensure_finite, matrix_serde, ComplexMatrix};
use crate::error::{Result, SylvError};
use crate::pencil::StarKind;

fn shape_error(what: &str, expected: (usize, usize), m: &ComplexMatrix) -> SylvError {
    SylvError::DimensionMismatch(format!(
        "{what} must be {}x{}, got {}x{}",
        expected.0,
        expected.1,
        m.nrows(),
        m.ncols()
    ))
}

fn check_nonempty(name: &str, m: &ComplexMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(SylvError::DimensionMismatch(format!(
            "{name} must have at least one row and column"
        )));
    }
    ensure_finite(m, name)
}

/// `AXB + CX⋆D = E` with `A: p×m`, `B: n×q`, `C: p×n`, `D: m×q`,
/// unknown `X: m×n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarEquationInstance {
    #[serde(with = "matrix_serde")]
    a: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    b: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    c: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    d: ComplexMatrix,
    star: StarKind,
    #[serde(with = "matrix_serde::option", default)]
    e: Option<ComplexMatrix>,
}

impl StarEquationInstance {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        star: StarKind,
    ) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            check_nonempty(name, m)?;
        }
        let (p, m) = a.shape();
        let (n, q) = b.shape();
        if c.shape() != (p, n) {
            return Err(shape_error("C", (p, n), &c));
        }
        if d.shape() != (m, q) {
            return Err(shape_error("D", (m, q), &d));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            star,
            e: None,
        })
    }

    pub fn with_rhs(mut self, e: ComplexMatrix) -> Result<Self> {
        ensure_finite(&e, "E")?;
        let (p, q) = (self.p(), self.q());
        if e.shape() != (p, q) {
            return Err(shape_error("E", (p, q), &e));
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }
    pub fn star(&self) -> StarKind {
        self.star
    }
    pub fn rhs(&self) -> Option<&ComplexMatrix> {
        self.e.as_ref()
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.a.ncols()
    }
    pub fn n(&self) -> usize {
        self.b.nrows()
    }
    pub fn q(&self) -> usize {
        self.b.ncols()
    }

    /// `(p, q, m, n)`.
    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.p(), self.q(), self.m(), self.n())
    }

    /// `AXB + CX⋆D`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.m(), self.n()) {
            return Err(shape_error("X", (self.m(), self.n()), x));
        }
        Ok(&self.a * x * &self.b + &self.c * self.star.apply(x) * &self.d)
    }

    /// `B⋆ Y A⋆ + D⋆ Y⋆ C⋆ = E⋆` in `Y = X⋆`: same solvability, sizes
    /// `(p, q, m, n) → (q, p, n, m)`.
    pub fn swapped(&self) -> Self {
        let s = self.star;
        Self {
            a: s.apply(&self.b),
            b: s.apply(&self.a),
            c: s.apply(&self.d),
            d: s.apply(&self.c),
            star: s,
            e: self.e.as_ref().map(|e| s.apply(e)),
        }
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: num_complex::Complex64) -> Self {
        Self {
            a: &self.a * factor,
            b: &self.b * factor,
            c: &self.c * factor,
            d: &self.d * factor,
            star: self.star,
            e: self.e.clone(),
        }
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.a.norm() * self.b.norm() + self.c.norm() * self.d.norm()
    }
}

/// `AXB − CXD = E` with `A, C: p×m`, `B, D: n×q`, unknown `X: m×n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSylvInstance {
    #[serde(with = "matrix_serde")]
    a: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    b: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    c: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    d: ComplexMatrix,
    #[serde(with = "matrix_serde::option", default)]
    e: Option<ComplexMatrix>,
}

impl GSylvInstance {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            check_nonempty(name, m)?;
        }
        if c.shape() != a.shape() {
            return Err(shape_error("C", a.shape(), &c));
        }
        if d.shape() != b.shape() {
            return Err(shape_error("D", b.shape(), &d));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            e: None,
        })
    }

    pub fn with_rhs(mut self, e: ComplexMatrix) -> Result<Self> {
        ensure_finite(&e, "E")?;
        let (p, q) = (self.p(), self.q());
        if e.shape() != (p, q) {
            return Err(shape_error("E", (p, q), &e));
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }
    pub fn rhs(&self) -> Option<&ComplexMatrix> {
        self.e.as_ref()
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.a.ncols()
    }
    pub fn n(&self) -> usize {
        self.b.nrows()
    }
    pub fn q(&self) -> usize {
        self.b.ncols()
    }

    /// `(p, q, m, n)`.
    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.p(), self.q(), self.m(), self.n())
    }

    /// `AXB − CXD`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.m(), self.n()) {
            return Err(shape_error("X", (self.m(), self.n()), x));
        }
        Ok(&self.a * x * &self.b - &self.c * x * &self.d)
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.a.norm() * self.b.norm() + self.c.norm() * self.d.norm()
    }
}

/// Either equation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instance {
    Star(StarEquationInstance),
    GSylv(GSylvInstance),
}

impl Instance {
    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        match self {
            Instance::Star(i) => i.sizes(),
            Instance::GSylv(i) => i.sizes(),
        }
    }

    pub fn rhs(&self) -> Option<&ComplexMatrix> {
        match self {
            Instance::Star(i) => i.rhs(),
            Instance::GSylv(i) => i.rhs(),
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Instance::Star(i) => i.apply(x),
            Instance::GSylv(i) => i.apply(x),
        }
    }

    pub fn coefficient_scale(&self) -> f64 {
        match self {
            Instance::Star(i) => i.coefficient_scale(),
            Instance::GSylv(i) => i.coefficient_scale(),
        }
    }
}

impl From<StarEquationInstance> for Instance {
    fn from(i: StarEquationInstance) -> Self {
        Instance::Star(i)
    }
}

impl From<GSylvInstance> for Instance {
    fn from(i: GSylvInstance) -> Self {
        Instance::GSylv(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{from_real_rows, identity, zeros};
    use crate::random::{complex_gaussian, seeded_rng};

    #[test]
    fn rejects_mismatched_shapes() {
        let err = StarEquationInstance::new(
            identity(2),
            identity(1),
            zeros(2, 2),
            zeros(2, 1),
            StarKind::Transpose,
        )
        .unwrap_err();
        assert!(matches!(err, SylvError::DimensionMismatch(_)));
        assert!(GSylvInstance::new(identity(2), identity(1), zeros(2, 3), zeros(1, 1)).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = identity(1);
        a[(0, 0)].re = f64::NAN;
        let err = StarEquationInstance::new(
            a,
            identity(1),
            identity(1),
            identity(1),
            StarKind::Transpose,
        )
        .unwrap_err();
        assert!(matches!(err, SylvError::NonFinite { .. }));
    }

    #[test]
    fn swap_maps_solutions_to_their_star() {
        let mut rng = seeded_rng(12);
        for star in [StarKind::Transpose, StarKind::ConjugateTranspose] {
            let (p, q, m, n) = (2, 3, 3, 2);
            let inst = StarEquationInstance::new(
                complex_gaussian(p, m, &mut rng),
                complex_gaussian(n, q, &mut rng),
                complex_gaussian(p, n, &mut rng),
                complex_gaussian(m, q, &mut rng),
                star,
            )
            .unwrap();
            let x = complex_gaussian(m, n, &mut rng);
            let lhs = inst.apply(&x).unwrap();
            let sw = inst.swapped();
            assert_eq!(sw.sizes(), (q, p, n, m));
            let lhs_sw = sw.apply(&star.apply(&x)).unwrap();
            assert!((star.apply(&lhs) - lhs_sw).norm() < 1e-12);
        }
    }

    #[test]
    fn gsylv_scalar_apply() {
        let s = |x| from_real_rows(1, 1, &[x]);
        let inst = GSylvInstance::new(s(2.0), s(3.0), s(5.0), s(7.0)).unwrap();
        assert_eq!(inst.apply(&s(1.0)).unwrap(), s(6.0 - 35.0));
    }
}
