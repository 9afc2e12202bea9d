//! Pencils `A − λC` assembled from a prescribed Kronecker canonical form,
//! hidden behind seeded equivalence transformations. Used as a construction
//! oracle: the structure is known exactly, so anything recovered from the
//! transformed pencil can be compared against it.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{identity, zeros, ComplexMatrix, ONE};
use crate::pencil::{ExtendedComplex, SpectrumMultiset};
use crate::random::{unimodular, well_conditioned};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KroneckerBlock {
    /// `J_k(α)`, `α` possibly infinite.
    Jordan {
        eigenvalue: ExtendedComplex,
        size: usize,
    },
    /// `L_ε`, of size `ε × (ε+1)`.
    Right(usize),
    /// `L_ηᵀ`, of size `(η+1) × η`.
    Left(usize),
}

impl KroneckerBlock {
    pub fn finite(alpha: f64, size: usize) -> Self {
        KroneckerBlock::Jordan {
            eigenvalue: ExtendedComplex::real(alpha),
            size,
        }
    }

    pub fn infinite(size: usize) -> Self {
        KroneckerBlock::Jordan {
            eigenvalue: ExtendedComplex::Infinity,
            size,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match *self {
            KroneckerBlock::Jordan { size, .. } => (size, size),
            KroneckerBlock::Right(e) => (e, e + 1),
            KroneckerBlock::Left(h) => (h + 1, h),
        }
    }

    /// `(A, C)` with the block equal to `A − λC`.
    pub fn matrices(&self) -> (ComplexMatrix, ComplexMatrix) {
        let (r, c) = self.shape();
        let mut a = zeros(r, c);
        let mut cm = zeros(r, c);
        match *self {
            KroneckerBlock::Jordan {
                eigenvalue: ExtendedComplex::Finite(alpha),
                size,
            } => {
                for i in 0..size {
                    a[(i, i)] = alpha;
                    cm[(i, i)] = ONE;
                    if i + 1 < size {
                        a[(i, i + 1)] = ONE;
                    }
                }
            }
            KroneckerBlock::Jordan {
                eigenvalue: ExtendedComplex::Infinity,
                size,
            } => {
                for i in 0..size {
                    a[(i, i)] = ONE;
                    if i + 1 < size {
                        cm[(i, i + 1)] = ONE;
                    }
                }
            }
            KroneckerBlock::Right(e) => {
                for i in 0..e {
                    a[(i, i)] = ONE;
                    cm[(i, i + 1)] = ONE;
                }
            }
            KroneckerBlock::Left(h) => {
                for i in 0..h {
                    a[(i, i)] = ONE;
                    cm[(i + 1, i)] = ONE;
                }
            }
        }
        (a, cm)
    }
}

/// How the canonical form is disguised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Disguise {
    None,
    /// Integer transformations with determinant ±1; exact in floating point
    /// for small dyadic data.
    Unimodular,
    /// Unitary-times-diagonal transformations with condition number ≤ 2.
    WellConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KcfPrescription {
    pub blocks: Vec<KroneckerBlock>,
}

impl KcfPrescription {
    pub fn new(blocks: Vec<KroneckerBlock>) -> Self {
        Self { blocks }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.blocks.iter().fold((0, 0), |(r, c), b| {
            let (br, bc) = b.shape();
            (r + br, c + bc)
        })
    }

    /// Block-diagonal `(A, C)`.
    pub fn canonical(&self) -> (ComplexMatrix, ComplexMatrix) {
        let (rows, cols) = self.shape();
        let mut a = zeros(rows, cols);
        let mut c = zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for block in &self.blocks {
            let (br, bc) = block.shape();
            let (ba, bcm) = block.matrices();
            a.view_mut((r0, c0), (br, bc)).copy_from(&ba);
            c.view_mut((r0, c0), (br, bc)).copy_from(&bcm);
            r0 += br;
            c0 += bc;
        }
        (a, c)
    }

    /// `(P·A·Q, P·C·Q)` for seeded invertible `P`, `Q`.
    pub fn build<R: Rng + ?Sized>(
        &self,
        disguise: Disguise,
        rng: &mut R,
    ) -> (ComplexMatrix, ComplexMatrix) {
        let (a, c) = self.canonical();
        let (rows, cols) = self.shape();
        let (p, q) = match disguise {
            Disguise::None => (identity(rows), identity(cols)),
            Disguise::Unimodular => (unimodular(rows, rng), unimodular(cols, rng)),
            Disguise::WellConditioned => (well_conditioned(rows, rng), well_conditioned(cols, rng)),
        };
        (&p * a * &q, &p * c * &q)
    }

    pub fn right_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                KroneckerBlock::Right(e) => Some(*e),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn left_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                KroneckerBlock::Left(h) => Some(*h),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn eigenvalues(&self, cluster_tol: f64) -> SpectrumMultiset {
        let values: Vec<ExtendedComplex> = self
            .blocks
            .iter()
            .flat_map(|b| match b {
                KroneckerBlock::Jordan { eigenvalue, size } => vec![*eigenvalue; *size],
                _ => Vec::new(),
            })
            .collect();
        SpectrumMultiset::from_values(&values, cluster_tol)
    }

    pub fn is_regular(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| matches!(b, KroneckerBlock::Jordan { .. }))
    }
}

/// Random prescription with index values ≤ `max_index` and Jordan blocks of
/// size ≤ `max_jordan`, eigenvalues drawn from a small dyadic palette.
pub fn random_prescription<R: Rng + ?Sized>(
    max_blocks: usize,
    max_index: usize,
    max_jordan: usize,
    rng: &mut R,
) -> KcfPrescription {
    const PALETTE: [Option<f64>; 5] = [Some(1.0), Some(2.0), Some(-0.5), Some(0.0), None];
    let count = rng.random_range(1..=max_blocks.max(1));
    let blocks = (0..count)
        .map(|_| match rng.random_range(0..3) {
            0 => KroneckerBlock::Right(rng.random_range(0..=max_index)),
            1 => KroneckerBlock::Left(rng.random_range(0..=max_index)),
            _ => {
                let size = rng.random_range(1..=max_jordan.max(1));
                match PALETTE[rng.random_range(0..PALETTE.len())] {
                    Some(x) => KroneckerBlock::Jordan {
                        eigenvalue: ExtendedComplex::Finite(Complex64::new(x, 0.0)),
                        size,
                    },
                    None => KroneckerBlock::infinite(size),
                }
            }
        })
        .collect();
    KcfPrescription::new(blocks)
}
