//! Seeded instance families for the ⋆-equation grid.
//!
//! Besides plain random data, several families plant a known answer: a
//! kernel element, a spectrum with or without reciprocal pairs, or the block
//! structure the `p = m > n` reduction produces. Each planted instance is
//! then hidden behind integer unimodular changes of variables, which keep
//! the set of solutions in bijection.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{identity, zeros, I};
use crate::equation::{GSylvInstance, StarEquationInstance};
use crate::kcf::{random_prescription, Disguise, KcfPrescription, KroneckerBlock};
use crate::pencil::{ExtendedComplex, StarKind};
use crate::random::{complex_gaussian, dyadic, low_rank_dyadic, unimodular};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StarFamily {
    Gaussian,
    Dyadic,
    /// One coefficient is rank deficient.
    SingularCoefficient,
    /// `X = e₁e₁ᵀ` solves the homogeneous equation.
    PlantedKernel,
    /// `A = C = D = I` up to disguise, `B⋆` similar to a chosen diagonal.
    PlantedSpectrum,
    /// The block form left by the reduction of a `p ∈ {m, n}` equation.
    EmbeddedRectangular,
}

impl StarFamily {
    pub const ALL: [StarFamily; 6] = [
        StarFamily::Gaussian,
        StarFamily::Dyadic,
        StarFamily::SingularCoefficient,
        StarFamily::PlantedKernel,
        StarFamily::PlantedSpectrum,
        StarFamily::EmbeddedRectangular,
    ];
}

/// `(LAV, WBR, LCW⋆, V⋆DR)`: `X` solves the original equation with right
/// side `E` iff `V⁻¹XW⁻¹` solves the new one with right side `LER`.
pub fn disguise<R: Rng + ?Sized>(inst: &StarEquationInstance, rng: &mut R) -> StarEquationInstance {
    let (p, q, m, n) = inst.sizes();
    let s = inst.star();
    let l = unimodular(p, rng);
    let r = unimodular(q, rng);
    let v = unimodular(m, rng);
    let w = unimodular(n, rng);
    StarEquationInstance::new(
        &l * inst.a() * &v,
        &w * inst.b() * &r,
        &l * inst.c() * s.apply(&w),
        s.apply(&v) * inst.d() * &r,
        s,
    )
    .expect("shapes preserved")
}

/// An instance of the given family with sizes `(p, q, m, n)`. Families whose
/// structure needs particular sizes fall back to [`StarFamily::Dyadic`].
pub fn star_instance<R: Rng + ?Sized>(
    family: StarFamily,
    sizes: (usize, usize, usize, usize),
    star: StarKind,
    rng: &mut R,
) -> StarEquationInstance {
    let (p, q, m, n) = sizes;
    let real = rng.random_bool(0.5);
    let plain = |rng: &mut R, dy: bool| {
        let g = |r: usize, c: usize, rng: &mut R| {
            if dy {
                dyadic(r, c, real, rng)
            } else {
                complex_gaussian(r, c, rng)
            }
        };
        let a = g(p, m, rng);
        let b = g(n, q, rng);
        let c = g(p, n, rng);
        let d = g(m, q, rng);
        StarEquationInstance::new(a, b, c, d, star).expect("conformable")
    };
    match family {
        StarFamily::Gaussian => plain(rng, false),
        StarFamily::Dyadic => plain(rng, true),
        StarFamily::SingularCoefficient => {
            let base = plain(rng, true);
            let which = rng.random_range(0..4);
            let mut mats = [
                base.a().clone(),
                base.b().clone(),
                base.c().clone(),
                base.d().clone(),
            ];
            let (r, c) = mats[which].shape();
            let rank = rng.random_range(0..r.min(c));
            mats[which] = low_rank_dyadic(r, c, rank, real, rng);
            let [a, b, c, d] = mats;
            StarEquationInstance::new(a, b, c, d, star).expect("conformable")
        }
        StarFamily::PlantedKernel => {
            let base = plain(rng, true);
            let t = Complex64::new([0.5, 1.0, 2.0, -1.0][rng.random_range(0..4)], 0.0);
            let (a, b) = (base.a().clone(), base.b().clone());
            let mut c = base.c().clone();
            let mut d = base.d().clone();
            for i in 0..p {
                c[(i, 0)] = a[(i, 0)] * t;
            }
            for j in 0..q {
                d[(0, j)] = -b[(0, j)] / t;
            }
            let inst = StarEquationInstance::new(a, b, c, d, star).expect("conformable");
            disguise(&inst, rng)
        }
        StarFamily::PlantedSpectrum if p == m && m == n && n == q => {
            let inst = planted_spectrum(n, star, rng);
            disguise(&inst, rng)
        }
        StarFamily::EmbeddedRectangular if p == m && m != n && n == q => {
            let inst = if m > n {
                embedded(m, n, star, rng)
            } else {
                embedded(n, m, star, rng).swapped()
            };
            disguise(&inst, rng)
        }
        StarFamily::EmbeddedRectangular if p == n && m != n && m == q => {
            // `AXB + CX⋆D` in `Y = X⋆` reads `CYD + AY⋆B`.
            let e = if n > m {
                embedded(n, m, star, rng)
            } else {
                embedded(m, n, star, rng).swapped()
            };
            let inst = StarEquationInstance::new(
                e.c().clone(),
                e.d().clone(),
                e.a().clone(),
                e.b().clone(),
                star,
            )
            .expect("conformable");
            disguise(&inst, rng)
        }
        _ => plain(rng, true),
    }
}

/// `XB + X⋆ = E` up to disguise, with `B⋆` similar to a diagonal drawn from
/// a palette that contains reciprocal pairs, `±1` and `i`.
fn planted_spectrum<R: Rng + ?Sized>(
    n: usize,
    star: StarKind,
    rng: &mut R,
) -> StarEquationInstance {
    let palette = [
        Complex64::new(2.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        I,
        Complex64::new(0.25, 0.0),
        Complex64::new(4.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let mut pick: Vec<Complex64> = palette.to_vec();
    pick.shuffle(rng);
    let mut diag = zeros(n, n);
    for k in 0..n {
        diag[(k, k)] = pick[k];
    }
    let s = unimodular(n, rng);
    let s_inv = s.clone().try_inverse().expect("unimodular");
    let b_star = &s * diag * s_inv;
    let b = star.apply(&b_star);
    StarEquationInstance::new(identity(n), b, identity(n), identity(n), star).expect("square")
}

/// `A = [[Â₁₁, 0], [Â₂₁, Â₂₂]]`, `B = I`, `C = [Ĉ₁; Ĉ₂]`, `D = [D₁; 0]`
/// with `A: m×m`, `m > n`. `Â₂₂` is sometimes singular and the reduced
/// `n × n` equation is sometimes planted to be non-unique.
fn embedded<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    star: StarKind,
    rng: &mut R,
) -> StarEquationInstance {
    let k = m - n;
    let real = rng.random_bool(0.5);
    let a22 = if rng.random_bool(0.25) {
        low_rank_dyadic(k, k, rng.random_range(0..k), real, rng)
    } else {
        identity(k) + dyadic(k, k, real, rng) * Complex64::new(0.25, 0.0)
    };
    let (a11, c1, d1) = if rng.random_bool(0.3) {
        // −Y + Y⋆ = 0 has every Hermitian or symmetric Y as a solution
        (-identity(n), identity(n), identity(n))
    } else {
        (
            dyadic(n, n, real, rng),
            dyadic(n, n, real, rng),
            dyadic(n, n, real, rng),
        )
    };
    let mut a = zeros(m, m);
    a.view_mut((0, 0), (n, n)).copy_from(&a11);
    a.view_mut((n, 0), (k, n))
        .copy_from(&dyadic(k, n, real, rng));
    a.view_mut((n, n), (k, k)).copy_from(&a22);
    let mut c = zeros(m, n);
    c.view_mut((0, 0), (n, n)).copy_from(&c1);
    c.view_mut((n, 0), (k, n))
        .copy_from(&dyadic(k, n, real, rng));
    let mut d = zeros(m, n);
    d.view_mut((0, 0), (n, n)).copy_from(&d1);
    StarEquationInstance::new(a, identity(n), c, d, star).expect("conformable")
}

/// Every `(p, q, m, n)` with entries in `1..=max_dim`, lexicographic.
pub fn size_patterns(max_dim: usize) -> Vec<(usize, usize, usize, usize)> {
    let r = 1..=max_dim;
    let mut out = Vec::new();
    for p in r.clone() {
        for q in r.clone() {
            for m in r.clone() {
                for n in r.clone() {
                    out.push((p, q, m, n));
                }
            }
        }
    }
    out
}

/// The seeded ⋆-equation grid: one pass over every size pattern with both
/// stars, then further passes over the patterns with `mn = pq` until
/// `min_count` instances exist. Families cycle throughout.
pub fn star_grid<R: Rng + ?Sized>(
    max_dim: usize,
    min_count: usize,
    rng: &mut R,
) -> Vec<(StarFamily, StarEquationInstance)> {
    let patterns = size_patterns(max_dim);
    let square: Vec<_> = patterns
        .iter()
        .copied()
        .filter(|&(p, q, m, n)| m * n == p * q)
        .collect();
    let mut out = Vec::new();
    let mut k = 0usize;
    let mut push = |sizes, out: &mut Vec<_>, rng: &mut R| {
        for star in [StarKind::Transpose, StarKind::ConjugateTranspose] {
            let family = StarFamily::ALL[k % StarFamily::ALL.len()];
            k += 1;
            out.push((family, star_instance(family, sizes, star, rng)));
        }
    };
    for &sizes in &patterns {
        push(sizes, &mut out, rng);
    }
    'outer: loop {
        for &sizes in &square {
            if out.len() >= min_count {
                break 'outer;
            }
            push(sizes, &mut out, rng);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GSylvFamily {
    Gaussian,
    Dyadic,
    SingularCoefficient,
    /// Both pencils built from random prescribed canonical forms.
    Kcf,
    /// Sums of singular blocks only, often `L_s` against `L_sᵀ`.
    SingularBlocks,
    /// Regular pencils sharing one eigenvalue.
    SharedEigenvalue,
    /// One row of the block table.
    TableRow,
}

/// `AXB − CXD` with `A − λC` and `Dᵀ − λBᵀ` strictly equivalent to the
/// given forms. `None` when a coefficient would have no rows or columns.
pub fn gsylv_from_kcf<R: Rng + ?Sized>(
    ac: &KcfPrescription,
    db: &KcfPrescription,
    disguise: Disguise,
    rng: &mut R,
) -> Option<GSylvInstance> {
    let ((p, m), (q, n)) = (ac.shape(), db.shape());
    if p == 0 || m == 0 || q == 0 || n == 0 {
        return None;
    }
    let (a, c) = ac.build(disguise, rng);
    let (dt, bt) = db.build(disguise, rng);
    GSylvInstance::new(a, bt.transpose(), c, dt.transpose()).ok()
}

/// One row of the table of block pairs, with its expected answers to
/// "at least one solution" and "at most one solution".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub ac: KroneckerBlock,
    pub db: KroneckerBlock,
    pub at_least_one: bool,
    pub at_most_one: bool,
}

/// Every row of the block table at its smallest sizes: `ε = η = 1`,
/// `α = 1`, `β = 2`.
pub fn table_rows() -> [TableRow; 10] {
    let (ja, jb) = (
        KroneckerBlock::finite(1.0, 1),
        KroneckerBlock::finite(2.0, 1),
    );
    let (l, lt) = (KroneckerBlock::Right(1), KroneckerBlock::Left(1));
    let row = |ac, db, at_least_one, at_most_one| TableRow {
        ac,
        db,
        at_least_one,
        at_most_one,
    };
    [
        row(ja, ja, false, false),
        row(ja, jb, true, true),
        row(lt, l, true, true),
        row(l, lt, true, true),
        row(lt, lt, false, true),
        row(l, l, true, false),
        row(ja, l, true, false),
        row(ja, lt, false, true),
        row(lt, ja, false, true),
        row(l, ja, true, false),
    ]
}

pub fn table_row_instance(row: &TableRow) -> GSylvInstance {
    let ac = KcfPrescription::new(vec![row.ac]);
    let db = KcfPrescription::new(vec![row.db]);
    gsylv_from_kcf(&ac, &db, Disguise::None, &mut crate::random::seeded_rng(0))
        .expect("nonempty blocks")
}

fn fits(pr: &KcfPrescription, max_dim: usize) -> bool {
    let (r, c) = pr.shape();
    (1..=max_dim).contains(&r) && (1..=max_dim).contains(&c)
}

fn prescription_within<R: Rng + ?Sized>(
    max_dim: usize,
    rng: &mut R,
    draw: impl Fn(&mut R) -> KcfPrescription,
) -> KcfPrescription {
    loop {
        let pr = draw(rng);
        if fits(&pr, max_dim) {
            return pr;
        }
    }
}

fn singular_blocks<R: Rng + ?Sized>(rng: &mut R) -> KcfPrescription {
    let count = rng.random_range(1..=2);
    let blocks = (0..count)
        .map(|_| {
            let k = rng.random_range(0..=2);
            if rng.random_bool(0.5) {
                KroneckerBlock::Right(k)
            } else {
                KroneckerBlock::Left(k)
            }
        })
        .collect();
    KcfPrescription::new(blocks)
}

/// `k` copies of `L_s`, or of `L_sᵀ` when `left`.
fn repeated(s: usize, k: usize, left: bool) -> KcfPrescription {
    let block = if left {
        KroneckerBlock::Left(s)
    } else {
        KroneckerBlock::Right(s)
    };
    KcfPrescription::new(vec![block; k])
}

pub fn gsylv_instance<R: Rng + ?Sized>(
    family: GSylvFamily,
    sizes: (usize, usize, usize, usize),
    max_dim: usize,
    rng: &mut R,
) -> GSylvInstance {
    let (p, q, m, n) = sizes;
    let real = rng.random_bool(0.5);
    let disguise = if rng.random_bool(0.5) {
        Disguise::Unimodular
    } else {
        Disguise::WellConditioned
    };
    let plain = |rng: &mut R, dy: bool| {
        let mut g = |r: usize, c: usize| {
            if dy {
                dyadic(r, c, real, rng)
            } else {
                complex_gaussian(r, c, rng)
            }
        };
        let (a, b, c, d) = (g(p, m), g(n, q), g(p, m), g(n, q));
        GSylvInstance::new(a, b, c, d).expect("conformable")
    };
    let built = match family {
        GSylvFamily::Gaussian => return plain(rng, false),
        GSylvFamily::Dyadic => return plain(rng, true),
        GSylvFamily::SingularCoefficient => {
            let base = plain(rng, true);
            let mut mats = [
                base.a().clone(),
                base.b().clone(),
                base.c().clone(),
                base.d().clone(),
            ];
            let which = rng.random_range(0..4);
            let (r, c) = mats[which].shape();
            let rank = rng.random_range(0..r.min(c));
            mats[which] = low_rank_dyadic(r, c, rank, real, rng);
            let [a, b, c, d] = mats;
            return GSylvInstance::new(a, b, c, d).expect("conformable");
        }
        GSylvFamily::Kcf => {
            let ac = prescription_within(max_dim, rng, |r| random_prescription(3, 2, 2, r));
            let db = prescription_within(max_dim, rng, |r| random_prescription(3, 2, 2, r));
            gsylv_from_kcf(&ac, &db, disguise, rng)
        }
        GSylvFamily::SingularBlocks => {
            let (ac, db) = if rng.random_bool(0.5) {
                // L_s against L_sᵀ, sized to fit
                let s = rng.random_range(1..=max_dim.saturating_sub(1).max(1));
                let kmax = (max_dim / (s + 1)).max(1);
                let left = rng.random_bool(0.5);
                let ac = repeated(s, rng.random_range(1..=kmax), left);
                let t = if rng.random_bool(0.8) {
                    s
                } else if s > 1 {
                    s - 1
                } else {
                    s + 1
                };
                let db = repeated(t, rng.random_range(1..=kmax), !left);
                (ac, db)
            } else {
                (
                    prescription_within(max_dim, rng, singular_blocks),
                    prescription_within(max_dim, rng, singular_blocks),
                )
            };
            gsylv_from_kcf(&ac, &db, disguise, rng)
        }
        GSylvFamily::SharedEigenvalue => {
            let palette = [1.0, 2.0, -0.5, 0.0];
            let shared = palette[rng.random_range(0..palette.len())];
            let side = |rng: &mut R| {
                let size = rng.random_range(1..=max_dim.max(1));
                let mut blocks = vec![if rng.random_bool(0.2) {
                    KroneckerBlock::infinite(1)
                } else {
                    KroneckerBlock::finite(shared, 1)
                }];
                for _ in 1..size {
                    blocks.push(KroneckerBlock::finite(
                        palette[rng.random_range(0..palette.len())],
                        1,
                    ));
                }
                KcfPrescription::new(blocks)
            };
            let ac = side(rng);
            let mut db = side(rng);
            if matches!(
                ac.blocks[0],
                KroneckerBlock::Jordan {
                    eigenvalue: ExtendedComplex::Infinity,
                    ..
                }
            ) {
                db.blocks[0] = KroneckerBlock::infinite(1);
            } else {
                db.blocks[0] = KroneckerBlock::finite(shared, 1);
            }
            gsylv_from_kcf(&ac, &db, disguise, rng)
        }
        GSylvFamily::TableRow => {
            let rows = table_rows();
            let row = rows[rng.random_range(0..rows.len())];
            let ac = KcfPrescription::new(vec![row.ac]);
            let db = KcfPrescription::new(vec![row.db]);
            gsylv_from_kcf(&ac, &db, disguise, rng)
        }
    };
    built.unwrap_or_else(|| plain(rng, true))
}

/// The seeded generalized Sylvester grid: every size pattern once with the
/// plain families, then structured instances until `min_count` exist.
pub fn gsylv_grid<R: Rng + ?Sized>(
    max_dim: usize,
    min_count: usize,
    rng: &mut R,
) -> Vec<(GSylvFamily, GSylvInstance)> {
    const PLAIN: [GSylvFamily; 3] = [
        GSylvFamily::Gaussian,
        GSylvFamily::Dyadic,
        GSylvFamily::SingularCoefficient,
    ];
    const STRUCTURED: [GSylvFamily; 4] = [
        GSylvFamily::Kcf,
        GSylvFamily::SingularBlocks,
        GSylvFamily::SharedEigenvalue,
        GSylvFamily::TableRow,
    ];
    let mut out = Vec::new();
    for (k, sizes) in size_patterns(max_dim).into_iter().enumerate() {
        let family = PLAIN[k % PLAIN.len()];
        out.push((family, gsylv_instance(family, sizes, max_dim, rng)));
    }
    for row in table_rows() {
        out.push((GSylvFamily::TableRow, table_row_instance(&row)));
    }
    let mut k = 0;
    while out.len() < min_count {
        let family = STRUCTURED[k % STRUCTURED.len()];
        k += 1;
        out.push((family, gsylv_instance(family, (1, 1, 1, 1), max_dim, rng)));
    }
    out
}
