//! Matrix spaces over GF(p) with canonical bases, the fingerprint subspace
//! zero_{L,R}, semi-canonical bases, and sampled individualization matrices.

use crate::error::{Error, Result};
use crate::gf::{lex_compare, FpMatrix, Prime, RowSpace, RowVector, VectorCounter};
use crate::seed::Seed;
use std::cmp::Ordering;

/// Default cap on p^d enumeration inside semi-canonical basis search.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// An m x n linear space of matrices given by a canonical reduced basis.
///
/// The canonical basis is obtained from the RREF of the vectorized generator
/// stack, so two spaces are equal as sets iff their canonical data are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSpace {
    p: Prime,
    row_dim: usize,
    col_dim: usize,
    basis: Vec<FpMatrix>,
    canonical: RowSpace,
}

impl MatrixSpace {
    /// Linear span of the given generators.
    pub fn span_from_generators(p: Prime, row_dim: usize, col_dim: usize, mats: &[FpMatrix]) -> Result<MatrixSpace> {
        for m in mats {
            if m.p() != p || m.rows() != row_dim || m.cols() != col_dim {
                return Err(Error::ShapeMismatch(format!(
                    "generator is {}x{} mod {}, expected {}x{} mod {}",
                    m.rows(),
                    m.cols(),
                    m.p().get(),
                    row_dim,
                    col_dim,
                    p.get()
                )));
            }
        }
        let vecs: Vec<RowVector> = mats.iter().map(|m| m.vectorize()).collect();
        let canonical = if vecs.is_empty() {
            RowSpace::empty(p, row_dim * col_dim)
        } else {
            RowSpace::from_rows(p, &vecs)
        };
        let basis = canonical
            .basis()
            .iter()
            .map(|v| FpMatrix::from_vectorized(p, row_dim, col_dim, v))
            .collect();
        Ok(MatrixSpace { p, row_dim, col_dim, basis, canonical })
    }

    pub fn zero_space(p: Prime, row_dim: usize, col_dim: usize) -> MatrixSpace {
        MatrixSpace::span_from_generators(p, row_dim, col_dim, &[]).expect("trivial span")
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn row_dim(&self) -> usize {
        self.row_dim
    }

    pub fn col_dim(&self) -> usize {
        self.col_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical ordered basis.
    pub fn basis(&self) -> &[FpMatrix] {
        &self.basis
    }

    pub fn contains(&self, a: &FpMatrix) -> bool {
        a.rows() == self.row_dim
            && a.cols() == self.col_dim
            && self.canonical.contains(&a.vectorize())
    }

    /// Coefficients of `a` over the canonical basis, if a member.
    pub fn coordinates(&self, a: &FpMatrix) -> Option<RowVector> {
        self.canonical.coordinates(&a.vectorize())
    }

    /// The member with the given canonical-basis coefficients.
    pub fn element(&self, coeffs: &RowVector) -> FpMatrix {
        assert_eq!(coeffs.len(), self.dim());
        let mut acc = FpMatrix::zero(self.p, self.row_dim, self.col_dim);
        for (i, b) in self.basis.iter().enumerate() {
            let c = coeffs.get(i);
            if c != 0 {
                acc = acc.add_scaled(b, c);
            }
        }
        acc
    }

    /// True iff every basis matrix is skew-symmetric.
    pub fn is_skew(&self) -> bool {
        self.row_dim == self.col_dim && self.basis.iter().all(|b| b.is_skew())
    }

    /// Number of elements p^dim, or None on overflow.
    pub fn size(&self) -> Option<u128> {
        (self.p.get() as u128).checked_pow(self.dim() as u32)
    }

    /// Deterministic enumeration of all members as (coefficients, matrix).
    pub fn elements(&self) -> impl Iterator<Item = (RowVector, FpMatrix)> + '_ {
        VectorCounter::new(self.p, self.dim()).map(move |c| {
            let m = self.element(&c);
            (c, m)
        })
    }

    /// The space P * self * Q.
    pub fn transformed(&self, left: &FpMatrix, right: &FpMatrix) -> Result<MatrixSpace> {
        if left.cols() != self.row_dim || right.rows() != self.col_dim {
            return Err(Error::ShapeMismatch("space transform shapes do not conform".into()));
        }
        let mats: Vec<FpMatrix> = self.basis.iter().map(|b| left.mul(b).mul(right)).collect();
        MatrixSpace::span_from_generators(self.p, left.rows(), right.cols(), &mats)
    }

    /// Equality as sets of matrices.
    pub fn same_space(&self, other: &MatrixSpace) -> bool {
        self.p == other.p
            && self.row_dim == other.row_dim
            && self.col_dim == other.col_dim
            && self.canonical == other.canonical
    }

    /// Multiset of ranks over all members; an isometry/equivalence invariant.
    pub fn rank_profile(&self, cap: u64) -> Result<Vec<usize>> {
        match self.size() {
            Some(s) if s <= cap as u128 => {}
            _ => return Err(Error::BudgetExceeded(format!("p^{} elements", self.dim()))),
        }
        let mut ranks: Vec<usize> = self.elements().map(|(_, m)| m.rank()).collect();
        ranks.sort_unstable();
        Ok(ranks)
    }
}

/// Left and right individualization matrices: members A of a space are
/// distinguished by the fingerprint L * A * R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualizationPair {
    pub left: FpMatrix,
    pub right: FpMatrix,
}

/// The subspace {A in S : L * A * R = 0}.
pub fn zero_subspace(space: &MatrixSpace, left: &FpMatrix, right: &FpMatrix) -> Result<MatrixSpace> {
    if left.cols() != space.row_dim() || right.rows() != space.col_dim() {
        return Err(Error::ShapeMismatch(format!(
            "individualization shapes {}x{} / {}x{} do not fit a {}x{} space",
            left.rows(),
            left.cols(),
            right.rows(),
            right.cols(),
            space.row_dim(),
            space.col_dim()
        )));
    }
    let p = space.p();
    let d = space.dim();
    if d == 0 {
        return Ok(space.clone());
    }
    // Coefficients c with sum_i c_i vec(L B_i R) = 0.
    let rows: Vec<RowVector> = space
        .basis()
        .iter()
        .map(|b| left.mul(b).mul(right).vectorize())
        .collect();
    let stack = FpMatrix::from_rows(p, &rows);
    let null = stack.left_nullspace();
    let mats: Vec<FpMatrix> = (0..null.rows())
        .map(|i| space.element(&null.row(i)))
        .collect();
    MatrixSpace::span_from_generators(p, space.row_dim(), space.col_dim(), &mats)
}

/// Tie-breaking rule used when several members share the minimal fingerprint.
#[derive(Debug, Clone, Copy)]
pub enum TieBreak {
    /// Pick the candidate whose own vectorization is lexically minimal.
    LexMin,
    /// Pick the candidate minimizing a seeded hash of its vectorization.
    Seeded(Seed),
}

/// An ordered semi-canonical basis together with its selection data.
#[derive(Debug, Clone)]
pub struct SemiCanonicalBasis {
    /// The chosen basis matrices A_1, ..., A_d.
    pub elements: Vec<FpMatrix>,
    /// Coefficients of each A_i over the space's canonical basis.
    pub coefficients: Vec<RowVector>,
    /// dim zero_{L,R}(S); the first `zero_dim` elements span that subspace.
    pub zero_dim: usize,
}

fn tie_key(tie: TieBreak, mat: &FpMatrix) -> Vec<u64> {
    match tie {
        TieBreak::LexMin => mat.vectorize().as_slice().to_vec(),
        TieBreak::Seeded(seed) => {
            let mut h = seed.0 ^ 0x51ab_bead_c0de_f00d;
            for &x in mat.vectorize().as_slice() {
                h = (h ^ x).wrapping_mul(0x100_0000_01b3);
                h ^= h >> 29;
            }
            vec![h]
        }
    }
}

/// Greedy lex-minimizing basis: at step i, among all members outside
/// <A_1, ..., A_{i-1}>, pick one minimizing the fingerprint L * A * R, ties
/// broken per `tie`. The result spans the space and its first
/// dim zero_{L,R}(S) members span the zero subspace.
pub fn semi_canonical_basis(
    space: &MatrixSpace,
    left: &FpMatrix,
    right: &FpMatrix,
    tie: TieBreak,
    cap: u64,
) -> Result<SemiCanonicalBasis> {
    if left.cols() != space.row_dim() || right.rows() != space.col_dim() {
        return Err(Error::ShapeMismatch("semi-canonical basis shapes do not conform".into()));
    }
    let p = space.p();
    let d = space.dim();
    match space.size() {
        Some(s) if s <= cap as u128 => {}
        _ => {
            return Err(Error::CapExceeded(format!(
                "p^{} member enumeration above cap {}",
                d, cap
            )))
        }
    }
    // Fingerprints are linear in the coefficients.
    let keys: Vec<FpMatrix> = space.basis().iter().map(|b| left.mul(b).mul(right)).collect();
    let key_stack = FpMatrix::from_rows(p, &keys.iter().map(|k| k.vectorize()).collect::<Vec<_>>());
    let zero_dim = if d == 0 { 0 } else { d - key_stack.rank() };

    let mut chosen_coeffs: Vec<RowVector> = Vec::with_capacity(d);
    let mut chosen_mats: Vec<FpMatrix> = Vec::with_capacity(d);
    let mut span = RowSpace::empty(p, d);
    for _ in 0..d {
        let mut best: Option<(FpMatrix, Vec<u64>, RowVector, FpMatrix)> = None;
        for c in VectorCounter::new(p, d) {
            if span.contains(&c) {
                continue;
            }
            let mut key = FpMatrix::zero(p, left.rows(), right.cols());
            for (i, k) in keys.iter().enumerate() {
                let ci = c.get(i);
                if ci != 0 {
                    key = key.add_scaled(k, ci);
                }
            }
            let candidate_is_better = match &best {
                None => true,
                Some((bk, bt, _, _)) => match lex_compare(&key, bk).expect("same shape") {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let mat = space.element(&c);
                        tie_key(tie, &mat) < *bt
                    }
                },
            };
            if candidate_is_better {
                let mat = space.element(&c);
                let t = tie_key(tie, &mat);
                best = Some((key, t, c, mat));
            }
        }
        let (_, _, c, mat) = best.expect("space has a member outside the current span");
        span.insert(&c);
        chosen_coeffs.push(c);
        chosen_mats.push(mat);
    }
    Ok(SemiCanonicalBasis { elements: chosen_mats, coefficients: chosen_coeffs, zero_dim })
}

/// Parameters for the sampled individualization of a space.
#[derive(Debug, Clone, Copy)]
pub struct IndividualizationParams {
    /// Constant in t = ceil(c * max(d log2 p, k) / sqrt(k)).
    pub c: f64,
    /// Exhaustive verification budget in space members.
    pub verify_budget: u64,
}

impl Default for IndividualizationParams {
    fn default() -> Self {
        IndividualizationParams { c: 32.0, verify_budget: 1_000_000 }
    }
}

/// Outcome of the exhaustive non-vanishing check for a sampled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    /// Every member of rank >= k has a nonzero fingerprint.
    Verified,
    /// Some member of rank >= k has a zero fingerprint.
    Failed,
    /// The space was too large to check within budget.
    Unchecked,
}

#[derive(Debug, Clone)]
pub struct SampledIndividualization {
    pub pair: IndividualizationPair,
    pub row_count: usize,
    pub verification: Verification,
}

/// Samples individualization matrices sized so that, for every member of
/// rank at least `k`, the fingerprint is nonzero with constant probability.
/// When the prescribed size covers a full identity, the identity is used.
pub fn sample_individualization(
    space: &MatrixSpace,
    k: usize,
    seed: Seed,
    params: IndividualizationParams,
) -> SampledIndividualization {
    assert!(k >= 1);
    let p = space.p();
    let d = space.dim() as f64;
    let logp = (p.get() as f64).log2();
    let t = (params.c * (d * logp).max(k as f64) / (k as f64).sqrt()).ceil() as usize;
    let t = t.max(1);
    sample_individualization_with_t(space, k, t, seed, params.verify_budget)
}

/// Same as [`sample_individualization`] but with the row/column count fixed
/// directly; tests shrink the count below the default constant.
pub fn sample_individualization_with_t(
    space: &MatrixSpace,
    k: usize,
    t: usize,
    seed: Seed,
    verify_budget: u64,
) -> SampledIndividualization {
    let p = space.p();
    let m = space.row_dim();
    let n = space.col_dim();
    let mut rng = seed.rng();
    let left = if t >= m {
        FpMatrix::identity(p, m)
    } else {
        FpMatrix::random(p, t, m, &mut rng)
    };
    let right = if t >= n {
        FpMatrix::identity(p, n)
    } else {
        FpMatrix::random(p, n, t, &mut rng)
    };
    let verification = match space.size() {
        Some(s) if s <= verify_budget as u128 => {
            let mut ok = true;
            for (_, a) in space.elements() {
                if a.is_zero() || a.rank() < k {
                    continue;
                }
                if left.mul(&a).mul(&right).is_zero() {
                    ok = false;
                    break;
                }
            }
            if ok {
                Verification::Verified
            } else {
                Verification::Failed
            }
        }
        _ => Verification::Unchecked,
    };
    SampledIndividualization {
        pair: IndividualizationPair { left, right },
        row_count: t,
        verification,
    }
}
