//! Matrix-tuple primitives and exhaustive backends for skew-symmetric tuple
//! isometry and general tuple equivalence.
//!
//! Both searches are complete: a `None` answer means no witness exists. The
//! isometry search builds the candidate matrix row by row; the admissible
//! next rows form an affine subspace cut out by the already-placed rows, so
//! structured inputs collapse to small search trees. Budgets are measured in
//! visited candidates, not wall time, and are identical across runs.

use crate::error::{Error, Result};
use crate::gf::{solve_left, FpMatrix, Prime, RowSpace, RowVector, VectorCounter};

/// An ordered tuple of same-shape matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixTuple {
    p: Prime,
    row_dim: usize,
    col_dim: usize,
    mats: Vec<FpMatrix>,
}

impl MatrixTuple {
    pub fn new(p: Prime, row_dim: usize, col_dim: usize, mats: Vec<FpMatrix>) -> Result<MatrixTuple> {
        if mats.is_empty() {
            return Err(Error::ShapeMismatch("a matrix tuple needs at least one member".into()));
        }
        for m in &mats {
            if m.p() != p || m.rows() != row_dim || m.cols() != col_dim {
                return Err(Error::ShapeMismatch("tuple members must share one shape".into()));
            }
        }
        Ok(MatrixTuple { p, row_dim, col_dim, mats })
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

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[FpMatrix] {
        &self.mats
    }

    /// P * tuple * Q applied memberwise.
    pub fn transformed(&self, left: &FpMatrix, right: &FpMatrix) -> MatrixTuple {
        let mats = self.mats.iter().map(|m| left.mul(m).mul(right)).collect();
        MatrixTuple {
            p: self.p,
            row_dim: left.rows(),
            col_dim: right.cols(),
            mats,
        }
    }

    pub fn rank_multiset(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.mats.iter().map(|m| m.rank()).collect();
        v.sort_unstable();
        v
    }
}

/// A tuple of skew-symmetric n x n matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMatrixTuple {
    inner: MatrixTuple,
}

impl SkewMatrixTuple {
    pub fn new(p: Prime, n: usize, mats: Vec<FpMatrix>) -> Result<SkewMatrixTuple> {
        let inner = MatrixTuple::new(p, n, n, mats)?;
        for m in inner.mats() {
            if !m.is_skew() {
                return Err(Error::NotSkew("tuple member is not skew-symmetric".into()));
            }
        }
        Ok(SkewMatrixTuple { inner })
    }

    pub fn p(&self) -> Prime {
        self.inner.p
    }

    pub fn n(&self) -> usize {
        self.inner.row_dim
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn mats(&self) -> &[FpMatrix] {
        self.inner.mats()
    }

    pub fn as_tuple(&self) -> &MatrixTuple {
        &self.inner
    }

    /// S * tuple * S^T applied memberwise.
    pub fn conjugated(&self, s: &FpMatrix) -> SkewMatrixTuple {
        let st = s.transpose();
        SkewMatrixTuple { inner: self.inner.transformed(s, &st) }
    }
}

/// Candidate-count budget for the exhaustive backends.
#[derive(Debug, Clone, Copy)]
pub struct TupleBudget {
    /// Nodes visited in the row-by-row isometry search.
    pub max_nodes: u64,
    /// Left-factor candidates tried in the equivalence search.
    pub max_left_candidates: u64,
    /// Solutions enumerated when completing the right factor.
    pub max_right_solutions: u64,
}

impl Default for TupleBudget {
    fn default() -> Self {
        TupleBudget {
            max_nodes: 20_000_000,
            max_left_candidates: 2_000_000,
            max_right_solutions: 100_000,
        }
    }
}

/// Searches for an invertible S with S A_i S^T = B_i for all i.
///
/// The search is exhaustive over GL(n, F_p): rows of S are placed one at a
/// time, and the constraints row_q A_i row_r^T = B_i[q, r] for q < r restrict
/// each new row to an affine subspace computed by linear algebra. Returned
/// witnesses are re-verified entrywise.
pub fn skew_tuple_isometry(
    a: &SkewMatrixTuple,
    b: &SkewMatrixTuple,
    budget: &TupleBudget,
) -> Result<Option<FpMatrix>> {
    if a.p() != b.p() || a.n() != b.n() || a.len() != b.len() {
        return Err(Error::ShapeMismatch("tuples must share (p, n, k)".into()));
    }
    let p = a.p();
    let n = a.n();
    let k = a.len();
    if n == 0 {
        return Ok(Some(FpMatrix::identity(p, 0)));
    }
    // per-index rank equality is necessary
    for i in 0..k {
        if a.mats()[i].rank() != b.mats()[i].rank() {
            return Ok(None);
        }
    }
    // Unary pruning: row r of any witness satisfies
    // span{v A_i} * S^T = span{row r of B_i}, so the image-span dimension of
    // a candidate must match that of the target row.
    let target_dims: Vec<usize> = (0..n)
        .map(|r| {
            let mut sp = RowSpace::empty(p, n);
            for i in 0..k {
                sp.insert(&b.mats()[i].row(r));
            }
            sp.dim()
        })
        .collect();

    struct Search<'s> {
        p: Prime,
        n: usize,
        k: usize,
        a: &'s SkewMatrixTuple,
        b: &'s SkewMatrixTuple,
        target_dims: &'s [usize],
        rows: Vec<RowVector>,
        // row_images[q][i] = rows[q] * A_i, cached
        row_images: Vec<Vec<RowVector>>,
        span: RowSpace,
        nodes: u64,
        max_nodes: u64,
    }

    impl<'s> Search<'s> {
        fn place(&mut self) -> Result<Option<FpMatrix>> {
            let r = self.rows.len();
            if r == self.n {
                let s = FpMatrix::from_rows(self.p, &self.rows);
                // entrywise re-verification of the witness
                let st = s.transpose();
                for i in 0..self.k {
                    if s.mul(&self.a.mats()[i]).mul(&st) != self.b.mats()[i] {
                        return Ok(None);
                    }
                }
                return Ok(Some(s));
            }
            // constraints: rows[q] A_i v^T = B_i[q, r] for all q < r, i
            let mut lhs_cols: Vec<RowVector> = Vec::with_capacity(r * self.k);
            let mut rhs: Vec<u64> = Vec::with_capacity(r * self.k);
            for q in 0..r {
                for i in 0..self.k {
                    lhs_cols.push(self.row_images[q][i].clone());
                    rhs.push(self.b.mats()[i].get(q, r));
                }
            }
            let sols = if lhs_cols.is_empty() {
                None // first row: all of F_p^n
            } else {
                // v * M = rhs with M columns = (rows[q] A_i)^T
                let m = FpMatrix::from_rows(self.p, &lhs_cols).transpose();
                let target = RowVector::new(self.p, rhs);
                match solve_left(&m, &target) {
                    None => return Ok(None),
                    Some(s) => Some(s),
                }
            };
            let candidates: Box<dyn Iterator<Item = RowVector>> = match &sols {
                None => Box::new(VectorCounter::new(self.p, self.n)),
                Some(s) => Box::new(s.iter(self.p).collect::<Vec<_>>().into_iter()),
            };
            for v in candidates {
                self.nodes += 1;
                if self.nodes > self.max_nodes {
                    return Err(Error::BudgetExceeded(format!(
                        "isometry search visited more than {} candidates",
                        self.max_nodes
                    )));
                }
                if self.span.contains(&v) {
                    continue;
                }
                let images: Vec<RowVector> =
                    (0..self.k).map(|i| v.mul_mat(&self.a.mats()[i])).collect();
                let mut image_span = RowSpace::empty(self.p, self.n);
                for im in &images {
                    image_span.insert(im);
                    if image_span.dim() > self.target_dims[r] {
                        break;
                    }
                }
                if image_span.dim() != self.target_dims[r] {
                    continue;
                }
                let saved_span = self.span.clone();
                self.span.insert(&v);
                self.rows.push(v);
                self.row_images.push(images);
                if let Some(found) = self.place()? {
                    return Ok(Some(found));
                }
                self.rows.pop();
                self.row_images.pop();
                self.span = saved_span;
            }
            Ok(None)
        }
    }

    let mut search = Search {
        p,
        n,
        k,
        a,
        b,
        target_dims: &target_dims,
        rows: Vec::new(),
        row_images: Vec::new(),
        span: RowSpace::empty(p, n),
        nodes: 0,
        max_nodes: budget.max_nodes,
    };
    search.place()
}

/// Searches for invertible (P, Q) with P A_i Q = B_i for all i.
///
/// Only P ranges over GL(m); for each P the right factor is the solution of
/// the joint linear system (P A_i) Q = B_i, followed by an invertibility
/// check over the solution space.
pub fn tuple_equivalence(
    a: &MatrixTuple,
    b: &MatrixTuple,
    budget: &TupleBudget,
) -> Result<Option<(FpMatrix, FpMatrix)>> {
    if a.p() != b.p()
        || a.row_dim() != b.row_dim()
        || a.col_dim() != b.col_dim()
        || a.len() != b.len()
    {
        return Err(Error::ShapeMismatch("tuples must share (p, m, n, k)".into()));
    }
    let p = a.p();
    let m = a.row_dim();
    let n = a.col_dim();
    if a.rank_multiset() != b.rank_multiset() {
        return Ok(None);
    }
    if m == 0 || n == 0 {
        return Ok(Some((FpMatrix::identity(p, m), FpMatrix::identity(p, n))));
    }

    let mut tried = 0u64;
    let mut stack: Vec<RowVector> = Vec::new();
    let mut span = RowSpace::empty(p, m);
    // depth-first enumeration of GL(m) in lexical row order
    fn rec(
        p: Prime,
        m: usize,
        n: usize,
        a: &MatrixTuple,
        b: &MatrixTuple,
        stack: &mut Vec<RowVector>,
        span: &mut RowSpace,
        tried: &mut u64,
        budget: &TupleBudget,
    ) -> Result<Option<(FpMatrix, FpMatrix)>> {
        if stack.len() == m {
            *tried += 1;
            if *tried > budget.max_left_candidates {
                return Err(Error::BudgetExceeded(format!(
                    "equivalence search tried more than {} left factors",
                    budget.max_left_candidates
                )));
            }
            let pm = FpMatrix::from_rows(p, stack);
            if let Some(q) = solve_right_factor(p, n, a, b, &pm, budget)? {
                return Ok(Some((pm, q)));
            }
            return Ok(None);
        }
        for v in VectorCounter::new(p, m) {
            if span.contains(&v) {
                continue;
            }
            let saved = span.clone();
            span.insert(&v);
            stack.push(v);
            if let Some(found) = rec(p, m, n, a, b, stack, span, tried, budget)? {
                return Ok(Some(found));
            }
            stack.pop();
            *span = saved;
        }
        Ok(None)
    }

    rec(p, m, n, a, b, &mut stack, &mut span, &mut tried, budget)
}

/// Solves (P A_i) Q = B_i jointly for Q and returns an invertible solution.
fn solve_right_factor(
    p: Prime,
    n: usize,
    a: &MatrixTuple,
    b: &MatrixTuple,
    pm: &FpMatrix,
    budget: &TupleBudget,
) -> Result<Option<FpMatrix>> {
    // vec(Q) viewed as a row vector q of length n*n; the constraint
    // (PA_i) Q = B_i reads, entrywise, sum_t (PA_i)[r, t] Q[t, c] = B_i[r, c].
    let m = a.row_dim();
    let mut cols: Vec<RowVector> = Vec::new();
    let mut rhs: Vec<u64> = Vec::new();
    for (i, am) in a.mats().iter().enumerate() {
        let pa = pm.mul(am);
        for r in 0..m {
            for c in 0..n {
                // coefficient of Q[t, c] is pa[r, t]
                let mut col = vec![0u64; n * n];
                for t in 0..n {
                    col[t * n + c] = pa.get(r, t);
                }
                cols.push(RowVector::new(p, col));
                rhs.push(b.mats()[i].get(r, c));
            }
        }
    }
    let mat = FpMatrix::from_rows(p, &cols).transpose();
    let target = RowVector::new(p, rhs);
    let Some(sols) = solve_left(&mat, &target) else {
        return Ok(None);
    };
    let mut seen = 0u64;
    for q in sols.iter(p) {
        seen += 1;
        if seen > budget.max_right_solutions {
            return Err(Error::BudgetExceeded(format!(
                "right-factor completion enumerated more than {} solutions",
                budget.max_right_solutions
            )));
        }
        let qm = FpMatrix::from_vectorized(p, n, n, &q);
        if qm.is_invertible() {
            // re-verify entrywise
            let ok = a
                .mats()
                .iter()
                .zip(b.mats())
                .all(|(am, bm)| pm.mul(am).mul(&qm) == *bm);
            if ok {
                return Ok(Some(qm));
            }
        }
    }
    Ok(None)
}
