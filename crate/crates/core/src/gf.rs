//! Exact dense linear algebra over the prime field GF(p) for an odd prime p.
//!
//! Entries are stored as fully reduced residues in `0..p`. All operations are
//! pure; matrices are cheap to clone at the sizes this crate works with.

use crate::error::{Error, Result};
use rand::Rng;
use std::cmp::Ordering;
use std::fmt;

/// An odd prime small enough for machine-word arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prime(u64);

impl Prime {
    /// Validates primality by trial division and rejects p = 2.
    pub fn new(p: u64) -> Result<Prime> {
        if p < 3 {
            return Err(Error::ParseError(format!("p = {p} must be an odd prime >= 3")));
        }
        if p % 2 == 0 {
            return Err(Error::ParseError(format!("p = {p} is even")));
        }
        let mut d = 3;
        while d * d <= p {
            if p % d == 0 {
                return Err(Error::ParseError(format!("p = {p} is not prime")));
            }
            d += 2;
        }
        // Keep p*p inside u64.
        if p >= 1 << 31 {
            return Err(Error::ParseError(format!("p = {p} does not fit a machine word")));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.0
    }

    /// Multiplicative inverse by Fermat exponentiation.
    pub fn inv(self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::Singular);
        }
        Ok(self.pow(a, self.0 - 2))
    }

    pub fn pow(self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The residue (p+1)/2, the inverse of 2.
    pub fn half(self) -> u64 {
        (self.0 + 1) / 2
    }

    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.0 as i64) as u64
    }
}

/// A row vector over GF(p).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RowVector {
    p: Prime,
    data: Vec<u64>,
}

impl RowVector {
    pub fn new(p: Prime, data: Vec<u64>) -> RowVector {
        debug_assert!(data.iter().all(|&x| x < p.get()));
        RowVector { p, data }
    }

    pub fn zero(p: Prime, len: usize) -> RowVector {
        RowVector { p, data: vec![0; len] }
    }

    pub fn unit(p: Prime, len: usize, i: usize) -> RowVector {
        let mut v = RowVector::zero(p, len);
        v.data[i] = 1;
        v
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn get(&self, i: usize) -> u64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: u64) {
        self.data[i] = v % self.p.get();
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn add(&self, other: &RowVector) -> RowVector {
        assert_eq!(self.len(), other.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.p.add(a, b))
            .collect();
        RowVector { p: self.p, data }
    }

    pub fn sub(&self, other: &RowVector) -> RowVector {
        assert_eq!(self.len(), other.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.p.sub(a, b))
            .collect();
        RowVector { p: self.p, data }
    }

    pub fn scale(&self, c: u64) -> RowVector {
        let data = self.data.iter().map(|&a| self.p.mul(a, c)).collect();
        RowVector { p: self.p, data }
    }

    /// v * A for a conformable matrix.
    pub fn mul_mat(&self, a: &FpMatrix) -> RowVector {
        assert_eq!(self.len(), a.rows());
        let p = self.p;
        let mut out = vec![0u64; a.cols()];
        for (i, &vi) in self.data.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for j in 0..a.cols() {
                out[j] = p.add(out[j], p.mul(vi, a.get(i, j)));
            }
        }
        RowVector { p, data: out }
    }

    /// Standard bilinear pairing v . w.
    pub fn dot(&self, other: &RowVector) -> u64 {
        assert_eq!(self.len(), other.len());
        let mut acc = 0;
        for (&a, &b) in self.data.iter().zip(&other.data) {
            acc = self.p.add(acc, self.p.mul(a, b));
        }
        acc
    }

    pub fn to_matrix(&self) -> FpMatrix {
        FpMatrix::from_rows(self.p, std::slice::from_ref(self))
    }
}

impl fmt::Debug for RowVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} mod {})", self.data, self.p.get())
    }
}

/// Dense matrix over GF(p), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: Prime, rows: usize, cols: usize) -> FpMatrix {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: Prime, n: usize) -> FpMatrix {
        let mut m = FpMatrix::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_vec(p: Prime, rows: usize, cols: usize, data: Vec<u64>) -> FpMatrix {
        assert_eq!(rows * cols, data.len());
        debug_assert!(data.iter().all(|&x| x < p.get()));
        FpMatrix { p, rows, cols, data }
    }

    /// Builds a matrix from signed integer literals, reducing mod p.
    pub fn from_i64(p: Prime, rows: &[&[i64]]) -> FpMatrix {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &x in *row {
                data.push(p.reduce(x));
            }
        }
        FpMatrix { p, rows: r, cols: c, data }
    }

    pub fn from_rows(p: Prime, rows: &[RowVector]) -> FpMatrix {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row.as_slice());
        }
        FpMatrix { p, rows: r, cols: c, data }
    }

    pub fn random<R: Rng>(p: Prime, rows: usize, cols: usize, rng: &mut R) -> FpMatrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p.get())).collect();
        FpMatrix { p, rows, cols, data }
    }

    /// Rejection-samples an invertible matrix.
    pub fn random_invertible<R: Rng>(p: Prime, n: usize, rng: &mut R) -> FpMatrix {
        loop {
            let m = FpMatrix::random(p, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v % self.p.get();
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_skew(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != self.p.neg(self.get(j, i)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn row(&self, i: usize) -> RowVector {
        RowVector::new(self.p, self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> RowVector {
        RowVector::new(self.p, (0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zero(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.p.add(a, b))
            .collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.p.sub(a, b))
            .collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> FpMatrix {
        let data = self.data.iter().map(|&a| self.p.neg(a)).collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u64) -> FpMatrix {
        let c = c % self.p.get();
        let data = self.data.iter().map(|&a| self.p.mul(a, c)).collect();
        FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let p = self.p;
        let mut out = FpMatrix::zero(p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = p.add(out.get(i, j), p.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// self + c * other.
    pub fn add_scaled(&self, other: &FpMatrix, c: u64) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| p.add(a, p.mul(c, b)))
            .collect();
        FpMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    /// Submatrix on rows `r0..r1` and columns `c0..c1` (half-open, 0-based).
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> FpMatrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        let mut out = FpMatrix::zero(self.p, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.get(i, j));
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &FpMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    pub fn vstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FpMatrix { p: self.p, rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn hstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = FpMatrix::zero(self.p, self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    /// Row-major flattening of the matrix to a vector of length rows*cols.
    pub fn vectorize(&self) -> RowVector {
        RowVector::new(self.p, self.data.clone())
    }

    pub fn from_vectorized(p: Prime, rows: usize, cols: usize, v: &RowVector) -> FpMatrix {
        assert_eq!(v.len(), rows * cols);
        FpMatrix { p, rows, cols, data: v.as_slice().to_vec() }
    }

    /// Reduced row echelon form together with the rank, the pivot columns,
    /// and an invertible transform with `transform * self == rref`.
    pub fn rref_full(&self) -> (FpMatrix, usize, Vec<usize>, FpMatrix) {
        let p = self.p;
        let mut m = self.clone();
        let mut t = FpMatrix::identity(p, self.rows);
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for pc in 0..self.cols {
            if pr == self.rows {
                break;
            }
            // first nonzero entry scanning top to bottom
            let Some(sel) = (pr..self.rows).find(|&i| m.get(i, pc) != 0) else {
                continue;
            };
            if sel != pr {
                m.swap_rows(sel, pr);
                t.swap_rows(sel, pr);
            }
            let inv = p.inv(m.get(pr, pc)).expect("pivot is nonzero");
            m.scale_row(pr, inv);
            t.scale_row(pr, inv);
            for i in 0..self.rows {
                if i != pr {
                    let f = m.get(i, pc);
                    if f != 0 {
                        let nf = p.neg(f);
                        m.add_row_multiple(i, pr, nf);
                        t.add_row_multiple(i, pr, nf);
                    }
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        (m, pr, pivots, t)
    }

    pub fn rref(&self) -> (FpMatrix, usize) {
        let (r, rank, _, _) = self.rref_full();
        (r, rank)
    }

    /// Rank by forward elimination only; no transform bookkeeping.
    pub fn rank(&self) -> usize {
        let p = self.p;
        let mut m = self.clone();
        let mut pr = 0usize;
        for pc in 0..self.cols {
            if pr == self.rows {
                break;
            }
            let Some(sel) = (pr..self.rows).find(|&i| m.get(i, pc) != 0) else {
                continue;
            };
            if sel != pr {
                m.swap_rows(sel, pr);
            }
            let inv = p.inv(m.get(pr, pc)).expect("pivot is nonzero");
            for i in (pr + 1)..self.rows {
                let f = m.get(i, pc);
                if f != 0 {
                    let factor = p.neg(p.mul(f, inv));
                    for j in pc..self.cols {
                        let v = p.add(m.get(i, j), p.mul(factor, m.get(pr, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pr += 1;
        }
        pr
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Inverse of a square matrix.
    pub fn invert(&self) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("invert requires a square matrix".into()));
        }
        let (r, rank, _, t) = self.rref_full();
        if rank != self.rows {
            return Err(Error::Singular);
        }
        debug_assert_eq!(r, FpMatrix::identity(self.p, self.rows));
        Ok(t)
    }

    /// Basis of the left nullspace {v : v * self = 0}, rows of the result
    /// in canonical (RREF) form.
    pub fn left_nullspace(&self) -> FpMatrix {
        // v * A = 0  <=>  A^T v^T = 0; compute via RREF of A^T.
        let at = self.transpose();
        let (r, rank, pivots, _) = at.rref_full();
        let n = self.rows;
        let p = self.p;
        let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &fj in &free {
            let mut v = vec![0u64; n];
            v[fj] = 1;
            for (pi, &pj) in pivots.iter().enumerate() {
                v[pj] = p.neg(r.get(pi, fj));
            }
            rows.push(RowVector::new(p, v));
        }
        let raw = FpMatrix::from_rows(p, &rows);
        if raw.rows == 0 {
            FpMatrix::zero(p, 0, n)
        } else {
            let (rr, rank2, _, _) = raw.rref_full();
            debug_assert_eq!(rank2, raw.rows);
            let _ = rank;
            rr.submatrix(0, rank2, 0, n)
        }
    }

    /// Basis (as columns) of the right nullspace {x : self * x = 0}.
    pub fn right_nullspace_cols(&self) -> FpMatrix {
        self.transpose().left_nullspace().transpose()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, c: u64) {
        for j in 0..self.cols {
            let v = self.p.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    fn add_row_multiple(&mut self, dst: usize, src: usize, c: u64) {
        for j in 0..self.cols {
            let v = self.p.add(self.get(dst, j), self.p.mul(c, self.get(src, j)));
            self.set(dst, j, v);
        }
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} mod {} [", self.rows, self.cols, self.p.get())?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Row-major first-difference order on same-shape matrices, entries compared
/// as integers in 0..p.
pub fn lex_compare(a: &FpMatrix, b: &FpMatrix) -> Result<Ordering> {
    if a.p() != b.p() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::ShapeMismatch("lex_compare requires equal shapes".into()));
    }
    Ok(a.data.cmp(&b.data))
}

/// A row-vector subspace held in canonical RREF form, supporting membership
/// tests, reduction, and canonical completions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSpace {
    p: Prime,
    ambient: usize,
    rref: FpMatrix,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn empty(p: Prime, ambient: usize) -> RowSpace {
        RowSpace { p, ambient, rref: FpMatrix::zero(p, 0, ambient), pivots: Vec::new() }
    }

    pub fn full(p: Prime, ambient: usize) -> RowSpace {
        RowSpace::from_matrix(&FpMatrix::identity(p, ambient))
    }

    /// Span of the rows of `m`.
    pub fn from_matrix(m: &FpMatrix) -> RowSpace {
        let (r, rank, pivots, _) = m.rref_full();
        RowSpace {
            p: m.p(),
            ambient: m.cols(),
            rref: r.submatrix(0, rank, 0, m.cols()),
            pivots,
        }
    }

    pub fn from_rows(p: Prime, rows: &[RowVector]) -> RowSpace {
        if rows.is_empty() {
            return RowSpace::empty(p, 0);
        }
        RowSpace::from_matrix(&FpMatrix::from_rows(p, rows))
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rref.rows()
    }

    /// Canonical basis rows.
    pub fn basis(&self) -> Vec<RowVector> {
        (0..self.dim()).map(|i| self.rref.row(i)).collect()
    }

    pub fn basis_matrix(&self) -> &FpMatrix {
        &self.rref
    }

    /// Reduces `v` modulo the space; the result is zero iff v is a member.
    pub fn reduce(&self, v: &RowVector) -> RowVector {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.clone();
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = w.get(pc);
            if c != 0 {
                let nr = self.rref.row(i).scale(c);
                w = w.sub(&nr);
            }
        }
        w
    }

    pub fn contains(&self, v: &RowVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds a vector to the span; returns true if the dimension grew.
    pub fn insert(&mut self, v: &RowVector) -> bool {
        let w = self.reduce(v);
        if w.is_zero() {
            return false;
        }
        let stacked = self.rref.vstack(&w.to_matrix());
        let (r, rank, pivots, _) = stacked.rref_full();
        self.rref = r.submatrix(0, rank, 0, self.ambient);
        self.pivots = pivots;
        true
    }

    /// Coefficients of `v` over the canonical basis, if a member.
    pub fn coordinates(&self, v: &RowVector) -> Option<RowVector> {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.clone();
        let mut coeffs = vec![0u64; self.dim()];
        for (i, &pc) in self.pivots.iter().enumerate() {
            let c = w.get(pc);
            if c != 0 {
                coeffs[i] = c;
                w = w.sub(&self.rref.row(i).scale(c));
            }
        }
        if w.is_zero() {
            Some(RowVector::new(self.p, coeffs))
        } else {
            None
        }
    }

    /// Canonical completion of the space to the full ambient space:
    /// standard basis vectors at the non-pivot coordinates.
    pub fn complement_basis(&self) -> Vec<RowVector> {
        (0..self.ambient)
            .filter(|j| !self.pivots.contains(j))
            .map(|j| RowVector::unit(self.p, self.ambient, j))
            .collect()
    }

    /// Canonical completion of `self` inside the larger space `within`:
    /// scans the canonical basis of `within`, keeping vectors that grow the
    /// span. Panics if `self` is not a subspace of `within`.
    pub fn complement_within(&self, within: &RowSpace) -> Vec<RowVector> {
        assert_eq!(self.ambient, within.ambient);
        let mut acc = self.clone();
        let mut out = Vec::new();
        for b in within.basis() {
            assert!(within.contains(&b));
            if acc.insert(&b) {
                out.push(b);
            }
        }
        assert_eq!(acc.dim(), within.dim(), "first space is not inside the second");
        out
    }

    /// Intersection of two spaces in the same ambient.
    pub fn intersect(&self, other: &RowSpace) -> RowSpace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return RowSpace::empty(self.p, self.ambient);
        }
        // Zassenhaus: rows (u | u) for u in self, (w | 0) for w in other;
        // RREF rows of the form (0 | x) give the intersection.
        let d1 = self.dim();
        let d2 = other.dim();
        let mut big = FpMatrix::zero(self.p, d1 + d2, 2 * self.ambient);
        for i in 0..d1 {
            let r = self.rref.row(i);
            for j in 0..self.ambient {
                big.set(i, j, r.get(j));
                big.set(i, self.ambient + j, r.get(j));
            }
        }
        for i in 0..d2 {
            let r = other.rref.row(i);
            for j in 0..self.ambient {
                big.set(d1 + i, j, r.get(j));
            }
        }
        let (r, rank, _, _) = big.rref_full();
        let mut rows = Vec::new();
        for i in 0..rank {
            let left_zero = (0..self.ambient).all(|j| r.get(i, j) == 0);
            if left_zero {
                rows.push(RowVector::new(
                    self.p,
                    (0..self.ambient).map(|j| r.get(i, self.ambient + j)).collect(),
                ));
            }
        }
        if rows.is_empty() {
            RowSpace::empty(self.p, self.ambient)
        } else {
            RowSpace::from_rows(self.p, &rows)
        }
    }

    pub fn is_subspace_of(&self, other: &RowSpace) -> bool {
        self.basis().iter().all(|v| other.contains(v))
    }
}

/// All solutions v of v * A = b as an affine space.
#[derive(Debug, Clone)]
pub struct AffineSolutions {
    pub particular: RowVector,
    /// Basis of the homogeneous solution space, canonical RREF rows.
    pub homogeneous: FpMatrix,
}

/// Solves v * A = b for row vectors v. Returns None when inconsistent.
pub fn solve_left(a: &FpMatrix, b: &RowVector) -> Option<AffineSolutions> {
    assert_eq!(b.len(), a.cols());
    let p = a.p();
    // (v A)^T = A^T v^T = b^T: solve the column system via RREF of [A^T | b^T].
    let at = a.transpose();
    let aug = at.hstack(&b.to_matrix().transpose());
    let (r, _, pivots, _) = aug.rref_full();
    if pivots.contains(&a.rows()) {
        return None; // pivot in the last column: inconsistent
    }
    let n = a.rows();
    let mut part = vec![0u64; n];
    for (i, &pc) in pivots.iter().enumerate() {
        part[pc] = r.get(i, n);
    }
    Some(AffineSolutions {
        particular: RowVector::new(p, part),
        homogeneous: a.left_nullspace(),
    })
}

impl AffineSolutions {
    /// Number of solutions p^k as u128, or None on overflow.
    pub fn count(&self, p: Prime) -> Option<u128> {
        (p.get() as u128).checked_pow(self.homogeneous.rows() as u32)
    }

    /// Deterministic enumeration of all solutions in lex order of the
    /// coefficient vector over the homogeneous basis.
    pub fn iter(&self, p: Prime) -> impl Iterator<Item = RowVector> + '_ {
        VectorCounter::new(p, self.homogeneous.rows()).map(move |c| {
            let mut v = self.particular.clone();
            for (i, &ci) in c.as_slice().iter().enumerate() {
                if ci != 0 {
                    v = v.add(&self.homogeneous.row(i).scale(ci));
                }
            }
            v
        })
    }
}

/// Lexicographic counter over F_p^d (most significant digit first).
pub struct VectorCounter {
    p: Prime,
    current: Option<Vec<u64>>,
}

impl VectorCounter {
    pub fn new(p: Prime, d: usize) -> VectorCounter {
        VectorCounter { p, current: Some(vec![0; d]) }
    }
}

impl Iterator for VectorCounter {
    type Item = RowVector;

    fn next(&mut self) -> Option<RowVector> {
        let cur = self.current.take()?;
        let out = RowVector::new(self.p, cur.clone());
        let mut next = cur;
        let mut i = next.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < self.p.get() {
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use proptest::prelude::*;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn prime_validation() {
        assert!(Prime::new(3).is_ok());
        assert!(Prime::new(7).is_ok());
        assert!(Prime::new(2).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(1).is_err());
    }

    #[test]
    fn rref_zero_matrix() {
        let z = FpMatrix::zero(p3(), 2, 2);
        let (r, rank, _, _) = z.rref_full();
        assert_eq!(rank, 0);
        assert!(r.is_zero());
    }

    #[test]
    fn rref_identity() {
        let i3 = FpMatrix::identity(p5(), 3);
        let (r, rank, _, _) = i3.rref_full();
        assert_eq!(rank, 3);
        assert_eq!(r, i3);
    }

    #[test]
    fn rref_dependent_rows() {
        // row 2 = 2 * row 1 mod 3; cross-checked by enumerating the row span.
        let a = FpMatrix::from_i64(p3(), &[&[1, 2], &[2, 4]]);
        let (_, rank, _, t) = a.rref_full();
        assert_eq!(rank, 1);
        assert!(t.is_invertible());
        let span: Vec<RowVector> = VectorCounter::new(p3(), 2)
            .map(|c| c.mul_mat(&a))
            .collect();
        let distinct: std::collections::HashSet<Vec<u64>> =
            span.iter().map(|v| v.as_slice().to_vec()).collect();
        assert_eq!(distinct.len(), 3); // p^1 distinct row-span elements
    }

    #[test]
    fn rref_transform_identity() {
        let mut rng = Seed(7).rng();
        for _ in 0..50 {
            let a = FpMatrix::random(p5(), 3, 4, &mut rng);
            let (r, _, _, t) = a.rref_full();
            assert_eq!(t.mul(&a), r);
            assert!(t.is_invertible());
        }
    }

    #[test]
    fn invert_examples() {
        let i4 = FpMatrix::identity(p5(), 4);
        assert_eq!(i4.invert().unwrap(), i4);

        // diag(2) over p=5 inverts to diag(3).
        let d = FpMatrix::from_i64(p5(), &[&[2]]);
        assert_eq!(d.invert().unwrap(), FpMatrix::from_i64(p5(), &[&[3]]));

        let u = FpMatrix::from_i64(p3(), &[&[1, 1], &[0, 1]]);
        let ui = u.invert().unwrap();
        assert_eq!(ui, FpMatrix::from_i64(p3(), &[&[1, 2], &[0, 1]]));
        assert_eq!(u.mul(&ui), FpMatrix::identity(p3(), 2));

        let s = FpMatrix::from_i64(p3(), &[&[1, 2], &[2, 4]]);
        assert_eq!(s.invert(), Err(Error::Singular));
    }

    #[test]
    fn lex_compare_examples() {
        let a = FpMatrix::from_i64(p3(), &[&[0, 1], &[2, 0]]);
        let b = FpMatrix::from_i64(p3(), &[&[1, 0], &[0, 0]]);
        assert_eq!(lex_compare(&a, &a).unwrap(), Ordering::Equal);
        assert_eq!(lex_compare(&a, &b).unwrap(), Ordering::Less);
        // the zero matrix is lexically smallest
        let z = FpMatrix::zero(p3(), 2, 2);
        assert_eq!(lex_compare(&z, &a).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&z, &b).unwrap(), Ordering::Less);
        let c = FpMatrix::zero(p3(), 2, 3);
        assert!(lex_compare(&a, &c).is_err());
    }

    #[test]
    fn nullspace_examples() {
        let i3 = FpMatrix::identity(p3(), 3);
        assert_eq!(i3.left_nullspace().rows(), 0);

        let z = FpMatrix::zero(p3(), 2, 3);
        assert_eq!(z.left_nullspace().rows(), 2);

        // v (1,2) annihilates [[1,0],[1,0]] over GF(3); cross-check by
        // enumerating all 9 vectors.
        let a = FpMatrix::from_i64(p3(), &[&[1, 0], &[1, 0]]);
        let ns = a.left_nullspace();
        assert_eq!(ns.rows(), 1);
        let expected: Vec<RowVector> = VectorCounter::new(p3(), 2)
            .filter(|v| v.mul_mat(&a).is_zero())
            .collect();
        assert_eq!(expected.len(), 3);
        let sp = RowSpace::from_matrix(&ns);
        for v in expected {
            assert!(sp.contains(&v));
        }
    }

    #[test]
    fn solve_left_roundtrip() {
        let mut rng = Seed(11).rng();
        for _ in 0..100 {
            let a = FpMatrix::random(p3(), 3, 4, &mut rng);
            let v = RowVector::new(p3(), vec![1, 2, 0]);
            let b = v.mul_mat(&a);
            let sol = solve_left(&a, &b).expect("consistent by construction");
            for s in sol.iter(p3()).take(30) {
                assert_eq!(s.mul_mat(&a), b);
            }
        }
    }

    #[test]
    fn rowspace_intersection() {
        let p = p3();
        let a = RowSpace::from_matrix(&FpMatrix::from_i64(p, &[&[1, 0, 0], &[0, 1, 0]]));
        let b = RowSpace::from_matrix(&FpMatrix::from_i64(p, &[&[0, 1, 0], &[0, 0, 1]]));
        let i = a.intersect(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&RowVector::new(p, vec![0, 1, 0])));
    }

    proptest! {
        #[test]
        fn mul_associative(seed in 0u64..1000) {
            let p = p5();
            let mut rng = Seed(seed).rng();
            let a = FpMatrix::random(p, 3, 4, &mut rng);
            let b = FpMatrix::random(p, 4, 2, &mut rng);
            let c = FpMatrix::random(p, 2, 5, &mut rng);
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn transpose_laws(seed in 0u64..1000) {
            let p = p3();
            let mut rng = Seed(seed).rng();
            let a = FpMatrix::random(p, 3, 4, &mut rng);
            let b = FpMatrix::random(p, 4, 2, &mut rng);
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            prop_assert_eq!(a.mul(&b).transpose(), b.transpose().mul(&a.transpose()));
        }

        #[test]
        fn inverse_roundtrip(seed in 0u64..500, pv in prop::sample::select(vec![3u64, 5, 7])) {
            let p = Prime::new(pv).unwrap();
            let mut rng = Seed(seed).rng();
            let a = FpMatrix::random_invertible(p, 3, &mut rng);
            prop_assert_eq!(a.invert().unwrap().mul(&a), FpMatrix::identity(p, 3));
            prop_assert_eq!(a.mul(&a.invert().unwrap()), FpMatrix::identity(p, 3));
        }

        #[test]
        fn lex_total_order(seed in 0u64..500) {
            let p = p3();
            let mut rng = Seed(seed).rng();
            let a = FpMatrix::random(p, 2, 3, &mut rng);
            let b = FpMatrix::random(p, 2, 3, &mut rng);
            let c = FpMatrix::random(p, 2, 3, &mut rng);
            // antisymmetry
            let ab = lex_compare(&a, &b).unwrap();
            let ba = lex_compare(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.reverse());
            // transitivity
            if ab != Ordering::Greater && lex_compare(&b, &c).unwrap() != Ordering::Greater {
                prop_assert_ne!(lex_compare(&a, &c).unwrap(), Ordering::Greater);
            }
        }

        #[test]
        fn rank_invariance(seed in 0u64..500) {
            let p = p5();
            let mut rng = Seed(seed).rng();
            let a = FpMatrix::random(p, 3, 4, &mut rng);
            let pm = FpMatrix::random_invertible(p, 3, &mut rng);
            let qm = FpMatrix::random_invertible(p, 4, &mut rng);
            let r = a.rank();
            prop_assert_eq!(a.transpose().rank(), r);
            prop_assert_eq!(pm.mul(&a).mul(&qm).rank(), r);
        }
    }
}
