//! Text formats for matrices, spaces, tensors, Cayley tables, and skew
//! tuples. Writers emit a canonical form; parse(write(x)) round-trips
//! exactly.

use crate::error::{Error, Result};
use crate::gf::{FpMatrix, Prime};
use crate::group::CayleyTable;
use crate::space::MatrixSpace;
use crate::tensor::SkewTensor;
use crate::tuples::SkewMatrixTuple;

fn write_body(m: &FpMatrix, out: &mut String) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&m.get(i, j).to_string());
        }
        out.push('\n');
    }
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Tokens<'a> {
        Tokens { iter: text.split_whitespace() }
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let tok = self.iter.next().ok_or_else(|| Error::ParseError(format!("missing {what}")))?;
        tok.parse().map_err(|_| Error::ParseError(format!("bad {what}: {tok}")))
    }

    fn next_u64(&mut self, what: &str) -> Result<u64> {
        let tok = self.iter.next().ok_or_else(|| Error::ParseError(format!("missing {what}")))?;
        tok.parse().map_err(|_| Error::ParseError(format!("bad {what}: {tok}")))
    }

    fn entries(&mut self, p: Prime, count: usize, what: &str) -> Result<Vec<u64>> {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            let e = self.next_u64(what)?;
            if e >= p.get() {
                return Err(Error::ParseError(format!("entry {e} not reduced mod {}", p.get())));
            }
            v.push(e);
        }
        Ok(v)
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some(tok) => Err(Error::ParseError(format!("trailing data: {tok}"))),
        }
    }
}

/// "p rows cols" then the entries, row by row.
pub fn write_matrix(m: &FpMatrix) -> String {
    let mut out = format!("{} {} {}\n", m.p().get(), m.rows(), m.cols());
    write_body(m, &mut out);
    out
}

pub fn parse_matrix(text: &str) -> Result<FpMatrix> {
    let mut t = Tokens::new(text);
    let p = Prime::new(t.next_u64("p")?)?;
    let rows = t.next_usize("row count")?;
    let cols = t.next_usize("column count")?;
    let data = t.entries(p, rows * cols, "matrix entry")?;
    t.finish()?;
    Ok(FpMatrix::from_vec(p, rows, cols, data))
}

/// "p m n d" then d matrix bodies of shape m x n.
pub fn write_space(s: &MatrixSpace) -> String {
    let mut out = format!("{} {} {} {}\n", s.p().get(), s.row_dim(), s.col_dim(), s.dim());
    for b in s.basis() {
        write_body(b, &mut out);
    }
    out
}

pub fn parse_space(text: &str) -> Result<MatrixSpace> {
    let mut t = Tokens::new(text);
    let p = Prime::new(t.next_u64("p")?)?;
    let m = t.next_usize("row dimension")?;
    let n = t.next_usize("column dimension")?;
    let d = t.next_usize("space dimension")?;
    let mut mats = Vec::with_capacity(d);
    for _ in 0..d {
        let data = t.entries(p, m * n, "basis entry")?;
        mats.push(FpMatrix::from_vec(p, m, n, data));
    }
    t.finish()?;
    let space = MatrixSpace::span_from_generators(p, m, n, &mats)?;
    if space.dim() != d {
        return Err(Error::ParseError(format!(
            "declared dimension {d} but the basis spans {}",
            space.dim()
        )));
    }
    Ok(space)
}

/// "p m n" then m blocks of n lines with n entries; rejects non-skew data.
pub fn write_tensor(t: &SkewTensor) -> String {
    let mut out = format!("{} {} {}\n", t.p().get(), t.m(), t.n());
    for i in 0..t.m() {
        write_body(&t.x_slice(i), &mut out);
    }
    out
}

pub fn parse_tensor(text: &str) -> Result<SkewTensor> {
    let mut t = Tokens::new(text);
    let p = Prime::new(t.next_u64("p")?)?;
    let m = t.next_usize("slice count")?;
    let n = t.next_usize("slice dimension")?;
    let data = t.entries(p, m * n * n, "tensor entry")?;
    t.finish()?;
    SkewTensor::new(p, m, n, data)
}

/// "order" then `order` rows of 1-based element indices; element 1 must be
/// the identity.
pub fn write_cayley(g: &CayleyTable) -> String {
    let order = g.order();
    let mut out = format!("{order}\n");
    for a in 0..order {
        for b in 0..order {
            if b > 0 {
                out.push(' ');
            }
            out.push_str(&(g.mul(a, b) + 1).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_cayley(text: &str) -> Result<CayleyTable> {
    let mut t = Tokens::new(text);
    let order = t.next_usize("order")?;
    if order == 0 {
        return Err(Error::ParseError("order must be positive".into()));
    }
    let mut mul = Vec::with_capacity(order * order);
    for _ in 0..order * order {
        let e = t.next_usize("table entry")?;
        if e == 0 || e > order {
            return Err(Error::ParseError(format!(
                "entry {e} outside the 1-based range 1..={order}"
            )));
        }
        mul.push(e - 1);
    }
    t.finish()?;
    CayleyTable::new(order, mul)
}

/// "p dim k" then k matrix bodies; members must be skew.
pub fn write_tuple(t: &SkewMatrixTuple) -> String {
    let mut out = format!("{} {} {}\n", t.p().get(), t.n(), t.len());
    for m in t.mats() {
        write_body(m, &mut out);
    }
    out
}

pub fn parse_tuple(text: &str) -> Result<SkewMatrixTuple> {
    let mut t = Tokens::new(text);
    let p = Prime::new(t.next_u64("p")?)?;
    let dim = t.next_usize("member dimension")?;
    let k = t.next_usize("member count")?;
    let mut mats = Vec::with_capacity(k);
    for _ in 0..k {
        let data = t.entries(p, dim * dim, "tuple entry")?;
        mats.push(FpMatrix::from_vec(p, dim, dim, data));
    }
    t.finish()?;
    SkewMatrixTuple::new(p, dim, mats)
}

/// Concatenated matrices, each with its own header; used for witness files.
pub fn write_matrices(mats: &[FpMatrix]) -> String {
    mats.iter().map(write_matrix).collect()
}

pub fn parse_matrices(text: &str) -> Result<Vec<FpMatrix>> {
    let mut t = Tokens::new(text);
    let mut out = Vec::new();
    loop {
        let Ok(pv) = t.next_u64("p") else {
            break;
        };
        let p = Prime::new(pv)?;
        let rows = t.next_usize("row count")?;
        let cols = t.next_usize("column count")?;
        let data = t.entries(p, rows * cols, "matrix entry")?;
        out.push(FpMatrix::from_vec(p, rows, cols, data));
    }
    Ok(out)
}
