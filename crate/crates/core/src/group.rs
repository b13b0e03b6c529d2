//! Cayley-table groups, validation, the correspondence between p-groups of
//! class 2 and exponent p and skew-symmetric bilinear maps, and the
//! top-level isomorphism test.

use crate::error::{Error, Result};
use crate::gf::{FpMatrix, Prime, RowVector};
use crate::tensor::{tensor_isometry, transform, Decision, IsometryConfig, SkewTensor};
use crate::tuples::SkewMatrixTuple;
use std::collections::HashMap;

/// A finite group given by its multiplication table; index 0 is the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTable {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

/// Orders up to this bound get the full associativity triple loop; larger
/// tables use Light's test over a generating set.
const FULL_ASSOC_BOUND: usize = 512;

impl CayleyTable {
    pub fn new(order: usize, mul: Vec<usize>) -> Result<CayleyTable> {
        if order == 0 || mul.len() != order * order {
            return Err(Error::NotAGroup("table size does not match the order".into()));
        }
        if mul.iter().any(|&x| x >= order) {
            return Err(Error::NotAGroup("table entry out of range".into()));
        }
        let mut g = CayleyTable { order, mul, inv: vec![0; order] };
        // identity law at index 0
        for a in 0..order {
            if g.mul(0, a) != a || g.mul(a, 0) != a {
                return Err(Error::NotAGroup(format!("element 1 is not the identity at {a}")));
            }
        }
        // latin square
        for a in 0..order {
            let mut row = vec![false; order];
            let mut col = vec![false; order];
            for b in 0..order {
                let r = g.mul(a, b);
                let c = g.mul(b, a);
                if row[r] || col[c] {
                    return Err(Error::NotAGroup(format!("row or column {a} repeats a value")));
                }
                row[r] = true;
                col[c] = true;
            }
        }
        // inverses
        for a in 0..order {
            match (0..order).find(|&b| g.mul(a, b) == 0 && g.mul(b, a) == 0) {
                Some(b) => g.inv[a] = b,
                None => return Err(Error::NotAGroup(format!("element {a} has no inverse"))),
            }
        }
        // associativity
        if order <= FULL_ASSOC_BOUND {
            for a in 0..order {
                for b in 0..order {
                    let ab = g.mul(a, b);
                    for c in 0..order {
                        if g.mul(ab, c) != g.mul(a, g.mul(b, c)) {
                            return Err(Error::NotAGroup(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            // Light's test: checking a * (x * y) = (a * x) * y for generators
            // a suffices
            let gens = g.generating_sequence();
            for &a in &gens {
                for x in 0..order {
                    let xa = g.mul(x, a);
                    for y in 0..order {
                        if g.mul(xa, y) != g.mul(x, g.mul(a, y)) {
                            return Err(Error::NotAGroup(format!(
                                "associativity fails at ({x}, {a}, {y})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        let mut acc = 0;
        for _ in 0..e {
            acc = self.mul(acc, a);
        }
        acc
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(self.mul(a, b), self.inverse(a)), self.inverse(b))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Greedy generating sequence: each element extends the subgroup
    /// generated so far.
    pub fn generating_sequence(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut closure = vec![false; self.order];
        closure[0] = true;
        let mut covered = 1;
        while covered < self.order {
            let next = (1..self.order).find(|&a| !closure[a]).expect("not yet covered");
            gens.push(next);
            // regrow the closure
            let mut members: Vec<usize> = (0..self.order).filter(|&x| closure[x]).collect();
            let mut queue = vec![next];
            while let Some(x) = queue.pop() {
                if closure[x] {
                    continue;
                }
                closure[x] = true;
                covered += 1;
                members.push(x);
                for idx in 0..members.len() {
                    let y = members[idx];
                    for z in [self.mul(x, y), self.mul(y, x)] {
                        if !closure[z] {
                            queue.push(z);
                        }
                    }
                }
            }
        }
        gens
    }

    /// Relabels elements by a permutation fixing the identity.
    pub fn relabel(&self, perm: &[usize]) -> Result<CayleyTable> {
        if perm.len() != self.order || perm[0] != 0 {
            return Err(Error::NotAGroup("relabeling must fix the identity".into()));
        }
        let mut mul = vec![0usize; self.order * self.order];
        for a in 0..self.order {
            for b in 0..self.order {
                mul[perm[a] * self.order + perm[b]] = perm[self.mul(a, b)];
            }
        }
        CayleyTable::new(self.order, mul)
    }

    pub fn mul_table(&self) -> &[usize] {
        &self.mul
    }
}

/// The structural data of a verified p-group of class 2 and exponent p.
#[derive(Debug, Clone)]
pub struct PGroupData {
    pub p: Prime,
    /// order = p^k.
    pub k: usize,
    /// dim G / Z(G).
    pub n: usize,
    /// dim [G, G].
    pub m: usize,
    pub center: Vec<usize>,
    pub commutator_subgroup: Vec<usize>,
    /// Elements whose central cosets form a basis of G / Z(G).
    pub coset_reps: Vec<usize>,
    /// Basis elements of [G, G].
    pub comm_basis: Vec<usize>,
    quotient_coords: HashMap<usize, RowVector>,
    comm_coords: HashMap<usize, RowVector>,
    /// The commutator bilinear map on the chosen bases.
    pub skew_tuple: SkewMatrixTuple,
}

impl PGroupData {
    /// Coordinates of the central coset of `g` over the chosen basis.
    pub fn quotient_coords(&self, g: usize) -> &RowVector {
        &self.quotient_coords[&g]
    }

    /// Coordinates of a commutator-subgroup element, if it is one.
    pub fn comm_coords(&self, z: usize) -> Option<&RowVector> {
        self.comm_coords.get(&z)
    }

    pub fn tensor(&self) -> Result<SkewTensor> {
        SkewTensor::from_slices(self.p, self.skew_tuple.mats())
    }
}

fn factor_prime_power(order: usize) -> Option<(u64, usize)> {
    if order < 2 {
        return None;
    }
    let mut p = 2usize;
    while p * p <= order {
        if order % p == 0 {
            break;
        }
        p += 1;
    }
    let p = if order % p == 0 { p } else { order };
    let mut rest = order;
    let mut k = 0;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest == 1 {
        Some((p as u64, k))
    } else {
        None
    }
}

/// Verifies that `g` is a p-group of class exactly 2 and exponent p for an
/// odd prime p, and extracts the bilinear-map data.
pub fn verify_class2_exp_p(g: &CayleyTable) -> Result<PGroupData> {
    let order = g.order();
    let (praw, k) = factor_prime_power(order).ok_or(Error::NotPPower)?;
    let p = Prime::new(praw).map_err(|_| Error::NotPPower)?;
    let pe = praw as usize;
    for a in 1..order {
        if g.pow(a, pe) != 0 {
            return Err(Error::WrongExponent(a));
        }
    }
    if g.is_abelian() {
        return Err(Error::NotClass2("group is abelian".into()));
    }
    // center and commutator subgroup
    let center: Vec<usize> =
        (0..order).filter(|&z| (0..order).all(|a| g.mul(z, a) == g.mul(a, z))).collect();
    let is_central = {
        let mut v = vec![false; order];
        for &z in &center {
            v[z] = true;
        }
        v
    };
    let mut in_comm = vec![false; order];
    in_comm[0] = true;
    let mut members = vec![0usize];
    let mut queue: Vec<usize> = Vec::new();
    for a in 0..order {
        for b in 0..order {
            let c = g.commutator(a, b);
            if !in_comm[c] {
                queue.push(c);
            }
            while let Some(x) = queue.pop() {
                if in_comm[x] {
                    continue;
                }
                in_comm[x] = true;
                members.push(x);
                let snapshot = members.clone();
                for &y in &snapshot {
                    let z = g.mul(x, y);
                    if !in_comm[z] {
                        queue.push(z);
                    }
                }
            }
        }
    }
    let commutator_subgroup: Vec<usize> = (0..order).filter(|&x| in_comm[x]).collect();
    for &c in &commutator_subgroup {
        if !is_central[c] {
            return Err(Error::NotClass2(format!(
                "commutator element {c} is not central, so the class exceeds 2"
            )));
        }
    }

    // basis and coordinates for G / Z(G)
    let coset_of = |x: usize| -> usize {
        center.iter().map(|&z| g.mul(x, z)).min().expect("center nonempty")
    };
    let mut quotient_by_coset: HashMap<usize, RowVector> = HashMap::new();
    let mut coset_reps: Vec<usize> = Vec::new();
    quotient_by_coset.insert(coset_of(0), RowVector::zero(p, 0));
    let grow_coord = |v: &RowVector, extra: u64, p: Prime| -> RowVector {
        let mut data = v.as_slice().to_vec();
        data.push(extra % p.get());
        RowVector::new(p, data)
    };
    for x in 0..order {
        let cx = coset_of(x);
        if quotient_by_coset.contains_key(&cx) {
            continue;
        }
        // new independent direction
        let idx = coset_reps.len();
        coset_reps.push(x);
        let known: Vec<(usize, RowVector)> = quotient_by_coset
            .iter()
            .map(|(c, v)| (*c, grow_coord(v, 0, p)))
            .collect();
        quotient_by_coset.clear();
        for (c, v) in known {
            // multiply a representative of c by every power of x
            let rep = c;
            let mut cur = rep;
            for t in 0..pe {
                let coset = coset_of(cur);
                let mut coords = v.clone();
                coords.set(idx, t as u64);
                quotient_by_coset.entry(coset).or_insert(coords);
                cur = g.mul(cur, x);
            }
        }
    }
    let n = coset_reps.len();
    if quotient_by_coset.len() != pe.pow(n as u32) {
        return Err(Error::NotClass2(format!(
            "quotient by the center is not elementary abelian of rank {n}"
        )));
    }
    let mut quotient_coords: HashMap<usize, RowVector> = HashMap::new();
    for x in 0..order {
        quotient_coords.insert(x, quotient_by_coset[&coset_of(x)].clone());
    }

    // basis and coordinates for [G, G]
    let mut comm_coords: HashMap<usize, RowVector> = HashMap::new();
    let mut comm_basis: Vec<usize> = Vec::new();
    comm_coords.insert(0, RowVector::zero(p, 0));
    for &x in &commutator_subgroup {
        if comm_coords.contains_key(&x) {
            continue;
        }
        let idx = comm_basis.len();
        comm_basis.push(x);
        let known: Vec<(usize, RowVector)> =
            comm_coords.iter().map(|(e, v)| (*e, grow_coord(v, 0, p))).collect();
        comm_coords.clear();
        for (e, v) in known {
            let mut cur = e;
            for t in 0..pe {
                let mut coords = v.clone();
                coords.set(idx, t as u64);
                comm_coords.entry(cur).or_insert(coords);
                cur = g.mul(cur, x);
            }
        }
    }
    let m = comm_basis.len();
    if comm_coords.len() != commutator_subgroup.len() {
        return Err(Error::NotClass2("commutator subgroup is not elementary abelian".into()));
    }

    // the bilinear map on basis pairs
    let mut slices = vec![FpMatrix::zero(p, n, n); m];
    for i in 0..n {
        for j in 0..n {
            let c = g.commutator(coset_reps[i], coset_reps[j]);
            let coords = comm_coords
                .get(&c)
                .ok_or_else(|| Error::NotClass2("commutator outside [G, G]".into()))?;
            for (l, slice) in slices.iter_mut().enumerate() {
                slice.set(i, j, coords.get(l));
            }
        }
    }
    let skew_tuple = SkewMatrixTuple::new(p, n, slices)
        .map_err(|e| Error::NotClass2(format!("commutator map is not skew: {e}")))?;

    Ok(PGroupData {
        p,
        k,
        n,
        m,
        center,
        commutator_subgroup,
        coset_reps,
        comm_basis,
        quotient_coords,
        comm_coords,
        skew_tuple,
    })
}

/// Largest table the tensor-to-group construction will build.
pub const DEFAULT_GROUP_ORDER_CAP: usize = 100_000;

/// Builds the class-2 exponent-p group on F_p^n x F_p^m with product
/// (u, w)(u', w') = (u + u', w + w' + (1/2) b(u, u')), where b is the
/// tensor's bilinear map. Requires the nondegeneracy guaranteeing that the
/// center is exactly F_p^m.
pub fn group_from_tensor(t: &SkewTensor) -> Result<CayleyTable> {
    if !t.is_nondegenerate() {
        return Err(Error::Degenerate(
            "the bilinear map has a radical; its center would exceed F_p^m".into(),
        ));
    }
    group_from_tensor_allowing_degenerate(t)
}

/// Same construction without the nondegeneracy requirement; the center of
/// the result is then strictly larger than F_p^m. Still rejects the zero
/// map, which would produce an abelian group.
pub fn group_from_tensor_allowing_degenerate(t: &SkewTensor) -> Result<CayleyTable> {
    let p = t.p();
    let pe = p.get() as usize;
    let n = t.n();
    let m = t.m();
    if m == 0 || (0..m).all(|i| t.x_slice(i).is_zero()) {
        return Err(Error::Degenerate("zero bilinear map would give an abelian group".into()));
    }
    let order = pe
        .checked_pow((n + m) as u32)
        .filter(|&o| o <= DEFAULT_GROUP_ORDER_CAP)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!("group order p^{} exceeds the cap", n + m))
        })?;
    let half = p.half();
    let digits = |mut idx: usize, len: usize| -> Vec<u64> {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push((idx % pe) as u64);
            idx /= pe;
        }
        v
    };
    let pack = |v: &[u64]| -> usize {
        let mut idx = 0usize;
        for &d in v.iter().rev() {
            idx = idx * pe + d as usize;
        }
        idx
    };
    let mut mul = vec![0usize; order * order];
    for a in 0..order {
        let ua = digits(a % pe.pow(n as u32), n);
        let wa = digits(a / pe.pow(n as u32), m);
        for b in 0..order {
            let ub = digits(b % pe.pow(n as u32), n);
            let wb = digits(b / pe.pow(n as u32), m);
            let mut u = Vec::with_capacity(n);
            for i in 0..n {
                u.push(p.add(ua[i], ub[i]));
            }
            let mut w = Vec::with_capacity(m);
            for l in 0..m {
                // b_l(ua, ub) = ua X_l ub^T
                let mut pair = 0u64;
                for i in 0..n {
                    if ua[i] == 0 {
                        continue;
                    }
                    for j in 0..n {
                        pair = p.add(pair, p.mul(p.mul(ua[i], t.get(l, i, j)), ub[j]));
                    }
                }
                w.push(p.add(p.add(wa[l], wb[l]), p.mul(half, pair)));
            }
            let mut idx = pack(&w);
            idx = idx * pe.pow(n as u32) + pack(&u);
            mul[a * order + b] = idx;
        }
    }
    CayleyTable::new(order, mul)
}

/// The canonical isomorphism between the groups built from a tensor and
/// from its transform: (u, w) -> (u N0^{-1}, w M0^T) in coordinates,
/// returned as an element permutation.
pub fn constructed_isomorphism(
    t: &SkewTensor,
    n0: &FpMatrix,
    m0: &FpMatrix,
) -> Result<Vec<usize>> {
    let p = t.p();
    let pe = p.get() as usize;
    let n = t.n();
    let m = t.m();
    let n0i = n0.invert()?;
    let m0t = m0.transpose();
    let order = pe.pow((n + m) as u32);
    let digits = |mut idx: usize, len: usize| -> RowVector {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push((idx % pe) as u64);
            idx /= pe;
        }
        RowVector::new(p, v)
    };
    let pack = |v: &RowVector| -> usize {
        let mut idx = 0usize;
        for &d in v.as_slice().iter().rev() {
            idx = idx * pe + d as usize;
        }
        idx
    };
    let mut perm = vec![0usize; order];
    for a in 0..order {
        let u = digits(a % pe.pow(n as u32), n);
        let w = digits(a / pe.pow(n as u32), m);
        let u2 = u.mul_mat(&n0i);
        let w2 = w.mul_mat(&m0t);
        perm[a] = pack(&w2) * pe.pow(n as u32) + pack(&u2);
    }
    Ok(perm)
}

/// Computes transport matrices between the tensors recovered from two
/// groups related by an explicit isomorphism `phi` (an element map), so
/// that trans_{N, M}(tensor(dg)) = tensor(dh). The result is verified.
pub fn transport_from_isomorphism(
    dg: &PGroupData,
    dh: &PGroupData,
    phi: &[usize],
) -> Result<(FpMatrix, FpMatrix)> {
    if dg.p != dh.p || dg.n != dh.n || dg.m != dh.m {
        return Err(Error::ShapeMismatch("group data dimensions differ".into()));
    }
    let p = dg.p;
    let m = dg.m;
    // rows: images of the quotient basis and of the commutator basis
    let n_rows: Vec<RowVector> =
        dg.coset_reps.iter().map(|&u| dh.quotient_coords(phi[u]).clone()).collect();
    let n_change = FpMatrix::from_rows(p, &n_rows);
    let mut m_rows: Vec<RowVector> = Vec::with_capacity(m);
    for &z in &dg.comm_basis {
        let coords = dh
            .comm_coords(phi[z])
            .ok_or_else(|| Error::NotClass2("image of a commutator basis element".into()))?;
        m_rows.push(coords.clone());
    }
    let m_change = FpMatrix::from_rows(p, &m_rows);
    let n_wit = n_change.invert()?;
    let m_wit = m_change.transpose();
    let tg = dg.tensor()?;
    let th = dh.tensor()?;
    if transform(&tg, &n_wit, &m_wit)? != th {
        return Err(Error::ConstructionFailed(
            "transport derived from the isomorphism failed verification".into(),
        ));
    }
    Ok((n_wit, m_wit))
}

/// How the isomorphism test decides.
#[derive(Debug, Clone)]
pub enum GroupMode {
    /// Generating-set search when k <= (log2 p)^5, else the tensor pipeline.
    Auto(IsometryConfig),
    /// Generating-set search only.
    Oracle,
    /// Tensor pipeline only, with the given configuration.
    Pipeline(IsometryConfig),
}

#[derive(Debug, Clone)]
pub struct GroupIsoConfig {
    pub mode: GroupMode,
    /// Candidate budget for the generating-set search.
    pub oracle_budget: u64,
}

/// Decides isomorphism of two verified class-2 exponent-p groups. An
/// Inconclusive tensor decision is surfaced as an error, never coerced to a
/// no answer.
pub fn group_isomorphism(g: &CayleyTable, h: &CayleyTable, config: &GroupIsoConfig) -> Result<bool> {
    if g.order() != h.order() {
        return Ok(false);
    }
    let dg = verify_class2_exp_p(g)?;
    let dh = verify_class2_exp_p(h)?;
    if dg.n != dh.n || dg.m != dh.m {
        return Ok(false);
    }
    match &config.mode {
        GroupMode::Oracle => crate::oracle::group_isom_bruteforce(g, h, config.oracle_budget),
        GroupMode::Auto(cfg) => {
            let threshold = (dg.p.get() as f64).log2().powi(5);
            if (dg.k as f64) <= threshold {
                crate::oracle::group_isom_bruteforce(g, h, config.oracle_budget)
            } else {
                pipeline_decision(&dg, &dh, cfg)
            }
        }
        GroupMode::Pipeline(cfg) => pipeline_decision(&dg, &dh, cfg),
    }
}

fn pipeline_decision(dg: &PGroupData, dh: &PGroupData, cfg: &IsometryConfig) -> Result<bool> {
    let tg = dg.tensor()?;
    let th = dh.tensor()?;
    match tensor_isometry(&tg, &th, cfg)? {
        Decision::Isometric { .. } => Ok(true),
        Decision::NotIsometric => Ok(false),
        Decision::Inconclusive { reason } => Err(Error::Inconclusive(reason)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use crate::tensor::random_tensor;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    fn heisenberg27() -> CayleyTable {
        let t = SkewTensor::from_slices(p3(), &[FpMatrix::from_i64(p3(), &[&[0, 1], &[-1, 0]])])
            .unwrap();
        group_from_tensor(&t).unwrap()
    }

    #[test]
    fn trivial_and_cyclic_groups() {
        let e = CayleyTable::new(1, vec![0]).unwrap();
        assert_eq!(e.order(), 1);
        // Z_3
        let z3 = CayleyTable::new(3, vec![0, 1, 2, 1, 2, 0, 2, 0, 1]).unwrap();
        assert!(z3.is_abelian());
        assert!(matches!(verify_class2_exp_p(&z3), Err(Error::NotClass2(_))));
    }

    #[test]
    fn broken_table_has_witness() {
        // swap one entry of Z_3 to break the structure
        let mut mul = vec![0, 1, 2, 1, 2, 0, 2, 0, 1];
        mul.swap(4, 5);
        assert!(CayleyTable::new(3, mul).is_err());
    }

    #[test]
    fn z9_has_wrong_exponent() {
        let mut mul = vec![0usize; 81];
        for a in 0..9 {
            for b in 0..9 {
                mul[a * 9 + b] = (a + b) % 9;
            }
        }
        let z9 = CayleyTable::new(9, mul).unwrap();
        assert!(matches!(verify_class2_exp_p(&z9), Err(Error::WrongExponent(_))));
    }

    #[test]
    fn heisenberg_group_data() {
        let g = heisenberg27();
        assert_eq!(g.order(), 27);
        assert!(!g.is_abelian());
        let data = verify_class2_exp_p(&g).unwrap();
        assert_eq!((data.n, data.m, data.k), (2, 1, 3));
        let slice = &data.skew_tuple.mats()[0];
        assert!(!slice.is_zero());
        assert!(slice.is_skew());
    }

    #[test]
    fn exponent_p_holds_in_constructed_tables() {
        let t = random_tensor(p3(), 3, 2, Seed(9), true).unwrap();
        let g = group_from_tensor(&t).unwrap();
        let pe = 3usize;
        for a in 0..g.order() {
            assert_eq!(g.pow(a, pe), 0);
        }
    }

    #[test]
    fn degenerate_tensor_rejected() {
        let p = p3();
        let a = FpMatrix::from_i64(p, &[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        let t = SkewTensor::from_slices(p, &[a]).unwrap();
        assert!(matches!(group_from_tensor(&t), Err(Error::Degenerate(_))));
        // the permissive constructor accepts it
        let g = group_from_tensor_allowing_degenerate(&t).unwrap();
        assert_eq!(g.order(), 81);
        let data = verify_class2_exp_p(&g).unwrap();
        assert_eq!((data.n, data.m), (2, 1));
    }

    #[test]
    fn baer_roundtrip_small() {
        let t = random_tensor(p3(), 2, 1, Seed(10), true).unwrap();
        let g = group_from_tensor(&t).unwrap();
        let data = verify_class2_exp_p(&g).unwrap();
        assert_eq!((data.n, data.m), (2, 1));
        let recovered = data.tensor().unwrap();
        // recovered space must be isometric to the original; both are
        // nonzero multiples of the symplectic form here
        let s = crate::oracle::space_isometry_bruteforce(
            &recovered.x_space(),
            &t.x_space(),
            100_000,
        )
        .unwrap();
        assert!(s.is_some());
    }

    #[test]
    fn constructed_isomorphism_is_isomorphism() {
        let p = p3();
        let t = random_tensor(p, 2, 1, Seed(11), true).unwrap();
        let mut rng = Seed(12).rng();
        let n0 = FpMatrix::random_invertible(p, 2, &mut rng);
        let m0 = FpMatrix::random_invertible(p, 1, &mut rng);
        let t2 = transform(&t, &n0, &m0).unwrap();
        let g1 = group_from_tensor(&t).unwrap();
        let g2 = group_from_tensor(&t2).unwrap();
        let phi = constructed_isomorphism(&t, &n0, &m0).unwrap();
        for a in 0..g1.order() {
            for b in 0..g1.order() {
                assert_eq!(phi[g1.mul(a, b)], g2.mul(phi[a], phi[b]));
            }
        }
    }

    #[test]
    fn transport_recovery() {
        let p = p3();
        let t = random_tensor(p, 2, 1, Seed(13), true).unwrap();
        let mut rng = Seed(14).rng();
        let n0 = FpMatrix::random_invertible(p, 2, &mut rng);
        let m0 = FpMatrix::random_invertible(p, 1, &mut rng);
        let t2 = transform(&t, &n0, &m0).unwrap();
        let g1 = group_from_tensor(&t).unwrap();
        let g2 = group_from_tensor(&t2).unwrap();
        let phi = constructed_isomorphism(&t, &n0, &m0).unwrap();
        let d1 = verify_class2_exp_p(&g1).unwrap();
        let d2 = verify_class2_exp_p(&g2).unwrap();
        let (nw, mw) = transport_from_isomorphism(&d1, &d2, &phi).unwrap();
        assert_eq!(transform(&d1.tensor().unwrap(), &nw, &mw).unwrap(), d2.tensor().unwrap());
    }

    #[test]
    fn isomorphism_trivial_cases() {
        let g = heisenberg27();
        let cfg = GroupIsoConfig { mode: GroupMode::Oracle, oracle_budget: 10_000_000 };
        assert!(group_isomorphism(&g, &g, &cfg).unwrap());
    }
}
