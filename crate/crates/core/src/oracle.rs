//! Brute-force ground-truth procedures for the acceptance tests: straight
//! transcriptions of the definitions, sharing nothing with the pipeline
//! beyond the base linear algebra, and deliberately unoptimized.

use crate::error::{Error, Result};
use crate::gf::{FpMatrix, RowSpace, VectorCounter};
use crate::group::CayleyTable;
use crate::lowrank::AttributeSet;
use crate::space::MatrixSpace;

/// Exhaustive search over GL(n, F_p) for S with S * A * S^T = B as spaces.
/// The witness is verified by canonical span comparison before returning;
/// a None answer is exhaustive.
pub fn space_isometry_bruteforce(
    a: &MatrixSpace,
    b: &MatrixSpace,
    budget: u64,
) -> Result<Option<FpMatrix>> {
    if a.p() != b.p() || a.col_dim() != b.col_dim() || a.row_dim() != b.row_dim() {
        return Err(Error::ShapeMismatch("spaces must share shape and field".into()));
    }
    if a.dim() != b.dim() {
        return Ok(None);
    }
    let p = a.p();
    let n = a.col_dim();
    let total = (p.get() as u128).checked_pow((n * n) as u32);
    match total {
        Some(t) if t <= budget as u128 => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "GL({n}, {}) scan above budget {budget}",
                p.get()
            )))
        }
    }
    for v in VectorCounter::new(p, n * n) {
        let s = FpMatrix::from_vectorized(p, n, n, &v);
        if !s.is_invertible() {
            continue;
        }
        let moved = a.transformed(&s, &s.transpose())?;
        if moved.same_space(b) {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Generating-set isomorphism search: enumerate images of a generating
/// sequence of `g` in `h` and check whether the partial correspondence
/// extends to an isomorphism by closure-driven propagation.
pub fn group_isom_bruteforce(g: &CayleyTable, h: &CayleyTable, budget: u64) -> Result<bool> {
    if g.order() != h.order() {
        return Ok(false);
    }
    let order = g.order();
    // order profile is an isomorphism invariant
    let profile = |t: &CayleyTable| {
        let mut v: Vec<usize> = (0..order).map(|a| t.element_order(a)).collect();
        v.sort_unstable();
        v
    };
    if profile(g) != profile(h) {
        return Ok(false);
    }
    let gens = g.generating_sequence();
    // cheap per-element invariants for pruning
    let inv = |t: &CayleyTable, a: usize| -> (usize, usize) {
        let ord = t.element_order(a);
        let centralizer = (0..order).filter(|&x| t.mul(a, x) == t.mul(x, a)).count();
        (ord, centralizer)
    };
    let g_inv: Vec<(usize, usize)> = (0..order).map(|a| inv(g, a)).collect();
    let h_inv: Vec<(usize, usize)> = (0..order).map(|a| inv(h, a)).collect();

    struct Dfs<'a> {
        g: &'a CayleyTable,
        h: &'a CayleyTable,
        gens: &'a [usize],
        g_inv: &'a [(usize, usize)],
        h_inv: &'a [(usize, usize)],
        tried: u64,
        budget: u64,
    }

    impl<'a> Dfs<'a> {
        /// Extends the partial map with gens[depth] -> image and closes it
        /// under products; None on contradiction.
        fn extend(
            &self,
            map: &[Option<usize>],
            used: &[bool],
            gen: usize,
            image: usize,
        ) -> Option<(Vec<Option<usize>>, Vec<bool>, Vec<usize>)> {
            let order = self.g.order();
            let mut map = map.to_vec();
            let mut used = used.to_vec();
            let mut domain: Vec<usize> =
                (0..order).filter(|&x| map[x].is_some()).collect();
            let mut queue = vec![(gen, image)];
            while let Some((x, y)) = queue.pop() {
                match map[x] {
                    Some(prev) if prev == y => continue,
                    Some(_) => return None,
                    None => {}
                }
                if used[y] {
                    return None;
                }
                map[x] = Some(y);
                used[y] = true;
                // close under products with the current domain
                let snapshot = domain.clone();
                domain.push(x);
                for &d in &snapshot {
                    let dm = map[d].expect("in domain");
                    queue.push((self.g.mul(x, d), self.h.mul(y, dm)));
                    queue.push((self.g.mul(d, x), self.h.mul(dm, y)));
                }
                queue.push((self.g.mul(x, x), self.h.mul(y, y)));
            }
            Some((map, used, domain))
        }

        fn search(
            &mut self,
            depth: usize,
            map: &[Option<usize>],
            used: &[bool],
        ) -> Result<bool> {
            let order = self.g.order();
            if depth == self.gens.len() {
                // full closure reached the whole group
                let total = map.iter().filter(|x| x.is_some()).count();
                if total != order {
                    return Ok(false);
                }
                for a in 0..order {
                    for b in 0..order {
                        let fa = map[a].unwrap();
                        let fb = map[b].unwrap();
                        if map[self.g.mul(a, b)].unwrap() != self.h.mul(fa, fb) {
                            return Ok(false);
                        }
                    }
                }
                return Ok(true);
            }
            let gen = self.gens[depth];
            for image in 0..order {
                if used[image] || self.h_inv[image] != self.g_inv[gen] {
                    continue;
                }
                self.tried += 1;
                if self.tried > self.budget {
                    return Err(Error::BudgetExceeded(format!(
                        "generator-image search tried more than {} candidates",
                        self.budget
                    )));
                }
                if let Some((map2, used2, _)) = self.extend(map, used, gen, image) {
                    if self.search(depth + 1, &map2, &used2)? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }

    let mut map = vec![None; order];
    let mut used = vec![false; order];
    map[0] = Some(0);
    used[0] = true;
    let mut dfs = Dfs { g, h, gens: &gens, g_inv: &g_inv, h_inv: &h_inv, tried: 0, budget };
    dfs.search(0, &map, &used)
}

/// Literal enumeration of all vectors for the kernel definitions.
pub fn kernel_bruteforce(
    space: &MatrixSpace,
    lambda: &AttributeSet,
    skew: bool,
) -> Result<RowSpace> {
    let p = space.p();
    let ambient = if skew { space.col_dim() } else { space.row_dim() };
    let total = (p.get() as u128).checked_pow(ambient as u32);
    match total {
        Some(t) if t <= 100_000_000 => {}
        _ => return Err(Error::BudgetExceeded(format!("p^{ambient} vector enumeration"))),
    }
    if skew && !space.is_skew() {
        return Err(Error::NotSkew("kernel_bruteforce skew flag on a non-skew space".into()));
    }
    let lspan = lambda.span();
    let mut acc = RowSpace::empty(p, ambient);
    for v in VectorCounter::new(p, ambient) {
        let images_ok = space.basis().iter().all(|b| lspan.contains(&v.mul_mat(b)));
        let orth_ok = !skew || lambda.vectors().iter().all(|x| x.dot(&v) == 0);
        if images_ok && orth_ok {
            acc.insert(&v);
        }
    }
    Ok(acc)
}

/// Brute-force span of {A in S : L A R = 0} over all p^dim members.
pub fn zero_subspace_bruteforce(
    space: &MatrixSpace,
    left: &FpMatrix,
    right: &FpMatrix,
) -> Result<MatrixSpace> {
    let total = space.size();
    match total {
        Some(t) if t <= 100_000_000 => {}
        _ => return Err(Error::BudgetExceeded("space member enumeration".into())),
    }
    let mut found = Vec::new();
    for (_, a) in space.elements() {
        if left.mul(&a).mul(right).is_zero() {
            found.push(a);
        }
    }
    MatrixSpace::span_from_generators(space.p(), space.row_dim(), space.col_dim(), &found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Prime;
    use crate::group::{group_from_tensor, CayleyTable};
    use crate::seed::Seed;
    use crate::tensor::SkewTensor;
    use rand::seq::SliceRandom;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    #[test]
    fn space_isometry_identity_and_dimension() {
        let p = p3();
        let j = FpMatrix::from_i64(p, &[&[0, 1], &[-1, 0]]);
        let s = MatrixSpace::span_from_generators(p, 2, 2, &[j.clone()]).unwrap();
        let found = space_isometry_bruteforce(&s, &s, 100_000).unwrap();
        assert!(found.is_some());

        let zero = MatrixSpace::zero_space(p, 2, 2);
        assert!(space_isometry_bruteforce(&s, &zero, 100_000).unwrap().is_none());

        // scalar multiples span the same space
        let s2 = MatrixSpace::span_from_generators(p, 2, 2, &[j.scale(2)]).unwrap();
        assert!(s2.same_space(&s));
        let w = space_isometry_bruteforce(&s, &s2, 100_000).unwrap().unwrap();
        assert!(w.is_invertible());
    }

    #[test]
    fn group_bruteforce_self_and_orders() {
        let t = SkewTensor::from_slices(p3(), &[FpMatrix::from_i64(p3(), &[&[0, 1], &[-1, 0]])])
            .unwrap();
        let g = group_from_tensor(&t).unwrap();
        assert!(group_isom_bruteforce(&g, &g, 10_000_000).unwrap());

        // Z_27 differs in order profile
        let mut mul = vec![0usize; 27 * 27];
        for a in 0..27 {
            for b in 0..27 {
                mul[a * 27 + b] = (a + b) % 27;
            }
        }
        let z27 = CayleyTable::new(27, mul).unwrap();
        assert!(!group_isom_bruteforce(&g, &z27, 10_000_000).unwrap());
    }

    #[test]
    fn group_bruteforce_relabeled() {
        let t = SkewTensor::from_slices(p3(), &[FpMatrix::from_i64(p3(), &[&[0, 1], &[-1, 0]])])
            .unwrap();
        let g = group_from_tensor(&t).unwrap();
        let mut perm: Vec<usize> = (1..27).collect();
        let mut rng = Seed(55).rng();
        perm.shuffle(&mut rng);
        let mut full = vec![0usize];
        full.extend(perm);
        let h = g.relabel(&full).unwrap();
        assert!(group_isom_bruteforce(&g, &h, 10_000_000).unwrap());
    }

    #[test]
    fn kernel_bruteforce_trivial_cases() {
        let p = p3();
        let j = FpMatrix::from_i64(p, &[&[0, 1], &[-1, 0]]);
        let s = MatrixSpace::span_from_generators(p, 2, 2, &[j]).unwrap();
        // full-basis attribute set, skew: only zero survives orthogonality
        let full = AttributeSet::new(
            p,
            2,
            vec![
                crate::gf::RowVector::new(p, vec![1, 0]),
                crate::gf::RowVector::new(p, vec![0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(kernel_bruteforce(&s, &full, true).unwrap().dim(), 0);
        // general with spanning set: everything
        assert_eq!(kernel_bruteforce(&s, &full, false).unwrap().dim(), 2);
    }
}
