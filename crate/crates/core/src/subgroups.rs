//! Subgroups of `(Z_{p^k})^N`.
//!
//! A subgroup is the image of a lattice `p^k·Z^N ⊆ L ⊆ Z^N`, and `L` has a
//! unique upper-triangular Hermite basis: row `i` has pivot `p^{e_i}` and
//! entries `0 ≤ a_ij < p^{e_j}` to its right. Enumeration builds these bases
//! from the last row up, keeping a row only if `p^k·e_i` stays in the span.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modular::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubgroupError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("target order {target} is not a power of {p}")]
    NotPowerOfP { target: u64, p: u64 },
    #[error("target order p^{t} exceeds the group order p^{max}")]
    TooLarge { t: u32, max: u32 },
    #[error("group order {p}^{exp} does not fit in 64 bits")]
    GroupTooLarge { p: u64, exp: u32 },
}

/// `(Z_{p^k})^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomocyclicGroup {
    pub p: u64,
    pub k: u32,
    pub n: usize,
}

impl HomocyclicGroup {
    pub fn new(p: u64, k: u32, n: usize) -> Result<Self, SubgroupError> {
        if !is_prime(p) {
            return Err(SubgroupError::NotPrime(p));
        }
        let exp = k * n as u32;
        if p.checked_pow(exp).is_none() {
            return Err(SubgroupError::GroupTooLarge { p, exp });
        }
        Ok(HomocyclicGroup { p, k, n })
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.k)
    }

    /// `log_p |G|`.
    pub fn order_exp(&self) -> u32 {
        self.k * self.n as u32
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.order_exp())
    }

    /// Element `index` in mixed-radix order (last coordinate fastest).
    pub fn element(&self, mut index: u64) -> Vec<u64> {
        let q = self.modulus();
        let mut x = vec![0; self.n];
        for c in x.iter_mut().rev() {
            *c = index % q;
            index /= q;
        }
        x
    }

    pub fn index_of(&self, x: &[u64]) -> u64 {
        let q = self.modulus();
        x.iter().fold(0, |acc, &c| acc * q + c)
    }
}

/// Subgroup in canonical Hermite form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    /// `e_i`: the pivot of row `i` is `p^{e_i}`; `e_i = k` means the row is zero mod `p^k`.
    pub exps: Vec<u32>,
    /// Full rows, entries in `[0, p^k)`.
    pub rows: Vec<Vec<u64>>,
}

impl Subgroup {
    /// `log_p |M|`.
    pub fn order_exp(&self, g: &HomocyclicGroup) -> u32 {
        g.order_exp() - self.exps.iter().sum::<u32>()
    }

    /// Nonzero rows, a canonical generating set.
    pub fn generators(&self, g: &HomocyclicGroup) -> Vec<Vec<u64>> {
        self.rows.iter().zip(&self.exps).filter(|(_, &e)| e < g.k).map(|(r, _)| r.clone()).collect()
    }

    pub fn contains(&self, g: &HomocyclicGroup, x: &[u64]) -> bool {
        let q = g.modulus();
        let mut t: Vec<u64> = x.iter().map(|&v| v % q).collect();
        for j in 0..g.n {
            if t[j] == 0 {
                continue;
            }
            let piv = g.p.pow(self.exps[j]);
            if self.exps[j] == g.k || !t[j].is_multiple_of(piv) {
                return false;
            }
            let c = t[j] / piv;
            for (tl, &rl) in t.iter_mut().zip(&self.rows[j]).skip(j) {
                *tl = (*tl + q - (c * rl) % q) % q;
            }
        }
        true
    }

    /// Every element exactly once: `Σ c_i·row_i` with `0 ≤ c_i < p^{k−e_i}`.
    pub fn elements(&self, g: &HomocyclicGroup) -> Vec<Vec<u64>> {
        let q = g.modulus();
        let mut out = vec![vec![0u64; g.n]];
        for (row, &e) in self.rows.iter().zip(&self.exps) {
            let range = g.p.pow(g.k - e);
            if range == 1 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * range as usize);
            for x in &out {
                for c in 0..range {
                    next.push(x.iter().zip(row).map(|(&a, &r)| (a + c * r) % q).collect());
                }
            }
            out = next;
        }
        out
    }
}

/// `p^t` as `t`, if `target` is a power of `p`.
pub fn log_p(target: u64, p: u64) -> Option<u32> {
    let (mut t, mut e) = (target, 0);
    if t == 0 {
        return None;
    }
    while t % p == 0 {
        t /= p;
        e += 1;
    }
    (t == 1).then_some(e)
}

pub fn enumerate_subgroups(g: &HomocyclicGroup, target_order: u64) -> Result<Arc<Vec<Subgroup>>, SubgroupError> {
    let t = log_p(target_order, g.p).ok_or(SubgroupError::NotPowerOfP { target: target_order, p: g.p })?;
    subgroups_of_order_exp(g, t)
}

/// All subgroups of order `p^t`, sorted canonically. Results are cached.
pub fn subgroups_of_order_exp(g: &HomocyclicGroup, t: u32) -> Result<Arc<Vec<Subgroup>>, SubgroupError> {
    if t > g.order_exp() {
        return Err(SubgroupError::TooLarge { t, max: g.order_exp() });
    }
    type Cache = Mutex<HashMap<(HomocyclicGroup, u32), Arc<Vec<Subgroup>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(*g, t)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_uncached(g, t));
    cache.lock().unwrap().insert((*g, t), v.clone());
    Ok(v)
}

fn enumerate_uncached(g: &HomocyclicGroup, t: u32) -> Vec<Subgroup> {
    let deficit = g.order_exp() - t;
    let mut out = Vec::new();
    let mut rows: Vec<Vec<u64>> = vec![Vec::new(); g.n];
    let mut exps = vec![0u32; g.n];
    build(g, g.n, deficit, &mut rows, &mut exps, &mut out);
    out.sort();
    out
}

/// Fills rows `i-1, i-2, …, 0`; `remaining` is the pivot exponent still to place.
fn build(g: &HomocyclicGroup, i: usize, remaining: u32, rows: &mut [Vec<u64>], exps: &mut [u32], out: &mut Vec<Subgroup>) {
    if i == 0 {
        if remaining == 0 {
            out.push(Subgroup { exps: exps.to_vec(), rows: rows.to_vec() });
        }
        return;
    }
    let row = i - 1;
    if remaining > g.k * i as u32 {
        return;
    }
    let q = g.modulus();
    for e in 0..=g.k.min(remaining) {
        exps[row] = e;
        let tail_ranges: Vec<u64> = (row + 1..g.n).map(|j| g.p.pow(exps[j])).collect();
        let mut tail = vec![0u64; g.n - row - 1];
        loop {
            // p^{k−e}·(0, tail) must lie in the span of the rows below.
            let mut r = vec![0u64; g.n];
            r[row] = g.p.pow(e) % q;
            r[row + 1..].copy_from_slice(&tail);
            let scaled: Vec<u64> = r.iter().map(|&v| (v * g.p.pow(g.k - e)) % q).collect();
            if in_span_below(g, exps, rows, row, &scaled) {
                rows[row] = r;
                build(g, row, remaining - e, rows, exps, out);
            }
            if !increment(&mut tail, &tail_ranges) {
                break;
            }
        }
    }
    rows[row] = Vec::new();
}

fn in_span_below(g: &HomocyclicGroup, exps: &[u32], rows: &[Vec<u64>], row: usize, x: &[u64]) -> bool {
    if x[row] != 0 {
        return false;
    }
    let q = g.modulus();
    let mut t = x.to_vec();
    for j in row + 1..g.n {
        if t[j] == 0 {
            continue;
        }
        let piv = g.p.pow(exps[j]);
        if exps[j] == g.k || !t[j].is_multiple_of(piv) {
            return false;
        }
        let c = t[j] / piv;
        for l in j..g.n {
            t[l] = (t[l] + q - (c * rows[j][l]) % q) % q;
        }
    }
    true
}

fn increment(digits: &mut [u64], ranges: &[u64]) -> bool {
    for (d, &r) in digits.iter_mut().zip(ranges).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// Number of subgroups of order `p^t` in `(Z_p)^N`.
pub fn gaussian_binomial(n: u32, t: u32, p: u64) -> u64 {
    if t > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..t {
        num *= (p as u128).pow(n - i) - 1;
        den *= (p as u128).pow(i + 1) - 1;
    }
    (num / den) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn g(p: u64, k: u32, n: usize) -> HomocyclicGroup {
        HomocyclicGroup::new(p, k, n).unwrap()
    }

    #[test]
    fn spec_counts() {
        let z3sq = g(3, 1, 2);
        let subs = enumerate_subgroups(&z3sq, 3).unwrap();
        assert_eq!(subs.len(), 4);
        let gens: Vec<_> = subs.iter().map(|s| s.generators(&z3sq)).collect();
        for v in [[1, 0], [0, 1], [1, 1], [1, 2]] {
            assert!(subs.iter().any(|s| s.contains(&z3sq, &v) && s.elements(&z3sq).len() == 3), "{v:?} in {gens:?}");
        }
        assert_eq!(enumerate_subgroups(&g(2, 1, 4), 4).unwrap().len(), 35);
        let triv = enumerate_subgroups(&g(3, 2, 3), 1).unwrap();
        assert_eq!(triv.len(), 1);
        assert_eq!(triv[0].elements(&g(3, 2, 3)), vec![vec![0, 0, 0]]);
        assert_eq!(enumerate_subgroups(&z3sq, 6), Err(SubgroupError::NotPowerOfP { target: 6, p: 3 }));
        assert_eq!(enumerate_subgroups(&z3sq, 27), Err(SubgroupError::TooLarge { t: 3, max: 2 }));
    }

    #[test]
    fn gaussian_binomial_counts_for_elementary_groups() {
        for (p, n) in [(2u64, 4usize), (3, 3), (3, 4), (5, 3)] {
            let grp = g(p, 1, n);
            for t in 0..=n as u32 {
                assert_eq!(subgroups_of_order_exp(&grp, t).unwrap().len() as u64, gaussian_binomial(n as u32, t, p), "p={p} n={n} t={t}");
            }
        }
    }

    #[test]
    fn elements_are_distinct_closed_and_member() {
        let grp = g(3, 2, 2);
        let q = grp.modulus();
        for t in 0..=4 {
            for s in subgroups_of_order_exp(&grp, t).unwrap().iter() {
                let els = s.elements(&grp);
                assert_eq!(els.len() as u64, 3u64.pow(t));
                let set: HashSet<_> = els.iter().cloned().collect();
                assert_eq!(set.len(), els.len());
                for a in &els {
                    assert!(s.contains(&grp, a));
                    for b in &els {
                        let c: Vec<u64> = a.iter().zip(b).map(|(x, y)| (x + y) % q).collect();
                        assert!(set.contains(&c));
                    }
                }
                let outside = (0..grp.order()).map(|i| grp.element(i)).filter(|x| !set.contains(x));
                assert!(outside.into_iter().all(|x| !s.contains(&grp, &x)));
            }
        }
    }

    #[test]
    fn cyclic_prime_power_has_one_subgroup_per_order() {
        let grp = g(3, 3, 1);
        for t in 0..=3 {
            assert_eq!(subgroups_of_order_exp(&grp, t).unwrap().len(), 1);
        }
    }

    #[test]
    fn index_round_trip() {
        let grp = g(3, 2, 3);
        for i in [0, 1, 80, 500, 728] {
            assert_eq!(grp.index_of(&grp.element(i)), i);
        }
    }
}
