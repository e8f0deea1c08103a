//! Independent oracles shared by the property and acceptance suites.
//!
//! None of these route through the library's exact machinery: signatures come
//! from floating-point eigenvalues, subgroup counts from brute force.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `(signature, nullity)` of `(1−ω)V + (1−ω̄)Vᵀ` at `ω = e^{2πix}` from the
/// eigenvalues of its real `2n × 2n` embedding.
pub fn eigen_signature(v: &[Vec<i64>], x: f64) -> (i64, usize) {
    let n = v.len();
    if n == 0 {
        return (0, 0);
    }
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x);
    let one = Complex64::new(1.0, 0.0);
    let h = |i: usize, j: usize| (one - w) * v[i][j] as f64 + (one - w.conj()) * v[j][i] as f64;
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h(i, j);
            m[(i, j)] = z.re;
            m[(i + n, j + n)] = z.re;
            m[(i, j + n)] = -z.im;
            m[(i + n, j)] = z.im;
        }
    }
    let scale = m.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-9 * scale * (2 * n) as f64;
    let eig = m.symmetric_eigen().eigenvalues;
    let pos = eig.iter().filter(|&&e| e > tol).count() as i64;
    let neg = eig.iter().filter(|&&e| e < -tol).count() as i64;
    let zero = 2 * n - (pos + neg) as usize;
    ((pos - neg) / 2, zero / 2)
}

fn element(index: usize, q: u64, n: usize) -> Vec<u64> {
    let mut i = index as u64;
    (0..n)
        .map(|_| {
            let c = i % q;
            i /= q;
            c
        })
        .collect()
}

fn index(x: &[u64], q: u64) -> usize {
    x.iter().rev().fold(0u64, |acc, &c| acc * q + c) as usize
}

fn add(x: &[u64], y: &[u64], q: u64) -> Vec<u64> {
    x.iter().zip(y).map(|(a, b)| (a + b) % q).collect()
}

/// Subgroup counts by order of `(Z_q)^n`, testing every subset for closure.
pub fn subset_subgroup_counts(q: u64, n: usize) -> BTreeMap<u64, usize> {
    let size = q.pow(n as u32) as usize;
    assert!(size <= 20, "subset oracle is only for tiny groups");
    let elems: Vec<Vec<u64>> = (0..size).map(|i| element(i, q, n)).collect();
    let mut counts = BTreeMap::new();
    for mask in 0u32..(1 << size) {
        if mask & 1 == 0 {
            continue;
        }
        let members: Vec<usize> = (0..size).filter(|i| mask >> i & 1 == 1).collect();
        let closed = members.iter().all(|&a| members.iter().all(|&b| mask >> index(&add(&elems[a], &elems[b], q), q) & 1 == 1));
        if closed {
            *counts.entry(members.len() as u64).or_insert(0) += 1;
        }
    }
    counts
}

/// All subgroups of `(Z_q)^n` as sorted element-index sets, found by
/// closing `{0}` under adjoining one element at a time.
pub fn closure_subgroups(q: u64, n: usize) -> Vec<Vec<usize>> {
    let size = q.pow(n as u32) as usize;
    let elems: Vec<Vec<u64>> = (0..size).map(|i| element(i, q, n)).collect();
    let trivial = vec![0usize];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([trivial.clone()]);
    let mut queue = VecDeque::from([trivial]);
    while let Some(h) = queue.pop_front() {
        let inside: HashSet<usize> = h.iter().copied().collect();
        for g in 0..size {
            if inside.contains(&g) {
                continue;
            }
            let mut set = inside.clone();
            let mut coset: Vec<Vec<u64>> = h.iter().map(|&i| elems[i].clone()).collect();
            loop {
                coset = coset.iter().map(|x| add(x, &elems[g], q)).collect();
                if set.contains(&index(&coset[0], q)) {
                    break;
                }
                set.extend(coset.iter().map(|x| index(x, q)));
            }
            let mut joined: Vec<usize> = set.into_iter().collect();
            joined.sort_unstable();
            if seen.insert(joined.clone()) {
                queue.push_back(joined);
            }
        }
    }
    seen.into_iter().collect()
}

pub fn closure_subgroup_counts(q: u64, n: usize) -> BTreeMap<u64, usize> {
    let mut counts = BTreeMap::new();
    for s in closure_subgroups(q, n) {
        *counts.entry(s.len() as u64).or_insert(0) += 1;
    }
    counts
}

/// Classical `(2, n)` torus knot signature at `x ∈ [0, 1/2]`, counting
/// strictly passed jumps at `(2j+1)/(2n)`; `None` on a jump.
pub fn torus_signature(n: i64, x: (i64, i64)) -> Option<i64> {
    let (a, b) = x;
    let m = n.abs();
    let mut s = 0;
    for j in 0..m {
        let lhs = 2 * m * a;
        let rhs = (2 * j + 1) * b;
        if lhs == rhs {
            return None;
        }
        if lhs > rhs && 2 * (2 * j + 1) < 2 * m {
            s += 2;
        }
    }
    Some(if n > 0 { -s } else { s })
}
