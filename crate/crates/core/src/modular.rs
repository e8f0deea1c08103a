//! Word-size modular arithmetic: primes, matrix inversion, Hessenberg
//! characteristic polynomials and CRT lifting.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes below 2^62 in decreasing order.
pub fn large_primes() -> impl Iterator<Item = u64> {
    let mut cand = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while !is_prime(cand) {
            cand -= 2;
        }
        let p = cand;
        cand -= 2;
        Some(p)
    })
}

/// Inverse and determinant of a square matrix mod `p`; `None` if singular.
pub fn inverse_with_det(a: &[Vec<u64>], p: u64) -> Option<(Vec<Vec<u64>>, u64)> {
    let n = a.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let mut det = 1u64;
    for col in 0..n {
        let piv = (col..n).find(|&r| m[r][col] != 0)?;
        if piv != col {
            m.swap(piv, col);
            det = (p - det) % p;
        }
        det = mul_mod(det, m[col][col], p);
        let inv = inv_mod(m[col][col], p);
        for x in &mut m[col] {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - mul_mod(f, y, p)) % p;
            }
        }
    }
    let inv = m.into_iter().map(|r| r[n..].to_vec()).collect();
    Some((inv, det))
}

pub fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0u64; m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = (out[i][j] + mul_mod(x, b[l][j], p)) % p;
            }
        }
    }
    out
}

/// Characteristic polynomial `det(xI − A)` mod `p`, lowest degree first,
/// via reduction to upper Hessenberg form.
pub fn charpoly(mut h: Vec<Vec<u64>>, p: u64) -> Vec<u64> {
    let n = h.len();
    let sub = |a: u64, b: u64| (a + p - b) % p;
    for m in 1..n.saturating_sub(1) {
        let Some(i) = (m..n).find(|&i| h[i][m - 1] != 0) else {
            continue;
        };
        if i != m {
            h.swap(i, m);
            for row in h.iter_mut() {
                row.swap(i, m);
            }
        }
        let inv = inv_mod(h[m][m - 1], p);
        for j in m + 1..n {
            let u = mul_mod(h[j][m - 1], inv, p);
            if u == 0 {
                continue;
            }
            for c in 0..n {
                let t = mul_mod(u, h[m][c], p);
                h[j][c] = sub(h[j][c], t);
            }
            for row in h.iter_mut() {
                let t = mul_mod(u, row[j], p);
                row[m] = (row[m] + t) % p;
            }
        }
    }
    // p_{m+1} = (x − h_mm) p_m − Σ_{i<m} h_im (∏_{j=i+1}^{m} h_{j,j−1}) p_i
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for m in 0..n {
        let pm = &polys[m];
        let mut next = vec![0u64; m + 2];
        for (k, &c) in pm.iter().enumerate() {
            next[k + 1] = (next[k + 1] + c) % p;
            next[k] = sub(next[k], mul_mod(h[m][m], c, p));
        }
        let mut t = 1u64;
        for i in (0..m).rev() {
            t = mul_mod(t, h[i + 1][i], p);
            let f = mul_mod(h[i][m], t, p);
            if f == 0 {
                continue;
            }
            for (k, &c) in polys[i].iter().enumerate() {
                next[k] = sub(next[k], mul_mod(f, c, p));
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// Lifts coefficient vectors given modulo several primes to symmetric integer
/// representatives.
pub fn crt_symmetric(residues: &[(u64, Vec<u64>)], len: usize) -> Vec<BigInt> {
    let mut values = vec![BigInt::zero(); len];
    let mut modulus = BigInt::one();
    for (p, res) in residues {
        let pb = BigInt::from(*p);
        let m_mod_p = (&modulus % &pb).to_u64_digits().1.first().copied().unwrap_or(0);
        let m_inv = inv_mod(m_mod_p, *p);
        for (v, &r) in values.iter_mut().zip(res) {
            let v_mod_p = {
                let x = ((&*v % &pb) + &pb) % &pb;
                x.to_u64_digits().1.first().copied().unwrap_or(0)
            };
            let delta = mul_mod((r + p - v_mod_p) % p, m_inv, *p);
            *v += &modulus * BigInt::from(delta);
        }
        modulus *= pb;
    }
    let half = &modulus / 2;
    for v in &mut values {
        if *v > half {
            *v -= &modulus;
        }
    }
    values
}
