//! Exact arithmetic in the cyclotomic field `Q(ζ_d) = Q[t]/Φ_d(t)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::matrix::IntMatrix;
use crate::poly::{cyclotomic, IntegerPolynomial};

/// Cached `Φ_d`.
pub fn cyclotomic_cached(d: u64) -> IntegerPolynomial {
    static CACHE: OnceLock<Mutex<HashMap<u64, IntegerPolynomial>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&d) {
        return p.clone();
    }
    let p = cyclotomic(d);
    cache.lock().unwrap().insert(d, p.clone());
    p
}

type Elem = Vec<BigRational>;

struct CyclotomicField {
    /// Monic modulus, lowest degree first.
    modulus: Vec<BigRational>,
    deg: usize,
}

fn trim(mut p: Elem) -> Elem {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_divrem(a: &Elem, b: &Elem) -> (Elem, Elem) {
    let b = trim(b.clone());
    let db = b.len() - 1;
    let mut r = trim(a.clone());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    let lead_inv = b[db].recip();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] * &lead_inv;
        for (i, bi) in b.iter().enumerate() {
            let t = &c * bi;
            r[k + i] -= t;
        }
        q[k] = c;
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    (trim(q), r)
}

fn poly_mul(a: &Elem, b: &Elem) -> Elem {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &Elem, b: &Elem) -> Elem {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

impl CyclotomicField {
    fn new(d: u64) -> Self {
        let phi = cyclotomic_cached(d);
        let modulus: Vec<BigRational> = phi.coeffs().iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let deg = modulus.len() - 1;
        CyclotomicField { modulus, deg }
    }

    fn reduce(&self, a: Elem) -> Elem {
        if a.len() <= self.deg {
            return trim(a);
        }
        poly_divrem(&a, &self.modulus).1
    }

    /// `ζ^k`.
    fn zeta_pow(&self, k: usize) -> Elem {
        let mut e = vec![BigRational::zero(); k + 1];
        e[k] = BigRational::one();
        self.reduce(e)
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.reduce(poly_mul(a, b))
    }

    fn inv(&self, a: &Elem) -> Elem {
        // Extended Euclid: track s with s·a ≡ r (mod Φ).
        let (mut r0, mut r1) = (self.modulus.clone(), trim(a.clone()));
        let (mut s0, mut s1): (Elem, Elem) = (Vec::new(), vec![BigRational::one()]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        assert!(!r1.is_empty(), "element not invertible in cyclotomic field");
        let c = r1[0].recip();
        self.reduce(s1.into_iter().map(|x| x * &c).collect())
    }
}

/// Nullity of `V − ζ̄·Vᵀ` over `Q(ζ_d)`, computed exactly. Galois conjugates
/// share the rank, so the answer depends only on `d`.
pub fn nullity_at_root(v: &IntMatrix, d: u64) -> usize {
    let n = v.rows();
    let field = CyclotomicField::new(d);
    let zbar = field.zeta_pow((d - 1) as usize);
    let int = |x: i64| -> Elem { trim(vec![BigRational::from_integer(BigInt::from(x))]) };
    let mut m: Vec<Vec<Elem>> = (0..n)
        .map(|i| (0..n).map(|j| poly_sub(&int(v[(i, j)]), &field.mul(&zbar, &int(v[(j, i)])))).collect())
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..n).find(|&r| !m[r][col].is_empty()) else {
            continue;
        };
        m.swap(piv, rank);
        let inv = field.inv(&m[rank][col]);
        let pivot_row: Vec<Elem> = m[rank].iter().map(|x| field.mul(x, &inv)).collect();
        for r in rank + 1..n {
            if m[r][col].is_empty() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..n {
                let t = field.mul(&f, &pivot_row[c]);
                m[r][c] = poly_sub(&m[r][c], &t);
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    n - rank
}
