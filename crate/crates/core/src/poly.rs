//! Integer polynomials in one variable `t`, cyclotomic polynomials, and exact
//! Alexander polynomial computation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::IntMatrix;
use crate::modular;

/// Polynomial with integer coefficients, stored lowest degree first with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntegerPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntegerPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i64`, if they all fit.
    pub fn coeffs_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    /// Division by a monic polynomial, returning `(quotient, remainder)`.
    pub fn div_rem_monic(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        assert!(divisor.coeffs[dd].is_one(), "divisor must be monic");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::new(Vec::new()), self.clone());
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * d;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// How many times the monic `factor` divides `self` (0 for the zero polynomial
    /// is meaningless, so it is rejected).
    pub fn multiplicity_of(&self, factor: &Self) -> u32 {
        assert!(!self.is_zero());
        let mut cur = self.clone();
        let mut m = 0;
        loop {
            let (q, r) = cur.div_rem_monic(factor);
            if !r.is_zero() {
                return m;
            }
            cur = q;
            m += 1;
        }
    }

    /// Removes factors of `t` and fixes the sign so the constant term is positive.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let shift = self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
        let mut coeffs: Vec<BigInt> = self.coeffs[shift..].to_vec();
        if coeffs[0].is_negative() {
            for c in &mut coeffs {
                *c = -c.clone();
            }
        }
        Self::new(coeffs)
    }

    /// True when the coefficient list reads the same in both directions.
    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }
}

impl fmt::Debug for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let show_mag = !mag.is_one() || i == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Möbius function.
fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Euler's totient.
pub fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The `d`-th cyclotomic polynomial, via `Φ_d = ∏_{e | d} (t^e − 1)^{μ(d/e)}`.
pub fn cyclotomic(d: u64) -> IntegerPolynomial {
    assert!(d >= 1);
    let binomial = |e: u64| {
        let mut c = vec![BigInt::zero(); e as usize + 1];
        c[0] = BigInt::from(-1);
        c[e as usize] = BigInt::one();
        IntegerPolynomial::new(c)
    };
    let divisors: Vec<u64> = (1..=d).filter(|e| d.is_multiple_of(*e)).collect();
    let mut num = IntegerPolynomial::one();
    for &e in &divisors {
        if mobius(d / e) == 1 {
            num = num.mul(&binomial(e));
        }
    }
    for &e in &divisors {
        if mobius(d / e) == -1 {
            let (q, r) = num.div_rem_monic(&binomial(e));
            debug_assert!(r.is_zero());
            num = q;
        }
    }
    num
}

/// `det(V − t·Vᵀ)` for a Seifert block, unnormalised.
///
/// Requires `det(V − Vᵀ) = ±1`. Writing `S = V − Vᵀ` and `A = S⁻¹V` gives
/// `V − tVᵀ = S((1−t)A + tI)`, so with `c(u) = det(uI + A) = Σ c_k u^k` we get
/// `det(V − tVᵀ) = det(S)·Σ c_k t^k (1−t)^{N−k}`. The characteristic polynomial
/// is computed modulo word-sized primes and lifted by CRT against a permanent
/// bound on the coefficients.
pub fn seifert_determinant(v: &IntMatrix) -> IntegerPolynomial {
    let n = v.rows();
    if n == 0 {
        return IntegerPolynomial::one();
    }
    // Coefficient 1-norm of det(V − tVᵀ) is bounded by the permanent of
    // (|V_ij| + |V_ji|), which is bounded by the product of its row sums.
    let mut bound = BigInt::one();
    for i in 0..n {
        let s: i64 = (0..n).map(|j| v[(i, j)].abs() + v[(j, i)].abs()).sum();
        bound *= BigInt::from(s.max(1));
    }
    let target = bound * 2 + 1;

    let mut residues: Vec<(u64, Vec<u64>)> = Vec::new();
    let mut modulus = BigInt::one();
    for p in modular::large_primes() {
        if modulus > target {
            break;
        }
        if let Some(c) = seifert_determinant_mod(v, p) {
            modulus *= BigInt::from(p);
            residues.push((p, c));
        }
    }
    let coeffs = modular::crt_symmetric(&residues, n + 1);
    IntegerPolynomial::new(coeffs)
}

fn seifert_determinant_mod(v: &IntMatrix, p: u64) -> Option<Vec<u64>> {
    let n = v.rows();
    let red = |x: i64| x.rem_euclid(p as i64) as u64;
    let s: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| red(v[(i, j)] - v[(j, i)])).collect()).collect();
    let vm: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| red(v[(i, j)])).collect()).collect();
    let (sinv, det_s) = modular::inverse_with_det(&s, p)?;
    let a = modular::mat_mul(&sinv, &vm, p);
    let neg_a: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| (p - x) % p).collect()).collect();
    // det(uI + A) = charpoly of −A.
    let c = modular::charpoly(neg_a, p);
    // Σ c_k t^k (1−t)^{n−k}
    let mut out = vec![0u64; n + 1];
    // powers of (1 - t)
    let mut one_minus: Vec<Vec<u64>> = vec![vec![1]];
    for k in 1..=n {
        let prev = &one_minus[k - 1];
        let mut next = vec![0u64; k + 1];
        for (i, &x) in prev.iter().enumerate() {
            next[i] = (next[i] + x) % p;
            next[i + 1] = (next[i + 1] + p - x) % p;
        }
        one_minus.push(next);
    }
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0 {
            continue;
        }
        for (i, &x) in one_minus[n - k].iter().enumerate() {
            out[k + i] = (out[k + i] + modular::mul_mod(ck, x, p)) % p;
        }
    }
    for x in &mut out {
        *x = modular::mul_mod(*x, det_s, p);
    }
    Some(out)
}

/// `|Δ(−1)|`, the order of the double branched cover homology.
pub fn abs_eval_at_minus_one(poly: &IntegerPolynomial) -> BigInt {
    poly.eval(&BigInt::from(-1)).abs()
}
