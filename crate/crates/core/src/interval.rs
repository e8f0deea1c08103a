//! Interval arithmetic for certified inertia of Hermitian matrices.
//!
//! Two back ends share the [`IntervalContext`] interface: hardware `f64`
//! intervals with one-ulp outward widening after every operation, and
//! fixed-point intervals over `BigInt` at a chosen number of fractional bits.
//! The signature engine starts with `f64` and escalates precision only when a
//! pivot cannot be separated from zero.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::matrix::IntMatrix;

/// Operations needed by interval LDL* factorisation.
pub trait Interval: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// `None` when the divisor contains zero.
    fn div(&self, o: &Self) -> Option<Self>;
    fn sqr(&self) -> Self;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// Lower bound on the distance from zero, as a float (0 if zero is inside).
    fn clearance(&self) -> f64;
}

/// Factory for intervals at a fixed precision.
pub trait IntervalContext {
    type Value: Interval;
    fn int(&self, v: i64) -> Self::Value;
    /// Encloses `2^-e`.
    fn pow2_neg(&self, e: u32) -> Self::Value;
    /// Encloses `(cos 2πj/p, sin 2πj/p)`.
    fn cos_sin_2pi(&self, j: u64, p: u64) -> (Self::Value, Self::Value);
}

// ---------------------------------------------------------------------------
// f64 intervals

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64Interval {
    pub lo: f64,
    pub hi: f64,
}

impl F64Interval {
    fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return F64Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
        }
        F64Interval { lo, hi }
    }

    fn widened(lo: f64, hi: f64) -> Self {
        Self::new(lo.next_down(), hi.next_up())
    }
}

impl Interval for F64Interval {
    fn add(&self, o: &Self) -> Self {
        Self::widened(self.lo + o.lo, self.hi + o.hi)
    }

    fn sub(&self, o: &Self) -> Self {
        Self::widened(self.lo - o.hi, self.hi - o.lo)
    }

    fn mul(&self, o: &Self) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        if c.iter().any(|x| x.is_nan()) {
            return Self::new(f64::NAN, f64::NAN);
        }
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi)
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return None;
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        if c.iter().any(|x| x.is_nan()) {
            return None;
        }
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self::widened(lo, hi))
    }

    fn sqr(&self) -> Self {
        let (a, b) = (self.lo.abs(), self.hi.abs());
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Self::new(0.0, (a.max(b) * a.max(b)).next_up())
        } else {
            let (m, n) = (a.min(b), a.max(b));
            Self::new((m * m).next_down().max(0.0), (n * n).next_up())
        }
    }

    fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    fn clearance(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }
}

/// Hardware double precision.
pub struct F64Context;

impl IntervalContext for F64Context {
    type Value = F64Interval;

    fn int(&self, v: i64) -> F64Interval {
        let x = v as f64;
        if x as i64 == v {
            F64Interval::new(x, x)
        } else {
            F64Interval::widened(x, x)
        }
    }

    fn pow2_neg(&self, e: u32) -> F64Interval {
        let x = 2f64.powi(-(e as i32));
        F64Interval::new(x, x)
    }

    fn cos_sin_2pi(&self, j: u64, p: u64) -> (F64Interval, F64Interval) {
        let j = j % p;
        // Exact values at the quarter points avoid spurious width.
        if j == 0 {
            return (self.int(1), self.int(0));
        }
        if 2 * j == p {
            return (self.int(-1), self.int(0));
        }
        if 4 * j == p {
            return (self.int(0), self.int(1));
        }
        if 4 * j == 3 * p {
            return (self.int(0), self.int(-1));
        }
        let theta = std::f64::consts::TAU * (j as f64) / (p as f64);
        // Argument error is a few ulps of 2π; libm cos/sin are within one ulp.
        const SLACK: f64 = 1e-14;
        let (s, c) = theta.sin_cos();
        let enclose = |v: f64| F64Interval::new((v - SLACK).max(-1.0), (v + SLACK).min(1.0));
        (enclose(c), enclose(s))
    }
}

// ---------------------------------------------------------------------------
// Fixed-point BigInt intervals: value = m · 2^-prec.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedInterval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl FixedInterval {
    fn scale(&self) -> BigInt {
        BigInt::one() << self.prec
    }

    fn exact(m: BigInt, prec: u32) -> Self {
        FixedInterval { lo: m.clone(), hi: m, prec }
    }

    fn to_f64(m: &BigInt, prec: u32) -> f64 {
        // Approximate conversion for pivot ranking only.
        let bits = m.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (m >> shift as usize).to_f64().unwrap_or(0.0);
        top * 2f64.powi((shift - prec as i64) as i32)
    }

    pub fn lower_f64(&self) -> f64 {
        Self::to_f64(&self.lo, self.prec)
    }

    pub fn upper_f64(&self) -> f64 {
        Self::to_f64(&self.hi, self.prec)
    }

    fn neg(&self) -> Self {
        FixedInterval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    fn mul_int(&self, k: i64) -> Self {
        let k = BigInt::from(k);
        let (a, b) = (&self.lo * &k, &self.hi * &k);
        if k.is_negative() {
            FixedInterval { lo: b, hi: a, prec: self.prec }
        } else {
            FixedInterval { lo: a, hi: b, prec: self.prec }
        }
    }

    fn div_int(&self, k: u64) -> Self {
        let k = BigInt::from(k);
        FixedInterval { lo: floor_div(&self.lo, &k), hi: ceil_div(&self.hi, &k), prec: self.prec }
    }

    /// Widens by `e` units in the last place on each side.
    fn widen(&self, e: &BigInt) -> Self {
        FixedInterval { lo: &self.lo - e, hi: &self.hi + e, prec: self.prec }
    }

    fn upper_abs(&self) -> BigInt {
        self.lo.abs().max(self.hi.abs())
    }
}

impl Interval for FixedInterval {
    fn add(&self, o: &Self) -> Self {
        FixedInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    fn sub(&self, o: &Self) -> Self {
        FixedInterval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, prec: self.prec }
    }

    fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap();
        let hi = c.iter().max().unwrap();
        let s = self.scale();
        FixedInterval { lo: floor_div(lo, &s), hi: ceil_div(hi, &s), prec: self.prec }
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if !o.lo.is_positive() && !o.hi.is_negative() {
            return None;
        }
        let s = self.scale();
        let num = [&self.lo * &s, &self.hi * &s];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for n in &num {
            for d in [&o.lo, &o.hi] {
                let f = floor_div(n, d);
                let c = ceil_div(n, d);
                lo = Some(lo.map_or(f.clone(), |x: BigInt| x.min(f)));
                hi = Some(hi.map_or(c.clone(), |x: BigInt| x.max(c)));
            }
        }
        Some(FixedInterval { lo: lo.unwrap(), hi: hi.unwrap(), prec: self.prec })
    }

    fn sqr(&self) -> Self {
        let s = self.scale();
        let (a, b) = (self.lo.abs(), self.hi.abs());
        let (m, n) = (a.clone().min(b.clone()), a.max(b));
        let lo = if !self.lo.is_positive() && !self.hi.is_negative() { BigInt::zero() } else { &m * &m };
        FixedInterval { lo: floor_div(&lo, &s), hi: ceil_div(&(&n * &n), &s), prec: self.prec }
    }

    fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    fn clearance(&self) -> f64 {
        if self.is_positive() {
            self.lower_f64()
        } else if self.is_negative() {
            -self.upper_f64()
        } else {
            0.0
        }
    }
}

/// Fixed-point context with `prec` fractional bits.
pub struct FixedContext {
    pub prec: u32,
}

impl FixedContext {
    /// Encloses `atan(1/q)` for an integer `q ≥ 2` by its alternating series.
    fn atan_inv(&self, q: u64) -> FixedInterval {
        let s = BigInt::one() << self.prec;
        let q = BigInt::from(q);
        let q2 = &q * &q;
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        let mut qpow = q.clone();
        let mut n: u64 = 0;
        loop {
            let den = &qpow * BigInt::from(2 * n + 1);
            let t_lo = floor_div(&s, &den);
            let t_hi = ceil_div(&s, &den);
            if t_hi <= BigInt::one() {
                // Remaining tail is bounded by this term.
                lo -= &t_hi;
                hi += &t_hi;
                break;
            }
            if n.is_multiple_of(2) {
                lo += &t_lo;
                hi += &t_hi;
            } else {
                lo -= &t_hi;
                hi -= &t_lo;
            }
            qpow *= &q2;
            n += 1;
        }
        FixedInterval { lo, hi, prec: self.prec }
    }

    pub fn pi(&self) -> FixedInterval {
        // Machin: π = 16 atan(1/5) − 4 atan(1/239)
        self.atan_inv(5).mul_int(16).sub(&self.atan_inv(239).mul_int(4))
    }

    /// Taylor series of cos or sin at `theta` with `0 ≤ theta ≤ 4`.
    fn taylor(&self, theta: &FixedInterval, odd: bool) -> FixedInterval {
        let one = FixedInterval::exact(BigInt::one() << self.prec, self.prec);
        let theta2 = theta.sqr();
        let mut term = if odd { theta.clone() } else { one };
        let mut sum = term.clone();
        let mut k: u64 = if odd { 1 } else { 0 };
        let mut sign = 1i64;
        loop {
            term = term.mul(&theta2).div_int((k + 1) * (k + 2));
            k += 2;
            sign = -sign;
            // The series alternates with decreasing terms once k² > θ², so the tail
            // is bounded by the magnitude of the current term.
            if term.upper_abs() <= BigInt::from(2) && (k * k) as f64 > 16.0 {
                return sum.widen(&term.upper_abs());
            }
            sum = if sign > 0 { sum.add(&term) } else { sum.sub(&term) };
        }
    }
}

impl IntervalContext for FixedContext {
    type Value = FixedInterval;

    fn int(&self, v: i64) -> FixedInterval {
        FixedInterval::exact(BigInt::from(v) << self.prec, self.prec)
    }

    fn pow2_neg(&self, e: u32) -> FixedInterval {
        if e <= self.prec {
            FixedInterval::exact(BigInt::one() << (self.prec - e), self.prec)
        } else {
            FixedInterval { lo: BigInt::zero(), hi: BigInt::one(), prec: self.prec }
        }
    }

    fn cos_sin_2pi(&self, j: u64, p: u64) -> (FixedInterval, FixedInterval) {
        let j = j % p;
        // Reduce to an angle in [0, π/2] and fix signs by quadrant.
        let (quadrant, jr, pr) = {
            let (num, den) = (4 * j, p); // angle = (num/den) · π/2
            let q = num / den;
            let rem = num % den;
            (q, rem, den)
        };
        // theta = (π/2) · jr / pr ∈ [0, π/2)
        let theta = self.pi().mul_int(jr as i64).div_int(2 * pr);
        let c = self.taylor(&theta, false);
        let s = self.taylor(&theta, true);
        match quadrant {
            0 => (c, s),
            1 => (s.neg(), c),
            2 => (c.neg(), s.neg()),
            _ => (s, c.neg()),
        }
    }
}

// ---------------------------------------------------------------------------
// Hermitian inertia

#[derive(Clone)]
struct Complex<R> {
    re: R,
    im: R,
}

/// Counts `(negative, positive)` eigenvalues of `H − shift·I`, where
/// `H = (1−ω)V + (1−ω̄)Vᵀ` and `ω = cos + i·sin` are given as enclosures.
///
/// Uses LDL* with symmetric diagonal pivoting (a congruence, so inertia is
/// preserved). Returns `None` when some pivot cannot be separated from zero.
pub fn shifted_inertia<C: IntervalContext>(
    ctx: &C,
    v: &IntMatrix,
    cos: &C::Value,
    sin: &C::Value,
    shift: &C::Value,
) -> Option<(usize, usize)> {
    let n = v.rows();
    let one_minus_c = ctx.int(1).sub(cos);
    let mut a: Vec<Vec<Complex<C::Value>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let re = one_minus_c.mul(&ctx.int(v[(i, j)] + v[(j, i)]));
                    let im = sin.mul(&ctx.int(v[(j, i)] - v[(i, j)]));
                    if i == j {
                        Complex { re: re.sub(shift), im: ctx.int(0) }
                    } else {
                        Complex { re, im }
                    }
                })
                .collect()
        })
        .collect();
    let (mut neg, mut pos) = (0, 0);
    for k in 0..n {
        let (best, clearance) = (k..n)
            .map(|i| (i, a[i][i].re.clearance()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if clearance <= 0.0 {
            return None;
        }
        if best != k {
            a.swap(best, k);
            for row in a.iter_mut() {
                row.swap(best, k);
            }
        }
        let d = a[k][k].re.clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // l_i = a_ik / d
        let l: Vec<Option<Complex<C::Value>>> = (k + 1..n)
            .map(|i| Some(Complex { re: a[i][k].re.div(&d)?, im: a[i][k].im.div(&d)? }))
            .collect();
        for (ii, i) in (k + 1..n).enumerate() {
            let li = l[ii].as_ref()?;
            // diagonal: a_ii -= |a_ik|² / d = l_i · conj(a_ik) (real)
            let mag = a[i][k].re.sqr().add(&a[i][k].im.sqr());
            let upd = mag.div(&d)?;
            a[i][i].re = a[i][i].re.sub(&upd);
            for j in i + 1..n {
                // a_ij -= l_i · a_kj
                let akj = &a[k][j];
                let re = li.re.mul(&akj.re).sub(&li.im.mul(&akj.im));
                let im = li.re.mul(&akj.im).add(&li.im.mul(&akj.re));
                let nre = a[i][j].re.sub(&re);
                let nim = a[i][j].im.sub(&im);
                a[j][i] = Complex { re: nre.clone(), im: ctx.int(0).sub(&nim) };
                a[i][j] = Complex { re: nre, im: nim };
            }
        }
    }
    Some((neg, pos))
}
