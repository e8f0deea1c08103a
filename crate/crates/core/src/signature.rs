//! Exact Levine–Tristram signatures at rational points of the circle.
//!
//! At `ω = e^{2πix}` the Hermitian form `H = (1−ω)V + (1−ω̄)Vᵀ` equals
//! `(1−ω)(V − ω̄Vᵀ)`, so it is singular exactly when `Φ_d` divides the
//! Alexander polynomial, `d` being the order of `ω`. The nullity is therefore
//! decided exactly (cyclotomic divisibility, then an exact rank computation
//! in `Q(ζ_d)` only for repeated factors), and the remaining eigenvalue signs
//! are certified by interval LDL* of `H ± δI`. When the `f64` enclosures are
//! too wide the computation is repeated in fixed-point arithmetic with more
//! bits until the count of eigenvalues inside `[−δ, δ]` equals the nullity.
//!
//! The value at a singular point is the signature of the singular matrix
//! itself (zero eigenvalues count 0); at `ω = 1` the signature is 0.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cyclotomic::{cyclotomic_cached, nullity_at_root};
use crate::interval::{shifted_inertia, F64Context, FixedContext, Interval, IntervalContext};
use crate::knot::{KnotError, KnotExpr, SeifertMatrix};
use crate::matrix::IntMatrix;
use crate::poly::{seifert_determinant, totient, IntegerPolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error("denominator bound must be at least 2, got {0}")]
    BoundTooSmall(u64),
    #[error("ordering hypothesis needs n >= 3, got {0}")]
    OrderTooSmall(u64),
    #[error("family of knots is empty")]
    EmptyFamily,
    #[error("invalid circle point '{0}': expected j/p with p > 0")]
    BadPoint(String),
}

/// The point `e^{2πi·num/den}` stored as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CirclePoint {
    num: u64,
    den: u64,
}

impl CirclePoint {
    pub fn new(j: i64, p: u64) -> Result<Self, SignatureError> {
        if p == 0 {
            return Err(SignatureError::BadPoint(format!("{j}/{p}")));
        }
        let num = j.rem_euclid(p as i64) as u64;
        let g = num.gcd(&p);
        Ok(CirclePoint { num: num / g, den: p / g })
    }

    pub fn zero() -> Self {
        CirclePoint { num: 0, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Multiplicative order of `ω`.
    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Representative in `[0, 1/2]` under `x ↦ 1 − x`.
    pub fn folded(&self) -> Self {
        if 2 * self.num > self.den {
            CirclePoint { num: self.den - self.num, den: self.den }
        } else {
            *self
        }
    }

    /// `w·x mod 1`, i.e. the point `ω^w`.
    pub fn times(&self, w: i64) -> Self {
        let num = (w as i128 * self.num as i128).rem_euclid(self.den as i128) as i64;
        CirclePoint::new(num, self.den).expect("nonzero denominator")
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for CirclePoint {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.num as u128 * o.den as u128).cmp(&(o.num as u128 * self.den as u128))
    }
}

impl PartialOrd for CirclePoint {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for CirclePoint {
    type Err = SignatureError;
    fn from_str(s: &str) -> Result<Self, SignatureError> {
        let bad = || SignatureError::BadPoint(s.to_string());
        let (j, p) = s.trim().split_once('/').ok_or_else(bad)?;
        let j: i64 = j.trim().parse().map_err(|_| bad())?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        CirclePoint::new(j, p)
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

struct Block {
    v: IntMatrix,
    copies: i64,
    delta: IntegerPolynomial,
    nullity: Mutex<HashMap<u64, usize>>,
}

impl Block {
    fn nullity(&self, d: u64) -> usize {
        let n = self.v.rows();
        if d == 1 {
            return n;
        }
        let deg = self.delta.degree().unwrap_or(0) as u64;
        if totient(d) > deg {
            return 0;
        }
        match self.delta.multiplicity_of(&cyclotomic_cached(d)) {
            0 => 0,
            1 => 1,
            _ => *self.nullity.lock().unwrap().entry(d).or_insert_with(|| nullity_at_root(&self.v, d)),
        }
    }

    fn signature(&self, x: CirclePoint) -> i64 {
        let n = self.v.rows();
        let nu = self.nullity(x.den);
        if let Some(s) = certify(&F64Context, &self.v, x, nu, 44) {
            return s;
        }
        for prec in [128u32, 256, 512, 1024, 2048, 4096, 8192] {
            if let Some(s) = certify(&FixedContext { prec }, &self.v, x, nu, prec / 3) {
                return s;
            }
        }
        panic!("failed to certify signature of {n}x{n} block at {x}");
    }
}

fn certify<C: IntervalContext>(ctx: &C, v: &IntMatrix, x: CirclePoint, nu: usize, max_exp: u32) -> Option<i64> {
    let n = v.rows();
    let (c, s) = ctx.cos_sin_2pi(x.num, x.den);
    if nu == 0 {
        if let Some((neg, pos)) = shifted_inertia(ctx, v, &c, &s, &ctx.int(0)) {
            return Some(pos as i64 - neg as i64);
        }
    }
    let mut e = 4;
    while e <= max_exp {
        let delta = ctx.pow2_neg(e);
        let minus = ctx.int(0).sub(&delta);
        let below_lo = shifted_inertia(ctx, v, &c, &s, &minus).map(|r| r.0);
        let below_hi = shifted_inertia(ctx, v, &c, &s, &delta).map(|r| r.0);
        if let (Some(a), Some(b)) = (below_lo, below_hi) {
            assert!(b >= a + nu, "eigenvalue window smaller than exact nullity");
            if b - a == nu {
                return Some((n - b) as i64 - a as i64);
            }
        }
        e += 4;
    }
    None
}

/// Precomputed data for evaluating signatures of one Seifert matrix.
///
/// The matrix is split into its diagonal blocks; identical blocks are shared.
pub struct SignatureEngine {
    blocks: Vec<Block>,
}

impl SignatureEngine {
    pub fn new(v: &SeifertMatrix) -> Self {
        let mut index: HashMap<IntMatrix, usize> = HashMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        for b in v.blocks() {
            let m = b.matrix().clone();
            if let Some(&i) = index.get(&m) {
                blocks[i].copies += 1;
                continue;
            }
            index.insert(m.clone(), blocks.len());
            let delta = seifert_determinant(&m);
            blocks.push(Block { v: m, copies: 1, delta, nullity: Mutex::new(HashMap::new()) });
        }
        SignatureEngine { blocks }
    }

    pub fn from_expr(e: &KnotExpr) -> Result<Self, KnotError> {
        Ok(Self::new(&e.evaluate()?))
    }

    /// Levine–Tristram signature at `x`.
    pub fn signature(&self, x: CirclePoint) -> i64 {
        let x = x.folded();
        if x.is_zero() {
            return 0;
        }
        self.blocks.iter().map(|b| b.copies * b.signature(x)).sum()
    }

    /// Dimension of the kernel of the form at `x`; the form vanishes at `x = 0`.
    pub fn nullity(&self, x: CirclePoint) -> usize {
        if x.is_zero() {
            return self.blocks.iter().map(|b| b.copies as usize * b.v.rows()).sum();
        }
        self.blocks.iter().map(|b| b.copies as usize * b.nullity(x.den)).sum()
    }

    /// Whether the Alexander polynomial vanishes at `ω`.
    pub fn is_jump(&self, x: CirclePoint) -> bool {
        !x.is_zero() && self.blocks.iter().any(|b| b.nullity(x.den) > 0)
    }
}

/// Signature of `(1−ω)V + (1−ω̄)Vᵀ` at `ω = e^{2πix}`.
pub fn levine_tristram(e: &KnotExpr, x: CirclePoint) -> Result<i64, SignatureError> {
    Ok(SignatureEngine::from_expr(e)?.signature(x))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub x: CirclePoint,
    pub value: i64,
    pub jump: bool,
}

/// Maximal run of consecutive non-jump grid points with one value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plateau {
    /// Nearest jump (or `0/1`) to the left; not part of the run.
    pub after: CirclePoint,
    pub first: CirclePoint,
    pub last: CirclePoint,
    pub value: i64,
}

/// Signature step function on `(0, 1/2]`, tabulated exactly at every rational
/// point whose denominator is at most the bound. Values elsewhere in `(0, 1)`
/// follow from `σ_x = σ_{1−x}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureFunction {
    pub denominator_bound: u64,
    pub samples: Vec<Sample>,
}

/// Reduced fractions in `(0, 1/2]` with denominator at most `bound`, ascending.
pub fn farey_half(bound: u64) -> Vec<CirclePoint> {
    let mut pts: Vec<CirclePoint> = (2..=bound)
        .flat_map(|den| (1..=den / 2).filter(move |num| num.gcd(&den) == 1).map(move |num| CirclePoint { num, den }))
        .collect();
    pts.sort();
    pts
}

impl SignatureFunction {
    /// Points where the Alexander polynomial vanishes.
    pub fn jumps(&self) -> Vec<CirclePoint> {
        self.samples.iter().filter(|s| s.jump).map(|s| s.x).collect()
    }

    pub fn plateaus(&self) -> Vec<Plateau> {
        let mut out: Vec<Plateau> = Vec::new();
        let mut after = CirclePoint::zero();
        let mut fresh = true;
        for s in &self.samples {
            if s.jump {
                after = s.x;
                fresh = true;
                continue;
            }
            match out.last_mut() {
                Some(p) if !fresh && p.value == s.value => p.last = s.x,
                _ => out.push(Plateau { after, first: s.x, last: s.x, value: s.value }),
            }
            fresh = false;
        }
        out
    }

    /// Tabulated value at `x` (folded into `[0, 1/2]`); `None` off the grid.
    pub fn value_at(&self, x: CirclePoint) -> Option<i64> {
        let x = x.folded();
        if x.is_zero() {
            return Some(0);
        }
        self.samples.binary_search_by(|s| s.x.cmp(&x)).ok().map(|i| self.samples[i].value)
    }

    pub fn is_jump(&self, x: CirclePoint) -> Option<bool> {
        let x = x.folded();
        self.samples.binary_search_by(|s| s.x.cmp(&x)).ok().map(|i| self.samples[i].jump)
    }

    /// Identically zero function on the given grid.
    pub fn zero(denominator_bound: u64) -> Self {
        let samples = farey_half(denominator_bound).into_iter().map(|x| Sample { x, value: 0, jump: false }).collect();
        SignatureFunction { denominator_bound, samples }
    }
}

pub fn signature_function(e: &KnotExpr, denominator_bound: u64) -> Result<SignatureFunction, SignatureError> {
    if denominator_bound < 2 {
        return Err(SignatureError::BoundTooSmall(denominator_bound));
    }
    let engine = SignatureEngine::from_expr(e)?;
    let samples = farey_half(denominator_bound)
        .into_par_iter()
        .map(|x| Sample { x, value: engine.signature(x), jump: engine.is_jump(x) })
        .collect();
    Ok(SignatureFunction { denominator_bound, samples })
}

/// Signature function of a satellite with winding number `w`:
/// `σ_ω(P(K)) = σ_ω(P(U)) + σ_{ω^w}(K)`.
pub fn satellite_signature_function(
    w: i64,
    pattern_sig: &SignatureFunction,
    companion: &KnotExpr,
) -> Result<SignatureFunction, SignatureError> {
    let engine = SignatureEngine::from_expr(companion)?;
    let samples = pattern_sig
        .samples
        .par_iter()
        .map(|s| {
            let y = s.x.times(w);
            Sample { x: s.x, value: s.value + engine.signature(y), jump: s.jump || engine.is_jump(y) }
        })
        .collect();
    Ok(SignatureFunction { denominator_bound: pattern_sig.denominator_bound, samples })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotRange {
    pub index: usize,
    pub knot: KnotExpr,
    pub min: i64,
    pub max: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingStep {
    pub index: usize,
    pub max: i64,
    pub next_min: i64,
    pub holds: bool,
}

/// Record of the strict max/min chain over the points `j/n`, `1 ≤ j < n/2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingLedger {
    pub n: u64,
    /// All `j` in range are used, including those with `gcd(j, n) > 1`.
    pub points: Vec<CirclePoint>,
    pub knots: Vec<KnotRange>,
    pub steps: Vec<OrderingStep>,
    pub holds: bool,
}

pub fn check_ordering_hypothesis(family: &[KnotExpr], n: u64) -> Result<OrderingLedger, SignatureError> {
    if n < 3 {
        return Err(SignatureError::OrderTooSmall(n));
    }
    if family.is_empty() {
        return Err(SignatureError::EmptyFamily);
    }
    let points: Vec<CirclePoint> = (1..n).filter(|j| 2 * j < n).map(|j| CirclePoint::new(j as i64, n).unwrap()).collect();
    let knots = family
        .iter()
        .enumerate()
        .map(|(index, k)| {
            let engine = SignatureEngine::from_expr(k)?;
            let vals: Vec<i64> = points.iter().map(|&x| engine.signature(x)).collect();
            Ok(KnotRange { index, knot: k.clone(), min: *vals.iter().min().unwrap(), max: *vals.iter().max().unwrap() })
        })
        .collect::<Result<Vec<_>, SignatureError>>()?;
    let steps: Vec<OrderingStep> = knots
        .windows(2)
        .map(|w| OrderingStep { index: w[0].index, max: w[0].max, next_min: w[1].min, holds: w[0].max < w[1].min })
        .collect();
    let holds = steps.iter().all(|s| s.holds);
    Ok(OrderingLedger { n, points, knots, steps, holds })
}
