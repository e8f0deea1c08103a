//! Casson–Gordon sums for connected sums of satellites.
//!
//! For a satellite `P(K)` the normalized invariant at a character `χ` of the
//! pattern's cover is `τ̄_{P(U)}(χ) + 2σ_{χ(V₁)}(K)`. The pattern term is an
//! input (`CgProfile`), either exact or only bounded. A connected sum
//! `#P(K_i) # −#P(L_j)` is obstructed when every subgroup of the right order
//! in `⊕ Z_{p^k}` contains a character tuple whose sum is provably nonzero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{Character, CoverError, PatternCover};
use crate::knot::{KnotError, KnotExpr};
use crate::modular::{inv_mod, is_prime};
use crate::signature::{CirclePoint, SignatureEngine};
use crate::subgroups::{subgroups_of_order_exp, HomocyclicGroup, Subgroup, SubgroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObstructionError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Knot(#[from] KnotError),
    #[error(transparent)]
    Subgroup(#[from] SubgroupError),
    #[error("expected {expected} characters (one per companion), got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("the {p}-primary part of the cover group {group} is not cyclic of order {p}^{k}")]
    PrimaryPart { p: u64, k: u32, group: String },
    #[error("enumeration needs a group of order {order}, above the budget {budget}")]
    BudgetExceeded { order: u128, budget: u64 },
    #[error("no knot in the family has a positive obstruction range, selection is empty")]
    EmptySelection,
    #[error("a value table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
}

/// Closed rational interval; exact values have `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueInterval {
    pub lo: Rational64,
    pub hi: Rational64,
}

impl ValueInterval {
    pub fn new(lo: Rational64, hi: Rational64) -> Self {
        assert!(lo <= hi, "empty interval");
        ValueInterval { lo, hi }
    }

    pub fn exact(v: Rational64) -> Self {
        ValueInterval { lo: v, hi: v }
    }

    pub fn int(v: i64) -> Self {
        Self::exact(Rational64::from_integer(v))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, o: &Self) -> Self {
        ValueInterval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    pub fn neg(&self) -> Self {
        ValueInterval { lo: -self.hi, hi: -self.lo }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn contains(&self, v: Rational64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for ValueInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational64::new(n, d))
        }
        None => s.parse().ok().map(Rational64::from_integer),
    }
}

/// Values of `τ̄_{P(U)}` on the characters of the pattern's cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub enum CgProfile {
    /// Identically zero.
    Zero,
    /// Exact values on a cyclic group of the given order, keyed by the
    /// numerator `c` of `χ(generator) = c/order`. Closed under `c ↦ −c`.
    Exact { order: u64, values: BTreeMap<u64, Rational64> },
    /// Every value lies in `[−B, B]`.
    Bounded { bound: Rational64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum ProfileRepr {
    Zero,
    Exact { order: u64, values: BTreeMap<String, String> },
    Bounded { bound: String },
}

impl TryFrom<ProfileRepr> for CgProfile {
    type Error = ObstructionError;
    fn try_from(r: ProfileRepr) -> Result<Self, ObstructionError> {
        match r {
            ProfileRepr::Zero => Ok(CgProfile::Zero),
            ProfileRepr::Bounded { bound } => {
                let b = parse_rational(&bound).ok_or_else(|| ObstructionError::Profile(format!("bad bound '{bound}'")))?;
                CgProfile::bounded(b)
            }
            ProfileRepr::Exact { order, values } => {
                let mut parsed = BTreeMap::new();
                for (k, v) in values {
                    let c: u64 = k.trim().parse().map_err(|_| ObstructionError::Profile(format!("bad character key '{k}'")))?;
                    let x = parse_rational(&v).ok_or_else(|| ObstructionError::Profile(format!("bad value '{v}'")))?;
                    parsed.insert(c, x);
                }
                CgProfile::exact(order, parsed)
            }
        }
    }
}

impl From<CgProfile> for ProfileRepr {
    fn from(p: CgProfile) -> Self {
        match p {
            CgProfile::Zero => ProfileRepr::Zero,
            CgProfile::Bounded { bound } => ProfileRepr::Bounded { bound: bound.to_string() },
            CgProfile::Exact { order, values } => {
                ProfileRepr::Exact { order, values: values.into_iter().map(|(c, v)| (c.to_string(), v.to_string())).collect() }
            }
        }
    }
}

impl CgProfile {
    pub fn bounded(bound: Rational64) -> Result<Self, ObstructionError> {
        if bound.is_negative() {
            return Err(ObstructionError::Profile(format!("bound {bound} is negative")));
        }
        Ok(CgProfile::Bounded { bound })
    }

    /// Fills in `−c` from `c`; rejects conflicting or out-of-range entries and a
    /// nonzero value at the trivial character.
    pub fn exact(order: u64, values: BTreeMap<u64, Rational64>) -> Result<Self, ObstructionError> {
        if order < 2 {
            return Err(ObstructionError::Profile(format!("order {order} must be at least 2")));
        }
        let mut full = BTreeMap::new();
        for (&c, &v) in &values {
            if c >= order {
                return Err(ObstructionError::Profile(format!("character {c} out of range for order {order}")));
            }
            if c == 0 && !v.is_zero() {
                return Err(ObstructionError::Profile("value at the trivial character must be 0".into()));
            }
            for key in [c, (order - c) % order] {
                if let Some(&old) = full.get(&key) {
                    if old != v {
                        return Err(ObstructionError::Profile(format!("values at {c} and {} differ", (order - c) % order)));
                    }
                }
                full.insert(key, v);
            }
        }
        full.remove(&0);
        Ok(CgProfile::Exact { order, values: full })
    }

    /// Reads `{"order": n, "values": {"c": "p/q", ...}}` or the tagged form.
    pub fn from_json(text: &str) -> Result<Self, ObstructionError> {
        #[derive(Deserialize)]
        struct File {
            order: u64,
            values: BTreeMap<String, String>,
        }
        let err = |e: serde_json::Error| ObstructionError::Profile(e.to_string());
        let raw: serde_json::Value = serde_json::from_str(text).map_err(err)?;
        if raw.get("mode").is_some() {
            return serde_json::from_value(raw).map_err(err);
        }
        let f: File = serde_json::from_value(raw).map_err(err)?;
        ProfileRepr::Exact { order: f.order, values: f.values }.try_into()
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, CgProfile::Bounded { .. })
    }

    /// `τ̄_{P(U)}(χ)`.
    pub fn value(&self, chi: &Character) -> Result<ValueInterval, ObstructionError> {
        if chi.is_zero() {
            return Ok(ValueInterval::zero());
        }
        match self {
            CgProfile::Zero => Ok(ValueInterval::zero()),
            CgProfile::Bounded { bound } => Ok(ValueInterval::new(-*bound, *bound)),
            CgProfile::Exact { order, values } => {
                if chi.invariants != [*order] {
                    return Err(ObstructionError::Profile(format!(
                        "profile is for a cyclic group of order {order}, character lives on {:?}",
                        chi.invariants
                    )));
                }
                let c = chi.numerators[0];
                values.get(&c).map(|&v| ValueInterval::exact(v)).ok_or_else(|| ObstructionError::Profile(format!("no value for character {c}/{order}")))
            }
        }
    }
}

impl fmt::Display for CgProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CgProfile::Zero => write!(f, "zero"),
            CgProfile::Bounded { bound } => write!(f, "bound:{bound}"),
            CgProfile::Exact { order, values } => write!(f, "exact(order {order}, {} values)", values.len()),
        }
    }
}

/// `τ̄_{P(K)}(χ) = τ̄_{P(U)}(χ) + 2σ_{χ(V₁)}(K)`.
pub fn satellite_cg_value(profile: &CgProfile, cover: &PatternCover, chi: &Character, k: &KnotExpr) -> Result<ValueInterval, ObstructionError> {
    let engine = SignatureEngine::from_expr(k)?;
    satellite_value_with(&engine, profile, cover, chi)
}

fn satellite_value_with(engine: &SignatureEngine, profile: &CgProfile, cover: &PatternCover, chi: &Character) -> Result<ValueInterval, ObstructionError> {
    let y = cover.chi_v1(chi)?;
    if chi.is_zero() {
        return Ok(ValueInterval::zero());
    }
    let x = CirclePoint::new(*y.numer(), *y.denom() as u64).expect("positive denominator");
    Ok(profile.value(chi)?.add(&ValueInterval::int(2 * engine.signature(x))))
}

/// `#P(K_i) # −(#P(L_j))` with `p`-primary data `Z_{p^k}` for every summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionInstance {
    pub pattern: PatternCover,
    pub profile: CgProfile,
    pub positive: Vec<KnotExpr>,
    pub negative: Vec<KnotExpr>,
    pub p: u64,
    pub k: u32,
}

impl ObstructionInstance {
    /// Uses the full `p`-primary part of the (cyclic) pattern cover.
    pub fn new(pattern: PatternCover, profile: CgProfile, positive: Vec<KnotExpr>, negative: Vec<KnotExpr>, p: u64) -> Result<Self, ObstructionError> {
        if !is_prime(p) {
            return Err(CoverError::NotPrime(p).into());
        }
        let order = pattern.group.order();
        if !order.is_multiple_of(p) {
            return Err(CoverError::PrimeDoesNotDivide { p, order }.into());
        }
        let exps = pattern.group.p_exponents(p);
        let nonzero: Vec<u32> = exps.into_iter().filter(|&e| e > 0).collect();
        if nonzero.len() != 1 {
            return Err(ObstructionError::PrimaryPart { p, k: 0, group: pattern.group.to_string() });
        }
        Ok(ObstructionInstance { pattern, profile, positive, negative, p, k: nonzero[0] })
    }

    pub fn summands(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    /// Whether no companion appears on both sides.
    pub fn sides_disjoint(&self) -> bool {
        let pos: BTreeSet<String> = self.positive.iter().map(|e| e.to_string()).collect();
        self.negative.iter().all(|e| !pos.contains(&e.to_string()))
    }

    /// The character of order dividing `p^k` sending the generator to `c/p^k`.
    pub fn character(&self, c: u64) -> Character {
        let q = self.p.pow(self.k);
        let mut nums = vec![0; self.pattern.group.rank()];
        let idx = self.primary_index();
        let d = self.pattern.group.invariants()[idx];
        nums[idx] = (c % q) * (d / q);
        Character::new(&self.pattern.group, nums).expect("numerator in range")
    }

    fn primary_index(&self) -> usize {
        self.pattern.group.p_exponents(self.p).iter().position(|&e| e > 0).expect("p divides the order")
    }

    /// `λ*(χ_c, χ_c') = c·c'·u / p^k` on one summand; returns `u mod p^k`.
    pub fn dual_linking_unit(&self) -> u64 {
        let q = self.p.pow(self.k);
        let idx = self.primary_index();
        let d = self.pattern.group.invariants()[idx];
        let l = self.pattern.linking[idx][idx];
        // λ(g,g) = a/d with a a unit mod d.
        let a = (l * d as i64).to_integer().rem_euclid(d as i64) as u64;
        let cof = (d / q) % q;
        (cof * inv_mod_general(a % q, q)) % q
    }

    /// Value table per summand, already signed by side: entry `c` is the
    /// satellite value at the character `c` of `Z_{p^k}`.
    pub fn tables(&self) -> Result<Vec<Vec<ValueInterval>>, ObstructionError> {
        let q = self.p.pow(self.k);
        let mut cache: BTreeMap<String, Vec<ValueInterval>> = BTreeMap::new();
        let mut row = |e: &KnotExpr| -> Result<Vec<ValueInterval>, ObstructionError> {
            let key = e.to_string();
            if let Some(t) = cache.get(&key) {
                return Ok(t.clone());
            }
            let engine = SignatureEngine::from_expr(e)?;
            let t = (0..q)
                .map(|c| satellite_value_with(&engine, &self.profile, &self.pattern, &self.character(c)))
                .collect::<Result<Vec<_>, _>>()?;
            cache.insert(key, t.clone());
            Ok(t)
        };
        let mut out = Vec::new();
        for e in &self.positive {
            out.push(row(e)?);
        }
        for e in &self.negative {
            out.push(row(e)?.iter().map(ValueInterval::neg).collect());
        }
        Ok(out)
    }

    pub fn slice_problem(&self, self_annihilating: bool) -> Result<SliceProblem, ObstructionError> {
        let u = self.dual_linking_unit();
        let q = self.p.pow(self.k);
        let forms = self_annihilating.then(|| {
            let neg = (q - u) % q;
            self.positive.iter().map(|_| u).chain(self.negative.iter().map(|_| neg)).collect()
        });
        SliceProblem::new(self.p, self.k, self.tables()?, forms)
    }
}

fn inv_mod_general(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    if is_prime(m) {
        return inv_mod(a, m);
    }
    let e = (a as i64).extended_gcd(&(m as i64));
    assert_eq!(e.gcd, 1, "{a} is not a unit mod {m}");
    e.x.rem_euclid(m as i64) as u64
}

/// `Σ_{positive} τ̄_{P(K_i)}(χ_i) − Σ_{negative} τ̄_{P(L_j)}(χ_j)`.
pub fn obstruction_sum(inst: &ObstructionInstance, chis: &[Character]) -> Result<ValueInterval, ObstructionError> {
    if chis.len() != inst.summands() {
        return Err(ObstructionError::LengthMismatch { expected: inst.summands(), got: chis.len() });
    }
    let mut total = ValueInterval::zero();
    for (i, (k, chi)) in inst.positive.iter().chain(&inst.negative).zip(chis).enumerate() {
        if !chi.belongs_to(&inst.pattern.group) {
            return Err(CoverError::BadCharacter(chi.numerators.clone()).into());
        }
        let v = satellite_cg_value(&inst.profile, &inst.pattern, chi, k)?;
        total = if i < inst.positive.len() { total.add(&v) } else { total.sub(&v) };
    }
    Ok(total)
}

/// Enumeration limits for exhaustive checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest `|(Z_{p^k})^N|` that may be enumerated.
    pub max_group_order: u64,
    /// Largest number of companions on either side of a combination.
    pub max_per_side: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_group_order: 729, max_per_side: 3 }
    }
}

/// Sliceness test on `(Z_{p^k})^N` with one signed value table per summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceProblem {
    pub group: HomocyclicGroup,
    pub tables: Vec<Vec<ValueInterval>>,
    /// Per-summand unit `u_i` of the dual linking form `c·c'·u_i / p^k`;
    /// when present only self-annihilating subgroups are candidates.
    pub forms: Option<Vec<u64>>,
    /// `tables` times a common denominator, as `(lo, hi)` integer pairs.
    scaled: Vec<Vec<(i128, i128)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Character numerators on each summand `Z_{p^k}`.
    pub element: Vec<u64>,
    pub sum: ValueInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub generators: Vec<Vec<u64>>,
    pub witness: usize,
}

/// Every candidate subgroup contains one of `witnesses`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCertificate {
    pub p: u64,
    pub k: u32,
    pub summands: usize,
    /// No subgroup of order `p^{Nk/2}` exists because `Nk` is odd.
    pub parity: bool,
    pub self_annihilating_only: bool,
    pub subgroup_count: usize,
    pub witnesses: Vec<Witness>,
    /// Per-subgroup witness choice in canonical subgroup order; dropped by
    /// `compact`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assignments: Vec<Assignment>,
}

impl SliceCertificate {
    pub fn compact(mut self) -> Self {
        self.assignments.clear();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum SliceVerdict {
    Obstructed(SliceCertificate),
    /// Some candidate subgroup has no nonvanishing tuple. Never a sliceness claim.
    Inconclusive { subgroup_count: usize, unobstructed: Vec<Vec<u64>> },
}

impl SliceVerdict {
    pub fn is_obstructed(&self) -> bool {
        matches!(self, SliceVerdict::Obstructed(_))
    }
}

impl SliceProblem {
    pub fn new(p: u64, k: u32, tables: Vec<Vec<ValueInterval>>, forms: Option<Vec<u64>>) -> Result<Self, ObstructionError> {
        let group = HomocyclicGroup::new(p, k, tables.len())?;
        let q = group.modulus() as usize;
        for t in &tables {
            if t.len() != q {
                return Err(ObstructionError::TableSize { expected: q, got: t.len() });
            }
        }
        if let Some(f) = &forms {
            if f.len() != tables.len() {
                return Err(ObstructionError::LengthMismatch { expected: tables.len(), got: f.len() });
            }
        }
        let den = tables.iter().flatten().fold(1i128, |l, v| l.lcm(&(*v.lo.denom() as i128)).lcm(&(*v.hi.denom() as i128)));
        let scale = |r: Rational64| *r.numer() as i128 * (den / *r.denom() as i128);
        let scaled = tables.iter().map(|t| t.iter().map(|v| (scale(v.lo), scale(v.hi))).collect()).collect();
        Ok(SliceProblem { group, tables, forms, scaled })
    }

    fn sum_excludes_zero(&self, x: &[u64]) -> bool {
        let (lo, hi) = x.iter().zip(&self.scaled).fold((0i128, 0i128), |(lo, hi), (&c, t)| (lo + t[c as usize].0, hi + t[c as usize].1));
        lo > 0 || hi < 0
    }

    pub fn sum(&self, x: &[u64]) -> ValueInterval {
        x.iter().zip(&self.tables).fold(ValueInterval::zero(), |acc, (&c, t)| acc.add(&t[c as usize]))
    }

    fn self_annihilating(&self, s: &Subgroup) -> bool {
        let Some(forms) = &self.forms else {
            return true;
        };
        let q = self.group.modulus() as u128;
        let gens = s.generators(&self.group);
        gens.iter().all(|a| {
            gens.iter().all(|b| a.iter().zip(b).zip(forms).map(|((&x, &y), &u)| x as u128 * y as u128 % q * u as u128 % q).sum::<u128>() % q == 0)
        })
    }

    /// Candidate subgroups of order `p^{Nk/2}` in canonical order.
    pub fn candidates(&self, budget: &Budget) -> Result<Arc<Vec<Subgroup>>, ObstructionError> {
        let g = &self.group;
        if g.order() > budget.max_group_order {
            return Err(ObstructionError::BudgetExceeded { order: g.order() as u128, budget: budget.max_group_order });
        }
        if g.order_exp() % 2 == 1 {
            return Ok(Arc::new(Vec::new()));
        }
        let subs = subgroups_of_order_exp(g, g.order_exp() / 2)?;
        if self.forms.is_none() {
            return Ok(subs);
        }
        Ok(Arc::new(subs.par_iter().filter(|s| self.self_annihilating(s)).cloned().collect()))
    }

    /// Lexicographically smallest element of `s` whose sum excludes 0.
    pub fn witness_in(&self, s: &Subgroup) -> Option<Vec<u64>> {
        s.elements(&self.group).into_iter().filter(|x| self.sum_excludes_zero(x)).min()
    }

    pub fn check(&self, budget: &Budget) -> Result<SliceVerdict, ObstructionError> {
        let g = &self.group;
        let parity = g.order_exp() % 2 == 1;
        let subs = self.candidates(budget)?;
        let found: Vec<Option<Vec<u64>>> = subs.par_iter().map(|s| self.witness_in(s)).collect();
        if let Some(i) = found.iter().position(Option::is_none) {
            return Ok(SliceVerdict::Inconclusive { subgroup_count: subs.len(), unobstructed: subs[i].generators(g) });
        }
        let elements: BTreeSet<Vec<u64>> = found.iter().flatten().cloned().collect();
        let witnesses: Vec<Witness> = elements.iter().map(|x| Witness { element: x.clone(), sum: self.sum(x) }).collect();
        let index: BTreeMap<&Vec<u64>, usize> = elements.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let assignments = subs
            .iter()
            .zip(&found)
            .map(|(s, w)| Assignment { generators: s.generators(g), witness: index[w.as_ref().unwrap()] })
            .collect();
        Ok(SliceVerdict::Obstructed(SliceCertificate {
            p: g.p,
            k: g.k,
            summands: g.n,
            parity,
            self_annihilating_only: self.forms.is_some(),
            subgroup_count: subs.len(),
            witnesses,
            assignments,
        }))
    }
}

pub fn check_slice_obstruction(inst: &ObstructionInstance, budget: &Budget, self_annihilating: bool) -> Result<SliceVerdict, ObstructionError> {
    inst.slice_problem(self_annihilating)?.check(budget)
}

/// Worst-case range of `τ̄_{P(J)}(χ)` over the nonzero characters used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub index: usize,
    pub lo: Rational64,
    pub hi: Rational64,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<usize>,
    pub rows: Vec<SelectionRow>,
}

/// Nonzero characters of prime-power order of a cyclic pattern group.
pub fn prime_power_characters(cover: &PatternCover) -> Vec<Character> {
    let g = &cover.group;
    if g.is_trivial() {
        return Vec::new();
    }
    let mut out: Vec<Character> = g
        .elements()
        .into_iter()
        .map(|nums| Character::new(g, nums).unwrap())
        .filter(|c| !c.is_zero() && is_prime_power(c.order()))
        .collect();
    out.sort();
    out
}

fn is_prime_power(n: u64) -> bool {
    (2..=n).find(|d| n.is_multiple_of(*d)).is_some_and(|p| {
        let mut m = n;
        while m.is_multiple_of(p) {
            m /= p;
        }
        m == 1
    })
}

/// Greedy earliest-index chain with `0 < τ̄(J_{i₁}) < τ̄(J_{i₂}) < …`, each
/// inequality holding for the worst case over all nonzero characters.
pub fn select_subsequence(family: &[KnotExpr], cover: &PatternCover, profile: &CgProfile) -> Result<Selection, ObstructionError> {
    let chars = prime_power_characters(cover);
    let ranges = family
        .par_iter()
        .map(|k| {
            let engine = SignatureEngine::from_expr(k)?;
            let vals = chars.iter().map(|c| satellite_value_with(&engine, profile, cover, c)).collect::<Result<Vec<_>, _>>()?;
            let lo = vals.iter().map(|v| v.lo).min().unwrap_or_else(Rational64::zero);
            let hi = vals.iter().map(|v| v.hi).max().unwrap_or_else(Rational64::zero);
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>, ObstructionError>>()?;
    let mut selected = Vec::new();
    let mut floor: Option<Rational64> = None;
    for (i, &(lo, hi)) in ranges.iter().enumerate() {
        let clears = match floor {
            None => lo.is_positive(),
            Some(f) => lo > f,
        };
        if clears {
            selected.push(i);
            floor = Some(hi);
        }
    }
    if selected.is_empty() {
        return Err(ObstructionError::EmptySelection);
    }
    let rows = ranges.iter().enumerate().map(|(index, &(lo, hi))| SelectionRow { index, lo, hi, selected: selected.contains(&index) }).collect();
    Ok(Selection { selected, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::whitehead_cover;

    fn r(a: i64) -> Rational64 {
        Rational64::from_integer(a)
    }

    fn k(s: &str) -> KnotExpr {
        KnotExpr::parse(s).unwrap()
    }

    #[test]
    fn satellite_value_examples() {
        let cover = whitehead_cover(1, 1).unwrap();
        let chi = Character::new(&cover.group, vec![1]).unwrap();
        assert_eq!(cover.chi_v1(&chi).unwrap(), Rational64::new(1, 3));
        let tref = k("torus(2,3)");
        assert_eq!(satellite_cg_value(&CgProfile::Zero, &cover, &chi, &tref).unwrap(), ValueInterval::int(-4));
        let bounded = CgProfile::bounded(r(3)).unwrap();
        assert_eq!(satellite_cg_value(&bounded, &cover, &chi, &tref).unwrap(), ValueInterval::new(r(-7), r(-1)));
        let zero = Character::zero(&cover.group);
        assert_eq!(satellite_cg_value(&bounded, &cover, &zero, &tref).unwrap(), ValueInterval::zero());
        let foreign = Character::new(&crate::cover::FiniteAbelianGroup::cyclic(5), vec![1]).unwrap();
        assert!(satellite_cg_value(&CgProfile::Zero, &cover, &foreign, &tref).is_err());
    }

    #[test]
    fn obstruction_sum_examples() {
        let cover = whitehead_cover(1, 1).unwrap();
        let tref = k("torus(2,3)");
        let inst = ObstructionInstance::new(cover.clone(), CgProfile::Zero, vec![tref.clone()], vec![tref.clone()], 3).unwrap();
        assert!(!inst.sides_disjoint());
        let z = Character::zero(&cover.group);
        let c1 = inst.character(1);
        assert_eq!(obstruction_sum(&inst, &[z.clone(), z.clone()]).unwrap(), ValueInterval::zero());
        assert_eq!(obstruction_sum(&inst, &[c1.clone(), c1.clone()]).unwrap(), ValueInterval::zero());
        assert_eq!(obstruction_sum(&inst, &[c1.clone(), z.clone()]).unwrap(), ValueInterval::int(-4));
        assert_eq!(obstruction_sum(&inst, &[c1]), Err(ObstructionError::LengthMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn slice_problem_six_and_four() {
        let six: Vec<_> = [0, 6, 6].iter().map(|&v| ValueInterval::int(v)).collect();
        let four: Vec<_> = [0, -4, -4].iter().map(|&v| ValueInterval::int(v)).collect();
        let prob = SliceProblem::new(3, 1, vec![six, four], None).unwrap();
        let SliceVerdict::Obstructed(cert) = prob.check(&Budget::default()).unwrap() else {
            panic!("expected obstruction");
        };
        assert_eq!(cert.subgroup_count, 4);
        let mut sums: Vec<(Vec<Vec<u64>>, Rational64)> =
            cert.assignments.iter().map(|a| (a.generators.clone(), cert.witnesses[a.witness].sum.lo)).collect();
        sums.sort();
        assert_eq!(
            sums,
            vec![(vec![vec![0, 1]], r(-4)), (vec![vec![1, 0]], r(6)), (vec![vec![1, 1]], r(2)), (vec![vec![1, 2]], r(2))]
        );
    }

    #[test]
    fn identical_sides_are_inconclusive() {
        let cover = whitehead_cover(1, 1).unwrap();
        let tref = k("torus(2,3)");
        let inst = ObstructionInstance::new(cover, CgProfile::Zero, vec![tref.clone()], vec![tref], 3).unwrap();
        let v = check_slice_obstruction(&inst, &Budget::default(), false).unwrap();
        assert!(matches!(v, SliceVerdict::Inconclusive { .. }));
    }

    #[test]
    fn large_bound_is_inconclusive() {
        let cover = whitehead_cover(1, 1).unwrap();
        let prof = CgProfile::bounded(r(100)).unwrap();
        let inst = ObstructionInstance::new(cover, prof, vec![k("mirror(torus(2,3))")], vec![k("3*mirror(torus(2,3))")], 3).unwrap();
        assert!(!check_slice_obstruction(&inst, &Budget::default(), false).unwrap().is_obstructed());
    }

    #[test]
    fn odd_total_is_obstructed_by_parity() {
        let cover = whitehead_cover(1, 1).unwrap();
        let inst = ObstructionInstance::new(cover, CgProfile::Zero, vec![KnotExpr::Unknot], vec![], 3).unwrap();
        let SliceVerdict::Obstructed(c) = check_slice_obstruction(&inst, &Budget::default(), false).unwrap() else {
            panic!()
        };
        assert!(c.parity);
        assert_eq!(c.subgroup_count, 0);
    }

    #[test]
    fn budget_is_a_resource_error() {
        let cover = whitehead_cover(1, 1).unwrap();
        let m = k("mirror(torus(2,3))");
        let inst = ObstructionInstance::new(cover, CgProfile::Zero, vec![m.clone(); 4], vec![m; 3], 3).unwrap();
        assert_eq!(
            check_slice_obstruction(&inst, &Budget::default(), false),
            Err(ObstructionError::BudgetExceeded { order: 2187, budget: 729 })
        );
    }

    #[test]
    fn self_annihilating_filter_keeps_metabolizers_only() {
        // (Z₃)² with forms u and −u: the isotropic lines are ⟨(1,1)⟩ and ⟨(1,2)⟩.
        let t = vec![ValueInterval::zero(); 3];
        let prob = SliceProblem::new(3, 1, vec![t.clone(), t], Some(vec![1, 2])).unwrap();
        let c = prob.candidates(&Budget::default()).unwrap();
        let gens: Vec<_> = c.iter().map(|s| s.generators(&prob.group)).collect();
        assert_eq!(gens, vec![vec![vec![1, 1]], vec![vec![1, 2]]]);
    }

    #[test]
    fn whitehead_dual_linking_unit() {
        // λ(m₁,m₁) = 2/3 on Z₃, so λ*(χ_c, χ_c') = c·c'·(2)⁻¹/3 = 2cc'/3.
        let inst = ObstructionInstance::new(whitehead_cover(1, 1).unwrap(), CgProfile::Zero, vec![], vec![], 3).unwrap();
        assert_eq!(inst.dual_linking_unit(), 2);
        // Z₁₅ with p = 5: λ(m₁,m₁) = 4/15, cofactor 3, so u = 3·4⁻¹ ≡ 2 mod 5.
        let inst = ObstructionInstance::new(whitehead_cover(2, 2).unwrap(), CgProfile::Zero, vec![], vec![], 5).unwrap();
        assert_eq!(inst.k, 1);
        assert_eq!(inst.dual_linking_unit(), 2);
    }

    #[test]
    fn selection_examples() {
        let cover = whitehead_cover(1, -1).unwrap();
        let m = |c: i64| KnotExpr::multiple(c, k("mirror(torus(2,5))"));
        let fam: Vec<_> = [1, 3, 7, 15].iter().map(|&c| m(c)).collect();
        let s = select_subsequence(&fam, &cover, &CgProfile::Zero).unwrap();
        assert_eq!(s.selected, vec![0, 1, 2, 3]);
        assert_eq!(s.rows.iter().map(|r| (r.lo, r.hi)).collect::<Vec<_>>(), vec![(r(4), r(8)), (r(12), r(24)), (r(28), r(56)), (r(60), r(120))]);
        let s = select_subsequence(&[m(1), m(2)], &cover, &CgProfile::Zero).unwrap();
        assert_eq!(s.selected, vec![0]);
        let fam: Vec<_> = [1, 3, 9].iter().map(|&c| m(c)).collect();
        let s = select_subsequence(&fam, &cover, &CgProfile::bounded(r(1)).unwrap()).unwrap();
        assert_eq!(s.selected, vec![0, 1, 2]);
        assert_eq!(s.rows[0].lo, r(3));
        let s = select_subsequence(&[KnotExpr::Unknot, KnotExpr::Unknot], &cover, &CgProfile::Zero);
        assert_eq!(s, Err(ObstructionError::EmptySelection));
    }

    #[test]
    fn profile_parsing_and_symmetry() {
        let p = CgProfile::from_json(r#"{"order": 5, "values": {"1": "3/2", "2": "-1"}}"#).unwrap();
        let CgProfile::Exact { values, .. } = &p else { panic!() };
        assert_eq!(values.len(), 4);
        assert_eq!(values[&4], Rational64::new(3, 2));
        assert!(CgProfile::from_json(r#"{"order": 5, "values": {"1": "1", "4": "2"}}"#).is_err());
        assert!(CgProfile::from_json(r#"{"order": 5, "values": {"0": "1"}}"#).is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<CgProfile>(&json).unwrap(), p);
        assert_eq!(CgProfile::from_json(&json).unwrap(), p);
        let b = CgProfile::bounded(Rational64::new(5, 2)).unwrap();
        assert_eq!(serde_json::from_str::<CgProfile>(&serde_json::to_string(&b).unwrap()).unwrap(), b);
        assert!(CgProfile::bounded(r(-1)).is_err());
        assert_eq!(parse_rational(" -3/6 "), Some(Rational64::new(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
