//! Independence certificates for families of satellites `P(J_i)`.
//!
//! Ordering mode checks the pattern hypotheses, the signature ordering of the
//! family and the greedy chain of obstruction ranges. Exhaustive mode also
//! runs the slice check on every small signed combination of the selected
//! knots. Each combination is stored as a hitting set: a list of witnesses
//! such that every candidate subgroup contains at least one of them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::PatternCover;
use crate::knot::KnotExpr;
use crate::obstruction::{
    obstruction_sum, select_subsequence, Budget, CgProfile, ObstructionError, ObstructionInstance, Selection, SliceCertificate, SliceVerdict,
};
use crate::signature::{check_ordering_hypothesis, OrderingLedger, SignatureError};

pub const TOOL: &str = concat!("concordance ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Obstruction(#[from] ObstructionError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("inconclusive: combination +{positive:?} -{negative:?} has an unobstructed subgroup generated by {unobstructed:?}")]
    Inconclusive { positive: Vec<usize>, negative: Vec<usize>, unobstructed: Vec<Vec<u64>> },
    #[error("certificate does not verify: {0}")]
    Verification(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ordering,
    Exhaustive,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ordering" => Ok(Mode::Ordering),
            "exhaustive" => Ok(Mode::Exhaustive),
            _ => Err(format!("unknown mode '{s}', expected ordering or exhaustive")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ordering => "ordering",
            Mode::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub mode: Mode,
    pub budget: Budget,
    /// Restrict candidates to subgroups isotropic for the dual linking form.
    pub self_annihilating: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { mode: Mode::Ordering, budget: Budget::default(), self_annihilating: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub sign: String,
    pub embedding: String,
    pub candidates: String,
    pub summands: String,
    pub ordering_points: String,
    pub selection: String,
}

impl Conventions {
    pub fn current(self_annihilating: bool) -> Self {
        Conventions {
            sign: "satellite value = profile(chi) + 2*sigma_{chi(V1)}(K); negative-side summands are mirrors, so their values are subtracted".into(),
            embedding: "Z_n -> Q/Z sends 1 to 1/n; chi(V1) is read through this embedding".into(),
            candidates: if self_annihilating {
                "subgroups of order p^(Nk/2) isotropic for the dual linking form".into()
            } else {
                "all subgroups of order p^(Nk/2), a superset of the metabolizers".into()
            },
            summands: "N = m + n counts companions on both sides; candidate order is p^(Nk/2)".into(),
            ordering_points: "signatures at j/n for every 1 <= j < n/2, including gcd(j, n) > 1".into(),
            selection: "greedy earliest index; worst case over nonzero characters of prime-power order".into(),
        }
    }
}

/// One signed combination `#P(J_a) # −#P(J_b)`, by family index with repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinationRecord {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    pub certificate: SliceCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub tool: String,
    pub conventions: Conventions,
    pub options: CertifyOptions,
    pub pattern: PatternCover,
    pub profile: CgProfile,
    pub family: Vec<KnotExpr>,
    pub n: u64,
    pub prime: u64,
    pub exponent: u32,
    pub ordering: OrderingLedger,
    pub selection: Selection,
    #[serde(default)]
    pub combinations: Vec<CombinationRecord>,
}

fn smallest_prime_factor(n: u64) -> u64 {
    (2..=n).find(|d| n.is_multiple_of(*d)).expect("n > 1")
}

pub fn check_pattern_hypotheses(pattern: &PatternCover) -> Result<u64, CertifyError> {
    let g = &pattern.group;
    if g.is_trivial() {
        return Err(CertifyError::Hypothesis(format!("pattern {} has trivial cover homology (n = 1)", pattern.label)));
    }
    if !g.is_cyclic() {
        return Err(CertifyError::Hypothesis(format!("cover homology {g} of pattern {} is not cyclic", pattern.label)));
    }
    if pattern.winding_number % 2 != 0 {
        return Err(CertifyError::Hypothesis(format!("winding number {} is odd; the axis does not lift to two curves", pattern.winding_number)));
    }
    if !pattern.v1_generates() {
        return Err(CertifyError::Hypothesis(format!("V1 class {:?} does not generate {g}", pattern.v1)));
    }
    Ok(g.order())
}

/// Multisets of size `0..=max` over `0..s` as nondecreasing index lists.
fn multisets(s: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for i in start..s {
                let mut e: Vec<usize> = m.clone();
                e.push(i);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Signed combinations of `selected` knots up to the budget, one per swap class.
pub fn combinations(selected: &[usize], p: u64, k: u32, budget: &Budget) -> Vec<(Vec<usize>, Vec<usize>)> {
    let q = p.pow(k) as u128;
    let ms = multisets(selected.len(), budget.max_per_side);
    let mut out = Vec::new();
    for a in &ms {
        if a.is_empty() {
            continue;
        }
        for b in &ms {
            if b.iter().any(|i| a.contains(i)) || (!b.is_empty() && a > b) {
                continue;
            }
            let n = (a.len() + b.len()) as u32;
            if q.checked_pow(n).is_none_or(|o| o > budget.max_group_order as u128) {
                continue;
            }
            let map = |v: &Vec<usize>| v.iter().map(|&i| selected[i]).collect::<Vec<_>>();
            out.push((map(a), map(b)));
        }
    }
    out.sort_by(|x, y| (x.0.len() + x.1.len(), &x.0, &x.1).cmp(&(y.0.len() + y.1.len(), &y.0, &y.1)));
    out
}

fn instance(pattern: &PatternCover, profile: &CgProfile, family: &[KnotExpr], pos: &[usize], neg: &[usize], p: u64) -> Result<ObstructionInstance, CertifyError> {
    let pick = |v: &[usize]| v.iter().map(|&i| family[i].clone()).collect();
    Ok(ObstructionInstance::new(pattern.clone(), profile.clone(), pick(pos), pick(neg), p)?)
}

pub fn certify_independence(
    pattern: &PatternCover,
    profile: &CgProfile,
    family: &[KnotExpr],
    options: &CertifyOptions,
) -> Result<IndependenceCertificate, CertifyError> {
    let n = check_pattern_hypotheses(pattern)?;
    let ordering = match check_ordering_hypothesis(family, n) {
        Ok(l) => l,
        Err(SignatureError::OrderTooSmall(n)) => return Err(CertifyError::Hypothesis(format!("cover order {n} is below 3"))),
        Err(e) => return Err(e.into()),
    };
    if let Some(s) = ordering.steps.iter().find(|s| !s.holds) {
        return Err(CertifyError::Hypothesis(format!(
            "ordering fails between knots {} and {}: max signature {} is not below next min {}",
            s.index,
            s.index + 1,
            s.max,
            s.next_min
        )));
    }
    let selection = match select_subsequence(family, pattern, profile) {
        Err(ObstructionError::EmptySelection) => {
            return Err(CertifyError::Hypothesis("no knot in the family has a positive obstruction range".into()))
        }
        r => r?,
    };
    let prime = smallest_prime_factor(n);
    let exponent = pattern.group.p_exponents(prime)[0];
    let mut combos = Vec::new();
    if options.mode == Mode::Exhaustive {
        let q = prime.pow(exponent);
        if q > options.budget.max_group_order {
            return Err(ObstructionError::BudgetExceeded { order: q as u128, budget: options.budget.max_group_order }.into());
        }
        for (pos, neg) in combinations(&selection.selected, prime, exponent, &options.budget) {
            let inst = instance(pattern, profile, family, &pos, &neg, prime)?;
            match crate::obstruction::check_slice_obstruction(&inst, &options.budget, options.self_annihilating)? {
                SliceVerdict::Obstructed(c) => combos.push(CombinationRecord { positive: pos, negative: neg, certificate: c.compact() }),
                SliceVerdict::Inconclusive { unobstructed, .. } => {
                    return Err(CertifyError::Inconclusive { positive: pos, negative: neg, unobstructed })
                }
            }
        }
    }
    Ok(IndependenceCertificate {
        tool: TOOL.into(),
        conventions: Conventions::current(options.self_annihilating),
        options: *options,
        pattern: pattern.clone(),
        profile: profile.clone(),
        family: family.to_vec(),
        n,
        prime,
        exponent,
        ordering,
        selection,
        combinations: combos,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub combinations: usize,
    pub subgroups: usize,
    pub witnesses: usize,
}

/// Recomputes the certificate from its inputs, then checks every witness
/// through `obstruction_sum` and every candidate subgroup for a witness.
pub fn verify_certificate(cert: &IndependenceCertificate) -> Result<VerifyReport, CertifyError> {
    let fail = |m: String| Err(CertifyError::Verification(m));
    let fresh = certify_independence(&cert.pattern, &cert.profile, &cert.family, &cert.options)?;
    let mut expect = fresh.clone();
    expect.tool = cert.tool.clone();
    if &expect != cert {
        return fail("recomputation from the certificate inputs differs".into());
    }
    let mut report = VerifyReport::default();
    for rec in &cert.combinations {
        let inst = instance(&cert.pattern, &cert.profile, &cert.family, &rec.positive, &rec.negative, cert.prime)?;
        let c = &rec.certificate;
        for w in &c.witnesses {
            let chis: Vec<_> = w.element.iter().map(|&x| inst.character(x)).collect();
            let s = obstruction_sum(&inst, &chis)?;
            if s != w.sum || !s.excludes_zero() {
                return fail(format!("witness {:?} of +{:?} -{:?} sums to {s}", w.element, rec.positive, rec.negative));
            }
        }
        let problem = inst.slice_problem(cert.options.self_annihilating)?;
        let subs = problem.candidates(&cert.options.budget)?;
        if subs.len() != c.subgroup_count {
            return fail(format!("+{:?} -{:?}: {} candidates, certificate lists {}", rec.positive, rec.negative, subs.len(), c.subgroup_count));
        }
        let elements: HashSet<&[u64]> = c.witnesses.iter().map(|w| w.element.as_slice()).collect();
        for s in subs.iter() {
            if !s.elements(&problem.group).iter().any(|x| elements.contains(x.as_slice())) {
                return fail(format!("+{:?} -{:?}: subgroup {:?} contains no witness", rec.positive, rec.negative, s.generators(&problem.group)));
            }
        }
        report.combinations += 1;
        report.subgroups += subs.len();
        report.witnesses += c.witnesses.len();
    }
    Ok(report)
}
