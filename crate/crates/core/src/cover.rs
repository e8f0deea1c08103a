//! First homology of the 2-fold branched cover, its linking form, characters,
//! and the surgery model of twisted Whitehead patterns.
//!
//! `H₁` is presented by `A = V + Vᵀ`. With `P·A·Q = D` in Smith form the
//! invariant-factor generators are columns of `P⁻¹`, and the linking form
//! `xᵀA⁻¹y mod 1` on them is `(P⁻ᵀQ)_ij / d_j`.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knot::SeifertMatrix;
use crate::matrix::IntMatrix;
use crate::modular::is_prime;
use crate::snf::{smith_normal_form, SnfOverflow};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("invariant factors must exceed 1 and form a divisibility chain, got {0:?}")]
    BadInvariants(Vec<u64>),
    #[error("element {0:?} does not have one coordinate per invariant factor")]
    BadElement(Vec<i64>),
    #[error("character {0:?} is not a character of this group")]
    BadCharacter(Vec<u64>),
    #[error("linking form needs a nontrivial group")]
    TrivialGroup,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} does not divide the group order {order}")]
    PrimeDoesNotDivide { p: u64, order: u64 },
    #[error("pattern P({a},{b}) has ab = 0: its branched cover homology is trivial (the Alexander polynomial is trivial)")]
    DegenerateWhitehead { a: i64, b: i64 },
    #[error("pattern data inconsistent: {0}")]
    BadPattern(String),
    #[error(transparent)]
    Overflow(#[from] SnfOverflow),
}

/// `Z_{d₁} ⊕ … ⊕ Z_{d_r}` with `d₁ | d₂ | …` and every `d_i > 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    invariants: Vec<u64>,
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = CoverError;
    fn try_from(v: Vec<u64>) -> Result<Self, CoverError> {
        FiniteAbelianGroup::new(v)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.invariants
    }
}

impl FiniteAbelianGroup {
    pub fn new(invariants: Vec<u64>) -> Result<Self, CoverError> {
        let ok = invariants.iter().all(|&d| d > 1) && invariants.windows(2).all(|w| w[1] % w[0] == 0);
        if !ok {
            return Err(CoverError::BadInvariants(invariants));
        }
        Ok(FiniteAbelianGroup { invariants })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { invariants: Vec::new() }
    }

    /// `Z_n`; trivial for `n = 1`.
    pub fn cyclic(n: u64) -> Self {
        assert!(n >= 1);
        FiniteAbelianGroup { invariants: if n == 1 { Vec::new() } else { vec![n] } }
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariants.len() <= 1
    }

    pub fn reduce(&self, x: &[i64]) -> Result<Vec<u64>, CoverError> {
        if x.len() != self.rank() {
            return Err(CoverError::BadElement(x.to_vec()));
        }
        Ok(x.iter().zip(&self.invariants).map(|(&v, &d)| v.rem_euclid(d as i64) as u64).collect())
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        x.iter().zip(&self.invariants).fold(1, |acc, (&v, &d)| acc.lcm(&(d / v.gcd(&d))))
    }

    /// Whether `x` generates the whole group.
    pub fn generates(&self, x: &[u64]) -> bool {
        self.is_cyclic() && self.element_order(x) == self.order()
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for &d in &self.invariants {
            out = out.into_iter().flat_map(|e| (0..d).map(move |v| [e.as_slice(), &[v]].concat())).collect();
        }
        out
    }

    /// Exponent of `p` in the order of the `p`-primary part, factor by factor.
    pub fn p_exponents(&self, p: u64) -> Vec<u32> {
        self.invariants
            .iter()
            .map(|&d| {
                let (mut d, mut e) = (d, 0);
                while d % p == 0 {
                    d /= p;
                    e += 1;
                }
                e
            })
            .collect()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.invariants.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Homomorphism to `Q/Z`, stored by its values `numerators[i] / d_i` on the
/// invariant-factor generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character {
    pub invariants: Vec<u64>,
    pub numerators: Vec<u64>,
}

impl Character {
    pub fn new(group: &FiniteAbelianGroup, numerators: Vec<u64>) -> Result<Self, CoverError> {
        if numerators.len() != group.rank() || numerators.iter().zip(group.invariants()).any(|(&c, &d)| c >= d) {
            return Err(CoverError::BadCharacter(numerators));
        }
        Ok(Character { invariants: group.invariants().to_vec(), numerators })
    }

    pub fn zero(group: &FiniteAbelianGroup) -> Self {
        Character { invariants: group.invariants().to_vec(), numerators: vec![0; group.rank()] }
    }

    pub fn is_zero(&self) -> bool {
        self.numerators.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        let numerators = self.numerators.iter().zip(&self.invariants).map(|(&c, &d)| (d - c) % d).collect();
        Character { invariants: self.invariants.clone(), numerators }
    }

    pub fn belongs_to(&self, group: &FiniteAbelianGroup) -> bool {
        self.invariants == group.invariants()
    }

    pub fn order(&self) -> u64 {
        self.numerators.iter().zip(&self.invariants).fold(1, |acc, (&c, &d)| acc.lcm(&(d / c.gcd(&d))))
    }

    /// Values on the generators.
    pub fn values(&self) -> Vec<Rational64> {
        self.numerators.iter().zip(&self.invariants).map(|(&c, &d)| Rational64::new(c as i64, d as i64)).collect()
    }

    /// `χ(x)` in `[0, 1)`.
    pub fn eval(&self, x: &[u64]) -> Rational64 {
        let sum = self.values().iter().zip(x).fold(Rational64::from_integer(0), |acc, (v, &xi)| acc + v * xi as i64);
        frac(sum)
    }
}

/// Representative in `[0, 1)`.
pub fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// Characters of `G` killed by `p^max_power` (all of the `p`-primary dual when
/// `max_power` is `None`). Listed as `0` followed by pairs `χ, −χ`.
pub fn characters_of_order(group: &FiniteAbelianGroup, p: u64, max_power: Option<u32>) -> Result<Vec<Character>, CoverError> {
    if !is_prime(p) {
        return Err(CoverError::NotPrime(p));
    }
    if !group.order().is_multiple_of(p) {
        return Err(CoverError::PrimeDoesNotDivide { p, order: group.order() });
    }
    let exps = group.p_exponents(p);
    let mut all = vec![Vec::new()];
    for (&d, &e) in group.invariants().iter().zip(&exps) {
        let e = max_power.map_or(e, |m| m.min(e));
        let q = p.pow(e);
        let step = d / q;
        all = all.into_iter().flat_map(|c| (0..q).map(move |t| [c.as_slice(), &[t * step]].concat())).collect();
    }
    all.sort();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for nums in all {
        let chi = Character { invariants: group.invariants().to_vec(), numerators: nums };
        if !seen.insert(chi.clone()) {
            continue;
        }
        let neg = chi.neg();
        out.push(chi);
        if seen.insert(neg.clone()) {
            out.push(neg);
        }
    }
    Ok(out)
}

/// `H₁` of the 2-fold branched cover with the linking matrix on its
/// invariant-factor generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverHomology {
    pub group: FiniteAbelianGroup,
    /// Generators as integer vectors in the Seifert basis.
    pub generators: Vec<Vec<i64>>,
    /// `λ(g_i, g_j)` in `[0, 1)`.
    pub linking: Vec<Vec<Rational64>>,
}

impl CoverHomology {
    pub fn linking_form(&self, x: &[u64], y: &[u64]) -> Result<Rational64, CoverError> {
        linking_on(&self.group, &self.linking, x, y)
    }
}

fn linking_on(group: &FiniteAbelianGroup, linking: &[Vec<Rational64>], x: &[u64], y: &[u64]) -> Result<Rational64, CoverError> {
    if group.is_trivial() {
        return Err(CoverError::TrivialGroup);
    }
    let r = group.rank();
    if x.len() != r || y.len() != r {
        return Err(CoverError::BadElement(x.iter().chain(y).map(|&v| v as i64).collect()));
    }
    let mut s = Rational64::from_integer(0);
    for i in 0..r {
        for j in 0..r {
            let l = linking[i][j];
            s += l * ((x[i] as i128 * y[j] as i128) % *l.denom() as i128) as i64;
        }
    }
    Ok(frac(s))
}

/// Cokernel of a nonsingular symmetric integer matrix with its linking form.
pub fn cokernel_with_linking(a: &IntMatrix) -> Result<CoverHomology, CoverError> {
    let s = smith_normal_form(a)?;
    let n = a.rows();
    let mut invariants = Vec::new();
    let mut generators = Vec::new();
    let mut cols = Vec::new();
    for (i, &d) in s.diag.iter().enumerate() {
        assert!(d != 0, "presentation matrix is singular");
        if d > 1 {
            invariants.push(d as u64);
            generators.push((0..n).map(|k| s.p_inv[k][i] as i64).collect());
            cols.push(i);
        }
    }
    let linking = cols
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| {
                    let num = (0..n).try_fold(0i128, |acc, k| s.p_inv[k][i].checked_mul(s.q[k][j]).and_then(|t| acc.checked_add(t)));
                    let num = num.ok_or(SnfOverflow)?;
                    let d = s.diag[j];
                    Ok(frac(Rational64::new(num.rem_euclid(d) as i64, d as i64)))
                })
                .collect::<Result<Vec<_>, CoverError>>()
        })
        .collect::<Result<Vec<_>, CoverError>>()?;
    Ok(CoverHomology { group: FiniteAbelianGroup::new(invariants)?, generators, linking })
}

pub fn cover_homology(v: &SeifertMatrix) -> Result<CoverHomology, CoverError> {
    cokernel_with_linking(&v.symmetrized())
}

pub fn homology_from_seifert(v: &SeifertMatrix) -> Result<FiniteAbelianGroup, CoverError> {
    Ok(cover_homology(v)?.group)
}

/// `xᵀ(V+Vᵀ)⁻¹y mod 1` for `x, y` in invariant-factor coordinates.
pub fn linking_form(v: &SeifertMatrix, x: &[u64], y: &[u64]) -> Result<Rational64, CoverError> {
    cover_homology(v)?.linking_form(x, y)
}

/// Cover data of a pattern `P` in the solid torus: `H₁` of the branched cover
/// of `P(U)`, its linking matrix, and the classes of the two lifts of the
/// solid torus axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCover {
    pub label: String,
    pub group: FiniteAbelianGroup,
    pub linking: Vec<Vec<Rational64>>,
    pub v1: Vec<u64>,
    pub v2: Vec<u64>,
    pub winding_number: i64,
}

impl PatternCover {
    pub fn new(
        label: impl Into<String>,
        group: FiniteAbelianGroup,
        linking: Vec<Vec<Rational64>>,
        v1: Vec<u64>,
        v2: Vec<u64>,
        winding_number: i64,
    ) -> Result<Self, CoverError> {
        let r = group.rank();
        let valid = |x: &[u64]| x.len() == r && x.iter().zip(group.invariants()).all(|(&v, &d)| v < d);
        if !valid(&v1) || !valid(&v2) {
            return Err(CoverError::BadPattern("axis lift classes are not group elements".into()));
        }
        if linking.len() != r || linking.iter().any(|row| row.len() != r) {
            return Err(CoverError::BadPattern("linking matrix has the wrong shape".into()));
        }
        let symmetric = (0..r).all(|i| (0..r).all(|j| frac(linking[i][j]) == frac(linking[j][i])));
        if !symmetric {
            return Err(CoverError::BadPattern("linking matrix is not symmetric".into()));
        }
        let linking = linking.into_iter().map(|row| row.into_iter().map(frac).collect()).collect();
        Ok(PatternCover { label: label.into(), group, linking, v1, v2, winding_number })
    }

    pub fn linking_form(&self, x: &[u64], y: &[u64]) -> Result<Rational64, CoverError> {
        linking_on(&self.group, &self.linking, x, y)
    }

    /// `χ(V₁)` in `[0, 1)`, via the embedding `Z_n ⊂ Q/Z`, `1 ↦ 1/n`.
    pub fn chi_v1(&self, chi: &Character) -> Result<Rational64, CoverError> {
        if !chi.belongs_to(&self.group) {
            return Err(CoverError::BadCharacter(chi.numerators.clone()));
        }
        Ok(chi.eval(&self.v1))
    }

    pub fn v1_generates(&self) -> bool {
        !self.group.is_trivial() && self.group.generates(&self.v1)
    }
}

/// Surgery on the Hopf link with framings `2a`, `2b`: `H₁ = Z_{|4ab−1|}`
/// generated by the meridian `m₁`, both axis lifts parallel to `m₁`, and
/// `λ(m₁, m₁) = 2b/(4ab−1)`.
pub fn whitehead_cover(a: i64, b: i64) -> Result<PatternCover, CoverError> {
    if a == 0 || b == 0 {
        return Err(CoverError::DegenerateWhitehead { a, b });
    }
    let det = 4 * a * b - 1;
    let n = det.unsigned_abs();
    let group = FiniteAbelianGroup::cyclic(n);
    let lambda = frac(Rational64::new(2 * b, det));
    PatternCover::new(format!("whitehead:{a},{b}"), group, vec![vec![lambda]], vec![1], vec![1], 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knot::KnotExpr;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn homology(s: &str) -> CoverHomology {
        cover_homology(&KnotExpr::parse(s).unwrap().evaluate().unwrap()).unwrap()
    }

    #[test]
    fn spec_groups() {
        assert!(homology("unknot").group.is_trivial());
        assert_eq!(homology("torus(2,3)").group.invariants(), &[3]);
        assert_eq!(homology("torus(2,9)").group.invariants(), &[9]);
        assert_eq!(homology("torus(2,3) # torus(2,3)").group.invariants(), &[3, 3]);
        assert_eq!(homology("torus(2,3) # torus(2,9)").group.invariants(), &[3, 9]);
    }

    #[test]
    fn trefoil_linking() {
        let h = homology("torus(2,3)");
        // (V+Vᵀ)⁻¹ has −2/3 on the diagonal, which is 1/3 mod 1.
        assert_eq!(h.linking_form(&[1], &[1]).unwrap(), r(1, 3));
        assert_eq!(h.linking_form(&[2], &[1]).unwrap(), r(2, 3));
        assert_eq!(h.linking_form(&[0], &[2]).unwrap(), r(0, 1));
        assert_eq!(cover_homology(&SeifertMatrix::unknot()).unwrap().linking_form(&[], &[]), Err(CoverError::TrivialGroup));
    }

    #[test]
    fn linking_generators_match_inverse_matrix() {
        let v = KnotExpr::parse("torus(2,5) # torus(2,3)").unwrap().evaluate().unwrap();
        let h = cover_homology(&v).unwrap();
        let a = v.symmetrized();
        let n = a.rows();
        // Brute-force A⁻¹ by Cramer over rationals on the generator vectors.
        let inv = rational_inverse(&a);
        for (i, gi) in h.generators.iter().enumerate() {
            for (j, gj) in h.generators.iter().enumerate() {
                let mut s = r(0, 1);
                for k in 0..n {
                    for l in 0..n {
                        s += inv[k][l] * (gi[k] * gj[l]);
                    }
                }
                assert_eq!(frac(s), h.linking[i][j]);
            }
        }
    }

    fn rational_inverse(a: &IntMatrix) -> Vec<Vec<Rational64>> {
        let n = a.rows();
        let mut m: Vec<Vec<Rational64>> =
            (0..n).map(|i| (0..2 * n).map(|j| if j < n { r(a[(i, j)], 1) } else { r((j - n == i) as i64, 1) }).collect()).collect();
        for c in 0..n {
            let p = (c..n).find(|&i| m[i][c] != r(0, 1)).unwrap();
            m.swap(p, c);
            let inv = m[c][c].recip();
            for x in &mut m[c] {
                *x *= inv;
            }
            let prow = m[c].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != c {
                    let f = row[c];
                    for (x, y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
        m.into_iter().map(|row| row[n..].to_vec()).collect()
    }

    #[test]
    fn characters_of_prime_power_order() {
        let z3 = FiniteAbelianGroup::cyclic(3);
        let chars = characters_of_order(&z3, 3, None).unwrap();
        assert_eq!(chars.iter().map(|c| c.numerators[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(chars[1].values(), vec![r(1, 3)]);
        assert_eq!(chars[2], chars[1].neg());
        assert_eq!(
            characters_of_order(&FiniteAbelianGroup::cyclic(5), 3, None),
            Err(CoverError::PrimeDoesNotDivide { p: 3, order: 5 })
        );
        let z9 = FiniteAbelianGroup::cyclic(9);
        let small = characters_of_order(&z9, 3, Some(1)).unwrap();
        assert_eq!(small.iter().map(|c| c.numerators[0]).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert!(small.iter().all(|c| 3 % c.order() == 0));
        assert_eq!(characters_of_order(&z9, 3, None).unwrap().len(), 9);
        assert_eq!(characters_of_order(&FiniteAbelianGroup::cyclic(15), 3, None).unwrap().len(), 3);
    }

    #[test]
    fn characters_of_non_cyclic_group() {
        let g = FiniteAbelianGroup::new(vec![3, 9]).unwrap();
        let chars = characters_of_order(&g, 3, None).unwrap();
        assert_eq!(chars.len(), 27);
        let set: std::collections::BTreeSet<_> = chars.iter().cloned().collect();
        assert_eq!(set.len(), 27);
        assert!(chars.iter().all(|c| set.contains(&c.neg())));
    }

    #[test]
    fn whitehead_examples() {
        for (a, b, n) in [(1, 1, 3u64), (2, -1, 9), (1, -1, 5)] {
            let c = whitehead_cover(a, b).unwrap();
            assert_eq!(c.group.invariants(), &[n]);
            assert!(c.v1_generates());
            assert_eq!(c.winding_number, 0);
        }
        assert_eq!(whitehead_cover(0, 5), Err(CoverError::DegenerateWhitehead { a: 0, b: 5 }));
        assert_eq!(whitehead_cover(1, 1).unwrap().linking_form(&[1], &[1]).unwrap(), r(2, 3));
    }

    #[test]
    fn whitehead_agrees_with_surgery_presentation() {
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                if a * b == 0 {
                    continue;
                }
                let m = IntMatrix::from_rows(&[vec![2 * a, 1], vec![1, 2 * b]]).unwrap();
                let h = cokernel_with_linking(&m).unwrap();
                let c = whitehead_cover(a, b).unwrap();
                assert_eq!(h.group, c.group);
                // m₁ = e₁ is a generator; compare λ(m₁, m₁) with the SNF linking matrix.
                let m1 = coordinates_of(&h, &m, &[1, 0]);
                assert_eq!(c.group.element_order(&m1), c.group.order());
                assert_eq!(h.linking_form(&m1, &m1).unwrap(), c.linking[0][0]);
            }
        }
    }

    /// Coordinates of a basis vector's class on the invariant-factor generators:
    /// solve `x ≡ Σ c_i g_i` by brute force over the (small) group.
    fn coordinates_of(h: &CoverHomology, a: &IntMatrix, x: &[i64]) -> Vec<u64> {
        let inv = rational_inverse(a);
        let n = a.rows();
        // Two vectors are equal in the cokernel iff A⁻¹(x − y) is integral.
        h.group
            .elements()
            .into_iter()
            .find(|c| {
                let mut y = vec![0i64; n];
                for (ci, g) in c.iter().zip(&h.generators) {
                    for k in 0..n {
                        y[k] += *ci as i64 * g[k];
                    }
                }
                (0..n).all(|k| (0..n).map(|l| inv[k][l] * (x[l] - y[l])).sum::<Rational64>().is_integer())
            })
            .unwrap()
    }

    #[test]
    fn group_validation_and_display() {
        assert!(FiniteAbelianGroup::new(vec![3, 5]).is_err());
        assert!(FiniteAbelianGroup::new(vec![1]).is_err());
        assert_eq!(FiniteAbelianGroup::new(vec![3, 9]).unwrap().to_string(), "Z3 + Z9");
        assert_eq!(FiniteAbelianGroup::trivial().to_string(), "0");
        let g: FiniteAbelianGroup = serde_json::from_str("[3,9]").unwrap();
        assert_eq!(g.order(), 27);
        assert!(serde_json::from_str::<FiniteAbelianGroup>("[9,3]").is_err());
    }
}
