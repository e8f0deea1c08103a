//! Knot expressions and their Seifert matrices.
//!
//! Knots are described symbolically: the unknot, `(2, n)` torus knots,
//! explicit Seifert matrices, mirrors, connected sums and integer multiples.
//! Evaluation produces a block-diagonal Seifert matrix. The torus constructor
//! uses the right-handed convention, so its Levine–Tristram signatures are
//! nonpositive; apply [`KnotExpr::mirror`] for the positive family.
//!
//! The text grammar accepted by [`KnotExpr::parse`]:
//!
//! ```text
//! expr  := term ('#' term)*
//! term  := ['-'] INT '*' term | '-' term | atom
//! atom  := 'unknot' | 'U' | 'torus(2,' INT ')' | 'T(2,' INT ')'
//!        | 'mirror(' expr ')' | '(' expr ')' | matrix
//! matrix:= '[' ']' | '[' row (',' row)* ']'      row := '[' INT (',' INT)* ']'
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matrix::IntMatrix;
use crate::poly::{seifert_determinant, IntegerPolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnotError {
    #[error("Seifert matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Seifert matrix must have even size, got {0}")]
    OddSize(usize),
    #[error("Seifert matrix violates det(V - V^T) = 1 (got {0})")]
    NotUnimodular(BigInt),
    #[error("torus(2,{0}) needs an odd parameter n >= 3")]
    BadTorusParameter(i64),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// Integer Seifert matrix `V` with `det(V − Vᵀ) = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SeifertMatrix(IntMatrix);

impl SeifertMatrix {
    pub fn new(m: IntMatrix) -> Result<Self, KnotError> {
        if !m.is_square() {
            return Err(KnotError::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        if !m.rows().is_multiple_of(2) {
            return Err(KnotError::OddSize(m.rows()));
        }
        let det = m.sub(&m.transpose()).determinant();
        if !det.is_one() {
            return Err(KnotError::NotUnimodular(det));
        }
        Ok(SeifertMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, KnotError> {
        let m = IntMatrix::from_rows(rows).ok_or(KnotError::NotSquare { rows: rows.len(), cols: 0 })?;
        Self::new(m)
    }

    pub fn unknot() -> Self {
        SeifertMatrix(IntMatrix::zeros(0, 0))
    }

    /// Standard bidiagonal Seifert matrix of the right-handed `T(2, n)`.
    pub fn torus(n: i64) -> Result<Self, KnotError> {
        if n < 3 || n % 2 == 0 {
            return Err(KnotError::BadTorusParameter(n));
        }
        let size = (n - 1) as usize;
        let mut m = IntMatrix::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = -1;
            if i + 1 < size {
                m[(i, i + 1)] = 1;
            }
        }
        Ok(SeifertMatrix(m))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn genus(&self) -> usize {
        self.size() / 2
    }

    /// `−Vᵀ`, a Seifert matrix for the mirror image.
    pub fn mirror(&self) -> Self {
        SeifertMatrix(self.0.transpose().neg())
    }

    pub fn connected_sum(&self, other: &Self) -> Self {
        SeifertMatrix(self.0.block_sum(&other.0))
    }

    /// `V + Vᵀ`, which presents the first homology of the double branched cover.
    pub fn symmetrized(&self) -> IntMatrix {
        self.0.symmetrized()
    }

    /// Splits into independent diagonal blocks. Each block is itself a Seifert
    /// matrix since `V − Vᵀ` is the direct sum of the block forms.
    pub fn blocks(&self) -> Vec<SeifertMatrix> {
        self.0
            .block_components()
            .into_iter()
            .map(|idx| SeifertMatrix(self.0.principal_submatrix(&idx)))
            .collect()
    }
}

impl fmt::Debug for SeifertMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeifertMatrix({})", self.0)
    }
}

impl fmt::Display for SeifertMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Normalised Alexander polynomial `det(V − tVᵀ)`: no factor of `t`, positive
/// constant term.
pub fn alexander_polynomial(v: &SeifertMatrix) -> IntegerPolynomial {
    v.blocks()
        .iter()
        .map(|b| seifert_determinant(b.matrix()))
        .fold(IntegerPolynomial::one(), |acc, p| acc.mul(&p))
        .normalized()
}

/// Symbolic knot expression.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum KnotExpr {
    Unknot,
    /// `T(2, n)`; validity of `n` is checked on evaluation.
    Torus(i64),
    Matrix(SeifertMatrix),
    Mirror(Box<KnotExpr>),
    Sum(Box<KnotExpr>, Box<KnotExpr>),
    Multiple(i64, Box<KnotExpr>),
}

impl KnotExpr {
    pub fn torus(n: i64) -> Self {
        KnotExpr::Torus(n)
    }

    pub fn mirror(self) -> Self {
        KnotExpr::Mirror(Box::new(self))
    }

    pub fn sum(self, other: KnotExpr) -> Self {
        KnotExpr::Sum(Box::new(self), Box::new(other))
    }

    pub fn multiple(m: i64, e: KnotExpr) -> Self {
        KnotExpr::Multiple(m, Box::new(e))
    }

    pub fn parse(s: &str) -> Result<Self, KnotError> {
        Parser::new(s).parse_all()
    }

    pub fn evaluate(&self) -> Result<SeifertMatrix, KnotError> {
        Ok(match self {
            KnotExpr::Unknot => SeifertMatrix::unknot(),
            KnotExpr::Torus(n) => SeifertMatrix::torus(*n)?,
            KnotExpr::Matrix(v) => v.clone(),
            KnotExpr::Mirror(e) => e.evaluate()?.mirror(),
            KnotExpr::Sum(a, b) => a.evaluate()?.connected_sum(&b.evaluate()?),
            KnotExpr::Multiple(m, e) => {
                let base = e.evaluate()?;
                let base = if *m < 0 { base.mirror() } else { base };
                let mut out = SeifertMatrix::unknot();
                for _ in 0..m.unsigned_abs() {
                    out = out.connected_sum(&base);
                }
                out
            }
        })
    }

    fn is_atom(&self) -> bool {
        matches!(self, KnotExpr::Unknot | KnotExpr::Torus(_) | KnotExpr::Matrix(_) | KnotExpr::Mirror(_))
    }
}

impl fmt::Display for KnotExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnotExpr::Unknot => write!(f, "unknot"),
            KnotExpr::Torus(n) => write!(f, "torus(2,{n})"),
            KnotExpr::Matrix(v) => write!(f, "{v}"),
            KnotExpr::Mirror(e) => write!(f, "mirror({e})"),
            KnotExpr::Sum(a, b) => {
                write!(f, "{a} # ")?;
                if matches!(**b, KnotExpr::Sum(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            KnotExpr::Multiple(m, e) => {
                if e.is_atom() || matches!(**e, KnotExpr::Multiple(..)) {
                    write!(f, "{m}*{e}")
                } else {
                    write!(f, "{m}*({e})")
                }
            }
        }
    }
}

impl fmt::Debug for KnotExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KnotExpr({self})")
    }
}

impl FromStr for KnotExpr {
    type Err = KnotError;
    fn from_str(s: &str) -> Result<Self, KnotError> {
        KnotExpr::parse(s)
    }
}

impl Serialize for KnotExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KnotExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        KnotExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(s: &str) -> Self {
        let mut toks = Vec::new();
        let chars: Vec<(usize, char)> = s.char_indices().map(|(i, c)| (i, if c == '\u{2212}' { '-' } else { c })).collect();
        let mut i = 0;
        while i < chars.len() {
            let (off, c) = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                toks.push((off, Tok::Ident(chars[start..i].iter().map(|x| x.1).collect())));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|x| x.1).collect();
                // Overflowing literals are reported by the parser as an unexpected symbol.
                match text.parse::<i64>() {
                    Ok(v) => toks.push((off, Tok::Int(v))),
                    Err(_) => toks.push((off, Tok::Sym('?'))),
                }
            } else {
                toks.push((off, Tok::Sym(c)));
                i += 1;
            }
        }
        Parser { toks, pos: 0, len: s.len() }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, KnotError> {
        Err(KnotError::Parse { offset: self.offset(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), KnotError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn int(&mut self) -> Result<i64, KnotError> {
        let neg = self.eat('-');
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected integer"),
        }
    }

    fn parse_all(mut self) -> Result<KnotExpr, KnotError> {
        if self.toks.is_empty() {
            return self.err("empty knot expression");
        }
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<KnotExpr, KnotError> {
        let mut e = self.term()?;
        while self.eat('#') {
            let rhs = self.term()?;
            e = e.sum(rhs);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<KnotExpr, KnotError> {
        let signed_int = matches!(self.peek(), Some(Tok::Sym('-'))) && matches!(self.peek_at(1), Some(Tok::Int(_)));
        if matches!(self.peek(), Some(Tok::Int(_))) || signed_int {
            let m = self.int()?;
            self.expect('*')?;
            let e = self.term()?;
            return Ok(KnotExpr::multiple(m, e));
        }
        if self.eat('-') {
            return Ok(self.term()?.mirror());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<KnotExpr, KnotError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "unknot" | "U" => Ok(KnotExpr::Unknot),
                    "torus" | "T" => {
                        self.expect('(')?;
                        let p = self.int()?;
                        if p != 2 {
                            return self.err("only torus(2,n) knots are supported");
                        }
                        self.expect(',')?;
                        let n = self.int()?;
                        self.expect(')')?;
                        Ok(KnotExpr::Torus(n))
                    }
                    "mirror" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(e.mirror())
                    }
                    other => {
                        self.pos -= 1;
                        self.err(format!("unknown constructor '{other}'"))
                    }
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('[')) => self.matrix(),
            _ => self.err("expected a knot"),
        }
    }

    fn matrix(&mut self) -> Result<KnotExpr, KnotError> {
        let start = self.offset();
        self.expect('[')?;
        let mut rows = Vec::new();
        if !self.eat(']') {
            loop {
                self.expect('[')?;
                let mut row = vec![self.int()?];
                while self.eat(',') {
                    row.push(self.int()?);
                }
                self.expect(']')?;
                rows.push(row);
                if self.eat(']') {
                    break;
                }
                self.expect(',')?;
            }
        }
        let m = IntMatrix::from_rows(&rows)
            .ok_or(KnotError::Parse { offset: start, message: "matrix rows have different lengths".into() })?;
        if rows.is_empty() {
            return Ok(KnotExpr::Matrix(SeifertMatrix::unknot()));
        }
        Ok(KnotExpr::Matrix(SeifertMatrix::new(m)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &SeifertMatrix) -> Vec<Vec<i64>> {
        v.matrix().to_rows()
    }

    #[test]
    fn unknot_is_empty() {
        assert_eq!(KnotExpr::Unknot.evaluate().unwrap().size(), 0);
    }

    #[test]
    fn trefoil_and_mirror() {
        let t = KnotExpr::torus(3).evaluate().unwrap();
        assert_eq!(rows(&t), vec![vec![-1, 1], vec![0, -1]]);
        let m = KnotExpr::torus(3).mirror().evaluate().unwrap();
        assert_eq!(rows(&m), vec![vec![1, 0], vec![-1, 1]]);
    }

    #[test]
    fn torus_parameter_checked() {
        assert_eq!(KnotExpr::torus(4).evaluate(), Err(KnotError::BadTorusParameter(4)));
        assert_eq!(KnotExpr::torus(1).evaluate(), Err(KnotError::BadTorusParameter(1)));
        assert_eq!(KnotExpr::torus(-3).evaluate(), Err(KnotError::BadTorusParameter(-3)));
    }

    #[test]
    fn multiples() {
        let t = KnotExpr::torus(3);
        assert_eq!(KnotExpr::multiple(0, t.clone()).evaluate().unwrap().size(), 0);
        assert_eq!(KnotExpr::multiple(3, t.clone()).evaluate().unwrap().size(), 6);
        let neg = KnotExpr::multiple(-2, t.clone()).evaluate().unwrap();
        let expect = t.clone().mirror().evaluate().unwrap();
        assert_eq!(neg, expect.connected_sum(&expect));
    }

    #[test]
    fn explicit_matrix_validated() {
        assert!(matches!(SeifertMatrix::from_rows(&[vec![1, 0], vec![0, 1]]), Err(KnotError::NotUnimodular(_))));
        assert!(matches!(SeifertMatrix::from_rows(&[vec![1]]), Err(KnotError::OddSize(1))));
        // figure eight
        assert!(SeifertMatrix::from_rows(&[vec![-1, 1], vec![0, 1]]).is_ok());
    }

    #[test]
    fn alexander_examples() {
        let a = |s: &str| alexander_polynomial(&KnotExpr::parse(s).unwrap().evaluate().unwrap());
        assert_eq!(a("unknot"), IntegerPolynomial::one());
        assert_eq!(a("torus(2,3)"), IntegerPolynomial::from_i64(&[1, -1, 1]));
        assert_eq!(a("torus(2,3) # mirror(torus(2,3))"), IntegerPolynomial::from_i64(&[1, -2, 3, -2, 1]));
        assert_eq!(a("torus(2,5)"), IntegerPolynomial::from_i64(&[1, -1, 1, -1, 1]));
        assert_eq!(a("[[-1,1],[0,1]]"), IntegerPolynomial::from_i64(&[1, -3, 1]));
    }

    #[test]
    fn parser_accepts_grammar() {
        let e = KnotExpr::parse("mirror(3*torus(2,5) # torus(2,3))").unwrap();
        let expect = KnotExpr::multiple(3, KnotExpr::torus(5)).sum(KnotExpr::torus(3)).mirror();
        assert_eq!(e, expect);
        assert_eq!(KnotExpr::parse("-2*T(2,3)").unwrap(), KnotExpr::multiple(-2, KnotExpr::torus(3)));
        assert_eq!(KnotExpr::parse("-U").unwrap(), KnotExpr::Unknot.mirror());
        assert_eq!(KnotExpr::parse("[]").unwrap(), KnotExpr::Matrix(SeifertMatrix::unknot()));
        assert_eq!(KnotExpr::parse("\u{2212}1*torus(2,3)").unwrap(), KnotExpr::multiple(-1, KnotExpr::torus(3)));
    }

    #[test]
    fn parser_errors_carry_offsets() {
        for bad in ["", "torus(3,5)", "torus(2,3", "knot", "2 torus(2,3)", "[[1,2],[3]]", "unknot unknot"] {
            assert!(KnotExpr::parse(bad).is_err(), "{bad:?} should fail");
        }
        match KnotExpr::parse("unknot # foo") {
            Err(KnotError::Parse { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_roundtrip_examples() {
        for s in ["unknot", "torus(2,3) # (torus(2,5) # unknot)", "-3*(torus(2,3) # unknot)", "2*mirror([[-1,1],[0,1]])"] {
            let e = KnotExpr::parse(s).unwrap();
            assert_eq!(KnotExpr::parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
