//! Smith normal form over the integers with unimodular transforms.
//!
//! Entries are `i128` with checked arithmetic; overflow is reported, never
//! wrapped. The pivot is always the nonzero entry of smallest absolute value.

use thiserror::Error;

use crate::matrix::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("integer overflow during Smith normal form")]
pub struct SnfOverflow;

pub type Mat = Vec<Vec<i128>>;

/// `P·A·Q = D` with `D` diagonal, `d_1 | d_2 | …`, all `d_i ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<i128>,
    pub p: Mat,
    pub p_inv: Mat,
    pub q: Mat,
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn axpy(dst: &mut [i128], src: &[i128], k: i128) -> Result<(), SnfOverflow> {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = k.checked_mul(s).and_then(|t| d.checked_add(t)).ok_or(SnfOverflow)?;
    }
    Ok(())
}

struct State {
    a: Mat,
    p: Mat,
    p_inv: Mat,
    q: Mat,
}

impl State {
    /// row_i += k·row_j
    fn add_row(&mut self, i: usize, j: usize, k: i128) -> Result<(), SnfOverflow> {
        let (src_a, src_p) = (self.a[j].clone(), self.p[j].clone());
        axpy(&mut self.a[i], &src_a, k)?;
        axpy(&mut self.p[i], &src_p, k)?;
        // P⁻¹ ← P⁻¹·E⁻¹: col_j −= k·col_i
        for row in &mut self.p_inv {
            row[j] = k.checked_mul(row[i]).and_then(|t| row[j].checked_sub(t)).ok_or(SnfOverflow)?;
        }
        Ok(())
    }

    /// col_i += k·col_j
    fn add_col(&mut self, i: usize, j: usize, k: i128) -> Result<(), SnfOverflow> {
        for m in [&mut self.a, &mut self.q] {
            for row in m.iter_mut() {
                row[i] = k.checked_mul(row[j]).and_then(|t| row[i].checked_add(t)).ok_or(SnfOverflow)?;
            }
        }
        Ok(())
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.p.swap(i, j);
        for row in &mut self.p_inv {
            row.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for m in [&mut self.a, &mut self.q] {
            for row in m.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut().chain(self.p[i].iter_mut()) {
            *x = -*x;
        }
        for row in &mut self.p_inv {
            row[i] = -row[i];
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithForm, SnfOverflow> {
    let (r, c) = (m.rows(), m.cols());
    let a: Mat = (0..r).map(|i| (0..c).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut st = State { a, p: identity(r), p_inv: identity(r), q: identity(c) };
    let mut diag = Vec::new();
    for t in 0..r.min(c) {
        let Some((pi, pj)) = smallest(&st.a, t..r, t..c) else {
            break;
        };
        st.swap_rows(t, pi);
        st.swap_cols(t, pj);
        loop {
            let d = st.a[t][t];
            let mut dirty = false;
            for i in t + 1..r {
                let x = st.a[i][t];
                if x != 0 {
                    st.add_row(i, t, -x.div_euclid(d))?;
                    dirty |= st.a[i][t] != 0;
                }
            }
            for j in t + 1..c {
                let x = st.a[t][j];
                if x != 0 {
                    st.add_col(j, t, -x.div_euclid(d))?;
                    dirty |= st.a[t][j] != 0;
                }
            }
            if dirty {
                let (pi, pj) = smallest_cross(&st.a, t, r, c);
                st.swap_rows(t, pi);
                st.swap_cols(t, pj);
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| st.a[i][j] % d != 0));
            match bad {
                Some(i) => st.add_row(t, i, 1)?,
                None => break,
            }
        }
        if st.a[t][t] < 0 {
            st.negate_row(t);
        }
        diag.push(st.a[t][t]);
    }
    diag.resize(r.min(c), 0);
    Ok(SmithForm { diag, p: st.p, p_inv: st.p_inv, q: st.q })
}

fn smallest(a: &Mat, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Option<(usize, usize)> {
    rows.flat_map(|i| cols.clone().map(move |j| (i, j)))
        .filter(|&(i, j)| a[i][j] != 0)
        .min_by_key(|&(i, j)| a[i][j].unsigned_abs())
}

/// Smallest nonzero entry in row `t` or column `t`.
fn smallest_cross(a: &Mat, t: usize, r: usize, c: usize) -> (usize, usize) {
    (t..r)
        .map(|i| (i, t))
        .chain((t..c).map(|j| (t, j)))
        .filter(|&(i, j)| a[i][j] != 0)
        .min_by_key(|&(i, j)| a[i][j].unsigned_abs())
        .expect("pivot row or column is nonzero")
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Option<Mat> {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter().zip(b).try_fold(0i128, |acc, (&x, brow)| x.checked_mul(brow[j]).and_then(|t| acc.checked_add(t)))
                })
                .collect()
        })
        .collect()
}
