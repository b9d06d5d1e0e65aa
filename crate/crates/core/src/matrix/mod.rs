//! Dense matrices over a prime field GF(p).
//!
//! [`MatF`] is the general carrier (entries stored as `u16`, so `p < 2^16`).
//! [`Gf2Mat`] is a bit-packed square matrix over GF(2) used by the group
//! scans. Both implement [`GroupMat`], which is what the enumeration and
//! classification code is generic over.

mod gf2;
mod group;
mod rank_metric;

pub use gf2::Gf2Mat;
pub use group::{
    conjugacy_classify, fixed_point_free_count, fpf_pool_gf2, gl_enumerate, gl_enumerate_gf2,
    gl_order, invariant_factors, ConjClassInfo, GlRows,
};
pub use rank_metric::{rank_distance_spectrum, singleton_filter};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{is_prime, pow_mod};
use crate::poly::Poly;

/// Operations shared by the dense and the bit-packed representation.
pub trait GroupMat: Clone + Eq + Ord + std::hash::Hash + Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn modulus(&self) -> u32;
    fn identity_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, c: u32) -> Self;
    fn rank(&self) -> usize;
    fn inverse(&self) -> Result<Self>;
    fn to_matf(&self) -> MatF;

    /// `f(self)` by Horner's rule.
    fn eval_poly(&self, f: &Poly) -> Self {
        let id = self.identity_like();
        let mut acc = id.scale(0);
        for &c in f.coeffs.iter().rev() {
            acc = acc.mul(self).add(&id.scale(c as u32));
        }
        acc
    }

    fn is_identity(&self) -> bool {
        *self == self.identity_like()
    }

    fn is_invertible(&self) -> bool {
        self.rank() == self.dim()
    }

    /// `rank(I - self) == L`, i.e. 1 is not an eigenvalue.
    fn is_fixed_point_free(&self) -> bool {
        self.identity_like().sub(self).rank() == self.dim()
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.identity_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative order by repeated multiplication; `None` if singular.
    fn order(&self) -> Option<u64> {
        if !self.is_invertible() {
            return None;
        }
        let id = self.identity_like();
        let mut x = self.clone();
        let mut n = 1;
        while x != id {
            x = x.mul(self);
            n += 1;
        }
        Some(n)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawMat")]
pub struct MatF {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u16>,
}

#[derive(Deserialize)]
struct RawMat {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl TryFrom<RawMat> for MatF {
    type Error = Error;

    fn try_from(raw: RawMat) -> Result<Self> {
        MatF::from_vec(raw.p, raw.rows, raw.cols, raw.entries)
    }
}

impl fmt::Debug for MatF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatF(p={}, ", self.p)?;
        f.debug_list().entries(self.row_iter()).finish()?;
        write!(f, ")")
    }
}

impl fmt::Display for MatF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.row_iter() {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", line.join(" "))?;
        }
        Ok(())
    }
}

fn check_modulus(p: u32) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if p >= 1 << 16 {
        return Err(Error::InvalidParameter(format!("matrix modulus {p} exceeds 2^16")));
    }
    Ok(())
}

/// Arguments for [`mat_ops`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatOp {
    Mul,
    Add,
    Sub,
    Inv,
    Det,
    Pow(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatOpResult {
    Matrix(MatF),
    Scalar(u32),
}

/// Checked front end for the basic operations; `b` is only read by the
/// binary ones.
pub fn mat_ops(a: &MatF, b: Option<&MatF>, op: MatOp) -> Result<MatOpResult> {
    let other = || b.ok_or_else(|| Error::InvalidParameter("missing second operand".into()));
    match op {
        MatOp::Mul => Ok(MatOpResult::Matrix(a.try_mul(other()?)?)),
        MatOp::Add => {
            a.check_same_shape(other()?)?;
            Ok(MatOpResult::Matrix(a.add(other()?)))
        }
        MatOp::Sub => {
            a.check_same_shape(other()?)?;
            Ok(MatOpResult::Matrix(a.sub(other()?)))
        }
        MatOp::Inv => Ok(MatOpResult::Matrix(a.inverse()?)),
        MatOp::Det => Ok(MatOpResult::Scalar(a.det()?)),
        MatOp::Pow(e) => {
            a.check_square()?;
            Ok(MatOpResult::Matrix(a.pow(e)))
        }
    }
}

pub fn mat_rank(m: &MatF) -> usize {
    m.rank()
}

impl MatF {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> MatF {
        MatF {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> MatF {
        let mut m = MatF::zeros(p, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(p: u32, n: usize, c: u32) -> MatF {
        MatF::identity(p, n).scale(c)
    }

    pub fn from_vec(p: u32, rows: usize, cols: usize, entries: Vec<u32>) -> Result<MatF> {
        check_modulus(p)?;
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(&v) = entries.iter().find(|&&v| v >= p) {
            return Err(Error::InvalidParameter(format!("entry {v} not reduced mod {p}")));
        }
        Ok(MatF {
            p,
            rows,
            cols,
            entries: entries.into_iter().map(|v| v as u16).collect(),
        })
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> Result<MatF> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        MatF::from_vec(p, rows.len(), cols, rows.concat())
    }

    pub fn from_fn(p: u32, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u32) -> MatF {
        let mut m = MatF::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.entries[i * cols + j] = (f(i, j) % p) as u16;
            }
        }
        m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j] as u32
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.cols + j] = (v % self.p) as u16;
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u16]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    fn check_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    fn check_same_shape(&self, other: &MatF) -> Result<()> {
        if self.p != other.p {
            return Err(Error::FieldMismatch(format!("GF({}) vs GF({})", self.p, other.p)));
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &MatF, f: impl Fn(u32, u32) -> u32) -> MatF {
        assert_eq!((self.p, self.rows, self.cols), (other.p, other.rows, other.cols));
        MatF {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a as u32, b as u32) as u16)
                .collect(),
        }
    }

    /// Panics on shape mismatch; see [`mat_ops`] for the checked form.
    pub fn add(&self, other: &MatF) -> MatF {
        let p = self.p;
        self.zip(other, |a, b| (a + b) % p)
    }

    pub fn sub(&self, other: &MatF) -> MatF {
        let p = self.p;
        self.zip(other, |a, b| (a + p - b) % p)
    }

    pub fn neg(&self) -> MatF {
        self.scale(self.p - 1)
    }

    pub fn scale(&self, c: u32) -> MatF {
        let p = self.p as u64;
        let c = c as u64 % p;
        MatF {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&a| (a as u64 * c % p) as u16)
                .collect(),
        }
    }

    pub fn try_mul(&self, other: &MatF) -> Result<MatF> {
        if self.p != other.p {
            return Err(Error::FieldMismatch(format!("GF({}) vs GF({})", self.p, other.p)));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul(other))
    }

    /// Panics on shape mismatch; see [`MatF::try_mul`].
    pub fn mul(&self, other: &MatF) -> MatF {
        assert_eq!(self.p, other.p, "modulus mismatch");
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let p = self.p as u64;
        let n = other.cols;
        let mut out = vec![0u64; self.rows * n];
        for i in 0..self.rows {
            let acc = &mut out[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    *slot += a as u64 * b as u64;
                }
                // keep the accumulators small enough for the next pass
                if p > 256 {
                    for slot in acc.iter_mut() {
                        *slot %= p;
                    }
                }
            }
        }
        MatF {
            p: self.p,
            rows: self.rows,
            cols: n,
            entries: out.into_iter().map(|v| (v % p) as u16).collect(),
        }
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows);
        let p = self.p as u64;
        let mut out = vec![0u64; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (slot, &b) in out.iter_mut().zip(self.row(i)) {
                *slot = (*slot + a as u64 * b as u64) % p;
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }

    pub fn transpose(&self) -> MatF {
        MatF::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn pow(&self, mut e: u64) -> MatF {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = MatF::identity(self.p, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    fn inv_mod(&self, a: u32) -> u32 {
        pow_mod(a as u64, self.p as u64 - 2, self.p as u64) as u32
    }

    /// Row-reduce a working copy; returns (pivot columns, determinant factor
    /// of the eliminated square part).
    fn eliminate(&self, work: &mut [Vec<u32>], aug: Option<&mut [Vec<u32>]>, full: bool) -> (Vec<usize>, u32) {
        let p = self.p as u64;
        let mut aug = aug;
        let rows = work.len();
        let cols = work.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut det = 1u64;
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| work[i][c] != 0) else {
                continue;
            };
            if piv != r {
                work.swap(piv, r);
                if let Some(a) = aug.as_deref_mut() {
                    a.swap(piv, r);
                }
                det = (p - det) % p;
            }
            let pv = work[r][c];
            det = det * pv as u64 % p;
            let inv = self.inv_mod(pv) as u64;
            for v in work[r].iter_mut() {
                *v = (*v as u64 * inv % p) as u32;
            }
            if let Some(a) = aug.as_deref_mut() {
                for v in a[r].iter_mut() {
                    *v = (*v as u64 * inv % p) as u32;
                }
            }
            let start = if full { 0 } else { r + 1 };
            for i in start..rows {
                if i == r || work[i][c] == 0 {
                    continue;
                }
                let f = work[i][c] as u64;
                let src = work[r].clone();
                for (d, &s) in work[i].iter_mut().zip(&src) {
                    *d = ((*d as u64 + (p - f) * s as u64) % p) as u32;
                }
                if let Some(a) = aug.as_deref_mut() {
                    let src = a[r].clone();
                    for (d, &s) in a[i].iter_mut().zip(&src) {
                        *d = ((*d as u64 + (p - f) * s as u64) % p) as u32;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (pivots, det as u32)
    }

    fn to_rows(&self) -> Vec<Vec<u32>> {
        self.row_iter()
            .map(|r| r.iter().map(|&v| v as u32).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        if self.p == 2 && self.rows <= 8 && self.cols <= 8 && self.is_square() {
            return Gf2Mat::from_matf(self).expect("small GF(2) matrix").rank();
        }
        let mut w = self.to_rows();
        self.eliminate(&mut w, None, false).0.len()
    }

    pub fn det(&self) -> Result<u32> {
        self.check_square()?;
        let mut w = self.to_rows();
        let (pivots, det) = self.eliminate(&mut w, None, false);
        Ok(if pivots.len() == self.rows { det } else { 0 })
    }

    pub fn inverse(&self) -> Result<MatF> {
        self.check_square()?;
        let n = self.rows;
        let mut w = self.to_rows();
        let mut aug = MatF::identity(self.p, n).to_rows();
        let (pivots, _) = self.eliminate(&mut w, Some(&mut aug), true);
        if pivots.len() < n {
            return Err(Error::Singular);
        }
        MatF::from_rows(self.p, &aug)
    }

    /// A matrix `d` with `self · d = I` for a full-row-rank matrix, supported
    /// on the first maximal set of independent columns.
    pub fn right_inverse(&self) -> Result<MatF> {
        let mut w = self.to_rows();
        let (pivots, _) = self.eliminate(&mut w, None, false);
        if pivots.len() < self.rows {
            return Err(Error::Singular);
        }
        let square = MatF::from_fn(self.p, self.rows, self.rows, |i, j| self.get(i, pivots[j]));
        let inv = square.inverse()?;
        let mut d = MatF::zeros(self.p, self.cols, self.rows);
        for (k, &c) in pivots.iter().enumerate() {
            for j in 0..self.rows {
                d.set(c, j, inv.get(k, j));
            }
        }
        Ok(d)
    }

    /// Horizontal juxtaposition `[m_1 m_2 ...]`.
    pub fn hstack(blocks: &[&MatF]) -> Result<MatF> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidParameter("no blocks".into()))?;
        if blocks.iter().any(|b| b.rows != first.rows || b.p != first.p) {
            return Err(Error::DimensionMismatch("row counts differ".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = MatF::zeros(first.p, first.rows, cols);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                out.entries[i * cols + off..i * cols + off + b.cols].copy_from_slice(b.row(i));
            }
            off += b.cols;
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[&MatF]) -> Result<MatF> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidParameter("no blocks".into()))?;
        if blocks.iter().any(|b| b.cols != first.cols || b.p != first.p) {
            return Err(Error::DimensionMismatch("column counts differ".into()));
        }
        let entries = blocks.iter().flat_map(|b| b.entries.iter().copied()).collect();
        Ok(MatF {
            p: first.p,
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols: first.cols,
            entries,
        })
    }

    pub fn block_diag(blocks: &[&MatF]) -> Result<MatF> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidParameter("no blocks".into()))?;
        if blocks.iter().any(|b| b.p != first.p) {
            return Err(Error::FieldMismatch("blocks over different fields".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = MatF::zeros(first.p, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                let start = (r0 + i) * cols + c0;
                out.entries[start..start + b.cols].copy_from_slice(b.row(i));
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// The `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatF {
        MatF::from_fn(self.p, rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Characteristic polynomial `det(xI - self)` via Hessenberg reduction.
    pub fn char_poly(&self) -> Poly {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.p as u64;
        let mut h: Vec<Vec<u64>> = self
            .row_iter()
            .map(|r| r.iter().map(|&v| v as u64).collect())
            .collect();
        // similarity transform to upper Hessenberg form
        for c in 0..n.saturating_sub(2) {
            let Some(piv) = (c + 1..n).find(|&i| h[i][c] != 0) else {
                continue;
            };
            if piv != c + 1 {
                h.swap(piv, c + 1);
                for row in h.iter_mut() {
                    row.swap(piv, c + 1);
                }
            }
            let inv = pow_mod(h[c + 1][c], p - 2, p);
            for i in c + 2..n {
                let f = h[i][c] * inv % p;
                if f == 0 {
                    continue;
                }
                for j in 0..n {
                    h[i][j] = (h[i][j] + (p - f) * h[c + 1][j]) % p;
                }
                for row in h.iter_mut() {
                    row[c + 1] = (row[c + 1] + f * row[i]) % p;
                }
            }
        }
        // characteristic polynomials of the leading principal blocks
        let mut polys = vec![Poly::one(self.p as u64)];
        for m in 1..=n {
            let x_minus = Poly::new(p, vec![(p - h[m - 1][m - 1]) % p, 1]);
            let mut next = x_minus.mul(&polys[m - 1]);
            let mut t = 1u64;
            for i in 1..m {
                t = t * h[m - i][m - i - 1] % p;
                let coef = t * h[m - i - 1][m - 1] % p;
                let term = polys[m - i - 1].mul(&Poly::new(p, vec![coef]));
                next = next.sub(&term);
            }
            polys.push(next);
        }
        polys.pop().expect("nonempty")
    }

    pub fn to_gf2(&self) -> Option<Gf2Mat> {
        Gf2Mat::from_matf(self)
    }
}

impl GroupMat for MatF {
    fn dim(&self) -> usize {
        self.rows
    }

    fn modulus(&self) -> u32 {
        self.p
    }

    fn identity_like(&self) -> Self {
        MatF::identity(self.p, self.rows)
    }

    fn mul(&self, other: &Self) -> Self {
        MatF::mul(self, other)
    }

    fn add(&self, other: &Self) -> Self {
        MatF::add(self, other)
    }

    fn sub(&self, other: &Self) -> Self {
        MatF::sub(self, other)
    }

    fn scale(&self, c: u32) -> Self {
        MatF::scale(self, c)
    }

    fn rank(&self) -> usize {
        MatF::rank(self)
    }

    fn inverse(&self) -> Result<Self> {
        MatF::inverse(self)
    }

    fn to_matf(&self) -> MatF {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(rows: &[Vec<u32>]) -> MatF {
        MatF::from_rows(2, rows).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(MatF::identity(3, 4).rank(), 4);
        assert_eq!(MatF::zeros(5, 3, 3).rank(), 0);
        assert_eq!(m2(&[vec![1, 1], vec![1, 1]]).rank(), 1);
        let wide = MatF::from_rows(3, &[vec![1, 2, 0], vec![2, 1, 0]]).unwrap();
        assert_eq!(wide.rank(), 1);
    }

    #[test]
    fn companion_cube_is_identity() {
        let c = m2(&[vec![0, 1], vec![1, 1]]);
        assert_eq!(c.pow(3), MatF::identity(2, 2));
        assert_eq!(c.mul(&c), c.add(&MatF::identity(2, 2)));
        assert_eq!(GroupMat::order(&c), Some(3));
    }

    #[test]
    fn det_and_inverse() {
        assert_eq!(MatF::identity(7, 3).det().unwrap(), 1);
        let a = MatF::from_rows(7, &[vec![2, 3], vec![1, 4]]).unwrap();
        assert_eq!(a.det().unwrap(), 5);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), MatF::identity(7, 2));
        let s = MatF::from_rows(7, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(s.inverse(), Err(Error::Singular));
        assert_eq!(s.det().unwrap(), 0);
        // odd permutation flips the sign
        let swap = MatF::from_rows(5, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(swap.det().unwrap(), 4);
    }

    #[test]
    fn checked_ops() {
        let a = MatF::identity(2, 2);
        let b = MatF::identity(2, 3);
        assert!(matches!(mat_ops(&a, Some(&b), MatOp::Mul), Err(Error::DimensionMismatch(_))));
        assert!(matches!(
            mat_ops(&m2(&[vec![1, 1], vec![1, 1]]), None, MatOp::Inv),
            Err(Error::Singular)
        ));
        assert_eq!(mat_ops(&a, None, MatOp::Det).unwrap(), MatOpResult::Scalar(1));
        assert!(MatF::from_vec(2, 1, 1, vec![2]).is_err());
        assert!(MatF::from_vec(4, 1, 1, vec![1]).is_err());
    }

    #[test]
    fn right_inverse_of_wide_matrix() {
        let m = MatF::from_rows(3, &[vec![0, 1, 2, 1], vec![1, 1, 0, 2]]).unwrap();
        let d = m.right_inverse().unwrap();
        assert_eq!(m.mul(&d), MatF::identity(3, 2));
    }

    #[test]
    fn char_poly_matches_determinant_expansion() {
        // oracle: evaluate det(cI - A) at every c in GF(p) and compare with
        // the polynomial's values; degree n < p pins the polynomial down
        let a = MatF::from_rows(
            7,
            &[vec![1, 2, 3], vec![4, 5, 6], vec![0, 1, 3]],
        )
        .unwrap();
        let f = a.char_poly();
        assert_eq!(f.degree(), Some(3));
        for c in 0..7u32 {
            let d = MatF::scalar(7, 3, c).sub(&a).det().unwrap();
            assert_eq!(f.eval(c as u64), d as u64);
        }
        assert!(a.eval_poly(&f).is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let a = MatF::from_rows(3, &[vec![1, 2], vec![0, 1]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"p":3,"rows":2,"cols":2,"entries":[1,2,0,1]}"#);
        let b: MatF = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<MatF>(r#"{"p":3,"rows":1,"cols":1,"entries":[5]}"#).is_err());
    }

    #[test]
    fn stacking() {
        let i = MatF::identity(2, 2);
        let z = MatF::zeros(2, 2, 1);
        let h = MatF::hstack(&[&i, &z]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 3));
        let d = MatF::block_diag(&[&i, &MatF::identity(2, 1)]).unwrap();
        assert_eq!(d, MatF::identity(2, 3));
        assert_eq!(d.block(1, 1, 2, 2), i);
    }
}
