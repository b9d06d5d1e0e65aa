//! Bit-packed square matrices over GF(2), dimension at most 8.
//!
//! Row `i` is one byte; column `c` lives at bit `n - 1 - c`, so comparing
//! the row bytes in order is the same as comparing the row-major entry
//! vectors lexicographically.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GroupMat, MatF};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf2Mat {
    n: u8,
    rows: [u8; 8],
}

impl fmt::Debug for Gf2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n as usize)
            .map(|i| format!("{:0width$b}", self.rows[i], width = self.n as usize))
            .collect();
        write!(f, "Gf2Mat[{}]", rows.join(" "))
    }
}

impl Gf2Mat {
    pub const MAX_DIM: usize = 8;

    fn mask(n: usize) -> u8 {
        if n == 8 {
            0xff
        } else {
            (1u8 << n) - 1
        }
    }

    pub fn zero(n: usize) -> Gf2Mat {
        assert!(n <= Self::MAX_DIM);
        Gf2Mat {
            n: n as u8,
            rows: [0; 8],
        }
    }

    pub fn identity(n: usize) -> Gf2Mat {
        let mut m = Gf2Mat::zero(n);
        for i in 0..n {
            m.rows[i] = 1 << (n - 1 - i);
        }
        m
    }

    /// Build from row bytes (column 0 in the most significant used bit).
    pub fn from_row_bits(n: usize, bits: &[u8]) -> Result<Gf2Mat> {
        if n > Self::MAX_DIM || bits.len() != n {
            return Err(Error::DimensionMismatch(format!("{} rows for dimension {n}", bits.len())));
        }
        let mut m = Gf2Mat::zero(n);
        for (i, &b) in bits.iter().enumerate() {
            if b & !Self::mask(n) != 0 {
                return Err(Error::InvalidParameter(format!("row {i} has bits beyond column {n}")));
            }
            m.rows[i] = b;
        }
        Ok(m)
    }

    pub fn from_matf(m: &MatF) -> Option<Gf2Mat> {
        if m.p() != 2 || !m.is_square() || m.rows() > Self::MAX_DIM {
            return None;
        }
        let n = m.rows();
        let mut out = Gf2Mat::zero(n);
        for i in 0..n {
            for c in 0..n {
                if m.get(i, c) == 1 {
                    out.rows[i] |= 1 << (n - 1 - c);
                }
            }
        }
        Some(out)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn row_bits(&self) -> &[u8] {
        &self.rows[..self.n as usize]
    }

    /// All rows packed into one word; distinct matrices of the same
    /// dimension have distinct keys, ordered like the matrices.
    pub fn key(&self) -> u64 {
        u64::from_be_bytes(self.rows)
    }

    pub fn get(&self, i: usize, c: usize) -> u8 {
        (self.rows[i] >> (self.n as usize - 1 - c)) & 1
    }

    pub fn mul(&self, other: &Gf2Mat) -> Gf2Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n as usize;
        let mut out = Gf2Mat::zero(n);
        for i in 0..n {
            let mut acc = 0u8;
            let mut bits = self.rows[i];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                acc ^= other.rows[n - 1 - b];
                bits &= bits - 1;
            }
            out.rows[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &Gf2Mat) -> Gf2Mat {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..8 {
            out.rows[i] ^= other.rows[i];
        }
        out
    }

    pub fn rank(&self) -> usize {
        let n = self.n as usize;
        let mut rows = self.rows;
        let mut rank = 0;
        for bit in (0..n).rev() {
            let m = 1u8 << bit;
            let Some(piv) = (rank..n).find(|&i| rows[i] & m != 0) else {
                continue;
            };
            rows.swap(rank, piv);
            for i in rank + 1..n {
                if rows[i] & m != 0 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn inverse(&self) -> Result<Gf2Mat> {
        let n = self.n as usize;
        let mut a = self.rows;
        let mut inv = Gf2Mat::identity(n).rows;
        for col in 0..n {
            let m = 1u8 << (n - 1 - col);
            let piv = (col..n).find(|&i| a[i] & m != 0).ok_or(Error::Singular)?;
            a.swap(col, piv);
            inv.swap(col, piv);
            for i in 0..n {
                if i != col && a[i] & m != 0 {
                    a[i] ^= a[col];
                    inv[i] ^= inv[col];
                }
            }
        }
        Ok(Gf2Mat {
            n: self.n,
            rows: inv,
        })
    }

    pub fn transpose(&self) -> Gf2Mat {
        let n = self.n as usize;
        let mut out = Gf2Mat::zero(n);
        for i in 0..n {
            for c in 0..n {
                if self.get(i, c) == 1 {
                    out.rows[c] |= 1 << (n - 1 - i);
                }
            }
        }
        out
    }
}

impl GroupMat for Gf2Mat {
    fn dim(&self) -> usize {
        self.n as usize
    }

    fn modulus(&self) -> u32 {
        2
    }

    fn identity_like(&self) -> Self {
        Gf2Mat::identity(self.n as usize)
    }

    fn mul(&self, other: &Self) -> Self {
        Gf2Mat::mul(self, other)
    }

    fn add(&self, other: &Self) -> Self {
        Gf2Mat::add(self, other)
    }

    fn sub(&self, other: &Self) -> Self {
        Gf2Mat::add(self, other)
    }

    fn scale(&self, c: u32) -> Self {
        if c.is_multiple_of(2) {
            Gf2Mat::zero(self.n as usize)
        } else {
            *self
        }
    }

    fn rank(&self) -> usize {
        Gf2Mat::rank(self)
    }

    fn inverse(&self) -> Result<Self> {
        Gf2Mat::inverse(self)
    }

    fn to_matf(&self) -> MatF {
        let n = self.n as usize;
        MatF::from_fn(2, n, n, |i, c| self.get(i, c) as u32)
    }
}
