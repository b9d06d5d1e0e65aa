//! Dense univariate polynomials over a prime field GF(p).
//!
//! Coefficients are stored low-degree first and kept trimmed (no trailing
//! zeros); the zero polynomial is the empty vector.

use serde::{Deserialize, Serialize};

use crate::numtheory::{factor, mul_mod, pow_mod};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Poly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        Poly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Poly::new(p, vec![1])
    }

    /// The monomial `x`.
    pub fn x(p: u64) -> Self {
        Poly::new(p, vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % self.p
            })
            .collect();
        Poly::new(self.p, c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        Poly::new(self.p, c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.p);
        }
        let mut c = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        Poly::new(self.p, c)
    }

    /// Quotient and remainder. Panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let p = self.p;
        let dd = divisor.degree().expect("division by zero polynomial");
        let inv_lead = pow_mod(divisor.lead(), p - 2, p);
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = mul_mod(rem[i], inv_lead, p);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                let k = i - dd + j;
                rem[k] = (rem[k] + p - mul_mod(c, dc, p)) % p;
            }
        }
        (Poly::new(p, quot), Poly::new(p, rem))
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = pow_mod(self.lead(), self.p - 2, self.p);
        Poly::new(
            self.p,
            self.coeffs.iter().map(|&c| mul_mod(c, inv, self.p)).collect(),
        )
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(&self, mut e: u64, modulus: &Poly) -> Poly {
        let mut base = self.rem(modulus);
        let mut acc = Poly::one(self.p).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            e >>= 1;
        }
        acc
    }

    /// Evaluate at a point of GF(p).
    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, x, self.p) + c) % self.p)
    }

    /// True when the root `x` of this monic polynomial generates the full
    /// multiplicative group of GF(p^k), `k = deg`.
    ///
    /// An element of order `p^k - 1` in `GF(p)[x]/(f)` forces the quotient to
    /// be a field, so irreducibility is implied.
    pub fn is_primitive(&self) -> bool {
        let Some(k) = self.degree() else { return false };
        if k == 0 || self.coeffs[0] == 0 || self.lead() != 1 {
            return false;
        }
        let Some(order) = self.p.checked_pow(k as u32).map(|q| q - 1) else {
            return false;
        };
        let x = Poly::x(self.p);
        let one = Poly::one(self.p).rem(self);
        if x.pow_mod(order, self) != one {
            return false;
        }
        factor(order)
            .into_iter()
            .all(|(r, _)| x.pow_mod(order / r, self) != one)
    }

    /// Irreducibility by trial division against all monic polynomials of
    /// degree up to half the degree. Intended for small degrees.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        for d in 1..=n / 2 {
            for cand in monic_polys(self.p, d) {
                if self.rem(&cand).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Human readable form like `x^2 + x + 1`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            let mono = match i {
                0 => String::new(),
                1 => "x".into(),
                _ => format!("x^{i}"),
            };
            terms.push(format!("{coef}{mono}"));
        }
        terms.join(" + ")
    }
}

/// Monic polynomials of degree `k` over GF(p), ordered lexicographically on
/// their coefficient lists read low-degree first.
pub fn monic_polys(p: u64, k: usize) -> impl Iterator<Item = Poly> {
    monic_polys_from(p, k, 0)
}

/// `monic_polys` starting at index `start` of the same order.
pub fn monic_polys_from(p: u64, k: usize, start: u64) -> impl Iterator<Item = Poly> {
    let count = p.pow(k as u32);
    (start..count).map(move |mut t| {
        let mut c = vec![0u64; k + 1];
        for i in (0..k).rev() {
            c[i] = t % p;
            t /= p;
        }
        c[k] = 1;
        Poly::new(p, c)
    })
}

/// Factor a polynomial of small degree into monic irreducibles with
/// multiplicities, by repeated trial division in increasing degree.
pub fn factor_small(f: &Poly) -> Vec<(Poly, u32)> {
    let mut rest = f.monic();
    let mut out = Vec::new();
    let mut d = 1;
    while let Some(deg) = rest.degree() {
        if deg == 0 {
            break;
        }
        if 2 * d > deg {
            out.push((rest.clone(), 1));
            break;
        }
        for cand in monic_polys(f.p, d) {
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(&cand);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                out.push((cand, e));
            }
        }
        d += 1;
    }
    // a leftover irreducible might duplicate an already found factor
    out.sort();
    let mut merged: Vec<(Poly, u32)> = Vec::new();
    for (g, e) in out {
        match merged.last_mut() {
            Some((h, m)) if *h == g => *m += e,
            _ => merged.push((g, e)),
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let f = Poly::new(2, vec![1, 1, 1]);
        let g = Poly::new(2, vec![1, 1]);
        assert_eq!(f.mul(&g), Poly::new(2, vec![1, 0, 0, 1]));
        let (q, r) = Poly::new(2, vec![1, 0, 0, 1]).div_rem(&g);
        assert_eq!(q, f);
        assert!(r.is_zero());
        assert_eq!(f.pretty(), "x^2 + x + 1");
    }

    #[test]
    fn primitivity() {
        assert!(Poly::new(2, vec![1, 1, 1]).is_primitive());
        // x^2 + 1 over GF(3) is irreducible, its root has order 4 not 8
        let f = Poly::new(3, vec![1, 0, 1]);
        assert!(f.is_irreducible());
        assert!(!f.is_primitive());
        // x^4 + x^3 + x^2 + x + 1 over GF(2): irreducible, order 5
        let g = Poly::new(2, vec![1, 1, 1, 1, 1]);
        assert!(g.is_irreducible());
        assert!(!g.is_primitive());
    }

    #[test]
    fn factoring() {
        // (x+1)^2 (x^2+x+1) over GF(2)
        let a = Poly::new(2, vec![1, 1]);
        let b = Poly::new(2, vec![1, 1, 1]);
        let f = a.mul(&a).mul(&b);
        assert_eq!(factor_small(&f), vec![(a, 2), (b, 1)]);
        let q = Poly::new(2, vec![1, 0, 1, 0, 0, 1]);
        assert_eq!(factor_small(&q), vec![(q.clone(), 1)]);
    }
}
