//! Enumeration of GL(L, p) and conjugacy classification.
//!
//! Invertible matrices are produced by a depth-first search that picks rows
//! one at a time outside the span of the rows chosen so far. Rows are
//! encoded as integers whose base-p digits are the entries with column 0
//! most significant, and candidates are tried in increasing order, so the
//! output is lexicographic on row-major entry vectors.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Gf2Mat, GroupMat, MatF};
use crate::config::Budget;
use crate::error::{Error, Result};
use crate::poly::{factor_small, Poly};

/// Depth-first row enumerator for GL(n, p).
#[derive(Clone, Debug)]
pub struct GlRows {
    n: usize,
    p: u32,
    q: u32,
    rows: Vec<u32>,
    spans: Vec<Vec<bool>>,
    span_lists: Vec<Vec<u32>>,
    first_row: Option<u32>,
    started: bool,
    done: bool,
}

impl GlRows {
    pub fn new(n: usize, p: u32) -> GlRows {
        assert!(n >= 1);
        let q = p.checked_pow(n as u32).expect("row space fits in u32");
        let mut spans = vec![vec![false; q as usize]; n];
        spans[0][0] = true;
        let mut span_lists = vec![Vec::new(); n];
        span_lists[0].push(0);
        GlRows {
            n,
            p,
            q,
            rows: Vec::with_capacity(n),
            spans,
            span_lists,
            first_row: None,
            started: false,
            done: false,
        }
    }

    /// Only matrices whose first row has the given code.
    pub fn with_first_row(n: usize, p: u32, first: u32) -> GlRows {
        let mut g = GlRows::new(n, p);
        g.first_row = Some(first);
        g
    }

    /// Number of distinct row codes, `p^n`.
    pub fn row_space(&self) -> u32 {
        self.q
    }

    fn add_scaled(&self, a: u32, b: u32, c: u32) -> u32 {
        if self.p == 2 {
            return if c & 1 == 1 { a ^ b } else { a };
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            out += ((a % p + c * (b % p)) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    fn find(&self, depth: usize, from: u32) -> Option<u32> {
        if depth == 0 {
            if let Some(f) = self.first_row {
                return (from <= f && f != 0 && f < self.q).then_some(f);
            }
        }
        let span = &self.spans[depth];
        (from..self.q).find(|&r| !span[r as usize])
    }

    fn push(&mut self, depth: usize, r: u32) {
        self.rows.push(r);
        if depth + 1 < self.n {
            let mut next_list = Vec::with_capacity(self.span_lists[depth].len() * self.p as usize);
            for c in 0..self.p {
                for &s in &self.span_lists[depth] {
                    next_list.push(self.add_scaled(s, r, c));
                }
            }
            let next = &mut self.spans[depth + 1];
            next.iter_mut().for_each(|v| *v = false);
            for &s in &next_list {
                next[s as usize] = true;
            }
            self.span_lists[depth + 1] = next_list;
        }
    }

    /// Move to the next matrix; its rows are then available via [`GlRows::rows`].
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        let (mut depth, mut from) = if self.started {
            let last = self.rows.pop().expect("a full matrix was produced");
            (self.n - 1, last + 1)
        } else {
            self.started = true;
            (0, 0)
        };
        loop {
            match self.find(depth, from) {
                Some(r) => {
                    self.push(depth, r);
                    if depth + 1 == self.n {
                        return true;
                    }
                    depth += 1;
                    from = 0;
                }
                None => {
                    if depth == 0 {
                        self.done = true;
                        return false;
                    }
                    depth -= 1;
                    from = self.rows.pop().expect("depth > 0 has a row") + 1;
                }
            }
        }
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn current_matf(&self) -> MatF {
        let (n, p) = (self.n, self.p);
        MatF::from_fn(p, n, n, |i, c| (self.rows[i] / p.pow((n - 1 - c) as u32)) % p)
    }

    pub fn current_gf2(&self) -> Gf2Mat {
        let bits: Vec<u8> = self.rows.iter().map(|&r| r as u8).collect();
        Gf2Mat::from_row_bits(self.n, &bits).expect("rows fit")
    }
}

/// Iterator adapter over a [`GlRows`] producing dense matrices.
pub struct GlIter<F> {
    rows: GlRows,
    make: F,
}

impl<T, F: FnMut(&GlRows) -> T> Iterator for GlIter<F> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        self.rows.advance().then(|| (self.make)(&self.rows))
    }
}

/// `|GL(n, p)| = ∏ (p^n - p^i)`, if it fits in a `u128`.
pub fn gl_order(n: usize, p: u32) -> Option<u128> {
    let q = (p as u128).checked_pow(n as u32)?;
    (0..n as u32).try_fold(1u128, |acc, i| acc.checked_mul(q - (p as u128).pow(i)))
}

/// Stream of GL(n, p) in lexicographic order.
pub fn gl_enumerate(n: usize, p: u32, budget: &Budget) -> Result<impl Iterator<Item = MatF>> {
    check_args(n, p)?;
    budget.check_enum("GL enumeration", n, p)?;
    Ok(GlIter {
        rows: GlRows::new(n, p),
        make: |g: &GlRows| g.current_matf(),
    })
}

/// Stream of GL(n, 2) as bit-packed matrices, lexicographic order.
pub fn gl_enumerate_gf2(n: usize, budget: &Budget) -> Result<impl Iterator<Item = Gf2Mat>> {
    check_args(n, 2)?;
    if n > Gf2Mat::MAX_DIM {
        return Err(Error::InvalidParameter(format!("bit-packed matrices need n <= {}", Gf2Mat::MAX_DIM)));
    }
    budget.check_enum("GL enumeration", n, 2)?;
    Ok(GlIter {
        rows: GlRows::new(n, 2),
        make: |g: &GlRows| g.current_gf2(),
    })
}

fn check_args(n: usize, p: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be >= 1".into()));
    }
    if !crate::numtheory::is_prime(p as u64) || p >= 1 << 16 {
        return Err(Error::NotPrime(p as u64));
    }
    Ok(())
}

/// Apply `f` to every element of GL(n, p), split by first row across the
/// rayon pool; results are returned in first-row order.
pub(crate) fn par_partitions<T: Send>(
    n: usize,
    p: u32,
    f: impl Fn(&mut GlRows) -> T + Sync + Send,
) -> Vec<T> {
    let q = p.pow(n as u32);
    (1..q)
        .into_par_iter()
        .map(|first| f(&mut GlRows::with_first_row(n, p, first)))
        .collect()
}

/// All fixed-point-free elements of GL(n, 2), lexicographic order.
pub fn fpf_pool_gf2(n: usize, budget: &Budget) -> Result<Vec<Gf2Mat>> {
    Ok(gl_enumerate_gf2(n, budget)?
        .filter(|m| m.is_fixed_point_free())
        .collect())
}

/// Number of invertible `B` with `rank(I - B) = n`.
pub fn fixed_point_free_count(n: usize, p: u32, budget: &Budget) -> Result<u64> {
    check_args(n, p)?;
    budget.check_enum("GL enumeration", n, p)?;
    let counts = if p == 2 && n <= Gf2Mat::MAX_DIM {
        par_partitions(n, p, |g| {
            let mut c = 0u64;
            while g.advance() {
                c += g.current_gf2().is_fixed_point_free() as u64;
            }
            c
        })
    } else {
        par_partitions(n, p, |g| {
            let mut c = 0u64;
            while g.advance() {
                c += g.current_matf().is_fixed_point_free() as u64;
            }
            c
        })
    };
    Ok(counts.into_iter().sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjClassInfo {
    pub rep: MatF,
    pub size: u64,
    pub order: u64,
    pub invariant_factors: Vec<Poly>,
    pub fixed_point_free: bool,
}

/// Complete conjugacy invariant: for every irreducible factor of the
/// characteristic polynomial, the partition of its multiplicity into the
/// sizes of the corresponding elementary divisors.
type ClassKey = Vec<(Poly, Vec<u32>)>;

struct KeyCache {
    factorizations: HashMap<Poly, Vec<(Poly, u32)>>,
}

impl KeyCache {
    fn new() -> Self {
        KeyCache {
            factorizations: HashMap::new(),
        }
    }

    fn key<M: GroupMat>(&mut self, m: &M) -> ClassKey {
        let n = m.dim();
        let chi = m.to_matf().char_poly();
        let factors = self
            .factorizations
            .entry(chi)
            .or_insert_with_key(factor_small)
            .clone();
        factors
            .into_iter()
            .map(|(g, e)| {
                let deg = g.degree().expect("nonconstant factor");
                let base = m.eval_poly(&g);
                // ranks of g(M)^i; the drops count blocks of size >= i
                let mut ranks = vec![n];
                let mut power = base.clone();
                for i in 1..=e as usize {
                    ranks.push(power.rank());
                    if i < e as usize {
                        power = power.mul(&base);
                    }
                }
                let at_least: Vec<usize> = (1..ranks.len()).map(|i| (ranks[i - 1] - ranks[i]) / deg).collect();
                let mut sizes = Vec::new();
                for (i, &c) in at_least.iter().enumerate() {
                    let next = at_least.get(i + 1).copied().unwrap_or(0);
                    for _ in 0..c - next {
                        sizes.push(i as u32 + 1);
                    }
                }
                sizes.sort_unstable_by(|a, b| b.cmp(a));
                (g, sizes)
            })
            .collect()
    }
}

fn key_to_invariant_factors(p: u64, key: &ClassKey) -> Vec<Poly> {
    let count = key.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    // k-th largest invariant factor collects the k-th largest block of each prime
    let mut out: Vec<Poly> = (0..count)
        .map(|k| {
            key.iter().fold(Poly::one(p), |acc, (g, sizes)| match sizes.get(k) {
                Some(&s) => (0..s).fold(acc, |a, _| a.mul(g)),
                None => acc,
            })
        })
        .collect();
    out.reverse();
    out
}

/// Invariant factors of `xI - m`, each dividing the next, constant ones
/// omitted.
pub fn invariant_factors(m: &MatF) -> Vec<Poly> {
    let key = KeyCache::new().key(m);
    key_to_invariant_factors(m.p() as u64, &key)
}

struct ClassAcc<M> {
    count: u64,
    rep: M,
}

fn classify_partition<M: GroupMat>(
    g: &mut GlRows,
    make: impl Fn(&GlRows) -> M,
    fpf_only: bool,
) -> HashMap<ClassKey, ClassAcc<M>> {
    let mut cache = KeyCache::new();
    let mut classes: HashMap<ClassKey, ClassAcc<M>> = HashMap::new();
    while g.advance() {
        let m = make(g);
        if fpf_only && !m.is_fixed_point_free() {
            continue;
        }
        let key = cache.key(&m);
        classes
            .entry(key)
            .and_modify(|c| c.count += 1)
            .or_insert(ClassAcc { count: 1, rep: m });
    }
    classes
}

fn finish<M: GroupMat>(parts: Vec<HashMap<ClassKey, ClassAcc<M>>>, p: u32) -> Vec<ConjClassInfo> {
    let mut merged: HashMap<ClassKey, ClassAcc<M>> = HashMap::new();
    for part in parts {
        for (k, acc) in part {
            match merged.get_mut(&k) {
                Some(m) => {
                    m.count += acc.count;
                    if acc.rep < m.rep {
                        m.rep = acc.rep;
                    }
                }
                None => {
                    merged.insert(k, acc);
                }
            }
        }
    }
    let mut out: Vec<ConjClassInfo> = merged
        .into_iter()
        .map(|(key, acc)| ConjClassInfo {
            order: acc.rep.order().expect("group element"),
            fixed_point_free: acc.rep.is_fixed_point_free(),
            rep: acc.rep.to_matf(),
            size: acc.count,
            invariant_factors: key_to_invariant_factors(p as u64, &key),
        })
        .collect();
    out.sort_by(|a, b| a.rep.cmp(&b.rep));
    out
}

/// Partition GL(n, p), or its fixed-point-free part, into conjugacy
/// classes. Classes are sorted by representative.
pub fn conjugacy_classify(n: usize, p: u32, fpf_only: bool, budget: &Budget) -> Result<Vec<ConjClassInfo>> {
    check_args(n, p)?;
    budget.check_enum("GL enumeration", n, p)?;
    if p == 2 && n <= Gf2Mat::MAX_DIM {
        let parts = par_partitions(n, p, |g| classify_partition(g, GlRows::current_gf2, fpf_only));
        Ok(finish(parts, p))
    } else {
        let parts = par_partitions(n, p, |g| classify_partition(g, GlRows::current_matf, fpf_only));
        Ok(finish(parts, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_group_orders() {
        let b = Budget::default();
        for (n, p) in [(1, 2), (2, 2), (3, 2), (2, 3), (1, 5)] {
            let count = gl_enumerate(n, p, &b).unwrap().count() as u128;
            assert_eq!(Some(count), gl_order(n, p), "GL({n},{p})");
        }
    }

    #[test]
    fn enumeration_is_sorted_and_invertible() {
        let b = Budget::default();
        let all: Vec<MatF> = gl_enumerate(2, 3, &b).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|m| m.det().unwrap() != 0));
        let bits: Vec<Gf2Mat> = gl_enumerate_gf2(3, &b).unwrap().collect();
        assert!(bits.windows(2).all(|w| w[0] < w[1]));
        // brute force over all 2^9 matrices
        let brute = (0u32..512)
            .map(|x| MatF::from_fn(2, 3, 3, |i, j| (x >> (8 - 3 * i - j)) & 1))
            .filter(|m| m.rank() == 3)
            .collect::<Vec<_>>();
        let dense: Vec<MatF> = bits.iter().map(|m| m.to_matf()).collect();
        assert_eq!(dense, brute);
    }

    #[test]
    fn budget_refusal() {
        let b = Budget::default();
        assert!(gl_enumerate(6, 2, &b).err().unwrap().is_budget());
        assert!(gl_enumerate(5, 2, &b).is_ok());
    }

    #[test]
    fn fixed_point_free_small() {
        let b = Budget::default();
        assert_eq!(fixed_point_free_count(1, 2, &b).unwrap(), 0);
        // GL(2,2): the two elements of order 3
        assert_eq!(fixed_point_free_count(2, 2, &b).unwrap(), 2);
        assert_eq!(fixed_point_free_count(3, 2, &b).unwrap(), 48);
    }

    fn brute_classes(n: usize, p: u32) -> Vec<Vec<MatF>> {
        let b = Budget::default();
        let all: Vec<MatF> = gl_enumerate(n, p, &b).unwrap().collect();
        let mut seen = std::collections::BTreeSet::new();
        let mut classes = Vec::new();
        for x in &all {
            if seen.contains(x) {
                continue;
            }
            let mut orbit: Vec<MatF> = all
                .iter()
                .map(|g| g.mul(x).mul(&g.inverse().unwrap()))
                .collect();
            orbit.sort();
            orbit.dedup();
            seen.extend(orbit.iter().cloned());
            classes.push(orbit);
        }
        classes
    }

    #[test]
    fn classification_matches_orbits() {
        let b = Budget::default();
        for (n, p) in [(2, 2), (2, 3), (3, 2)] {
            let orbits = brute_classes(n, p);
            let classes = conjugacy_classify(n, p, false, &b).unwrap();
            assert_eq!(classes.len(), orbits.len(), "GL({n},{p})");
            for c in &classes {
                let orbit = orbits.iter().find(|o| o.contains(&c.rep)).unwrap();
                assert_eq!(c.size, orbit.len() as u64);
                assert_eq!(&c.rep, orbit.first().unwrap());
            }
        }
        let gl22 = conjugacy_classify(2, 2, false, &b).unwrap();
        let mut orders: Vec<u64> = gl22.iter().map(|c| c.order).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 3]);
    }

    #[test]
    fn invariant_factors_examples() {
        let id = MatF::identity(3, 2);
        let f = invariant_factors(&id);
        assert_eq!(f, vec![Poly::new(3, vec![2, 1]), Poly::new(3, vec![2, 1])]);
        let c = MatF::from_rows(2, &[vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(invariant_factors(&c), vec![Poly::new(2, vec![1, 1, 1])]);
    }
}
