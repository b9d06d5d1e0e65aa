//! Explicit families of `N_{ω,d}` instances that are vector solvable over
//! GF(p)^L but not scalar solvable over GF(p^L), with exact certificates
//! for the scalar side, plus the Mersenne-prime splitting report for the
//! Swirl network.
//!
//! All certificates use exact integer arithmetic. Matrices are produced on
//! demand; the full-scale families are far too large to materialize.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::is_solution;
use crate::config::Budget;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::MatF;
use crate::network::gen_n_omega_d;
use crate::numtheory::{factor, is_prime, mersenne_is_prime, multiplicative_order, pow_mod, primes_below};
use crate::solvability::{lemma1_check, lemma1_to_code, ConditionTuple, ConditionVerdict};

/// A possibly huge integer as stored in certificates: the full decimal
/// string when it is short, always the bit length and the low digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigSummary {
    pub bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
    pub low_digits: String,
}

const FULL_DECIMAL_BITS: u64 = 1024;

impl BigSummary {
    pub fn of(n: &BigUint) -> Self {
        let bits = n.bits();
        let low = n % BigUint::from(10u64).pow(18);
        BigSummary {
            bits,
            decimal: (bits <= FULL_DECIMAL_BITS).then(|| n.to_string()),
            low_digits: low.to_string(),
        }
    }
}

fn big_pow(p: u64, e: u64) -> BigUint {
    BigUint::from(p).pow(e as u32)
}

/// `d (Σ ⌈d_j / d⌉ - ω + 1) + 2` where the out-degrees are `count` copies
/// of `common` followed by `extra` (if any).
fn eq3_bound(divisor: &BigUint, common: &BigUint, count: u64, extra: Option<&BigUint>) -> BigUint {
    let omega = count + u64::from(extra.is_some());
    let mut sum = common.div_ceil(divisor) * count;
    if let Some(x) = extra {
        sum += x.div_ceil(divisor);
    }
    divisor * (sum + 1u32 - omega) + 2u32
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorCheck {
    pub divisor: BigSummary,
    pub bound: BigSummary,
    /// `q < bound`, i.e. the divisor does not witness solvability.
    pub fails: bool,
}

/// Failure of the closed-form bound for every divisor of `q - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorCertificate {
    pub q: BigSummary,
    pub omega: u64,
    pub checks: Vec<DivisorCheck>,
    /// Every divisor of `q - 1` appears in `checks`.
    pub complete: bool,
    /// `complete` and every check fails.
    pub unsolvable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop4Params {
    pub l: u32,
    /// `6l + 1`.
    pub dim: u32,
    pub omega: u64,
    pub l1: u32,
    pub l2: u32,
    pub m1: u64,
    pub m2: BigUint,
    /// Common out-degree `⌈(2^L - 1) / 22⌉`.
    pub degree: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop4Summary {
    pub l: u32,
    #[serde(rename = "L")]
    pub dim: u32,
    pub omega: u64,
    pub l1: u32,
    pub l2: u32,
    pub m1: u64,
    pub m2: BigSummary,
    pub degree: BigSummary,
}

impl Prop4Params {
    pub fn summary(&self) -> Prop4Summary {
        Prop4Summary {
            l: self.l,
            dim: self.dim,
            omega: self.omega,
            l1: self.l1,
            l2: self.l2,
            m1: self.m1,
            m2: BigSummary::of(&self.m2),
            degree: BigSummary::of(&self.degree),
        }
    }
}

pub const PROP4_MIN_OMEGA: u64 = 484;

pub fn prop4_params(l: u32, omega: u64) -> Result<Prop4Params> {
    if l <= 2 {
        return Err(Error::InvalidParameter("l must be larger than 2".into()));
    }
    if omega < PROP4_MIN_OMEGA {
        return Err(Error::InvalidParameter(format!("omega must be at least {PROP4_MIN_OMEGA}")));
    }
    let dim = 6 * l + 1;
    let (l1, l2) = (9, 6 * l - 8);
    let n = big_pow(2, dim as u64) - 1u32;
    let degree = n.div_ceil(&BigUint::from(22u32));
    let g1_order = (1u64 << l1) - 1;
    let g2_order = big_pow(2, l2 as u64) - 1u32;
    if !g1_order.is_multiple_of(7) || !(&g2_order % 3u32).is_zero() {
        return Err(Error::InvalidParameter("block orders are not divisible by 7 and 3".into()));
    }
    let m1 = g1_order / 7;
    let m2 = g2_order / 3u32;
    if m1 * &m2 <= degree {
        return Err(Error::InvalidParameter("m1 * m2 does not exceed the out-degree".into()));
    }
    Ok(Prop4Params {
        l,
        dim,
        omega,
        l1,
        l2,
        m1,
        m2,
        degree,
    })
}

/// Divisors of `2^L - 1` (or `p^L - 1`) when it fits in a `u64`.
fn small_divisors(n: &BigUint) -> Option<Vec<BigUint>> {
    let n = n.to_u64()?;
    Some(crate::numtheory::divisors(n).into_iter().map(BigUint::from).collect())
}

fn divisor_certificate(q: &BigUint, omega: u64, degree: &BigUint) -> DivisorCertificate {
    let n = q - 1u32;
    let (divs, complete) = match small_divisors(&n) {
        Some(d) => (d, true),
        None => (vec![BigUint::one(), n.clone()], false),
    };
    let checks: Vec<DivisorCheck> = divs
        .iter()
        .map(|div| {
            let bound = eq3_bound(div, degree, omega, None);
            DivisorCheck {
                divisor: BigSummary::of(div),
                fails: *q < bound,
                bound: BigSummary::of(&bound),
            }
        })
        .collect();
    DivisorCertificate {
        q: BigSummary::of(q),
        omega,
        unsolvable: complete && checks.iter().all(|c| c.fails),
        checks,
        complete,
    }
}

/// The large GF(2) family: block-diagonal powers of the companion matrices
/// `G1` of GF(2^9) and `G2` of GF(2^{L-9}).
///
/// Layer `n < ω` uses `B_{jk} = diag(G1^{7j}, G2^{3k})`; kernel `t` of a
/// layer (1-based) is `B_{jk}` with `t - 1 = (j - 1) m2 + (k - 1)`. Layer
/// `ω` is `A_0 A_{1t}` with `A_0 = diag(G1, G2)`.
#[derive(Clone, Debug)]
pub struct Prop4Family {
    pub params: Prop4Params,
    g1: MatF,
    g2: MatF,
    m2: u64,
    g2_order: u64,
}

#[derive(Clone, Debug)]
pub struct Prop4Build {
    pub params: Prop4Params,
    pub certificate: DivisorCertificate,
    pub family: Prop4Family,
}

/// Largest second block for which the family is materialized.
pub const MAX_SECOND_BLOCK: u32 = 62;

pub fn prop4_build(l: u32, omega: u64) -> Result<Prop4Build> {
    let params = prop4_params(l, omega)?;
    let q = big_pow(2, params.dim as u64);
    let certificate = divisor_certificate(&q, omega, &params.degree);
    if params.l2 > MAX_SECOND_BLOCK {
        return Err(Error::budget("second block size", params.l2, MAX_SECOND_BLOCK));
    }
    let g1 = Field::gf(2, params.l1)?.companion();
    let g2 = Field::gf(2, params.l2)?.companion();
    let family = Prop4Family {
        m2: params.m2.to_u64().expect("L2 <= 62"),
        g2_order: (1u64 << params.l2) - 1,
        params: params.clone(),
        g1,
        g2,
    };
    Ok(Prop4Build {
        params,
        certificate,
        family,
    })
}

impl Prop4Family {
    pub fn index_pair(&self, t: u64) -> (u64, u64) {
        ((t - 1) / self.m2 + 1, (t - 1) % self.m2 + 1)
    }

    /// Exponents `(e1, e2)` with `B_{jk} = diag(G1^{e1}, G2^{e2})`.
    pub fn b_exponents(&self, j: u64, k: u64) -> (u64, u64) {
        ((7 * j) % 511, (3 * k as u128 % self.g2_order as u128) as u64)
    }

    fn block(&self, e1: u64, e2: u64) -> MatF {
        MatF::block_diag(&[&self.g1.pow(e1), &self.g2.pow(e2)]).expect("square blocks")
    }

    pub fn b(&self, j: u64, k: u64) -> MatF {
        let (e1, e2) = self.b_exponents(j, k);
        self.block(e1, e2)
    }

    /// Exponents of `A_{nt}` (both 1-based).
    pub fn a_exponents(&self, layer: u64, t: u64) -> (u64, u64) {
        let (j, k) = self.index_pair(t);
        let (e1, e2) = self.b_exponents(j, k);
        if layer == self.params.omega {
            ((e1 + 1) % 511, ((e2 as u128 + 1) % self.g2_order as u128) as u64)
        } else {
            (e1, e2)
        }
    }

    pub fn a(&self, layer: u64, t: u64) -> MatF {
        let (e1, e2) = self.a_exponents(layer, t);
        self.block(e1, e2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    pub first: (u64, u64),
    pub second: (u64, u64),
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop4Spotcheck {
    pub seed: u64,
    /// Pairs `B_{j1 k1}, B_{j2 k2}` with `j1 ≠ j2` and `k1 ≠ k2`.
    pub pair_samples: usize,
    pub pairs_full_rank: usize,
    pub min_pair_rank: usize,
    /// `rank(B_{11} - B_{12})`: kernels sharing a first index are only at
    /// distance `L - 9`, so a layer cannot hold two of them.
    pub shared_index_rank: usize,
    /// Largest layer whose kernels differ in both indices.
    pub max_full_distance_layer: u64,
    pub product_samples: usize,
    /// Products whose two block exponents are both nonzero.
    pub nonzero_residues: usize,
    pub first_samples: Vec<PairSample>,
}

/// Sampled checks of the rank and product conditions on a built family.
pub fn prop4_spotcheck(build: &Prop4Build, pair_samples: usize, product_samples: usize, seed: u64) -> Prop4Spotcheck {
    let fam = &build.family;
    let p = &build.params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m2 = fam.m2;
    let pairs: Vec<((u64, u64), (u64, u64))> = (0..pair_samples)
        .map(|_| {
            let j1 = rng.gen_range(1..=p.m1);
            let j2 = loop {
                let j = rng.gen_range(1..=p.m1);
                if j != j1 {
                    break j;
                }
            };
            let k1 = rng.gen_range(1..=m2);
            let k2 = loop {
                let k = rng.gen_range(1..=m2);
                if k != k1 {
                    break k;
                }
            };
            ((j1, k1), (j2, k2))
        })
        .collect();
    let ranks: Vec<usize> = pairs
        .par_iter()
        .map(|&((j1, k1), (j2, k2))| fam.b(j1, k1).sub(&fam.b(j2, k2)).rank())
        .collect();
    let full = p.dim as usize;
    // product of one kernel per layer: exponents 1 + 7 Σ j and 1 + 3 Σ k
    let omega = p.omega;
    let mut nonzero = 0;
    for _ in 0..product_samples {
        let (mut s1, mut s2) = (0u128, 0u128);
        for _ in 0..omega {
            let (j, k) = (rng.gen_range(1..=p.m1), rng.gen_range(1..=m2));
            s1 += j as u128;
            s2 += k as u128;
        }
        let e1 = (1 + 7 * s1) % 511;
        let e2 = (1 + 3 * s2) % fam.g2_order as u128;
        if e1 != 0 && e2 != 0 {
            nonzero += 1;
        }
    }
    Prop4Spotcheck {
        seed,
        pair_samples,
        pairs_full_rank: ranks.iter().filter(|&&r| r == full).count(),
        min_pair_rank: ranks.iter().copied().min().unwrap_or(full),
        shared_index_rank: fam.b(1, 1).sub(&fam.b(1, 2)).rank(),
        max_full_distance_layer: p.m1.min(m2),
        product_samples,
        nonzero_residues: nonzero,
        first_samples: pairs
            .iter()
            .zip(&ranks)
            .take(5)
            .map(|(&(first, second), &rank)| PairSample { first, second, rank })
            .collect(),
    }
}

/// Desk-scale version of the large GF(2) family over
/// GF(2^6) ⊕ GF(2^4) (L = 10): layer `n < ω` holds
/// `diag(G1^{7t}, G2^{3t})` for `t = 1..d`, and layer `ω` holds the same
/// matrices multiplied by `A_0 = diag(G1, G2)` when `twist` is set.
/// Here 7 divides 2^6 - 1 and 3 divides 2^4 - 1 as in the full family, and
/// `d ≤ 5` keeps the kernels of a layer pairwise at distance 10.
pub fn scaled_prop4_tuple(omega: usize, d: usize, twist: bool) -> Result<ConditionTuple> {
    if !(1..=5).contains(&d) || omega < 2 {
        return Err(Error::InvalidParameter("need omega >= 2 and 1 <= d <= 5".into()));
    }
    let g1 = Field::gf(2, 6)?.companion();
    let g2 = Field::gf(2, 4)?.companion();
    let block = |e1: u64, e2: u64| MatF::block_diag(&[&g1.pow(e1), &g2.pow(e2)]).expect("square");
    let mut layers = Vec::with_capacity(omega);
    for n in 0..omega {
        let shift = u64::from(twist && n + 1 == omega);
        layers.push((1..=d as u64).map(|t| block(7 * t + shift, 3 * t + shift)).collect());
    }
    ConditionTuple::lemma1(layers)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledReport {
    pub omega: usize,
    pub d: usize,
    pub twisted: ConditionVerdict,
    pub untwisted: ConditionVerdict,
    /// Network-level check of the twisted tuple's normal-form code.
    pub network_solution: bool,
    pub receivers: usize,
}

pub fn scaled_prop4_report(omega: usize, d: usize, budget: &Budget) -> Result<ScaledReport> {
    let twisted = scaled_prop4_tuple(omega, d, true)?;
    let untwisted = scaled_prop4_tuple(omega, d, false)?;
    let net = gen_n_omega_d(omega, &vec![d; omega], budget)?;
    let code = lemma1_to_code(&twisted, &net)?;
    Ok(ScaledReport {
        omega,
        d,
        twisted: lemma1_check(&twisted, budget)?,
        untwisted: lemma1_check(&untwisted, budget)?,
        network_solution: is_solution(&net, &code)?.is_solution,
        receivers: net.receivers().len(),
    })
}

/// Parameters for odd `p`: `a = p² + p + 1`, `b = 2(p - 1)`, the odd
/// primes below `ab` other than `p`, their smallest powers `q_j` not
/// dividing `p - 1`, the orders `m_j` of `p` modulo `q_j`, and
/// `m = lcm(12, m_1, ..., m_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm5Params {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub primes: Vec<u64>,
    pub prime_powers: Vec<u64>,
    pub orders: Vec<u64>,
    #[serde(with = "decimal")]
    pub m: BigUint,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Checks for one `l`; every field must be true.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm5Invariants {
    pub l: u64,
    pub a_divides_p_3l: bool,
    pub a_not_divides_p_3l_plus_1: bool,
    pub b_divides_p_2l: bool,
    pub b_not_divides_p_2l_plus_1: bool,
    /// Each of `a, b, q_j` divides `p^{ml} - 1`.
    pub all_divide_p_ml: bool,
    /// None of `a, b, q_j` divides `p^{ml+1} - 1`.
    pub none_divide_p_ml_plus_1: bool,
    /// `∏ q_j < (p - 1) ∏ p_j`.
    pub prime_power_ratio: bool,
    /// Largest divisor of `p^L - 1` below `ab`, expected `p - 1`.
    pub largest_small_divisor: u64,
    pub d0_integral: bool,
}

impl Thm5Invariants {
    pub fn all_hold(&self, p: u64) -> bool {
        self.a_divides_p_3l
            && self.a_not_divides_p_3l_plus_1
            && self.b_divides_p_2l
            && self.b_not_divides_p_2l_plus_1
            && self.all_divide_p_ml
            && self.none_divide_p_ml_plus_1
            && self.prime_power_ratio
            && self.largest_small_divisor == p - 1
            && self.d0_integral
    }
}

/// `p^e ≡ 1 (mod n)`, i.e. `n | p^e - 1`.
fn divides_pow_minus_one(n: u64, p: u64, e: u64) -> bool {
    n == 1 || pow_mod(p % n, e, n) == 1
}

fn divides_pow_minus_one_big(n: u64, p: u64, e: &BigUint) -> bool {
    n == 1 || BigUint::from(p % n).modpow(e, &BigUint::from(n)).is_one()
}

pub fn thm5_params(p: u64) -> Result<Thm5Params> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not an odd prime")));
    }
    let a = p * p + p + 1;
    let b = 2 * (p - 1);
    // p itself has no multiplicative order modulo its own powers
    let primes: Vec<u64> = primes_below(a * b)
        .into_iter()
        .filter(|&r| r != 2 && r != p)
        .collect();
    let mut prime_powers = Vec::with_capacity(primes.len());
    let mut orders = Vec::with_capacity(primes.len());
    let mut m = BigUint::from(12u32);
    for &r in &primes {
        let mut qj = r;
        while (p - 1).is_multiple_of(qj) {
            qj *= r;
        }
        let mj = multiplicative_order(p, qj).expect("p is coprime to q_j");
        m = m.lcm(&BigUint::from(mj));
        prime_powers.push(qj);
        orders.push(mj);
    }
    let params = Thm5Params {
        p,
        a,
        b,
        primes,
        prime_powers,
        orders,
        m,
    };
    let inv = thm5_invariants(&params, 1);
    if !inv.all_hold(p) {
        return Err(Error::InvalidParameter(format!("parameter invariants fail for p = {p}: {inv:?}")));
    }
    Ok(params)
}

pub fn thm5_invariants(params: &Thm5Params, l: u64) -> Thm5Invariants {
    let (p, a, b) = (params.p, params.a, params.b);
    let ml = &params.m * l;
    let dim = &ml + 1u32;
    let mut moduli = vec![a, b];
    moduli.extend(&params.prime_powers);
    let prod_q = params.prime_powers.iter().fold(BigUint::one(), |acc, &x| acc * x);
    let prod_p = params.primes.iter().fold(BigUint::one(), |acc, &x| acc * x);
    let largest_small_divisor = (1..a * b)
        .rev()
        .find(|&n| divides_pow_minus_one_big(n, p, &dim))
        .unwrap_or(1);
    // (p^9 - 1)(p^{L-9} - 1) ≡ 0 (mod ab)
    let ab = a * b;
    let f1 = (pow_mod(p, 9, ab) + ab - 1) % ab;
    let tail = (BigUint::from(p).modpow(&(&dim - 9u32), &BigUint::from(ab)))
        .to_u64()
        .expect("reduced modulo ab");
    let f2 = (tail + ab - 1) % ab;
    Thm5Invariants {
        l,
        a_divides_p_3l: divides_pow_minus_one(a, p, 3 * l),
        a_not_divides_p_3l_plus_1: !divides_pow_minus_one(a, p, 3 * l + 1),
        b_divides_p_2l: divides_pow_minus_one(b, p, 2 * l),
        b_not_divides_p_2l_plus_1: !divides_pow_minus_one(b, p, 2 * l + 1),
        all_divide_p_ml: moduli.iter().all(|&n| divides_pow_minus_one_big(n, p, &ml)),
        none_divide_p_ml_plus_1: moduli.iter().all(|&n| !divides_pow_minus_one_big(n, p, &dim)),
        prime_power_ratio: prod_q < prod_p * (p - 1),
        largest_small_divisor,
        d0_integral: crate::numtheory::mul_mod(f1, f2, ab) == 0,
    }
}

/// One large divisor `(p^L - 1) / d'` with `d' ≤ ab`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CofactorCheck {
    pub cofactor: u64,
    /// `⌈(a-1)(b-1)d0 / d⌉ = d'`.
    pub ceil_identity: bool,
    pub bound_exceeds_q: bool,
}

/// Failure of the closed-form criterion over GF(p^L) for the odd-characteristic
/// network, split as in the argument: divisors `d < d0` are excluded once
/// `ω ≥ omega_threshold`, and every divisor `d ≥ d0` has the form
/// `(p^L - 1) / d'` with `d' ≤ ab`, all of which are checked exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm5Certificate {
    pub p: u64,
    #[serde(rename = "L")]
    pub dim: u64,
    pub omega: u64,
    /// `1 + ⌈2 p^L / d0⌉`: for `d < d0`, `⌈d0/d⌉ ≥ 2` gives a bound above
    /// `(ω - 1) d0 / 2`, which exceeds `p^L` from here on.
    pub omega_threshold: u64,
    pub d0: BigSummary,
    /// `d0 > (p^L - 1) / (ab + 1)`.
    pub d0_above_quotient: bool,
    pub cofactors: Vec<CofactorCheck>,
    pub unsolvable: bool,
}

#[derive(Clone, Debug)]
pub struct Thm5Build {
    pub params: Thm5Params,
    pub l: u64,
    pub invariants: Thm5Invariants,
    pub certificate: Thm5Certificate,
    pub family: Thm5Family,
}

/// The matrix family, materialized only for the `9 x 9` block; the second
/// block `G2` of size `L - 9` is handled through exponents, which decide
/// rank: `rank(G^x - G^y) = size` iff `x ≢ y` modulo the order of `G`.
#[derive(Clone, Debug)]
pub struct Thm5Family {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub dim: u64,
    g1: MatF,
    g1_order: u64,
    /// Number of first-block indices, `(p^9 - 1) / a`.
    pub first_count: u64,
}

/// Largest exponent `L` for which `p^L` is built as a big integer.
pub const MAX_THM5_BITS: u64 = 1 << 23;

pub fn thm5_build(params: &Thm5Params, l: u64, omega: u64) -> Result<Thm5Build> {
    if l == 0 {
        return Err(Error::InvalidParameter("l must be positive".into()));
    }
    let (p, a, b) = (params.p, params.a, params.b);
    let invariants = thm5_invariants(params, l);
    if !invariants.all_hold(p) {
        return Err(Error::InvalidParameter(format!("invariants fail at l = {l}")));
    }
    let Some(dim) = (&params.m * l + 1u32).to_u64() else {
        return Err(Error::budget("bits of L", (&params.m * l).bits(), 64));
    };
    let bits = (dim as f64 * (p as f64).log2()).ceil() as u64;
    if bits > MAX_THM5_BITS {
        return Err(Error::budget("bits of p^L", bits, MAX_THM5_BITS));
    }
    let q = big_pow(p, dim);
    let n = &q - 1u32;
    let ab = a * b;
    let d0 = (big_pow(p, 9) - 1u32) * (big_pow(p, dim - 9) - 1u32) / ab;
    let last = &d0 * ((a - 1) * (b - 1));
    let d0_above_quotient = &d0 * (ab + 1) > n;
    let omega_threshold = 1 + (&q * 2u32)
        .div_ceil(&d0)
        .to_u64()
        .expect("threshold is about 2ab");
    let mut cofactors = Vec::new();
    for c in 1..=ab {
        if !divides_pow_minus_one(c, p, dim) {
            continue;
        }
        let d = &n / c;
        let bound = eq3_bound(&d, &d0, omega - 1, Some(&last));
        cofactors.push(CofactorCheck {
            cofactor: c,
            ceil_identity: last.div_ceil(&d) == BigUint::from(c),
            bound_exceeds_q: bound > q,
        });
    }
    let unsolvable = omega >= omega_threshold
        && d0_above_quotient
        && cofactors.iter().all(|c| c.ceil_identity && c.bound_exceeds_q);
    let certificate = Thm5Certificate {
        p,
        dim,
        omega,
        omega_threshold,
        d0: BigSummary::of(&d0),
        d0_above_quotient,
        cofactors,
        unsolvable,
    };
    let field: Arc<Field> = Field::gf(p, 9)?;
    let g1_order = field.order() - 1;
    let family = Thm5Family {
        p,
        a,
        b,
        dim,
        g1: field.companion(),
        g1_order,
        first_count: g1_order / a,
    };
    Ok(Thm5Build {
        params: params.clone(),
        l,
        invariants,
        certificate,
        family,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm5Spotcheck {
    pub seed: u64,
    pub pair_samples: usize,
    /// Pairs whose block ranks add up to `L`.
    pub pairs_full_rank: usize,
    pub product_samples: usize,
    /// Products `(-1)^ω diag(G1^{e1}, G2^{e2})` with both exponents
    /// nonzero modulo the block orders, so `I - product` is invertible.
    pub nonzero_residues: usize,
}

impl Thm5Family {
    /// `rank(B_{j1 k1} - B_{j2 k2})`: first block computed explicitly,
    /// second block from its exponents `b k1`, `b k2` (both below the
    /// block order, so they differ iff `k1 ≠ k2`).
    pub fn pair_rank(&self, first: (u64, u64), second: (u64, u64)) -> usize {
        let x = self.g1.pow(self.a * first.0 % self.g1_order);
        let y = self.g1.pow(self.a * second.0 % self.g1_order);
        let second_block = if first.1 != second.1 { self.dim as usize - 9 } else { 0 };
        x.sub(&y).rank() + second_block
    }

    pub fn spotcheck(&self, samples: usize, omega: u64, seed: u64) -> Thm5Spotcheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::with_capacity(samples);
        for _ in 0..samples {
            let j1 = rng.gen_range(1..=self.first_count);
            let j2 = loop {
                let j = rng.gen_range(1..=self.first_count);
                if j != j1 {
                    break j;
                }
            };
            let k1: u64 = rng.gen_range(1..=1_000_000);
            let k2 = k1 + rng.gen_range(1..=1_000_000);
            pairs.push(((j1, k1), (j2, k2)));
        }
        let full = pairs
            .par_iter()
            .filter(|&&(x, y)| self.pair_rank(x, y) == self.dim as usize)
            .count();
        let mut nonzero = 0;
        for _ in 0..samples {
            // layers before ω add multiples of a and b; layer ω adds a', b'
            let mut s1 = rng.gen_range(1..self.a) as u128;
            let mut s2 = rng.gen_range(1..self.b) as u128;
            for _ in 0..omega {
                s1 += (self.a * rng.gen_range(1..=self.first_count)) as u128;
                s2 += (self.b * rng.gen_range(1..=1_000_000u64)) as u128;
            }
            // b divides the second block's order, so s2 ≢ 0 (mod b) suffices
            if !s1.is_multiple_of(self.g1_order as u128) && !s2.is_multiple_of(self.b as u128) {
                nonzero += 1;
            }
        }
        Thm5Spotcheck {
            seed,
            pair_samples: samples,
            pairs_full_rank: full,
            product_samples: samples,
            nonzero_residues: nonzero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MersenneEntry {
    pub exponent: u32,
    /// `None` beyond the fixed table.
    pub mersenne_prime: Option<bool>,
    /// First `(L1, L2)` with `L1 + L2 = L`, `L1 ≤ L2` and both `2^{Li} - 1`
    /// known composite.
    pub split: Option<(u32, u32)>,
    /// When `2^L - 1` is prime: the Swirl network has no scalar solution
    /// over GF(2^L) from this source dimension on.
    pub scalar_unsolvable_from_omega: Option<BigSummary>,
    /// Vector solvable over GF(2)^L for every source dimension, either
    /// through GF(2^L) itself or through the split.
    pub vector_solvable_every_omega: Option<bool>,
}

fn known_composite(e: u32) -> bool {
    e >= 2 && (!is_prime(e as u64) || mersenne_is_prime(e) == Some(false))
}

/// For each exponent: primality of `2^L - 1` and, when prime, a split into
/// two exponents with composite Mersenne numbers. The Swirl network is
/// scalar solvable over GF(2^{Li}) for every ω when `2^{Li} - 1` is
/// composite, and the direct sum of the two lifted solutions is a vector
/// solution over GF(2)^L.
pub fn mersenne_report(exponents: &[u32]) -> Vec<MersenneEntry> {
    exponents
        .iter()
        .map(|&e| {
            // 2^e - 1 can only be prime for prime e
            let prime = if e < 2 || !is_prime(e as u64) {
                Some(false)
            } else {
                mersenne_is_prime(e)
            };
            let split = (2..=e / 2).find(|&x| known_composite(x) && known_composite(e - x)).map(|x| (x, e - x));
            let vector = match prime {
                Some(false) => Some(e >= 2),
                Some(true) => split.map(|_| true),
                None => None,
            };
            MersenneEntry {
                exponent: e,
                mersenne_prime: prime,
                split,
                scalar_unsolvable_from_omega: (prime == Some(true)).then(|| BigSummary::of(&(big_pow(2, e as u64) - 2u32))),
                vector_solvable_every_omega: vector,
            }
        })
        .collect()
}

/// Prime factors of `p^L - 1` when it fits a machine word.
pub fn small_factorization(p: u64, l: u32) -> Option<Vec<(u64, u32)>> {
    p.checked_pow(l).map(|x| factor(x - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prop4_parameters_at_l3() {
        let p = prop4_params(3, 484).unwrap();
        assert_eq!(p.dim, 19);
        assert_eq!(p.m1, 73);
        assert_eq!(p.m2, BigUint::from(341u32));
        // ⌈524287 / 22⌉
        assert_eq!(p.degree, BigUint::from(23_832u32));
        assert!(prop4_params(2, 484).is_err());
        assert!(prop4_params(3, 100).is_err());
    }

    #[test]
    fn prop4_certificate_at_l3() {
        let b = prop4_build(3, 484).unwrap();
        let c = &b.certificate;
        assert!(c.complete && c.unsolvable);
        assert_eq!(c.checks.len(), 2);
        // the divisor 2^19 - 1 gives bound 2^19 + 1
        assert_eq!(c.checks[1].bound.decimal.as_deref(), Some("524289"));
        // not unsolvable for tiny ω at the largest divisor? it still is, but
        // the smallest divisor needs ω large
        let small = divisor_certificate(&BigUint::from(8u32), 3, &BigUint::from(2u32));
        assert!(!small.unsolvable);
    }

    #[test]
    fn prop4_family_ranks() {
        let b = prop4_build(3, 484).unwrap();
        let s = prop4_spotcheck(&b, 30, 40, 7);
        assert_eq!(s.pairs_full_rank, 30);
        assert_eq!(s.min_pair_rank, 19);
        assert_eq!(s.shared_index_rank, 10);
        assert_eq!(s.nonzero_residues, 40);
        assert_eq!(s.max_full_distance_layer, 73);
        let f = &b.family;
        let a = f.a(484, 1);
        let (e1, e2) = f.a_exponents(484, 1);
        assert_eq!((e1, e2), (8, 4));
        assert_eq!(a, MatF::block_diag(&[&f.g1.pow(8), &f.g2.pow(4)]).unwrap());
    }

    #[test]
    fn scaled_analog() {
        let r = scaled_prop4_report(4, 3, &Budget::default()).unwrap();
        assert!(r.twisted.holds);
        assert!(!r.untwisted.holds);
        assert!(r.network_solution);
        assert!(scaled_prop4_tuple(4, 6, true).is_err());
    }

    #[test]
    fn thm5_at_three() {
        let p = thm5_params(3).unwrap();
        assert_eq!((p.a, p.b), (13, 4));
        assert_eq!(p.primes.first(), Some(&5));
        assert_eq!(p.primes.last(), Some(&47));
        // independent order computation by repeated multiplication
        for (&r, &m) in p.primes.iter().zip(&p.orders) {
            let mut x = 3 % r;
            let mut k = 1;
            while x != 1 {
                x = x * 3 % r;
                k += 1;
            }
            assert_eq!(k, m, "order of 3 mod {r}");
        }
        assert_eq!(p.m, BigUint::from(1_275_120u32));
        let inv = thm5_invariants(&p, 1);
        assert!(inv.all_hold(3));
        assert_eq!(inv.largest_small_divisor, 2);
    }

    #[test]
    fn thm5_certificate_at_three() {
        let params = thm5_params(3).unwrap();
        let probe = thm5_build(&params, 1, 3).unwrap();
        let threshold = probe.certificate.omega_threshold;
        // 2 p^L / d0 is slightly above 2ab
        assert_eq!(threshold, 1 + 2 * 52 + 1);
        assert!(!probe.certificate.unsolvable);
        let b = thm5_build(&params, 1, threshold).unwrap();
        let c = &b.certificate;
        assert_eq!(c.dim, 1_275_121);
        assert!(c.d0_above_quotient);
        let cofactors: Vec<u64> = c.cofactors.iter().map(|x| x.cofactor).collect();
        assert_eq!(cofactors, vec![1, 2]);
        assert!(c.unsolvable);
        let s = b.family.spotcheck(50, threshold, 11);
        assert_eq!(s.pairs_full_rank, 50);
        assert_eq!(s.nonzero_residues, 50);
    }

    #[test]
    fn thm5_other_primes() {
        for q in [5, 7] {
            let p = thm5_params(q).unwrap();
            assert!(thm5_invariants(&p, 2).all_hold(q));
        }
        assert!(thm5_params(2).is_err());
        assert!(thm5_params(9).is_err());
    }

    #[test]
    fn mersenne_examples() {
        let r = mersenne_report(&[4, 13, 17]);
        assert_eq!(r[0].mersenne_prime, Some(false));
        assert_eq!(r[0].vector_solvable_every_omega, Some(true));
        assert_eq!(r[1].mersenne_prime, Some(true));
        assert_eq!(r[1].split, Some((4, 9)));
        assert_eq!(r[1].scalar_unsolvable_from_omega.as_ref().unwrap().decimal.as_deref(), Some("8190"));
        assert_eq!(r[2].split, Some((6, 11)));
    }
}
