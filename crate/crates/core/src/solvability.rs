//! Deciding scalar and vector linear solvability: closed-form criteria for
//! the `N_{ω,d}` and combination families, matrix condition checkers with
//! the change of variables between their two forms, and exhaustive scalar
//! searches used as oracles.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{is_solution_scalar, CodeAssignment, ScalarCode};
use crate::config::Budget;
use crate::error::{Error, Result};
use crate::field::{linalg, make_field, Field};
use crate::matrix::{Gf2Mat, GroupMat, MatF};
use crate::network::{Family, NOmegaDLayout, Network};
use crate::numtheory::{divisors, is_prime, prime_power};

/// Matrices for one of the two equivalent condition families.
///
/// `Lemma1` holds `mats[j][k]`, the kernels `A_{jk}` of layer `j` of an
/// `N_{ω,d}` network in normal form. `Lemma2` holds `B_1, ..., B_{ω+1}` for
/// the Swirl network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "lowercase")]
pub enum ConditionTuple {
    Lemma1 {
        omega: usize,
        d: Vec<usize>,
        #[serde(rename = "L")]
        l: usize,
        p: u32,
        mats: Vec<Vec<MatF>>,
    },
    Lemma2 {
        omega: usize,
        #[serde(rename = "L")]
        l: usize,
        p: u32,
        mats: Vec<MatF>,
    },
}

fn shape_of(mats: &[&MatF]) -> Result<(usize, u32)> {
    let first = mats
        .first()
        .ok_or_else(|| Error::InvalidParameter("tuple has no matrices".into()))?;
    let (l, p) = (first.rows(), first.p());
    for m in mats {
        if !m.is_square() || m.rows() != l || m.p() != p {
            return Err(Error::DimensionMismatch(format!(
                "expected {l}x{l} matrices over GF({p}), found {}x{} over GF({})",
                m.rows(),
                m.cols(),
                m.p()
            )));
        }
    }
    if l == 0 {
        return Err(Error::InvalidParameter("matrices must have positive size".into()));
    }
    Ok((l, p))
}

impl ConditionTuple {
    pub fn lemma1(mats: Vec<Vec<MatF>>) -> Result<Self> {
        let all: Vec<&MatF> = mats.iter().flatten().collect();
        let (l, p) = shape_of(&all)?;
        let t = ConditionTuple::Lemma1 {
            omega: mats.len(),
            d: mats.iter().map(Vec::len).collect(),
            l,
            p,
            mats,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn lemma2(mats: Vec<MatF>) -> Result<Self> {
        let all: Vec<&MatF> = mats.iter().collect();
        let (l, p) = shape_of(&all)?;
        let t = ConditionTuple::Lemma2 {
            omega: mats.len().saturating_sub(1),
            l,
            p,
            mats,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn omega(&self) -> usize {
        match self {
            ConditionTuple::Lemma1 { omega, .. } | ConditionTuple::Lemma2 { omega, .. } => *omega,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConditionTuple::Lemma1 { l, .. } | ConditionTuple::Lemma2 { l, .. } => *l,
        }
    }

    pub fn p(&self) -> u32 {
        match self {
            ConditionTuple::Lemma1 { p, .. } | ConditionTuple::Lemma2 { p, .. } => *p,
        }
    }

    /// Shape consistency; invertibility is left to the checkers, which
    /// report a singular matrix as a violation.
    pub fn validate(&self) -> Result<()> {
        let (omega, l, p, all): (usize, usize, u32, Vec<&MatF>) = match self {
            ConditionTuple::Lemma1 { omega, d, l, p, mats } => {
                if mats.len() != *omega || d.len() != *omega {
                    return Err(Error::Malformed(format!("omega = {omega} but {} layers", mats.len())));
                }
                if let Some(j) = (0..*omega).find(|&j| mats[j].len() != d[j] || d[j] == 0) {
                    return Err(Error::Malformed(format!("layer {} does not match its out-degree", j + 1)));
                }
                (*omega, *l, *p, mats.iter().flatten().collect())
            }
            ConditionTuple::Lemma2 { omega, l, p, mats } => {
                if mats.len() != omega + 1 {
                    return Err(Error::Malformed(format!("omega = {omega} needs {} matrices", omega + 1)));
                }
                (*omega, *l, *p, mats.iter().collect())
            }
        };
        if omega < 2 {
            return Err(Error::InvalidParameter("omega must be at least 2".into()));
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let (l2, p2) = shape_of(&all)?;
        if (l2, p2) != (l, p) {
            return Err(Error::Malformed("declared L or p disagrees with the matrices".into()));
        }
        Ok(())
    }
}

/// The first condition found to fail, in a fixed scan order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// A matrix that should be invertible is not (1-based positions).
    Singular { layer: usize, index: usize },
    /// `rank(A_{j,k1} - A_{j,k2}) < L`.
    PairRank { layer: usize, k1: usize, k2: usize, rank: usize },
    /// `rank(I - B_j) < L`.
    FixedPoint { index: usize, rank: usize },
    /// A product choice whose sum with the identity (or with `B_{ω+1}`)
    /// is rank deficient. Entries are 1-based indices into each layer;
    /// for the Swirl form 1 selects `I` and 2 selects `B_j`.
    Product { choice: Vec<usize>, rank: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub holds: bool,
    /// Number of product choices in scope.
    pub products: u64,
    pub violation: Option<Violation>,
}

impl ConditionVerdict {
    fn from(products: u64, violation: Option<Violation>) -> Self {
        ConditionVerdict {
            holds: violation.is_none(),
            products,
            violation,
        }
    }
}

/// `(-1)^(ω-1)` in GF(p).
fn sign(omega: usize, p: u32) -> u32 {
    if (omega - 1).is_multiple_of(2) {
        1
    } else {
        p - 1
    }
}

fn product_count(d: &[usize], budget: &Budget) -> Result<u64> {
    let mut n: u64 = 1;
    for &x in d {
        n = n.saturating_mul(x as u64);
    }
    if n > budget.product_cap {
        return Err(Error::budget("product choices", n, budget.product_cap));
    }
    Ok(n)
}

fn as_gf2(mats: &[Vec<MatF>]) -> Option<Vec<Vec<Gf2Mat>>> {
    mats.iter()
        .map(|layer| layer.iter().map(Gf2Mat::from_matf).collect())
        .collect()
}

/// How many leading layers are flattened into parallel tasks.
fn split_depth(d: &[usize]) -> usize {
    let mut tasks = 1;
    for (i, &x) in d.iter().enumerate() {
        if tasks >= 64 || i + 1 == d.len() {
            return i;
        }
        tasks *= x;
    }
    0
}

/// Check every `rank(T + M_ω ⋯ M_1)` with `M_j` drawn from `layers[j]`,
/// where `T = target` and the layers are scanned with layer 1 most
/// significant. Returns the first failing choice (0-based) and its rank.
fn scan_products<M: GroupMat>(layers: &[Vec<M>], target: &M, scale: u32) -> Option<(Vec<usize>, usize)> {
    let omega = layers.len();
    let l = target.dim();
    let d: Vec<usize> = layers.iter().map(Vec::len).collect();
    let split = split_depth(&d);
    let tasks: usize = d[..split].iter().product();

    fn dfs<M: GroupMat>(
        layers: &[Vec<M>],
        j: usize,
        acc: &M,
        choice: &mut Vec<usize>,
        target: &M,
        scale: u32,
        l: usize,
    ) -> Option<(Vec<usize>, usize)> {
        if j == layers.len() {
            let r = target.add(&acc.scale(scale)).rank();
            return (r < l).then(|| (choice.clone(), r));
        }
        for (k, m) in layers[j].iter().enumerate() {
            choice.push(k);
            let next = m.mul(acc);
            if let Some(v) = dfs(layers, j + 1, &next, choice, target, scale, l) {
                return Some(v);
            }
            choice.pop();
        }
        None
    }

    (0..tasks).into_par_iter().find_map_first(|task| {
        let mut choice = vec![0; split];
        let mut rest = task;
        for j in (0..split).rev() {
            choice[j] = rest % d[j];
            rest /= d[j];
        }
        let mut acc = target.identity_like();
        for (j, &k) in choice.iter().enumerate() {
            acc = layers[j][k].mul(&acc);
        }
        choice.reserve(omega - split);
        dfs(layers, split, &acc, &mut choice, target, scale, l)
    })
}

fn lemma1_generic<M: GroupMat>(layers: &[Vec<M>], p: u32, products: u64) -> ConditionVerdict {
    let l = layers[0][0].dim();
    for (j, layer) in layers.iter().enumerate() {
        if let Some(k) = layer.iter().position(|m| !m.is_invertible()) {
            return ConditionVerdict::from(products, Some(Violation::Singular { layer: j + 1, index: k + 1 }));
        }
    }
    for (j, layer) in layers.iter().enumerate() {
        for k1 in 0..layer.len() {
            for k2 in k1 + 1..layer.len() {
                let rank = layer[k1].sub(&layer[k2]).rank();
                if rank < l {
                    let v = Violation::PairRank {
                        layer: j + 1,
                        k1: k1 + 1,
                        k2: k2 + 1,
                        rank,
                    };
                    return ConditionVerdict::from(products, Some(v));
                }
            }
        }
    }
    let id = layers[0][0].identity_like();
    let v = scan_products(layers, &id, sign(layers.len(), p)).map(|(choice, rank)| Violation::Product {
        choice: choice.into_iter().map(|k| k + 1).collect(),
        rank,
    });
    ConditionVerdict::from(products, v)
}

fn lemma2_generic<M: GroupMat>(mats: &[M], products: u64) -> ConditionVerdict {
    let omega = mats.len() - 1;
    let l = mats[0].dim();
    if let Some(j) = mats.iter().position(|m| !m.is_invertible()) {
        return ConditionVerdict::from(products, Some(Violation::Singular { layer: j + 1, index: 1 }));
    }
    for (j, b) in mats[..omega].iter().enumerate() {
        let rank = b.identity_like().sub(b).rank();
        if rank < l {
            return ConditionVerdict::from(products, Some(Violation::FixedPoint { index: j + 1, rank }));
        }
    }
    let layers: Vec<Vec<M>> = mats[..omega]
        .iter()
        .map(|b| vec![b.identity_like(), b.clone()])
        .collect();
    let v = scan_products(&layers, &mats[omega], 1).map(|(choice, rank)| Violation::Product {
        choice: choice.into_iter().map(|k| k + 1).collect(),
        rank,
    });
    ConditionVerdict::from(products, v)
}

/// Both condition families for `N_{ω,d}`: every matrix invertible, the
/// kernels of one layer pairwise at full rank distance, and
/// `rank(I + (-1)^(ω-1) M_ω ⋯ M_1) = L` for every choice of one kernel per
/// layer.
pub fn lemma1_check(t: &ConditionTuple, budget: &Budget) -> Result<ConditionVerdict> {
    t.validate()?;
    let ConditionTuple::Lemma1 { d, l, p, mats, .. } = t else {
        return Err(Error::InvalidParameter("expected a lemma1 tuple".into()));
    };
    let products = product_count(d, budget)?;
    if *p == 2 && *l <= Gf2Mat::MAX_DIM {
        let fast = as_gf2(mats).expect("p = 2 and L <= 8");
        return Ok(lemma1_generic(&fast, 2, products));
    }
    Ok(lemma1_generic(mats, *p, products))
}

/// The Swirl form: `rank(I - B_j) = L` for `j ≤ ω` and
/// `rank(B_{ω+1} + M_ω ⋯ M_1) = L` for every `M_j ∈ {I, B_j}`.
pub fn lemma2_check(t: &ConditionTuple, budget: &Budget) -> Result<ConditionVerdict> {
    t.validate()?;
    let ConditionTuple::Lemma2 { omega, l, p, mats } = t else {
        return Err(Error::InvalidParameter("expected a lemma2 tuple".into()));
    };
    let products = product_count(&vec![2; *omega], budget)?;
    if *p == 2 && *l <= Gf2Mat::MAX_DIM {
        let fast: Vec<Gf2Mat> = mats.iter().map(|m| Gf2Mat::from_matf(m).expect("p = 2")).collect();
        return Ok(lemma2_generic(&fast, products));
    }
    Ok(lemma2_generic(mats, products))
}

/// Dispatch on the tuple's flavor.
pub fn check_conditions(t: &ConditionTuple, budget: &Budget) -> Result<ConditionVerdict> {
    match t {
        ConditionTuple::Lemma1 { .. } => lemma1_check(t, budget),
        ConditionTuple::Lemma2 { .. } => lemma2_check(t, budget),
    }
}

/// Swirl kernels `A_{j1}, A_{j2}` to `B_1, ..., B_{ω+1}`.
///
/// With `P_j = A_{j1} ⋯ A_{11}` (and `P_0 = I`), set
/// `B_j = P_j^{-1} A_{j2} P_{j-1}` and `B_{ω+1} = (-1)^(ω-1) P_ω^{-1}`.
/// Then `A_{j1} - A_{j2} = P_j (I - B_j) P_{j-1}^{-1}` and
/// `I + (-1)^(ω-1) M_ω ⋯ M_1 = (-1)^(ω-1) P_ω (B_{ω+1} + N_ω ⋯ N_1)` with
/// `N_j ∈ {I, B_j}`, so both condition families transfer.
pub fn transform_a_to_b(t: &ConditionTuple) -> Result<ConditionTuple> {
    t.validate()?;
    let ConditionTuple::Lemma1 { omega, d, p, mats, .. } = t else {
        return Err(Error::InvalidParameter("expected a lemma1 tuple".into()));
    };
    if d.iter().any(|&x| x != 2) {
        return Err(Error::InvalidParameter("the transform needs out-degree 2 on every layer".into()));
    }
    let mut prev = mats[0][0].identity_like();
    let mut prev_inv = prev.clone();
    let mut out = Vec::with_capacity(omega + 1);
    for layer in mats {
        let cur = layer[0].mul(&prev);
        let cur_inv = prev_inv.mul(&layer[0].inverse()?);
        out.push(cur_inv.mul(&layer[1]).mul(&prev));
        prev = cur;
        prev_inv = cur_inv;
    }
    out.push(prev_inv.scale(sign(*omega, *p)));
    ConditionTuple::lemma2(out)
}

/// The canonical preimage: `A_{j1} = I` for `j < ω`,
/// `A_{ω1} = (-1)^(ω-1) B_{ω+1}^{-1}`, `A_{j2} = B_j` for `j < ω` and
/// `A_{ω2} = A_{ω1} B_ω`.
pub fn transform_b_to_a(t: &ConditionTuple) -> Result<ConditionTuple> {
    t.validate()?;
    let ConditionTuple::Lemma2 { omega, p, mats, .. } = t else {
        return Err(Error::InvalidParameter("expected a lemma2 tuple".into()));
    };
    let omega = *omega;
    let id = mats[0].identity_like();
    let mut layers: Vec<Vec<MatF>> = mats[..omega - 1].iter().map(|b| vec![id.clone(), b.clone()]).collect();
    let last = mats[omega].inverse()?.scale(sign(omega, *p));
    let last2 = last.mul(&mats[omega - 1]);
    layers.push(vec![last, last2]);
    ConditionTuple::lemma1(layers)
}

fn nomegad_layout(net: &Network) -> Result<NOmegaDLayout> {
    let Some(Family::NOmegaD { omega, d }) = net.family() else {
        return Err(Error::InvalidNetwork("not an N(omega, d) instance".into()));
    };
    let layout = NOmegaDLayout {
        omega: *omega,
        d: d.clone(),
    };
    let expect_edge = |id: usize, tail: usize, head: usize| -> Result<()> {
        let e = net.edge(id)?;
        if (e.tail, e.head) != (tail, head) {
            return Err(Error::InvalidNetwork(format!("edge {id} is not {tail} -> {head}")));
        }
        Ok(())
    };
    for j in 0..*omega {
        expect_edge(layout.source_edge(j), net.source(), layout.u(j))?;
        expect_edge(layout.edge_from_own(j), layout.u(j), layout.v(j))?;
        expect_edge(layout.edge_from_next(j), layout.u((j + 1) % omega), layout.v(j))?;
        for k in 0..d[j] {
            expect_edge(layout.grey_edge(j, k), layout.v(j), layout.grey(j, k))?;
        }
    }
    let first_grey = layout.grey(0, 0);
    let grey_end = first_grey + layout.grey_count();
    for &t in net.receivers() {
        for &e in net.in_edges(t) {
            let tail = net.edge(e)?.tail;
            if !(first_grey..grey_end).contains(&tail) {
                return Err(Error::InvalidNetwork(format!("receiver {t} is fed by a non-grey node")));
            }
        }
    }
    Ok(layout)
}

/// Where each kernel of the normal-form code comes from.
enum Slot {
    One,
    Layer(usize, usize),
}

fn normal_form_slots(net: &Network, layout: &NOmegaDLayout) -> Vec<(usize, usize, Slot)> {
    let mut out = Vec::new();
    for (d, e) in net.adjacent_pairs() {
        let tail = net.edge(e).expect("adjacent pair").tail;
        let slot = (0..layout.omega)
            .find(|&j| tail == layout.v(j) && d == layout.edge_from_next(j))
            .map(|j| {
                let k = e - layout.grey_edge(j, 0);
                Slot::Layer(j, k)
            })
            .unwrap_or(Slot::One);
        out.push((d, e, slot));
    }
    out
}

/// The normal-form vector code of a lemma1 tuple: every kernel is `I`
/// except the one from `u_{j+1}`'s edge into `v_j` towards grey node
/// `(j, k)`, which is `A_{jk}`.
pub fn lemma1_to_code(t: &ConditionTuple, net: &Network) -> Result<CodeAssignment> {
    t.validate()?;
    let ConditionTuple::Lemma1 { omega, d, l, p, mats } = t else {
        return Err(Error::InvalidParameter("expected a lemma1 tuple".into()));
    };
    let layout = nomegad_layout(net)?;
    if layout.omega != *omega || layout.d != *d {
        return Err(Error::DimensionMismatch(format!(
            "tuple has omega = {omega}, d = {d:?}; network has omega = {}, d = {:?}",
            layout.omega, layout.d
        )));
    }
    let mut code = CodeAssignment::over(*p as u64, *l)?;
    let id = MatF::identity(*p, *l);
    for (dd, e, slot) in normal_form_slots(net, &layout) {
        let m = match slot {
            Slot::One => id.clone(),
            Slot::Layer(j, k) => mats[j][k].clone(),
        };
        code.set(dd, e, m)?;
    }
    Ok(code)
}

/// Scalar counterpart of [`lemma1_to_code`] over GF(q) with `A_{jk}` given
/// as field elements.
pub fn lemma1_to_scalar_code(field: Arc<Field>, values: &[Vec<u64>], net: &Network) -> Result<ScalarCode> {
    let layout = nomegad_layout(net)?;
    let shape: Vec<usize> = values.iter().map(Vec::len).collect();
    if shape != layout.d {
        return Err(Error::DimensionMismatch(format!("values have shape {shape:?}, network d = {:?}", layout.d)));
    }
    let mut code = ScalarCode::new(field);
    for (dd, e, slot) in normal_form_slots(net, &layout) {
        let v = match slot {
            Slot::One => 1,
            Slot::Layer(j, k) => values[j][k],
        };
        code.set(dd, e, v)?;
    }
    Ok(code)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Formula,
    ConditionCheck,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The divisor of `q - 1` satisfying the closed-form inequality.
    Divisor { divisor: u64 },
    Tuple { tuple: ConditionTuple },
    /// Matrices pairwise at full rank distance.
    RankMetric { mats: Vec<MatF> },
    Code { code: ScalarCode },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvVerdict {
    pub solvable: bool,
    pub witness: Option<Witness>,
    pub method: Method,
}

fn check_prime_power(q: u64) -> Result<()> {
    if prime_power(q).is_none() {
        return Err(Error::InvalidParameter(format!("{q} is not a prime power")));
    }
    Ok(())
}

/// `d (Σ ⌈d_j / d⌉ - ω + 1) + 2` for one divisor.
fn theorem1_bound(divisor: u64, d: &[usize]) -> u128 {
    let omega = d.len() as u128;
    let sum: u128 = d.iter().map(|&x| (x as u64).div_ceil(divisor) as u128).sum();
    divisor as u128 * (sum + 1 - omega) + 2
}

/// Scalar solvability of `N_{ω,d}` over GF(q): solvable iff some divisor
/// `d` of `q - 1` has `q ≥ d (⌈d_1/d⌉ + ... + ⌈d_ω/d⌉ - ω + 1) + 2`.
/// The witness is the smallest such divisor.
pub fn theorem1_scalar(omega: usize, d: &[usize], q: u64) -> Result<SolvVerdict> {
    if omega < 3 || d.len() != omega || d.iter().any(|&x| x < 2) {
        return Err(Error::InvalidParameter(
            "need omega >= 3 and omega out-degrees, each at least 2".into(),
        ));
    }
    check_prime_power(q)?;
    let found = divisors(q - 1)
        .into_iter()
        .find(|&div| q as u128 >= theorem1_bound(div, d));
    Ok(SolvVerdict {
        solvable: found.is_some(),
        witness: found.map(|divisor| Witness::Divisor { divisor }),
        method: Method::Formula,
    })
}

/// The Swirl network over GF(q) is scalar solvable iff `q > ω + 2` or
/// `q - 1` is composite. For `q = 2` neither holds (1 is not composite).
pub fn corollary1_swirl(omega: usize, q: u64) -> Result<SolvVerdict> {
    if omega < 3 {
        return Err(Error::InvalidParameter("omega must be at least 3".into()));
    }
    check_prime_power(q)?;
    let composite = q - 1 > 1 && !is_prime(q - 1);
    Ok(SolvVerdict {
        solvable: q > omega as u64 + 2 || composite,
        witness: None,
        method: Method::Formula,
    })
}

/// Largest witness family materialized by [`combination_solvable`].
pub const COMBINATION_WITNESS_CAP: u64 = 1 << 16;

/// The `(n+1, 2)`-combination network over GF(q)^L is solvable iff
/// `q^L ≥ n`. When solvable and `q` is prime, the witness is
/// `Φ(γ^0), ..., Φ(γ^(n-2))` over GF(q^L), pairwise at rank distance L.
pub fn combination_solvable(n: u64, q: u64, l: usize) -> Result<SolvVerdict> {
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    if l == 0 {
        return Err(Error::InvalidParameter("L must be positive".into()));
    }
    check_prime_power(q)?;
    let size = (q as u128).checked_pow(l as u32);
    let solvable = size.is_none_or(|s| s >= n as u128);
    let witness = if solvable && is_prime(q) && n - 1 <= COMBINATION_WITNESS_CAP {
        let field = Field::new(make_field(q, l as u32)?)?;
        let mats = (0..n - 1).map(|j| field.phi(field.exp(j))).collect();
        Some(Witness::RankMetric { mats })
    } else {
        None
    };
    Ok(SolvVerdict {
        solvable,
        witness,
        method: Method::Formula,
    })
}

/// Vector code on `gen_combination(n + 1)` from `n - 1` matrices pairwise
/// at full rank distance and all invertible: middle node 1 forwards the
/// first source symbol, node 2 the second, node `i + 2` sends
/// `x_1 + x_2 A_i`. Relays at the middle nodes use the identity.
pub fn combination_vector_code(net: &Network, mats: &[MatF]) -> Result<CodeAssignment> {
    let Some(Family::Combination { middle }) = net.family() else {
        return Err(Error::InvalidNetwork("expected a combination network".into()));
    };
    if mats.len() + 2 != *middle {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for {middle} middle nodes",
            mats.len()
        )));
    }
    let first = mats
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one matrix".into()))?;
    let (p, l) = (first.p(), first.rows());
    let id = MatF::identity(p, l);
    let mut code = CodeAssignment::over(p as u64, l)?;
    let (s0, s1) = (net.source_edges()[0], net.source_edges()[1]);
    for (i, &e) in net.out_edges(net.edge(s0)?.head).iter().enumerate() {
        match i {
            0 => code.set(s0, e, id.clone())?,
            1 => code.set(s1, e, id.clone())?,
            _ => {
                code.set(s0, e, id.clone())?;
                code.set(s1, e, mats[i - 2].clone())?;
            }
        }
        let m = net.edge(e)?.head;
        for &o in net.out_edges(m) {
            code.set(e, o, id.clone())?;
        }
    }
    Ok(code)
}

type Bits = Vec<u64>;

fn bit(s: &Bits, i: usize) -> bool {
    s[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(s: &mut Bits, i: usize) {
    s[i / 64] |= 1 << (i % 64);
}

/// `{a + e mod n : a ∈ s, e ∈ set}`.
fn sumset(s: &Bits, set: &[usize], n: usize) -> Bits {
    let mut out = vec![0u64; s.len()];
    for a in (0..n).filter(|&a| bit(s, a)) {
        for &e in set {
            set_bit(&mut out, (a + e) % n);
        }
    }
    out
}

/// Search for `A_{jk} ∈ GF(q)^*`, distinct within each layer, with
/// `M_ω ⋯ M_1 ≠ (-1)^ω` for every choice. Works with exponents: the
/// layers become subsets `E_j` of `Z_{q-1}` and the condition says the
/// sumset `E_1 + ... + E_ω` misses `log (-1)^ω`. Shifting `E_j` by `c` and
/// `E_ω` by `-c` keeps the sumset, so `0 ∈ E_j` for `j < ω`.
fn scalar_exponent_search(field: &Field, d: &[usize], budget: &Budget) -> Result<Option<Vec<Vec<u64>>>> {
    let n = (field.order() - 1) as usize;
    let omega = d.len();
    if d.iter().any(|&x| x > n) {
        return Ok(None);
    }
    let target = field
        .log(field.sign(omega))
        .ok_or_else(|| Error::budget("discrete log table", field.order(), 1u64 << 20))? as usize;
    let words = n.div_ceil(64);
    let deadline = budget.deadline();

    struct Search<'a> {
        d: &'a [usize],
        n: usize,
        target: usize,
        nodes: u64,
        cap: u64,
        failed: HashSet<(usize, Bits)>,
        chosen: Vec<Vec<usize>>,
        deadline: crate::config::Deadline,
    }

    impl Search<'_> {
        fn run(&mut self, j: usize, s: &Bits) -> Result<bool> {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::budget("scalar search nodes", self.nodes, self.cap));
            }
            if self.nodes.is_multiple_of(4096) {
                self.deadline.check("scalar search")?;
            }
            let last = self.d.len() - 1;
            if j == last {
                let free: Vec<usize> = (0..self.n)
                    .filter(|&e| !bit(s, (self.target + self.n - e) % self.n))
                    .take(self.d[j])
                    .collect();
                if free.len() == self.d[j] {
                    self.chosen.push(free);
                    return Ok(true);
                }
                return Ok(false);
            }
            let mut found = false;
            let mut err = None;
            crate::network::for_each_subset(self.n - 1, self.d[j] - 1, |rest| {
                if found || err.is_some() {
                    return;
                }
                let mut set = vec![0];
                set.extend(rest.iter().map(|&x| x + 1));
                let next = sumset(s, &set, self.n);
                if self.failed.contains(&(j + 1, next.clone())) {
                    return;
                }
                self.chosen.push(set);
                match self.run(j + 1, &next) {
                    Ok(true) => found = true,
                    Ok(false) => {
                        self.chosen.pop();
                        self.failed.insert((j + 1, next));
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            Ok(found)
        }
    }

    let mut search = Search {
        d,
        n,
        target,
        nodes: 0,
        cap: budget.scalar_nodes,
        failed: HashSet::new(),
        chosen: Vec::new(),
        deadline,
    };
    let mut start = vec![0u64; words];
    set_bit(&mut start, 0);
    if !search.run(0, &start)? {
        return Ok(None);
    }
    Ok(Some(
        search
            .chosen
            .iter()
            .map(|set| set.iter().map(|&e| field.exp(e as u64)).collect())
            .collect(),
    ))
}

/// Nonzero tuples of length `m` over GF(q) whose first nonzero entry is 1.
fn projective_tuples(field: &Field, m: usize) -> Vec<Vec<u64>> {
    let q = field.order();
    let mut out = Vec::new();
    for lead in 0..m {
        let free = m - lead - 1;
        let count = q.pow(free as u32);
        for mut code in 0..count {
            let mut t = vec![0; m];
            t[lead] = 1;
            for x in t[lead + 1..].iter_mut() {
                *x = code % q;
                code /= q;
            }
            out.push(t);
        }
    }
    out
}

/// Exhaustive scalar search over all codes on `net`, up to the usual
/// normalizations: an edge whose tail has a single incoming edge gets
/// kernel 1, and the kernel tuple of any other edge is taken projectively
/// (scaling an edge is undone downstream, and a zero tuple can be replaced
/// by a nonzero one without lowering any receiver rank). Receivers are
/// checked as soon as their last incoming edge is fixed.
pub fn brute_force_scalar_general(net: &Network, q: u64, budget: &Budget) -> Result<SolvVerdict> {
    check_prime_power(q)?;
    let (p, k) = prime_power(q).expect("checked");
    let field = Arc::new(Field::new(make_field(p, k)?)?);
    let omega = net.omega();
    let m = net.num_edges();
    let mut tuples_by_arity: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut options: Vec<Option<usize>> = vec![None; m];
    for e in net.edges() {
        if e.tail == net.source() {
            continue;
        }
        let arity = net.in_edges(e.tail).len();
        if arity > 1 {
            while tuples_by_arity.len() <= arity {
                let a = tuples_by_arity.len();
                tuples_by_arity.push(projective_tuples(&field, a));
            }
            options[e.id] = Some(arity);
        }
    }
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &t in net.receivers() {
        match net.in_edges(t).iter().max() {
            Some(&last) => due[last].push(t),
            None => return Ok(verdict_brute(false, None)),
        }
    }

    struct State<'a> {
        net: &'a Network,
        field: &'a Field,
        omega: usize,
        tuples: &'a [Vec<Vec<u64>>],
        options: &'a [Option<usize>],
        due: &'a [Vec<usize>],
        global: Vec<Vec<u64>>,
        choice: Vec<usize>,
        nodes: u64,
        cap: u64,
        deadline: crate::config::Deadline,
    }

    impl State<'_> {
        fn receivers_ok(&self, e: usize) -> bool {
            self.due[e].iter().all(|&t| {
                let cols = self.net.in_edges(t);
                let rows: Vec<Vec<u64>> = (0..self.omega)
                    .map(|i| cols.iter().map(|&c| self.global[c][i]).collect())
                    .collect();
                linalg::rank(self.field, &rows) == self.omega
            })
        }

        fn run(&mut self, e: usize) -> Result<bool> {
            if e == self.global.len() {
                return Ok(true);
            }
            let edge = self.net.edges()[e];
            let f = self.field;
            if edge.tail == self.net.source() {
                self.global[e] = (0..self.omega).map(|i| u64::from(i == e)).collect();
                return Ok(self.receivers_ok(e) && self.run(e + 1)?);
            }
            let ins = self.net.in_edges(edge.tail);
            let Some(arity) = self.options[e] else {
                self.global[e] = self.global[ins[0]].clone();
                return Ok(self.receivers_ok(e) && self.run(e + 1)?);
            };
            for (ci, tuple) in self.tuples[arity].iter().enumerate() {
                self.nodes += 1;
                if self.nodes > self.cap {
                    return Err(Error::budget("scalar search nodes", self.nodes, self.cap));
                }
                if self.nodes.is_multiple_of(4096) {
                    self.deadline.check("scalar search")?;
                }
                let mut acc = vec![0u64; self.omega];
                for (&d, &c) in ins.iter().zip(tuple) {
                    if c != 0 {
                        for (a, &x) in acc.iter_mut().zip(&self.global[d]) {
                            *a = f.add(*a, f.mul(x, c));
                        }
                    }
                }
                self.global[e] = acc;
                self.choice[e] = ci;
                if self.receivers_ok(e) && self.run(e + 1)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }

    let mut state = State {
        net,
        field: &field,
        omega,
        tuples: &tuples_by_arity,
        options: &options,
        due: &due,
        global: vec![Vec::new(); m],
        choice: vec![0; m],
        nodes: 0,
        cap: budget.scalar_nodes,
        deadline: budget.deadline(),
    };
    if !state.run(0)? {
        return Ok(verdict_brute(false, None));
    }
    let mut code = ScalarCode::new(field.clone());
    for e in net.edges() {
        if e.tail == net.source() {
            continue;
        }
        let ins = net.in_edges(e.tail);
        match options[e.id] {
            None => code.set(ins[0], e.id, 1)?,
            Some(arity) => {
                for (&d, &c) in ins.iter().zip(&tuples_by_arity[arity][state.choice[e.id]]) {
                    code.set(d, e.id, c)?;
                }
            }
        }
    }
    verified_code_verdict(net, code)
}

fn verdict_brute(solvable: bool, witness: Option<Witness>) -> SolvVerdict {
    SolvVerdict {
        solvable,
        witness,
        method: Method::BruteForce,
    }
}

fn verified_code_verdict(net: &Network, code: ScalarCode) -> Result<SolvVerdict> {
    if !is_solution_scalar(net, &code)?.is_solution {
        return Err(Error::InvalidParameter("search produced a code that is not a solution".into()));
    }
    Ok(verdict_brute(true, Some(Witness::Code { code })))
}

/// Exhaustive scalar solvability over GF(q). `N_{ω,d}` instances are
/// searched in the normal form of their kernel conditions (only the
/// `A_{jk} ∈ GF(q)^*` vary); any other network goes through
/// [`brute_force_scalar_general`]. A found code is checked end to end.
pub fn brute_force_scalar(net: &Network, q: u64, budget: &Budget) -> Result<SolvVerdict> {
    check_prime_power(q)?;
    if let Some(Family::NOmegaD { d, .. }) = net.family() {
        let d = d.clone();
        nomegad_layout(net)?;
        let (p, k) = prime_power(q).expect("checked");
        let field = Arc::new(Field::new(make_field(p, k)?)?);
        return match scalar_exponent_search(&field, &d, budget)? {
            None => Ok(verdict_brute(false, None)),
            Some(values) => verified_code_verdict(net, lemma1_to_scalar_code(field, &values, net)?),
        };
    }
    brute_force_scalar_general(net, q, budget)
}

/// Closed forms where the family is known, brute force otherwise.
pub fn decide_scalar(net: &Network, q: u64, budget: &Budget) -> Result<SolvVerdict> {
    match net.family() {
        Some(Family::NOmegaD { omega, d }) => theorem1_scalar(*omega, d, q),
        Some(Family::Combination { middle }) => combination_solvable(*middle as u64 - 1, q, 1),
        _ => brute_force_scalar(net, q, budget),
    }
}

/// Uniformly random invertible `L x L` matrix over GF(p) by rejection.
pub fn random_invertible(p: u32, l: usize, rng: &mut impl Rng) -> MatF {
    loop {
        let entries = (0..l * l).map(|_| rng.gen_range(0..p)).collect();
        let m = MatF::from_vec(p, l, l, entries).expect("entries in range");
        if m.rank() == l {
            return m;
        }
    }
}

pub fn random_lemma1_tuple(d: &[usize], l: usize, p: u32, rng: &mut impl Rng) -> Result<ConditionTuple> {
    let mats = d
        .iter()
        .map(|&dj| (0..dj).map(|_| random_invertible(p, l, rng)).collect())
        .collect();
    ConditionTuple::lemma1(mats)
}

/// Kernels `Φ(a)` for random nonzero `a ∈ GF(p^L)`: they commute, so
/// tuples satisfying the conditions are far more common than with
/// [`random_lemma1_tuple`].
pub fn random_field_lemma1_tuple(d: &[usize], l: usize, p: u32, rng: &mut impl Rng) -> Result<ConditionTuple> {
    let field = Field::new(make_field(p as u64, l as u32)?)?;
    let q = field.order();
    let mats = d
        .iter()
        .map(|&dj| (0..dj).map(|_| field.phi(rng.gen_range(1..q))).collect())
        .collect();
    ConditionTuple::lemma1(mats)
}

pub fn random_lemma2_tuple(omega: usize, l: usize, p: u32, rng: &mut impl Rng) -> Result<ConditionTuple> {
    ConditionTuple::lemma2((0..=omega).map(|_| random_invertible(p, l, rng)).collect())
}
