//! Scalar and vector linear codes on a [`Network`].
//!
//! Messages are row vectors and kernels act on the right: the data on edge
//! `e` leaving node `v` is `m_e = Σ_{d ∈ In(v)} m_d K_{d,e}`, and the global
//! kernels follow the same recursion starting from identity blocks on the
//! source edges. Kernels that are not listed are zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{linalg, make_field, Field, FieldSpec};
use crate::matrix::MatF;
use crate::network::Network;

/// A vector linear code of dimension `dim` over the prime field `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeAssignment {
    base: FieldSpec,
    dim: usize,
    kernels: BTreeMap<(usize, usize), MatF>,
}

#[derive(Serialize, Deserialize)]
struct KernelEntry {
    d: usize,
    e: usize,
    mat: MatF,
}

#[derive(Serialize, Deserialize)]
struct RawCode {
    base: FieldSpec,
    dim: usize,
    kernels: Vec<KernelEntry>,
}

impl Serialize for CodeAssignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawCode {
            base: self.base.clone(),
            dim: self.dim,
            kernels: self
                .kernels
                .iter()
                .map(|(&(d, e), m)| KernelEntry { d, e, mat: m.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodeAssignment {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCode::deserialize(de)?;
        let mut code = CodeAssignment::new(raw.base, raw.dim).map_err(serde::de::Error::custom)?;
        for k in raw.kernels {
            code.set(k.d, k.e, k.mat).map_err(serde::de::Error::custom)?;
        }
        Ok(code)
    }
}

impl CodeAssignment {
    pub fn new(base: FieldSpec, dim: usize) -> Result<CodeAssignment> {
        base.validate()?;
        if base.k != 1 {
            return Err(Error::InvalidParameter("vector codes are over a prime field".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(CodeAssignment {
            base,
            dim,
            kernels: BTreeMap::new(),
        })
    }

    /// Empty (all-zero) code over GF(p).
    pub fn over(p: u64, dim: usize) -> Result<CodeAssignment> {
        CodeAssignment::new(make_field(p, 1)?, dim)
    }

    pub fn p(&self) -> u32 {
        self.base.p as u32
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, d: usize, e: usize, mat: MatF) -> Result<()> {
        if mat.p() != self.p() {
            return Err(Error::FieldMismatch(format!("kernel over GF({}) in a GF({}) code", mat.p(), self.p())));
        }
        if mat.rows() != self.dim || mat.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!("kernel must be {0}x{0}", self.dim)));
        }
        self.kernels.insert((d, e), mat);
        Ok(())
    }

    pub fn get(&self, d: usize, e: usize) -> Option<&MatF> {
        self.kernels.get(&(d, e))
    }

    pub fn kernels(&self) -> impl Iterator<Item = ((usize, usize), &MatF)> {
        self.kernels.iter().map(|(&k, m)| (k, m))
    }

    /// Every keyed pair must be adjacent in `net`.
    pub fn check_against(&self, net: &Network) -> Result<()> {
        for &(d, e) in self.kernels.keys() {
            if !net.is_adjacent(d, e) {
                return Err(Error::InvalidParameter(format!("kernel ({d}, {e}) is not on an adjacent pair")));
            }
        }
        Ok(())
    }
}

/// Per-edge global kernels `F_e` (each `ωL x L`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalKernels {
    pub kernels: Vec<MatF>,
}

impl GlobalKernels {
    /// `[F_e]_{e ∈ edges}` side by side.
    pub fn juxtapose(&self, edges: &[usize]) -> MatF {
        let blocks: Vec<&MatF> = edges.iter().map(|&e| &self.kernels[e]).collect();
        MatF::hstack(&blocks).expect("all kernels share their row count")
    }
}

pub fn propagate(net: &Network, code: &CodeAssignment) -> Result<GlobalKernels> {
    code.check_against(net)?;
    let (p, l, omega) = (code.p(), code.dim, net.omega());
    let mut out: Vec<MatF> = Vec::with_capacity(net.num_edges());
    for e in net.edges() {
        let f = if e.tail == net.source() {
            let i = e.id;
            MatF::from_fn(p, omega * l, l, |r, c| u32::from(r == i * l + c))
        } else {
            let mut acc = MatF::zeros(p, omega * l, l);
            for &d in net.in_edges(e.tail) {
                if let Some(k) = code.get(d, e.id) {
                    acc = acc.add(&out[d].mul(k));
                }
            }
            acc
        };
        out.push(f);
    }
    Ok(GlobalKernels { kernels: out })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverRank {
    pub receiver: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub is_solution: bool,
    /// Required rank `ωL`.
    pub target: usize,
    pub ranks: Vec<ReceiverRank>,
    pub failing: Vec<usize>,
}

fn report(target: usize, ranks: Vec<ReceiverRank>) -> SolutionReport {
    let failing: Vec<usize> = ranks
        .iter()
        .filter(|r| r.rank < target)
        .map(|r| r.receiver)
        .collect();
    SolutionReport {
        is_solution: failing.is_empty(),
        target,
        ranks,
        failing,
    }
}

pub fn is_solution(net: &Network, code: &CodeAssignment) -> Result<SolutionReport> {
    let global = propagate(net, code)?;
    let target = net.omega() * code.dim;
    let ranks = net
        .receivers()
        .par_iter()
        .map(|&t| ReceiverRank {
            receiver: t,
            rank: global.juxtapose(net.in_edges(t)).rank(),
        })
        .collect();
    Ok(report(target, ranks))
}

/// A scalar linear code over GF(p^k); kernels are field element codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarCode {
    field: Arc<Field>,
    kernels: BTreeMap<(usize, usize), u64>,
}

#[derive(Serialize, Deserialize)]
struct ScalarEntry {
    d: usize,
    e: usize,
    coeffs: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawScalar {
    field: FieldSpec,
    kernels: Vec<ScalarEntry>,
}

impl Serialize for ScalarCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawScalar {
            field: self.field.spec().clone(),
            kernels: self
                .kernels
                .iter()
                .map(|(&(d, e), &v)| ScalarEntry {
                    d,
                    e,
                    coeffs: self.field.coeffs(v),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarCode {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawScalar::deserialize(de)?;
        let field = Arc::new(Field::new(raw.field).map_err(serde::de::Error::custom)?);
        let mut code = ScalarCode::new(field);
        for k in raw.kernels {
            let v = code.field.from_coeffs(&k.coeffs).map_err(serde::de::Error::custom)?;
            code.set(k.d, k.e, v).map_err(serde::de::Error::custom)?;
        }
        Ok(code)
    }
}

impl ScalarCode {
    pub fn new(field: Arc<Field>) -> ScalarCode {
        ScalarCode {
            field,
            kernels: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn set(&mut self, d: usize, e: usize, value: u64) -> Result<()> {
        if value >= self.field.order() {
            return Err(Error::InvalidParameter(format!("element code {value} out of range")));
        }
        if value == 0 {
            self.kernels.remove(&(d, e));
        } else {
            self.kernels.insert((d, e), value);
        }
        Ok(())
    }

    pub fn get(&self, d: usize, e: usize) -> u64 {
        self.kernels.get(&(d, e)).copied().unwrap_or(0)
    }

    pub fn kernels(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.kernels.iter().map(|(&k, &v)| (k, v))
    }

    pub fn check_against(&self, net: &Network) -> Result<()> {
        for &(d, e) in self.kernels.keys() {
            if !net.is_adjacent(d, e) {
                return Err(Error::InvalidParameter(format!("kernel ({d}, {e}) is not on an adjacent pair")));
            }
        }
        Ok(())
    }
}

/// Global kernels of a scalar code: one length-ω column per edge.
pub fn propagate_scalar(net: &Network, code: &ScalarCode) -> Result<Vec<Vec<u64>>> {
    code.check_against(net)?;
    let f = &code.field;
    let omega = net.omega();
    let mut out: Vec<Vec<u64>> = Vec::with_capacity(net.num_edges());
    for e in net.edges() {
        let col = if e.tail == net.source() {
            (0..omega).map(|i| u64::from(i == e.id)).collect()
        } else {
            let mut acc = vec![0u64; omega];
            for &d in net.in_edges(e.tail) {
                let k = code.get(d, e.id);
                if k == 0 {
                    continue;
                }
                for (a, &x) in acc.iter_mut().zip(&out[d]) {
                    *a = f.add(*a, f.mul(x, k));
                }
            }
            acc
        };
        out.push(col);
    }
    Ok(out)
}

/// The `ω x |In(t)|` matrix `[f_e]_{e ∈ In(t)}` as rows over GF(p^k).
fn scalar_receiver_matrix(net: &Network, global: &[Vec<u64>], t: usize) -> Vec<Vec<u64>> {
    let cols = net.in_edges(t);
    (0..net.omega())
        .map(|i| cols.iter().map(|&e| global[e][i]).collect())
        .collect()
}

pub fn is_solution_scalar(net: &Network, code: &ScalarCode) -> Result<SolutionReport> {
    let global = propagate_scalar(net, code)?;
    let ranks = net
        .receivers()
        .iter()
        .map(|&t| ReceiverRank {
            receiver: t,
            rank: linalg::rank(&code.field, &scalar_receiver_matrix(net, &global, t)),
        })
        .collect();
    Ok(report(net.omega(), ranks))
}

/// Componentwise matrix representation of a scalar code over GF(p^L):
/// the vector code over GF(p) of dimension L with `K_{d,e} = Φ(k_{d,e})`.
pub fn lift_scalar(code: &ScalarCode) -> Result<CodeAssignment> {
    let f = &code.field;
    let mut out = CodeAssignment::over(f.p(), f.k() as usize)?;
    for ((d, e), v) in code.kernels() {
        out.set(d, e, f.phi(v))?;
    }
    Ok(out)
}

/// Block-diagonal combination of vector codes over the same prime field.
pub fn direct_sum(net: &Network, codes: &[CodeAssignment]) -> Result<CodeAssignment> {
    let first = codes
        .first()
        .ok_or_else(|| Error::InvalidParameter("direct sum of no codes".into()))?;
    for c in codes {
        if c.p() != first.p() {
            return Err(Error::FieldMismatch("summands over different base fields".into()));
        }
        c.check_against(net)?;
    }
    let dim: usize = codes.iter().map(|c| c.dim).sum();
    let mut out = CodeAssignment::over(first.p() as u64, dim)?;
    let mut keys: Vec<(usize, usize)> = codes.iter().flat_map(|c| c.kernels.keys().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    for (d, e) in keys {
        let zeros: Vec<MatF> = codes.iter().map(|c| MatF::zeros(c.p(), c.dim, c.dim)).collect();
        let blocks: Vec<&MatF> = codes
            .iter()
            .zip(&zeros)
            .map(|(c, z)| c.get(d, e).unwrap_or(z))
            .collect();
        out.set(d, e, MatF::block_diag(&blocks)?)?;
    }
    Ok(out)
}

/// Direct sum of the lifts of scalar codes over GF(p^{L_1}), ..., GF(p^{L_m}).
pub fn direct_sum_scalar(net: &Network, codes: &[ScalarCode]) -> Result<CodeAssignment> {
    let lifted: Vec<CodeAssignment> = codes.iter().map(lift_scalar).collect::<Result<_>>()?;
    direct_sum(net, &lifted)
}

/// Fill every adjacent pair with a uniformly random kernel.
pub fn random_scalar_code(net: &Network, field: Arc<Field>, rng: &mut impl Rng) -> ScalarCode {
    let q = field.order();
    let mut code = ScalarCode::new(field);
    for (d, e) in net.adjacent_pairs() {
        code.set(d, e, rng.gen_range(0..q)).expect("in range");
    }
    code
}

/// Random code that never zeroes a relay: kernels into edges leaving a
/// node of in-degree 1 are drawn from the nonzero elements, all others
/// uniformly. On small alphabets this gives a useful mix of solutions and
/// non-solutions, where [`random_scalar_code`] almost never solves.
pub fn random_relay_code(net: &Network, field: Arc<Field>, rng: &mut impl Rng) -> ScalarCode {
    let q = field.order();
    let mut code = ScalarCode::new(field);
    for (d, e) in net.adjacent_pairs() {
        let tail = net.edges()[e].tail;
        let value = if net.in_edges(tail).len() == 1 {
            rng.gen_range(1..q)
        } else {
            rng.gen_range(0..q)
        };
        code.set(d, e, value).expect("in range");
    }
    code
}

pub fn random_vector_code(net: &Network, p: u32, dim: usize, rng: &mut impl Rng) -> Result<CodeAssignment> {
    let mut code = CodeAssignment::over(p as u64, dim)?;
    for (d, e) in net.adjacent_pairs() {
        let entries = (0..dim * dim).map(|_| rng.gen_range(0..p)).collect();
        code.set(d, e, MatF::from_vec(p, dim, dim, entries)?)?;
    }
    Ok(code)
}

/// Decoding matrices `D_t` with `[F_e]_{e ∈ In(t)} · D_t = I`.
pub fn decoding_matrices(net: &Network, global: &GlobalKernels) -> Result<Vec<(usize, MatF)>> {
    net.receivers()
        .iter()
        .map(|&t| {
            let m = global.juxtapose(net.in_edges(t));
            m.right_inverse().map(|d| (t, d)).map_err(|_| Error::DecodeFailed(t))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub receivers: usize,
    pub decoded: usize,
    pub passed: bool,
}

/// Push random messages through the network edge by edge and decode them
/// at every receiver.
pub fn simulate_decode(net: &Network, code: &CodeAssignment, trials: usize, seed: u64) -> Result<SimulationReport> {
    let global = propagate(net, code)?;
    let decoders = decoding_matrices(net, &global)?;
    let (p, l, omega) = (code.p(), code.dim, net.omega());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut decoded = 0;
    for _ in 0..trials {
        let x: Vec<u32> = (0..omega * l).map(|_| rng.gen_range(0..p)).collect();
        let edge_data = transmit(net, code, &x);
        for (t, dmat) in &decoders {
            let y: Vec<u32> = net
                .in_edges(*t)
                .iter()
                .flat_map(|&e| edge_data[e].iter().copied())
                .collect();
            if dmat.vec_mul(&y) != x {
                return Err(Error::DecodeFailed(*t));
            }
            decoded += 1;
        }
    }
    Ok(SimulationReport {
        trials,
        receivers: decoders.len(),
        decoded,
        passed: true,
    })
}

/// Data carried by every edge for the source message `x` (length ωL).
pub fn transmit(net: &Network, code: &CodeAssignment, x: &[u32]) -> Vec<Vec<u32>> {
    let (p, l) = (code.p(), code.dim);
    let mut data: Vec<Vec<u32>> = Vec::with_capacity(net.num_edges());
    for e in net.edges() {
        let m = if e.tail == net.source() {
            x[e.id * l..(e.id + 1) * l].to_vec()
        } else {
            let mut acc = vec![0u32; l];
            for &d in net.in_edges(e.tail) {
                if let Some(k) = code.get(d, e.id) {
                    for (a, v) in acc.iter_mut().zip(k.vec_mul(&data[d])) {
                        *a = (*a + v) % p;
                    }
                }
            }
            acc
        };
        data.push(m);
    }
    data
}

/// Decode random messages with a scalar solution over GF(p^L) and with its
/// lift, where the lift uses `Φ(D_t)` built from the scalar decoding
/// matrices. Returns the number of (trial, receiver) pairs compared; any
/// disagreement is an error.
pub fn compare_lifted_decoding(net: &Network, code: &ScalarCode, trials: usize, seed: u64) -> Result<usize> {
    let f = code.field.clone();
    let k = f.k() as usize;
    let omega = net.omega();
    let global = propagate_scalar(net, code)?;
    let lifted = lift_scalar(code)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    let decoders: Vec<(usize, Vec<Vec<u64>>)> = net
        .receivers()
        .iter()
        .map(|&t| {
            linalg::right_inverse(&f, &scalar_receiver_matrix(net, &global, t))
                .map(|d| (t, d))
                .ok_or(Error::DecodeFailed(t))
        })
        .collect::<Result<_>>()?;
    for _ in 0..trials {
        let x: Vec<u64> = (0..omega).map(|_| rng.gen_range(0..f.order())).collect();
        let x_coords: Vec<u32> = x.iter().flat_map(|&v| f.coeffs(v)).map(|c| c as u32).collect();
        let vector_data = transmit(net, &lifted, &x_coords);
        for (t, d) in &decoders {
            let ins = net.in_edges(*t);
            // scalar decode: y_i = Σ_j x_j f_{e_i}[j], recovered = y · D
            let y: Vec<u64> = ins
                .iter()
                .map(|&e| {
                    global[e]
                        .iter()
                        .zip(&x)
                        .fold(0, |acc, (&g, &xv)| f.add(acc, f.mul(g, xv)))
                })
                .collect();
            let scalar_out: Vec<u64> = (0..omega)
                .map(|j| y.iter().zip(d).fold(0, |acc, (&yv, row)| f.add(acc, f.mul(yv, row[j]))))
                .collect();
            // vector decode with Φ(D_t)
            let phi_blocks: Vec<MatF> = d
                .iter()
                .map(|row| {
                    let blocks: Vec<MatF> = row.iter().map(|&v| f.phi(v)).collect();
                    let refs: Vec<&MatF> = blocks.iter().collect();
                    MatF::hstack(&refs).expect("same shape")
                })
                .collect();
            let phi_d = MatF::vstack(&phi_blocks.iter().collect::<Vec<_>>())?;
            let y_vec: Vec<u32> = ins.iter().flat_map(|&e| vector_data[e].iter().copied()).collect();
            let vector_out = phi_d.vec_mul(&y_vec);
            let expected: Vec<u32> = scalar_out.iter().flat_map(|&v| f.coeffs(v)).map(|c| c as u32).collect();
            if vector_out != expected || scalar_out != x || y_vec.len() != ins.len() * k {
                return Err(Error::DecodeFailed(*t));
            }
            compared += 1;
        }
    }
    Ok(compared)
}

/// Code on the composite network of `compose_algorithm1(n1, n)` built from
/// a code on `n1` and a code on the combination network `gen_combination(n + 1)`.
pub fn compose_codes(
    composite: &Network,
    n1: &Network,
    code1: &CodeAssignment,
    comb: &Network,
    code2: &CodeAssignment,
) -> Result<CodeAssignment> {
    let omega = n1.omega();
    let middle = comb.out_edges(1).len();
    if composite.omega() != omega || code1.p() != code2.p() || code1.dim != code2.dim {
        return Err(Error::InvalidParameter("codes and networks do not fit together".into()));
    }
    let (p, l) = (code1.p(), code1.dim);
    let id = MatF::identity(p, l);
    let r2 = comb.receivers().len();
    let hub_in = 0..omega;
    let to_n1 = omega..2 * omega;
    let to_s2 = 2 * omega..2 * omega + 2;
    let direct0 = 2 * omega + 2;
    let n1_off = direct0 + (omega - 2) * r2;
    let comb_off = n1_off + n1.num_edges();
    if composite.num_edges() != comb_off + middle + 2 * r2 {
        return Err(Error::InvalidParameter("composite network has an unexpected shape".into()));
    }
    let mut out = CodeAssignment::over(p as u64, l)?;
    for (i, e) in hub_in.clone().zip(to_n1) {
        out.set(i, e, id.clone())?;
    }
    for (i, e) in hub_in.clone().zip(to_s2.clone()) {
        out.set(i, e, id.clone())?;
    }
    for r in 0..r2 {
        for k in 0..omega - 2 {
            out.set(2 + k, direct0 + r * (omega - 2) + k, id.clone())?;
        }
    }
    for j in 0..omega {
        out.set(omega + j, n1_off + j, id.clone())?;
    }
    for ((d, e), m) in code1.kernels() {
        out.set(n1_off + d, n1_off + e, m.clone())?;
    }
    // combination edges: 0,1 are its source edges, then c->m_i, then m->t
    for ((d, e), m) in code2.kernels() {
        let map = |x: usize| if x < 2 { to_s2.start + x } else { comb_off + x - 2 };
        out.set(map(d), map(e), m.clone())?;
    }
    Ok(out)
}
