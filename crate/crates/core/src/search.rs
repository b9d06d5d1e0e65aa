//! Exhaustive searches over GF(2) matrix groups: the Swirl-network tuple
//! search and the GL(5, 2) conjugacy-pruned non-existence argument.
//!
//! Both engines are deterministic. The Swirl search walks `B_1, B_2, ...`
//! depth first over the fixed-point-free pool, keeping the set of partial
//! products and the bitmask of pool members still usable as `B_{ω+1}`;
//! a prefix whose mask is empty cannot be completed and is cut.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Budget, Deadline};
use crate::error::{Error, Result};
use crate::matrix::{conjugacy_classify, fpf_pool_gf2, invariant_factors, singleton_filter, Gf2Mat, GroupMat, MatF};
use crate::solvability::{lemma2_check, ConditionTuple};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub found: bool,
    /// Every branch was completed; with `found = false` this certifies
    /// that no tuple exists.
    pub exhausted: bool,
    pub witnesses: Vec<ConditionTuple>,
    pub counts: BTreeMap<String, u64>,
}

/// Pool members compatible with each group element `X`, i.e. those `B`
/// with `B + X` invertible.
struct Compat {
    pool: Vec<Gf2Mat>,
    masks: HashMap<Gf2Mat, u64>,
    full: u64,
}

/// Pools above this size do not fit a one-word mask.
pub const MAX_SWIRL_POOL: usize = 64;

impl Compat {
    fn new(l: usize, budget: &Budget) -> Result<Compat> {
        if l == 0 || l > Gf2Mat::MAX_DIM {
            return Err(Error::InvalidParameter(format!("L = {l} out of range")));
        }
        let group: Vec<Gf2Mat> = crate::matrix::gl_enumerate_gf2(l, budget)?.collect();
        let pool: Vec<Gf2Mat> = group.iter().copied().filter(|m| m.is_fixed_point_free()).collect();
        if pool.len() > MAX_SWIRL_POOL {
            return Err(Error::budget("fixed-point-free pool", pool.len(), MAX_SWIRL_POOL));
        }
        let masks = group
            .iter()
            .map(|x| {
                let mask = pool
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.add(x).rank() == l)
                    .fold(0u64, |m, (i, _)| m | 1 << i);
                (*x, mask)
            })
            .collect();
        let full = if pool.len() == 64 { u64::MAX } else { (1u64 << pool.len()) - 1 };
        Ok(Compat { pool, masks, full })
    }

    fn mask(&self, x: &Gf2Mat) -> u64 {
        self.masks[x]
    }
}

/// Per-partition result: prefixes surviving at each depth, the tuples
/// reaching the last depth (as pool indices, last entry the free matrix).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTally {
    pub surviving: Vec<u64>,
    pub completions: u64,
    pub first_witness: Option<Vec<usize>>,
}

struct Walk<'a> {
    compat: &'a Compat,
    omega: usize,
    products: Vec<Vec<Gf2Mat>>,
    choice: Vec<usize>,
    tally: PartitionTally,
    collect: Option<Vec<Vec<usize>>>,
    stop: &'a AtomicBool,
    deadline: Deadline,
    nodes: u64,
    timed_out: bool,
}

impl Walk<'_> {
    /// Extend the prefix by pool member `b` at depth `depth` (0-based).
    fn enter(&mut self, depth: usize, b: usize, mask: u64) {
        if self.timed_out || self.stop.load(Ordering::Relaxed) {
            return;
        }
        self.nodes += 1;
        if (self.nodes == 1 || self.nodes.is_multiple_of(4096)) && self.deadline.expired() {
            self.timed_out = true;
            return;
        }
        let bm = self.compat.pool[b];
        let (done, rest) = self.products.split_at_mut(depth + 1);
        let prev = &done[depth];
        let next = &mut rest[0];
        next.clear();
        next.extend_from_slice(prev);
        let mut mask = mask;
        for x in prev {
            let y = bm.mul(x);
            mask &= self.compat.mask(&y);
            next.push(y);
        }
        if mask == 0 {
            return;
        }
        self.tally.surviving[depth] += 1;
        self.choice.push(b);
        if depth + 1 == self.omega {
            self.tally.completions += mask.count_ones() as u64;
            let last = mask.trailing_zeros() as usize;
            if self.tally.first_witness.is_none() {
                let mut w = self.choice.clone();
                w.push(last);
                self.tally.first_witness = Some(w);
            }
            if let Some(out) = self.collect.as_mut() {
                let mut m = mask;
                while m != 0 {
                    let i = m.trailing_zeros() as usize;
                    let mut w = self.choice.clone();
                    w.push(i);
                    out.push(w);
                    m &= m - 1;
                }
            }
        } else {
            for c in 0..self.compat.pool.len() {
                self.enter(depth + 1, c, mask);
            }
        }
        self.choice.pop();
    }
}

fn run_partition(
    compat: &Compat,
    omega: usize,
    first: usize,
    collect: bool,
    stop: &AtomicBool,
    deadline: Deadline,
) -> (PartitionTally, Option<Vec<Vec<usize>>>, bool) {
    let l = compat.pool[0].dim();
    let id = Gf2Mat::identity(l);
    let mut products = vec![Vec::new(); omega + 1];
    products[0].push(id);
    let mut walk = Walk {
        compat,
        omega,
        products,
        choice: Vec::with_capacity(omega),
        tally: PartitionTally {
            surviving: vec![0; omega],
            ..Default::default()
        },
        collect: collect.then(Vec::new),
        stop,
        deadline,
        nodes: 0,
        timed_out: false,
    };
    // the empty product is I, so B_{ω+1} must itself be fixed-point free
    let start = compat.full & compat.mask(&id);
    walk.enter(0, first, start);
    (walk.tally, walk.collect, !walk.timed_out)
}

fn tuple_of(compat: &Compat, idx: &[usize]) -> Result<ConditionTuple> {
    ConditionTuple::lemma2(idx.iter().map(|&i| compat.pool[i].to_matf()).collect())
}

fn base_counts(compat: &Compat, omega: usize) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    counts.insert("pool".to_string(), compat.pool.len() as u64);
    counts.insert("omega".to_string(), omega as u64);
    counts
}

fn add_tallies(counts: &mut BTreeMap<String, u64>, tallies: &[&PartitionTally], omega: usize) {
    for depth in 0..omega {
        let s: u64 = tallies.iter().map(|t| t.surviving.get(depth).copied().unwrap_or(0)).sum();
        counts.insert(format!("prefixes_depth_{}", depth + 1), s);
    }
    counts.insert("tuples".to_string(), tallies.iter().map(|t| t.completions).sum());
}

/// Every `(B_1, ..., B_{ω+1})` over GF(2)^L satisfying the Swirl conditions,
/// in lexicographic order of pool indices.
pub fn swirl_prefix_search(omega: usize, l: usize, budget: &Budget) -> Result<(SearchOutcome, Vec<ConditionTuple>)> {
    if omega < 2 {
        return Err(Error::InvalidParameter("omega must be at least 2".into()));
    }
    let compat = Compat::new(l, budget)?;
    let stop = AtomicBool::new(false);
    let deadline = budget.deadline();
    let parts: Vec<(PartitionTally, Option<Vec<Vec<usize>>>, bool)> = (0..compat.pool.len())
        .into_par_iter()
        .map(|first| run_partition(&compat, omega, first, true, &stop, deadline))
        .collect();
    let exhausted = parts.iter().all(|p| p.2);
    let mut counts = base_counts(&compat, omega);
    add_tallies(&mut counts, &parts.iter().map(|p| &p.0).collect::<Vec<_>>(), omega);
    let tuples = parts
        .iter()
        .flat_map(|p| p.1.iter().flatten())
        .map(|idx| tuple_of(&compat, idx))
        .collect::<Result<Vec<_>>>()?;
    let outcome = SearchOutcome {
        found: !tuples.is_empty(),
        exhausted,
        witnesses: tuples.first().cloned().into_iter().collect(),
        counts,
    };
    Ok((outcome, tuples))
}

/// Resumable progress of a full search: tallies of finished partitions,
/// keyed by the index of `B_1` in the pool.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwirlCheckpoint {
    pub omega: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub pool: usize,
    pub completed: BTreeMap<usize, PartitionTally>,
}

impl SwirlCheckpoint {
    pub fn load(path: &Path) -> Result<SwirlCheckpoint> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("checkpoint: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(&tmp, text).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Existence search for a full Swirl tuple over GF(2)^L. With a checkpoint
/// path, finished partitions are persisted as they complete and skipped on
/// the next run.
pub fn swirl_full_search(omega: usize, l: usize, budget: &Budget, checkpoint: Option<&Path>) -> Result<SearchOutcome> {
    if omega < 2 {
        return Err(Error::InvalidParameter("omega must be at least 2".into()));
    }
    let compat = Compat::new(l, budget)?;
    let mut state = match checkpoint {
        Some(path) if path.exists() => {
            let s = SwirlCheckpoint::load(path)?;
            if (s.omega, s.l, s.pool) != (omega, l, compat.pool.len()) {
                return Err(Error::InvalidParameter(format!(
                    "checkpoint is for omega = {}, L = {}",
                    s.omega, s.l
                )));
            }
            s
        }
        _ => SwirlCheckpoint {
            omega,
            l,
            pool: compat.pool.len(),
            completed: BTreeMap::new(),
        },
    };
    let stop = AtomicBool::new(state.completed.values().any(|t| t.first_witness.is_some()));
    let pending: Vec<usize> = (0..compat.pool.len()).filter(|i| !state.completed.contains_key(i)).collect();
    let deadline = budget.deadline();
    let shared = Mutex::new((&mut state, Ok(())));
    pending.par_iter().for_each(|&first| {
        let (tally, _, complete) = run_partition(&compat, omega, first, false, &stop, deadline);
        if !complete {
            return;
        }
        if tally.first_witness.is_some() {
            stop.store(true, Ordering::Relaxed);
        }
        let mut guard = shared.lock().expect("no panics while holding the lock");
        guard.0.completed.insert(first, tally);
        if let Some(path) = checkpoint {
            if guard.1.is_ok() {
                guard.1 = guard.0.save(path);
            }
        }
    });
    let (_, io) = shared.into_inner().expect("lock not poisoned");
    io?;
    let tallies: Vec<&PartitionTally> = state.completed.values().collect();
    let witness = tallies.iter().find_map(|t| t.first_witness.clone());
    let mut counts = base_counts(&compat, omega);
    add_tallies(&mut counts, &tallies, omega);
    counts.insert("partitions_done".to_string(), tallies.len() as u64);
    let witnesses = witness.map(|w| tuple_of(&compat, &w)).transpose()?.into_iter().collect::<Vec<_>>();
    Ok(SearchOutcome {
        found: !witnesses.is_empty(),
        exhausted: tallies.len() == compat.pool.len(),
        witnesses,
        counts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gl5Branch {
    /// The powers plus 0 already fill the Singleton bound of `2^5` codewords.
    PowerDistance {
        min_pair_distance: usize,
        code_size: usize,
        at_singleton_bound: bool,
    },
    /// All fixed-point-free candidates scanned.
    ExhaustiveScan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gl5ClassReport {
    pub rep: MatF,
    pub size: u64,
    /// Recomputed by repeated multiplication.
    pub order: u64,
    pub branch: Gl5Branch,
    /// Fixed-point-free `X` with `X + B^j` invertible for every power;
    /// zero means no compatible last matrix exists.
    pub compatible: u64,
    /// Smallest ω for which products `M_ω ⋯ M_1` with `M_j ∈ {I, B}` cover
    /// every power of `B`.
    pub coverage_omega: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gl5Certificate {
    pub classes: Vec<Gl5ClassReport>,
    /// 8 classes: 6 of order 31, 2 of order 21.
    pub structure_ok: bool,
    pub fixed_point_free_total: u64,
    /// The second order-21 representative is taken as a power of the first,
    /// so both generate the same cyclic group.
    pub order21_power_sets_equal: bool,
    /// Largest coverage threshold; the conclusion holds for ω at least this.
    pub omega_threshold: u64,
    pub outcome: SearchOutcome,
    pub conclusion: String,
}

fn powers(b: &Gf2Mat, order: u64) -> Vec<Gf2Mat> {
    let mut out = Vec::with_capacity(order as usize);
    let mut x = *b;
    for _ in 0..order {
        out.push(x);
        x = x.mul(b);
    }
    out
}

fn coverage_omega(b: &Gf2Mat, order: u64) -> u64 {
    let mut missing: std::collections::BTreeSet<Gf2Mat> = powers(b, order).into_iter().collect();
    let mut x = b.identity_like();
    missing.remove(&x);
    let mut omega = 0;
    while !missing.is_empty() {
        omega += 1;
        x = x.mul(b);
        missing.remove(&x);
    }
    omega
}

fn order_by_multiplication(b: &Gf2Mat) -> u64 {
    let id = b.identity_like();
    let mut x = *b;
    let mut n = 1;
    while x != id {
        x = x.mul(b);
        n += 1;
    }
    n
}

/// Non-existence argument for a Swirl solution over GF(2)^5 with ω large
/// enough: classify the fixed-point-free part of GL(5, 2), dispose of the
/// order-31 classes by the Singleton bound and of the order-21 classes by
/// scanning every candidate for the last matrix.
pub fn gl5_prune(budget: &Budget) -> Result<Gl5Certificate> {
    let deadline = budget.deadline();
    let classes = conjugacy_classify(5, 2, true, budget)?;
    deadline.check("GL(5,2) classification")?;
    let pool = fpf_pool_gf2(5, budget)?;
    let total: u64 = classes.iter().map(|c| c.size).sum();
    let mut reps: Vec<(Gf2Mat, u64)> = classes
        .iter()
        .map(|c| (Gf2Mat::from_matf(&c.rep).expect("GF(2), L = 5"), c.size))
        .collect();

    // replace the second order-21 representative by a power of the first
    let order21: Vec<usize> = (0..reps.len()).filter(|&i| order_by_multiplication(&reps[i].0) == 21).collect();
    let mut power_sets_equal = false;
    if let [i, j] = order21[..] {
        let target = invariant_factors(&reps[j].0.to_matf());
        let base = reps[i].0;
        if let Some(x) = powers(&base, 21)
            .into_iter()
            .find(|x| invariant_factors(&x.to_matf()) == target)
        {
            reps[j].0 = x;
        }
        let a: std::collections::BTreeSet<_> = powers(&reps[i].0, 21).into_iter().collect();
        let b: std::collections::BTreeSet<_> = powers(&reps[j].0, 21).into_iter().collect();
        power_sets_equal = a == b && invariant_factors(&reps[j].0.to_matf()) == target;
    }

    let mut reports = Vec::with_capacity(reps.len());
    for (rep, size) in &reps {
        deadline.check("GL(5,2) prune")?;
        let order = order_by_multiplication(rep);
        let pw = powers(rep, order);
        let compatible = pool
            .par_iter()
            .filter(|x| pw.iter().all(|y| x.add(y).rank() == 5))
            .count() as u64;
        let branch = if order == 31 {
            let mut code = pw.clone();
            code.push(Gf2Mat::zero(5));
            Gl5Branch::PowerDistance {
                min_pair_distance: crate::matrix::rank_distance_spectrum(&code)?,
                code_size: code.len(),
                at_singleton_bound: code.len() == 32 && singleton_filter(&pw, 5),
            }
        } else {
            Gl5Branch::ExhaustiveScan
        };
        reports.push(Gl5ClassReport {
            rep: rep.to_matf(),
            size: *size,
            order,
            branch,
            compatible,
            coverage_omega: coverage_omega(rep, order),
        });
    }
    let count = |o: u64| reports.iter().filter(|r| r.order == o).count();
    let structure_ok = reports.len() == 8 && count(31) == 6 && count(21) == 2;
    let branches_ok = reports.iter().all(|r| {
        r.compatible == 0
            && match &r.branch {
                Gl5Branch::PowerDistance {
                    min_pair_distance,
                    at_singleton_bound,
                    ..
                } => *min_pair_distance == 5 && *at_singleton_bound,
                Gl5Branch::ExhaustiveScan => r.order == 21,
            }
    });
    let omega_threshold = reports.iter().map(|r| r.coverage_omega).max().unwrap_or(0);
    let mut counts = BTreeMap::new();
    counts.insert("classes".to_string(), reports.len() as u64);
    counts.insert("fixed_point_free".to_string(), total);
    counts.insert("candidates_scanned".to_string(), pool.len() as u64 * reports.len() as u64);
    let certified = structure_ok && branches_ok && power_sets_equal && pool.len() as u64 == total;
    Ok(Gl5Certificate {
        classes: reports,
        structure_ok,
        fixed_point_free_total: total,
        order21_power_sets_equal: power_sets_equal,
        omega_threshold,
        outcome: SearchOutcome {
            found: !certified,
            exhausted: certified,
            witnesses: Vec::new(),
            counts,
        },
        conclusion: if certified {
            format!("no vector linear solution over GF(2)^5 once every power of B_1 is a product M_ω⋯M_1 (ω ≥ {omega_threshold} when all kernels equal B_1)")
        } else {
            "certificate incomplete".to_string()
        },
    })
}

/// Independent re-check of search witnesses.
pub fn verify_witnesses(outcome: &SearchOutcome, budget: &Budget) -> Result<bool> {
    for w in &outcome.witnesses {
        if !lemma2_check(w, budget)?.holds {
            return Ok(false);
        }
    }
    Ok(true)
}
