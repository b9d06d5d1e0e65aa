//! Acyclic multicast multigraphs and the generators for the network
//! families studied here.
//!
//! Node ids are `0..n` and are listed in a topological order. Edge ids are
//! `0..m` and are topological as well: every edge entering a node has a
//! smaller id than every edge leaving it, and the source edges come first.

use serde::{Deserialize, Serialize};

use crate::config::Budget;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
}

/// Which generator produced a network, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    /// Five-layer family with out-degrees `d` on the third layer; all
    /// `d_j = 2` is the Swirl network.
    NOmegaD { omega: usize, d: Vec<usize> },
    /// `(n+1, 2)`-combination network with `middle` middle nodes.
    Combination { middle: usize },
    /// Composite of a network with a combination subnetwork.
    Composite { middle: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct Network {
    nodes: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    receivers: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    #[serde(skip)]
    in_edges: Vec<Vec<usize>>,
    #[serde(skip)]
    out_edges: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawNetwork {
    nodes: Vec<usize>,
    #[serde(default)]
    labels: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    receivers: Vec<usize>,
    #[serde(default)]
    family: Option<Family>,
}

impl TryFrom<RawNetwork> for Network {
    type Error = Error;

    fn try_from(raw: RawNetwork) -> Result<Self> {
        for (i, e) in raw.edges.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidNetwork(format!("edge at position {i} has id {}", e.id)));
            }
        }
        let pairs = raw.edges.iter().map(|e| (e.tail, e.head)).collect();
        let mut net = Network::new(raw.nodes, pairs, raw.source, raw.receivers)?;
        if !raw.labels.is_empty() {
            net = net.with_labels(raw.labels)?;
        }
        net.family = raw.family;
        Ok(net)
    }
}

impl Network {
    /// Structural validation only; receiver max-flows are checked by
    /// [`Network::deficient_receivers`].
    pub fn new(nodes: Vec<usize>, edges: Vec<(usize, usize)>, source: usize, receivers: Vec<usize>) -> Result<Network> {
        let n = nodes.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX {
                return Err(Error::InvalidNetwork("nodes must be a permutation of 0..n".into()));
            }
            pos[v] = i;
        }
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        let edges: Vec<Edge> = edges
            .into_iter()
            .enumerate()
            .map(|(id, (tail, head))| Edge { id, tail, head })
            .collect();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidNetwork(format!("edge {} has an unknown endpoint", e.id)));
            }
            if pos[e.tail] >= pos[e.head] {
                return Err(Error::InvalidNetwork(format!("edge {} goes against the node order", e.id)));
            }
            out_edges[e.tail].push(e.id);
            in_edges[e.head].push(e.id);
        }
        if source >= n || !in_edges[source].is_empty() {
            return Err(Error::InvalidNetwork("source must exist and have no incoming edges".into()));
        }
        if let Some(v) = (0..n).find(|&v| v != source && in_edges[v].is_empty()) {
            return Err(Error::InvalidNetwork(format!("node {v} other than the source has no incoming edge")));
        }
        for v in 0..n {
            if let (Some(&last_in), Some(&first_out)) = (in_edges[v].iter().max(), out_edges[v].iter().min()) {
                if last_in > first_out {
                    return Err(Error::InvalidNetwork(format!("edge ids around node {v} are not topological")));
                }
            }
        }
        if out_edges[source].iter().enumerate().any(|(i, &e)| i != e) {
            return Err(Error::InvalidNetwork("source edges must have the smallest ids".into()));
        }
        if let Some(&t) = receivers.iter().find(|&&t| t >= n || t == source) {
            return Err(Error::InvalidNetwork(format!("invalid receiver {t}")));
        }
        Ok(Network {
            nodes,
            labels: Vec::new(),
            edges,
            source,
            receivers,
            family: None,
            in_edges,
            out_edges,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Network> {
        if labels.len() != self.nodes.len() {
            return Err(Error::InvalidNetwork("one label per node expected".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    fn with_family(mut self, family: Family) -> Network {
        self.family = Some(family);
        self
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn label(&self, v: usize) -> String {
        self.labels.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Result<&Edge> {
        self.edges.get(id).ok_or(Error::UnknownEdge(id))
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn receivers(&self) -> &[usize] {
        &self.receivers
    }

    /// Source dimension `|Out(s)|`.
    pub fn omega(&self) -> usize {
        self.out_edges[self.source].len()
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn source_edges(&self) -> &[usize] {
        &self.out_edges[self.source]
    }

    /// All adjacent pairs `(d, e)` with `head(d) = tail(e)`, ordered by `e`
    /// then `d`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in &self.edges {
            for &d in &self.in_edges[e.tail] {
                out.push((d, e.id));
            }
        }
        out
    }

    pub fn is_adjacent(&self, d: usize, e: usize) -> bool {
        match (self.edges.get(d), self.edges.get(e)) {
            (Some(a), Some(b)) => a.head == b.tail,
            _ => false,
        }
    }

    /// Maximum number of edge-disjoint paths from the source that end with
    /// an edge of `set` (unit capacities, designated edges feeding a super
    /// sink).
    pub fn maxflow_to_edges(&self, set: &[usize]) -> Result<usize> {
        if set.is_empty() {
            return Err(Error::InvalidParameter("designated edge set is empty".into()));
        }
        let mut designated = vec![false; self.edges.len()];
        for &e in set {
            if e >= self.edges.len() {
                return Err(Error::UnknownEdge(e));
            }
            designated[e] = true;
        }
        let n = self.nodes.len();
        let sink = n;
        // residual arcs: arc 2i forward for edge i, 2i+1 backward
        let head_of = |i: usize| if designated[i] { sink } else { self.edges[i].head };
        let mut adj = vec![Vec::new(); n + 1];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.tail].push(2 * i);
            adj[head_of(i)].push(2 * i + 1);
        }
        let mut used = vec![false; self.edges.len()];
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; n + 1];
            let mut seen = vec![false; n + 1];
            seen[self.source] = true;
            let mut queue = std::collections::VecDeque::from([self.source]);
            while let Some(v) = queue.pop_front() {
                if v == sink {
                    break;
                }
                for &arc in &adj[v] {
                    let i = arc / 2;
                    let (ok, to) = if arc % 2 == 0 {
                        (!used[i], head_of(i))
                    } else {
                        (used[i], self.edges[i].tail)
                    };
                    if ok && !seen[to] {
                        seen[to] = true;
                        prev[to] = arc;
                        queue.push_back(to);
                    }
                }
            }
            if !seen[sink] {
                return Ok(flow);
            }
            let mut v = sink;
            while v != self.source {
                let arc = prev[v];
                let i = arc / 2;
                if arc % 2 == 0 {
                    used[i] = true;
                    v = self.edges[i].tail;
                } else {
                    used[i] = false;
                    v = head_of(i);
                }
            }
            flow += 1;
        }
    }

    /// Receivers whose max-flow from the source is below `omega`.
    pub fn deficient_receivers(&self) -> Vec<usize> {
        let omega = self.omega();
        self.receivers
            .iter()
            .copied()
            .filter(|&t| {
                self.in_edges[t].is_empty() || self.maxflow_to_edges(&self.in_edges[t]).unwrap_or(0) < omega
            })
            .collect()
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic k-subsets of `0..n`.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Node and edge ids of an `N_{ω,d}` instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NOmegaDLayout {
    pub omega: usize,
    pub d: Vec<usize>,
}

impl NOmegaDLayout {
    pub fn u(&self, j: usize) -> usize {
        1 + j
    }

    pub fn v(&self, j: usize) -> usize {
        1 + self.omega + j
    }

    fn grey_offset(&self, j: usize) -> usize {
        self.d[..j].iter().sum()
    }

    pub fn grey_count(&self) -> usize {
        self.d.iter().sum()
    }

    pub fn grey(&self, j: usize, k: usize) -> usize {
        1 + 2 * self.omega + self.grey_offset(j) + k
    }

    pub fn source_edge(&self, j: usize) -> usize {
        j
    }

    /// Edge from `u_j` into `v_j`.
    pub fn edge_from_own(&self, j: usize) -> usize {
        self.omega + 2 * j
    }

    /// Edge from `u_{j+1}` (cyclically) into `v_j`.
    pub fn edge_from_next(&self, j: usize) -> usize {
        self.omega + 2 * j + 1
    }

    /// The edge `v_j -> g_{jk}`.
    pub fn grey_edge(&self, j: usize, k: usize) -> usize {
        3 * self.omega + self.grey_offset(j) + k
    }

    /// `(j, k)` of grey node index `g` in `0..grey_count()`.
    pub fn grey_index(&self, mut g: usize) -> (usize, usize) {
        for (j, &dj) in self.d.iter().enumerate() {
            if g < dj {
                return (j, g);
            }
            g -= dj;
        }
        panic!("grey index out of range");
    }
}

/// The five-layer network `N_{ω,d}`: s, u_1..u_ω, v_1..v_ω with v_j fed by
/// u_j and u_{j+1} (cyclically), d_j grey nodes below v_j, and one receiver
/// per set of ω grey nodes with max-flow ω.
pub fn gen_n_omega_d(omega: usize, d: &[usize], budget: &Budget) -> Result<Network> {
    if omega < 3 {
        return Err(Error::InvalidParameter("omega must be at least 3".into()));
    }
    if d.len() != omega || d.iter().any(|&x| x < 2) {
        return Err(Error::InvalidParameter("need omega out-degrees, each at least 2".into()));
    }
    let layout = NOmegaDLayout {
        omega,
        d: d.to_vec(),
    };
    let grey = layout.grey_count();
    let subsets = binomial(grey as u64, omega as u64);
    if subsets > budget.subset_cap as u128 {
        return Err(Error::budget("receiver subsets", subsets, budget.subset_cap));
    }
    let mut labels = vec!["s".to_string()];
    let mut edges = Vec::new();
    for j in 0..omega {
        labels.push(format!("u{}", j + 1));
        edges.push((0, layout.u(j)));
    }
    for j in 0..omega {
        labels.push(format!("v{}", j + 1));
        edges.push((layout.u(j), layout.v(j)));
        edges.push((layout.u((j + 1) % omega), layout.v(j)));
    }
    for j in 0..omega {
        for k in 0..d[j] {
            labels.push(format!("g{}_{}", j + 1, k + 1));
            edges.push((layout.v(j), layout.grey(j, k)));
        }
    }
    let n_base = labels.len();
    let base = Network::new((0..n_base).collect(), edges.clone(), 0, Vec::new())?;
    let mut chosen = Vec::new();
    for_each_subset(grey, omega, |s| {
        let set: Vec<usize> = s.iter().map(|&g| 3 * omega + g).collect();
        if base.maxflow_to_edges(&set) == Ok(omega) {
            chosen.push(s.to_vec());
        }
    });
    let mut receivers = Vec::new();
    for (i, s) in chosen.iter().enumerate() {
        let t = n_base + i;
        let names: Vec<String> = s
            .iter()
            .map(|&g| {
                let (j, k) = layout.grey_index(g);
                format!("{}.{}", j + 1, k + 1)
            })
            .collect();
        labels.push(format!("t[{}]", names.join(",")));
        receivers.push(t);
        for &g in s {
            edges.push((1 + 2 * omega + g, t));
        }
    }
    let net = Network::new((0..labels.len()).collect(), edges, 0, receivers)?
        .with_labels(labels)?
        .with_family(Family::NOmegaD {
            omega,
            d: d.to_vec(),
        });
    Ok(net)
}

/// `N_{ω,d}` with every `d_j = 2`.
pub fn gen_swirl(omega: usize, budget: &Budget) -> Result<Network> {
    gen_n_omega_d(omega, &vec![2; omega.max(1)], budget)
}

/// The `(n+1, 2)`-combination network with `middle = n + 1` middle nodes.
///
/// The source `s` reaches a distribution node `c` over two parallel edges
/// (so the source dimension is 2), `c` feeds each middle node over one edge
/// and every pair of middle nodes feeds one receiver.
pub fn gen_combination(middle: usize) -> Result<Network> {
    if middle < 3 {
        return Err(Error::InvalidParameter("need n >= 2, i.e. at least 3 middle nodes".into()));
    }
    let mut labels = vec!["s".to_string(), "c".to_string()];
    let mut edges = vec![(0, 1), (0, 1)];
    for i in 0..middle {
        labels.push(format!("m{}", i + 1));
        edges.push((1, 2 + i));
    }
    let mut receivers = Vec::new();
    for_each_subset(middle, 2, |s| {
        let t = labels.len();
        labels.push(format!("t{}_{}", s[0] + 1, s[1] + 1));
        receivers.push(t);
        edges.push((2 + s[0], t));
        edges.push((2 + s[1], t));
    });
    Ok(Network::new((0..labels.len()).collect(), edges, 0, receivers)?
        .with_labels(labels)?
        .with_family(Family::Combination { middle }))
}

/// Join `n1` (source dimension ω) with an `(n+1, 2)`-combination network:
/// a new source `s'` with ω edges to a hub `s`, ω edges from `s` to the
/// source of `n1`, 2 edges from `s` to the combination network's own
/// source `s2`, and ω-2 edges from `s` straight to each of its receivers.
pub fn compose_algorithm1(n1: &Network, n: usize) -> Result<Network> {
    let omega = n1.omega();
    if omega < 2 {
        return Err(Error::InvalidParameter("source dimension must be at least 2".into()));
    }
    let middle = n + 1;
    if middle < 3 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    let mut labels = vec!["s'".to_string(), "s".to_string()];
    // n1's nodes keep their relative order, shifted by 2
    let shift = 2;
    for v in 0..n1.num_nodes() {
        labels.push(format!("N1:{}", n1.label(v)));
    }
    let s2 = labels.len();
    labels.push("s2".into());
    let mid0 = labels.len();
    for i in 0..middle {
        labels.push(format!("m{}", i + 1));
    }
    let mut n2_receivers = Vec::new();
    for_each_subset(middle, 2, |s| {
        n2_receivers.push((labels.len(), s[0], s[1]));
        labels.push(format!("t{}_{}", s[0] + 1, s[1] + 1));
    });
    let n1_source = shift + n1.source();
    let mut edges = Vec::new();
    edges.extend(std::iter::repeat_n((0, 1), omega));
    edges.extend(std::iter::repeat_n((1, n1_source), omega));
    edges.extend([(1, s2), (1, s2)]);
    for &(t, _, _) in &n2_receivers {
        edges.extend(std::iter::repeat_n((1, t), omega - 2));
    }
    // the ω hub edges replace n1's source; its own source edges follow
    for e in n1.edges() {
        edges.push((shift + e.tail, shift + e.head));
    }
    for i in 0..middle {
        edges.push((s2, mid0 + i));
    }
    for &(t, a, b) in &n2_receivers {
        edges.push((mid0 + a, t));
        edges.push((mid0 + b, t));
    }
    let mut order: Vec<usize> = vec![0, 1];
    order.extend(n1.nodes().iter().map(|&v| shift + v));
    order.extend(s2..labels.len());
    let mut receivers: Vec<usize> = n1.receivers().iter().map(|&t| shift + t).collect();
    receivers.extend(n2_receivers.iter().map(|&(t, _, _)| t));
    Ok(Network::new(order, edges, 0, receivers)?
        .with_labels(labels)?
        .with_family(Family::Composite { middle }))
}
