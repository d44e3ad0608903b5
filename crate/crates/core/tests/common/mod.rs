//! Random instances and brute-force reference implementations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dgt_core::graph::load_edge_stream;
use dgt_core::{
    Action, CommunityId, CommunityStructure, EdgeRecord, NodeId, Partition, SnapshotGraph,
    SnapshotSequence,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random directed graph on up to `n` labeled nodes with at least one edge.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> SnapshotSequence {
    let mut records = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                records.push(EdgeRecord::new(format!("v{u}"), format!("v{v}"), 0));
            }
        }
    }
    if records.is_empty() {
        records.push(EdgeRecord::new("v0", "v1", 0));
    }
    load_edge_stream(records).unwrap()
}

pub fn random_partition<R: Rng>(rng: &mut R, nodes: &[NodeId], k: u64) -> Partition {
    nodes
        .iter()
        .map(|&v| (v, rng.gen_range(0..k.max(1))))
        .collect()
}

/// Overlapping structure: each node holds between 0 and `max_labels` of `k`
/// candidate groups. Empty groups are never created.
pub fn random_structure<R: Rng>(
    rng: &mut R,
    g: &SnapshotGraph,
    k: usize,
    max_labels: usize,
) -> CommunityStructure {
    let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); k.max(1)];
    for &v in g.nodes() {
        let count = rng.gen_range(0..=max_labels);
        let mut ids: Vec<usize> = (0..groups.len()).collect();
        ids.shuffle(rng);
        for &gi in ids.iter().take(count) {
            groups[gi].push(v);
        }
    }
    let mut s = CommunityStructure::empty(g.universe(), 0);
    for members in groups.into_iter().filter(|m| !m.is_empty()) {
        s.create_community(members);
    }
    s
}

/// A valid random action for `agent`; NoOp when nothing else applies.
pub fn random_action<R: Rng>(rng: &mut R, s: &CommunityStructure, agent: NodeId) -> Action {
    let held: Vec<CommunityId> = s.labels(agent).iter().copied().collect();
    let free: Vec<CommunityId> = s
        .communities()
        .map(|(k, _)| k)
        .filter(|k| !held.contains(k))
        .collect();
    let mut options = vec![Action::NoOp];
    if let Some(&k) = free.choose(rng) {
        options.push(Action::Join(k));
    }
    if let Some(&k) = held.choose(rng) {
        options.push(Action::Leave(k));
    }
    if let (Some(&from), Some(&to)) = (held.choose(rng), free.choose(rng)) {
        options.push(Action::Switch { from, to });
    }
    *options.choose(rng).unwrap()
}

/// Dense view of one snapshot.
pub struct Dense {
    pub nodes: Vec<NodeId>,
    pub a: BTreeMap<(NodeId, NodeId), bool>,
    pub din: BTreeMap<NodeId, f64>,
    pub dout: BTreeMap<NodeId, f64>,
    pub m: f64,
    pub n: f64,
}

impl Dense {
    pub fn new(g: &SnapshotGraph) -> Self {
        let nodes = g.nodes().to_vec();
        let mut a = BTreeMap::new();
        let mut din: BTreeMap<NodeId, f64> = nodes.iter().map(|&v| (v, 0.0)).collect();
        let mut dout = din.clone();
        for &i in &nodes {
            for &j in &nodes {
                a.insert((i, j), false);
            }
        }
        for (u, v) in g.edges() {
            a.insert((u, v), true);
            *dout.get_mut(&u).unwrap() += 1.0;
            *din.get_mut(&v).unwrap() += 1.0;
        }
        let m = g.m() as f64;
        let n = nodes.len() as f64;
        Dense {
            nodes,
            a,
            din,
            dout,
            m,
            n,
        }
    }

    pub fn adj(&self, i: NodeId, j: NodeId) -> f64 {
        if self.a[&(i, j)] {
            1.0
        } else {
            0.0
        }
    }

    /// Nodes with in-edges from both `i` and `j`.
    pub fn common(&self, i: NodeId, j: NodeId) -> f64 {
        self.nodes
            .iter()
            .filter(|&&x| self.a[&(i, x)] && self.a[&(j, x)])
            .count() as f64
    }

    pub fn similarity(&self, i: NodeId, j: NodeId) -> f64 {
        let w = self.common(i, j);
        let linked = self.a[&(i, j)];
        let dd = self.din[&i] * self.dout[&j];
        if linked && w >= 1.0 {
            w * (1.0 - dd / (2.0 * self.m))
        } else if !linked && w >= 1.0 {
            w / self.n
        } else if linked {
            dd / (4.0 * self.m)
        } else {
            -dd / (4.0 * self.m)
        }
    }

    /// Double sum over the agent's labels and each label's other members.
    pub fn gain_similarity(&self, s: &CommunityStructure, i: NodeId) -> f64 {
        let mut total = 0.0;
        for &k in s.labels(i) {
            for &j in s.members(k).unwrap() {
                if j != i {
                    total += self.similarity(i, j);
                }
            }
        }
        total / self.m
    }

    /// Triple sum with the shared-label indicator and `[k = k']`.
    pub fn gain_modularity(&self, s: &CommunityStructure, i: NodeId) -> f64 {
        let two_m = 2.0 * self.m;
        let mut total = 0.0;
        for &k in s.labels(i) {
            for &j in s.members(k).unwrap() {
                if j == i {
                    continue;
                }
                let shared = s.labels(i).intersection(s.labels(j)).next().is_some();
                let delta = if shared { 1.0 } else { 0.0 };
                for &kp in s.labels(j) {
                    let overlap = if kp == k { 1.0 } else { 0.0 };
                    total +=
                        self.adj(i, j) * delta - self.din[&i] * self.dout[&j] / two_m * overlap;
                }
            }
        }
        total / two_m
    }

    pub fn utility(&self, s: &CommunityStructure, i: NodeId, modularity: bool) -> f64 {
        let gain = if modularity {
            self.gain_modularity(s, i)
        } else {
            self.gain_similarity(s, i)
        };
        gain - s.labels(i).len() as f64 / self.m
    }

    /// `(1/m) sum_ij [A_ij - din_i dout_j / m] delta(c_i, c_j)`.
    pub fn modularity_directed(&self, p: &Partition) -> f64 {
        let mut q = 0.0;
        for &i in &self.nodes {
            for &j in &self.nodes {
                if p.get(i) == p.get(j) {
                    q += self.adj(i, j) - self.din[&i] * self.dout[&j] / self.m;
                }
            }
        }
        q / self.m
    }

    /// `(1/2m) sum_ij [A_ij - d_i d_j / 2m] delta(c_i, c_j)` on the undirected
    /// reading of the edges.
    pub fn modularity_undirected(&self, p: &Partition) -> f64 {
        let und = |i: NodeId, j: NodeId| self.a[&(i, j)] || self.a[&(j, i)];
        let mut deg: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut twice_m = 0.0;
        for &i in &self.nodes {
            for &j in &self.nodes {
                if i != j && und(i, j) {
                    *deg.entry(i).or_default() += 1.0;
                    twice_m += 1.0;
                }
            }
        }
        let mut q = 0.0;
        for &i in &self.nodes {
            for &j in &self.nodes {
                if p.get(i) == p.get(j) {
                    let a = if i != j && und(i, j) { 1.0 } else { 0.0 };
                    let di = deg.get(&i).copied().unwrap_or(0.0);
                    let dj = deg.get(&j).copied().unwrap_or(0.0);
                    q += a - di * dj / twice_m;
                }
            }
        }
        q / twice_m
    }
}

/// Applies `action` to a copy of `s`.
pub fn after(s: &CommunityStructure, agent: NodeId, action: Action) -> CommunityStructure {
    let mut next = s.clone();
    next.apply(agent, action).unwrap();
    next
}

/// `2 I(X;Y) / (H(X) + H(Y))` from the joint count table, natural log.
pub fn nmi_direct(x: &Partition, y: &Partition) -> f64 {
    let n = x.len() as f64;
    let mut joint: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let mut px: BTreeMap<u64, f64> = BTreeMap::new();
    let mut py: BTreeMap<u64, f64> = BTreeMap::new();
    for (v, a) in x.iter() {
        let b = y.get(v).unwrap();
        *joint.entry((a, b)).or_default() += 1.0;
        *px.entry(a).or_default() += 1.0;
        *py.entry(b).or_default() += 1.0;
    }
    let entropy =
        |t: &BTreeMap<u64, f64>| -> f64 { t.values().map(|&c| -(c / n) * (c / n).ln()).sum() };
    let (hx, hy) = (entropy(&px), entropy(&py));
    if hx == 0.0 && hy == 0.0 {
        return 1.0;
    }
    if hx == 0.0 || hy == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (&(a, b), &c) in &joint {
        let pxy = c / n;
        mi += pxy * (pxy / ((px[&a] / n) * (py[&b] / n))).ln();
    }
    2.0 * mi / (hx + hy)
}

/// Relabels every community id of `p` through an injective shuffle.
pub fn relabel<R: Rng>(rng: &mut R, p: &Partition) -> Partition {
    let ids: BTreeSet<u64> = p.iter().map(|(_, c)| c).collect();
    let mut fresh: Vec<u64> = (0..ids.len() as u64).map(|i| i * 7 + 1000).collect();
    fresh.shuffle(rng);
    let map: BTreeMap<u64, u64> = ids.into_iter().zip(fresh).collect();
    p.iter().map(|(v, c)| (v, map[&c])).collect()
}
