//! Directed snapshot graphs and the sequence container they live in.
//!
//! Every snapshot of one dataset shares a single [`NodeId`] space, assigned in
//! order of first appearance in the input stream. Adjacency arrays are sized to
//! that shared universe; a node that does not occur in snapshot `t` simply has
//! empty lists there and is not counted in `n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{DgtError, Result};

/// Dense node index, stable across all snapshots of one dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One `source target snapshot` record before interning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub snapshot: i64,
}

impl EdgeRecord {
    pub fn new(source: impl Into<String>, target: impl Into<String>, snapshot: i64) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            snapshot,
        }
    }
}

/// Per-transition churn: edges added, edges deleted, and nodes touched by either.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChangeStats {
    pub edges_added: usize,
    pub edges_deleted: usize,
    pub nodes_changed: usize,
}

/// A single directed snapshot without self-edges or parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotGraph {
    index: usize,
    nodes: Vec<NodeId>,
    present: Vec<bool>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    m: usize,
}

impl SnapshotGraph {
    /// Builds a snapshot over a node universe of size `universe`.
    ///
    /// Self-edges are dropped and duplicates collapsed. The node set is every
    /// endpoint of a kept edge plus `declared`.
    pub fn from_edges(
        index: usize,
        universe: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        declared: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        let mut present = vec![false; universe];
        let mut out_adj = vec![Vec::new(); universe];
        let mut in_adj = vec![Vec::new(); universe];
        for (u, v) in edges {
            if u == v {
                continue;
            }
            out_adj[u.index()].push(v);
            in_adj[v.index()].push(u);
            present[u.index()] = true;
            present[v.index()] = true;
        }
        for v in declared {
            present[v.index()] = true;
        }
        let mut m = 0;
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for list in &out_adj {
            m += list.len();
        }
        let nodes = present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| NodeId(i as u32))
            .collect();
        Self {
            index,
            nodes,
            present,
            out_adj,
            in_adj,
            m,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Size of the shared id space, not the node count of this snapshot.
    pub fn universe(&self) -> usize {
        self.present.len()
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Nodes present in this snapshot, ascending.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.present.get(v.index()).copied().unwrap_or(false)
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v.index()].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.index()].len()
    }

    /// Adjacency indicator `A_ij`.
    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.out_adj
            .get(i.index())
            .is_some_and(|l| l.binary_search(&j).is_ok())
    }

    /// All edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes
            .iter()
            .flat_map(move |&u| self.out_adj[u.index()].iter().map(move |&v| (u, v)))
    }

    /// Number of nodes that receive an edge from both `i` and `j`.
    pub fn common_neighbors(&self, i: NodeId, j: NodeId) -> Result<usize> {
        if i == j {
            return Err(DgtError::Precondition(format!(
                "common_neighbors needs two distinct nodes, got {i} twice"
            )));
        }
        if !self.contains(i) || !self.contains(j) {
            return Err(DgtError::Precondition(format!(
                "node {i} or {j} is not in snapshot {}",
                self.index
            )));
        }
        Ok(sorted_intersection_len(
            &self.out_adj[i.index()],
            &self.out_adj[j.index()],
        ))
    }

    /// Copy with every edge mirrored, for undirected analysis.
    pub fn symmetrized(&self) -> SnapshotGraph {
        let edges = self.edges().flat_map(|(u, v)| [(u, v), (v, u)]);
        SnapshotGraph::from_edges(
            self.index,
            self.universe(),
            edges,
            self.nodes.iter().copied(),
        )
    }
}

pub(crate) fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Edge churn between two snapshots of the same sequence.
pub fn diff(prev: &SnapshotGraph, next: &SnapshotGraph) -> ChangeStats {
    let universe = prev.universe().max(next.universe());
    fn out(g: &SnapshotGraph, u: usize) -> &[NodeId] {
        g.out_adj.get(u).map_or(&[], Vec::as_slice)
    }

    let mut touched = vec![false; universe];
    let mut stats = ChangeStats::default();
    for u in 0..universe {
        let (a, b) = (out(prev, u), out(next, u));
        let (mut x, mut y) = (0, 0);
        while x < a.len() || y < b.len() {
            let ord = match (a.get(x), b.get(y)) {
                (Some(p), Some(q)) => p.cmp(q),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, _) => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Equal => {
                    x += 1;
                    y += 1;
                }
                std::cmp::Ordering::Less => {
                    stats.edges_deleted += 1;
                    touched[u] = true;
                    touched[a[x].index()] = true;
                    x += 1;
                }
                std::cmp::Ordering::Greater => {
                    stats.edges_added += 1;
                    touched[u] = true;
                    touched[b[y].index()] = true;
                    y += 1;
                }
            }
        }
    }
    stats.nodes_changed = touched.iter().filter(|&&t| t).count();
    stats
}

/// Counters collected while building a sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub records: usize,
    pub self_edges_dropped: usize,
    pub duplicates_collapsed: usize,
}

/// Ordered snapshots plus the label <-> id map they share.
#[derive(Clone, Debug)]
pub struct SnapshotSequence {
    snapshots: Vec<SnapshotGraph>,
    labels: Vec<String>,
    ids: HashMap<String, NodeId>,
    ordinals: Vec<i64>,
    stats: LoadStats,
}

impl SnapshotSequence {
    pub fn snapshots(&self) -> &[SnapshotGraph] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &SnapshotGraph {
        &self.snapshots[t]
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Number of distinct ids across all snapshots.
    pub fn node_universe(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.ids.get(label).copied()
    }

    /// The raw snapshot value from the input that maps to ordinal `t`.
    pub fn raw_ordinal(&self, t: usize) -> i64 {
        self.ordinals[t]
    }

    /// Inverse of [`raw_ordinal`](Self::raw_ordinal).
    pub fn ordinal_of(&self, raw: i64) -> Option<usize> {
        self.ordinals.binary_search(&raw).ok()
    }

    pub fn load_stats(&self) -> LoadStats {
        self.stats
    }

    /// Edge set of snapshot `t` by external label, for comparisons that must
    /// not depend on id assignment order.
    pub fn labeled_edges(&self, t: usize) -> BTreeSet<(String, String)> {
        self.snapshots[t]
            .edges()
            .map(|(u, v)| (self.label(u).to_owned(), self.label(v).to_owned()))
            .collect()
    }

    pub fn churn(&self) -> Vec<ChangeStats> {
        self.snapshots
            .windows(2)
            .map(|w| diff(&w[0], &w[1]))
            .collect()
    }
}

/// Incremental construction of a [`SnapshotSequence`].
#[derive(Debug, Default)]
pub struct SequenceBuilder {
    labels: Vec<String>,
    ids: HashMap<String, NodeId>,
    edges: BTreeMap<i64, Vec<(NodeId, NodeId)>>,
    declared: Vec<(NodeId, Option<i64>)>,
    undirected: bool,
    stats: LoadStats,
}

impl SequenceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Materialize each record as a pair of opposite directed edges.
    pub fn undirected(mut self, undirected: bool) -> Self {
        self.undirected = undirected;
        self
    }

    fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len() as u32);
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn add_edge(&mut self, source: &str, target: &str, snapshot: i64) -> Result<()> {
        self.stats.records += 1;
        if snapshot < 0 {
            return Err(DgtError::format(
                self.stats.records,
                format!("negative snapshot ordinal {snapshot}"),
            ));
        }
        let u = self.intern(source);
        let v = self.intern(target);
        let bucket = self.edges.entry(snapshot).or_default();
        if u == v {
            self.stats.self_edges_dropped += 1;
            return Ok(());
        }
        bucket.push((u, v));
        if self.undirected {
            bucket.push((v, u));
        }
        Ok(())
    }

    /// Declares a node present in one snapshot, or in every snapshot when
    /// `snapshot` is `None`, even if it has no incident edges there.
    pub fn declare_node(&mut self, label: &str, snapshot: Option<i64>) {
        let id = self.intern(label);
        self.declared.push((id, snapshot));
    }

    pub fn build(self) -> Result<SnapshotSequence> {
        if self.edges.is_empty() {
            return Err(DgtError::NoEdges);
        }
        let ordinals: Vec<i64> = self.edges.keys().copied().collect();
        let mut declared_by_t: Vec<Vec<NodeId>> = vec![Vec::new(); ordinals.len()];
        for &(id, snap) in &self.declared {
            match snap {
                None => declared_by_t.iter_mut().for_each(|d| d.push(id)),
                Some(raw) => match ordinals.binary_search(&raw) {
                    Ok(t) => declared_by_t[t].push(id),
                    Err(_) => {
                        return Err(DgtError::Config(format!(
                            "node list references snapshot {raw}, which has no edges"
                        )))
                    }
                },
            }
        }

        let universe = self.labels.len();
        let mut stats = self.stats;
        let mut snapshots = Vec::with_capacity(ordinals.len());
        for (t, (edges, declared)) in self.edges.into_values().zip(declared_by_t).enumerate() {
            let raw_len = edges.len();
            let g = SnapshotGraph::from_edges(t, universe, edges, declared);
            stats.duplicates_collapsed += raw_len - g.m();
            if g.m() == 0 {
                return Err(DgtError::EmptyGraph { snapshot: t });
            }
            snapshots.push(g);
        }
        Ok(SnapshotSequence {
            snapshots,
            labels: self.labels,
            ids: self.ids,
            ordinals,
            stats,
        })
    }
}

/// Interns `records` into a sequence. Snapshot values are dense-ranked, so
/// `1..=30` and `0..30` both load as ordinals `0..30`.
pub fn load_edge_stream<I>(records: I) -> Result<SnapshotSequence>
where
    I: IntoIterator<Item = EdgeRecord>,
{
    let mut builder = SequenceBuilder::new();
    for r in records {
        builder.add_edge(&r.source, &r.target, r.snapshot)?;
    }
    builder.build()
}
