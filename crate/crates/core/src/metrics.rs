//! Partition quality: NMI, directed and undirected modularity, count error.

use std::collections::{BTreeMap, BTreeSet};

use crate::community::CommunityId;
use crate::error::{DgtError, Result};
use crate::graph::{NodeId, SnapshotGraph};

/// A disjoint assignment of nodes to arbitrary integer labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    labels: BTreeMap<NodeId, u64>,
}

impl Partition {
    pub fn new(labels: BTreeMap<NodeId, u64>) -> Self {
        Self { labels }
    }

    pub fn from_communities(assign: &BTreeMap<NodeId, CommunityId>) -> Self {
        Self::new(assign.iter().map(|(&v, &k)| (v, k.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, v: NodeId) -> Option<u64> {
        self.labels.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.labels.iter().map(|(&v, &c)| (v, c))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.keys().copied()
    }

    pub fn num_communities(&self) -> usize {
        self.labels.values().collect::<BTreeSet<_>>().len()
    }

    /// Keeps only the nodes for which `keep` holds.
    pub fn restrict(&self, mut keep: impl FnMut(NodeId) -> bool) -> Self {
        Self::new(
            self.labels
                .iter()
                .filter(|(&v, _)| keep(v))
                .map(|(&v, &c)| (v, c))
                .collect(),
        )
    }

    /// Extends the partition over `nodes`, giving every node it does not
    /// cover the single extra label `extra`.
    pub fn fill_missing(&self, nodes: impl IntoIterator<Item = NodeId>, extra: u64) -> Self {
        let mut labels = self.labels.clone();
        for v in nodes {
            labels.entry(v).or_insert(extra);
        }
        Self::new(labels)
    }
}

impl FromIterator<(NodeId, u64)> for Partition {
    fn from_iter<T: IntoIterator<Item = (NodeId, u64)>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Normalized mutual information `2 I(X;Y) / (H(X) + H(Y))`.
///
/// If exactly one partition has zero entropy the result is 0; if both do it
/// is 1.
pub fn nmi(x: &Partition, y: &Partition) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(DgtError::Precondition("nmi of an empty partition".into()));
    }
    if x.len() != y.len() || !x.nodes().eq(y.nodes()) {
        return Err(DgtError::Precondition(
            "nmi needs partitions over the same node set".into(),
        ));
    }
    let mut joint: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut px: BTreeMap<u64, u64> = BTreeMap::new();
    let mut py: BTreeMap<u64, u64> = BTreeMap::new();
    for ((_, a), (_, b)) in x.iter().zip(y.iter()) {
        *joint.entry((a, b)).or_default() += 1;
        *px.entry(a).or_default() += 1;
        *py.entry(b).or_default() += 1;
    }
    let total = x.len() as f64;
    let entropy = |counts: &BTreeMap<u64, u64>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let c = c as f64;
                (c / total) * (total / c).ln()
            })
            .sum()
    };
    let (hx, hy) = (entropy(&px), entropy(&py));
    match (hx == 0.0, hy == 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let mut mi = 0.0;
    for (&(a, b), &c) in &joint {
        let ratio = (c as f64 * total) / (px[&a] as f64 * py[&b] as f64);
        mi += (c as f64 / total) * ratio.ln();
    }
    Ok((2.0 * mi / (hx + hy)).clamp(0.0, 1.0))
}

fn check_cover(g: &SnapshotGraph, p: &Partition) -> Result<()> {
    if g.m() == 0 {
        return Err(DgtError::EmptyGraph {
            snapshot: g.index(),
        });
    }
    if let Some(&v) = g.nodes().iter().find(|&&v| p.get(v).is_none()) {
        return Err(DgtError::Precondition(format!(
            "partition does not cover node {v} of snapshot {}",
            g.index()
        )));
    }
    Ok(())
}

/// Directed modularity with the `d_in d_out / m` null model.
pub fn modularity_directed(g: &SnapshotGraph, p: &Partition) -> Result<f64> {
    check_cover(g, p)?;
    let m = g.m() as f64;
    let mut internal = 0usize;
    let mut degree_sums: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &v in g.nodes() {
        let c = p.get(v).unwrap_or_default();
        let e = degree_sums.entry(c).or_default();
        e.0 += g.in_degree(v) as f64;
        e.1 += g.out_degree(v) as f64;
    }
    for (u, v) in g.edges() {
        if p.get(u) == p.get(v) {
            internal += 1;
        }
    }
    let expected: f64 = degree_sums
        .values()
        .map(|&(din, dout)| din * dout)
        .sum::<f64>()
        / m;
    Ok((internal as f64 - expected) / m)
}

/// Standard modularity, reading each directed edge as an undirected one.
pub fn modularity_undirected(g: &SnapshotGraph, p: &Partition) -> Result<f64> {
    check_cover(g, p)?;
    let undirected: BTreeSet<(NodeId, NodeId)> =
        g.edges().map(|(u, v)| (u.min(v), u.max(v))).collect();
    let m = undirected.len() as f64;
    let mut internal: BTreeMap<u64, f64> = BTreeMap::new();
    let mut degree: BTreeMap<u64, f64> = BTreeMap::new();
    for &(u, v) in &undirected {
        let (cu, cv) = (p.get(u).unwrap_or_default(), p.get(v).unwrap_or_default());
        *degree.entry(cu).or_default() += 1.0;
        *degree.entry(cv).or_default() += 1.0;
        if cu == cv {
            *internal.entry(cu).or_default() += 1.0;
        }
    }
    Ok(degree
        .iter()
        .map(|(c, &d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum())
}

/// Summed absolute difference between predicted and actual community counts.
pub fn count_error(predicted: &[usize], actual: &[usize]) -> Result<usize> {
    if predicted.len() != actual.len() {
        return Err(DgtError::Precondition(format!(
            "count series lengths differ: {} vs {}",
            predicted.len(),
            actual.len()
        )));
    }
    Ok(predicted
        .iter()
        .zip(actual)
        .map(|(&p, &a)| p.abs_diff(a))
        .sum())
}

/// Mean and sample standard deviation; the deviation is 0 below two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
