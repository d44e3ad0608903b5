//! Initial community structures for each snapshot.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::community::{CommunityId, CommunityStructure};
use crate::error::{DgtError, Result};
use crate::graph::{NodeId, SnapshotGraph, SnapshotSequence};

/// How much prior information seeds a snapshot's game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VariantKind {
    /// Union of every community a node held in any earlier snapshot.
    Dgt,
    /// Independent runs: singletons every snapshot.
    Dgts,
    /// Communities from the immediately preceding snapshot only.
    Dgtp,
    /// Whole ground-truth communities covering roughly `seed_fraction` of the
    /// nodes, nothing carried between snapshots.
    Dgtg { seed_fraction: f64 },
}

impl VariantKind {
    pub fn validate(&self) -> Result<()> {
        if let VariantKind::Dgtg { seed_fraction } = *self {
            if !(0.0..=1.0).contains(&seed_fraction) {
                return Err(DgtError::Config(format!(
                    "seed fraction {seed_fraction} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn needs_truth(&self) -> bool {
        matches!(self, VariantKind::Dgtg { .. })
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariantKind::Dgt => f.write_str("dgt"),
            VariantKind::Dgts => f.write_str("dgts"),
            VariantKind::Dgtp => f.write_str("dgtp"),
            VariantKind::Dgtg { .. } => f.write_str("dgtg"),
        }
    }
}

impl FromStr for VariantKind {
    type Err = DgtError;

    /// Parses the variant name; `dgtg` starts with a zero seed fraction.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dgt" => Ok(VariantKind::Dgt),
            "dgts" => Ok(VariantKind::Dgts),
            "dgtp" => Ok(VariantKind::Dgtp),
            "dgtg" => Ok(VariantKind::Dgtg { seed_fraction: 0.0 }),
            other => Err(DgtError::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Known community labels per snapshot. Nodes may be unlabeled.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTruth {
    snapshots: Vec<BTreeMap<NodeId, u64>>,
    names: Vec<String>,
    name_ids: HashMap<String, u64>,
}

impl GroundTruth {
    /// Empty truth for `len` snapshots.
    pub fn new(len: usize) -> Self {
        Self {
            snapshots: vec![BTreeMap::new(); len],
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Assigns `node` to the community named `label` in snapshot `t`. A
    /// second, different label for the same node is rejected because labels
    /// must form a partition.
    pub fn assign(&mut self, t: usize, node: NodeId, label: &str) -> Result<()> {
        let next = self.names.len() as u64;
        let id = *self
            .name_ids
            .entry(label.to_owned())
            .or_insert_with(|| next);
        if id == next {
            self.names.push(label.to_owned());
        }
        let snap = self
            .snapshots
            .get_mut(t)
            .ok_or_else(|| DgtError::Config(format!("ground truth snapshot {t} out of range")))?;
        match snap.insert(node, id) {
            Some(prev) if prev != id => Err(DgtError::Config(format!(
                "node {node} has two ground-truth communities in snapshot {t}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn snapshot(&self, t: usize) -> &BTreeMap<NodeId, u64> {
        &self.snapshots[t]
    }

    pub fn community_name(&self, id: u64) -> &str {
        &self.names[id as usize]
    }

    /// Communities of snapshot `t` restricted to nodes present in `graph`,
    /// keyed by label id.
    pub fn communities_in(&self, t: usize, graph: &SnapshotGraph) -> BTreeMap<u64, Vec<NodeId>> {
        let mut out: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
        for (&v, &c) in &self.snapshots[t] {
            if graph.contains(v) {
                out.entry(c).or_default().push(v);
            }
        }
        out
    }

    /// Number of distinct communities among nodes present in `graph`.
    pub fn num_communities(&self, t: usize, graph: &SnapshotGraph) -> usize {
        self.communities_in(t, graph).len()
    }
}

/// Label sets of every node of `graph` after carrying `history` forward.
fn carried_structure(
    graph: &SnapshotGraph,
    history: &[CommunityStructure],
    first_id: u64,
) -> CommunityStructure {
    let mut members: BTreeMap<CommunityId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut fresh = Vec::new();
    for &v in graph.nodes() {
        let mut any = false;
        for h in history {
            if v.index() < h.universe() {
                for &k in h.labels(v) {
                    members.entry(k).or_default().insert(v);
                    any = true;
                }
            }
        }
        if !any {
            fresh.push(v);
        }
    }
    let mut s = CommunityStructure::empty(graph.universe(), first_id);
    for (k, m) in members {
        s.restore_community(k, m);
    }
    for v in fresh {
        s.create_community([v]);
    }
    s
}

/// Builds the starting structure for snapshot `t`.
///
/// `history` holds the evolved (overlapping) structures of snapshots
/// `0..t`. Fresh community ids start at `first_id`, which must exceed every
/// id used so far in the run.
pub fn init_structure<R: Rng + ?Sized>(
    variant: VariantKind,
    t: usize,
    history: &[CommunityStructure],
    graph: &SnapshotGraph,
    truth: Option<&GroundTruth>,
    first_id: u64,
    rng: &mut R,
) -> Result<CommunityStructure> {
    variant.validate()?;
    let carries = matches!(variant, VariantKind::Dgt | VariantKind::Dgtp);
    if carries && history.len() < t {
        return Err(DgtError::Internal(format!(
            "snapshot {t} needs {t} prior structures, have {}",
            history.len()
        )));
    }
    match variant {
        VariantKind::Dgts => Ok(CommunityStructure::singletons(graph, first_id)),
        _ if t == 0 && carries => Ok(CommunityStructure::singletons(graph, first_id)),
        VariantKind::Dgt => Ok(carried_structure(graph, &history[..t], first_id)),
        VariantKind::Dgtp => Ok(carried_structure(graph, &history[t - 1..t], first_id)),
        VariantKind::Dgtg { seed_fraction } => {
            let truth = truth.ok_or_else(|| {
                DgtError::Config("variant dgtg requires ground truth (--truth)".into())
            })?;
            if t >= truth.len() {
                return Err(DgtError::Config(format!(
                    "ground truth does not cover snapshot {t}"
                )));
            }
            Ok(seeded_structure(
                graph,
                truth,
                t,
                seed_fraction,
                first_id,
                rng,
            ))
        }
    }
}

fn seeded_structure<R: Rng + ?Sized>(
    graph: &SnapshotGraph,
    truth: &GroundTruth,
    t: usize,
    seed_fraction: f64,
    first_id: u64,
    rng: &mut R,
) -> CommunityStructure {
    let budget = (seed_fraction * graph.n() as f64).floor() as usize;
    let mut s = CommunityStructure::empty(graph.universe(), first_id);
    let mut seeded = vec![false; graph.universe()];
    if budget > 0 {
        let mut groups: Vec<Vec<NodeId>> = truth.communities_in(t, graph).into_values().collect();
        groups.shuffle(rng);
        let mut covered = 0;
        for group in groups {
            if covered >= budget {
                break;
            }
            covered += group.len();
            for &v in &group {
                seeded[v.index()] = true;
            }
            s.create_community(group);
        }
    }
    for &v in graph.nodes() {
        if !seeded[v.index()] {
            s.create_community([v]);
        }
    }
    s
}

/// Ground truth loaded from `snapshot,node_label,community_label` rows whose
/// snapshot and node values are resolved against `seq`. Rows naming
/// snapshots or nodes absent from the sequence are skipped.
pub fn truth_from_rows<I>(seq: &SnapshotSequence, rows: I) -> Result<GroundTruth>
where
    I: IntoIterator<Item = (i64, String, String)>,
{
    let mut truth = GroundTruth::new(seq.len());
    for (raw, node, label) in rows {
        let (Some(t), Some(v)) = (seq.ordinal_of(raw), seq.node_id(&node)) else {
            continue;
        };
        truth.assign(t, v, &label)?;
    }
    Ok(truth)
}
