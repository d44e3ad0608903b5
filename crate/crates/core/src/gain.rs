//! Gain, loss and utility of an agent's label set.
//!
//! Both gain functions are additive over the agent's own labels when every
//! other agent's labels are held fixed, so a single per-community
//! contribution drives full evaluation and the incremental action deltas.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use crate::community::{Action, CommunityId, CommunityStructure};
use crate::error::{DgtError, Result};
use crate::graph::{NodeId, SnapshotGraph};

/// Which gain function agents maximize.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GainKind {
    /// Neighborhood similarity summed over co-members.
    #[default]
    Similarity,
    /// Personalized modularity of the agent's communities.
    Modularity,
}

impl std::str::FromStr for GainKind {
    type Err = DgtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(GainKind::Similarity),
            "modularity" => Ok(GainKind::Modularity),
            other => Err(DgtError::Config(format!("unknown gain function `{other}`"))),
        }
    }
}

/// Which case of the similarity kernel applies to an ordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimilarityBranch {
    LinkedWithCommon,
    CommonOnly,
    LinkedOnly,
    Unrelated,
}

impl SimilarityBranch {
    pub fn select(linked: bool, common: usize) -> Self {
        match (linked, common >= 1) {
            (true, true) => SimilarityBranch::LinkedWithCommon,
            (false, true) => SimilarityBranch::CommonOnly,
            (true, false) => SimilarityBranch::LinkedOnly,
            (false, false) => SimilarityBranch::Unrelated,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Link {
    common: u32,
    linked: bool,
}

/// Nodes related to one agent: out-neighbors and nodes sharing an out-neighbor.
#[derive(Debug, Default)]
struct NeighborRow {
    links: HashMap<NodeId, Link>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UtilityBreakdown {
    pub gain: f64,
    pub loss: f64,
    pub utility: f64,
}

impl UtilityBreakdown {
    fn new(gain: f64, loss: f64) -> Self {
        Self {
            gain,
            loss,
            utility: gain - loss,
        }
    }
}

/// Read-only view of one snapshot with cached degrees and common-neighbor rows.
#[derive(Debug)]
pub struct GainContext<'g> {
    graph: &'g SnapshotGraph,
    in_deg: Vec<f64>,
    out_deg: Vec<f64>,
    m: f64,
    n: f64,
    rows: Vec<OnceLock<NeighborRow>>,
}

impl<'g> GainContext<'g> {
    pub fn new(graph: &'g SnapshotGraph) -> Result<Self> {
        if graph.m() == 0 {
            return Err(DgtError::EmptyGraph {
                snapshot: graph.index(),
            });
        }
        let universe = graph.universe();
        let (mut in_deg, mut out_deg) = (vec![0.0; universe], vec![0.0; universe]);
        for &v in graph.nodes() {
            in_deg[v.index()] = graph.in_degree(v) as f64;
            out_deg[v.index()] = graph.out_degree(v) as f64;
        }
        Ok(Self {
            graph,
            in_deg,
            out_deg,
            m: graph.m() as f64,
            n: graph.n() as f64,
            rows: (0..universe).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn graph(&self) -> &'g SnapshotGraph {
        self.graph
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn in_degree(&self, v: NodeId) -> f64 {
        self.in_deg[v.index()]
    }

    pub fn out_degree(&self, v: NodeId) -> f64 {
        self.out_deg[v.index()]
    }

    fn row(&self, i: NodeId) -> &NeighborRow {
        self.rows[i.index()].get_or_init(|| {
            let g = self.graph;
            let mut links: HashMap<NodeId, Link> = HashMap::new();
            for &k in g.out_neighbors(i) {
                links.entry(k).or_default().linked = true;
                for &j in g.in_neighbors(k) {
                    if j != i {
                        links.entry(j).or_default().common += 1;
                    }
                }
            }
            NeighborRow { links }
        })
    }

    fn link(&self, i: NodeId, j: NodeId) -> Link {
        self.row(i).links.get(&j).copied().unwrap_or_default()
    }

    fn check_pair(&self, i: NodeId, j: NodeId) -> Result<()> {
        if i == j {
            return Err(DgtError::Precondition(format!(
                "pairwise quantity needs distinct agents, got {i} twice"
            )));
        }
        for v in [i, j] {
            if !self.graph.contains(v) {
                return Err(DgtError::Precondition(format!(
                    "node {v} is not in snapshot {}",
                    self.graph.index()
                )));
            }
        }
        Ok(())
    }

    /// Cached common-neighbor count `w_ij`.
    pub fn common_neighbors(&self, i: NodeId, j: NodeId) -> Result<usize> {
        self.check_pair(i, j)?;
        Ok(self.link(i, j).common as usize)
    }

    /// Similarity kernel `c_ij`.
    pub fn similarity(&self, i: NodeId, j: NodeId) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.similarity_unchecked(i, j))
    }

    fn similarity_unchecked(&self, i: NodeId, j: NodeId) -> f64 {
        let link = self.link(i, j);
        let w = f64::from(link.common);
        let dd = self.in_deg[i.index()] * self.out_deg[j.index()];
        match SimilarityBranch::select(link.linked, link.common as usize) {
            SimilarityBranch::LinkedWithCommon => w * (1.0 - dd / (2.0 * self.m)),
            SimilarityBranch::CommonOnly => w / self.n,
            SimilarityBranch::LinkedOnly => dd / (4.0 * self.m),
            SimilarityBranch::Unrelated => -dd / (4.0 * self.m),
        }
    }

    /// Gain `agent` draws from holding label `k`, other agents fixed.
    ///
    /// The value does not depend on whether `agent` currently holds `k`.
    pub fn contribution(
        &self,
        kind: GainKind,
        agent: NodeId,
        k: CommunityId,
        structure: &CommunityStructure,
    ) -> Result<f64> {
        let members = structure
            .members(k)
            .ok_or_else(|| DgtError::Precondition(format!("community {k} does not exist")))?;
        let others = members.iter().copied().filter(|&j| j != agent);
        Ok(match kind {
            GainKind::Similarity => {
                others
                    .map(|j| self.similarity_unchecked(agent, j))
                    .sum::<f64>()
                    / self.m
            }
            GainKind::Modularity => {
                // every co-member shares `k` with the agent, so the shared-label
                // indicator is 1 and exactly one of j's labels equals `k`
                let two_m = 2.0 * self.m;
                let din = self.in_deg[agent.index()];
                let out = self.graph.out_neighbors(agent);
                others
                    .map(|j| {
                        let a = if out.binary_search(&j).is_ok() {
                            structure.labels(j).len() as f64
                        } else {
                            0.0
                        };
                        a - din * self.out_deg[j.index()] / two_m
                    })
                    .sum::<f64>()
                    / two_m
            }
        })
    }

    fn gain(
        &self,
        kind: GainKind,
        agent: NodeId,
        labels: &BTreeSet<CommunityId>,
        structure: &CommunityStructure,
    ) -> Result<f64> {
        labels
            .iter()
            .map(|&k| self.contribution(kind, agent, k, structure))
            .sum()
    }

    pub fn gain_similarity(
        &self,
        agent: NodeId,
        labels: &BTreeSet<CommunityId>,
        structure: &CommunityStructure,
    ) -> Result<f64> {
        self.gain(GainKind::Similarity, agent, labels, structure)
    }

    pub fn gain_modularity(
        &self,
        agent: NodeId,
        labels: &BTreeSet<CommunityId>,
        structure: &CommunityStructure,
    ) -> Result<f64> {
        self.gain(GainKind::Modularity, agent, labels, structure)
    }

    /// Membership cost, linear in the number of labels.
    pub fn loss(&self, label_count: usize) -> f64 {
        label_count as f64 / self.m
    }

    pub fn utility(
        &self,
        kind: GainKind,
        agent: NodeId,
        labels: &BTreeSet<CommunityId>,
        structure: &CommunityStructure,
    ) -> Result<UtilityBreakdown> {
        let gain = self.gain(kind, agent, labels, structure)?;
        Ok(UtilityBreakdown::new(gain, self.loss(labels.len())))
    }

    /// Utility of `agent` under its current labels.
    pub fn current_utility(
        &self,
        kind: GainKind,
        agent: NodeId,
        structure: &CommunityStructure,
    ) -> Result<UtilityBreakdown> {
        self.utility(kind, agent, structure.labels(agent), structure)
    }

    /// Change in the agent's utility if it played `action`.
    pub fn utility_delta(
        &self,
        kind: GainKind,
        agent: NodeId,
        action: Action,
        structure: &CommunityStructure,
    ) -> Result<f64> {
        structure.validate(agent, action)?;
        let unit = 1.0 / self.m;
        Ok(match action {
            Action::NoOp => 0.0,
            Action::Join(k) => self.contribution(kind, agent, k, structure)? - unit,
            Action::Leave(k) => unit - self.contribution(kind, agent, k, structure)?,
            Action::Switch { from, to } => {
                self.contribution(kind, agent, to, structure)?
                    - self.contribution(kind, agent, from, structure)?
            }
        })
    }
}
