//! Overlapping community state shared by every agent during one game.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{DgtError, Result};
use crate::graph::{NodeId, SnapshotGraph};

/// Community identifier. Ids are handed out monotonically and never reused
/// within one dynamic run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommunityId(pub u64);

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single agent move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Join(CommunityId),
    Leave(CommunityId),
    Switch { from: CommunityId, to: CommunityId },
    NoOp,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Join(_) => ActionKind::Join,
            Action::Leave(_) => ActionKind::Leave,
            Action::Switch { .. } => ActionKind::Switch,
            Action::NoOp => ActionKind::NoOp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Join,
    Leave,
    Switch,
    NoOp,
}

/// One broken invariant found by [`CommunityStructure::audit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `agent` is listed in the community but does not carry its label.
    MemberWithoutLabel {
        agent: NodeId,
        community: CommunityId,
    },
    /// `agent` carries the label but is not listed as a member.
    LabelWithoutMember {
        agent: NodeId,
        community: CommunityId,
    },
    EmptyCommunity(CommunityId),
    /// The id was never issued by the allocator.
    UnissuedId(CommunityId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MemberWithoutLabel { agent, community } => write!(
                f,
                "agent {agent} is a member of community {community} but lacks its label"
            ),
            Violation::LabelWithoutMember { agent, community } => write!(
                f,
                "agent {agent} carries label {community} but is not a member"
            ),
            Violation::EmptyCommunity(k) => write!(f, "community {k} is empty"),
            Violation::UnissuedId(k) => write!(f, "community id {k} was never issued"),
        }
    }
}

/// Communities `C_k` together with every agent's label set `s_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityStructure {
    pub(crate) communities: BTreeMap<CommunityId, BTreeSet<NodeId>>,
    pub(crate) memberships: Vec<BTreeSet<CommunityId>>,
    next_id: u64,
}

impl CommunityStructure {
    /// Structure with no communities over a node universe of `universe` ids.
    /// Fresh ids start at `first_id`.
    pub fn empty(universe: usize, first_id: u64) -> Self {
        Self {
            communities: BTreeMap::new(),
            memberships: vec![BTreeSet::new(); universe],
            next_id: first_id,
        }
    }

    /// Every node of `graph` in its own fresh community, in ascending node order.
    pub fn singletons(graph: &SnapshotGraph, first_id: u64) -> Self {
        let mut s = Self::empty(graph.universe(), first_id);
        for &v in graph.nodes() {
            s.create_community([v]);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.memberships.len()
    }

    /// First id not yet handed out.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn labels(&self, v: NodeId) -> &BTreeSet<CommunityId> {
        &self.memberships[v.index()]
    }

    pub fn members(&self, k: CommunityId) -> Option<&BTreeSet<NodeId>> {
        self.communities.get(&k)
    }

    pub fn communities(&self) -> impl Iterator<Item = (CommunityId, &BTreeSet<NodeId>)> {
        self.communities.iter().map(|(&k, m)| (k, m))
    }

    pub fn num_communities(&self) -> usize {
        self.communities.len()
    }

    /// Allocates a fresh id and fills it with `members`. An empty member list
    /// still consumes an id but leaves no community behind.
    pub fn create_community(&mut self, members: impl IntoIterator<Item = NodeId>) -> CommunityId {
        let k = CommunityId(self.next_id);
        self.next_id += 1;
        let set: BTreeSet<NodeId> = members.into_iter().collect();
        for &v in &set {
            self.memberships[v.index()].insert(k);
        }
        if !set.is_empty() {
            self.communities.insert(k, set);
        }
        k
    }

    /// Re-creates a community under an id issued earlier in the same run.
    pub(crate) fn restore_community(&mut self, k: CommunityId, members: BTreeSet<NodeId>) {
        if members.is_empty() {
            return;
        }
        for &v in &members {
            self.memberships[v.index()].insert(k);
        }
        self.communities.insert(k, members);
        self.next_id = self.next_id.max(k.0 + 1);
    }

    pub fn join(&mut self, v: NodeId, k: CommunityId) -> Result<()> {
        if self.memberships[v.index()].contains(&k) {
            return Err(DgtError::Precondition(format!(
                "agent {v} already holds community {k}"
            )));
        }
        let members = self
            .communities
            .get_mut(&k)
            .ok_or_else(|| DgtError::Precondition(format!("community {k} does not exist")))?;
        members.insert(v);
        self.memberships[v.index()].insert(k);
        Ok(())
    }

    pub fn leave(&mut self, v: NodeId, k: CommunityId) -> Result<()> {
        if !self.memberships[v.index()].remove(&k) {
            return Err(DgtError::Precondition(format!(
                "agent {v} does not hold community {k}"
            )));
        }
        if let Some(members) = self.communities.get_mut(&k) {
            members.remove(&v);
            if members.is_empty() {
                self.communities.remove(&k);
            }
        }
        Ok(())
    }

    /// Checks that `action` is legal for `v` without applying it.
    pub fn validate(&self, v: NodeId, action: Action) -> Result<()> {
        let held = &self.memberships[v.index()];
        let check_join = |k: CommunityId| {
            if held.contains(&k) {
                Err(DgtError::Precondition(format!(
                    "agent {v} already holds community {k}"
                )))
            } else if !self.communities.contains_key(&k) {
                Err(DgtError::Precondition(format!(
                    "community {k} does not exist"
                )))
            } else {
                Ok(())
            }
        };
        let check_leave = |k: CommunityId| {
            if held.contains(&k) {
                Ok(())
            } else {
                Err(DgtError::Precondition(format!(
                    "agent {v} does not hold community {k}"
                )))
            }
        };
        match action {
            Action::NoOp => Ok(()),
            Action::Join(k) => check_join(k),
            Action::Leave(k) => check_leave(k),
            Action::Switch { from, to } => {
                if from == to {
                    return Err(DgtError::Precondition(
                        "switch legs must name different communities".into(),
                    ));
                }
                check_leave(from)?;
                check_join(to)
            }
        }
    }

    pub fn apply(&mut self, v: NodeId, action: Action) -> Result<()> {
        self.validate(v, action)?;
        match action {
            Action::NoOp => Ok(()),
            Action::Join(k) => self.join(v, k),
            Action::Leave(k) => self.leave(v, k),
            Action::Switch { from, to } => {
                // join first so a singleton `from` cannot take `to` down with it
                self.join(v, to)?;
                self.leave(v, from)
            }
        }
    }

    /// Lists every broken consistency invariant; empty when healthy.
    pub fn audit(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (&k, members) in &self.communities {
            if members.is_empty() {
                out.push(Violation::EmptyCommunity(k));
            }
            if k.0 >= self.next_id {
                out.push(Violation::UnissuedId(k));
            }
            for &v in members {
                let held = self
                    .memberships
                    .get(v.index())
                    .is_some_and(|s| s.contains(&k));
                if !held {
                    out.push(Violation::MemberWithoutLabel {
                        agent: v,
                        community: k,
                    });
                }
            }
        }
        for (i, labels) in self.memberships.iter().enumerate() {
            let v = NodeId(i as u32);
            for &k in labels {
                let listed = self.communities.get(&k).is_some_and(|m| m.contains(&v));
                if !listed {
                    out.push(Violation::LabelWithoutMember {
                        agent: v,
                        community: k,
                    });
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.audit();
        if v.is_empty() {
            Ok(())
        } else {
            Err(DgtError::Audit(v))
        }
    }
}
