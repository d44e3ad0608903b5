//! The community formation game played on a single snapshot.
//!
//! Agents are visited in a fresh random permutation every pass and play their
//! best response immediately, so later agents in a pass observe earlier moves.
//! Play stops after `max_passes` passes or once the fraction of agents that
//! changed strategy during a pass drops below the configured threshold.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use crate::community::{Action, ActionKind, CommunityId, CommunityStructure, Violation};
use crate::error::{DgtError, Result};
use crate::gain::{GainContext, GainKind};
use crate::graph::{NodeId, SnapshotGraph};

/// Tunables for one game. Defaults give the `8n` game cap with a 5% stop rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig {
    pub gain: GainKind,
    pub max_passes: usize,
    pub change_fraction_threshold: f64,
    pub rng_seed: u64,
    pub allow_switch: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            gain: GainKind::Similarity,
            max_passes: 8,
            change_fraction_threshold: 0.05,
            rng_seed: 0,
            allow_switch: true,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_passes < 1 {
            return Err(DgtError::Config("max_passes must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.change_fraction_threshold) {
            return Err(DgtError::Config(format!(
                "change threshold {} is outside [0, 1]",
                self.change_fraction_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ActionCounts {
    pub join: usize,
    pub leave: usize,
    pub switch: usize,
    pub noop: usize,
}

impl ActionCounts {
    fn record(&mut self, kind: ActionKind) {
        match kind {
            ActionKind::Join => self.join += 1,
            ActionKind::Leave => self.leave += 1,
            ActionKind::Switch => self.switch += 1,
            ActionKind::NoOp => self.noop += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.join + self.leave + self.switch + self.noop
    }
}

/// Summed gain and loss over all agents at the end of one pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassRecord {
    pub pass: usize,
    pub changed_agents: usize,
    pub total_gain: f64,
    pub total_loss: f64,
}

impl PassRecord {
    pub fn total_utility(&self) -> f64 {
        self.total_gain - self.total_loss
    }

    pub fn potential(&self, rho_g: f64, rho_l: f64) -> f64 {
        rho_l * self.total_loss - rho_g * self.total_gain
    }
}

/// Outcome of one snapshot game.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotResult {
    /// Disjoint assignment covering every node of the snapshot.
    pub partition: BTreeMap<NodeId, CommunityId>,
    pub passes_used: usize,
    /// Individual games played, one per agent visit.
    pub games_played: usize,
    pub actions: ActionCounts,
    pub passes: Vec<PassRecord>,
    /// A full pass ended with no agent changing strategy.
    pub reached_fixed_point: bool,
}

impl SnapshotResult {
    pub fn utility_trace(&self) -> Vec<f64> {
        self.passes.iter().map(PassRecord::total_utility).collect()
    }

    pub fn num_communities(&self) -> usize {
        self.partition.values().collect::<BTreeSet<_>>().len()
    }
}

/// Best action for `agent` and its utility change.
///
/// Join and Switch only target communities hosting an in- or out-neighbor.
/// The best Join target and the best Leave source are picked independently
/// and combined into the Switch candidate. Equal deltas resolve as
/// Switch > Join > Leave, and to the lowest community id within a kind.
pub fn best_response_with_delta(
    ctx: &GainContext<'_>,
    agent: NodeId,
    structure: &CommunityStructure,
    config: &GameConfig,
) -> Result<(Action, f64)> {
    let g = ctx.graph();
    let held = structure.labels(agent);
    let mut targets = BTreeSet::new();
    for &v in g.out_neighbors(agent).iter().chain(g.in_neighbors(agent)) {
        targets.extend(structure.labels(v).iter().filter(|k| !held.contains(k)));
    }

    let mut best_join: Option<(CommunityId, f64)> = None;
    for &k in &targets {
        let c = ctx.contribution(config.gain, agent, k, structure)?;
        if best_join.is_none_or(|(_, b)| c > b) {
            best_join = Some((k, c));
        }
    }
    let mut best_leave: Option<(CommunityId, f64)> = None;
    for &k in held {
        let c = ctx.contribution(config.gain, agent, k, structure)?;
        if best_leave.is_none_or(|(_, b)| c < b) {
            best_leave = Some((k, c));
        }
    }

    let unit = 1.0 / ctx.m();
    let mut candidates: Vec<(Action, f64)> = Vec::with_capacity(3);
    if let (true, Some((to, cj)), Some((from, cl))) = (config.allow_switch, best_join, best_leave) {
        candidates.push((Action::Switch { from, to }, cj - cl));
    }
    if let Some((k, cj)) = best_join {
        candidates.push((Action::Join(k), cj - unit));
    }
    if let Some((k, cl)) = best_leave {
        candidates.push((Action::Leave(k), unit - cl));
    }

    let mut best = (Action::NoOp, 0.0);
    for (action, delta) in candidates {
        if delta > best.1 {
            best = (action, delta);
        }
    }
    Ok(best)
}

pub fn best_response(
    ctx: &GainContext<'_>,
    agent: NodeId,
    structure: &CommunityStructure,
    config: &GameConfig,
) -> Result<Action> {
    best_response_with_delta(ctx, agent, structure, config).map(|(a, _)| a)
}

/// True when no agent of the snapshot has an improving action.
pub fn is_local_equilibrium(
    ctx: &GainContext<'_>,
    structure: &CommunityStructure,
    config: &GameConfig,
) -> Result<bool> {
    for &v in ctx.graph().nodes() {
        if best_response(ctx, v, structure, config)? != Action::NoOp {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Summed (gain, loss) over every agent of the snapshot.
pub fn totals(
    ctx: &GainContext<'_>,
    structure: &CommunityStructure,
    kind: GainKind,
) -> Result<(f64, f64)> {
    let (mut gain, mut loss) = (0.0, 0.0);
    for &v in ctx.graph().nodes() {
        let u = ctx.current_utility(kind, v, structure)?;
        gain += u.gain;
        loss += u.loss;
    }
    Ok((gain, loss))
}

/// `rho_l * total loss - rho_g * total gain`.
pub fn potential(
    ctx: &GainContext<'_>,
    structure: &CommunityStructure,
    kind: GainKind,
    rho_g: f64,
    rho_l: f64,
) -> Result<f64> {
    if !(rho_g > 0.0 && rho_l > 0.0) {
        return Err(DgtError::Precondition(format!(
            "locality factors must be positive, got rho_g={rho_g} rho_l={rho_l}"
        )));
    }
    let (gain, loss) = totals(ctx, structure, kind)?;
    Ok(rho_l * loss - rho_g * gain)
}

/// Collapses overlapping labels to one community per node: the held label
/// with the largest gain contribution, lowest id on ties. Label-less nodes
/// get fresh singleton ids drawn from `structure`'s allocator.
pub fn hard_assignment(
    ctx: &GainContext<'_>,
    structure: &mut CommunityStructure,
    kind: GainKind,
) -> Result<BTreeMap<NodeId, CommunityId>> {
    let mut partition = BTreeMap::new();
    let mut unlabeled = Vec::new();
    for &v in ctx.graph().nodes() {
        let mut best: Option<(CommunityId, f64)> = None;
        for &k in structure.labels(v) {
            let c = ctx.contribution(kind, v, k, structure)?;
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((k, c));
            }
        }
        match best {
            Some((k, _)) => {
                partition.insert(v, k);
            }
            None => unlabeled.push(v),
        }
    }
    for v in unlabeled {
        let k = structure.create_community(std::iter::empty());
        partition.insert(v, k);
    }
    Ok(partition)
}

/// Plays the game on `graph` starting from `initial`.
///
/// Returns the evolved overlapping structure and the hard partition derived
/// from it.
pub fn run_snapshot(
    graph: &SnapshotGraph,
    initial: CommunityStructure,
    config: &GameConfig,
) -> Result<(CommunityStructure, SnapshotResult)> {
    config.validate()?;
    initial.check()?;
    let ctx = GainContext::new(graph)?;
    let mut structure = initial;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut agents = graph.nodes().to_vec();
    let n = agents.len();

    let mut actions = ActionCounts::default();
    let mut passes = Vec::new();
    let mut games_played = 0;
    let mut reached_fixed_point = false;

    for pass in 1..=config.max_passes {
        agents.shuffle(&mut rng);
        let mut changed = 0;
        for &agent in &agents {
            games_played += 1;
            let (action, delta) = best_response_with_delta(&ctx, agent, &structure, config)?;
            actions.record(action.kind());
            if action == Action::NoOp {
                continue;
            }
            if delta.is_nan() || delta <= 0.0 {
                return Err(DgtError::Internal(format!(
                    "agent {agent} chose {action:?} with non-positive delta {delta}"
                )));
            }
            structure.apply(agent, action)?;
            changed += 1;
        }
        let (total_gain, total_loss) = totals(&ctx, &structure, config.gain)?;
        passes.push(PassRecord {
            pass,
            changed_agents: changed,
            total_gain,
            total_loss,
        });
        if changed == 0 {
            // nothing moved, so every later pass would be a no-op as well
            reached_fixed_point = true;
            break;
        }
        if (changed as f64) < config.change_fraction_threshold * n as f64 {
            break;
        }
    }

    let partition = hard_assignment(&ctx, &mut structure, config.gain)?;
    structure.check()?;
    let result = SnapshotResult {
        partition,
        passes_used: passes.len(),
        games_played,
        actions,
        passes,
        reached_fixed_point,
    };
    Ok((structure, result))
}
