//! Dynamic community detection as a community formation game.
//!
//! Each node of a directed snapshot graph is an agent that joins, leaves, or
//! switches communities to maximize a gain-minus-loss utility. Snapshots are
//! processed in order, and the initialization variant decides how much of the
//! previously discovered structure seeds the next game.

pub mod community;
pub mod error;
pub mod experiment;
pub mod gain;
pub mod game;
pub mod graph;
pub mod init;
pub mod io;
pub mod metrics;
pub mod synth;

pub use community::{Action, ActionKind, CommunityId, CommunityStructure, Violation};
pub use error::{DgtError, Result};
pub use experiment::{
    derive_seed, EvalOptions, Experiment, MetricsRow, RepetitionResult, SweepRow,
};
pub use gain::{GainContext, GainKind, UtilityBreakdown};
pub use game::{run_snapshot, GameConfig, SnapshotResult};
pub use graph::{ChangeStats, EdgeRecord, NodeId, SnapshotGraph, SnapshotSequence};
pub use init::{GroundTruth, VariantKind};
pub use metrics::Partition;
pub use synth::SynthConfig;
