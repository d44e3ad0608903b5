//! Planted-partition dynamic benchmarks.
//!
//! Snapshot 0 plants `communities` equal blocks and samples every ordered
//! pair independently. Each later snapshot moves `floor(churn * n)` random
//! nodes to a different block and resamples only the pairs touching a moved
//! node, so consecutive snapshots differ locally.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DgtError, Result};
use crate::graph::{SequenceBuilder, SnapshotSequence};
use crate::init::GroundTruth;

const MAX_ATTEMPTS: u64 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub communities: usize,
    pub community_size: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub churn: f64,
    pub snapshots: usize,
    pub rng_seed: u64,
}

impl SynthConfig {
    /// 4 blocks of 25 nodes, `p_in = 0.3`, `p_out = 0.01`, 10% churn, 5 snapshots.
    pub fn fixture(rng_seed: u64) -> Self {
        Self {
            communities: 4,
            community_size: 25,
            p_in: 0.3,
            p_out: 0.01,
            churn: 0.1,
            snapshots: 5,
            rng_seed,
        }
    }

    pub fn nodes(&self) -> usize {
        self.communities * self.community_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.communities < 1 || self.community_size < 1 || self.snapshots < 1 {
            return Err(DgtError::Config(
                "communities, community_size and snapshots must all be at least 1".into(),
            ));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(DgtError::Config(format!(
                "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if !(0.0..=1.0).contains(&self.churn) {
            return Err(DgtError::Config(format!(
                "churn {} is outside [0, 1]",
                self.churn
            )));
        }
        let n = self.nodes() as f64;
        let s = self.community_size as f64;
        let expected = self.p_in * n * (s - 1.0) + self.p_out * n * (n - s);
        if expected <= 0.0 {
            return Err(DgtError::Config(
                "configuration cannot produce any edge (expected m = 0)".into(),
            ));
        }
        Ok(())
    }
}

struct Planted {
    n: usize,
    block: Vec<usize>,
    adj: Vec<bool>,
}

impl Planted {
    fn sample_pair<R: Rng>(&mut self, u: usize, v: usize, cfg: &SynthConfig, rng: &mut R) {
        let p = if self.block[u] == self.block[v] {
            cfg.p_in
        } else {
            cfg.p_out
        };
        self.adj[u * self.n + v] = rng.gen_bool(p);
    }

    fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }
}

/// Per-snapshot edge lists and block assignments.
type Sample = (Vec<Vec<(usize, usize)>>, Vec<Vec<usize>>);

fn attempt(cfg: &SynthConfig, stream: u64) -> Option<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(stream);
    let n = cfg.nodes();
    let mut g = Planted {
        n,
        block: (0..n).map(|v| v / cfg.community_size).collect(),
        adj: vec![false; n * n],
    };
    for u in 0..n {
        for v in 0..n {
            if u != v {
                g.sample_pair(u, v, cfg, &mut rng);
            }
        }
    }

    let moves = (cfg.churn * n as f64).floor() as usize;
    let mut edges = Vec::with_capacity(cfg.snapshots);
    let mut blocks = Vec::with_capacity(cfg.snapshots);
    for t in 0..cfg.snapshots {
        if t > 0 && moves > 0 {
            let mut moved = sample(&mut rng, n, moves).into_vec();
            moved.sort_unstable();
            let mut is_moved = vec![false; n];
            for &v in &moved {
                is_moved[v] = true;
                if cfg.communities > 1 {
                    // uniform over the other blocks
                    let mut b = rng.gen_range(0..cfg.communities - 1);
                    if b >= g.block[v] {
                        b += 1;
                    }
                    g.block[v] = b;
                }
            }
            for u in 0..n {
                for v in 0..n {
                    if u != v && (is_moved[u] || is_moved[v]) {
                        g.sample_pair(u, v, cfg, &mut rng);
                    }
                }
            }
        }
        if g.edge_count() == 0 {
            return None;
        }
        let list = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| g.adj[u * n + v])
            .collect();
        edges.push(list);
        blocks.push(g.block.clone());
    }
    Some((edges, blocks))
}

/// Generates the snapshot sequence and its planted ground truth. Node labels
/// are `0..n`, community labels `c0..c{k-1}`.
pub fn generate(cfg: &SynthConfig) -> Result<(SnapshotSequence, GroundTruth)> {
    cfg.validate()?;
    let (edges, blocks) = (0..MAX_ATTEMPTS)
        .find_map(|stream| attempt(cfg, stream))
        .ok_or_else(|| {
            DgtError::Config(format!(
                "no edge-bearing sample in {MAX_ATTEMPTS} attempts; raise p_in or p_out"
            ))
        })?;

    let labels: Vec<String> = (0..cfg.nodes()).map(|v| v.to_string()).collect();
    let mut builder = SequenceBuilder::new();
    for (t, list) in edges.iter().enumerate() {
        for &(u, v) in list {
            builder.add_edge(&labels[u], &labels[v], t as i64)?;
        }
    }
    let seq = builder.build()?;

    let mut truth = GroundTruth::new(seq.len());
    for (t, block) in blocks.iter().enumerate() {
        for (v, &b) in block.iter().enumerate() {
            if let Some(id) = seq.node_id(&labels[v]) {
                truth.assign(t, id, &format!("c{b}"))?;
            }
        }
    }
    Ok((seq, truth))
}
