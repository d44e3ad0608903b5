//! Multi-snapshot, multi-repetition runs and their aggregate metrics.
//!
//! Every random choice derives from one user seed. The game for snapshot `t`
//! of repetition `r` uses `derive_seed(seed, r, t, 0)` and D-GTG seeding uses
//! `derive_seed(seed, r, t, 1)`, so any single (repetition, snapshot) pair can
//! be replayed without running the others first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::community::CommunityStructure;
use crate::error::{DgtError, Result};
use crate::game::{run_snapshot, GameConfig, SnapshotResult};
use crate::graph::SnapshotSequence;
use crate::init::{init_structure, GroundTruth, VariantKind};
use crate::metrics::{
    count_error, mean_std, modularity_directed, modularity_undirected, nmi, Partition,
};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (repetition, snapshot, purpose) triple.
pub fn derive_seed(seed: u64, repetition: u64, snapshot: u64, purpose: u64) -> u64 {
    mix(mix(mix(mix(seed) ^ repetition) ^ snapshot) ^ purpose)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Score with undirected modularity instead of the directed form.
    pub undirected: bool,
    /// Treat nodes without a ground-truth label as one extra community
    /// instead of dropping them from the NMI comparison.
    pub unlabeled_as_community: bool,
}

/// Per-snapshot output of one repetition.
#[derive(Clone, Debug)]
pub struct SnapshotOutcome {
    pub t: usize,
    pub result: SnapshotResult,
    pub n_pred: usize,
    pub n_true: Option<usize>,
    pub nmi: Option<f64>,
    pub modularity: f64,
}

#[derive(Clone, Debug)]
pub struct RepetitionResult {
    pub repetition: u64,
    pub snapshots: Vec<SnapshotOutcome>,
}

impl RepetitionResult {
    pub fn mean_nmi(&self) -> Option<f64> {
        let v: Vec<f64> = self.snapshots.iter().filter_map(|s| s.nmi).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Summed |predicted - actual| community count over snapshots with truth.
    pub fn count_error(&self) -> Option<usize> {
        let (pred, actual): (Vec<usize>, Vec<usize>) = self
            .snapshots
            .iter()
            .filter_map(|s| s.n_true.map(|a| (s.n_pred, a)))
            .unzip();
        if actual.is_empty() {
            return None;
        }
        count_error(&pred, &actual).ok()
    }
}

/// Metrics for one snapshot, averaged over repetitions.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: usize,
    pub n_communities_pred: f64,
    pub n_communities_true: Option<usize>,
    pub nmi: Option<f64>,
    pub modularity: f64,
}

/// A full experiment description.
#[derive(Clone, Debug)]
pub struct Experiment<'a> {
    pub sequence: &'a SnapshotSequence,
    pub truth: Option<&'a GroundTruth>,
    pub variant: VariantKind,
    /// Game settings; `rng_seed` is ignored in favor of derived seeds.
    pub game: GameConfig,
    pub seed: u64,
    pub repetitions: usize,
    pub jobs: usize,
    pub eval: EvalOptions,
}

impl<'a> Experiment<'a> {
    pub fn new(sequence: &'a SnapshotSequence, variant: VariantKind) -> Self {
        Self {
            sequence,
            truth: None,
            variant,
            game: GameConfig::default(),
            seed: 0,
            repetitions: 10,
            jobs: 1,
            eval: EvalOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        self.variant.validate()?;
        if self.repetitions < 1 {
            return Err(DgtError::Config("repetitions must be at least 1".into()));
        }
        if self.variant.needs_truth() && self.truth.is_none() {
            return Err(DgtError::Config(
                "variant dgtg requires ground truth (--truth)".into(),
            ));
        }
        if let Some(truth) = self.truth {
            if truth.len() != self.sequence.len() {
                return Err(DgtError::Config(format!(
                    "ground truth covers {} snapshots, input has {}",
                    truth.len(),
                    self.sequence.len()
                )));
            }
        }
        Ok(())
    }

    fn truth_partition(&self, t: usize) -> Option<Partition> {
        let truth = self.truth?;
        let g = self.sequence.snapshot(t);
        let labeled: Partition = truth
            .snapshot(t)
            .iter()
            .filter(|(v, _)| g.contains(**v))
            .map(|(&v, &c)| (v, c))
            .collect();
        if self.eval.unlabeled_as_community {
            Some(labeled.fill_missing(g.nodes().iter().copied(), u64::MAX))
        } else {
            Some(labeled)
        }
    }

    fn evaluate(&self, t: usize, result: SnapshotResult) -> Result<SnapshotOutcome> {
        let g = self.sequence.snapshot(t);
        let predicted = Partition::from_communities(&result.partition);
        let modularity = if self.eval.undirected {
            modularity_undirected(g, &predicted)?
        } else {
            modularity_directed(g, &predicted)?
        };
        let (nmi_value, n_true) = match self.truth_partition(t) {
            Some(truth) if !truth.is_empty() => {
                let pred = predicted.restrict(|v| truth.get(v).is_some());
                (Some(nmi(&pred, &truth)?), Some(truth.num_communities()))
            }
            Some(_) => (None, Some(0)),
            None => (None, None),
        };
        Ok(SnapshotOutcome {
            t,
            n_pred: result.num_communities(),
            n_true,
            nmi: nmi_value,
            modularity,
            result,
        })
    }

    /// Runs every snapshot in order for one repetition.
    pub fn run_repetition(&self, repetition: u64) -> Result<RepetitionResult> {
        self.validate()?;
        let mut history: Vec<CommunityStructure> = Vec::with_capacity(self.sequence.len());
        let mut next_id = 0;
        let mut snapshots = Vec::with_capacity(self.sequence.len());
        for (t, g) in self.sequence.snapshots().iter().enumerate() {
            let mut init_rng =
                ChaCha8Rng::seed_from_u64(derive_seed(self.seed, repetition, t as u64, 1));
            let initial = init_structure(
                self.variant,
                t,
                &history,
                g,
                self.truth,
                next_id,
                &mut init_rng,
            )?;
            let cfg = GameConfig {
                rng_seed: derive_seed(self.seed, repetition, t as u64, 0),
                ..self.game.clone()
            };
            let (evolved, result) = run_snapshot(g, initial, &cfg)?;
            next_id = evolved.next_id();
            history.push(evolved);
            snapshots.push(self.evaluate(t, result)?);
        }
        Ok(RepetitionResult {
            repetition,
            snapshots,
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| DgtError::Internal(format!("thread pool: {e}")))
    }

    /// All repetitions, in repetition order regardless of `jobs`.
    pub fn run(&self) -> Result<Vec<RepetitionResult>> {
        self.validate()?;
        self.pool()?.install(|| {
            (0..self.repetitions as u64)
                .into_par_iter()
                .map(|r| self.run_repetition(r))
                .collect()
        })
    }
}

/// Per-snapshot means over repetitions.
pub fn aggregate(reps: &[RepetitionResult]) -> Vec<MetricsRow> {
    let Some(first) = reps.first() else {
        return Vec::new();
    };
    (0..first.snapshots.len())
        .map(|t| {
            let outcomes: Vec<&SnapshotOutcome> = reps.iter().map(|r| &r.snapshots[t]).collect();
            let mean = |f: &dyn Fn(&SnapshotOutcome) -> f64| {
                outcomes.iter().map(|o| f(o)).sum::<f64>() / outcomes.len() as f64
            };
            let nmis: Vec<f64> = outcomes.iter().filter_map(|o| o.nmi).collect();
            MetricsRow {
                t,
                n_communities_pred: mean(&|o| o.n_pred as f64),
                n_communities_true: outcomes[0].n_true,
                nmi: (!nmis.is_empty()).then(|| nmis.iter().sum::<f64>() / nmis.len() as f64),
                modularity: mean(&|o| o.modularity),
            }
        })
        .collect()
}

/// Writes the metrics report plus a `mean±std` summary row over snapshots.
pub fn write_metrics<W: std::io::Write>(rows: &[MetricsRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "t",
        "n_communities_pred",
        "n_communities_true",
        "nmi",
        "modularity",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        wtr.write_record([
            r.t.to_string(),
            r.n_communities_pred.to_string(),
            opt(r.n_communities_true.map(|v| v.to_string())),
            opt(r.nmi.map(|v| v.to_string())),
            r.modularity.to_string(),
        ])?;
    }
    let summary = |vals: Vec<f64>| -> String {
        if vals.is_empty() {
            return String::new();
        }
        let (m, s) = mean_std(&vals);
        format!("{m}±{s}")
    };
    wtr.write_record([
        "mean±std".to_owned(),
        summary(rows.iter().map(|r| r.n_communities_pred).collect()),
        summary(
            rows.iter()
                .filter_map(|r| r.n_communities_true.map(|v| v as f64))
                .collect(),
        ),
        summary(rows.iter().filter_map(|r| r.nmi).collect()),
        summary(rows.iter().map(|r| r.modularity).collect()),
    ])?;
    wtr.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub fraction: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
}

/// Runs D-GTG once per seed fraction. Each repetition contributes its NMI
/// averaged over snapshots; the row reports mean and sample deviation of
/// those per-repetition values.
pub fn sweep_seed_fraction(base: &Experiment<'_>, fractions: &[f64]) -> Result<Vec<SweepRow>> {
    if base.truth.is_none() {
        return Err(DgtError::Config(
            "seed-fraction sweep requires ground truth (--truth)".into(),
        ));
    }
    if let Some(bad) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(DgtError::Config(format!(
            "seed fraction {bad} is outside [0, 1]"
        )));
    }
    fractions
        .iter()
        .map(|&fraction| {
            let exp = Experiment {
                variant: VariantKind::Dgtg {
                    seed_fraction: fraction,
                },
                ..base.clone()
            };
            let reps = exp.run()?;
            let values: Vec<f64> = reps.iter().filter_map(RepetitionResult::mean_nmi).collect();
            if values.is_empty() {
                return Err(DgtError::Config(
                    "ground truth labels none of the snapshot nodes".into(),
                ));
            }
            let (nmi_mean, nmi_std) = mean_std(&values);
            Ok(SweepRow {
                fraction,
                nmi_mean,
                nmi_std,
            })
        })
        .collect()
}

pub fn write_sweep<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["fraction", "nmi_mean", "nmi_std"])?;
    for r in rows {
        wtr.write_record([
            r.fraction.to_string(),
            r.nmi_mean.to_string(),
            r.nmi_std.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn seeds_differ_by_every_coordinate() {
        let base = derive_seed(1, 0, 0, 0);
        assert_ne!(base, derive_seed(2, 0, 0, 0));
        assert_ne!(base, derive_seed(1, 1, 0, 0));
        assert_ne!(base, derive_seed(1, 0, 1, 0));
        assert_ne!(base, derive_seed(1, 0, 0, 1));
        assert_eq!(base, derive_seed(1, 0, 0, 0));
    }

    #[test]
    fn pipeline_produces_rows_with_nmi() {
        let cfg = SynthConfig {
            snapshots: 3,
            ..SynthConfig::fixture(2)
        };
        let (seq, truth) = generate(&cfg).unwrap();
        let exp = Experiment {
            truth: Some(&truth),
            repetitions: 2,
            jobs: 2,
            ..Experiment::new(&seq, VariantKind::Dgt)
        };
        let reps = exp.run().unwrap();
        let rows = aggregate(&reps);
        assert_eq!(rows.len(), 3);
        assert!(rows
            .iter()
            .all(|r| r.nmi.is_some() && r.n_communities_true == Some(4)));
        let again = exp.run().unwrap();
        assert_eq!(aggregate(&again), rows);
    }

    #[test]
    fn dgtg_requires_truth() {
        let (seq, _) = generate(&SynthConfig {
            snapshots: 1,
            ..SynthConfig::fixture(1)
        })
        .unwrap();
        let exp = Experiment::new(&seq, VariantKind::Dgtg { seed_fraction: 0.1 });
        assert!(matches!(exp.run(), Err(DgtError::Config(_))));
        assert!(sweep_seed_fraction(&exp, &[0.1]).is_err());
    }

    #[test]
    fn sweep_validates_fractions() {
        let (seq, truth) = generate(&SynthConfig {
            snapshots: 1,
            ..SynthConfig::fixture(1)
        })
        .unwrap();
        let exp = Experiment {
            truth: Some(&truth),
            repetitions: 1,
            ..Experiment::new(&seq, VariantKind::Dgts)
        };
        assert!(sweep_seed_fraction(&exp, &[0.0, 1.2]).is_err());
        let rows = sweep_seed_fraction(&exp, &[0.0, 0.1, 0.2]).unwrap();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn metrics_csv_has_summary_row() {
        let rows = vec![
            MetricsRow {
                t: 0,
                n_communities_pred: 4.0,
                n_communities_true: Some(4),
                nmi: Some(1.0),
                modularity: 0.5,
            },
            MetricsRow {
                t: 1,
                n_communities_pred: 6.0,
                n_communities_true: Some(4),
                nmi: Some(0.8),
                modularity: 0.3,
            },
        ];
        let mut buf = Vec::new();
        write_metrics(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "t,n_communities_pred,n_communities_true,nmi,modularity"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("mean±std,5±1.414"));
    }
}
