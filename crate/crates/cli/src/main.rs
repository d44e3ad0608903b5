use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dgt_core::experiment::{aggregate, sweep_seed_fraction, write_metrics, write_sweep};
use dgt_core::io::{
    load_sequence, read_truth, write_churn, write_edge_list, write_partition, write_telemetry,
    write_truth, LoadOptions, SnapshotMode,
};
use dgt_core::synth::generate;
use dgt_core::{
    DgtError, EvalOptions, Experiment, GainKind, GameConfig, GroundTruth, SnapshotSequence,
    SynthConfig, VariantKind,
};

#[derive(Parser, Debug)]
#[command(
    name = "dgt",
    version,
    about = "Game-theoretic dynamic community detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect communities in every snapshot and write partitions and metrics.
    Run(RunArgs),
    /// Run D-GTG once per seed fraction and report NMI.
    Sweep(SweepArgs),
    /// Report edge and node churn between consecutive snapshots.
    Churn(ChurnArgs),
    /// Generate a planted-partition snapshot sequence with ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Edge list: `source target snapshot` per line.
    #[arg(long)]
    input: PathBuf,
    /// Optional node list (`label [snapshot]`) to add isolated nodes.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// `column`, or `window:<seconds>` to bucket a timestamp column.
    #[arg(long, default_value = "column")]
    snapshot_by: String,
    /// Treat every edge as undirected.
    #[arg(long)]
    undirected: bool,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<SnapshotSequence> {
        let mode: SnapshotMode = self.snapshot_by.parse()?;
        let opts = LoadOptions {
            mode,
            undirected: self.undirected,
            node_list: self.nodes.clone(),
        };
        load_sequence(&self.input, &opts)
            .with_context(|| format!("reading {}", self.input.display()))
    }
}

#[derive(Args, Debug)]
struct GameArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "similarity")]
    gain: GainKind,
    /// Ground truth CSV: `snapshot,node_label,community_label`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long, default_value_t = 8)]
    max_passes: usize,
    /// Stop once fewer than this fraction of agents change in a pass.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions run in parallel up to this many threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Count nodes without a truth label as one extra community.
    #[arg(long)]
    unlabeled_as_community: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value = "dgt")]
    variant: String,
    /// Share of agents seeded from ground truth (dgtg only).
    #[arg(long)]
    seed_fraction: Option<f64>,
    /// Also write per-pass telemetry for every snapshot and repetition.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Comma-separated seed fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2])]
    fractions: Vec<f64>,
}

#[derive(Args, Debug)]
struct ChurnArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    communities: usize,
    #[arg(long, default_value_t = 25)]
    community_size: usize,
    #[arg(long, default_value_t = 0.3)]
    p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    p_out: f64,
    #[arg(long, default_value_t = 0.1)]
    churn: f64,
    #[arg(long, default_value_t = 5)]
    snapshots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `edges.txt` and `truth.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn prepare_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn load_truth(path: Option<&Path>, seq: &SnapshotSequence) -> anyhow::Result<Option<GroundTruth>> {
    let Some(path) = path else { return Ok(None) };
    let f = File::open(path).with_context(|| format!("reading --truth {}", path.display()))?;
    Ok(Some(read_truth(seq, f).with_context(|| {
        format!("parsing --truth {}", path.display())
    })?))
}

fn game_config(args: &GameArgs) -> GameConfig {
    GameConfig {
        gain: args.gain,
        max_passes: args.max_passes,
        change_fraction_threshold: args.threshold,
        ..GameConfig::default()
    }
}

fn experiment<'a>(
    args: &GameArgs,
    seq: &'a SnapshotSequence,
    truth: Option<&'a GroundTruth>,
    variant: VariantKind,
) -> Experiment<'a> {
    Experiment {
        truth,
        game: game_config(args),
        seed: args.seed,
        repetitions: args.repetitions,
        jobs: args.jobs,
        eval: EvalOptions {
            undirected: args.input.undirected,
            unlabeled_as_community: args.unlabeled_as_community,
        },
        ..Experiment::new(seq, variant)
    }
}

fn parse_variant(name: &str, seed_fraction: Option<f64>) -> anyhow::Result<VariantKind> {
    let variant = match (name.parse::<VariantKind>()?, seed_fraction) {
        (VariantKind::Dgtg { .. }, Some(f)) => VariantKind::Dgtg { seed_fraction: f },
        (VariantKind::Dgtg { .. }, None) => bail!("--variant dgtg requires --seed-fraction"),
        (_, Some(_)) => bail!("--seed-fraction only applies to --variant dgtg"),
        (v, None) => v,
    };
    variant.validate()?;
    Ok(variant)
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    if args.variant == "dgtg" && args.game.truth.is_none() {
        bail!("--variant dgtg requires ground truth; pass it with --truth");
    }
    let variant = parse_variant(&args.variant, args.seed_fraction)?;
    if args.game.repetitions < 1 {
        bail!("--repetitions must be at least 1");
    }
    let seq = args.game.input.load()?;
    let truth = load_truth(args.game.truth.as_deref(), &seq)?;
    let exp = experiment(&args.game, &seq, truth.as_ref(), variant);
    let reps = exp.run()?;

    let out = &args.game.out;
    prepare_out(out)?;
    for rep in &reps {
        for s in &rep.snapshots {
            let name = format!("communities_t{}_rep{}.csv", s.t, rep.repetition);
            write_partition(&seq, &s.result.partition, create(out, &name)?)?;
            if args.diagnostics {
                let name = format!("telemetry_t{}_rep{}.csv", s.t, rep.repetition);
                write_telemetry(&s.result, create(out, &name)?)?;
            }
        }
    }
    write_metrics(&aggregate(&reps), create(out, "metrics.csv")?)?;
    if seq.len() >= 2 {
        write_churn(&seq.churn(), create(out, "churn.csv")?)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let Some(truth_path) = args.game.truth.as_deref() else {
        bail!("sweep requires ground truth; pass it with --truth");
    };
    if let Some(bad) = args.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        bail!("--fractions value {bad} is outside [0, 1]");
    }
    let seq = args.game.input.load()?;
    let truth = load_truth(Some(truth_path), &seq)?;
    let exp = experiment(
        &args.game,
        &seq,
        truth.as_ref(),
        VariantKind::Dgtg { seed_fraction: 0.0 },
    );
    let rows = sweep_seed_fraction(&exp, &args.fractions)?;
    prepare_out(&args.game.out)?;
    write_sweep(&rows, create(&args.game.out, "sweep.csv")?)?;
    Ok(())
}

fn churn(args: ChurnArgs) -> anyhow::Result<()> {
    let seq = args.input.load()?;
    if seq.len() < 2 {
        bail!("churn needs at least 2 snapshots, input has {}", seq.len());
    }
    prepare_out(&args.out)?;
    write_churn(&seq.churn(), create(&args.out, "churn.csv")?)?;
    Ok(())
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        communities: args.communities,
        community_size: args.community_size,
        p_in: args.p_in,
        p_out: args.p_out,
        churn: args.churn,
        snapshots: args.snapshots,
        rng_seed: args.seed,
    };
    let (seq, truth) = generate(&cfg)?;
    prepare_out(&args.out)?;
    let mut edges = create(&args.out, "edges.txt")?;
    write_edge_list(&seq, &mut edges)?;
    edges.flush()?;
    write_truth(&seq, &truth, create(&args.out, "truth.csv")?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Churn(a) => churn(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<DgtError>() {
                Some(DgtError::Audit(_) | DgtError::Internal(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
