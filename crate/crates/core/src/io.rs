//! Text formats: edge lists, node lists, ground truth, partitions and reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::community::CommunityId;
use crate::error::{DgtError, Result};
use crate::game::SnapshotResult;
use crate::graph::{ChangeStats, EdgeRecord, NodeId, SequenceBuilder, SnapshotSequence};
use crate::init::{truth_from_rows, GroundTruth};
use crate::metrics::Partition;

/// Where an edge's snapshot ordinal comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SnapshotMode {
    /// Third column is the snapshot ordinal.
    #[default]
    Column,
    /// Last column is a timestamp, bucketed into windows of this many seconds.
    Window(f64),
}

impl FromStr for SnapshotMode {
    type Err = DgtError;

    /// Accepts `column` or `window:<seconds>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "column" {
            return Ok(SnapshotMode::Column);
        }
        let width = s
            .strip_prefix("window:")
            .and_then(|w| w.parse::<f64>().ok())
            .filter(|w| *w > 0.0 && w.is_finite())
            .ok_or_else(|| {
                DgtError::Config(format!(
                    "bad snapshot mode `{s}`, expected `column` or `window:<seconds>`"
                ))
            })?;
        Ok(SnapshotMode::Window(width))
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map(|s| {
                    let t = s.trim();
                    !t.is_empty() && !t.starts_with('#')
                })
                .unwrap_or(true)
        })
}

/// Parses whitespace-separated `source target snapshot` records.
pub fn parse_edge_list<R: BufRead>(reader: R, mode: SnapshotMode) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::new();
    for (lineno, line) in data_lines(reader) {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let snapshot = match mode {
            SnapshotMode::Column => {
                if fields.len() != 3 {
                    return Err(DgtError::format(
                        lineno,
                        format!(
                            "expected `source target snapshot`, got {} fields",
                            fields.len()
                        ),
                    ));
                }
                fields[2].parse::<i64>().map_err(|_| {
                    DgtError::format(
                        lineno,
                        format!("snapshot `{}` is not an integer", fields[2]),
                    )
                })?
            }
            SnapshotMode::Window(width) => {
                if !(3..=4).contains(&fields.len()) {
                    return Err(DgtError::format(
                        lineno,
                        "expected `source target [snapshot] timestamp`",
                    ));
                }
                let raw = fields[fields.len() - 1];
                let ts: f64 = raw.parse().map_err(|_| {
                    DgtError::format(lineno, format!("timestamp `{raw}` is not a number"))
                })?;
                (ts / width).floor() as i64
            }
        };
        if snapshot < 0 {
            return Err(DgtError::format(
                lineno,
                format!("negative snapshot {snapshot}"),
            ));
        }
        records.push(EdgeRecord::new(fields[0], fields[1], snapshot));
    }
    Ok(records)
}

/// Parses a node list: `label` (present in every snapshot) or `label snapshot`.
pub fn parse_node_list<R: BufRead>(reader: R) -> Result<Vec<(String, Option<i64>)>> {
    let mut out = Vec::new();
    for (lineno, line) in data_lines(reader) {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let snap = match fields.len() {
            1 => None,
            2 => Some(fields[1].parse::<i64>().map_err(|_| {
                DgtError::format(
                    lineno,
                    format!("snapshot `{}` is not an integer", fields[1]),
                )
            })?),
            _ => return Err(DgtError::format(lineno, "expected `label [snapshot]`")),
        };
        out.push((fields[0].to_owned(), snap));
    }
    Ok(out)
}

/// Options for [`load_sequence`].
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub mode: SnapshotMode,
    pub undirected: bool,
    pub node_list: Option<std::path::PathBuf>,
}

pub fn load_sequence(path: &Path, opts: &LoadOptions) -> Result<SnapshotSequence> {
    let records = parse_edge_list(BufReader::new(File::open(path)?), opts.mode)?;
    let mut builder = SequenceBuilder::new().undirected(opts.undirected);
    for r in &records {
        builder.add_edge(&r.source, &r.target, r.snapshot)?;
    }
    if let Some(nodes) = &opts.node_list {
        for (label, snap) in parse_node_list(BufReader::new(File::open(nodes)?))? {
            builder.declare_node(&label, snap);
        }
    }
    builder.build()
}

/// Writes the sequence as an edge list using the original snapshot values.
pub fn write_edge_list<W: Write>(seq: &SnapshotSequence, mut w: W) -> Result<()> {
    writeln!(w, "# source target snapshot")?;
    for (t, g) in seq.snapshots().iter().enumerate() {
        let raw = seq.raw_ordinal(t);
        for (u, v) in g.edges() {
            writeln!(w, "{} {} {raw}", seq.label(u), seq.label(v))?;
        }
    }
    Ok(())
}

/// Reads `snapshot,node_label,community_label` rows (with header).
pub fn read_truth<R: std::io::Read>(seq: &SnapshotSequence, reader: R) -> Result<GroundTruth> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(DgtError::format(
                i + 2,
                "expected snapshot,node_label,community_label",
            ));
        }
        let snap = rec[0].parse::<i64>().map_err(|_| {
            DgtError::format(i + 2, format!("snapshot `{}` is not an integer", &rec[0]))
        })?;
        rows.push((snap, rec[1].to_owned(), rec[2].to_owned()));
    }
    truth_from_rows(seq, rows)
}

pub fn write_truth<W: Write>(seq: &SnapshotSequence, truth: &GroundTruth, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["snapshot", "node_label", "community_label"])?;
    for t in 0..truth.len() {
        let raw = seq.raw_ordinal(t).to_string();
        for (&v, &c) in truth.snapshot(t) {
            wtr.write_record([raw.as_str(), seq.label(v), truth.community_name(c)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `node_label,community_id` rows in node-id order.
pub fn write_partition<W: Write>(
    seq: &SnapshotSequence,
    partition: &BTreeMap<NodeId, CommunityId>,
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["node_label", "community_id"])?;
    for (&v, &k) in partition {
        wtr.write_record([seq.label(v), &k.0.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_partition<R: std::io::Read>(seq: &SnapshotSequence, reader: R) -> Result<Partition> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut labels = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v = seq
            .node_id(&rec[0])
            .ok_or_else(|| DgtError::format(i + 2, format!("unknown node `{}`", &rec[0])))?;
        let c = rec[1]
            .parse::<u64>()
            .map_err(|_| DgtError::format(i + 2, format!("bad community id `{}`", &rec[1])))?;
        if labels.insert(v, c).is_some() {
            return Err(DgtError::format(
                i + 2,
                format!("node `{}` listed twice", &rec[0]),
            ));
        }
    }
    Ok(Partition::new(labels))
}

/// One row per consecutive snapshot pair; `t` is the later snapshot.
pub fn write_churn<W: Write>(churn: &[ChangeStats], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "e_plus", "e_minus", "n_changed"])?;
    for (i, c) in churn.iter().enumerate() {
        wtr.write_record([
            (i + 1).to_string(),
            c.edges_added.to_string(),
            c.edges_deleted.to_string(),
            c.nodes_changed.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-pass convergence telemetry. `potential` uses unit locality factors.
pub fn write_telemetry<W: Write>(result: &SnapshotResult, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["pass", "changed_agents", "total_utility", "potential"])?;
    for p in &result.passes {
        wtr.write_record([
            p.pass.to_string(),
            p.changed_agents.to_string(),
            p.total_utility().to_string(),
            p.potential(1.0, 1.0).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
