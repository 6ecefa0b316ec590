//! Instance, graph and result file formats.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use relaxsim_core::incremental::{ExecutionReport, Label};
use relaxsim_core::sched::SchedulerTrace;
use relaxsim_core::sssp::{VertexId, Weight, WeightedDigraph};
use relaxsim_core::txsim::TxEvent;
use relaxsim_core::workloads::Point;
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    /// `p sp n m` header and 1-indexed `a u v w` arcs.
    DimacsGr,
    /// 0-indexed `u<TAB>v<TAB>w` lines.
    Tsv,
}

impl GraphFormat {
    /// Guesses from the extension; `.gr` is DIMACS, anything else TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("gr") => Self::DimacsGr,
            _ => Self::Tsv,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

/// Non-empty lines with their 1-based line numbers.
fn numbered_lines(path: &Path, reader: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((idx + 1, line));
        }
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    tok: Option<&str>,
    what: &str,
) -> Result<T> {
    let tok = tok.ok_or_else(|| HarnessError::parse(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| HarnessError::parse(path, line, format!("invalid {what} `{tok}`")))
}

pub fn load_graph(path: &Path, format: GraphFormat, source: VertexId) -> Result<WeightedDigraph> {
    let reader = open(path)?;
    match format {
        GraphFormat::DimacsGr => parse_dimacs(path, reader, source),
        GraphFormat::Tsv => parse_tsv_graph(path, reader, None, source),
    }
}

/// `path` is only used in error messages.
pub fn parse_dimacs(path: &Path, reader: impl BufRead, source: VertexId) -> Result<WeightedDigraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (line, text) in numbered_lines(path, reader)? {
        last_line = line;
        let mut toks = text.split_ascii_whitespace();
        match toks.next() {
            Some("c") => {}
            Some("p") => {
                if header.is_some() {
                    return Err(HarnessError::parse(path, line, "duplicate problem line"));
                }
                let kind = toks.next();
                if kind != Some("sp") {
                    return Err(HarnessError::parse(path, line, "expected `p sp <n> <m>`"));
                }
                let n: usize = field(path, line, toks.next(), "vertex count")?;
                let m: usize = field(path, line, toks.next(), "arc count")?;
                if toks.next().is_some() {
                    return Err(HarnessError::parse(path, line, "trailing tokens"));
                }
                header = Some((n, m, line));
                edges.reserve(m);
            }
            Some("a") => {
                let Some((n, m, _)) = header else {
                    return Err(HarnessError::parse(path, line, "arc before problem line"));
                };
                let u: u64 = field(path, line, toks.next(), "tail")?;
                let v: u64 = field(path, line, toks.next(), "head")?;
                let w: i64 = field(path, line, toks.next(), "weight")?;
                if toks.next().is_some() {
                    return Err(HarnessError::parse(path, line, "trailing tokens"));
                }
                for x in [u, v] {
                    if x == 0 || x > n as u64 {
                        return Err(HarnessError::parse(
                            path,
                            line,
                            format!("vertex {x} out of range 1..={n}"),
                        ));
                    }
                }
                if w <= 0 {
                    return Err(HarnessError::parse(path, line, format!("nonpositive weight {w}")));
                }
                if edges.len() == m {
                    return Err(HarnessError::parse(path, line, format!("more than {m} arcs")));
                }
                edges.push(((u - 1) as VertexId, (v - 1) as VertexId, w as Weight));
            }
            Some(other) => {
                return Err(HarnessError::parse(path, line, format!("unknown line type `{other}`")));
            }
            None => {}
        }
    }
    let Some((n, m, header_line)) = header else {
        return Err(HarnessError::parse(path, last_line, "missing problem line"));
    };
    if edges.len() != m {
        return Err(HarnessError::parse(
            path,
            header_line,
            format!("header declares {m} arcs but {} were read", edges.len()),
        ));
    }
    WeightedDigraph::from_edges(n, &edges, source).map_err(|e| HarnessError::parse(path, header_line, e.to_string()))
}

/// Vertex count is `n` if given, else one past the largest id.
pub fn parse_tsv_graph(
    path: &Path,
    reader: impl BufRead,
    n: Option<usize>,
    source: VertexId,
) -> Result<WeightedDigraph> {
    let mut edges = Vec::new();
    let mut max_id = 0u64;
    for (line, text) in numbered_lines(path, reader)? {
        if text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_ascii_whitespace();
        let u: u64 = field(path, line, toks.next(), "source vertex")?;
        let v: u64 = field(path, line, toks.next(), "target vertex")?;
        let w: i64 = field(path, line, toks.next(), "weight")?;
        if toks.next().is_some() {
            return Err(HarnessError::parse(path, line, "trailing tokens"));
        }
        if w <= 0 {
            return Err(HarnessError::parse(path, line, format!("nonpositive weight {w}")));
        }
        if let Some(n) = n {
            if u >= n as u64 || v >= n as u64 {
                return Err(HarnessError::parse(path, line, format!("vertex out of range 0..{n}")));
            }
        }
        if u.max(v) >= u64::from(VertexId::MAX) {
            return Err(HarnessError::parse(path, line, "vertex id too large"));
        }
        max_id = max_id.max(u).max(v);
        edges.push((u as VertexId, v as VertexId, w as Weight));
    }
    let n = n.unwrap_or(if edges.is_empty() { 1 } else { max_id as usize + 1 });
    WeightedDigraph::from_edges(n, &edges, source).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}

pub fn write_graph(path: &Path, graph: &WeightedDigraph, format: GraphFormat) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    match format {
        GraphFormat::DimacsGr => {
            writeln!(w, "c generated by relaxsim").map_err(io)?;
            writeln!(w, "p sp {} {}", graph.n(), graph.edge_count()).map_err(io)?;
            for (u, v, wt) in graph.edges() {
                writeln!(w, "a {} {} {}", u + 1, v + 1, wt).map_err(io)?;
            }
        }
        GraphFormat::Tsv => {
            for (u, v, wt) in graph.edges() {
                writeln!(w, "{u}\t{v}\t{wt}").map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn parse_points(path: &Path, reader: impl BufRead) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (line, text) in numbered_lines(path, reader)? {
        let mut toks = text.split_ascii_whitespace();
        let x = field(path, line, toks.next(), "x coordinate")?;
        let y = field(path, line, toks.next(), "y coordinate")?;
        if toks.next().is_some() {
            return Err(HarnessError::parse(path, line, "trailing tokens"));
        }
        out.push(Point::new(x, y));
    }
    Ok(out)
}

pub fn load_points(path: &Path) -> Result<Vec<Point>> {
    parse_points(path, open(path)?)
}

pub fn write_points(path: &Path, points: &[Point]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    for p in points {
        writeln!(w, "{}\t{}", p.x, p.y).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One integer per non-empty line.
pub fn parse_integers(path: &Path, reader: impl BufRead, what: &str) -> Result<Vec<i64>> {
    numbered_lines(path, reader)?
        .into_iter()
        .map(|(line, text)| field(path, line, Some(text.trim()), what))
        .collect()
}

pub fn load_keys(path: &Path) -> Result<Vec<i64>> {
    parse_integers(path, open(path)?, "key")
}

/// Line `l` holds the 0-based index of the item given label `l`.
pub fn load_permutation(path: &Path, len: usize) -> Result<Vec<usize>> {
    let values = parse_integers(path, open(path)?, "index")?;
    validate_permutation(path, &values, len)
}

pub fn validate_permutation(path: &Path, values: &[i64], len: usize) -> Result<Vec<usize>> {
    if values.len() != len {
        return Err(HarnessError::Input(format!(
            "{}: permutation has {} entries for {len} items",
            path.display(),
            values.len()
        )));
    }
    let mut seen = vec![false; len];
    let mut out = Vec::with_capacity(len);
    for (idx, &v) in values.iter().enumerate() {
        if v < 0 || v as usize >= len || seen[v as usize] {
            return Err(HarnessError::parse(path, idx + 1, format!("`{v}` is not a fresh index below {len}")));
        }
        seen[v as usize] = true;
        out.push(v as usize);
    }
    Ok(out)
}

/// Reorders `items` so that label `l` gets `items[perm[l - 1]]`.
pub fn apply_permutation<T: Copy>(items: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&i| items[i]).collect()
}

/// `i<TAB>j` dependency pairs.
pub fn parse_dag(path: &Path, reader: impl BufRead) -> Result<Vec<(Label, Label)>> {
    let mut out = Vec::new();
    for (line, text) in numbered_lines(path, reader)? {
        let mut toks = text.split_ascii_whitespace();
        let i: Label = field(path, line, toks.next(), "label")?;
        let j: Label = field(path, line, toks.next(), "label")?;
        if toks.next().is_some() {
            return Err(HarnessError::parse(path, line, "trailing tokens"));
        }
        if i == 0 || i >= j {
            return Err(HarnessError::parse(path, line, format!("edge ({i}, {j}) needs 1 <= i < j")));
        }
        out.push((i, j));
    }
    Ok(out)
}

pub fn load_dag(path: &Path) -> Result<Vec<(Label, Label)>> {
    parse_dag(path, open(path)?)
}

#[derive(Serialize)]
struct TraceFooter<'a> {
    max_rank_observed: u32,
    inversion_histogram: &'a [u64],
}

pub fn write_trace(out: impl Write, trace: &SchedulerTrace) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for rec in &trace.per_step {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(
        &mut out,
        &TraceFooter {
            max_rank_observed: trace.max_rank_observed,
            inversion_histogram: &trace.inversion_histogram,
        },
    )?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn write_trace_file(path: &Path, trace: &SchedulerTrace) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_trace(file, trace).map_err(|e| HarnessError::io(path, e))
}

pub fn write_events_file(path: &Path, events: &[TxEvent]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    for ev in events {
        serde_json::to_writer(&mut w, ev).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_charged_pairs(path: &Path, report: &ExecutionReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e.into()))?;
    for p in &report.charged_pairs {
        w.serialize(p).map_err(|e| HarnessError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| HarnessError::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e.into()))?;
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
