//! File formats: event, edge-list, score and metric CSVs, the motif JSONL
//! catalog, and DOT / GraphML exports.
//!
//! | file        | header                                              |
//! |-------------|-----------------------------------------------------|
//! | events      | `retweeter,original_author[,timestamp]`             |
//! | edge list   | `source,target,weight` (`target` retweeted `source`) |
//! | scores      | `user_id,p_bot`                                     |
//! | metrics     | `user_id,agent_type,betweenness,eigenvector,total_degree` |
//!
//! Headers are required; a zero-byte file reads as empty. Row-level defects
//! are collected with their line numbers and tolerated up to a caller-chosen
//! budget.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentRegistry, AgentType};
use crate::centrality::MetricRecord;
use crate::error::{Error, Result, RowError};
use crate::graph::{AgentId, AnalysisGraph, RetweetGraph};
use crate::motif::StarMotif;
use crate::stats::TestResult;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetweetEventRecord {
    pub retweeter: AgentId,
    pub original_author: AgentId,
    /// Carried through untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// A loaded value together with the rows that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub row_errors: Vec<RowError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLoad {
    pub registry: AgentRegistry,
    pub row_errors: Vec<RowError>,
    /// Rows whose id had already been seen (the later row wins).
    pub duplicates: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

struct Table {
    path: PathBuf,
    reader: Option<csv::Reader<File>>,
    columns: Vec<Option<usize>>,
}

/// Open a CSV and locate `required` (and `optional`) columns by header name.
fn open_table(path: &Path, required: &[&str], optional: &[&str]) -> Result<Table> {
    let file = File::open(path).map_err(io_err(path))?;
    if file.metadata().map_err(io_err(path))?.len() == 0 {
        return Ok(Table {
            path: path.into(),
            reader: None,
            columns: Vec::new(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut columns = Vec::new();
    for name in required {
        match find(name) {
            Some(i) => columns.push(Some(i)),
            None => {
                return Err(Error::MissingColumn {
                    path: path.into(),
                    column: name.to_string(),
                })
            }
        }
    }
    columns.extend(optional.iter().map(|name| find(name)));
    Ok(Table {
        path: path.into(),
        reader: Some(reader),
        columns,
    })
}

impl Table {
    /// Visit each data row with its line number and selected fields.
    fn for_each_row<F>(&mut self, budget: usize, mut visit: F) -> Result<Vec<RowError>>
    where
        F: FnMut(&[Option<&str>]) -> std::result::Result<(), String>,
    {
        let mut errors = Vec::new();
        let Some(reader) = self.reader.as_mut() else {
            return Ok(errors);
        };
        let mut record = csv::StringRecord::new();
        loop {
            match reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {
                    let line = record.position().map_or(0, |p| p.line());
                    let fields: Vec<Option<&str>> = self
                        .columns
                        .iter()
                        .map(|c| c.and_then(|i| record.get(i)))
                        .collect();
                    if let Err(message) = visit(&fields) {
                        errors.push(RowError { line, message });
                    }
                }
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line());
                    if e.is_io_error() {
                        return Err(Error::Csv {
                            path: self.path.clone(),
                            source: e,
                        });
                    }
                    errors.push(RowError {
                        line,
                        message: e.to_string(),
                    });
                }
            }
        }
        if errors.len() > budget {
            return Err(Error::RowErrors {
                path: self.path.clone(),
                errors,
            });
        }
        Ok(errors)
    }
}

fn required_id(field: Option<&str>, column: &str) -> std::result::Result<AgentId, String> {
    match field {
        Some(s) if !s.is_empty() => Ok(AgentId::new(s).expect("checked non-empty")),
        Some(_) => Err(format!("empty `{column}`")),
        None => Err(format!("missing `{column}` field")),
    }
}

/// Read a retweet event file.
pub fn load_events(path: &Path, error_budget: usize) -> Result<Loaded<Vec<RetweetEventRecord>>> {
    let mut table = open_table(path, &["retweeter", "original_author"], &["timestamp"])?;
    let mut records = Vec::new();
    let row_errors = table.for_each_row(error_budget, |f| {
        let retweeter = required_id(f[0], "retweeter")?;
        let original_author = required_id(f[1], "original_author")?;
        let timestamp = f[2].filter(|s| !s.is_empty()).map(str::to_string);
        records.push(RetweetEventRecord {
            retweeter,
            original_author,
            timestamp,
        });
        Ok(())
    })?;
    Ok(Loaded {
        value: records,
        row_errors,
    })
}

/// Aggregate events into a graph. Returns the graph and the number of
/// self-retweets that were discarded.
pub fn events_to_graph(events: &[RetweetEventRecord]) -> Result<(RetweetGraph, usize)> {
    let mut graph = RetweetGraph::new();
    let mut self_loops = 0;
    for e in events {
        if !graph.add_retweet_event(e.original_author.as_str(), e.retweeter.as_str())? {
            self_loops += 1;
        }
    }
    Ok((graph, self_loops))
}

/// Read a pre-aggregated edge list straight into a graph.
///
/// Repeated `(source, target)` rows add up; self-loops are discarded.
pub fn load_edge_list(path: &Path, error_budget: usize) -> Result<Loaded<RetweetGraph>> {
    let mut table = open_table(path, &["source", "target", "weight"], &[])?;
    let mut graph = RetweetGraph::new();
    let row_errors = table.for_each_row(error_budget, |f| {
        let source = required_id(f[0], "source")?;
        let target = required_id(f[1], "target")?;
        let raw = f[2].ok_or("missing `weight` field")?;
        let weight: u64 = raw
            .parse()
            .map_err(|_| format!("weight `{raw}` is not a non-negative integer"))?;
        if weight == 0 {
            return Err("weight must be at least 1".into());
        }
        graph
            .add_weighted_edge(source.as_str(), target.as_str(), weight)
            .map_err(|e| e.to_string())?;
        Ok(())
    })?;
    Ok(Loaded {
        value: graph,
        row_errors,
    })
}

/// Read bot scores and classify them at `threshold`. An empty `p_bot` means unscored.
pub fn load_scores(path: &Path, threshold: f64, error_budget: usize) -> Result<ScoreLoad> {
    let mut table = open_table(path, &["user_id", "p_bot"], &[])?;
    let mut registry = AgentRegistry::new(threshold)?;
    let mut duplicates = 0;
    let row_errors = table.for_each_row(error_budget, |f| {
        let id = required_id(f[0], "user_id")?;
        let p_bot = match f[1] {
            None | Some("") => None,
            Some(raw) => {
                let p: f64 = raw
                    .parse()
                    .map_err(|_| format!("p_bot `{raw}` is not a number"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("p_bot {p} is outside [0, 1]"));
                }
                Some(p)
            }
        };
        if registry
            .insert(id, p_bot)
            .map_err(|e| e.to_string())?
            .is_some()
        {
            duplicates += 1;
        }
        Ok(())
    })?;
    Ok(ScoreLoad {
        registry,
        row_errors,
        duplicates,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// Write directed weighted edges as an edge-list CSV.
pub fn write_edge_list<'a, I>(path: &Path, edges: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a AgentId, &'a AgentId, u64)>,
{
    let mut w = csv_writer(path)?;
    w.write_record(["source", "target", "weight"])
        .map_err(csv_err(path))?;
    for (s, t, weight) in edges {
        w.write_record([s.as_str(), t.as_str(), &weight.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Write each directed edge as `weight` separate retweet events.
pub fn write_events<'a, I>(path: &Path, edges: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a AgentId, &'a AgentId, u64)>,
{
    let mut w = csv_writer(path)?;
    w.write_record(["retweeter", "original_author"])
        .map_err(csv_err(path))?;
    for (source, target, weight) in edges {
        for _ in 0..weight {
            w.write_record([target.as_str(), source.as_str()])
                .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn write_scores(path: &Path, registry: &AgentRegistry) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["user_id", "p_bot"])
        .map_err(csv_err(path))?;
    for p in registry.profiles() {
        let score = p.p_bot.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([p.id.as_str(), &score])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_metrics(path: &Path, records: &[MetricRecord]) -> Result<()> {
    write_rows(
        path,
        &[
            "user_id",
            "agent_type",
            "betweenness",
            "eigenvector",
            "total_degree",
        ],
        records,
    )
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_metrics(path: &Path) -> Result<Vec<MetricRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader
        .deserialize()
        .map(|row| row.map_err(csv_err(path)))
        .collect()
}

/// One JSON object per line.
pub fn write_motifs(path: &Path, motifs: &[StarMotif]) -> Result<()> {
    let mut w = create(path)?;
    for m in motifs {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_motifs(path: &Path) -> Result<Vec<StarMotif>> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Comparison table with the columns `metric,t_statistic,df,p_value,corrected_p,significant,bonferroni_m,alpha`.
pub fn write_test_results(path: &Path, results: &[TestResult]) -> Result<()> {
    write_rows(
        path,
        &[
            "metric",
            "t_statistic",
            "df",
            "p_value",
            "corrected_p",
            "significant",
            "bonferroni_m",
            "alpha",
        ],
        results,
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Graphviz rendering of one motif.
///
/// The ego is drawn as a double circle; every node label carries its agent
/// type. `penwidth` scales with combined edge weight (heaviest edge = 5).
/// Edge weights are looked up in `graph`; edges missing there get weight 1.
pub fn render_motif_dot(
    motif: &StarMotif,
    graph: &AnalysisGraph,
    registry: &AgentRegistry,
) -> String {
    let weight = |a: &AgentId, b: &AgentId| -> u64 {
        match (graph.index_of(a.as_str()), graph.index_of(b.as_str())) {
            (Some(u), Some(v)) => graph.weight(u, v).unwrap_or(1),
            _ => 1,
        }
    };
    let edges: Vec<(&AgentId, &AgentId, u64)> = motif
        .alters
        .iter()
        .map(|a| (&motif.ego, a, weight(&motif.ego, a)))
        .chain(motif.alter_edges.iter().map(|(a, b)| (a, b, weight(a, b))))
        .collect();
    let heaviest = edges.iter().map(|e| e.2).max().unwrap_or(1).max(1) as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "graph {} {{",
        dot_quote(&format!("{}_{}", motif.pattern, motif.ego))
    );
    let _ = writeln!(
        out,
        "  label={};",
        dot_quote(&format!("{} k={}", motif.pattern, motif.k))
    );
    let node = |out: &mut String, id: &AgentId, shape: &str| {
        let kind = registry.agent_type(id.as_str());
        let color = match kind {
            AgentType::Bot => "red",
            AgentType::Human => "blue",
        };
        let _ = writeln!(
            out,
            "  {} [shape={shape}, color={color}, label={}];",
            dot_quote(id.as_str()),
            dot_quote(&format!("{id}\\n{kind}"))
        );
    };
    node(&mut out, &motif.ego, "doublecircle");
    for a in &motif.alters {
        node(&mut out, a, "circle");
    }
    for (a, b, w) in edges {
        let _ = writeln!(
            out,
            "  {} -- {} [weight={w}, penwidth={:.3}];",
            dot_quote(a.as_str()),
            dot_quote(b.as_str()),
            5.0 * w as f64 / heaviest
        );
    }
    out.push_str("}\n");
    out
}

pub fn export_motif_dot(
    motif: &StarMotif,
    graph: &AnalysisGraph,
    registry: &AgentRegistry,
    path: &Path,
) -> Result<()> {
    write_text(path, &render_motif_dot(motif, graph, registry))
}

/// Graphviz rendering of a whole analysis graph.
pub fn render_graph_dot(graph: &AnalysisGraph, registry: &AgentRegistry) -> String {
    let mut out = String::from("graph retweets {\n");
    for id in graph.ids() {
        let _ = writeln!(
            out,
            "  {} [agent_type={}];",
            dot_quote(id.as_str()),
            registry.agent_type(id.as_str())
        );
    }
    for (u, v, w) in graph.edges() {
        let _ = writeln!(
            out,
            "  {} -- {} [weight={w}];",
            dot_quote(graph.id(u).as_str()),
            dot_quote(graph.id(v).as_str())
        );
    }
    out.push_str("}\n");
    out
}

/// GraphML rendering of a whole analysis graph, with `agent_type` and `weight` keys.
pub fn render_graphml(graph: &AnalysisGraph, registry: &AgentRegistry) -> String {
    let mut out = String::from(concat!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
        "  <key id=\"agent_type\" for=\"node\" attr.name=\"agent_type\" attr.type=\"string\"/>\n",
        "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n",
        "  <graph id=\"retweets\" edgedefault=\"undirected\">\n",
    ));
    for id in graph.ids() {
        let _ = writeln!(
            out,
            "    <node id=\"{}\"><data key=\"agent_type\">{}</data></node>",
            xml_escape(id.as_str()),
            registry.agent_type(id.as_str())
        );
    }
    for (u, v, w) in graph.edges() {
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{w}</data></edge>",
            xml_escape(graph.id(u).as_str()),
            xml_escape(graph.id(v).as_str())
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
