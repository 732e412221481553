//! Betweenness, eigenvector and total degree centrality on an [`AnalysisGraph`].
//!
//! Every function returns one score per node, aligned with
//! [`AnalysisGraph::ids`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentRegistry, AgentType};
use crate::error::{Error, Result};
use crate::graph::{AgentId, AnalysisGraph};

pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 1000;

const SOURCES_PER_CHUNK: usize = 32;
const CHUNKS_PER_WAVE: usize = 8;

/// Unweighted Brandes betweenness.
///
/// Undirected pair counts are halved. With `normalized`, scores are divided by
/// `(n-1)(n-2)/2`; graphs with fewer than three nodes score zero everywhere.
pub fn betweenness_centrality(graph: &AnalysisGraph, normalized: bool) -> Vec<f64> {
    let raw = accumulate_sources(graph.node_count(), |s, ws, acc| {
        ws.bfs(graph, s);
        ws.back_propagate(s, acc);
    });
    finish_betweenness(raw, normalized)
}

/// Betweenness over shortest paths where an edge of combined weight `w` costs `1/w`.
pub fn weighted_betweenness_centrality(graph: &AnalysisGraph, normalized: bool) -> Vec<f64> {
    let raw = accumulate_sources(graph.node_count(), |s, ws, acc| {
        ws.dijkstra(graph, s);
        ws.back_propagate(s, acc);
    });
    finish_betweenness(raw, normalized)
}

fn finish_betweenness(mut scores: Vec<f64>, normalized: bool) -> Vec<f64> {
    let n = scores.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let scale = if normalized {
        2.0 / ((n - 1) * (n - 2)) as f64
    } else {
        1.0
    };
    for b in &mut scores {
        *b *= 0.5 * scale;
    }
    scores
}

/// Run `single_source` for every source and sum the per-source dependencies.
///
/// Sources are grouped into fixed-size chunks; chunk partial sums are added in
/// chunk order, so the floating-point result does not depend on the number of
/// worker threads.
fn accumulate_sources<F>(n: usize, single_source: F) -> Vec<f64>
where
    F: Fn(usize, &mut Workspace, &mut [f64]) + Sync,
{
    let mut total = vec![0.0; n];
    let chunks: Vec<(usize, usize)> = (0..n)
        .step_by(SOURCES_PER_CHUNK)
        .map(|lo| (lo, (lo + SOURCES_PER_CHUNK).min(n)))
        .collect();
    for wave in chunks.chunks(CHUNKS_PER_WAVE) {
        let partials: Vec<Vec<f64>> = wave
            .par_iter()
            .map(|&(lo, hi)| {
                let mut ws = Workspace::new(n);
                let mut acc = vec![0.0; n];
                for s in lo..hi {
                    single_source(s, &mut ws, &mut acc);
                }
                acc
            })
            .collect();
        for part in partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
    }
    total
}

struct Workspace {
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    sigma: Vec<f64>,
    hops: Vec<i64>,
    dist: Vec<f64>,
    delta: Vec<f64>,
    queue: VecDeque<usize>,
}

#[derive(PartialEq)]
struct Pending {
    dist: f64,
    pred: usize,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index for a fixed pop order
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.pred.cmp(&self.pred))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            order: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            sigma: vec![0.0; n],
            hops: vec![-1; n],
            dist: vec![f64::INFINITY; n],
            delta: vec![0.0; n],
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.preds[v].clear();
            self.sigma[v] = 0.0;
            self.hops[v] = -1;
            self.dist[v] = f64::INFINITY;
            self.delta[v] = 0.0;
        }
        self.order.clear();
    }

    fn bfs(&mut self, graph: &AnalysisGraph, s: usize) {
        self.reset();
        self.sigma[s] = 1.0;
        self.hops[s] = 0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let next = self.hops[v] + 1;
            for &w in graph.neighbors(v) {
                if self.hops[w] < 0 {
                    self.hops[w] = next;
                    self.queue.push_back(w);
                }
                if self.hops[w] == next {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
    }

    fn dijkstra(&mut self, graph: &AnalysisGraph, s: usize) {
        self.reset();
        // `hops` doubles as the settled marker. Every node pushed onto the heap
        // is settled before the loop ends, so reset() sees all touched state.
        let mut heap = BinaryHeap::new();
        self.sigma[s] = 1.0;
        self.dist[s] = 0.0;
        heap.push(Pending {
            dist: 0.0,
            pred: s,
            node: s,
        });
        while let Some(Pending {
            dist,
            pred,
            node: v,
        }) = heap.pop()
        {
            if self.hops[v] >= 0 {
                continue;
            }
            if v != s {
                self.sigma[v] += self.sigma[pred];
            }
            self.hops[v] = 0;
            self.order.push(v);
            for (&w, &weight) in graph.neighbors(v).iter().zip(graph.neighbor_weights(v)) {
                if self.hops[w] >= 0 {
                    continue;
                }
                let through = dist + 1.0 / weight as f64;
                let known = self.dist[w];
                if known.is_infinite() || (through < known && !same_length(through, known)) {
                    self.dist[w] = through;
                    self.sigma[w] = 0.0;
                    self.preds[w].clear();
                    self.preds[w].push(v);
                    heap.push(Pending {
                        dist: through,
                        pred: v,
                        node: w,
                    });
                } else if same_length(through, known) {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
    }

    fn back_propagate(&mut self, s: usize, acc: &mut [f64]) {
        for i in (0..self.order.len()).rev() {
            let w = self.order[i];
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for k in 0..self.preds[w].len() {
                let v = self.preds[w][k];
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Outcome of [`eigenvector_centrality`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorResult {
    /// Unit L2 norm over the component that was solved; zero elsewhere.
    pub scores: Vec<f64>,
    /// Rayleigh quotient `xᵀAx` of the returned vector.
    pub eigenvalue: f64,
    pub iterations: usize,
    /// Nodes outside the solved component (scored zero).
    pub outside_component: usize,
    /// More than one component shares the largest size; the one holding the
    /// smallest identifier was solved.
    pub tied_components: bool,
}

/// Principal eigenvector of the unweighted adjacency matrix.
pub fn eigenvector_centrality(
    graph: &AnalysisGraph,
    tol: f64,
    max_iter: usize,
) -> Result<EigenvectorResult> {
    power_iteration(graph, tol, max_iter, false)
}

/// Principal eigenvector of the combined-weight adjacency matrix.
pub fn weighted_eigenvector_centrality(
    graph: &AnalysisGraph,
    tol: f64,
    max_iter: usize,
) -> Result<EigenvectorResult> {
    power_iteration(graph, tol, max_iter, true)
}

/// Node sets of the connected components, each sorted, in order of their smallest node.
pub fn connected_components(graph: &AnalysisGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut members = vec![root];
        let mut head = 0;
        while head < members.len() {
            let v = members[head];
            head += 1;
            for &w in graph.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn power_iteration(
    graph: &AnalysisGraph,
    tol: f64,
    max_iter: usize,
    weighted: bool,
) -> Result<EigenvectorResult> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Input(
            "eigenvector centrality of an empty graph".into(),
        ));
    }
    if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
        return Err(Error::Config(format!(
            "eigenvector tolerance must be positive and max_iter at least 1 (got {tol}, {max_iter})"
        )));
    }

    let components = connected_components(graph);
    let largest = components.iter().map(Vec::len).max().unwrap_or(0);
    let tied_components = components.iter().filter(|c| c.len() == largest).count() > 1;
    let members = components.into_iter().find(|c| c.len() == largest).unwrap();
    let outside_component = n - members.len();

    let mut scores = vec![0.0; n];
    if members.len() == 1 {
        // no edges anywhere: the adjacency matrix is zero
        return Ok(EigenvectorResult {
            scores,
            eigenvalue: 0.0,
            iterations: 0,
            outside_component: n,
            tied_components,
        });
    }

    let mut local = vec![usize::MAX; n];
    for (i, &v) in members.iter().enumerate() {
        local[v] = i;
    }
    let rows: Vec<Vec<(usize, f64)>> = members
        .iter()
        .map(|&v| {
            graph
                .neighbors(v)
                .iter()
                .zip(graph.neighbor_weights(v))
                .map(|(&w, &wt)| (local[w], if weighted { wt as f64 } else { 1.0 }))
                .collect()
        })
        .collect();
    let multiply = |x: &[f64], out: &mut [f64]| {
        for (o, row) in out.iter_mut().zip(&rows) {
            *o = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    };

    let m = members.len();
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut ax = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut residual = f64::INFINITY;
    // Iterate with A + I: same eigenvectors, but the shift keeps bipartite
    // components (stars among them) from oscillating between two vectors.
    for iteration in 1..=max_iter {
        multiply(&x, &mut ax);
        for i in 0..m {
            next[i] = x[i] + ax[i];
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let step = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if step < tol {
            multiply(&x, &mut ax);
            let lambda: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            residual = x
                .iter()
                .zip(&ax)
                .map(|(xi, axi)| (axi - lambda * xi).abs())
                .fold(0.0, f64::max);
            if residual < tol {
                for (i, &v) in members.iter().enumerate() {
                    scores[v] = x[i].max(0.0);
                }
                return Ok(EigenvectorResult {
                    scores,
                    eigenvalue: lambda,
                    iterations: iteration,
                    outside_component,
                    tied_components,
                });
            }
        }
    }
    for (i, &v) in members.iter().enumerate() {
        scores[v] = x[i];
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
        last_iterate: scores,
    })
}

/// Node degree; with `normalized`, divided by `n - 1` (zero when `n <= 1`).
pub fn total_degree_centrality(graph: &AnalysisGraph, normalized: bool) -> Vec<f64> {
    let n = graph.node_count();
    (0..n)
        .map(|v| {
            let d = graph.degree(v) as f64;
            match (normalized, n) {
                (false, _) => d,
                (true, 0 | 1) => 0.0,
                (true, _) => d / (n - 1) as f64,
            }
        })
        .collect()
}

/// One row of the per-node metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    #[serde(rename = "user_id")]
    pub id: AgentId,
    pub agent_type: AgentType,
    pub betweenness: f64,
    pub eigenvector: f64,
    pub total_degree: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub normalized: bool,
    pub weighted: bool,
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            normalized: true,
            weighted: false,
            eigen_tolerance: DEFAULT_EIGEN_TOLERANCE,
            eigen_max_iter: DEFAULT_EIGEN_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub records: Vec<MetricRecord>,
    pub warnings: Vec<String>,
}

/// Compute all three metrics for every node and attach agent types.
///
/// `normalized` applies to betweenness and degree. Eigenvector scores are
/// always the unit-norm principal eigenvector.
pub fn compute_metrics(
    graph: &AnalysisGraph,
    registry: &AgentRegistry,
    options: &MetricOptions,
) -> Result<MetricTable> {
    let mut warnings = Vec::new();
    if graph.is_empty() {
        return Ok(MetricTable {
            records: Vec::new(),
            warnings,
        });
    }
    let (betweenness, eigen) = rayon::join(
        || {
            if options.weighted {
                weighted_betweenness_centrality(graph, options.normalized)
            } else {
                betweenness_centrality(graph, options.normalized)
            }
        },
        || {
            if options.weighted {
                weighted_eigenvector_centrality(
                    graph,
                    options.eigen_tolerance,
                    options.eigen_max_iter,
                )
            } else {
                eigenvector_centrality(graph, options.eigen_tolerance, options.eigen_max_iter)
            }
        },
    );
    let eigen = eigen?;
    if eigen.outside_component > 0 {
        warnings.push(format!(
            "graph is disconnected: eigenvector centrality solved on the largest component, {} node(s) outside it scored 0",
            eigen.outside_component
        ));
    }
    if eigen.tied_components {
        warnings.push(
            "several components share the largest size (degenerate dominant eigenvalue); solved the one holding the smallest identifier"
                .to_string(),
        );
    }
    let degree = total_degree_centrality(graph, options.normalized);
    let records = graph
        .ids()
        .iter()
        .enumerate()
        .map(|(v, id)| MetricRecord {
            id: id.clone(),
            agent_type: registry.agent_type(id.as_str()),
            betweenness: betweenness[v],
            eigenvector: eigen.scores[v],
            total_degree: degree[v],
        })
        .collect();
    Ok(MetricTable { records, warnings })
}
