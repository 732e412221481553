//! Retweet graph construction and the undirected analysis graph.
//!
//! A [`RetweetGraph`] aggregates individual retweet events into weighted,
//! directed edges. The edge `(i, j)` means that `j` retweeted `i`, so
//! information flows from `i` to `j`, and its weight is the number of such
//! retweets. Pruning removes light edges; [`RetweetGraph::undirected_projection`]
//! folds both directions into an [`AnalysisGraph`], the simple undirected graph
//! every metric and motif routine runs on.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque platform user identifier. Never empty; compared byte-for-byte.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AgentId(Arc<str>);

impl AgentId {
    pub fn new(id: impl AsRef<str>) -> Result<Self> {
        let id = id.as_ref();
        if id.is_empty() {
            return Err(Error::Input("agent identifier must be non-empty".into()));
        }
        Ok(AgentId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AgentId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        AgentId::new(value)
    }
}

impl From<AgentId> for String {
    fn from(id: AgentId) -> String {
        id.0.to_string()
    }
}

impl Borrow<str> for AgentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for AgentId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Directed, weighted retweet graph.
///
/// Edges are keyed `(source, target)` where `target` retweeted `source`.
/// Storage is ordered, so two graphs built from the same multiset of events
/// compare equal regardless of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetGraph {
    nodes: BTreeSet<AgentId>,
    edges: BTreeMap<(AgentId, AgentId), u64>,
}

impl RetweetGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record that `retweeter` retweeted a post by `original_author`.
    ///
    /// Self-retweets are discarded; the return value says whether the event
    /// changed the graph.
    pub fn add_retweet_event(&mut self, original_author: &str, retweeter: &str) -> Result<bool> {
        self.add_weighted_edge(original_author, retweeter, 1)
    }

    /// Add `weight` retweets of `source` by `target` in one step.
    ///
    /// Equivalent to `weight` calls of [`add_retweet_event`](Self::add_retweet_event).
    pub fn add_weighted_edge(&mut self, source: &str, target: &str, weight: u64) -> Result<bool> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::Input("agent identifier must be non-empty".into()));
        }
        if weight == 0 {
            return Err(Error::Input(format!(
                "edge {source} -> {target} has zero weight"
            )));
        }
        if source == target {
            return Ok(false);
        }
        let s = self.intern(source);
        let t = self.intern(target);
        *self.edges.entry((s, t)).or_insert(0) += weight;
        Ok(true)
    }

    /// Insert a node without edges. Used when isolated agents must be kept.
    pub fn add_node(&mut self, id: &str) -> Result<()> {
        if id.is_empty() {
            return Err(Error::Input("agent identifier must be non-empty".into()));
        }
        self.intern(id);
        Ok(())
    }

    fn intern(&mut self, id: &str) -> AgentId {
        if let Some(existing) = self.nodes.get(id) {
            return existing.clone();
        }
        let id = AgentId(Arc::from(id));
        self.nodes.insert(id.clone());
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &AgentId> {
        self.nodes.iter()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    /// Edges as `(source, target, weight)` in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&AgentId, &AgentId, u64)> {
        self.edges.iter().map(|((s, t), w)| (s, t, *w))
    }

    pub fn weight(&self, source: &str, target: &str) -> Option<u64> {
        // BTreeMap cannot be queried by a borrowed tuple, so go through the owned key.
        let s = self.nodes.get(source)?.clone();
        let t = self.nodes.get(target)?.clone();
        self.edges.get(&(s, t)).copied()
    }

    /// Keep only edges with weight `>= min_weight` and drop nodes left without edges.
    pub fn prune_by_weight(&self, min_weight: u64) -> RetweetGraph {
        let mut out = RetweetGraph::new();
        for ((s, t), &w) in &self.edges {
            if w >= min_weight {
                out.nodes.insert(s.clone());
                out.nodes.insert(t.clone());
                out.edges.insert((s.clone(), t.clone()), w);
            }
        }
        out
    }

    /// Like [`prune_by_weight`](Self::prune_by_weight) but the node set is kept intact.
    pub fn prune_by_weight_retaining_nodes(&self, min_weight: u64) -> RetweetGraph {
        let mut out = self.prune_by_weight(min_weight);
        out.nodes.extend(self.nodes.iter().cloned());
        out
    }

    /// Forget edge direction. The combined weight of `{i, j}` is `w(i, j) + w(j, i)`.
    pub fn undirected_projection(&self) -> AnalysisGraph {
        let ids: Vec<AgentId> = self.nodes.iter().cloned().collect();
        let index: HashMap<AgentId, usize> = ids
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect();
        let pairs: Vec<(usize, usize, u64)> = self
            .edges
            .iter()
            .map(|((s, t), &w)| (index[s], index[t], w))
            .collect();
        AnalysisGraph::assemble(ids, index, pairs)
    }
}

/// Undirected simple graph with combined edge weights, stored in CSR form.
///
/// Node indices follow the sorted order of [`AgentId`]s, so index order and
/// identifier order coincide. Neighbor lists are sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalysisGraph {
    ids: Vec<AgentId>,
    index: HashMap<AgentId, usize>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<u64>,
}

impl AnalysisGraph {
    /// Build from explicit nodes and undirected weighted edges.
    ///
    /// Edge endpoints missing from `nodes` are added. Repeated pairs (in either
    /// orientation) have their weights summed.
    pub fn from_edges<N, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = AgentId>,
        E: IntoIterator<Item = (AgentId, AgentId, u64)>,
    {
        let mut node_set: BTreeSet<AgentId> = nodes.into_iter().collect();
        let edges: Vec<(AgentId, AgentId, u64)> = edges.into_iter().collect();
        for (a, b, w) in &edges {
            if a == b {
                return Err(Error::Input(format!("self-loop on {a}")));
            }
            if *w == 0 {
                return Err(Error::Input(format!("edge {a} -- {b} has zero weight")));
            }
            node_set.insert(a.clone());
            node_set.insert(b.clone());
        }
        let ids: Vec<AgentId> = node_set.into_iter().collect();
        let index: HashMap<AgentId, usize> = ids
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect();
        let pairs: Vec<(usize, usize, u64)> = edges
            .iter()
            .map(|(a, b, w)| (index[a], index[b], *w))
            .collect();
        Ok(Self::assemble(ids, index, pairs))
    }

    /// `pairs` may repeat and may carry either orientation; no self-loops.
    fn assemble(
        ids: Vec<AgentId>,
        index: HashMap<AgentId, usize>,
        pairs: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Self {
        let mut folded: Vec<(usize, usize, u64)> = pairs
            .into_iter()
            .map(|(a, b, w)| if a < b { (a, b, w) } else { (b, a, w) })
            .collect();
        folded.sort_unstable();
        let mut merged: Vec<(usize, usize, u64)> = Vec::with_capacity(folded.len());
        for (a, b, w) in folded {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += w,
                _ => merged.push((a, b, w)),
            }
        }

        let n = ids.len();
        let mut degree = vec![0usize; n];
        for &(a, b, _) in &merged {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        let mut weights = vec![0u64; offsets[n]];
        // Pairs sorted by (a, b) with a < b fill every row in ascending order:
        // row v first receives all (x, v) with x < v, then all (v, y) with y > v.
        for &(a, b, w) in &merged {
            neighbors[cursor[a]] = b;
            weights[cursor[a]] = w;
            cursor[a] += 1;
            neighbors[cursor[b]] = a;
            weights[cursor[b]] = w;
            cursor[b] += 1;
        }
        debug_assert!((0..n).all(|v| neighbors[offsets[v]..offsets[v + 1]].is_sorted()));

        AnalysisGraph {
            ids,
            index,
            offsets,
            neighbors,
            weights,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// All node identifiers in index order (sorted).
    pub fn ids(&self) -> &[AgentId] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &AgentId {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Combined weights aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_weights(&self, v: usize) -> &[u64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        let row = self.neighbors(u);
        row.binary_search(&v)
            .ok()
            .map(|k| self.weights[self.offsets[u] + k])
    }

    /// Undirected edges `(u, v, weight)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .filter(move |(v, _)| **v > u)
                .map(move |(v, w)| (u, *v, *w))
        })
    }

    /// Drop edges with combined weight below `min_weight`. Isolated nodes are
    /// removed unless `keep_isolated` is set.
    pub fn prune_by_weight(&self, min_weight: u64, keep_isolated: bool) -> AnalysisGraph {
        let kept: Vec<(usize, usize, u64)> =
            self.edges().filter(|&(_, _, w)| w >= min_weight).collect();
        let mut alive = vec![keep_isolated; self.node_count()];
        for &(u, v, _) in &kept {
            alive[u] = true;
            alive[v] = true;
        }
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut ids = Vec::new();
        for (v, id) in self.ids.iter().enumerate() {
            if alive[v] {
                remap[v] = ids.len();
                ids.push(id.clone());
            }
        }
        let index = ids
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect();
        let pairs = kept.into_iter().map(|(u, v, w)| (remap[u], remap[v], w));
        Self::assemble(ids, index, pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    #[test]
    fn single_event_creates_edge() {
        let mut g = RetweetGraph::new();
        assert!(g.add_retweet_event("A", "B").unwrap());
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.weight("A", "B"), Some(1));
        assert_eq!(g.weight("B", "A"), None);
    }

    #[test]
    fn repeated_event_increments() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 2).unwrap();
        g.add_retweet_event("A", "B").unwrap();
        assert_eq!(g.weight("A", "B"), Some(3));
    }

    #[test]
    fn self_retweet_is_discarded() {
        let mut g = RetweetGraph::new();
        assert!(!g.add_retweet_event("A", "A").unwrap());
        assert_eq!(g, RetweetGraph::new());
    }

    #[test]
    fn empty_identifier_rejected() {
        let mut g = RetweetGraph::new();
        assert!(matches!(g.add_retweet_event("", "B"), Err(Error::Input(_))));
        assert!(matches!(g.add_retweet_event("A", ""), Err(Error::Input(_))));
        assert!(AgentId::new("").is_err());
    }

    #[test]
    fn prune_keeps_weight_three_and_above() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 3).unwrap();
        g.add_weighted_edge("C", "D", 2).unwrap();
        let p = g.prune_by_weight(3);
        assert_eq!(p.edge_count(), 1);
        assert_eq!(p.weight("A", "B"), Some(3));
        let nodes: Vec<&str> = p.nodes().map(AgentId::as_str).collect();
        assert_eq!(nodes, ["A", "B"]);

        let kept = g.prune_by_weight_retaining_nodes(3);
        assert_eq!(kept.node_count(), 4);
        assert_eq!(kept.edge_count(), 1);
    }

    #[test]
    fn prune_min_weight_one_is_identity_on_edges() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 1).unwrap();
        g.add_weighted_edge("B", "C", 7).unwrap();
        assert_eq!(g.prune_by_weight(1), g);
    }

    #[test]
    fn prune_triangle_at_four() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 5).unwrap();
        g.add_weighted_edge("B", "C", 4).unwrap();
        g.add_weighted_edge("C", "A", 3).unwrap();
        let p = g.prune_by_weight(4);
        let edges: Vec<(&str, &str, u64)> = p
            .edges()
            .map(|(s, t, w)| (s.as_str(), t.as_str(), w))
            .collect();
        assert_eq!(edges, [("A", "B", 5), ("B", "C", 4)]);
    }

    #[test]
    fn projection_sums_directions() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 2).unwrap();
        g.add_weighted_edge("B", "A", 3).unwrap();
        let u = g.undirected_projection();
        assert_eq!(u.edge_count(), 1);
        let (a, b) = (u.index_of("A").unwrap(), u.index_of("B").unwrap());
        assert_eq!(u.weight(a, b), Some(5));
        assert_eq!(u.weight(b, a), Some(5));
    }

    #[test]
    fn projection_single_direction_and_empty() {
        let mut g = RetweetGraph::new();
        g.add_weighted_edge("A", "B", 4).unwrap();
        let u = g.undirected_projection();
        assert_eq!(u.edges().collect::<Vec<_>>(), [(0, 1, 4)]);
        let e = RetweetGraph::new().undirected_projection();
        assert!(e.is_empty());
        assert_eq!(e.edge_count(), 0);
    }

    #[test]
    fn from_edges_rejects_self_loop_and_merges_duplicates() {
        assert!(AnalysisGraph::from_edges([], [(id("A"), id("A"), 1)]).is_err());
        let g =
            AnalysisGraph::from_edges([id("Z")], [(id("A"), id("B"), 1), (id("B"), id("A"), 2)])
                .unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(3));
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn analysis_prune_after_projection() {
        let g =
            AnalysisGraph::from_edges([], [(id("A"), id("B"), 1), (id("B"), id("C"), 5)]).unwrap();
        let p = g.prune_by_weight(3, false);
        assert_eq!(p.ids(), &[id("B"), id("C")]);
        assert_eq!(p.edges().collect::<Vec<_>>(), [(0, 1, 5)]);
        let k = g.prune_by_weight(3, true);
        assert_eq!(k.node_count(), 3);
        assert_eq!(k.edge_count(), 1);
    }
}
