//! Star motif enumeration and the six ego/alter pattern codes.
//!
//! A star is an ego together with its one-hop neighbors (the alters). The
//! ego is joined to each of its `k` alters; alters may be linked to each
//! other, but no alter may have more than two links to other alters, which
//! also caps its degree inside the star at three.
//!
//! Pattern codes read `S` + ego digit + alter digit: the ego digit is `0` for
//! a bot and `1` for a human, and the alter digit is `0` when every alter is a
//! bot, `1` when every alter is human and `2` when the alters are mixed.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentRegistry, AgentType};
use crate::error::{Error, Result};
use crate::graph::{AgentId, AnalysisGraph};

/// Most links an alter may have to other alters.
pub const MAX_ALTER_LINKS: usize = 2;
/// Most edges an alter may have inside the star (one to the ego plus alter links).
pub const MAX_ALTER_DEGREE: usize = MAX_ALTER_LINKS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlterComposition {
    AllBots,
    AllHumans,
    Mixed,
}

impl AlterComposition {
    pub fn code(self) -> u8 {
        match self {
            AlterComposition::AllBots => 0,
            AlterComposition::AllHumans => 1,
            AlterComposition::Mixed => 2,
        }
    }

    /// `None` for an empty alter set.
    pub fn of<I: IntoIterator<Item = AgentType>>(alters: I) -> Option<Self> {
        let (mut bots, mut humans) = (false, false);
        for t in alters {
            match t {
                AgentType::Bot => bots = true,
                AgentType::Human => humans = true,
            }
        }
        match (bots, humans) {
            (true, false) => Some(AlterComposition::AllBots),
            (false, true) => Some(AlterComposition::AllHumans),
            (true, true) => Some(AlterComposition::Mixed),
            (false, false) => None,
        }
    }
}

/// One of the six star pattern codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PatternCode {
    pub ego: AgentType,
    pub alters: AlterComposition,
}

impl PatternCode {
    pub const ALL: [PatternCode; 6] = [
        PatternCode::new(AgentType::Bot, AlterComposition::AllBots),
        PatternCode::new(AgentType::Bot, AlterComposition::AllHumans),
        PatternCode::new(AgentType::Bot, AlterComposition::Mixed),
        PatternCode::new(AgentType::Human, AlterComposition::AllBots),
        PatternCode::new(AgentType::Human, AlterComposition::AllHumans),
        PatternCode::new(AgentType::Human, AlterComposition::Mixed),
    ];

    pub const fn new(ego: AgentType, alters: AlterComposition) -> Self {
        PatternCode { ego, alters }
    }
}

impl fmt::Display for PatternCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}{}", self.ego.code(), self.alters.code())
    }
}

impl FromStr for PatternCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ego = match s.get(..2) {
            Some("S0") => AgentType::Bot,
            Some("S1") => AgentType::Human,
            _ => return Err(Error::Input(format!("invalid pattern code `{s}`"))),
        };
        let alters = match s.get(2..) {
            Some("0") => AlterComposition::AllBots,
            Some("1") => AlterComposition::AllHumans,
            Some("2") => AlterComposition::Mixed,
            _ => return Err(Error::Input(format!("invalid pattern code `{s}`"))),
        };
        Ok(PatternCode { ego, alters })
    }
}

impl From<PatternCode> for String {
    fn from(c: PatternCode) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for PatternCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Reject a star outright if any alter breaks the alter-link bound.
    Strict,
    /// Drop offending alters until the rest comply.
    #[default]
    PruneViolators,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifConfig {
    pub mode: ConstraintMode,
    /// Smallest number of alters a star must keep.
    pub k_min: usize,
    /// Also require every alter's degree in the whole graph to be at most 3.
    pub bound_alter_global_degree: bool,
}

impl Default for MotifConfig {
    fn default() -> Self {
        MotifConfig {
            mode: ConstraintMode::PruneViolators,
            k_min: 3,
            bound_alter_global_degree: false,
        }
    }
}

impl MotifConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 {
            return Err(Error::Config(format!(
                "k_min must be at least 2, got {}",
                self.k_min
            )));
        }
        Ok(())
    }
}

/// An ego with a set of alters and the links among those alters.
///
/// Alters are sorted; each alter edge is stored with its smaller id first and
/// the edge list is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoNetwork {
    pub ego: AgentId,
    pub alters: Vec<AgentId>,
    pub alter_edges: Vec<(AgentId, AgentId)>,
}

impl EgoNetwork {
    pub fn k(&self) -> usize {
        self.alters.len()
    }
}

/// A classified star motif.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarMotif {
    pub ego: AgentId,
    pub alters: Vec<AgentId>,
    pub alter_edges: Vec<(AgentId, AgentId)>,
    pub pattern: PatternCode,
    pub k: usize,
}

impl StarMotif {
    pub fn classify(star: EgoNetwork, registry: &AgentRegistry) -> StarMotif {
        let pattern = classify_pattern(&star, registry);
        StarMotif {
            k: star.alters.len(),
            ego: star.ego,
            alters: star.alters,
            alter_edges: star.alter_edges,
            pattern,
        }
    }
}

/// The ego's one-hop neighborhood and the edges induced among the neighbors.
pub fn extract_ego_candidate(graph: &AnalysisGraph, ego: &str) -> Result<EgoNetwork> {
    let v = graph
        .index_of(ego)
        .ok_or_else(|| Error::UnknownAgent(ego.to_string()))?;
    let alters = graph.neighbors(v);
    let edges = induced_edges(graph, alters);
    Ok(EgoNetwork {
        ego: graph.id(v).clone(),
        alters: alters.iter().map(|&a| graph.id(a).clone()).collect(),
        alter_edges: edges
            .into_iter()
            .map(|(i, j)| (graph.id(alters[i]).clone(), graph.id(alters[j]).clone()))
            .collect(),
    })
}

/// Edges among `members` (sorted node indices) as sorted pairs of positions in `members`.
fn induced_edges(graph: &AnalysisGraph, members: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (i, &a) in members.iter().enumerate() {
        // merge-walk two sorted lists, only looking at members after `a`
        let rest = &members[i + 1..];
        let nbrs = graph.neighbors(a);
        let (mut p, mut q) = (0, nbrs.partition_point(|&x| x <= a));
        while p < rest.len() && q < nbrs.len() {
            match rest[p].cmp(&nbrs[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    edges.push((i, i + 1 + p));
                    p += 1;
                    q += 1;
                }
            }
        }
    }
    edges
}

/// Decide which of `k` alters (positions in id order) survive.
///
/// `edges` are alter links as position pairs. Returns `None` when no star results.
fn surviving_alters(
    k: usize,
    edges: &[(usize, usize)],
    mode: ConstraintMode,
    k_min: usize,
) -> Option<Vec<bool>> {
    if k < k_min {
        return None;
    }
    let mut links = vec![0usize; k];
    for &(a, b) in edges {
        links[a] += 1;
        links[b] += 1;
    }
    let mut alive = vec![true; k];
    match mode {
        ConstraintMode::Strict => {
            if links.iter().any(|&d| d > MAX_ALTER_LINKS) {
                return None;
            }
        }
        ConstraintMode::PruneViolators => {
            if links.iter().all(|&d| d <= MAX_ALTER_LINKS) {
                return Some(alive);
            }
            let mut adjacency = vec![Vec::new(); k];
            for &(a, b) in edges {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
            // highest link count first, then smallest id; stale entries are skipped
            let mut heap: BinaryHeap<(usize, Reverse<usize>)> = links
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > MAX_ALTER_LINKS)
                .map(|(i, &d)| (d, Reverse(i)))
                .collect();
            let mut remaining = k;
            while let Some((d, Reverse(i))) = heap.pop() {
                if !alive[i] || links[i] != d {
                    continue;
                }
                alive[i] = false;
                remaining -= 1;
                for &j in &adjacency[i] {
                    if alive[j] {
                        links[j] -= 1;
                        if links[j] > MAX_ALTER_LINKS {
                            heap.push((links[j], Reverse(j)));
                        }
                    }
                }
                if remaining < k_min {
                    return None;
                }
            }
        }
    }
    Some(alive)
}

/// Apply the star constraints to a candidate.
///
/// In [`ConstraintMode::Strict`] the candidate is returned unchanged if every
/// alter has at most two alter links and `k >= k_min`. In
/// [`ConstraintMode::PruneViolators`] the alter with the most alter links
/// (smallest id on ties) is removed until all comply, and the rest is
/// returned if at least `k_min` alters remain.
pub fn enforce_constraints(
    candidate: &EgoNetwork,
    mode: ConstraintMode,
    k_min: usize,
) -> Option<EgoNetwork> {
    let mut alters = candidate.alters.clone();
    alters.sort();
    alters.dedup();
    let position = |id: &AgentId| alters.binary_search(id).ok();
    let edges: Vec<(usize, usize)> = candidate
        .alter_edges
        .iter()
        .filter_map(|(a, b)| {
            let (i, j) = (position(a)?, position(b)?);
            (i != j).then(|| (i.min(j), i.max(j)))
        })
        .collect();
    let alive = surviving_alters(alters.len(), &edges, mode, k_min)?;
    let mut alter_edges: Vec<(AgentId, AgentId)> = edges
        .iter()
        .filter(|&&(i, j)| alive[i] && alive[j])
        .map(|&(i, j)| (alters[i].clone(), alters[j].clone()))
        .collect();
    alter_edges.sort();
    alter_edges.dedup();
    Some(EgoNetwork {
        ego: candidate.ego.clone(),
        alters: alters
            .into_iter()
            .zip(&alive)
            .filter_map(|(id, &keep)| keep.then_some(id))
            .collect(),
        alter_edges,
    })
}

/// Pattern code of a star. Agents missing from the registry count as human.
///
/// A star without alters is labelled as if its alters were all human.
pub fn classify_pattern(star: &EgoNetwork, registry: &AgentRegistry) -> PatternCode {
    let ego = registry.agent_type(star.ego.as_str());
    let alters = AlterComposition::of(star.alters.iter().map(|a| registry.agent_type(a.as_str())))
        .unwrap_or(AlterComposition::AllHumans);
    PatternCode::new(ego, alters)
}

fn star_at(graph: &AnalysisGraph, ego: usize, config: &MotifConfig) -> Option<EgoNetwork> {
    let all = graph.neighbors(ego);
    if all.len() < config.k_min {
        return None;
    }
    let filtered: Vec<usize>;
    let alters = if config.bound_alter_global_degree {
        filtered = all
            .iter()
            .copied()
            .filter(|&a| graph.degree(a) <= MAX_ALTER_DEGREE)
            .collect();
        if config.mode == ConstraintMode::Strict && filtered.len() != all.len() {
            return None;
        }
        &filtered[..]
    } else {
        all
    };
    let edges = induced_edges(graph, alters);
    let alive = surviving_alters(alters.len(), &edges, config.mode, config.k_min)?;
    Some(EgoNetwork {
        ego: graph.id(ego).clone(),
        alters: alters
            .iter()
            .zip(&alive)
            .filter(|&(_, &keep)| keep)
            .map(|(&a, _)| graph.id(a).clone())
            .collect(),
        alter_edges: edges
            .into_iter()
            .filter(|&(i, j)| alive[i] && alive[j])
            .map(|(i, j)| (graph.id(alters[i]).clone(), graph.id(alters[j]).clone()))
            .collect(),
    })
}

/// Evaluate every node as an ego and return the classified stars.
///
/// Each node yields at most one (maximal) star. Output is sorted by
/// descending `k`, then ego id. Stars may overlap.
pub fn enumerate_stars(
    graph: &AnalysisGraph,
    registry: &AgentRegistry,
    config: &MotifConfig,
) -> Vec<StarMotif> {
    let mut motifs: Vec<StarMotif> = (0..graph.node_count())
        .into_par_iter()
        .filter_map(|v| star_at(graph, v, config))
        .map(|star| StarMotif::classify(star, registry))
        .collect();
    motifs.sort_by(|a, b| b.k.cmp(&a.k).then_with(|| a.ego.cmp(&b.ego)));
    motifs
}

/// Zero-filled motif counts per pattern code, in code order.
pub fn pattern_histogram(motifs: &[StarMotif]) -> Vec<(PatternCode, usize)> {
    PatternCode::ALL
        .iter()
        .map(|&code| (code, motifs.iter().filter(|m| m.pattern == code).count()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn graph(edges: &[(&str, &str)]) -> AnalysisGraph {
        AnalysisGraph::from_edges([], edges.iter().map(|(a, b)| (id(a), id(b), 1))).unwrap()
    }

    fn net(ego: &str, alters: &[&str], edges: &[(&str, &str)]) -> EgoNetwork {
        EgoNetwork {
            ego: id(ego),
            alters: alters.iter().map(|a| id(a)).collect(),
            alter_edges: edges.iter().map(|(a, b)| (id(a), id(b))).collect(),
        }
    }

    fn registry(bots: &[&str]) -> AgentRegistry {
        let mut r = AgentRegistry::default();
        for b in bots {
            r.insert(id(b), Some(0.9)).unwrap();
        }
        r
    }

    #[test]
    fn pattern_codes_render_and_parse() {
        let rendered: Vec<String> = PatternCode::ALL.iter().map(|c| c.to_string()).collect();
        assert_eq!(rendered, ["S00", "S01", "S02", "S10", "S11", "S12"]);
        for c in PatternCode::ALL {
            assert_eq!(c.to_string().parse::<PatternCode>().unwrap(), c);
        }
        for bad in ["S03", "S2", "X00", "S000", ""] {
            assert!(bad.parse::<PatternCode>().is_err(), "{bad}");
        }
    }

    #[test]
    fn candidate_extraction() {
        let g = graph(&[("E", "A"), ("E", "B"), ("E", "C"), ("A", "B")]);
        assert_eq!(
            extract_ego_candidate(&g, "E").unwrap(),
            net("E", &["A", "B", "C"], &[("A", "B")])
        );
        let t = graph(&[("A", "B"), ("B", "C"), ("C", "A")]);
        assert_eq!(
            extract_ego_candidate(&t, "A").unwrap(),
            net("A", &["B", "C"], &[("B", "C")])
        );
        let lone = AnalysisGraph::from_edges([id("Z")], []).unwrap();
        assert!(extract_ego_candidate(&lone, "Z").unwrap().alters.is_empty());
        assert!(matches!(
            extract_ego_candidate(&lone, "Q"),
            Err(Error::UnknownAgent(_))
        ));
    }

    #[test]
    fn pure_star_passes_strict() {
        let c = net("E", &["A", "B", "C", "D"], &[]);
        assert_eq!(
            enforce_constraints(&c, ConstraintMode::Strict, 3)
                .unwrap()
                .k(),
            4
        );
    }

    #[test]
    fn alter_triangle_is_within_bounds() {
        let c = net(
            "E",
            &["A", "B", "C", "D"],
            &[("A", "B"), ("B", "C"), ("C", "A")],
        );
        let s = enforce_constraints(&c, ConstraintMode::Strict, 3).unwrap();
        assert_eq!(s.k(), 4);
        assert_eq!(s.alter_edges.len(), 3);
    }

    #[test]
    fn overlinked_alter_is_rejected_or_pruned() {
        let c = net(
            "E",
            &["A", "B", "C", "D", "F"],
            &[("A", "B"), ("A", "C"), ("A", "D")],
        );
        assert!(enforce_constraints(&c, ConstraintMode::Strict, 3).is_none());
        let s = enforce_constraints(&c, ConstraintMode::PruneViolators, 3).unwrap();
        assert_eq!(s, net("E", &["B", "C", "D", "F"], &[]));
    }

    #[test]
    fn pruning_breaks_ties_by_smallest_id() {
        // K4 among alters: everyone has 3 links. Removing A leaves a triangle.
        let c = net(
            "E",
            &["D", "C", "B", "A"],
            &[
                ("A", "B"),
                ("A", "C"),
                ("A", "D"),
                ("B", "C"),
                ("B", "D"),
                ("C", "D"),
            ],
        );
        let s = enforce_constraints(&c, ConstraintMode::PruneViolators, 3).unwrap();
        assert_eq!(s.alters, [id("B"), id("C"), id("D")]);
        assert!(enforce_constraints(&c, ConstraintMode::PruneViolators, 4).is_none());
    }

    #[test]
    fn too_few_alters() {
        let c = net("E", &["A", "B"], &[]);
        assert!(enforce_constraints(&c, ConstraintMode::Strict, 3).is_none());
        assert!(enforce_constraints(&c, ConstraintMode::PruneViolators, 2).is_some());
    }

    #[test]
    fn classification_examples() {
        let r = registry(&["E", "X", "Y", "Z"]);
        let s = net("E", &["X", "Y", "Z"], &[]);
        assert_eq!(classify_pattern(&s, &r).to_string(), "S00");
        let s = net("H", &["X", "P", "Q"], &[]);
        assert_eq!(classify_pattern(&s, &r).to_string(), "S12");
        let s = net("E", &["P", "Q", "R"], &[]);
        assert_eq!(classify_pattern(&s, &r).to_string(), "S01");
    }

    #[test]
    fn enumerate_small_cases() {
        let r = AgentRegistry::default();
        let cfg = MotifConfig::default();
        assert!(enumerate_stars(&AnalysisGraph::default(), &r, &cfg).is_empty());
        let path = graph(&[("A", "B"), ("B", "C"), ("C", "D")]);
        assert!(enumerate_stars(&path, &r, &cfg).is_empty());

        let two = graph(&[
            ("E", "a1"),
            ("E", "a2"),
            ("E", "a3"),
            ("E", "a4"),
            ("E", "a5"),
            ("F", "b1"),
            ("F", "b2"),
            ("F", "b3"),
            ("F", "b4"),
        ]);
        let strict = MotifConfig {
            mode: ConstraintMode::Strict,
            ..cfg
        };
        let found = enumerate_stars(&two, &r, &strict);
        assert_eq!(found.len(), 2);
        assert_eq!((found[0].ego.as_str(), found[0].k), ("E", 5));
        assert_eq!((found[1].ego.as_str(), found[1].k), ("F", 4));
        assert!(found.iter().all(|m| m.pattern.to_string() == "S11"));
    }

    #[test]
    fn global_degree_bound() {
        // alter A has a second hub, so its global degree is 4
        let g = graph(&[
            ("E", "A"),
            ("E", "B"),
            ("E", "C"),
            ("E", "D"),
            ("A", "x"),
            ("A", "y"),
            ("A", "z"),
        ]);
        let r = AgentRegistry::default();
        let loose = MotifConfig {
            mode: ConstraintMode::Strict,
            ..Default::default()
        };
        let bound = MotifConfig {
            bound_alter_global_degree: true,
            ..loose
        };
        let e_star = |cfg: &MotifConfig| {
            enumerate_stars(&g, &r, cfg)
                .into_iter()
                .find(|m| m.ego.as_str() == "E")
        };
        assert_eq!(e_star(&loose).unwrap().k, 4);
        assert!(e_star(&bound).is_none());
        let pruned = MotifConfig {
            mode: ConstraintMode::PruneViolators,
            ..bound
        };
        assert_eq!(e_star(&pruned).unwrap().alters, [id("B"), id("C"), id("D")]);
    }

    #[test]
    fn motif_json_shape() {
        let m = StarMotif {
            ego: id("E"),
            alters: vec![id("A"), id("B"), id("C")],
            alter_edges: vec![(id("A"), id("B"))],
            pattern: "S02".parse().unwrap(),
            k: 3,
        };
        let line = serde_json::to_string(&m).unwrap();
        assert_eq!(
            line,
            r#"{"ego":"E","alters":["A","B","C"],"alter_edges":[["A","B"]],"pattern":"S02","k":3}"#
        );
        assert_eq!(serde_json::from_str::<StarMotif>(&line).unwrap(), m);
    }

    #[test]
    fn histogram_is_zero_filled() {
        let h = pattern_histogram(&[]);
        assert_eq!(h.len(), 6);
        assert!(h.iter().all(|(_, n)| *n == 0));
    }
}
