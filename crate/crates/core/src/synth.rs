//! Synthetic graphs with planted star motifs.
//!
//! Planted stars are node-disjoint from each other and from the background
//! graph, so the planted set is exact ground truth. All randomness comes from
//! a ChaCha8 stream seeded with [`SynthConfig::seed`] via
//! `SeedableRng::seed_from_u64`.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentRegistry, AgentType, DEFAULT_BOT_THRESHOLD};
use crate::error::{Error, Result};
use crate::graph::{AgentId, AnalysisGraph};
use crate::motif::{AlterComposition, PatternCode, StarMotif, MAX_ALTER_LINKS};

/// `count` stars of the given pattern, each with `k` alters and
/// `alter_edge_count` alter-alter links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub pattern: PatternCode,
    pub k: usize,
    #[serde(default)]
    pub alter_edge_count: usize,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

/// Parses `CODE:K[:ALTER_EDGES[:COUNT]]`, e.g. `S02:5:1:3`.
impl FromStr for PlantSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("plant `{s}` is not CODE:K[:ALTER_EDGES[:COUNT]]"));
        let mut parts = s.split(':');
        let pattern: PatternCode = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let mut number = |default: Option<usize>| -> Result<usize> {
            match (parts.next(), default) {
                (Some(p), _) => p.trim().parse().map_err(|_| bad()),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(bad()),
            }
        };
        let k = number(None)?;
        let alter_edge_count = number(Some(0))?;
        let count = number(Some(1))?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(PlantSpec {
            pattern,
            k,
            alter_edge_count,
            count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub plants: Vec<PlantSpec>,
    pub background_nodes: usize,
    pub background_edge_prob: f64,
    /// Share of background nodes labelled as bots.
    pub background_bot_fraction: f64,
    /// Closed interval bot scores are drawn from.
    pub bot_scores: (f64, f64),
    /// Half-open interval human scores are drawn from.
    pub human_scores: (f64, f64),
    pub threshold: f64,
    /// Smallest star the detector will look for. Alter links are laid out so
    /// that no planted alter reaches this degree and turns into an ego itself.
    pub k_min: usize,
    /// Weight given to every generated edge.
    pub edge_weight: u64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            plants: Vec::new(),
            background_nodes: 0,
            background_edge_prob: 0.0,
            background_bot_fraction: 0.25,
            bot_scores: (DEFAULT_BOT_THRESHOLD, 1.0),
            human_scores: (0.0, DEFAULT_BOT_THRESHOLD),
            threshold: DEFAULT_BOT_THRESHOLD,
            k_min: 3,
            edge_weight: 3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Most alter links one planted alter may carry.
    pub fn alter_link_cap(&self) -> usize {
        MAX_ALTER_LINKS.min(self.k_min.saturating_sub(2))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.k_min < 2 {
            return bad(format!("k_min must be at least 2, got {}", self.k_min));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        let (blo, bhi) = self.bot_scores;
        if !(self.threshold <= blo && blo <= bhi && bhi <= 1.0) {
            return bad(format!(
                "bot score interval [{blo}, {bhi}] must lie within [{}, 1]",
                self.threshold
            ));
        }
        let (hlo, hhi) = self.human_scores;
        if !(0.0 <= hlo && hlo < hhi && hhi <= self.threshold) {
            return bad(format!(
                "human score interval [{hlo}, {hhi}) must lie within [0, {})",
                self.threshold
            ));
        }
        if !(0.0..=1.0).contains(&self.background_edge_prob) {
            return bad(format!(
                "background_edge_prob {} outside [0, 1]",
                self.background_edge_prob
            ));
        }
        if !(0.0..=1.0).contains(&self.background_bot_fraction) {
            return bad(format!(
                "background_bot_fraction {} outside [0, 1]",
                self.background_bot_fraction
            ));
        }
        if self.edge_weight == 0 {
            return bad("edge_weight must be at least 1".into());
        }
        for p in &self.plants {
            if p.count == 0 {
                return bad(format!("plant {} has count 0", p.pattern));
            }
            if p.k < self.k_min {
                return bad(format!(
                    "plant {} has k = {} below k_min = {}",
                    p.pattern, p.k, self.k_min
                ));
            }
            if p.pattern.alters == AlterComposition::Mixed && p.k < 2 {
                return bad(format!("mixed plant {} needs at least 2 alters", p.pattern));
            }
            let max = max_alter_edges(p.k, self.alter_link_cap());
            if p.alter_edge_count > max {
                return bad(format!(
                    "plant {} with k = {} can hold at most {max} alter edges at k_min = {}, asked for {}",
                    p.pattern, p.k, self.k_min, p.alter_edge_count
                ));
            }
        }
        Ok(())
    }
}

/// Largest number of alter links among `k` alters when each may carry `cap`.
pub fn max_alter_edges(k: usize, cap: usize) -> usize {
    match cap {
        0 => 0,
        1 => k / 2,
        _ if k >= 3 => k,
        _ => k.saturating_sub(1),
    }
}

/// Generated graph, labels and the planted stars.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// Directed edges `(source, target, weight)`: for planted stars the alter
    /// retweets the ego; other edges point from the smaller id.
    pub edges: Vec<(AgentId, AgentId, u64)>,
    pub graph: AnalysisGraph,
    pub registry: AgentRegistry,
    /// Planted stars in enumeration order (descending `k`, then ego id).
    pub ground_truth: Vec<StarMotif>,
}

fn agent(name: String) -> AgentId {
    AgentId::new(name).expect("generated ids are non-empty")
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut registry = AgentRegistry::new(config.threshold)?;
    let mut edges: Vec<(AgentId, AgentId, u64)> = Vec::new();
    let mut ground_truth = Vec::new();
    let cap = config.alter_link_cap();
    let w = config.edge_weight;

    let score = |rng: &mut ChaCha8Rng, kind: AgentType| -> f64 {
        match kind {
            AgentType::Bot => rng.random_range(config.bot_scores.0..=config.bot_scores.1),
            AgentType::Human => rng.random_range(config.human_scores.0..config.human_scores.1),
        }
    };

    for (pi, plant) in config.plants.iter().enumerate() {
        for copy in 0..plant.count {
            let ego = agent(format!("p{pi:03}_{copy:04}_ego"));
            let alters: Vec<AgentId> = (0..plant.k)
                .map(|i| agent(format!("p{pi:03}_{copy:04}_a{i:04}")))
                .collect();

            let mut kinds: Vec<AgentType> = match plant.pattern.alters {
                AlterComposition::AllBots => vec![AgentType::Bot; plant.k],
                AlterComposition::AllHumans => vec![AgentType::Human; plant.k],
                AlterComposition::Mixed => {
                    let mut v = vec![AgentType::Bot, AgentType::Human];
                    v.extend((2..plant.k).map(|_| {
                        if rng.random_bool(0.5) {
                            AgentType::Bot
                        } else {
                            AgentType::Human
                        }
                    }));
                    v.shuffle(&mut rng);
                    v
                }
            };
            let s = score(&mut rng, plant.pattern.ego);
            registry.insert(ego.clone(), Some(s))?;
            for (a, kind) in alters.iter().zip(kinds.drain(..)) {
                let s = score(&mut rng, kind);
                registry.insert(a.clone(), Some(s))?;
            }

            for a in &alters {
                edges.push((ego.clone(), a.clone(), w));
            }
            let mut order: Vec<usize> = (0..plant.k).collect();
            order.shuffle(&mut rng);
            let mut alter_edges: Vec<(AgentId, AgentId)> = (0..plant.alter_edge_count)
                .map(|e| {
                    let (i, j) = if cap == 1 {
                        (order[2 * e], order[2 * e + 1])
                    } else {
                        (order[e], order[(e + 1) % plant.k])
                    };
                    let (x, y) = (&alters[i.min(j)], &alters[i.max(j)]);
                    (x.clone(), y.clone())
                })
                .collect();
            alter_edges.sort();
            for (x, y) in &alter_edges {
                edges.push((x.clone(), y.clone(), w));
            }
            ground_truth.push(StarMotif {
                ego,
                k: plant.k,
                alters,
                alter_edges,
                pattern: plant.pattern,
            });
        }
    }

    let background: Vec<AgentId> = (0..config.background_nodes)
        .map(|i| agent(format!("bg{i:07}")))
        .collect();
    for b in &background {
        let kind = if rng.random_bool(config.background_bot_fraction) {
            AgentType::Bot
        } else {
            AgentType::Human
        };
        let s = score(&mut rng, kind);
        registry.insert(b.clone(), Some(s))?;
    }
    for (u, v) in gnp_pairs(background.len(), config.background_edge_prob, &mut rng) {
        edges.push((background[v].clone(), background[u].clone(), w));
    }

    let graph = AnalysisGraph::from_edges(background.iter().cloned(), edges.iter().cloned())?;
    ground_truth.sort_by(|a, b| b.k.cmp(&a.k).then_with(|| a.ego.cmp(&b.ego)));
    Ok(SynthOutput {
        edges,
        graph,
        registry,
        ground_truth,
    })
}

/// Erdős–Rényi G(n, p) pairs `(u, v)` with `u > v`, by geometric skipping.
fn gnp_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if n < 2 || p <= 0.0 {
        return out;
    }
    if p >= 1.0 {
        for u in 1..n {
            for v in 0..u {
                out.push((u, v));
            }
        }
        return out;
    }
    let log_q = (1.0 - p).ln();
    let (mut u, mut v): (usize, i64) = (1, -1);
    while u < n {
        let r: f64 = rng.random();
        v += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while v >= u as i64 && u < n {
            v -= u as i64;
            u += 1;
        }
        if u < n {
            out.push((u, v as usize));
        }
    }
    out
}
