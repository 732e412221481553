//! End-to-end analysis: aggregate, prune, project, classify, measure, mine, test.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentRegistry, AgentType, DEFAULT_BOT_THRESHOLD};
use crate::centrality::{
    compute_metrics, MetricOptions, MetricRecord, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::graph::{AnalysisGraph, RetweetGraph};
use crate::io;
use crate::motif::{enumerate_stars, pattern_histogram, ConstraintMode, MotifConfig, StarMotif};
use crate::stats::{compare_metric, Metric, TestResult, TestVariant};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneStage {
    /// Prune directed edges by their own weight, then project.
    #[default]
    BeforeProjection,
    /// Project first, then prune by combined weight.
    AfterProjection,
}

/// Every tunable of a run. Loadable from TOML; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub min_weight: u64,
    pub prune_stage: PruneStage,
    pub keep_isolated: bool,
    pub bot_threshold: f64,
    pub k_min: usize,
    pub constraint_mode: ConstraintMode,
    pub bound_alter_global_degree: bool,
    pub normalized: bool,
    pub weighted: bool,
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
    /// Bonferroni factor; defaults to the number of metrics tested.
    pub bonferroni_m: Option<u32>,
    pub alpha: f64,
    pub test_variant: TestVariant,
    /// Malformed input rows tolerated per file before the run fails.
    pub row_error_budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_weight: 3,
            prune_stage: PruneStage::BeforeProjection,
            keep_isolated: false,
            bot_threshold: DEFAULT_BOT_THRESHOLD,
            k_min: 3,
            constraint_mode: ConstraintMode::PruneViolators,
            bound_alter_global_degree: false,
            normalized: true,
            weighted: false,
            eigen_tolerance: DEFAULT_EIGEN_TOLERANCE,
            eigen_max_iter: DEFAULT_EIGEN_MAX_ITER,
            bonferroni_m: None,
            alpha: 0.05,
            test_variant: TestVariant::Student,
            row_error_budget: 0,
            output_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.min_weight < 1 {
            return bad("min_weight must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.bot_threshold) {
            return bad(format!(
                "bot_threshold {} outside [0, 1]",
                self.bot_threshold
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.bonferroni_m == Some(0) {
            return bad("bonferroni_m must be at least 1".into());
        }
        if self.eigen_tolerance.is_nan() || self.eigen_tolerance <= 0.0 || self.eigen_max_iter == 0
        {
            return bad("eigen_tolerance must be positive and eigen_max_iter at least 1".into());
        }
        self.motif_config().validate()
    }

    pub fn motif_config(&self) -> MotifConfig {
        MotifConfig {
            mode: self.constraint_mode,
            k_min: self.k_min,
            bound_alter_global_degree: self.bound_alter_global_degree,
        }
    }

    pub fn metric_options(&self) -> MetricOptions {
        MetricOptions {
            normalized: self.normalized,
            weighted: self.weighted,
            eigen_tolerance: self.eigen_tolerance,
            eigen_max_iter: self.eigen_max_iter,
        }
    }

    pub fn resolved_bonferroni_m(&self) -> u32 {
        self.bonferroni_m.unwrap_or(Metric::ALL.len() as u32)
    }

    /// Copy with every optional value filled in, as recorded in reports.
    pub fn resolved(&self) -> Self {
        PipelineConfig {
            bonferroni_m: Some(self.resolved_bonferroni_m()),
            ..self.clone()
        }
    }
}

/// Graph input of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    Events(PathBuf),
    EdgeList(PathBuf),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InputSummary {
    /// Event rows read, when the input was an event file.
    pub events: Option<usize>,
    pub self_retweets_discarded: usize,
    pub graph_row_errors: usize,
    pub score_row_errors: usize,
    pub duplicate_scores: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GraphSummary {
    pub directed_nodes: usize,
    pub directed_edges: usize,
    pub analysis_nodes: usize,
    pub analysis_edges: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AgentSummary {
    /// Agents with a row in the score file.
    pub scored_agents: usize,
    pub scored_bots: usize,
    pub scored_bot_fraction: Option<f64>,
    /// Agents in the analysis graph.
    pub graph_agents: usize,
    pub graph_bots: usize,
    pub graph_humans: usize,
    pub graph_bot_fraction: Option<f64>,
    /// Graph agents without a score, counted as human.
    pub defaulted_to_human: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifSummary {
    pub total: usize,
    /// All six codes, zero-filled.
    pub pattern_counts: BTreeMap<String, usize>,
}

/// Result of a pipeline run. Serializes to the summary document; the per-node
/// metrics, motif catalog and working graph travel alongside for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub config: PipelineConfig,
    pub input: InputSummary,
    pub graph: GraphSummary,
    pub agents: AgentSummary,
    pub motifs: MotifSummary,
    pub stats: Vec<TestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats_notice: Option<String>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub metrics: Vec<MetricRecord>,
    #[serde(skip)]
    pub catalog: Vec<StarMotif>,
    #[serde(skip)]
    pub analysis_graph: AnalysisGraph,
    #[serde(skip)]
    pub registry: AgentRegistry,
}

impl AnalysisReport {
    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Write `summary.json`, `metrics.csv`, `motifs.jsonl`, `stats.csv`,
    /// `graph.dot` and `graph.graphml` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        io::write_text(&dir.join("summary.json"), &self.summary_json()?)?;
        io::write_metrics(&dir.join("metrics.csv"), &self.metrics)?;
        io::write_motifs(&dir.join("motifs.jsonl"), &self.catalog)?;
        io::write_test_results(&dir.join("stats.csv"), &self.stats)?;
        io::write_text(
            &dir.join("graph.dot"),
            &io::render_graph_dot(&self.analysis_graph, &self.registry),
        )?;
        io::write_text(
            &dir.join("graph.graphml"),
            &io::render_graphml(&self.analysis_graph, &self.registry),
        )
    }
}

/// Prune and project according to the configuration.
pub fn build_analysis_graph(graph: &RetweetGraph, config: &PipelineConfig) -> AnalysisGraph {
    match config.prune_stage {
        PruneStage::BeforeProjection => {
            let pruned = if config.keep_isolated {
                graph.prune_by_weight_retaining_nodes(config.min_weight)
            } else {
                graph.prune_by_weight(config.min_weight)
            };
            pruned.undirected_projection()
        }
        PruneStage::AfterProjection => graph
            .undirected_projection()
            .prune_by_weight(config.min_weight, config.keep_isolated),
    }
}

/// Run every analysis stage on an in-memory graph and registry.
pub fn run_pipeline(
    graph: &RetweetGraph,
    registry: &AgentRegistry,
    config: &PipelineConfig,
) -> Result<AnalysisReport> {
    config.validate()?;
    let registry = if registry.threshold() == config.bot_threshold {
        registry.clone()
    } else {
        registry.with_threshold(config.bot_threshold)?
    };
    let mut warnings = Vec::new();

    let analysis = build_analysis_graph(graph, config);
    if analysis.edge_count() == 0 {
        warnings.push(format!(
            "no edges survive pruning at min_weight = {}",
            config.min_weight
        ));
    }

    let graph_bots = analysis
        .ids()
        .iter()
        .filter(|id| registry.agent_type(id.as_str()) == AgentType::Bot)
        .count();
    let defaulted = analysis
        .ids()
        .iter()
        .filter(|id| registry.get(id.as_str()).is_none())
        .count();
    if defaulted > 0 {
        warnings.push(format!(
            "{defaulted} graph agent(s) have no bot score and count as human"
        ));
    }
    let fraction = |part: usize, whole: usize| (whole > 0).then(|| part as f64 / whole as f64);
    let agents = AgentSummary {
        scored_agents: registry.len(),
        scored_bots: registry.bot_count(),
        scored_bot_fraction: registry.bot_fraction().ok(),
        graph_agents: analysis.node_count(),
        graph_bots,
        graph_humans: analysis.node_count() - graph_bots,
        graph_bot_fraction: fraction(graph_bots, analysis.node_count()),
        defaulted_to_human: defaulted,
    };

    let table = compute_metrics(&analysis, &registry, &config.metric_options())?;
    warnings.extend(table.warnings);

    let catalog = enumerate_stars(&analysis, &registry, &config.motif_config());
    let motifs = MotifSummary {
        total: catalog.len(),
        pattern_counts: pattern_histogram(&catalog)
            .into_iter()
            .map(|(code, n)| (code.to_string(), n))
            .collect(),
    };

    let m = config.resolved_bonferroni_m();
    let mut stats = Vec::new();
    let mut stats_notice = None;
    for metric in Metric::ALL {
        match compare_metric(&table.records, metric, m, config.alpha, config.test_variant) {
            Ok(row) => stats.push(row),
            Err(Error::InsufficientSample { group, n }) => {
                stats.clear();
                stats_notice = Some(format!(
                    "statistics skipped: the {group} group has {n} agent(s), at least 2 are needed"
                ));
                break;
            }
            Err(Error::DegenerateVariance(msg)) => {
                warnings.push(format!("{} not tested: {msg}", metric.name()));
            }
            Err(e) => return Err(e),
        }
    }

    Ok(AnalysisReport {
        config: config.resolved(),
        input: InputSummary::default(),
        graph: GraphSummary {
            directed_nodes: graph.node_count(),
            directed_edges: graph.edge_count(),
            analysis_nodes: analysis.node_count(),
            analysis_edges: analysis.edge_count(),
        },
        agents,
        motifs,
        stats,
        stats_notice,
        warnings,
        metrics: table.records,
        catalog,
        analysis_graph: analysis,
        registry,
    })
}

/// Load a graph file into a [`RetweetGraph`], recording input counts in `summary`.
pub fn load_graph(
    source: &GraphSource,
    config: &PipelineConfig,
    summary: &mut InputSummary,
    warnings: &mut Vec<String>,
) -> Result<RetweetGraph> {
    let (graph, row_errors) = match source {
        GraphSource::Events(path) => {
            let loaded = io::load_events(path, config.row_error_budget)?;
            summary.events = Some(loaded.value.len());
            let (graph, loops) = io::events_to_graph(&loaded.value)?;
            summary.self_retweets_discarded = loops;
            if loops > 0 {
                warnings.push(format!("{loops} self-retweet event(s) discarded"));
            }
            (graph, loaded.row_errors)
        }
        GraphSource::EdgeList(path) => {
            let loaded = io::load_edge_list(path, config.row_error_budget)?;
            (loaded.value, loaded.row_errors)
        }
    };
    summary.graph_row_errors = row_errors.len();
    for e in row_errors {
        warnings.push(format!("graph input line {}: {}", e.line, e.message));
    }
    Ok(graph)
}

/// Load the score file at the configured threshold, recording counts in `summary`.
pub fn load_registry(
    path: &Path,
    config: &PipelineConfig,
    summary: &mut InputSummary,
    warnings: &mut Vec<String>,
) -> Result<AgentRegistry> {
    let loaded = io::load_scores(path, config.bot_threshold, config.row_error_budget)?;
    summary.score_row_errors = loaded.row_errors.len();
    summary.duplicate_scores = loaded.duplicates;
    if loaded.duplicates > 0 {
        warnings.push(format!(
            "{} duplicate score row(s); the last row for each agent was kept",
            loaded.duplicates
        ));
    }
    for e in loaded.row_errors {
        warnings.push(format!("score input line {}: {}", e.line, e.message));
    }
    Ok(loaded.registry)
}

/// Load both inputs from disk and run the pipeline.
pub fn run_pipeline_files(
    source: &GraphSource,
    scores: &Path,
    config: &PipelineConfig,
) -> Result<AnalysisReport> {
    config.validate()?;
    let mut input = InputSummary::default();
    let mut load_warnings = Vec::new();
    let graph = load_graph(source, config, &mut input, &mut load_warnings)?;
    let registry = load_registry(scores, config, &mut input, &mut load_warnings)?;
    let mut report = run_pipeline(&graph, &registry, config)?;
    report.input = input;
    load_warnings.append(&mut report.warnings);
    report.warnings = load_warnings;
    Ok(report)
}
