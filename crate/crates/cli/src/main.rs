//! `starmotif` command-line tool.
//!
//! Every subcommand reads an optional TOML configuration via `--config` and
//! applies the override flags on top of it. Exit codes: 0 success, 1 input
//! error, 2 configuration error, 3 internal or convergence error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use starmotif::centrality::compute_metrics;
use starmotif::io;
use starmotif::motif::enumerate_stars;
use starmotif::pipeline::{
    build_analysis_graph, load_graph, load_registry, run_pipeline_files, GraphSource, InputSummary,
};
use starmotif::stats::compare_metric;
use starmotif::synth::{generate, PlantSpec, SynthConfig};
use starmotif::{
    AgentRegistry, AnalysisGraph, ConstraintMode, Error, Metric, PipelineConfig, Result,
};

#[derive(Parser)]
#[command(
    name = "starmotif",
    version,
    about = "Star motif mining on bot/human retweet networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate events or an edge list, prune light edges and write an edge list.
    Ingest {
        #[command(flatten)]
        input: GraphInput,
        /// Output edge-list CSV (`source,target,weight`).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compute betweenness, eigenvector and total-degree centrality per agent.
    Metrics {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        scores: ScoreInput,
        /// Output metrics CSV.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Enumerate and classify star motifs.
    Motifs {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        scores: ScoreInput,
        /// Output motif catalog (JSON lines).
        #[arg(long)]
        out: PathBuf,
        /// Also write one DOT file per motif into this directory.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare bot and human metrics with a two-sample t-test.
    Stats {
        /// Metrics CSV as written by `metrics`.
        #[arg(long)]
        metrics: PathBuf,
        /// Output CSV; the table is always printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a synthetic graph with planted star motifs.
    ///
    /// `--config` here names a generator configuration, not a pipeline one.
    Synth {
        /// Planted stars as CODE:K[:ALTER_EDGES[:COUNT]], e.g. S02:5:1:3.
        #[arg(long = "plant")]
        plants: Vec<PlantSpec>,
        #[arg(long)]
        background_nodes: Option<usize>,
        #[arg(long)]
        background_prob: Option<f64>,
        /// Directory for the graph, scores and ground-truth files.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Events)]
        format: GraphFormat,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the whole pipeline and write every report file.
    Run {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        scores: ScoreInput,
        /// Report directory; falls back to `output_dir` in the configuration.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphInput {
    /// Retweet events CSV (`retweeter,original_author[,timestamp]`).
    #[arg(long)]
    events: Option<PathBuf>,
    /// Weighted edge-list CSV (`source,target,weight`).
    #[arg(long)]
    edges: Option<PathBuf>,
}

impl GraphInput {
    fn source(&self) -> GraphSource {
        match (&self.events, &self.edges) {
            (Some(p), _) => GraphSource::Events(p.clone()),
            (None, Some(p)) => GraphSource::EdgeList(p.clone()),
            (None, None) => unreachable!("clap requires one graph input"),
        }
    }
}

#[derive(Args)]
struct ScoreInput {
    /// Bot score CSV (`user_id,p_bot`).
    #[arg(long)]
    scores: PathBuf,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    min_weight: Option<u64>,
    #[arg(long)]
    bot_threshold: Option<f64>,
    #[arg(long)]
    k_min: Option<usize>,
    /// Reject stars with an over-linked alter instead of pruning it.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    bonferroni_m: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Generator seed (only `synth` draws random numbers).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Events,
    Edges,
}

impl Overrides {
    fn pipeline(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.min_weight {
            config.min_weight = v;
        }
        if let Some(v) = self.bot_threshold {
            config.bot_threshold = v;
        }
        if let Some(v) = self.k_min {
            config.k_min = v;
        }
        if self.strict {
            config.constraint_mode = ConstraintMode::Strict;
        }
        if let Some(v) = self.bonferroni_m {
            config.bonferroni_m = Some(v);
        }
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        config.validate()?;
        Ok(config)
    }

    fn synth(&self) -> Result<SynthConfig> {
        let mut config = match &self.config {
            Some(path) => SynthConfig::from_file(path)?,
            None => SynthConfig::default(),
        };
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.k_min {
            config.k_min = v;
        }
        if let Some(v) = self.bot_threshold {
            config.threshold = v;
            config.bot_scores = (v, 1.0);
            config.human_scores = (0.0, v);
        }
        if let Some(v) = self.min_weight {
            config.edge_weight = v;
        }
        Ok(config)
    }
}

fn load_inputs(
    input: &GraphInput,
    scores: &ScoreInput,
    config: &PipelineConfig,
) -> Result<(AnalysisGraph, AgentRegistry)> {
    let mut summary = InputSummary::default();
    let mut warnings = Vec::new();
    let graph = load_graph(&input.source(), config, &mut summary, &mut warnings)?;
    let registry = load_registry(&scores.scores, config, &mut summary, &mut warnings)?;
    report_warnings(&warnings);
    Ok((build_analysis_graph(&graph, config), registry))
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn ingest(input: &GraphInput, out: &Path, overrides: &Overrides) -> Result<()> {
    let config = overrides.pipeline()?;
    let mut summary = InputSummary::default();
    let mut warnings = Vec::new();
    let graph = load_graph(&input.source(), &config, &mut summary, &mut warnings)?;
    report_warnings(&warnings);
    let pruned = if config.keep_isolated {
        graph.prune_by_weight_retaining_nodes(config.min_weight)
    } else {
        graph.prune_by_weight(config.min_weight)
    };
    io::write_edge_list(out, pruned.edges())?;
    println!(
        "{} nodes, {} edges before pruning; {} nodes, {} edges at min_weight {}",
        graph.node_count(),
        graph.edge_count(),
        pruned.node_count(),
        pruned.edge_count(),
        config.min_weight
    );
    Ok(())
}

fn metrics(
    input: &GraphInput,
    scores: &ScoreInput,
    out: &Path,
    overrides: &Overrides,
) -> Result<()> {
    let config = overrides.pipeline()?;
    let (graph, registry) = load_inputs(input, scores, &config)?;
    let table = compute_metrics(&graph, &registry, &config.metric_options())?;
    report_warnings(&table.warnings);
    io::write_metrics(out, &table.records)?;
    println!(
        "{} agents written to {}",
        table.records.len(),
        out.display()
    );
    Ok(())
}

fn motifs(
    input: &GraphInput,
    scores: &ScoreInput,
    out: &Path,
    dot_dir: Option<&Path>,
    overrides: &Overrides,
) -> Result<()> {
    let config = overrides.pipeline()?;
    let (graph, registry) = load_inputs(input, scores, &config)?;
    let catalog = enumerate_stars(&graph, &registry, &config.motif_config());
    io::write_motifs(out, &catalog)?;
    if let Some(dir) = dot_dir {
        create_dir(dir)?;
        for motif in &catalog {
            let path = dir.join(format!("{}_{}.dot", motif.pattern, motif.ego));
            io::export_motif_dot(motif, &graph, &registry, &path)?;
        }
    }
    for (code, n) in starmotif::motif::pattern_histogram(&catalog) {
        println!("{code}\t{n}");
    }
    println!("total\t{}", catalog.len());
    Ok(())
}

fn stats(metrics: &Path, out: Option<&Path>, overrides: &Overrides) -> Result<()> {
    let config = overrides.pipeline()?;
    let records = io::load_metrics(metrics)?;
    let m = config.resolved_bonferroni_m();
    let mut results = Vec::new();
    for metric in Metric::ALL {
        match compare_metric(&records, metric, m, config.alpha, config.test_variant) {
            Ok(row) => results.push(row),
            Err(Error::DegenerateVariance(msg)) => {
                eprintln!("warning: {} not tested: {msg}", metric.name())
            }
            Err(e) => return Err(e),
        }
    }
    println!("metric\tt\tp\tcorrected_p\tsignificant");
    for r in &results {
        println!(
            "{}\t{:.4}\t{:.3e}\t{:.3e}\t{}",
            r.metric,
            r.t_statistic,
            r.p_value,
            r.corrected_p,
            if r.significant { "yes" } else { "no" }
        );
    }
    println!("bonferroni_m = {m}, alpha = {}", config.alpha);
    if let Some(path) = out {
        io::write_test_results(path, &results)?;
    }
    Ok(())
}

fn synth(
    plants: &[PlantSpec],
    background_nodes: Option<usize>,
    background_prob: Option<f64>,
    out_dir: &Path,
    format: GraphFormat,
    overrides: &Overrides,
) -> Result<()> {
    let mut config = overrides.synth()?;
    config.plants.extend_from_slice(plants);
    if let Some(v) = background_nodes {
        config.background_nodes = v;
    }
    if let Some(v) = background_prob {
        config.background_edge_prob = v;
    }
    let output = generate(&config)?;
    create_dir(out_dir)?;
    let edges = output.edges.iter().map(|(s, t, w)| (s, t, *w));
    match format {
        GraphFormat::Events => io::write_events(&out_dir.join("events.csv"), edges)?,
        GraphFormat::Edges => io::write_edge_list(&out_dir.join("edges.csv"), edges)?,
    }
    io::write_scores(&out_dir.join("scores.csv"), &output.registry)?;
    io::write_motifs(&out_dir.join("ground_truth.jsonl"), &output.ground_truth)?;
    println!(
        "{} nodes, {} edges, {} planted stars written to {}",
        output.graph.node_count(),
        output.graph.edge_count(),
        output.ground_truth.len(),
        out_dir.display()
    );
    Ok(())
}

fn run(
    input: &GraphInput,
    scores: &ScoreInput,
    out_dir: Option<&Path>,
    overrides: &Overrides,
) -> Result<()> {
    let config = overrides.pipeline()?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| {
            Error::Config("no output directory: pass --out-dir or set output_dir".into())
        })?;
    let report = run_pipeline_files(&input.source(), &scores.scores, &config)?;
    report_warnings(&report.warnings);
    report.write_to(&dir)?;
    print!("{}", report.summary_json()?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest {
            input,
            out,
            overrides,
        } => ingest(input, out, overrides),
        Command::Metrics {
            input,
            scores,
            out,
            overrides,
        } => metrics(input, scores, out, overrides),
        Command::Motifs {
            input,
            scores,
            out,
            dot_dir,
            overrides,
        } => motifs(input, scores, out, dot_dir.as_deref(), overrides),
        Command::Stats {
            metrics,
            out,
            overrides,
        } => stats(metrics, out.as_deref(), overrides),
        Command::Synth {
            plants,
            background_nodes,
            background_prob,
            out_dir,
            format,
            overrides,
        } => synth(
            plants,
            *background_nodes,
            *background_prob,
            out_dir,
            *format,
            overrides,
        ),
        Command::Run {
            input,
            scores,
            out_dir,
            overrides,
        } => run(input, scores, out_dir.as_deref(), overrides),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
