//! Star motif mining on bot/human retweet networks.
//!
//! The crate turns retweet events into a weighted communication graph,
//! labels agents as bots or humans from a bot-probability score, finds
//! star-shaped ego networks and labels each with one of six ego/alter
//! patterns (`S00`..`S12`), and compares bot and human centralities with a
//! two-sample t-test under Bonferroni correction.

pub mod agents;
pub mod centrality;
pub mod error;
pub mod graph;
pub mod io;
pub mod motif;
pub mod pipeline;
pub mod stats;
pub mod synth;

pub use agents::{classify_agent, AgentProfile, AgentRegistry, AgentType};
pub use centrality::{MetricOptions, MetricRecord};
pub use error::{Error, Result, RowError};
pub use graph::{AgentId, AnalysisGraph, RetweetGraph};
pub use motif::{ConstraintMode, MotifConfig, PatternCode, StarMotif};
pub use pipeline::{AnalysisReport, PipelineConfig};
pub use stats::{Metric, TestResult};
