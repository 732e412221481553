//! Shared fixtures for the benchmarks.

use starmotif::synth::{generate, PlantSpec, SynthConfig, SynthOutput};
use starmotif::PatternCode;

/// G(n, p) background sized for an average degree of `avg_degree`, with
/// ten planted stars of every pattern.
pub fn fixture(n: usize, avg_degree: f64, seed: u64) -> SynthOutput {
    let p = (avg_degree / (n.max(2) - 1) as f64).min(1.0);
    let plants = PatternCode::ALL
        .iter()
        .map(|&pattern| PlantSpec {
            pattern,
            k: 6,
            alter_edge_count: 2,
            count: 10,
        })
        .collect();
    generate(&SynthConfig {
        plants,
        background_nodes: n,
        background_edge_prob: p,
        seed,
        ..Default::default()
    })
    .expect("fixture configuration is valid")
}
