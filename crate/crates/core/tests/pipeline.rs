//! End-to-end runs over files on disk.

use std::fs;
use std::path::Path;

use starmotif::io;
use starmotif::pipeline::{run_pipeline, run_pipeline_files, GraphSource};
use starmotif::synth::{generate, PlantSpec, SynthConfig};
use starmotif::{AgentType, ConstraintMode, Error, PatternCode, PipelineConfig};

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

/// Ego `e` retweeted 3 times by each of four bots and once by a human; the
/// human link falls below the default weight threshold.
fn small_fixture(dir: &Path) -> (GraphSource, std::path::PathBuf) {
    let mut events = String::from("retweeter,original_author,timestamp\n");
    for a in ["b1", "b2", "b3", "b4"] {
        for t in 0..3 {
            events.push_str(&format!("{a},e,2020-01-0{}\n", t + 1));
        }
    }
    events.push_str("h1,e,2020-01-01\n");
    events.push_str("e,e,2020-01-02\n");
    for _ in 0..3 {
        events.push_str("h2,h1,\n");
    }
    let ev = dir.join("events.csv");
    write(&ev, &events);
    let scores = dir.join("scores.csv");
    write(
        &scores,
        "user_id,p_bot\ne,0.1\nb1,0.9\nb2,0.7\nb3,0.95\nb4,0.8\nh1,0.2\nh2,\n",
    );
    (GraphSource::Events(ev), scores)
}

#[test]
fn event_file_run_reports_counts_and_pattern() {
    let tmp = tempfile::tempdir().unwrap();
    let (source, scores) = small_fixture(tmp.path());
    let report = run_pipeline_files(&source, &scores, &PipelineConfig::default()).unwrap();

    assert_eq!(report.input.events, Some(17));
    assert_eq!(report.input.self_retweets_discarded, 1);
    assert_eq!(report.graph.directed_edges, 6);
    assert_eq!(report.graph.analysis_edges, 5);
    assert_eq!(report.graph.analysis_nodes, 7);
    assert_eq!(report.agents.graph_bots, 4);
    assert_eq!(report.agents.defaulted_to_human, 0);

    assert_eq!(report.catalog.len(), 1);
    let star = &report.catalog[0];
    assert_eq!(star.ego.as_str(), "e");
    assert_eq!(star.pattern, "S10".parse::<PatternCode>().unwrap());
    assert_eq!(report.motifs.pattern_counts["S10"], 1);

    let json: serde_json::Value = serde_json::from_str(&report.summary_json().unwrap()).unwrap();
    assert_eq!(json["config"]["bonferroni_m"], 3);
    assert_eq!(json["stats"].as_array().unwrap().len(), 3);
}

#[test]
fn edge_list_and_event_inputs_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = generate(&SynthConfig {
        plants: PatternCode::ALL
            .iter()
            .map(|&pattern| PlantSpec {
                pattern,
                k: 5,
                alter_edge_count: 2,
                count: 2,
            })
            .collect(),
        background_nodes: 40,
        background_edge_prob: 0.1,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let ev = tmp.path().join("events.csv");
    let el = tmp.path().join("edges.csv");
    let sc = tmp.path().join("scores.csv");
    let edges = || synth.edges.iter().map(|(s, t, w)| (s, t, *w));
    io::write_events(&ev, edges()).unwrap();
    io::write_edge_list(&el, edges()).unwrap();
    io::write_scores(&sc, &synth.registry).unwrap();

    let config = PipelineConfig::default();
    let a = run_pipeline_files(&GraphSource::Events(ev), &sc, &config).unwrap();
    let b = run_pipeline_files(&GraphSource::EdgeList(el), &sc, &config).unwrap();
    assert_eq!(a.catalog, b.catalog);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.graph, b.graph);
}

#[test]
fn one_sided_population_skips_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let ev = tmp.path().join("events.csv");
    write(
        &ev,
        "retweeter,original_author\na,e\na,e\na,e\nb,e\nb,e\nb,e\n",
    );
    let sc = tmp.path().join("scores.csv");
    write(&sc, "user_id,p_bot\ne,0.1\na,0.2\nb,0.3\n");
    let report =
        run_pipeline_files(&GraphSource::Events(ev), &sc, &PipelineConfig::default()).unwrap();
    assert!(report.stats.is_empty());
    assert!(report.stats_notice.as_deref().unwrap().contains("bot"));
    assert_eq!(report.metrics.len(), 3);
    assert!(report
        .metrics
        .iter()
        .all(|r| r.agent_type == AgentType::Human));
}

#[test]
fn overrides_change_the_outcome() {
    let tmp = tempfile::tempdir().unwrap();
    let (source, scores) = small_fixture(tmp.path());
    let loose = PipelineConfig {
        min_weight: 1,
        ..Default::default()
    };
    let report = run_pipeline_files(&source, &scores, &loose).unwrap();
    assert_eq!(report.catalog[0].k, 5);
    assert_eq!(report.catalog[0].pattern.to_string(), "S12");

    let strict_kmin = PipelineConfig {
        k_min: 5,
        constraint_mode: ConstraintMode::Strict,
        ..Default::default()
    };
    let report = run_pipeline_files(&source, &scores, &strict_kmin).unwrap();
    assert!(report.catalog.is_empty());

    let high = PipelineConfig {
        bot_threshold: 0.85,
        ..Default::default()
    };
    let report = run_pipeline_files(&source, &scores, &high).unwrap();
    assert_eq!(report.catalog[0].pattern.to_string(), "S12");
}

#[test]
fn errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (source, scores) = small_fixture(tmp.path());

    let bad = PipelineConfig {
        bot_threshold: 1.5,
        ..Default::default()
    };
    let err = run_pipeline_files(&source, &scores, &bad).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let missing = GraphSource::Events(tmp.path().join("nope.csv"));
    let err = run_pipeline_files(&missing, &scores, &PipelineConfig::default()).unwrap_err();
    assert_eq!(err.exit_code(), 1);

    let headerless = tmp.path().join("bad.csv");
    write(&headerless, "from,to\na,b\n");
    let err = run_pipeline_files(
        &GraphSource::EdgeList(headerless),
        &scores,
        &PipelineConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::MissingColumn { .. }));
    assert_eq!(err.exit_code(), 1);

    let broken = tmp.path().join("broken.csv");
    write(&broken, "source,target,weight\na,b,3\nc,d,x\ne,f,0\n");
    let err = run_pipeline_files(
        &GraphSource::EdgeList(broken.clone()),
        &scores,
        &PipelineConfig::default(),
    )
    .unwrap_err();
    match err {
        Error::RowErrors { errors, .. } => assert_eq!(
            errors.iter().map(|e| e.line).collect::<Vec<_>>(),
            vec![3, 4]
        ),
        other => panic!("unexpected {other:?}"),
    }
    let tolerant = PipelineConfig {
        row_error_budget: 2,
        ..Default::default()
    };
    let report = run_pipeline_files(&GraphSource::EdgeList(broken), &scores, &tolerant).unwrap();
    assert_eq!(report.input.graph_row_errors, 2);

    assert!(
        PipelineConfig::from_toml_str("min_weight = 3\nunknown = 1\n")
            .unwrap_err()
            .exit_code()
            == 2
    );
}

#[test]
fn in_memory_and_file_runs_match() {
    let synth = generate(&SynthConfig {
        plants: vec![PlantSpec {
            pattern: "S01".parse().unwrap(),
            k: 4,
            alter_edge_count: 0,
            count: 3,
        }],
        background_nodes: 25,
        background_edge_prob: 0.2,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    let mut graph = starmotif::RetweetGraph::new();
    for (s, t, w) in &synth.edges {
        graph.add_weighted_edge(s.as_str(), t.as_str(), *w).unwrap();
    }
    let mem = run_pipeline(&graph, &synth.registry, &PipelineConfig::default()).unwrap();

    let tmp = tempfile::tempdir().unwrap();
    let el = tmp.path().join("edges.csv");
    let sc = tmp.path().join("scores.csv");
    io::write_edge_list(&el, synth.edges.iter().map(|(s, t, w)| (s, t, *w))).unwrap();
    io::write_scores(&sc, &synth.registry).unwrap();
    let disk =
        run_pipeline_files(&GraphSource::EdgeList(el), &sc, &PipelineConfig::default()).unwrap();
    assert_eq!(mem.catalog, disk.catalog);
    assert_eq!(mem.stats, disk.stats);
    assert_eq!(mem.metrics, disk.metrics);
}
