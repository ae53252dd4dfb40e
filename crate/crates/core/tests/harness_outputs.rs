use std::path::Path;

use ngg::engine::{run_to_convergence, GameMode, GameParams};
use ngg::harness::{
    derive_seed, load_config, network_seed, run_experiment, ExperimentConfig, Report, SummaryRow,
    Sweep, SUMMARY_HEADER,
};
use ngg::metrics::{summarize, MeanStd, MetricsTrace};
use ngg::netgen::{generate, NetworkSpec};
use ngg::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(dir: &Path, m: usize, reps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        NetworkSpec::RandomGraph { m, p: 0.2 },
        GameParams::new(5, 0.5),
        11,
    );
    cfg.repetitions = reps;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn read_summary(dir: &Path) -> Vec<SummaryRow> {
    let mut reader = csv::Reader::from_path(dir.join("summary.csv")).unwrap();
    let header: Vec<String> = reader
        .headers()
        .unwrap()
        .iter()
        .map(str::to_owned)
        .collect();
    assert_eq!(header, SUMMARY_HEADER);
    reader.deserialize().map(|r| r.unwrap()).collect()
}

#[test]
fn four_group_sizes_give_eighty_runs_and_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 120, 20);
    cfg.sweep = Some(Sweep {
        group_sizes: Some(vec![10, 20, 50, 100]),
        ..Sweep::default()
    });
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.runs.len(), 80);
    assert_eq!(report.points.len(), 4);
    assert_eq!(read_summary(dir.path()).len(), 4);
    for run in &report.runs {
        assert!(dir.path().join(&run.trace_path).is_file());
    }
    for point in &report.points {
        assert!(dir.path().join(&point.trace_avg_path).is_file());
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 30, 1);
    run_experiment(&cfg).unwrap();
    let trace = std::fs::read(dir.path().join("traces/p000_r000.csv")).unwrap();
    let avg = std::fs::read(dir.path().join("traces/p000_avg.csv")).unwrap();
    let summary = std::fs::read(dir.path().join("summary.csv")).unwrap();
    run_experiment(&cfg).unwrap();
    assert_eq!(
        trace,
        std::fs::read(dir.path().join("traces/p000_r000.csv")).unwrap()
    );
    assert_eq!(
        avg,
        std::fs::read(dir.path().join("traces/p000_avg.csv")).unwrap()
    );
    assert_eq!(
        summary,
        std::fs::read(dir.path().join("summary.csv")).unwrap()
    );
}

#[test]
fn aggregates_equal_recomputation_from_persisted_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 40, 6);
    cfg.sweep = Some(Sweep {
        betas: Some(vec![0.2, 1.0]),
        modes: Some(vec![GameMode::Ngg, GameMode::Ngmh]),
        ..Sweep::default()
    });
    run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    let rows = read_summary(dir.path());

    for (point, row) in report.points.iter().zip(&rows) {
        let summaries: Vec<_> = report
            .runs
            .iter()
            .filter(|r| r.point_index == point.point_index)
            .map(|r| {
                summarize(
                    &MetricsTrace::load(&dir.path().join(&r.trace_path)).unwrap(),
                    40,
                )
                .unwrap()
            })
            .collect();
        let total = MeanStd::of(summaries.iter().map(|s| s.n_total_max as f64));
        let diff = MeanStd::of(summaries.iter().map(|s| s.n_diff_max as f64));
        let cvg = MeanStd::of(
            summaries
                .iter()
                .filter_map(|s| s.n_iter_cvg)
                .map(|x| x as f64),
        );
        assert_eq!(point.n_total_max, total);
        assert_eq!(point.n_diff_max, diff);
        assert_eq!(point.n_iter_cvg, cvg);
        assert_eq!(
            point.converged_runs,
            summaries.iter().filter(|s| s.converged).count()
        );
        assert_eq!(row, &SummaryRow::from(point));
    }
}

#[test]
fn two_node_aggregate_is_the_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(
        NetworkSpec::RandomGraph { m: 2, p: 0.5 },
        GameParams::new(2, 0.7),
        5,
    );
    cfg.repetitions = 1;
    cfg.output_dir = dir.path().to_path_buf();
    let report = run_experiment(&cfg).unwrap();

    let net = generate(
        &cfg.network,
        &mut ChaCha8Rng::seed_from_u64(network_seed(&cfg, 0)),
    )
    .unwrap();
    let run = run_to_convergence(&net, &cfg.game, derive_seed(5, 0, 0)).unwrap();
    let point = &report.points[0];
    assert_eq!(point.n_total_max.mean, run.summary.n_total_max as f64);
    assert_eq!(point.n_diff_max.mean, run.summary.n_diff_max as f64);
    assert_eq!(
        point.n_iter_cvg.mean,
        run.summary.n_iter_cvg.unwrap() as f64
    );
    assert_eq!(report.runs[0].summary, run.summary);
}

#[test]
fn config_files_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    };
    let base = r#""network": {"model": "random_graph", "m": 100, "p": 0.05}, "master_seed": 1"#;

    let sweep = write(
        "sweep.json",
        &format!(
            r#"{{{base}, "game": {{"n": 20, "beta": 0.5}}, "sweep": {{"betas": [0.1, 0.5, 1]}}}}"#
        ),
    );
    let cfg = load_config(&sweep).unwrap();
    assert_eq!(cfg.points().len(), 3);
    assert_eq!(cfg.repetitions, 20);

    let zero_beta = write(
        "b.json",
        &format!(r#"{{{base}, "game": {{"n": 20, "beta": 0}}}}"#),
    );
    assert!(matches!(
        load_config(&zero_beta),
        Err(Error::InvalidParam { field: "beta", .. })
    ));

    let lone = write(
        "n.json",
        &format!(r#"{{{base}, "game": {{"n": 1, "beta": 0.5}}}}"#),
    );
    assert!(matches!(
        load_config(&lone),
        Err(Error::InvalidParam { field: "n", .. })
    ));

    let unknown = write(
        "u.json",
        &format!(r#"{{{base}, "game": {{"n": 20, "beta": 0.5}}, "colour": 1}}"#),
    );
    assert!(matches!(load_config(&unknown), Err(Error::Parse { .. })));

    let empty = write(
        "e.json",
        &format!(r#"{{{base}, "game": {{"n": 20, "beta": 0.5}}, "sweep": {{"betas": []}}}}"#),
    );
    assert!(matches!(
        load_config(&empty),
        Err(Error::InvalidParam { .. })
    ));

    assert!(matches!(
        load_config(&dir.path().join("missing.json")),
        Err(Error::Io { .. })
    ));
}
