use std::collections::BTreeSet;

use ngg::engine::{play_round, GameParams, PopulationState, WordId};
use ngg::metrics::{average_runs, snapshot, summarize, MetricsTrace, TraceRecord};
use ngg::netgen::Network;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn record(iteration: u64, n_total: u64, n_diff: u64, sr: f64) -> TraceRecord {
    TraceRecord {
        iteration,
        n_total,
        n_diff,
        sr,
        group_size: 2,
        n_transmitted: 1,
    }
}

fn trace_strategy() -> impl Strategy<Value = MetricsTrace> {
    prop::collection::vec((1u64..50, 1u64..10, 0.0f64..=1.0), 1..30).prop_map(|rows| {
        MetricsTrace::from_records(
            rows.into_iter()
                .enumerate()
                .map(|(k, (total, diff, sr))| record(k as u64 + 1, total + diff, diff, sr))
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn averaging_ignores_run_order(traces in prop::collection::vec(trace_strategy(), 1..6), rot in 0usize..6) {
        let summaries: Vec<_> = traces.iter().map(|t| summarize(t, 10).unwrap()).collect();
        let reference = average_runs(&traces, &summaries, 10);
        let k = rot % traces.len();
        let (mut t2, mut s2) = (traces.clone(), summaries.clone());
        t2.rotate_left(k);
        s2.rotate_left(k);
        t2.reverse();
        s2.reverse();
        // Debug text compares the empty-set NaN means as equal.
        prop_assert_eq!(format!("{:?}", average_runs(&t2, &s2, 10)), format!("{reference:?}"));
    }

    #[test]
    fn trace_csv_round_trips(trace in trace_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        trace.save(&path).unwrap();
        prop_assert_eq!(MetricsTrace::load(&path).unwrap(), trace);
    }
}

#[test]
fn averages_match_hand_arithmetic() {
    let runs = [
        vec![record(1, 3, 2, 0.0), record(2, 4, 1, 0.5)],
        vec![record(1, 2, 2, 1.0)],
        vec![
            record(1, 4, 3, 0.5),
            record(2, 6, 3, 0.0),
            record(3, 3, 1, 1.0),
        ],
    ];
    let traces: Vec<_> = runs
        .iter()
        .cloned()
        .map(MetricsTrace::from_records)
        .collect();
    let summaries: Vec<_> = traces.iter().map(|t| summarize(t, 3).unwrap()).collect();
    let avg = average_runs(&traces, &summaries, 3);

    // Short runs are padded with n_total = 3, n_diff = 1, sr = 1.
    let expected = [
        (1.0, 3.0, 7.0 / 3.0, 0.5),
        (2.0, 13.0 / 3.0, 5.0 / 3.0, 0.5),
        (3.0, 3.0, 1.0, 1.0),
    ];
    assert_eq!(avg.trace.len(), 3);
    for (row, (it, total, diff, sr)) in avg.trace.iter().zip(expected) {
        assert_eq!(row.iteration as f64, it);
        assert!((row.n_total - total).abs() < 1e-9);
        assert!((row.n_diff - diff).abs() < 1e-9);
        assert!((row.sr - sr).abs() < 1e-9);
    }
    // Maxima 4, 2, 6: mean 4, sample std 2.
    assert!((avg.summary.n_total_max.mean - 4.0).abs() < 1e-9);
    assert!((avg.summary.n_total_max.std - 2.0).abs() < 1e-9);
    // Only the third run reaches a single shared word (3 words, 1 distinct).
    assert_eq!(avg.summary.converged_runs, 1);
    assert_eq!(avg.summary.n_iter_cvg.count, 1);
    assert!((avg.summary.n_iter_cvg.mean - 3.0).abs() < 1e-9);
}

#[test]
fn two_node_summary_matches_the_memory_log() {
    for seed in 0..50 {
        let net = Network::complete(2);
        let params = GameParams::new(2, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pop = PopulationState::new(2);
        let mut trace = MetricsTrace::default();
        let mut log: Vec<Vec<Vec<WordId>>> = Vec::new();
        for iteration in 1..=20 {
            let out = play_round(&net, &mut pop, &params, &mut rng).unwrap();
            trace.push(snapshot(&pop, &out, iteration));
            log.push(pop.memories().iter().map(|m| m.words().to_vec()).collect());
        }
        let totals: Vec<usize> = log
            .iter()
            .map(|mems| mems.iter().map(Vec::len).sum())
            .collect();
        let diffs: Vec<usize> = log
            .iter()
            .map(|mems| mems.iter().flatten().collect::<BTreeSet<_>>().len())
            .collect();
        let first = log
            .iter()
            .position(|mems| mems.iter().all(|m| m.len() == 1 && m[0] == mems[0][0]))
            .map(|k| k as u64 + 1);

        let summary = summarize(&trace, 2).unwrap();
        assert_eq!(summary.n_total_max as usize, *totals.iter().max().unwrap());
        assert_eq!(summary.n_diff_max as usize, *diffs.iter().max().unwrap());
        assert_eq!(summary.n_iter_cvg, first);
        assert_eq!(summary.converged, first.is_some());
    }
}
