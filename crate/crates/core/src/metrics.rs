//! Per-iteration traces, run summaries and averaging across repetitions.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{PopulationState, RoundOutcome, WordId};
use crate::error::{Error, Result};

/// Column header shared by per-run and averaged trace files.
pub const TRACE_HEADER: [&str; 6] = [
    "iteration",
    "n_total",
    "n_diff",
    "sr",
    "group_size",
    "n_transmitted",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub n_total: u64,
    pub n_diff: u64,
    pub sr: f64,
    pub group_size: u64,
    pub n_transmitted: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTrace {
    records: Vec<TraceRecord>,
}

impl MetricsTrace {
    pub fn from_records(records: Vec<TraceRecord>) -> Self {
        MetricsTrace { records }
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| csv_error(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(MetricsTrace {
            records: read_trace_rows(file, path)?,
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Schema {
        path: path.to_owned(),
        reason: e.to_string(),
    }
}

/// Reads trace rows after checking the header matches [`TRACE_HEADER`].
pub fn read_trace_rows<R: Read, T: serde::de::DeserializeOwned>(
    input: R,
    path: &Path,
) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Schema {
            path: path.to_owned(),
            reason: format!(
                "expected header `{}`, found `{}`",
                TRACE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    reader
        .deserialize()
        .collect::<csv::Result<Vec<T>>>()
        .map_err(|e| csv_error(path, e))
}

/// Population counts after a completed round.
pub fn snapshot(pop: &PopulationState, outcome: &RoundOutcome, iteration: u64) -> TraceRecord {
    TraceRecord {
        iteration,
        n_total: pop.n_total() as u64,
        n_diff: pop.n_diff() as u64,
        sr: outcome.sr,
        group_size: outcome.group_size as u64,
        n_transmitted: outcome.transmitted.len() as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_total_max: u64,
    pub n_diff_max: u64,
    /// First iteration at which every agent held the same single word.
    pub n_iter_cvg: Option<u64>,
    pub converged_word: Option<WordId>,
    pub converged: bool,
    /// Rounds played.
    pub iterations: u64,
}

/// Maxima over the trace and the convergence iteration for `m` agents.
/// The converged word is not recoverable from counts and is left empty.
pub fn summarize(trace: &MetricsTrace, m: usize) -> Result<RunSummary> {
    let records = trace.records();
    let last = records.last().ok_or(Error::EmptyTrace)?;
    let n_iter_cvg = records
        .iter()
        .find(|r| r.n_diff == 1 && r.n_total == m as u64)
        .map(|r| r.iteration);
    Ok(RunSummary {
        n_total_max: records.iter().map(|r| r.n_total).max().unwrap(),
        n_diff_max: records.iter().map(|r| r.n_diff).max().unwrap(),
        n_iter_cvg,
        converged_word: None,
        converged: n_iter_cvg.is_some(),
        iterations: last.iteration,
    })
}

/// Statistics of an empty set are NaN, which JSON stores as `null`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    #[serde(deserialize_with = "nan_if_null")]
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    #[serde(deserialize_with = "nan_if_null")]
    pub std: f64,
    pub count: usize,
}

fn nan_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl MeanStd {
    /// Sums in sorted order, so the result does not depend on input order.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        let count = v.len();
        if count == 0 {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
                count,
            };
        }
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / count as f64;
        let std = if count < 2 {
            0.0
        } else {
            let mut sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
            sq.sort_by(f64::total_cmp);
            (sq.iter().sum::<f64>() / (count - 1) as f64).sqrt()
        };
        MeanStd { mean, std, count }
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.std / (self.count as f64).sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedRecord {
    pub iteration: u64,
    pub n_total: f64,
    pub n_diff: f64,
    pub sr: f64,
    pub group_size: f64,
    pub n_transmitted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub runs: usize,
    pub converged_runs: usize,
    pub n_total_max: MeanStd,
    pub n_diff_max: MeanStd,
    /// Over converged runs only.
    pub n_iter_cvg: MeanStd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AveragedRuns {
    pub trace: Vec<AveragedRecord>,
    pub summary: SummaryStats,
}

impl AveragedRuns {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(TRACE_HEADER)?;
        for r in &self.trace {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| csv_error(path, e))
    }
}

/// Per-iteration means across runs on `m` agents.
///
/// Runs that ended early are padded with the absorbing values
/// (`n_total = m`, `n_diff = 1`, `sr = 1`). Group size and transmitted-word
/// count are averaged over the runs that actually played that iteration.
pub fn average_runs(traces: &[MetricsTrace], summaries: &[RunSummary], m: usize) -> AveragedRuns {
    let len = traces.iter().map(MetricsTrace::len).max().unwrap_or(0);
    let mut trace = Vec::with_capacity(len);
    for t in 0..len {
        let at = |f: &dyn Fn(&TraceRecord) -> f64, pad: f64| {
            MeanStd::of(traces.iter().map(|tr| tr.records.get(t).map_or(pad, f))).mean
        };
        let live = |f: &dyn Fn(&TraceRecord) -> f64| {
            MeanStd::of(traces.iter().filter_map(|tr| tr.records.get(t).map(f))).mean
        };
        trace.push(AveragedRecord {
            iteration: t as u64 + 1,
            n_total: at(&|r| r.n_total as f64, m as f64),
            n_diff: at(&|r| r.n_diff as f64, 1.0),
            sr: at(&|r| r.sr, 1.0),
            group_size: live(&|r| r.group_size as f64),
            n_transmitted: live(&|r| r.n_transmitted as f64),
        });
    }
    let summary = SummaryStats {
        runs: summaries.len(),
        converged_runs: summaries.iter().filter(|s| s.converged).count(),
        n_total_max: MeanStd::of(summaries.iter().map(|s| s.n_total_max as f64)),
        n_diff_max: MeanStd::of(summaries.iter().map(|s| s.n_diff_max as f64)),
        n_iter_cvg: MeanStd::of(
            summaries
                .iter()
                .filter_map(|s| s.n_iter_cvg.map(|x| x as f64)),
        ),
    };
    AveragedRuns { trace, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::WordId;

    fn rec(iteration: u64, n_total: u64, n_diff: u64, sr: f64) -> TraceRecord {
        TraceRecord {
            iteration,
            n_total,
            n_diff,
            sr,
            group_size: 3,
            n_transmitted: 2,
        }
    }

    fn outcome() -> RoundOutcome {
        RoundOutcome {
            seed: 0,
            group_size: 2,
            transmitted: vec![(WordId(1), 1)],
            successful_members: 1,
            sr: 0.5,
        }
    }

    #[test]
    fn snapshot_counts() {
        let w = WordId;
        let pop = PopulationState::from_memories(vec![vec![w(1)], vec![w(1), w(2)]], 3).unwrap();
        let r = snapshot(&pop, &outcome(), 4);
        assert_eq!((r.n_total, r.n_diff, r.sr, r.iteration), (3, 2, 0.5, 4));

        let empty = snapshot(&PopulationState::new(5), &outcome(), 1);
        assert_eq!((empty.n_total, empty.n_diff), (0, 0));

        let done = PopulationState::from_memories(vec![vec![w(3)]; 1000], 4).unwrap();
        let r = snapshot(&done, &outcome(), 9);
        assert_eq!((r.n_total, r.n_diff), (1000, 1));
    }

    #[test]
    fn summary_maxima_and_convergence() {
        let t = MetricsTrace::from_records(vec![
            rec(1, 5, 3, 0.0),
            rec(2, 9, 4, 0.2),
            rec(3, 7, 2, 0.5),
            rec(4, 4, 1, 1.0),
        ]);
        let s = summarize(&t, 4).unwrap();
        assert_eq!((s.n_total_max, s.n_diff_max), (9, 4));
        assert_eq!(s.n_iter_cvg, Some(4));
        assert!(s.converged);

        let open = MetricsTrace::from_records(vec![rec(1, 2, 2, 0.0), rec(2, 3, 2, 0.0)]);
        let s = summarize(&open, 4).unwrap();
        assert!(!s.converged);
        assert_eq!(s.n_iter_cvg, None);
        assert_eq!(s.iterations, 2);

        assert!(matches!(
            summarize(&MetricsTrace::default(), 4),
            Err(Error::EmptyTrace)
        ));
    }

    #[test]
    fn averaging_pads_short_runs() {
        let short = MetricsTrace::from_records((1..=10).map(|i| rec(i, 4, 1, 1.0)).collect());
        let long = MetricsTrace::from_records((1..=20).map(|i| rec(i, 8, 3, 0.5)).collect());
        let s = [summarize(&short, 4).unwrap(), summarize(&long, 4).unwrap()];
        let avg = average_runs(&[short, long], &s, 4);
        assert_eq!(avg.trace.len(), 20);
        let last = avg.trace[19];
        assert_eq!((last.n_total, last.n_diff, last.sr), (6.0, 2.0, 0.75));
        assert_eq!(last.group_size, 3.0);
        assert_eq!(avg.summary.converged_runs, 1);
        assert_eq!(avg.summary.n_iter_cvg.count, 1);
    }

    #[test]
    fn averaging_identical_runs_is_identity() {
        let t = MetricsTrace::from_records(vec![rec(1, 3, 2, 0.25), rec(2, 2, 1, 1.0)]);
        let s = summarize(&t, 2).unwrap();
        let avg = average_runs(&vec![t.clone(); 20], &vec![s.clone(); 20], 2);
        for (a, r) in avg.trace.iter().zip(t.records()) {
            assert_eq!(
                (a.n_total, a.n_diff, a.sr),
                (r.n_total as f64, r.n_diff as f64, r.sr)
            );
        }
        assert_eq!(avg.summary.n_total_max.std, 0.0);
        assert_eq!(avg.summary.n_iter_cvg.mean, 2.0);
    }

    #[test]
    fn mean_std_matches_hand_arithmetic() {
        // Values 2, 4, 9: mean 5, squared deviations 9 + 1 + 16 = 26, sample var 13.
        let ms = MeanStd::of([9.0, 2.0, 4.0]);
        assert!((ms.mean - 5.0).abs() < 1e-12);
        assert!((ms.std - 13f64.sqrt()).abs() < 1e-12);
        assert_eq!(MeanStd::of([7.0]).std, 0.0);
        assert!(MeanStd::of([]).mean.is_nan());
    }

    #[test]
    fn csv_header_is_checked() {
        let t = MetricsTrace::from_records(vec![rec(1, 3, 2, 0.25)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,n_total,n_diff,sr,group_size,n_transmitted\n"));
        let back: Vec<TraceRecord> = read_trace_rows(&buf[..], Path::new("t.csv")).unwrap();
        assert_eq!(back, t.records());

        let bad = "iteration,total\n1,2\n";
        assert!(matches!(
            read_trace_rows::<_, TraceRecord>(bad.as_bytes(), Path::new("bad.csv")),
            Err(Error::Schema { .. })
        ));
    }
}
