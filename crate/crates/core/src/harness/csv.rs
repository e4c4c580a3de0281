//! Trace tables as CSV.
//!
//! One row per recorded iteration, `method,trial,iteration,error,residual,
//! elapsed_ns`. Floats are written with 17 significant digits so they
//! round-trip bit for bit; the error field is empty when no solution was
//! known. The timing column is written as zero unless explicitly enabled,
//! keeping default outputs byte-identical across machines and runs.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::TraceGroup;

pub const TRACE_HEADER: &str = "method,trial,iteration,error,residual,elapsed_ns";

/// 17 significant digits: every finite `f64` parses back to the same bits.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes trace groups to one CSV file. Group labels fill the method
/// column; trials are numbered per group in order.
pub fn export_traces_csv(
    groups: &[TraceGroup],
    path: impl AsRef<Path>,
    include_timing: bool,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for group in groups {
        for (trial, trace) in group.traces.iter().enumerate() {
            for rec in &trace.records {
                let error = rec.error.map(fmt17).unwrap_or_default();
                let elapsed = if include_timing { rec.elapsed_ns } else { 0 };
                out.push_str(&format!(
                    "{},{trial},{},{error},{},{elapsed}\n",
                    group.label,
                    rec.iteration,
                    fmt17(rec.residual),
                ));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// One imported trace row, minus the grouping columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub error: Option<f64>,
    pub residual: f64,
    pub elapsed_ns: u64,
}

/// All trials of one method label, in file order.
#[derive(Debug, Clone)]
pub struct CurveGroup {
    pub label: String,
    pub trials: Vec<Vec<TracePoint>>,
}

fn field_error(offset: u64, line_no: usize, what: &str) -> Error {
    Error::Format {
        offset,
        message: format!("line {line_no}: {what}"),
    }
}

/// Reads a trace CSV back. Groups appear in order of first appearance;
/// so do trials within a group. Errors carry the byte offset of the
/// offending line.
pub fn import_traces_csv(path: impl AsRef<Path>) -> Result<Vec<CurveGroup>> {
    let text = fs::read_to_string(path)?;
    let mut groups: Vec<CurveGroup> = Vec::new();
    let mut group_index: HashMap<String, usize> = HashMap::new();
    let mut trial_index: Vec<HashMap<usize, usize>> = Vec::new();
    let mut offset = 0u64;
    for (line_no, line) in text.split('\n').enumerate() {
        let line_offset = offset;
        offset += line.len() as u64 + 1;
        if line_no == 0 {
            if line != TRACE_HEADER {
                return Err(field_error(0, 1, "missing trace header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(field_error(
                line_offset,
                line_no + 1,
                &format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let label = fields[0];
        let trial: usize = fields[1]
            .parse()
            .map_err(|_| field_error(line_offset, line_no + 1, "bad trial number"))?;
        let iteration: usize = fields[2]
            .parse()
            .map_err(|_| field_error(line_offset, line_no + 1, "bad iteration number"))?;
        let error = if fields[3].is_empty() {
            None
        } else {
            Some(
                fields[3]
                    .parse::<f64>()
                    .map_err(|_| field_error(line_offset, line_no + 1, "bad error value"))?,
            )
        };
        let residual: f64 = fields[4]
            .parse()
            .map_err(|_| field_error(line_offset, line_no + 1, "bad residual value"))?;
        let elapsed_ns: u64 = fields[5]
            .parse()
            .map_err(|_| field_error(line_offset, line_no + 1, "bad timing value"))?;

        let gi = match group_index.get(label) {
            Some(&gi) => gi,
            None => {
                groups.push(CurveGroup {
                    label: label.to_string(),
                    trials: Vec::new(),
                });
                trial_index.push(HashMap::new());
                group_index.insert(label.to_string(), groups.len() - 1);
                groups.len() - 1
            }
        };
        let ti = match trial_index[gi].get(&trial) {
            Some(&ti) => ti,
            None => {
                groups[gi].trials.push(Vec::new());
                trial_index[gi].insert(trial, groups[gi].trials.len() - 1);
                groups[gi].trials.len() - 1
            }
        };
        groups[gi].trials[ti].push(TracePoint {
            iteration,
            error,
            residual,
            elapsed_ns,
        });
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{Method, PhaseTimings, SolveTrace, TerminalStatus, TraceRecord};

    fn record(iteration: usize, error: Option<f64>, residual: f64) -> TraceRecord {
        TraceRecord {
            iteration,
            row: if iteration == 0 { None } else { Some(0) },
            error,
            residual,
            elapsed_ns: 1234,
            skipped: false,
        }
    }

    fn group() -> TraceGroup {
        TraceGroup {
            label: "rk".to_string(),
            traces: vec![SolveTrace {
                method: Method::Rk,
                records: vec![record(0, Some(1.0), 2.0), record(1, Some(0.5), 0.25)],
                status: TerminalStatus::BudgetExhausted,
                timings: PhaseTimings::default(),
            }],
            preprocess_ns: 0,
        }
    }

    fn temp_path(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("kaczmarz-csv-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn seventeen_digit_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn export_produces_the_exact_expected_bytes() {
        let path = temp_path("golden.csv");
        export_traces_csv(&[group()], &path, false).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let expected = "method,trial,iteration,error,residual,elapsed_ns\n\
                        rk,0,0,1.0000000000000000e0,2.0000000000000000e0,0\n\
                        rk,0,1,5.0000000000000000e-1,2.5000000000000000e-1,0\n";
        assert_eq!(text, expected);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn timing_column_is_zero_unless_enabled() {
        let path = temp_path("timing.csv");
        export_traces_csv(&[group()], &path, true).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains(",1234\n"));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn empty_groups_write_only_the_header() {
        let path = temp_path("empty.csv");
        export_traces_csv(
            &[TraceGroup {
                label: "rk".into(),
                traces: vec![],
                preprocess_ns: 0,
            }],
            &path,
            false,
        )
        .unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            format!("{TRACE_HEADER}\n")
        );
        fs::remove_file(&path).ok();
    }

    #[test]
    fn import_round_trips_export() {
        let path = temp_path("roundtrip.csv");
        let mut g = group();
        g.traces.push(SolveTrace {
            method: Method::Rk,
            records: vec![record(0, None, 3.5)],
            status: TerminalStatus::Converged,
            timings: PhaseTimings::default(),
        });
        export_traces_csv(&[g], &path, false).unwrap();
        let back = import_traces_csv(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].label, "rk");
        assert_eq!(back[0].trials.len(), 2);
        assert_eq!(
            back[0].trials[0],
            vec![
                TracePoint {
                    iteration: 0,
                    error: Some(1.0),
                    residual: 2.0,
                    elapsed_ns: 0
                },
                TracePoint {
                    iteration: 1,
                    error: Some(0.5),
                    residual: 0.25,
                    elapsed_ns: 0
                },
            ]
        );
        assert_eq!(back[0].trials[1][0].error, None);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn import_rejects_wrong_header() {
        let path = temp_path("badheader.csv");
        fs::write(&path, "method,trial\nrk,0\n").unwrap();
        assert!(matches!(
            import_traces_csv(&path),
            Err(Error::Format { offset: 0, .. })
        ));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn import_reports_the_offset_of_a_bad_line() {
        let path = temp_path("badline.csv");
        let header_len = TRACE_HEADER.len() as u64 + 1;
        let good = "rk,0,0,,1.0,0\n";
        fs::write(
            &path,
            format!("{TRACE_HEADER}\n{good}rk,0,not-a-number,,1.0,0\n"),
        )
        .unwrap();
        match import_traces_csv(&path) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, header_len + good.len() as u64);
                assert!(message.contains("line 3"), "{message}");
            }
            other => panic!("expected a format error, got {other:?}"),
        }
        fs::remove_file(&path).ok();
    }

    #[test]
    fn import_rejects_short_rows() {
        let path = temp_path("short.csv");
        fs::write(&path, format!("{TRACE_HEADER}\nrk,0,0,1.0\n")).unwrap();
        assert!(matches!(import_traces_csv(&path), Err(Error::Format { .. })));
        fs::remove_file(&path).ok();
    }
}
