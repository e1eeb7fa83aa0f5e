use std::fs::File;
use std::path::Path;

use super::runner::{ExperimentResult, Failure, RecordRow};
use crate::error::{Error, Result};
use crate::eval::{summarize, ScoreRecord};
use crate::stepfn::PredictiveSystem;

pub const RECORDS_HEADER: [&str; 7] = ["method", "replication", "level", "covered", "width", "interval_score", "thickness"];

/// Seventeen significant digits; `inf`, `-inf` and `NaN` for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn write_all<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_records(path: &Path, rows: &[RecordRow]) -> Result<()> {
    write_all(
        path,
        &RECORDS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.method.clone(),
                r.replication.to_string(),
                fmt_f64(r.level),
                match r.covered {
                    Some(true) => "1".into(),
                    Some(false) => "0".into(),
                    None => "NA".into(),
                },
                fmt_f64(r.width),
                fmt_f64(r.interval_score),
                fmt_f64(r.thickness),
            ]
        }),
    )
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(RECORDS_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let bad = |line: usize, what: &str| Error::Parse {
        path: path.to_path_buf(),
        message: format!("record {line}: bad {what}"),
    };
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let num = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(k + 1, what));
        out.push(RecordRow {
            method: rec[0].to_string(),
            replication: rec[1].parse().map_err(|_| bad(k + 1, "replication"))?,
            level: num(2, "level")?,
            covered: match &rec[3] {
                "1" => Some(true),
                "0" => Some(false),
                "NA" => None,
                _ => return Err(bad(k + 1, "covered flag")),
            },
            width: num(4, "width")?,
            interval_score: num(5, "interval_score")?,
            thickness: num(6, "thickness")?,
        });
    }
    Ok(out)
}

pub fn write_failures(path: &Path, failures: &[Failure]) -> Result<()> {
    write_all(
        path,
        &["method", "replication", "reason"],
        failures.iter().map(|f| vec![f.method.clone(), f.replication.to_string(), f.reason.clone()]),
    )
}

/// Per-method, per-level coverage, mean width, mean interval score and the
/// fraction of intervals with an infinite endpoint.
pub fn write_summary(path: &Path, result: &ExperimentResult) -> Result<()> {
    let mut lines = Vec::new();
    for m in &result.methods {
        let recs: Vec<ScoreRecord> = result
            .rows_for(m)
            .filter_map(|r| {
                r.covered.map(|covered| ScoreRecord {
                    level: r.level,
                    covered,
                    width: r.width,
                    interval_score: r.interval_score,
                })
            })
            .collect();
        for s in summarize(&recs) {
            lines.push(vec![
                m.clone(),
                fmt_f64(s.level),
                fmt_f64(s.coverage),
                fmt_f64(s.mean_width),
                fmt_f64(s.mean_interval_score),
                fmt_f64(s.defective_fraction),
                s.count.to_string(),
            ]);
        }
    }
    write_all(
        path,
        &["method", "level", "coverage", "mean_width", "mean_interval_score", "defective_fraction", "replications"],
        lines,
    )
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn write_thickness_summary(path: &Path, result: &ExperimentResult) -> Result<()> {
    let lines = result.methods.iter().map(|m| {
        let t = result.thicknesses(m);
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let min = t.iter().copied().fold(f64::INFINITY, f64::min);
        let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vec![m.clone(), fmt_f64(mean), fmt_f64(median(&t)), fmt_f64(min), fmt_f64(max), t.len().to_string()]
    });
    write_all(path, &["method", "mean", "median", "min", "max", "replications"], lines)
}

/// `y,lower,upper` at every grid point.
pub fn emit_bounds_csv(ps: &PredictiveSystem, y_grid: &[f64], path: &Path) -> Result<()> {
    write_all(
        path,
        &["y", "lower", "upper"],
        y_grid
            .iter()
            .map(|&y| vec![fmt_f64(y), fmt_f64(ps.lower().eval(y)), fmt_f64(ps.upper().eval(y))]),
    )
}

/// Writes records, summary, thickness summary and failures into `dir`.
pub fn emit_all(dir: &Path, result: &ExperimentResult) -> Result<()> {
    write_records(&dir.join("records.csv"), &result.rows)?;
    write_summary(&dir.join("summary.csv"), result)?;
    write_thickness_summary(&dir.join("thickness.csv"), result)?;
    write_failures(&dir.join("failures.csv"), &result.failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rows = vec![
            RecordRow {
                method: "lspm".into(),
                replication: 0,
                level: 0.55,
                covered: Some(true),
                width: 1.0 / 3.0,
                interval_score: f64::INFINITY,
                thickness: 1.0 / 101.0,
            },
            RecordRow {
                method: "krrpm".into(),
                replication: 7,
                level: 0.95,
                covered: None,
                width: f64::NAN,
                interval_score: f64::NAN,
                thickness: f64::NAN,
            },
        ];
        write_records(&p, &rows).unwrap();
        let back = read_records(&p).unwrap();
        assert!(rows.iter().zip(&back).all(|(a, b)| a.same_as(b)));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("method,replication,level,covered,width,interval_score,thickness\n"));
    }

    #[test]
    fn empty_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_records(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), RECORDS_HEADER.join(",") + "\n");
        assert!(read_records(&p).unwrap().is_empty());
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = write_records(Path::new("/proc/definitely/not/here.csv"), &[]).unwrap_err();
        assert!(err.to_string().contains("/proc/definitely/not/here.csv"));
    }
}
