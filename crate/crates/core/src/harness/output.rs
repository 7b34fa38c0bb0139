//! CSV and SVG artifacts of the studies.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Metric, ObservableKind};
use super::plot::{line_chart, Axes, Series};
use super::report::{BoundComparison, HistogramRow};
use super::study::{observable_columns, summarize, ResultRow, SeriesRow};
use crate::bounds::BoundRow;
use crate::error::Result;

/// Fixed leading columns of the sweep table.
pub const RESULT_COLUMNS: [&str; 8] =
    ["protocol", "seed", "t", "N", "exponential_count", "cnot_count", "spectral_error", "mixing_bound"];

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

/// Writes rows of strings under `header`.
fn write_table(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// `results.csv`, `summary.csv`, optional `tallies.csv` and charts.
pub fn write_sweep(dir: &Path, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let obs = if cfg.wants(Metric::Observables) { observable_columns(cfg) } else { Vec::new() };
    let mut header = strings(&RESULT_COLUMNS);
    header.extend(obs.iter().cloned());
    let path = dir.join("results.csv");
    write_table(
        &path,
        &header,
        rows.iter().map(|r| {
            let mut rec = vec![
                r.protocol.name().to_string(),
                r.seed.to_string(),
                num(r.t),
                r.n.to_string(),
                r.exponential_count.to_string(),
                r.cnot_count.to_string(),
                opt(r.spectral_error),
                opt(r.mixing_bound),
            ];
            rec.extend(r.observables.iter().map(|v| num(*v)));
            rec
        }),
    )?;
    written.push(path);

    let summary = summarize(rows);
    let path = dir.join("summary.csv");
    write_table(
        &path,
        &strings(&[
            "protocol",
            "t",
            "N",
            "trials",
            "mean_exponential_count",
            "mean_spectral_error",
            "stderr_spectral_error",
            "mixing_bound",
        ]),
        summary.iter().map(|s| {
            vec![
                s.protocol.name().to_string(),
                num(s.t),
                s.n.to_string(),
                s.trials.to_string(),
                num(s.mean_exponential_count),
                opt(s.mean_spectral_error),
                opt(s.stderr_spectral_error),
                opt(s.mixing_bound),
            ]
        }),
    )?;
    written.push(path);

    if cfg.wants(Metric::Tallies) {
        let path = dir.join("tallies.csv");
        write_table(
            &path,
            &strings(&["protocol", "seed", "t", "N", "exponential_count", "cnot_count", "rz_count", "clifford_count", "depth"]),
            rows.iter().map(|r| {
                vec![
                    r.protocol.name().to_string(),
                    r.seed.to_string(),
                    num(r.t),
                    r.n.to_string(),
                    r.tally.exponential_count.to_string(),
                    r.tally.cnot_count.to_string(),
                    r.tally.rz_count.to_string(),
                    r.tally.single_qubit_clifford_count.to_string(),
                    r.tally.depth.to_string(),
                ]
            }),
        )?;
        written.push(path);
    }

    if cfg.outputs.plots && cfg.wants(Metric::SpectralError) {
        for (k, &t) in cfg.protocol.times.iter().enumerate() {
            let series: Vec<Series> = cfg
                .protocol
                .names
                .iter()
                .map(|p| Series {
                    label: p.name().into(),
                    points: summary
                        .iter()
                        .filter(|s| s.protocol == *p && s.t == t)
                        .filter_map(|s| Some((s.mean_exponential_count, s.mean_spectral_error?)))
                        .collect(),
                })
                .collect();
            let svg = line_chart(
                &format!("mean spectral error, t = {t}"),
                "exponential count",
                "spectral error",
                Axes { log_x: true, log_y: true },
                &series,
            );
            let path = dir.join(format!("spectral_error_{k}.svg"));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `timeseries.csv` and, when plotting, one chart per observable.
pub fn write_series(dir: &Path, cfg: &ExperimentConfig, rows: &[SeriesRow]) -> Result<Vec<PathBuf>> {
    let mut header = strings(&["protocol", "seed", "t_max", "N", "checkpoint", "time"]);
    header.extend(observable_columns(cfg));
    let path = dir.join("timeseries.csv");
    write_table(
        &path,
        &header,
        rows.iter().map(|r| {
            let mut rec = vec![
                r.protocol.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                num(r.t_max),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.checkpoint.to_string(),
                num(r.time),
            ];
            rec.extend(r.values.iter().map(|v| num(*v)));
            rec
        }),
    )?;
    let mut written = vec![path];
    if cfg.outputs.plots {
        // first trial of each protocol against the exact curve, first time only
        let t_max = cfg.protocol.times[0];
        let first_seed = cfg.trials.base_seed;
        for (j, kind) in cfg.observables.names.iter().enumerate() {
            let mut labels: Vec<String> = Vec::new();
            for r in rows {
                let key = match r.n {
                    Some(n) => format!("{} N={n}", r.protocol),
                    None => r.protocol.clone(),
                };
                if r.t_max == t_max && r.seed.is_none_or(|s| s == first_seed) && !labels.contains(&key) {
                    labels.push(key);
                }
            }
            let series: Vec<Series> = labels
                .iter()
                .map(|label| Series {
                    label: label.clone(),
                    points: rows
                        .iter()
                        .filter(|r| {
                            r.t_max == t_max
                                && r.seed.is_none_or(|s| s == first_seed)
                                && match r.n {
                                    Some(n) => *label == format!("{} N={n}", r.protocol),
                                    None => *label == r.protocol,
                                }
                        })
                        .map(|r| (r.time, r.values[j]))
                        .collect(),
                })
                .collect();
            let log_y = matches!(kind, ObservableKind::StateError | ObservableKind::EnergyError);
            let svg = line_chart(kind.name(), "time", kind.name(), Axes { log_x: false, log_y }, &series);
            let path = dir.join(format!("{}.svg", kind.name()));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn write_histogram(path: &Path, rows: &[HistogramRow]) -> Result<()> {
    write_table(
        path,
        &strings(&["index", "label", "count", "expected"]),
        rows.iter().map(|r| vec![r.index.to_string(), r.label.clone(), r.count.to_string(), num(r.expected)]),
    )
}

pub fn write_bound_comparison(path: &Path, rows: &[BoundComparison]) -> Result<()> {
    write_table(
        path,
        &strings(&["protocol", "t", "N", "measured", "bound", "ratio", "within_bound", "kind"]),
        rows.iter().map(|r| {
            vec![
                r.protocol.name().to_string(),
                num(r.t),
                r.n.to_string(),
                num(r.measured),
                num(r.bound),
                num(r.ratio),
                r.within_bound.map(|b| b.to_string()).unwrap_or_default(),
                r.kind.to_string(),
            ]
        }),
    )
}

/// Closed-form rows, each tagged with the query's `t` and `N`.
pub fn write_bounds_table(path: &Path, rows: &[(f64, usize, BoundRow)]) -> Result<()> {
    write_table(
        path,
        &strings(&["t", "N", "protocol", "formula", "value", "kind"]),
        rows.iter().map(|(t, n, r)| {
            vec![num(*t), n.to_string(), r.protocol.clone(), r.formula.clone(), num(r.value), r.kind.to_string()]
        }),
    )
}
