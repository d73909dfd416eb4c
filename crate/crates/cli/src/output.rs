//! Long-format CSV and JSON writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::{Format, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::scenario::RunReport;

pub const CSV_HEADER: [&str; 8] = [
    "time",
    "method",
    "sx",
    "sy",
    "sz",
    "trace_distance_vs_exact",
    "fidelity_vs_exact",
    "is_stroboscopic",
];

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn output_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {err}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BufWriter::new(file))
}

pub fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

pub fn write_csv<W: Write>(report: &RunReport, sink: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv_writer(sink);
    w.write_record(CSV_HEADER)?;
    for series in &report.methods {
        for s in &series.samples {
            w.write_record([
                fmt_float(s.time),
                series.method.label().to_string(),
                fmt_float(s.sx),
                fmt_float(s.sy),
                fmt_float(s.sz),
                fmt_float(s.trace_distance_vs_exact),
                fmt_float(s.fidelity_vs_exact),
                u8::from(s.is_stroboscopic).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Row<'a> {
    time: f64,
    method: &'a str,
    sx: f64,
    sy: f64,
    sz: f64,
    trace_distance_vs_exact: f64,
    fidelity_vs_exact: f64,
    is_stroboscopic: u8,
}

pub fn report_json(report: &RunReport, config: &ScenarioConfig) -> serde_json::Value {
    let rows: Vec<Row> = report
        .methods
        .iter()
        .flat_map(|series| {
            series.samples.iter().map(move |s| Row {
                time: s.time,
                method: series.method.label(),
                sx: s.sx,
                sy: s.sy,
                sz: s.sz,
                trace_distance_vs_exact: s.trace_distance_vs_exact,
                fidelity_vs_exact: s.fidelity_vs_exact,
                is_stroboscopic: u8::from(s.is_stroboscopic),
            })
        })
        .collect();
    let stroboscopic: Vec<_> = report
        .methods
        .iter()
        .flat_map(|series| {
            series.stroboscopic.iter().map(move |r| {
                json!({
                    "method": series.method.label(),
                    "period": r.period,
                    "time": r.time,
                    "trace_distance": r.trace_distance,
                    "fidelity": r.fidelity,
                })
            })
        })
        .collect();
    let methods: Vec<_> = report
        .methods
        .iter()
        .map(|s| {
            json!({
                "method": s.method.label(),
                "residuals": s.residuals,
                "warnings": s.warnings,
                "wall_time_s": s.wall_time_s,
                "max_stroboscopic_deviation": s.max_stroboscopic_deviation(),
            })
        })
        .collect();
    json!({
        "meta": {
            "name": report.name,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "period": report.period,
            "t0": report.t0,
            "initial_bloch": report.initial_bloch,
            "methods": methods,
            "failures": report.failures,
        },
        "rows": rows,
        "stroboscopic": stroboscopic,
    })
}

pub fn write_report(report: &RunReport, config: &ScenarioConfig, format: Format, path: &Path) -> Result<()> {
    let mut sink = create(path)?;
    match format {
        Format::Csv => write_csv(report, &mut sink).map_err(|e| output_error(path, e))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &report_json(report, config))
                .map_err(|e| output_error(path, e))?;
            sink.write_all(b"\n").map_err(|e| output_error(path, e))?;
        }
    }
    sink.flush().map_err(|e| output_error(path, e))
}

/// Writes a JSON value followed by a newline.
pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut sink = create(path)?;
    serde_json::to_writer_pretty(&mut sink, value).map_err(|e| output_error(path, e))?;
    sink.write_all(b"\n").map_err(|e| output_error(path, e))?;
    sink.flush().map_err(|e| output_error(path, e))
}

/// Writes rows of already formatted fields under `header`.
pub fn write_table(header: &[&str], rows: &[Vec<String>], path: &Path) -> Result<()> {
    let sink = create(path)?;
    let mut w = csv_writer(sink);
    w.write_record(header).map_err(|e| output_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| output_error(path, e))?;
    }
    w.flush().map_err(|e| output_error(path, e))
}

/// `dir/stem.ext` becomes `dir/stem_suffix.ext`, with the extension set by `format`.
pub fn output_path(base: &Path, suffix: Option<&str>, format: Format) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match suffix {
        Some(sfx) => format!("{stem}_{sfx}.{}", format.extension()),
        None => format!("{stem}.{}", format.extension()),
    };
    base.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn sweep_paths() {
        let p = output_path(Path::new("out/fig1.csv"), Some("omega-1.5"), Format::Csv);
        assert_eq!(p, Path::new("out/fig1_omega-1.5.csv"));
        let p = output_path(Path::new("run"), None, Format::Json);
        assert_eq!(p, Path::new("run.json"));
    }
}
