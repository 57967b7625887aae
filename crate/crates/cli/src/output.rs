//! CSV and JSON-lines writers.

use std::io::Write;

use serde::Serialize;

use crate::config::{OutputFormat, Quantity, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::sweep::Row;

pub const CSV_HEADER: [&str; 9] = [
    "N", "gamma", "g", "beta", "method", "quantity", "value", "step", "error",
];

pub fn version_line() -> String {
    format!("xychain-cli {}", env!("CARGO_PKG_VERSION"))
}

/// Seventeen significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn step_note(config: &SweepConfig) -> String {
    match config.step {
        Some(h) => format!("stencil step: {}", fmt_float(h)),
        None => {
            "stencil step: default (field 1e-3, beta max(1e-3, 1e-4*beta)); 0 marks closed forms"
                .to_string()
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::io("output", std::io::Error::other(e.to_string()))
}

/// Metadata lines, each starting with `#`.
pub fn metadata_lines(config: &SweepConfig) -> Vec<String> {
    let mut lines = vec![
        version_line(),
        "command: sweep".to_string(),
        step_note(config),
    ];
    if config.quantity == Quantity::Z {
        lines.push("value for quantity z is ln Z".to_string());
    }
    lines.push("config:".to_string());
    lines.extend(config.to_toml().lines().map(|l| format!("  {l}")));
    lines.into_iter().map(|l| format!("# {l}")).collect()
}

pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[Row], mut out: W) -> CliResult<()> {
    for line in metadata_lines(config) {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        let (value, step, error) = match &r.result {
            Ok((v, h)) => (fmt_float(*v), fmt_float(*h), String::new()),
            Err(e) => (String::new(), String::new(), e.clone()),
        };
        w.write_record([
            r.n.to_string(),
            fmt_float(r.gamma),
            fmt_float(r.g),
            fmt_float(r.beta),
            r.method.name().to_string(),
            r.quantity.name().to_string(),
            value,
            step,
            error,
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(rename = "N")]
    n: usize,
    gamma: f64,
    g: f64,
    beta: f64,
    method: &'a str,
    quantity: &'a str,
    value: Option<f64>,
    step: Option<f64>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonMeta<'a> {
    version: String,
    command: &'a str,
    step: String,
    config: &'a SweepConfig,
}

/// First line `{"metadata": ...}`, then one object per row.
pub fn write_jsonl<W: Write>(config: &SweepConfig, rows: &[Row], mut out: W) -> CliResult<()> {
    let meta = serde_json::json!({
        "metadata": JsonMeta {
            version: version_line(),
            command: "sweep",
            step: step_note(config),
            config,
        }
    });
    writeln!(out, "{meta}").map_err(io_err)?;
    for r in rows {
        let (value, step, error) = match &r.result {
            Ok((v, h)) => (Some(*v), Some(*h), None),
            Err(e) => (None, None, Some(e.as_str())),
        };
        let row = JsonRow {
            n: r.n,
            gamma: r.gamma,
            g: r.g,
            beta: r.beta,
            method: r.method.name(),
            quantity: r.quantity.name(),
            value: value.filter(|v| v.is_finite()),
            step,
            error,
        };
        let line = serde_json::to_string(&row).map_err(io_err)?;
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_rows<W: Write>(config: &SweepConfig, rows: &[Row], out: W) -> CliResult<()> {
    match config.format {
        OutputFormat::Csv => write_csv(config, rows, out),
        OutputFormat::Jsonl => write_jsonl(config, rows, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MethodName, RawConfig};
    use crate::grid::Grid;

    fn config(format: &str) -> SweepConfig {
        SweepConfig::try_from(RawConfig {
            quantity: Some("z".into()),
            methods: Some(vec!["exact".into()]),
            n: Some(Grid::Value(4.0)),
            g: Some(Grid::Value(1.0)),
            beta: Some(Grid::Value(1.0)),
            format: Some(format.into()),
            ..RawConfig::default()
        })
        .unwrap()
    }

    fn rows() -> Vec<Row> {
        vec![
            Row {
                n: 4,
                gamma: 1.0,
                g: 1.0,
                beta: 1.0,
                method: MethodName::Exact,
                quantity: Quantity::Z,
                result: Ok((0.1, 0.0)),
            },
            Row {
                n: 4,
                gamma: 1.0,
                g: 1.0,
                beta: 1.0,
                method: MethodName::Exact,
                quantity: Quantity::Z,
                result: Err("bad, \"quoted\"".into()),
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&config("csv"), &rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], CSV_HEADER.join(","));
        assert_eq!(
            body[1],
            "4,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,exact,z,1.0000000000000001e-1,0.0000000000000000e0,"
        );
        assert!(body[2].ends_with(",,,\"bad, \"\"quoted\"\"\""));
        assert!(text.lines().any(|l| l == "# value for quantity z is ln Z"));
    }

    #[test]
    fn jsonl_layout() {
        let mut buf = Vec::new();
        write_jsonl(&config("jsonl"), &rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert!(lines[0]["metadata"]["version"]
            .as_str()
            .unwrap()
            .starts_with("xychain-cli"));
        assert_eq!(lines[1]["value"], 0.1);
        assert_eq!(lines[1]["N"], 4);
        assert!(lines[2]["value"].is_null());
        assert_eq!(lines[2]["error"], "bad, \"quoted\"");
    }
}
