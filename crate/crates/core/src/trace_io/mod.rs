use std::io::{Read, Write};
use std::path::Path;

use num_traits::Signed;
use thiserror::Error;

pub use crate::evaluator::{MonitorReport, Trace, TraceEvent, Verdict};
use crate::ast::Specification;
use crate::evaluator::{format_params, Value};
use crate::time::{format_rational, parse_decimal, Rational, MAX_PERIOD_PART};
use crate::value_types::ValueTyping;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("the first column must be `time`")]
    MissingTimeColumn,
    #[error("column `{0}` is not an input of the specification")]
    UnknownColumn(String),
    #[error("row {row}: time {time} does not come after the previous row")]
    NonMonotoneTime { row: u64, time: String },
    #[error("row {row}, column `{column}`: cannot parse `{text}`")]
    ValueParseError { row: u64, column: String, text: String },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Largest accepted timestamp in seconds. Together with the bounded
/// denominator this keeps deadline arithmetic exact in 128 bits.
const MAX_TIME: i128 = 1_000_000_000_000;

fn parse_time(text: &str) -> Option<Rational> {
    let t = parse_decimal(text)?;
    (!t.is_negative() && t.abs() <= Rational::from_integer(MAX_TIME) && *t.denom() <= MAX_PERIOD_PART).then_some(t)
}

/// Reads a trace: header `time,<input>,...`, one event per row, empty cells
/// for inputs without a value. Rows without any value are skipped.
pub fn read_csv_trace<R: Read>(reader: R, spec: &Specification, types: &ValueTyping) -> Result<Trace, TraceError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some("time") {
        return Err(TraceError::MissingTimeColumn);
    }
    let mut columns = Vec::new();
    for name in headers.iter().skip(1) {
        let name = name.trim();
        let i = spec.inputs.iter().position(|s| s.name == name).ok_or_else(|| TraceError::UnknownColumn(name.to_string()))?;
        columns.push((i, name.to_string()));
    }
    let mut trace = Trace::default();
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let row = record.position().map_or(0, |p| p.line());
        let bad = |column: &str, text: &str| TraceError::ValueParseError { row, column: column.to_string(), text: text.to_string() };
        let time_text = record.get(0).unwrap_or("");
        let time = parse_time(time_text).ok_or_else(|| bad("time", time_text))?;
        let mut event = TraceEvent { time, values: Default::default() };
        for ((i, name), cell) in columns.iter().zip(record.iter().skip(1)) {
            if cell.is_empty() {
                continue;
            }
            let ty = &types.inputs[*i];
            let v = if ty.has_top() { Some(Value::Str(cell.to_string())) } else { Value::parse(cell, ty) };
            event.values.insert(*i, v.ok_or_else(|| bad(name, cell))?);
        }
        if event.values.is_empty() {
            continue;
        }
        if let Some(prev) = trace.events.last() {
            if prev.time >= time {
                return Err(TraceError::NonMonotoneTime { row, time: format_rational(&time) });
            }
        }
        trace.events.push(event);
    }
    Ok(trace)
}

pub fn read_csv_trace_file(path: &Path, spec: &Specification, types: &ValueTyping) -> Result<Trace, TraceError> {
    read_csv_trace(std::fs::File::open(path)?, spec, types)
}

/// Writes a trace in the format `read_csv_trace` accepts.
pub fn write_csv_trace<W: Write>(trace: &Trace, spec: &Specification, out: W) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend(spec.inputs.iter().map(|i| i.name.clone()));
    w.write_record(&header)?;
    for e in &trace.events {
        let mut row = vec![format_rational(&e.time)];
        row.extend((0..spec.inputs.len()).map(|i| e.values.get(&i).map(Value::to_string).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn csv_field(text: &str, force_quotes: bool) -> String {
    if force_quotes || text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// `time,stream,params,value` rows; string values are always quoted.
pub fn report_csv(rows: &[Verdict]) -> String {
    let mut s = String::from("time,stream,params,value\n");
    for v in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            format_rational(&v.time),
            csv_field(&v.stream, false),
            csv_field(&format_params(&v.params), false),
            csv_field(&v.value.to_string(), matches!(v.value, Value::Str(_))),
        ));
    }
    s
}

/// A JSON list of `{time, stream, params, value}` objects. Time is an exact
/// decimal string (or `n/d` when the expansion does not terminate).
pub fn report_json(rows: &[Verdict]) -> String {
    let list: Vec<serde_json::Value> = rows
        .iter()
        .map(|v| {
            serde_json::json!({
                "time": format_rational(&v.time),
                "stream": v.stream,
                "params": v.params.iter().map(Value::to_json).collect::<Vec<_>>(),
                "value": v.value.to_json(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&list).expect("json values serialize") + "\n"
}

/// Writes the verdicts, or the full evaluation dump when `dump` is set.
pub fn write_report<W: Write>(report: &MonitorReport, format: ReportFormat, dump: bool, mut out: W) -> std::io::Result<()> {
    let rows = if dump { &report.dump } else { &report.verdicts };
    let text = match format {
        ReportFormat::Csv => report_csv(rows),
        ReportFormat::Json => report_json(rows),
    };
    out.write_all(text.as_bytes())
}
