//! Report serialization: JSON, grid CSV and plot-data CSV.

use clap::ValueEnum;
use quelab_core::verify::{Row, ScenarioReport, Verdict};
use serde::Deserialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

pub fn emit(report: &ScenarioReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report).into_bytes(),
        Format::Csv => to_csv(report).into_bytes(),
    }
}

fn object(pairs: &[(String, String)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

pub fn to_value(report: &ScenarioReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let mut o = Map::new();
            o.insert("k".into(), json!(r.k));
            o.insert("index".into(), json!(r.index));
            for (c, v) in report.columns.iter().zip(&r.values) {
                o.insert(c.clone(), Value::String(v.clone()));
            }
            Value::Object(o)
        })
        .collect();
    let mut columns = vec!["k".to_string(), "index".to_string()];
    columns.extend(report.columns.iter().cloned());
    json!({
        "scenario": report.scenario,
        "params": object(&report.params),
        "columns": columns,
        "rows": rows,
        "verdict": report.verdict.as_str(),
        "tolerances": object(&report.tolerances),
        "summary": object(&report.summary),
        "failures": report.failures,
        "plot": {"x": report.plot.0, "y": report.plot.1},
        "runtime_s": report.runtime_s,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json(report: &ScenarioReport) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(report)).expect("report serializes");
    s.push('\n');
    s
}

fn bad(what: &str) -> serde_json::Error {
    <serde_json::Error as serde::de::Error>::custom(format!("malformed report: {what}"))
}

fn pairs(v: &Value, key: &str) -> Result<Vec<(String, String)>, serde_json::Error> {
    v.get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| bad(key))?
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.as_str().ok_or_else(|| bad(k))?.to_string())))
        .collect()
}

fn string(v: &Value, key: &str) -> Result<String, serde_json::Error> {
    v.get(key).and_then(Value::as_str).map(str::to_string).ok_or_else(|| bad(key))
}

/// Parses a document written by [`to_json`].
pub fn from_json(text: &str) -> Result<ScenarioReport, serde_json::Error> {
    let v: Value = serde_json::from_str(text)?;
    let columns: Vec<String> = v
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("columns"))?
        .iter()
        .skip(2)
        .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("columns")))
        .collect::<Result<_, _>>()?;
    let rows = v
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("rows"))?
        .iter()
        .map(|r| {
            let num = |key| r.get(key).and_then(Value::as_u64).ok_or_else(|| bad(key));
            Ok(Row {
                k: num("k")? as u32,
                index: num("index")? as usize,
                values: columns.iter().map(|c| string(r, c)).collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<_, serde_json::Error>>()?;
    let verdict = serde_json::from_value::<Verdict>(v.get("verdict").cloned().ok_or_else(|| bad("verdict"))?)?;
    let plot = v.get("plot").ok_or_else(|| bad("plot"))?;
    Ok(ScenarioReport {
        scenario: string(&v, "scenario")?,
        params: pairs(&v, "params")?,
        columns,
        rows,
        verdict,
        tolerances: pairs(&v, "tolerances")?,
        summary: pairs(&v, "summary")?,
        failures: serde_json::from_value(v.get("failures").cloned().ok_or_else(|| bad("failures"))?)?,
        plot: (string(plot, "x")?, string(plot, "y")?),
        runtime_s: v.get("runtime_s").and_then(Value::as_f64),
    })
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Header `k,index,<columns>` then one line per grid cell.
pub fn to_csv(report: &ScenarioReport) -> String {
    let mut w = writer();
    let mut header = vec!["k", "index"];
    header.extend(report.columns.iter().map(String::as_str));
    w.write_record(&header).expect("in-memory csv");
    for r in &report.rows {
        let mut rec = vec![r.k.to_string(), r.index.to_string()];
        rec.extend(r.values.iter().cloned());
        w.write_record(&rec).expect("in-memory csv");
    }
    finish(w)
}

/// Two columns `x,y` taken from the report's plot columns.
pub fn plot_csv(report: &ScenarioReport) -> String {
    let pick = |name: &str, r: &Row| match name {
        "k" => r.k.to_string(),
        "index" => r.index.to_string(),
        c => report.column(c).map(|i| r.values[i].clone()).unwrap_or_default(),
    };
    let mut w = writer();
    w.write_record(["x", "y"]).expect("in-memory csv");
    for r in &report.rows {
        w.write_record([pick(&report.plot.0, r), pick(&report.plot.1, r)])
            .expect("in-memory csv");
    }
    finish(w)
}
