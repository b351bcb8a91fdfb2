//! Result documents and their renderings.
//!
//! JSON and CSV print every number with 17 significant digits, enough to
//! round-trip an `f64`; the human table uses 12.

use std::fmt::Write;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::experiments::{ExperimentReport, NamedRun};
use crate::timeline::RunResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { shots: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultDoc {
    /// Scenario path or experiment name.
    pub source: String,
    pub mode: Mode,
    pub headline: Vec<(String, f64)>,
    pub runs: Vec<NamedRun>,
}

impl ResultDoc {
    pub fn from_run(source: &str, mode: Mode, run: RunResult) -> Self {
        Self {
            source: source.to_string(),
            mode,
            headline: Vec::new(),
            runs: vec![NamedRun {
                name: "scenario".into(),
                result: run,
            }],
        }
    }

    pub fn from_experiment(report: ExperimentReport) -> Self {
        Self {
            source: report.name.to_string(),
            mode: Mode::Exact,
            headline: report.headline,
            runs: report.runs,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }

    pub fn to_json(&self) -> String {
        let (mode, shots, seed) = match self.mode {
            Mode::Exact => ("exact", None, None),
            Mode::Sampled { shots, seed } => ("sampled", Some(shots), Some(seed)),
        };
        let doc = JsonDoc {
            version: env!("CARGO_PKG_VERSION"),
            source: &self.source,
            mode,
            shots,
            seed,
            headline: self
                .headline
                .iter()
                .map(|(name, v)| JsonHeadline {
                    name,
                    value: num(*v),
                })
                .collect(),
            runs: self.runs.iter().map(json_run).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,label,index,eigenvalue,value\n");
        for (name, v) in &self.headline {
            writeln!(out, "headline,{},,,{}", csv_field(name), sig17(*v)).unwrap();
        }
        for run in &self.runs {
            let section = csv_field(&run.name);
            writeln!(
                out,
                "{section},postselection_probability,,,{}",
                sig17(run.result.postselection_probability())
            )
            .unwrap();
            for m in run.result.measurements() {
                for (o, p) in m.distribution.iter() {
                    writeln!(
                        out,
                        "{section},{},{},{},{}",
                        csv_field(&m.label),
                        o.index,
                        sig17(o.eigenvalue),
                        sig17(p)
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            Mode::Exact => "exact".to_string(),
            Mode::Sampled { shots, seed } => format!("sampled, {shots} shots, seed {seed}"),
        };
        writeln!(out, "{} ({mode})", self.source).unwrap();
        if !self.headline.is_empty() {
            let width = self
                .headline
                .iter()
                .map(|(k, _)| k.len())
                .max()
                .unwrap_or(0);
            for (k, v) in &self.headline {
                writeln!(out, "  {k:<width$}  {}", sig12(*v)).unwrap();
            }
        }
        for run in &self.runs {
            writeln!(out).unwrap();
            writeln!(out, "[{}]", run.name).unwrap();
            writeln!(
                out,
                "  post-selection probability  {}",
                sig12(run.result.postselection_probability())
            )
            .unwrap();
            if let Some(s) = run.result.sampler() {
                writeln!(
                    out,
                    "  accepted shots              {} / {}",
                    s.accepted, s.shots
                )
                .unwrap();
            }
            for m in run.result.measurements() {
                writeln!(out, "  {}", m.label).unwrap();
                writeln!(
                    out,
                    "    {:>5}  {:>18}  {:>18}",
                    "index", "eigenvalue", "probability"
                )
                .unwrap();
                for (o, p) in m.distribution.iter() {
                    writeln!(
                        out,
                        "    {:>5}  {:>18}  {:>18}",
                        o.index,
                        sig12(o.eigenvalue),
                        sig12(p)
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    version: &'static str,
    source: &'a str,
    mode: &'static str,
    shots: Option<usize>,
    seed: Option<u64>,
    headline: Vec<JsonHeadline<'a>>,
    runs: Vec<JsonRun<'a>>,
}

#[derive(Serialize)]
struct JsonHeadline<'a> {
    name: &'a str,
    value: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonRun<'a> {
    name: &'a str,
    postselection_probability: Box<RawValue>,
    branch_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    accepted: Option<usize>,
    measurements: Vec<JsonMeasurement<'a>>,
}

#[derive(Serialize)]
struct JsonMeasurement<'a> {
    label: &'a str,
    outcomes: Vec<JsonOutcome>,
}

#[derive(Serialize)]
struct JsonOutcome {
    index: usize,
    eigenvalue: Box<RawValue>,
    probability: Box<RawValue>,
}

fn json_run(run: &NamedRun) -> JsonRun<'_> {
    JsonRun {
        name: &run.name,
        postselection_probability: num(run.result.postselection_probability()),
        branch_count: run.result.branch_count(),
        accepted: run.result.sampler().map(|s| s.accepted),
        measurements: run
            .result
            .measurements()
            .iter()
            .map(|m| JsonMeasurement {
                label: &m.label,
                outcomes: m
                    .distribution
                    .iter()
                    .map(|(o, p)| JsonOutcome {
                        index: o.index,
                        eigenvalue: num(o.eigenvalue),
                        probability: num(p),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// `x` with 17 significant digits in exponent form; `null` if not finite.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// `x` with 12 significant digits, positional when reasonable.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    // Exponent after rounding, so 0.99999999999999 counts as 1.
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn num(x: f64) -> Box<RawValue> {
    RawValue::from_string(sig17(x)).expect("valid JSON number")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.2, 1e-17, 0.9999999999999999, -0.5] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.5), "0.500000000000");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(0.0), "0.00000000000");
        assert_eq!(sig12(-1.0), "-1.00000000000");
        assert_eq!(sig12(2e-20), "2.00000000000e-20");
        assert_eq!(sig12(0.99999999999999), "1.00000000000");
    }

    #[test]
    fn csv_quotes_when_needed() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
