//! Scenario files and report rendering.
//!
//! Structured output is JSON throughout; traces and discovery CDFs can also
//! be written as CSV. Field names are part of the file contract.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridShape, Resource};
use crate::pattern::{FamilyParams, Pattern, PatternError, PatternSpec, TrajectoryPoint};
use crate::sim::{ChannelKind, ChannelModel, Filtering, Scenario, SimResult, UeConfig, DEFAULT_HORIZON};
use crate::verify::{FeatureRow, Outcome, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected text, json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("at `{path}`: invalid value {value}: {reason}")]
    Invalid { path: String, value: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UeEntry {
    id: u64,
    start: [u32; 2],
    #[serde(default)]
    service_type: u64,
}

fn default_p_rx() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelEntry {
    kind: ChannelKind,
    #[serde(default = "default_p_rx")]
    p_rx: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilteringEntry {
    #[serde(default)]
    enabled: bool,
    #[serde(default)]
    service_map: BTreeMap<u64, BTreeSet<u64>>,
    #[serde(default)]
    interest: BTreeMap<u64, BTreeSet<u64>>,
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    shape: GridShape,
    pattern: FamilyParams,
    ues: Vec<UeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelEntry>,
    #[serde(default = "default_horizon")]
    horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    filtering: Option<FilteringEntry>,
}

fn invalid(path: &str, value: impl ToString, reason: &str) -> ScenarioError {
    ScenarioError::Invalid { path: path.into(), value: value.to_string(), reason: reason.into() }
}

/// Parses a JSON scenario document. Defaults: ideal channel, horizon 32,
/// filtering disabled.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| ScenarioError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    if file.horizon == 0 {
        return Err(invalid("horizon", 0, "must be at least 1"));
    }
    let channel = match file.channel {
        None => ChannelModel::ideal(),
        Some(ch) => {
            if !(0.0..=1.0).contains(&ch.p_rx) {
                return Err(invalid("channel.p_rx", ch.p_rx, "must lie in [0, 1]"));
            }
            ChannelModel { kind: ch.kind, p_rx: ch.p_rx, seed: ch.seed }
        }
    };
    let ues = file
        .ues
        .iter()
        .map(|u| UeConfig { id: u.id, start: Resource::new(u.start[0], u.start[1]), service_type: u.service_type })
        .collect();
    let filtering = file.filtering.filter(|f| f.enabled).map(|f| Filtering {
        service_map: f.service_map,
        interest: f.interest,
    });
    Ok(Scenario {
        pattern: PatternSpec::new(file.shape, file.pattern),
        ues,
        channel,
        horizon: file.horizon,
        filtering,
    })
}

pub fn serialize_scenario(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        shape: scenario.pattern.shape,
        pattern: scenario.pattern.params,
        ues: scenario
            .ues
            .iter()
            .map(|u| UeEntry { id: u.id, start: [u.start.i, u.start.j], service_type: u.service_type })
            .collect(),
        channel: Some(ChannelEntry {
            kind: scenario.channel.kind,
            p_rx: scenario.channel.p_rx,
            seed: scenario.channel.seed,
        }),
        horizon: scenario.horizon,
        filtering: scenario.filtering.as_ref().map(|f| FilteringEntry {
            enabled: true,
            service_map: f.service_map.clone(),
            interest: f.interest.clone(),
        }),
    };
    to_json(&file)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn render_verify(report: &VerifyReport, format: Format) -> String {
    if format == Format::Json {
        return to_json(report);
    }
    let mut out = String::new();
    writeln!(out, "pattern: {}", report.pattern).unwrap();
    writeln!(out, "frames checked (frame-dependent maps): {}", report.frames).unwrap();
    for r in &report.reports {
        let status = match r.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::NotApplicable => "N/A ",
        };
        write!(out, "{status} {:<19} checked={}", r.property.to_string(), r.checked).unwrap();
        if let Some(f) = r.fraction {
            write!(out, " moving={}/{}", f.num, f.den).unwrap();
        }
        writeln!(out).unwrap();
        if let Some(cx) = &r.counterexample {
            let res: Vec<String> = cx.resources.iter().map(Resource::to_string).collect();
            write!(out, "     counterexample: {}", res.join(" ")).unwrap();
            if let Some(t) = cx.frame {
                write!(out, " frame={t}").unwrap();
            }
            if !cx.values.is_empty() {
                write!(out, " values={:?}", cx.values).unwrap();
            }
            writeln!(out, " ({})", cx.note).unwrap();
        }
    }
    writeln!(out, "overall: {}", if report.all_pass { "PASS" } else { "FAIL" }).unwrap();
    out
}

pub fn render_table(rows: &[FeatureRow], format: Format) -> String {
    if format == Format::Json {
        return to_json(&rows);
    }
    let mut out = String::new();
    writeln!(out, "{:<18} {:>4} {:>4} {:>4} {:>4}", "pattern", "time", "freq", "indt", "inv").unwrap();
    for row in rows {
        let [a, b, c, d] = row.flags();
        writeln!(out, "{:<18} {a:>4} {b:>4} {c:>4} {d:>4}", row.label).unwrap();
    }
    out
}

/// One row of a trajectory trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub frame: u64,
    pub i: u32,
    pub j: u32,
    pub invariant: Option<u64>,
}

impl From<&TrajectoryPoint> for TraceRecord {
    fn from(p: &TrajectoryPoint) -> Self {
        Self { frame: p.frame, i: p.resource.i, j: p.resource.j, invariant: p.invariant.map(|v| v.value) }
    }
}

pub fn trace_records(pattern: &Pattern, start: Resource, frames: u64) -> Result<Vec<TraceRecord>, PatternError> {
    Ok(pattern.trajectory(start, frames)?.iter().map(TraceRecord::from).collect())
}

pub fn render_trace(rows: &[TraceRecord], format: Format) -> String {
    if format == Format::Json {
        return to_json(&rows);
    }
    let mut out = String::from("frame,i,j,invariant\n");
    for r in rows {
        let inv = r.invariant.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{inv}", r.frame, r.i, r.j).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub value: u64,
    pub modulus: u64,
    pub size: usize,
    pub members: Vec<[u32; 2]>,
}

pub fn partition_rows(pattern: &Pattern) -> Result<Vec<PartitionRow>, PatternError> {
    Ok(pattern
        .invariant_partition()?
        .into_iter()
        .map(|(k, members)| PartitionRow {
            value: k.value,
            modulus: k.modulus,
            size: members.len(),
            members: members.iter().map(|r| [r.i, r.j]).collect(),
        })
        .collect())
}

pub fn render_partition(rows: &[PartitionRow], format: Format) -> String {
    match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("value,modulus,size,members\n");
            for row in rows {
                let members: Vec<String> = row.members.iter().map(|[i, j]| format!("{i}:{j}")).collect();
                writeln!(out, "{},{},{},{}", row.value, row.modulus, row.size, members.join(" ")).unwrap();
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for row in rows {
                let members: Vec<String> = row.members.iter().map(|[i, j]| format!("({i},{j})")).collect();
                writeln!(out, "{} mod {} size={}: {}", row.value, row.modulus, row.size, members.join(" ")).unwrap();
            }
            out
        }
    }
}

pub fn render_cdf_csv(result: &SimResult) -> String {
    let mut out = String::from("frame,discovered_fraction\n");
    for (t, p) in result.summary.cdf.iter().enumerate() {
        writeln!(out, "{t},{p}").unwrap();
    }
    out
}

pub fn render_sim(result: &SimResult, format: Format) -> String {
    match format {
        Format::Json => to_json(result),
        Format::Csv => render_cdf_csv(result),
        Format::Text => {
            let s = &result.summary;
            let opt = |v: Option<String>| v.unwrap_or_else(|| "never".into());
            let mut out = String::new();
            writeln!(out, "pattern: {}", result.pattern).unwrap();
            writeln!(out, "horizon: {} frames, filtering: {}", result.horizon, result.filtering).unwrap();
            writeln!(out, "ordered pairs: {} discovered: {} undiscovered: {}", s.ordered_pairs, s.discovered, s.undiscovered).unwrap();
            writeln!(out, "mean first-heard frame: {}", opt(s.mean_first_heard.map(|m| format!("{m:.4}")))).unwrap();
            writeln!(out, "max first-heard frame: {}", opt(s.max_first_heard.map(|m| m.to_string()))).unwrap();
            writeln!(out, "max mutual discovery frame: {}", opt(s.max_mutual.map(|m| m.to_string()))).unwrap();
            writeln!(out, "unordered pairs never mutually discovered: {}", s.mutual_undiscovered).unwrap();
            out
        }
    }
}
