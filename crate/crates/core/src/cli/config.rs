//! JSON run configuration: parsing, preset merging and `--set` overrides.
//!
//! A document has the top-level keys `preset`, `command`, `params`, `axis`,
//! `ramp`, `time`, `channel` and `output`, all optional. When `preset` is
//! given, the preset document is used as the base and the remaining keys are
//! merged over it.

use std::path::PathBuf;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{m_scheme_topology, variant_topology, Level, SystemParams};
use crate::solver::{RampShape, RampSpec, RampTarget};
use crate::sweep::{SweepAxis, SweepParameter};

use super::presets::preset;
use super::Command;

const TOP_KEYS: [&str; 8] = [
    "preset", "command", "params", "axis", "ramp", "time", "channel", "output",
];
const AXIS_KEYS: [&str; 5] = ["parameter", "start", "end", "points", "values"];
const RAMP_KEYS: [&str; 7] = ["target", "start", "end", "duration", "shape", "samples", "initial"];
const TIME_KEYS: [&str; 3] = ["t_end", "samples", "initial"];
const RATE_KEYS: [&str; 6] = ["gamma12", "gamma23", "gamma25", "gamma14", "gamma34", "gamma45"];

pub const PARAM_KEYS: [&str; 17] = [
    "omega1",
    "omega2",
    "omega3",
    "omega4",
    "delta1",
    "delta2",
    "delta3",
    "delta4",
    "gamma12",
    "gamma23",
    "gamma25",
    "gamma14",
    "gamma34",
    "gamma45",
    "gamma_d",
    "topology",
    "lock_delta4_to_delta3",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    /// Steady state of the generator at the start of the ramp.
    Steady,
    Pure(Level),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RampConfig {
    pub spec: RampSpec,
    pub samples: usize,
    pub initial: InitialState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub samples: usize,
    pub initial: Level,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_end: 2000.0,
            samples: 201,
            initial: Level::ALL[0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamsBlock {
    pub params: SystemParams,
    pub lock_delta4_to_delta3: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub preset: Option<String>,
    pub command: Option<Command>,
    pub params: SystemParams,
    pub lock_delta4_to_delta3: bool,
    pub axis: Option<SweepAxis>,
    pub ramp: Option<RampConfig>,
    pub time: TimeConfig,
    pub channel: (Level, Level),
    pub output: Option<PathBuf>,
}

/// Parses a JSON document into a validated run specification.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    resolve(load_document(text)?)
}

pub fn load_document(text: &str) -> Result<Value> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if !doc.is_object() {
        return Err(Error::Parse("top level must be a JSON object".into()));
    }
    Ok(doc)
}

/// Applies one `key=value` override. Keys are dotted paths; a bare parameter
/// name such as `gamma25` is placed under `params`. The value is read as JSON
/// and falls back to a plain string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Parse(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));

    let path: Vec<&str> = if !key.contains('.') && PARAM_KEYS.contains(&key) {
        vec!["params", key]
    } else {
        key.split('.').collect()
    };
    let mut node = doc;
    for (i, part) in path.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Parse(format!("override `{key}` descends into a non-object")))?;
        if i + 1 == path.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Expands a preset (if any), merges the document over it and parses the
/// result.
pub fn resolve(doc: Value) -> Result<RunSpec> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be a JSON object".into()))?;
    check_keys(obj, &TOP_KEYS, "")?;

    let preset_name = match obj.get("preset") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::validation("preset", "must be a string")),
    };
    let merged = match &preset_name {
        Some(name) => {
            let mut base = preset(name)?.document;
            merge(&mut base, &doc);
            base
        }
        None => doc,
    };
    let obj = merged.as_object().expect("object");

    let command = match obj.get("command") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.parse::<Command>()?),
        Some(_) => return Err(Error::validation("command", "must be a string")),
    };
    let block = params_from_document(obj.get("params").unwrap_or(&Value::Null))?;
    let axis = obj.get("axis").map(parse_axis).transpose()?;
    let ramp = obj.get("ramp").map(parse_ramp).transpose()?;
    let time = obj.get("time").map(parse_time).transpose()?.unwrap_or_default();
    let channel = match obj.get("channel") {
        None => (Level::ALL[1], Level::ALL[4]),
        Some(v) => parse_channel(v)?,
    };
    let output = match obj.get("output") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(Error::validation("output", "must be a path string")),
    };

    Ok(RunSpec {
        preset: preset_name,
        command,
        params: block.params,
        lock_delta4_to_delta3: block.lock_delta4_to_delta3,
        axis,
        ramp,
        time,
        channel,
        output,
    })
}

fn merge(base: &mut Value, over: &Value) {
    let (Some(b), Some(o)) = (base.as_object_mut(), over.as_object()) else {
        *base = over.clone();
        return;
    };
    for (k, v) in o {
        if k == "preset" {
            continue;
        }
        // An explicit value list replaces a start/end/points grid wholesale.
        let replace_axis = k == "axis" && v.get("values").is_some();
        match b.get_mut(k) {
            Some(slot) if slot.is_object() && v.is_object() && !replace_axis => merge(slot, v),
            Some(slot) if replace_axis && v.get("parameter").is_none() => {
                let mut axis = v.clone();
                if let Some(p) = slot.get("parameter") {
                    axis["parameter"] = p.clone();
                }
                *slot = axis;
            }
            _ => {
                b.insert(k.clone(), v.clone());
            }
        }
    }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::UnknownKey(format!("{prefix}{k}"))),
        None => Ok(()),
    }
}

fn as_object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::validation(field, "must be an object"))
}

fn number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::validation(field, format!("expected a number, got {v}")))
}

fn count(v: &Value, field: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::validation(field, format!("expected a nonnegative integer, got {v}")))
}

fn level(v: &Value, field: &str) -> Result<Level> {
    let n = v
        .as_u64()
        .filter(|n| *n <= u8::MAX as u64)
        .ok_or_else(|| Error::validation(field, format!("expected a level 1..=5, got {v}")))?;
    Level::new(n as u8).map_err(|e| Error::validation(field, e.to_string()))
}

fn rabi(v: &Value, field: &str) -> Result<Complex64> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            Ok(Complex64::new(number(&parts[0], field)?, number(&parts[1], field)?))
        }
        Value::Array(_) => Err(Error::validation(field, "complex value must be [re, im]")),
        other => Ok(Complex64::new(number(other, field)?, 0.0)),
    }
}

/// Reads a `params` block. Missing keys default to zero, the M-scheme
/// topology and no detuning lock.
pub fn params_from_document(v: &Value) -> Result<ParamsBlock> {
    let mut params = SystemParams::zeroed();
    let mut lock = false;
    let empty = Map::new();
    let obj = match v {
        Value::Null => &empty,
        other => as_object(other, "params")?,
    };
    check_keys(obj, &PARAM_KEYS, "params.")?;

    for (key, value) in obj {
        let k = key.as_str();
        if let Some(i) = k.strip_prefix("omega").and_then(|s| s.parse::<usize>().ok()) {
            params.rabi[i - 1] = rabi(value, k)?;
        } else if let Some(i) = k.strip_prefix("delta").and_then(|s| s.parse::<usize>().ok()) {
            params.detunings[i - 1] = number(value, k)?;
        } else if RATE_KEYS.contains(&k) {
            *params.decay.get_mut(k).expect("rate key") = number(value, k)?;
        } else if k == "gamma_d" {
            params.dephasing = number(value, k)?;
        } else if k == "topology" {
            params.topology = match value.as_str() {
                Some("m_scheme") => m_scheme_topology(),
                Some("variant") => variant_topology(),
                _ => {
                    return Err(Error::validation(
                        "topology",
                        format!("expected \"m_scheme\" or \"variant\", got {value}"),
                    ))
                }
            };
        } else if k == "lock_delta4_to_delta3" {
            lock = value
                .as_bool()
                .ok_or_else(|| Error::validation(k, "must be true or false"))?;
        }
    }
    if lock {
        params.detunings[3] = params.detunings[2];
    }
    params.validate()?;
    Ok(ParamsBlock {
        params,
        lock_delta4_to_delta3: lock,
    })
}

fn parse_axis(v: &Value) -> Result<SweepAxis> {
    let obj = as_object(v, "axis")?;
    check_keys(obj, &AXIS_KEYS, "axis.")?;
    let parameter: SweepParameter = obj
        .get("parameter")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::validation("axis.parameter", "required string"))?
        .parse()?;
    if let Some(values) = obj.get("values") {
        if ["start", "end", "points"].iter().any(|k| obj.contains_key(*k)) {
            return Err(Error::validation(
                "axis",
                "give either `values` or `start`/`end`/`points`",
            ));
        }
        let list = values
            .as_array()
            .ok_or_else(|| Error::validation("axis.values", "must be an array of numbers"))?
            .iter()
            .map(|x| number(x, "axis.values"))
            .collect::<Result<Vec<_>>>()?;
        return SweepAxis::new(parameter, list);
    }
    let get = |k: &str| {
        obj.get(k)
            .ok_or_else(|| Error::validation(format!("axis.{k}"), "required"))
    };
    let start = number(get("start")?, "axis.start")?;
    let end = number(get("end")?, "axis.end")?;
    let points = count(get("points")?, "axis.points")?;
    SweepAxis::uniform(parameter, start, end, points)
}

fn parse_ramp(v: &Value) -> Result<RampConfig> {
    let obj = as_object(v, "ramp")?;
    check_keys(obj, &RAMP_KEYS, "ramp.")?;
    let req = |k: &str| {
        obj.get(k)
            .ok_or_else(|| Error::validation(format!("ramp.{k}"), "required"))
    };
    let target = match obj.get("target").and_then(Value::as_str).unwrap_or("delta3_locked") {
        "delta3_locked" => RampTarget::Delta3Locked,
        "delta3" => RampTarget::Delta3,
        other => return Err(Error::validation("ramp.target", format!("unknown target `{other}`"))),
    };
    let shape = match obj.get("shape").and_then(Value::as_str).unwrap_or("linear") {
        "linear" => RampShape::Linear,
        "smoothstep" => RampShape::Smoothstep,
        other => return Err(Error::validation("ramp.shape", format!("unknown shape `{other}`"))),
    };
    let spec = RampSpec::new(
        target,
        number(req("start")?, "ramp.start")?,
        number(req("end")?, "ramp.end")?,
        number(req("duration")?, "ramp.duration")?,
        shape,
    )?;
    let samples = match obj.get("samples") {
        Some(s) => count(s, "ramp.samples")?,
        None => 101,
    };
    let initial = match obj.get("initial") {
        None => InitialState::Steady,
        Some(Value::String(s)) if s == "steady" => InitialState::Steady,
        Some(other) => InitialState::Pure(level(other, "ramp.initial")?),
    };
    Ok(RampConfig { spec, samples, initial })
}

fn parse_time(v: &Value) -> Result<TimeConfig> {
    let obj = as_object(v, "time")?;
    check_keys(obj, &TIME_KEYS, "time.")?;
    let mut t = TimeConfig::default();
    if let Some(x) = obj.get("t_end") {
        t.t_end = number(x, "time.t_end")?;
    }
    if let Some(x) = obj.get("samples") {
        t.samples = count(x, "time.samples")?;
    }
    if let Some(x) = obj.get("initial") {
        t.initial = level(x, "time.initial")?;
    }
    Ok(t)
}

fn parse_channel(v: &Value) -> Result<(Level, Level)> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok((level(a, "channel")?, level(b, "channel")?)),
        _ => Err(Error::validation("channel", "expected [source, target]")),
    }
}
