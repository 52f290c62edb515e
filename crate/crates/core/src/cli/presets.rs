//! Shipped presets, stored as configuration documents so they go
//! through the same parser and validation as user files.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::SystemParams;

use super::config::{params_from_document, ParamsBlock};

pub const PRESET_NAMES: [&str; 4] = ["fig1a", "fig1b", "fig2", "fig3a"];

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Full configuration document: `params` plus command defaults.
    pub document: Value,
}

impl Preset {
    pub fn params(&self) -> Result<SystemParams> {
        Ok(self.params_block()?.params)
    }

    pub(crate) fn params_block(&self) -> Result<ParamsBlock> {
        params_from_document(self.document.get("params").unwrap_or(&Value::Null))
    }
}

fn baseline_params() -> Value {
    json!({
        "topology": "m_scheme",
        "omega1": 0.75,
        "omega2": 1.5,
        "omega3": 0.01,
        "omega4": 0.1,
        "delta1": 20.0,
        "delta2": 0.0,
        "delta3": 0.0,
        "delta4": 0.0,
        "lock_delta4_to_delta3": true,
        "gamma12": 1.0,
        "gamma23": 1.0,
        "gamma25": 0.25,
        "gamma14": 0.25,
        "gamma34": 1.0,
        "gamma45": 1.0,
        "gamma_d": 0.01
    })
}

fn detuning_axis() -> Value {
    json!({ "parameter": "delta3_locked", "start": -40.0, "end": 40.0, "points": 161 })
}

fn with_params(params: Value, overrides: &[(&str, Value)]) -> Value {
    let mut p = params;
    for (k, v) in overrides {
        p[*k] = v.clone();
    }
    p
}

fn command_defaults(params: Value, axis: Value) -> Value {
    json!({
        "command": "sweep",
        "params": params,
        "axis": axis,
        "channel": [2, 5],
        "ramp": {
            "target": "delta3_locked",
            "start": 2.0,
            "end": 20.0,
            "duration": 5000.0,
            "shape": "linear",
            "samples": 101,
            "initial": "steady"
        },
        "time": { "t_end": 2000.0, "samples": 201, "initial": 1 }
    })
}

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name {
        "fig1a" => Preset {
            name: "fig1a",
            description: "populations vs locked detuning delta3 = delta4 (baseline parameters)",
            document: command_defaults(baseline_params(), detuning_axis()),
        },
        "fig1b" => Preset {
            name: "fig1b",
            description: "populations vs gamma25 at delta3 = delta4 = 20",
            document: command_defaults(
                with_params(baseline_params(), &[("delta3", json!(20.0)), ("delta4", json!(20.0))]),
                json!({ "parameter": "gamma25", "start": 0.0, "end": 0.5, "points": 51 }),
            ),
        },
        "fig2" => Preset {
            name: "fig2",
            description: "dressed populations and eigenvalues vs locked detuning (baseline parameters)",
            document: command_defaults(baseline_params(), detuning_axis()),
        },
        "fig3a" => Preset {
            name: "fig3a",
            description: "mirror configuration: delta1 = 0, delta2 = 20, populations vs locked detuning",
            document: command_defaults(
                with_params(baseline_params(), &[("delta1", json!(0.0)), ("delta2", json!(20.0))]),
                detuning_axis(),
            ),
        },
        other => {
            return Err(Error::validation(
                "preset",
                format!("unknown preset `{other}`; available: {}", PRESET_NAMES.join(", ")),
            ))
        }
    };
    Ok(p)
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("shipped preset"))
        .collect()
}

/// Human-readable listing used by `--list-presets`.
pub fn describe_presets() -> String {
    let mut out = String::new();
    for p in all_presets() {
        let block = p.params_block().expect("shipped preset");
        out.push_str(&format!("[{}] {}\n", p.name, p.description));
        out.push_str(&format!("{}\n", block.params));
        out.push_str(&format!("lock_delta4_to_delta3 = {}\n", block.lock_delta4_to_delta3));
        if let Some(axis) = p.document.get("axis") {
            out.push_str(&format!("axis = {axis}\n"));
        }
        out.push('\n');
    }
    out
}
