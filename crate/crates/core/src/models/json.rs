//! JSON model files.
//!
//! ```json
//! { "worlds": ["w", "w'"],
//!   "R": [["w", "w'", "1/2"]],
//!   "T": { "w": ["0", "1/2", "1"], "w'": ["0", "1/2", "1"] },
//!   "val": { "p": { "w'": "1/2" } },
//!   "crisp": false }
//! ```
//!
//! A file without `"T"` describes a standard model. Rationals are strings
//! and are written back in canonical reduced form.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FModel, ModelError, StandardModel};
use crate::rational::{format_rational, parse_rational, zero, Rational};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    worlds: Vec<String>,
    #[serde(rename = "R", default)]
    access: Vec<(String, String, String)>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    t: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    val: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crisp: Option<bool>,
}

/// A model file is either a standard model or an F-model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedModel {
    Standard(StandardModel),
    F(FModel),
}

impl LoadedModel {
    pub fn frame(&self) -> &StandardModel {
        match self {
            LoadedModel::Standard(m) => m,
            LoadedModel::F(m) => m.frame(),
        }
    }
}

fn rational_at(path: &str, text: &str) -> Result<Rational, SchemaError> {
    parse_rational(text).map_err(|e| field(path, e.to_string()))
}

fn model_error(path: &str, e: ModelError) -> SchemaError {
    field(path, e.to_string())
}

pub fn model_from_json(text: &str) -> Result<LoadedModel, SchemaError> {
    let raw: RawModel = serde_json::from_str(text)?;
    let mut frame = StandardModel::new(raw.worlds.iter().cloned()).map_err(|e| model_error("worlds", e))?;
    for (i, (from, to, value)) in raw.access.iter().enumerate() {
        let path = format!("R[{i}]");
        let r = rational_at(&path, value)?;
        frame.set_access(from, to, r).map_err(|e| model_error(&path, e))?;
    }
    for (atom, per_world) in &raw.val {
        for (world, value) in per_world {
            let path = format!("val.{atom}.{world}");
            let x = rational_at(&path, value)?;
            frame.set_value(atom, world, x).map_err(|e| model_error(&path, e))?;
        }
    }
    frame.set_crisp(raw.crisp.unwrap_or(false));
    let Some(t) = raw.t else {
        return Ok(LoadedModel::Standard(frame));
    };
    let mut model = FModel::from_standard(frame);
    for world in &raw.worlds {
        let values = t
            .get(world)
            .ok_or_else(|| field(format!("T.{world}"), "missing value set for world"))?;
        let parsed = values
            .iter()
            .enumerate()
            .map(|(i, v)| rational_at(&format!("T.{world}[{i}]"), v))
            .collect::<Result<Vec<_>, _>>()?;
        model.set_t(world, parsed).map_err(|e| model_error("T", e))?;
    }
    if let Some(extra) = t.keys().find(|w| model.frame().world_index(w).is_none()) {
        return Err(field(format!("T.{extra}"), "unknown world"));
    }
    Ok(LoadedModel::F(model))
}

fn raw_frame(frame: &StandardModel) -> RawModel {
    let worlds = frame.worlds().to_vec();
    let access = frame
        .edges()
        .into_iter()
        .map(|(i, j, r)| (worlds[i].clone(), worlds[j].clone(), format_rational(r)))
        .collect();
    let mut val = BTreeMap::new();
    for atom in frame.atoms() {
        let per_world: BTreeMap<String, String> = worlds
            .iter()
            .enumerate()
            .filter_map(|(i, w)| {
                let x = frame.value(atom, i);
                (x != zero()).then(|| (w.clone(), format_rational(&x)))
            })
            .collect();
        if !per_world.is_empty() {
            val.insert(atom.to_string(), per_world);
        }
    }
    RawModel {
        worlds,
        access,
        t: None,
        val,
        crisp: frame.is_crisp().then_some(true),
    }
}

pub fn model_to_json(model: &LoadedModel) -> String {
    let raw = match model {
        LoadedModel::Standard(m) => raw_frame(m),
        LoadedModel::F(m) => {
            let mut raw = raw_frame(m.frame());
            raw.t = Some(
                m.worlds()
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (w.clone(), m.t_set(i).iter().map(format_rational).collect()))
                    .collect(),
            );
            raw
        }
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("model serialisation cannot fail");
    text.push('\n');
    text
}

pub fn load_model(path: &Path) -> Result<LoadedModel, SchemaError> {
    model_from_json(&fs::read_to_string(path)?)
}

pub fn save_model(path: &Path, model: &LoadedModel) -> Result<(), SchemaError> {
    fs::write(path, model_to_json(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::half;

    const COUNTERMODEL: &str = r#"{
        "worlds": ["w", "w'"],
        "R": [["w", "w'", "2/4"]],
        "T": {"w": ["0", "1/2", "1"], "w'": ["0", "1/2", "1"]},
        "val": {"p": {"w'": "1/2"}}
    }"#;

    #[test]
    fn countermodel_round_trip_is_canonical() {
        let m = model_from_json(COUNTERMODEL).unwrap();
        let text = model_to_json(&m);
        assert!(text.contains("\"1/2\""));
        assert!(!text.contains("2/4"));
        let again = model_from_json(&text).unwrap();
        assert_eq!(again, m);
        assert_eq!(model_to_json(&again), text);
        let LoadedModel::F(f) = m else {
            panic!("expected an F-model")
        };
        assert_eq!(*f.frame().access(0, 1), half());
    }

    #[test]
    fn r_entries_are_triples() {
        let m = model_from_json(COUNTERMODEL).unwrap();
        let v: serde_json::Value = serde_json::from_str(&model_to_json(&m)).unwrap();
        assert_eq!(v["R"][0], serde_json::json!(["w", "w'", "1/2"]));
    }

    #[test]
    fn missing_t_entry_is_a_schema_error() {
        let text = r#"{"worlds": ["w", "v"], "R": [], "T": {"w": ["0", "1/2", "1"]}, "val": {}}"#;
        let err = model_from_json(text).unwrap_err();
        assert!(err.to_string().starts_with("T.v:"), "{err}");
    }

    #[test]
    fn bad_values_carry_their_path() {
        let text = r#"{"worlds": ["w"], "R": [["w", "w", "3/2"]], "val": {}}"#;
        assert!(model_from_json(text).unwrap_err().to_string().starts_with("R[0]:"));
        let text = r#"{"worlds": ["w"], "val": {"p": {"v": "1"}}}"#;
        assert!(model_from_json(text).unwrap_err().to_string().starts_with("val.p.v:"));
        let text = r#"{"worlds": ["w"], "val": {"p": {"w": "x"}}}"#;
        assert!(model_from_json(text).unwrap_err().to_string().starts_with("val.p.w:"));
    }

    #[test]
    fn standard_model_without_t() {
        let text = r#"{"worlds": ["w"], "R": [["w", "w", "1"]], "val": {"p": {"w": "1/3"}}, "crisp": true}"#;
        let m = model_from_json(text).unwrap();
        assert!(matches!(m, LoadedModel::Standard(_)));
        assert!(m.frame().is_crisp());
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    }
}
