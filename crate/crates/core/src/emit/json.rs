//! Versioned JSON documents.
//!
//! Every document is an object with `schema_version` and `kind` next to the
//! model's own fields. Keys are sorted and integers are written exactly, so
//! identical models always produce identical text.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::aggregate::AbstractGraph;
use crate::callgraph::CallGraph;
use crate::comparison::{ComparisonReport, MatchReport};
use crate::cost::{CostVector, DerivedEvent, EventSpec};
use crate::includes::IncludeGraph;
use crate::profile::{CallRecord, FunctionKey, FunctionRecord, Profile};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("expected a JSON object")]
    NotAnObject,
    #[error("unsupported schema_version {0:?}")]
    SchemaVersion(Option<Value>),
    #[error("expected kind `{expected}`, found {found:?}")]
    Kind {
        expected: &'static str,
        found: Option<String>,
    },
}

/// A model with a JSON document form.
pub trait JsonModel: Sized {
    const KIND: &'static str;
    fn to_body(&self) -> Value;
    fn from_body(body: Value) -> Result<Self, serde_json::Error>;
}

macro_rules! serde_model {
    ($ty:ty, $kind:literal) => {
        impl JsonModel for $ty {
            const KIND: &'static str = $kind;

            fn to_body(&self) -> Value {
                serde_json::to_value(self).expect("model serializes")
            }

            fn from_body(body: Value) -> Result<Self, serde_json::Error> {
                serde_json::from_value(body)
            }
        }
    };
}

serde_model!(CallGraph, "call-graph");
serde_model!(AbstractGraph, "abstract-graph");
serde_model!(ComparisonReport, "comparison-report");
serde_model!(IncludeGraph, "include-graph");
serde_model!(MatchReport, "match-report");

#[derive(Serialize, Deserialize)]
struct ProfileFunction {
    #[serde(flatten)]
    key: FunctionKey,
    first_record_index: usize,
    self_cost: CostVector,
    calls: Vec<CallRecord>,
}

#[derive(Serialize, Deserialize)]
struct ProfileBody {
    header: BTreeMap<String, String>,
    events: Vec<String>,
    #[serde(default)]
    derived_events: Vec<DerivedEvent>,
    functions: Vec<ProfileFunction>,
    summary: Option<CostVector>,
}

impl JsonModel for Profile {
    const KIND: &'static str = "profile";

    fn to_body(&self) -> Value {
        let body = ProfileBody {
            header: self.header.clone(),
            events: self.events.names.clone(),
            derived_events: self.events.derived.clone(),
            functions: self
                .functions
                .iter()
                .map(|(k, f)| ProfileFunction {
                    key: k.clone(),
                    first_record_index: f.first_record_index,
                    self_cost: f.self_cost.clone(),
                    calls: f.calls.clone(),
                })
                .collect(),
            summary: self.summary.clone(),
        };
        serde_json::to_value(body).expect("profile serializes")
    }

    fn from_body(body: Value) -> Result<Self, serde_json::Error> {
        let body: ProfileBody = serde_json::from_value(body)?;
        let functions: IndexMap<FunctionKey, FunctionRecord> = body
            .functions
            .into_iter()
            .map(|f| {
                (
                    f.key,
                    FunctionRecord {
                        self_cost: f.self_cost,
                        calls: f.calls,
                        first_record_index: f.first_record_index,
                    },
                )
            })
            .collect();
        Ok(Profile {
            header: body.header,
            events: EventSpec {
                names: body.events,
                derived: body.derived_events,
            },
            functions,
            summary: body.summary,
        })
    }
}

fn envelope<T: JsonModel>(value: &T) -> Value {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    doc.insert("kind".into(), Value::from(T::KIND));
    match value.to_body() {
        Value::Object(body) => doc.extend(body),
        other => {
            doc.insert("value".into(), other);
        }
    }
    Value::Object(doc)
}

/// Pretty-printed JSON document for `value`, newline-terminated.
pub fn emit_json<T: JsonModel>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(&envelope(value)).expect("value serializes");
    s.push('\n');
    s
}

/// Reads a document written by [`emit_json`].
pub fn parse_json<T: JsonModel>(text: &str) -> Result<T, JsonError> {
    let Value::Object(mut doc) = serde_json::from_str::<Value>(text)? else {
        return Err(JsonError::NotAnObject);
    };
    match doc.remove("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        other => return Err(JsonError::SchemaVersion(other)),
    }
    let kind = doc
        .remove("kind")
        .and_then(|k| k.as_str().map(String::from));
    if kind.as_deref() != Some(T::KIND) {
        return Err(JsonError::Kind {
            expected: T::KIND,
            found: kind,
        });
    }
    let body = match doc.remove("value") {
        Some(v) if doc.is_empty() => v,
        Some(v) => {
            doc.insert("value".into(), v);
            Value::Object(doc)
        }
        None => Value::Object(doc),
    };
    Ok(T::from_body(body)?)
}

/// Decodes any model that implements `Deserialize` from a bare value.
pub fn from_value<T: DeserializeOwned>(value: Value) -> Result<T, JsonError> {
    Ok(serde_json::from_value(value)?)
}
