//! In-memory model of one Callgrind profile.
//!
//! [`parse_profile`] reads the line-oriented text format, resolving name
//! compression and position compression, and aggregates costs per function.
//! [`write_canonical`] emits the same model back without any compression.

mod merge;
mod parse;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cost::{CostVector, EventSpec};

pub use merge::merge_parts;
pub use parse::{parse_parts, parse_profile, parse_str};
pub use write::{write_canonical, write_canonical_string};

/// Identity of a function: object, source file and symbol.
///
/// Two functions with the same name in different files are distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionKey {
    #[serde(default)]
    pub object: String,
    #[serde(default)]
    pub file: String,
    pub name: String,
}

impl FunctionKey {
    pub fn new(
        object: impl Into<String>,
        file: impl Into<String>,
        name: impl Into<String>,
    ) -> Self {
        FunctionKey {
            object: object.into(),
            file: file.into(),
            name: name.into(),
        }
    }

    /// A key with empty object and file.
    pub fn named(name: impl Into<String>) -> Self {
        FunctionKey::new("", "", name)
    }
}

impl fmt::Display for FunctionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.file.is_empty() {
            write!(f, " [{}]", self.file)?;
        }
        Ok(())
    }
}

/// Calls from one function to `callee` recorded at one call site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub callee: FunctionKey,
    pub count: u64,
    pub inclusive_cost: CostVector,
}

/// Everything recorded for one function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub self_cost: CostVector,
    pub calls: Vec<CallRecord>,
    /// Position of the function's first `fn=` record in the input.
    pub first_record_index: usize,
}

/// A parsed profile.
///
/// `functions` iterates in first-appearance order; equality ignores order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Profile {
    pub header: BTreeMap<String, String>,
    pub events: EventSpec,
    pub functions: IndexMap<FunctionKey, FunctionRecord>,
    pub summary: Option<CostVector>,
}

impl Profile {
    pub fn function(&self, key: &FunctionKey) -> Option<&FunctionRecord> {
        self.functions.get(key)
    }

    /// Looks a function up by symbol alone; the first match in record order.
    pub fn function_named(&self, name: &str) -> Option<(&FunctionKey, &FunctionRecord)> {
        self.functions.iter().find(|(k, _)| k.name == name)
    }

    pub fn call_count(&self) -> usize {
        self.functions.values().map(|f| f.calls.len()).sum()
    }

    /// Per-event sum of all self costs.
    pub fn self_cost_total(&self) -> CostVector {
        let mut total = self.events.zero();
        for f in self.functions.values() {
            total.add(&f.self_cost);
        }
        total
    }

    /// The summary line if present, otherwise the sum of self costs.
    pub fn total(&self) -> CostVector {
        self.summary
            .clone()
            .unwrap_or_else(|| self.self_cost_total())
    }

    /// Functions sorted by `first_record_index`.
    pub fn functions_in_record_order(&self) -> Vec<(&FunctionKey, &FunctionRecord)> {
        let mut v: Vec<_> = self.functions.iter().collect();
        v.sort_by_key(|(_, f)| f.first_record_index);
        v
    }

    /// Checks that self costs add up to the summary, if there is one.
    pub fn check_conservation(&self) -> Result<(), ProfileError> {
        let Some(summary) = &self.summary else {
            return Ok(());
        };
        let actual = self.self_cost_total();
        for (i, name) in self.events.names.iter().enumerate() {
            if summary.get(i) != actual.get(i) {
                return Err(ProfileError::SummaryMismatch {
                    event: name.clone(),
                    summary: summary.get(i),
                    actual: actual.get(i),
                });
            }
        }
        Ok(())
    }
}

/// What went wrong on a syntactically invalid line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    UnknownDirective,
    UndefinedCompressionId,
    NonNumericCost,
    CostBeforeFunction,
    CallsWithoutCostLine,
    CallsWithoutCallee,
    TooManyCosts,
    InvalidCallCount,
    EmptyName,
    EventsAfterData,
    DuplicateEvent,
    InvalidPositions,
    CostOverflow,
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SyntaxErrorKind::UnknownDirective => "unknown directive",
            SyntaxErrorKind::UndefinedCompressionId => "reference to undefined compression id",
            SyntaxErrorKind::NonNumericCost => "non-numeric cost or position",
            SyntaxErrorKind::CostBeforeFunction => "cost line before any fn= directive",
            SyntaxErrorKind::CallsWithoutCostLine => "calls= line not followed by a cost line",
            SyntaxErrorKind::CallsWithoutCallee => "calls= line without a preceding cfn=",
            SyntaxErrorKind::TooManyCosts => "more cost values than declared events",
            SyntaxErrorKind::InvalidCallCount => "call count must be a positive integer",
            SyntaxErrorKind::EmptyName => "empty function name",
            SyntaxErrorKind::EventsAfterData => "events: redeclared after cost data",
            SyntaxErrorKind::DuplicateEvent => "duplicate event name",
            SyntaxErrorKind::InvalidPositions => "positions: must list `instr` and/or `line`",
            SyntaxErrorKind::CostOverflow => "cost exceeds 64-bit range",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("line {line}: {kind} (at `{token}`)")]
    Syntax {
        line: usize,
        token: String,
        kind: SyntaxErrorKind,
    },
    #[error("no `events:` line found")]
    EmptyProfile,
    #[error("parts declare different events: {left:?} vs {right:?}")]
    EventMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("summary for event {event} is {summary}, but self costs add up to {actual}")]
    SummaryMismatch {
        event: String,
        summary: u64,
        actual: u64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ProfileError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ProfileError::Syntax { line, .. } => Some(*line),
            _ => None,
        }
    }
}
