//! Matching graphs against reference architectures and comparing systems.

mod matcher;
mod reference;
mod report;
mod sequence;

pub use matcher::{
    evaluate, match_reference, Candidate, MatchReport, MatchResult, Tier, DEFAULT_FUZZY_THRESHOLD,
};
pub use reference::{Component, ReferenceArchitecture, ReferenceError};
pub use report::{
    compare, CategoryComparison, CommonNode, CompareOptions, ComparisonReport, SystemView,
    DEFAULT_IDLE_THRESHOLD,
};
pub use sequence::{
    diff_order, extract_init_sequence, InitEntry, InitSequence, ORDER_APPROXIMATION_NOTE,
};

#[derive(Debug, thiserror::Error)]
pub enum ComparisonError {
    #[error("entry function `{0}` is not in the graph")]
    UnknownEntry(String),
    #[error("system has no functions")]
    EmptySystem,
}
