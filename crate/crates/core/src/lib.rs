//! Architecture recovery from Callgrind profiles.
//!
//! Parse a profile with [`profile::parse_str`], build a
//! [`callgraph::CallGraph`], group it with [`aggregate::aggregate`], label it
//! with [`category::categorize`] and then match or compare the result. The
//! [`includes`] module does the same job for `#include` graphs.

pub mod aggregate;
pub mod callgraph;
pub mod category;
pub mod comparison;
pub mod cost;
pub mod emit;
pub mod includes;
pub mod profile;
pub mod scc;
pub mod symbol;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/call-graphs.md")]
    mod call_graphs {}
    #[doc = include_str!("../../../book/src/aggregation.md")]
    mod aggregation {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/includes.md")]
    mod includes {}
    #[doc = include_str!("../../../book/src/output.md")]
    mod output {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/walkthrough.md")]
    mod walkthrough {}
}
