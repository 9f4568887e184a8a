//! Assigning functional categories to aggregated nodes.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::aggregate::{AbstractGraph, UNCATEGORIZED};

const DEFAULT_RULESET: &str = include_str!("../../../data/default-ruleset.toml");

#[derive(Debug, thiserror::Error)]
pub enum RulesetError {
    #[error("invalid ruleset: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("rule {rule}: invalid pattern `{pattern}`: {message}")]
    InvalidPattern {
        rule: usize,
        pattern: String,
        message: String,
    },
    #[error("rule {rule}: category name is empty")]
    EmptyCategory { rule: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRule {
    pub category: String,
    pub patterns: Vec<String>,
    #[serde(default)]
    pub is_regex: bool,
}

#[derive(Debug, Clone)]
enum Pattern {
    Substring(String),
    Regex(Regex),
}

impl Pattern {
    fn matches(&self, text: &str) -> bool {
        match self {
            Pattern::Substring(p) => text.to_lowercase().contains(p.as_str()),
            Pattern::Regex(r) => r.is_match(text),
        }
    }
}

/// Ordered list of rules. Construction compiles every pattern.
#[derive(Debug, Clone)]
pub struct CategoryRuleset {
    rules: Vec<CategoryRule>,
    compiled: Vec<Vec<Pattern>>,
}

#[derive(Deserialize, Serialize)]
struct RulesetFile {
    #[serde(rename = "rule", default)]
    rules: Vec<CategoryRule>,
}

impl CategoryRuleset {
    pub fn new(rules: Vec<CategoryRule>) -> Result<CategoryRuleset, RulesetError> {
        let mut compiled = Vec::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            if rule.category.trim().is_empty() {
                return Err(RulesetError::EmptyCategory { rule: i });
            }
            let mut patterns = Vec::with_capacity(rule.patterns.len());
            for p in &rule.patterns {
                if rule.is_regex {
                    let r = Regex::new(p).map_err(|e| RulesetError::InvalidPattern {
                        rule: i,
                        pattern: p.clone(),
                        message: e.to_string(),
                    })?;
                    patterns.push(Pattern::Regex(r));
                } else {
                    if p.is_empty() {
                        return Err(RulesetError::InvalidPattern {
                            rule: i,
                            pattern: p.clone(),
                            message: "empty substring matches everything".into(),
                        });
                    }
                    patterns.push(Pattern::Substring(p.to_lowercase()));
                }
            }
            compiled.push(patterns);
        }
        Ok(CategoryRuleset { rules, compiled })
    }

    /// Parses `[[rule]]` tables from TOML.
    pub fn from_toml(text: &str) -> Result<CategoryRuleset, RulesetError> {
        let file: RulesetFile = toml::from_str(text)?;
        CategoryRuleset::new(file.rules)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&RulesetFile {
            rules: self.rules.clone(),
        })
        .expect("rules serialize")
    }

    /// The rules shipped with the crate.
    pub fn default_rules() -> CategoryRuleset {
        CategoryRuleset::from_toml(DEFAULT_RULESET).expect("default ruleset is valid")
    }

    pub fn rules(&self) -> &[CategoryRule] {
        &self.rules
    }

    /// Category names in first-rule order, without duplicates.
    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rules {
            if !out.contains(&r.category.as_str()) {
                out.push(&r.category);
            }
        }
        out
    }

    /// First rule whose patterns match `text`.
    pub fn match_text(&self, text: &str) -> Option<&str> {
        self.rules
            .iter()
            .zip(&self.compiled)
            .find(|(_, ps)| ps.iter().any(|p| p.matches(text)))
            .map(|(r, _)| r.category.as_str())
    }

    /// Categorizes one node from its label and member leaf names.
    ///
    /// The label is tried against every rule first; only when nothing
    /// matches are the leaves tried, rule by rule.
    pub fn classify(&self, label: &str, leaves: &[String]) -> &str {
        if let Some(c) = self.match_text(label) {
            return c;
        }
        for (rule, patterns) in self.rules.iter().zip(&self.compiled) {
            if leaves.iter().any(|l| patterns.iter().any(|p| p.matches(l))) {
                return &rule.category;
            }
        }
        UNCATEGORIZED
    }
}

/// Returns `graph` with every node's category set.
pub fn categorize(graph: &AbstractGraph, rules: &CategoryRuleset) -> AbstractGraph {
    let categories = graph
        .nodes()
        .iter()
        .map(|n| rules.classify(&n.label, &n.member_leaves()).to_string())
        .collect();
    graph.clone().with_categories(categories)
}
