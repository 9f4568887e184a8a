//! Tiered matching of graph nodes against named components.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::reference::{Component, ReferenceArchitecture};
use crate::aggregate::{AbstractGraph, AbstractNode};
use crate::cost::Share;
use crate::symbol::name_tokens;

pub const DEFAULT_FUZZY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Exact,
    Fuzzy,
    MethodEvidence,
    Unmatched,
}

impl Tier {
    fn rank(self) -> u8 {
        match self {
            Tier::Exact => 3,
            Tier::Fuzzy => 2,
            Tier::MethodEvidence => 1,
            Tier::Unmatched => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Fuzzy => "fuzzy",
            Tier::MethodEvidence => "method-evidence",
            Tier::Unmatched => "unmatched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub component: String,
    pub matched_label: Option<String>,
    pub tier: Tier,
    pub evidence: Vec<String>,
    pub score: Share,
}

/// Results of matching one graph against one reference architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub reference: String,
    pub results: Vec<MatchResult>,
}

impl MatchReport {
    pub fn unmatched(&self) -> impl Iterator<Item = &MatchResult> {
        self.results.iter().filter(|r| r.tier == Tier::Unmatched)
    }

    pub fn result(&self, component: &str) -> Option<&MatchResult> {
        self.results.iter().find(|r| r.component == component)
    }
}

/// How one component relates to one node, at the best tier that applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub tier: Tier,
    pub score: Share,
    pub evidence: Vec<String>,
}

impl Candidate {
    /// Higher tier first, then higher score.
    pub fn strength_cmp(&self, other: &Candidate) -> Ordering {
        self.tier
            .rank()
            .cmp(&other.tier.rank())
            .then(self.score.cmp(&other.score))
    }
}

fn token_set(label: &str) -> BTreeSet<String> {
    name_tokens(label).into_iter().collect()
}

fn fuzzy(names: &[&str], label: &str, threshold: f64) -> Option<Candidate> {
    let node_tokens = token_set(label);
    let mut best: Option<Candidate> = None;
    for name in names {
        let tokens = token_set(name);
        if tokens.is_empty() || node_tokens.is_empty() {
            continue;
        }
        let shared: Vec<String> = tokens.intersection(&node_tokens).cloned().collect();
        let union = tokens.union(&node_tokens).count();
        let score = Share::new(shared.len() as u64, union as u64);
        let contained = tokens.is_subset(&node_tokens) || node_tokens.is_subset(&tokens);
        if !(contained || score.at_least(threshold)) {
            continue;
        }
        let c = Candidate {
            tier: Tier::Fuzzy,
            score,
            evidence: shared,
        };
        if best.as_ref().is_none_or(|b| c.score > b.score) {
            best = Some(c);
        }
    }
    best
}

fn method_evidence(known: &[String], node: &AbstractNode) -> Option<Candidate> {
    let known: BTreeSet<&str> = known.iter().map(String::as_str).collect();
    if known.is_empty() {
        return None;
    }
    let leaves: BTreeSet<String> = node.member_leaves().into_iter().collect();
    let found: Vec<String> = known
        .iter()
        .filter(|m| leaves.contains(**m))
        .map(|m| m.to_string())
        .collect();
    let needed = if known.len() == 1 { 1 } else { 2 };
    (found.len() >= needed).then(|| Candidate {
        tier: Tier::MethodEvidence,
        score: Share::new(found.len() as u64, known.len() as u64),
        evidence: found,
    })
}

/// Evaluates `component` against `node`; `None` when no tier applies.
pub fn evaluate(
    component: &Component,
    node: &AbstractNode,
    fuzzy_threshold: f64,
) -> Option<Candidate> {
    let label = node.label.to_lowercase();
    if let Some(name) = component.names().find(|n| n.to_lowercase() == label) {
        return Some(Candidate {
            tier: Tier::Exact,
            score: Share::ONE,
            evidence: vec![name.to_string()],
        });
    }
    let names: Vec<&str> = component.names().collect();
    fuzzy(&names, &node.label, fuzzy_threshold)
        .or_else(|| method_evidence(&component.known_methods, node))
}

/// Best match in `graph` for every component of `reference`, in reference order.
///
/// Label equality (case-insensitive, name or alias) beats token similarity,
/// which beats shared method names. Ties go to the higher score and then to
/// the node recorded first. Several components may match one node.
pub fn match_reference(
    graph: &AbstractGraph,
    reference: &ReferenceArchitecture,
    fuzzy_threshold: f64,
) -> Vec<MatchResult> {
    reference
        .components
        .iter()
        .map(|component| {
            let mut best: Option<(&AbstractNode, Candidate)> = None;
            for node in graph.nodes() {
                let Some(c) = evaluate(component, node, fuzzy_threshold) else {
                    continue;
                };
                let better = match &best {
                    None => true,
                    Some((bn, bc)) => match c.strength_cmp(bc) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => {
                            (node.first_record_index, &node.label)
                                < (bn.first_record_index, &bn.label)
                        }
                    },
                };
                if better {
                    best = Some((node, c));
                }
            }
            match best {
                Some((node, c)) => MatchResult {
                    component: component.name.clone(),
                    matched_label: Some(node.label.clone()),
                    tier: c.tier,
                    evidence: c.evidence,
                    score: c.score,
                },
                None => MatchResult {
                    component: component.name.clone(),
                    matched_label: None,
                    tier: Tier::Unmatched,
                    evidence: Vec::new(),
                    score: Share::ZERO,
                },
            }
        })
        .collect()
}
