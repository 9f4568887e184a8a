//! Side-by-side comparison of two systems.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::matcher::{evaluate, Candidate, Tier, DEFAULT_FUZZY_THRESHOLD};
use super::reference::Component;
use super::sequence::{diff_order, extract_init_sequence, ORDER_APPROXIMATION_NOTE};
use super::ComparisonError;
use crate::aggregate::{AbstractGraph, AbstractNode, Level, UNCATEGORIZED};
use crate::callgraph::CallGraph;
use crate::category::{categorize, CategoryRuleset};
use crate::cost::Share;
use crate::profile::FunctionKey;

pub const DEFAULT_IDLE_THRESHOLD: f64 = 0.01;

/// A categorized graph together with the function its program starts in.
#[derive(Debug, Clone)]
pub struct SystemView {
    pub name: String,
    pub graph: AbstractGraph,
    pub entry: FunctionKey,
}

impl SystemView {
    /// Aggregates and categorizes `graph`, taking its first entry point.
    pub fn from_call_graph(
        name: impl Into<String>,
        graph: &CallGraph,
        level: Level,
        rules: &CategoryRuleset,
    ) -> Result<SystemView, ComparisonError> {
        let entry = graph
            .entry_points()
            .map_err(|_| ComparisonError::EmptySystem)?
            .remove(0);
        let aggregated = crate::aggregate::aggregate(graph, level);
        Ok(SystemView {
            name: name.into(),
            graph: categorize(&aggregated, rules),
            entry,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub fuzzy_threshold: f64,
    /// Categorized nodes below this inclusive share are reported as idle.
    pub idle_threshold: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            fuzzy_threshold: DEFAULT_FUZZY_THRESHOLD,
            idle_threshold: DEFAULT_IDLE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonNode {
    pub left: String,
    pub right: String,
    pub tier: Tier,
    pub left_category: String,
    pub right_category: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryComparison {
    pub common: Vec<String>,
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub left: String,
    pub right: String,
    pub common: Vec<CommonNode>,
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
    pub categories: CategoryComparison,
    pub left_order: Vec<String>,
    pub right_order: Vec<String>,
    pub order_inversions: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    pub fn has_inversion(&self, first: &str, second: &str) -> bool {
        self.order_inversions
            .iter()
            .any(|(a, b)| (a == first && b == second) || (a == second && b == first))
    }
}

fn as_component(node: &AbstractNode) -> Component {
    let mut methods: Vec<String> = node.member_leaves();
    methods.sort();
    methods.dedup();
    Component {
        name: node.label.clone(),
        layer: 0,
        aliases: Vec::new(),
        known_methods: methods,
    }
}

/// The stronger of matching `a` against `b` and `b` against `a`.
fn pair_candidate(a: &AbstractNode, b: &AbstractNode, threshold: f64) -> Option<Candidate> {
    let ab = evaluate(&as_component(a), b, threshold);
    let ba = evaluate(&as_component(b), a, threshold);
    match (ab, ba) {
        (Some(x), Some(y)) => Some(if y.strength_cmp(&x) == Ordering::Greater {
            y
        } else {
            x
        }),
        (x, y) => x.or(y),
    }
}

fn idle_notes(system: &SystemView, threshold: f64) -> Vec<String> {
    let total = system.graph.total().get(0);
    system
        .graph
        .nodes()
        .iter()
        .filter(|n| n.category_or_default() != UNCATEGORIZED)
        .filter_map(|n| {
            let share = Share::new(n.inclusive_cost.get(0), total);
            (!share.at_least(threshold)).then(|| {
                format!(
                    "initialized but possibly unused in {}: {} ({}, {} inclusive)",
                    system.name,
                    n.label,
                    n.category_or_default(),
                    share
                )
            })
        })
        .collect()
}

fn categories(graph: &AbstractGraph) -> BTreeSet<String> {
    graph
        .nodes()
        .iter()
        .map(|n| n.category_or_default().to_string())
        .filter(|c| c != UNCATEGORIZED)
        .collect()
}

/// Compares two categorized systems.
///
/// Nodes are paired one-to-one with the tiered matcher, each side serving
/// as the reference for the other; the strongest pairs are taken first.
pub fn compare(
    left: &SystemView,
    right: &SystemView,
    options: &CompareOptions,
) -> Result<ComparisonReport, ComparisonError> {
    let (ln, rn) = (left.graph.nodes(), right.graph.nodes());
    let mut pairs: Vec<(usize, usize, Candidate)> = Vec::new();
    for (i, a) in ln.iter().enumerate() {
        for (j, b) in rn.iter().enumerate() {
            if let Some(c) = pair_candidate(a, b, options.fuzzy_threshold) {
                pairs.push((i, j, c));
            }
        }
    }
    let tie_key = |i: usize, j: usize| {
        let (a, b) = (&ln[i].label, &rn[j].label);
        (
            ln[i].first_record_index + rn[j].first_record_index,
            a.min(b).clone(),
            a.max(b).clone(),
        )
    };
    pairs.sort_by(|(i1, j1, c1), (i2, j2, c2)| {
        c2.strength_cmp(c1)
            .then_with(|| tie_key(*i1, *j1).cmp(&tie_key(*i2, *j2)))
    });

    let mut left_match: Vec<Option<(usize, Tier)>> = vec![None; ln.len()];
    let mut right_taken = vec![false; rn.len()];
    for (i, j, c) in pairs {
        if left_match[i].is_none() && !right_taken[j] {
            left_match[i] = Some((j, c.tier));
            right_taken[j] = true;
        }
    }

    let common = left_match
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            m.map(|(j, tier)| CommonNode {
                left: ln[i].label.clone(),
                right: rn[j].label.clone(),
                tier,
                left_category: ln[i].category_or_default().to_string(),
                right_category: rn[j].category_or_default().to_string(),
            })
        })
        .collect();
    let only_left = ln
        .iter()
        .zip(&left_match)
        .filter(|(_, m)| m.is_none())
        .map(|(n, _)| n.label.clone())
        .collect();
    let only_right = rn
        .iter()
        .zip(&right_taken)
        .filter(|(_, t)| !**t)
        .map(|(n, _)| n.label.clone())
        .collect();

    let (lc, rc) = (categories(&left.graph), categories(&right.graph));
    let category_cmp = CategoryComparison {
        common: lc.intersection(&rc).cloned().collect(),
        only_left: lc.difference(&rc).cloned().collect(),
        only_right: rc.difference(&lc).cloned().collect(),
    };

    let ls = extract_init_sequence(&left.graph, &left.entry)?;
    let rs = extract_init_sequence(&right.graph, &right.entry)?;
    let order_inversions = diff_order(&ls, &rs);

    let mut notes = vec![ORDER_APPROXIMATION_NOTE.to_string()];
    notes.extend(idle_notes(left, options.idle_threshold));
    notes.extend(idle_notes(right, options.idle_threshold));

    Ok(ComparisonReport {
        left: left.name.clone(),
        right: right.name.clone(),
        common,
        only_left,
        only_right,
        categories: category_cmp,
        left_order: ls.category_order().into_iter().map(String::from).collect(),
        right_order: rs.category_order().into_iter().map(String::from).collect(),
        order_inversions,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callgraph::build_graph;
    use crate::profile::parse_str;

    fn system(name: &str, text: &str) -> SystemView {
        let g = build_graph(&parse_str(text).unwrap());
        SystemView::from_call_graph(name, &g, Level::Class, &CategoryRuleset::default_rules())
            .unwrap()
    }

    const LEFT: &str = "events: Ir\nfn=main\n1 1\ncfn=Engine::setup\ncalls=1 0\n1 30\ncfn=Mixer::mix\ncalls=1 0\n1 1000\nfn=Engine::setup\n1 10\ncfn=X11Window::create\ncalls=1 0\n1 10\ncfn=Renderer::draw\ncalls=1 0\n1 10\nfn=X11Window::create\n1 10\nfn=Renderer::draw\n1 10\nfn=Mixer::mix\n1 1000\n";
    const RIGHT: &str = "events: Ir\nfn=main\n1 1\ncfn=Engine::setup\ncalls=1 0\n1 30\nfn=Engine::setup\n1 10\ncfn=Renderer::draw\ncalls=1 0\n1 10\ncfn=Window::open\ncalls=1 0\n1 10\nfn=Renderer::draw\n1 10\nfn=Window::open\n1 10\n";

    #[test]
    fn self_comparison_is_empty() {
        let a = system("a", LEFT);
        let r = compare(&a, &a, &CompareOptions::default()).unwrap();
        assert!(r.only_left.is_empty());
        assert!(r.only_right.is_empty());
        assert!(r.order_inversions.is_empty());
        assert_eq!(r.common.len(), a.graph.nodes().len());
        assert!(r
            .common
            .iter()
            .all(|c| c.tier == Tier::Exact && c.left == c.right));
    }

    #[test]
    fn finds_inversion_and_unique_nodes() {
        let r = compare(
            &system("l", LEFT),
            &system("r", RIGHT),
            &CompareOptions::default(),
        )
        .unwrap();
        assert_eq!(
            r.left_order,
            ["initialization", "window-system", "graphics"]
        );
        assert_eq!(
            r.right_order,
            ["initialization", "graphics", "window-system"]
        );
        assert_eq!(
            r.order_inversions,
            [("window-system".to_string(), "graphics".to_string())]
        );
        assert!(r.only_left.contains(&"Mixer".to_string()));
        let window = r.common.iter().find(|c| c.left == "X11Window").unwrap();
        assert_eq!(
            (window.right.as_str(), window.tier),
            ("Window", Tier::Fuzzy)
        );
        assert_eq!(
            r.categories.common,
            ["graphics", "initialization", "window-system"]
        );
    }

    #[test]
    fn idle_categorized_nodes_are_noted() {
        let r = compare(
            &system("l", LEFT),
            &system("r", RIGHT),
            &CompareOptions::default(),
        )
        .unwrap();
        assert_eq!(r.notes[0], ORDER_APPROXIMATION_NOTE);
        assert!(r
            .notes
            .iter()
            .any(|n| n.contains("in l: X11Window (window-system")));
        assert!(!r.notes.iter().any(|n| n.contains("in r: Engine")));
    }
}
