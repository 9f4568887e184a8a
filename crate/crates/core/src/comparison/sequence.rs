//! Initialization sequences and their pairwise order differences.

use serde::{Deserialize, Serialize};

use super::ComparisonError;
use crate::aggregate::{AbstractGraph, UNCATEGORIZED};
use crate::profile::FunctionKey;

/// Caveat attached to every sequence: the profile format has no timestamps.
pub const ORDER_APPROXIMATION_NOTE: &str =
    "call order is approximated by depth-first traversal in \
record order (first_record_index); the profile format carries no timestamps";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitEntry {
    pub label: String,
    pub category: String,
    pub first_record_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitSequence {
    pub entries: Vec<InitEntry>,
}

impl InitSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    /// First occurrence of each category, `uncategorized` left out.
    pub fn category_order(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if e.category != UNCATEGORIZED && !out.contains(&e.category.as_str()) {
                out.push(&e.category);
            }
        }
        out
    }
}

/// Depth-first order in which nodes are first reached from `entry`.
///
/// Children are visited in ascending `first_record_index`; self-loops are
/// ignored and each node is emitted once, when first visited.
pub fn extract_init_sequence(
    graph: &AbstractGraph,
    entry: &FunctionKey,
) -> Result<InitSequence, ComparisonError> {
    let start = graph
        .node_of(entry)
        .ok_or_else(|| ComparisonError::UnknownEntry(entry.name.clone()))?;
    let nodes = graph.nodes();
    let children: Vec<Vec<usize>> = (0..nodes.len())
        .map(|i| {
            let mut c = graph.successors(i);
            c.sort_by(|&a, &b| {
                (nodes[a].first_record_index, &nodes[a].label)
                    .cmp(&(nodes[b].first_record_index, &nodes[b].label))
            });
            c.dedup();
            c
        })
        .collect();

    let mut visited = vec![false; nodes.len()];
    let mut entries = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
    visited[start] = true;
    entries.push(start);
    while let Some((node, next)) = stack.last_mut() {
        let node = *node;
        let Some(&child) = children[node].get(*next) else {
            stack.pop();
            continue;
        };
        *next += 1;
        if !visited[child] {
            visited[child] = true;
            entries.push(child);
            stack.push((child, 0));
        }
    }
    Ok(InitSequence {
        entries: entries
            .into_iter()
            .map(|i| InitEntry {
                label: nodes[i].label.clone(),
                category: nodes[i].category_or_default().to_string(),
                first_record_index: nodes[i].first_record_index,
            })
            .collect(),
    })
}

/// Category pairs whose relative order differs between `a` and `b`.
///
/// Only categories present in both sequences count, each at its first
/// occurrence. A pair `(x, y)` has `x` before `y` in `a`; the list is sorted.
pub fn diff_order(a: &InitSequence, b: &InitSequence) -> Vec<(String, String)> {
    let order_a = a.category_order();
    let order_b = b.category_order();
    let pos_b = |c: &str| order_b.iter().position(|x| *x == c);
    let shared: Vec<(&str, usize)> = order_a
        .iter()
        .filter_map(|c| pos_b(c).map(|p| (*c, p)))
        .collect();
    let mut out = Vec::new();
    for (i, (x, px)) in shared.iter().enumerate() {
        for (y, py) in &shared[i + 1..] {
            if py < px {
                out.push((x.to_string(), y.to_string()));
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{aggregate, Level};
    use crate::callgraph::build_graph;
    use crate::category::{categorize, CategoryRuleset};
    use crate::profile::parse_str;

    fn seq(cats: &[&str]) -> InitSequence {
        InitSequence {
            entries: cats
                .iter()
                .enumerate()
                .map(|(i, c)| InitEntry {
                    label: format!("n{i}"),
                    category: c.to_string(),
                    first_record_index: i,
                })
                .collect(),
        }
    }

    #[test]
    fn single_node_graph() {
        let g = aggregate(
            &build_graph(&parse_str("events: Ir\nfn=main\n1 1\n").unwrap()),
            Level::Class,
        );
        let s = extract_init_sequence(&g, &FunctionKey::named("main")).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn unknown_entry_is_an_error() {
        let g = aggregate(
            &build_graph(&parse_str("events: Ir\nfn=main\n1 1\n").unwrap()),
            Level::Class,
        );
        assert!(matches!(
            extract_init_sequence(&g, &FunctionKey::named("nope")),
            Err(ComparisonError::UnknownEntry(_))
        ));
    }

    #[test]
    fn children_follow_record_order() {
        let text = "events: Ir\nfn=main\n1 1\ncfn=B::b\ncalls=1 0\n1 1\ncfn=A::a\ncalls=1 0\n1 1\nfn=A::a\n1 1\nfn=B::b\n1 1\ncfn=C::c\ncalls=1 0\n1 1\nfn=C::c\n1 1\n";
        let g = aggregate(&build_graph(&parse_str(text).unwrap()), Level::Class);
        let s = extract_init_sequence(&g, &FunctionKey::named("main")).unwrap();
        assert_eq!(s.labels(), ["<free functions>", "A", "B", "C"]);
        let g = categorize(&g, &CategoryRuleset::default_rules());
        let s = extract_init_sequence(&g, &FunctionKey::named("main")).unwrap();
        assert!(s.category_order().is_empty());
    }

    #[test]
    fn inversions() {
        let a = seq(&["initialization", "window-system", "graphics"]);
        let b = seq(&["initialization", "graphics", "window-system"]);
        assert_eq!(
            diff_order(&a, &b),
            [("window-system".to_string(), "graphics".to_string())]
        );
        assert!(diff_order(&a, &a).is_empty());
        assert!(diff_order(&seq(&["x"]), &seq(&["y"])).is_empty());
    }

    #[test]
    fn repeated_categories_use_first_occurrence() {
        let a = seq(&["graphics", "window-system", "graphics"]);
        assert_eq!(a.category_order(), ["graphics", "window-system"]);
    }
}
