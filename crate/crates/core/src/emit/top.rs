//! Plain-text table of the costliest functions.

use crate::callgraph::{CallGraph, CostKind};
use crate::cost::Share;

/// Indices of the `n` costliest nodes; ties go to the earlier record.
pub fn top_nodes(graph: &CallGraph, n: usize, kind: CostKind, event: usize) -> Vec<usize> {
    let cost = |i: usize| {
        let node = &graph.nodes()[i];
        match kind {
            CostKind::SelfCost => node.self_cost.get(event),
            CostKind::Inclusive => node.inclusive_cost.get(event),
        }
    };
    let mut order: Vec<usize> = (0..graph.nodes().len()).collect();
    order.sort_by_key(|&i| {
        (
            std::cmp::Reverse(cost(i)),
            graph.nodes()[i].first_record_index,
        )
    });
    order.truncate(n);
    order
}

/// Table with columns rank, cost, share of total, calls in and name.
pub fn emit_top(graph: &CallGraph, n: usize, kind: CostKind, event: usize) -> String {
    let total = graph.total().get(event);
    let rows: Vec<[String; 5]> = top_nodes(graph, n, kind, event)
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let node = &graph.nodes()[i];
            let cost = match kind {
                CostKind::SelfCost => node.self_cost.get(event),
                CostKind::Inclusive => node.inclusive_cost.get(event),
            };
            [
                (rank + 1).to_string(),
                cost.to_string(),
                Share::new(cost, total).to_string(),
                graph.calls_in(i).to_string(),
                node.key.to_string(),
            ]
        })
        .collect();
    let header = ["rank", "cost", "%", "calls-in", "name"].map(String::from);
    let mut widths = [0usize; 4];
    for row in std::iter::once(&header).chain(&rows) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        for (w, cell) in widths.iter().zip(row) {
            out.push_str(&format!("{cell:>w$}  ", w = *w));
        }
        out.push_str(&row[4]);
        out.push('\n');
    }
    out
}
