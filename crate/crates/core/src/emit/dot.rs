//! Graphviz DOT output.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write;

use crate::aggregate::AbstractGraph;
use crate::callgraph::CallGraph;
use crate::cost::Share;

pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DotOptions {
    /// Minimum inclusive share of the total for a node to be drawn.
    pub threshold: f64,
    /// Maximum hops from the first entry point.
    pub max_depth: Option<usize>,
    /// Fill colour per category.
    pub color_map: BTreeMap<String, String>,
    pub event_index: usize,
}

impl DotOptions {
    pub fn with_threshold(threshold: f64) -> DotOptions {
        DotOptions {
            threshold,
            ..DotOptions::default()
        }
    }
}

pub fn default_color_map() -> BTreeMap<String, String> {
    [
        ("initialization", "orange"),
        ("class-registration", "red"),
        ("graphics", "blue"),
        ("window-system", "gray"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            threshold: DEFAULT_THRESHOLD,
            max_depth: None,
            color_map: default_color_map(),
            event_index: 0,
        }
    }
}

/// What the DOT writer needs to know about a graph.
pub trait GraphView {
    fn node_count(&self) -> usize;
    fn label(&self, node: usize) -> String;
    fn self_cost(&self, node: usize, event: usize) -> u64;
    fn inclusive_cost(&self, node: usize, event: usize) -> u64;
    fn category(&self, node: usize) -> Option<&str>;
    fn total(&self, event: usize) -> u64;
    /// `(source, target, count)` in a stable order.
    fn edge_list(&self) -> Vec<(usize, usize, u64)>;

    /// Sum of counts on incoming edges, self-loops included.
    fn calls_in(&self, node: usize) -> u64 {
        self.edge_list()
            .iter()
            .filter(|e| e.1 == node)
            .map(|e| e.2)
            .fold(0, u64::saturating_add)
    }

    /// Node without callers having the highest inclusive cost of event 0;
    /// when every node has a caller, the costliest node.
    fn entry(&self) -> Option<usize> {
        let n = self.node_count();
        if n == 0 {
            return None;
        }
        let mut called = vec![false; n];
        for (s, t, _) in self.edge_list() {
            if s != t {
                called[t] = true;
            }
        }
        let pick = |candidates: Vec<usize>| {
            candidates
                .into_iter()
                .min_by_key(|&i| (std::cmp::Reverse(self.inclusive_cost(i, 0)), i))
        };
        let roots: Vec<usize> = (0..n).filter(|&i| !called[i]).collect();
        if roots.is_empty() {
            pick((0..n).collect())
        } else {
            pick(roots)
        }
    }
}

impl GraphView for CallGraph {
    fn node_count(&self) -> usize {
        self.nodes().len()
    }

    fn label(&self, node: usize) -> String {
        self.nodes()[node].key.name.clone()
    }

    fn self_cost(&self, node: usize, event: usize) -> u64 {
        self.nodes()[node].self_cost.get(event)
    }

    fn inclusive_cost(&self, node: usize, event: usize) -> u64 {
        self.nodes()[node].inclusive_cost.get(event)
    }

    fn category(&self, _node: usize) -> Option<&str> {
        None
    }

    fn total(&self, event: usize) -> u64 {
        CallGraph::total(self).get(event)
    }

    fn edge_list(&self) -> Vec<(usize, usize, u64)> {
        self.edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (s, t) = self.endpoints(i);
                (s, t, e.count)
            })
            .collect()
    }

    fn calls_in(&self, node: usize) -> u64 {
        CallGraph::calls_in(self, node)
    }

    fn entry(&self) -> Option<usize> {
        let key = self.entry_points().ok()?.into_iter().next()?;
        self.node_index(&key)
    }
}

impl GraphView for AbstractGraph {
    fn node_count(&self) -> usize {
        self.nodes().len()
    }

    fn label(&self, node: usize) -> String {
        self.nodes()[node].label.clone()
    }

    fn self_cost(&self, node: usize, event: usize) -> u64 {
        self.nodes()[node].self_cost.get(event)
    }

    fn inclusive_cost(&self, node: usize, event: usize) -> u64 {
        self.nodes()[node].inclusive_cost.get(event)
    }

    fn category(&self, node: usize) -> Option<&str> {
        self.nodes()[node].category.as_deref()
    }

    fn total(&self, event: usize) -> u64 {
        AbstractGraph::total(self).get(event)
    }

    fn edge_list(&self) -> Vec<(usize, usize, u64)> {
        self.edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (s, t) = self.endpoints(i);
                (s, t, e.count)
            })
            .collect()
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Indices of the nodes `emit_dot` keeps, in node order.
pub fn selected_nodes<G: GraphView + ?Sized>(graph: &G, options: &DotOptions) -> Vec<usize> {
    let n = graph.node_count();
    let ev = options.event_index;
    let total = graph.total(ev);
    let mut keep: Vec<bool> = (0..n)
        .map(|i| Share::new(graph.inclusive_cost(i, ev), total).at_least(options.threshold))
        .collect();
    if let Some(limit) = options.max_depth {
        let mut depth = vec![usize::MAX; n];
        let mut succ = vec![Vec::new(); n];
        for (s, t, _) in graph.edge_list() {
            succ[s].push(t);
        }
        if let Some(e) = graph.entry() {
            depth[e] = 0;
            let mut queue = VecDeque::from([e]);
            while let Some(u) = queue.pop_front() {
                for &v in &succ[u] {
                    if depth[v] == usize::MAX {
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        for (k, d) in keep.iter_mut().zip(depth) {
            *k &= d <= limit;
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Renders `graph` as a DOT digraph.
///
/// Node labels carry the name, inclusive and self shares of the total and
/// the number of incoming calls; edges carry call counts.
pub fn emit_dot<G: GraphView + ?Sized>(graph: &G, options: &DotOptions) -> String {
    let ev = options.event_index;
    let total = graph.total(ev);
    let selected = selected_nodes(graph, options);
    let mut id = vec![None; graph.node_count()];
    let mut out = String::new();
    out.push_str("digraph callgraph {\n");
    out.push_str("  node [shape=box, fontname=\"Helvetica\"];\n");
    out.push_str("  edge [fontname=\"Helvetica\"];\n");
    for (k, &i) in selected.iter().enumerate() {
        id[i] = Some(k);
        let label = format!(
            "{}\nincl {}\nself {}\ncalls in {}",
            graph.label(i),
            Share::new(graph.inclusive_cost(i, ev), total),
            Share::new(graph.self_cost(i, ev), total),
            graph.calls_in(i)
        );
        write!(out, "  n{k} [label={}", quote(&label)).unwrap();
        if let Some(color) = graph.category(i).and_then(|c| options.color_map.get(c)) {
            write!(out, ", style=filled, fillcolor={}", quote(color)).unwrap();
        }
        out.push_str("];\n");
    }
    for (s, t, count) in graph.edge_list() {
        if let (Some(a), Some(b)) = (id[s], id[t]) {
            writeln!(
                out,
                "  n{a} -> n{b} [label={}];",
                quote(&format!("{count}×"))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}
