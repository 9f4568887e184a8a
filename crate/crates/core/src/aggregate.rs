//! Aggregated views of a call graph: one node per class, file or category.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::callgraph::CallGraph;
use crate::cost::{CostVector, EventSpec};
use crate::profile::FunctionKey;
use crate::symbol::parse_symbol;

pub const FREE_FUNCTIONS: &str = "<free functions>";
pub const UNKNOWN_FILE: &str = "<unknown>";
pub const UNCATEGORIZED: &str = "uncategorized";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Function,
    Class,
    File,
    Category,
    /// Directory groups of an include graph.
    Directory,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Function => "function",
            Level::Class => "class",
            Level::File => "file",
            Level::Category => "category",
            Level::Directory => "directory",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "function" => Ok(Level::Function),
            "class" => Ok(Level::Class),
            "file" => Ok(Level::File),
            "category" => Ok(Level::Category),
            "directory" | "dir" => Ok(Level::Directory),
            other => Err(format!("unknown level `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractNode {
    pub label: String,
    /// Members in record order.
    pub members: Vec<FunctionKey>,
    pub self_cost: CostVector,
    /// Self cost plus the cost of calls leaving the group.
    pub inclusive_cost: CostVector,
    pub category: Option<String>,
    pub first_record_index: usize,
}

impl AbstractNode {
    /// Leaf names of the members (method names for class nodes).
    pub fn member_leaves(&self) -> Vec<String> {
        self.members
            .iter()
            .map(|k| parse_symbol(&k.name).leaf)
            .collect()
    }

    pub fn category_or_default(&self) -> &str {
        self.category.as_deref().unwrap_or(UNCATEGORIZED)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractEdge {
    pub source: String,
    pub target: String,
    pub count: u64,
    pub cost: CostVector,
}

#[derive(Serialize, Deserialize)]
struct AbstractGraphRepr {
    level: Level,
    events: EventSpec,
    nodes: Vec<AbstractNode>,
    edges: Vec<AbstractEdge>,
    total: CostVector,
}

/// Aggregated graph. Calls inside one group are kept as a self-loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "AbstractGraphRepr", try_from = "AbstractGraphRepr")]
pub struct AbstractGraph {
    level: Level,
    events: EventSpec,
    nodes: Vec<AbstractNode>,
    edges: Vec<AbstractEdge>,
    total: CostVector,
    by_label: HashMap<String, usize>,
    by_member: HashMap<FunctionKey, usize>,
    endpoints: Vec<(usize, usize)>,
}

impl PartialEq for AbstractGraph {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.events == other.events
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.total == other.total
    }
}

impl Eq for AbstractGraph {}

impl From<AbstractGraph> for AbstractGraphRepr {
    fn from(g: AbstractGraph) -> Self {
        AbstractGraphRepr {
            level: g.level,
            events: g.events,
            nodes: g.nodes,
            edges: g.edges,
            total: g.total,
        }
    }
}

impl TryFrom<AbstractGraphRepr> for AbstractGraph {
    type Error = String;

    fn try_from(r: AbstractGraphRepr) -> Result<Self, Self::Error> {
        AbstractGraph::from_parts(r.level, r.events, r.nodes, r.edges, r.total)
    }
}

/// One unit being grouped: a function, or a whole node when regrouping.
pub(crate) struct GroupItem {
    pub members: Vec<FunctionKey>,
    pub self_cost: CostVector,
    pub first_record_index: usize,
    pub label: String,
}

/// Groups items by label, merging costs and edges.
pub(crate) fn group(
    level: Level,
    events: &EventSpec,
    total: &CostVector,
    items: Vec<GroupItem>,
    item_edges: &[(usize, usize, u64, CostVector)],
    category_of: impl Fn(&str) -> Option<String>,
) -> AbstractGraph {
    let n = events.len();
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, AbstractNode> = HashMap::new();
    let mut item_group: Vec<String> = Vec::with_capacity(items.len());
    for item in items {
        item_group.push(item.label.clone());
        let node = grouped.entry(item.label.clone()).or_insert_with(|| {
            order.push(item.label.clone());
            AbstractNode {
                label: item.label.clone(),
                members: Vec::new(),
                self_cost: CostVector::zero(n),
                inclusive_cost: CostVector::zero(n),
                category: category_of(&item.label),
                first_record_index: item.first_record_index,
            }
        });
        node.members.extend(item.members);
        node.self_cost.add(&item.self_cost);
        node.first_record_index = node.first_record_index.min(item.first_record_index);
    }

    let mut edges: BTreeMap<(String, String), (u64, CostVector)> = BTreeMap::new();
    for (u, v, count, cost) in item_edges {
        let (src, dst) = (&item_group[*u], &item_group[*v]);
        if src != dst {
            grouped
                .get_mut(src)
                .expect("group exists")
                .inclusive_cost
                .add(cost);
        }
        let slot = edges
            .entry((src.clone(), dst.clone()))
            .or_insert_with(|| (0, CostVector::zero(n)));
        slot.0 = slot.0.saturating_add(*count);
        slot.1.add(cost);
    }

    let nodes: Vec<AbstractNode> = order
        .into_iter()
        .map(|label| {
            let mut node = grouped.remove(&label).expect("group exists");
            let mut inclusive = node.self_cost.clone();
            inclusive.add(&node.inclusive_cost);
            node.inclusive_cost = inclusive;
            node
        })
        .collect();
    let edges = edges
        .into_iter()
        .map(|((source, target), (count, cost))| AbstractEdge {
            source,
            target,
            count,
            cost,
        })
        .collect();
    AbstractGraph::from_parts(level, events.clone(), nodes, edges, total.clone())
        .expect("grouping produces consistent graphs")
}

fn object_basename(object: &str) -> &str {
    object.rsplit('/').next().unwrap_or(object)
}

/// Group label of one function at `level`.
pub fn class_label(key: &FunctionKey) -> String {
    let parts = parse_symbol(&key.name);
    if parts.scope_path.is_empty() {
        if key.object.is_empty() {
            FREE_FUNCTIONS.to_string()
        } else {
            format!("{FREE_FUNCTIONS} [{}]", object_basename(&key.object))
        }
    } else {
        parts.scope()
    }
}

fn function_labels(graph: &CallGraph) -> Vec<String> {
    let mut by_name: HashMap<&str, usize> = HashMap::new();
    for n in graph.nodes() {
        *by_name.entry(n.key.name.as_str()).or_default() += 1;
    }
    let first: Vec<String> = graph
        .nodes()
        .iter()
        .map(|n| {
            if by_name[n.key.name.as_str()] > 1 {
                format!("{} [{}]", n.key.name, n.key.file)
            } else {
                n.key.name.clone()
            }
        })
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for l in &first {
        *seen.entry(l.as_str()).or_default() += 1;
    }
    graph
        .nodes()
        .iter()
        .zip(&first)
        .map(|(n, l)| {
            if seen[l.as_str()] > 1 {
                format!("{} [{}:{}]", n.key.name, n.key.object, n.key.file)
            } else {
                l.clone()
            }
        })
        .collect()
}

/// Aggregates `graph` to function, class or file granularity.
///
/// Class labels are the `::`-joined scope of each symbol. Free functions
/// group under `<free functions>`, suffixed with the object's file name when
/// the object is known so that libraries stay separate from the program.
/// Use [`AbstractGraph::regroup_by_category`] for the category level.
pub fn aggregate(graph: &CallGraph, level: Level) -> AbstractGraph {
    let labels: Vec<String> = match level {
        Level::Function => function_labels(graph),
        Level::Class => graph.nodes().iter().map(|n| class_label(&n.key)).collect(),
        Level::File | Level::Directory | Level::Category => graph
            .nodes()
            .iter()
            .map(|n| {
                if n.key.file.is_empty() {
                    UNKNOWN_FILE.to_string()
                } else {
                    n.key.file.clone()
                }
            })
            .collect(),
    };
    let level = if level == Level::Function || level == Level::Class {
        level
    } else {
        Level::File
    };
    let items: Vec<GroupItem> = graph
        .nodes()
        .iter()
        .zip(labels)
        .map(|(n, label)| GroupItem {
            members: vec![n.key.clone()],
            self_cost: n.self_cost.clone(),
            first_record_index: n.first_record_index,
            label,
        })
        .collect();
    let edges: Vec<_> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (u, v) = graph.endpoints(i);
            (u, v, e.count, e.cost.clone())
        })
        .collect();
    group(level, graph.events(), graph.total(), items, &edges, |_| {
        None
    })
}

impl AbstractGraph {
    pub fn from_parts(
        level: Level,
        events: EventSpec,
        mut nodes: Vec<AbstractNode>,
        edges: Vec<AbstractEdge>,
        total: CostVector,
    ) -> Result<AbstractGraph, String> {
        nodes.sort_by(|a, b| {
            a.first_record_index
                .cmp(&b.first_record_index)
                .then_with(|| a.label.cmp(&b.label))
        });
        let mut by_label = HashMap::new();
        let mut by_member = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if by_label.insert(n.label.clone(), i).is_some() {
                return Err(format!("duplicate node label `{}`", n.label));
            }
            if n.members.is_empty() {
                return Err(format!("node `{}` has no members", n.label));
            }
            for m in &n.members {
                if by_member.insert(m.clone(), i).is_some() {
                    return Err(format!("function `{}` belongs to two nodes", m.name));
                }
            }
        }
        let mut endpoints = Vec::with_capacity(edges.len());
        for e in &edges {
            let s = *by_label
                .get(&e.source)
                .ok_or_else(|| format!("edge source `{}` is not a node", e.source))?;
            let t = *by_label
                .get(&e.target)
                .ok_or_else(|| format!("edge target `{}` is not a node", e.target))?;
            endpoints.push((s, t));
        }
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&i| endpoints[i]);
        let edges: Vec<AbstractEdge> = order.iter().map(|&i| edges[i].clone()).collect();
        let endpoints: Vec<(usize, usize)> = order.iter().map(|&i| endpoints[i]).collect();
        Ok(AbstractGraph {
            level,
            events,
            nodes,
            edges,
            total,
            by_label,
            by_member,
            endpoints,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn events(&self) -> &EventSpec {
        &self.events
    }

    pub fn nodes(&self) -> &[AbstractNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[AbstractEdge] {
        &self.edges
    }

    pub fn total(&self) -> &CostVector {
        &self.total
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    pub fn node(&self, label: &str) -> Option<&AbstractNode> {
        self.node_index(label).map(|i| &self.nodes[i])
    }

    /// Index of the node that contains `key`.
    pub fn node_of(&self, key: &FunctionKey) -> Option<usize> {
        self.by_member.get(key).copied()
    }

    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.endpoints[edge]
    }

    pub fn edge(&self, source: &str, target: &str) -> Option<&AbstractEdge> {
        self.edges
            .iter()
            .find(|e| e.source == source && e.target == target)
    }

    /// Targets of `node`'s outgoing edges, self-loops excluded.
    pub fn successors(&self, node: usize) -> Vec<usize> {
        self.endpoints
            .iter()
            .filter(|(s, t)| *s == node && *t != node)
            .map(|&(_, t)| t)
            .collect()
    }

    /// Replaces node categories; used by categorization.
    pub(crate) fn with_categories(mut self, categories: Vec<String>) -> AbstractGraph {
        for (node, c) in self.nodes.iter_mut().zip(categories) {
            node.category = Some(c);
        }
        self
    }

    /// Regroups nodes by category; uncategorized nodes share one group.
    pub fn regroup_by_category(&self) -> AbstractGraph {
        let items: Vec<GroupItem> = self
            .nodes
            .iter()
            .map(|n| GroupItem {
                members: n.members.clone(),
                self_cost: n.self_cost.clone(),
                first_record_index: n.first_record_index,
                label: n.category_or_default().to_string(),
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .zip(&self.endpoints)
            .map(|(e, &(s, t))| (s, t, e.count, e.cost.clone()))
            .collect();
        group(
            Level::Category,
            &self.events,
            &self.total,
            items,
            &edges,
            |label| Some(label.to_string()),
        )
    }
}
