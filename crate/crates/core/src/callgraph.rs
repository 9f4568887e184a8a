//! Weighted call graph built from a [`Profile`].

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::{CostVector, EventSpec, Share};
use crate::profile::{FunctionKey, Profile};
use crate::scc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionNode {
    pub key: FunctionKey,
    pub self_cost: CostVector,
    /// Self cost plus the recorded cost of every outgoing call.
    pub inclusive_cost: CostVector,
    pub first_record_index: usize,
    pub scc_id: usize,
    /// Member of a multi-node component or directly self-recursive.
    pub cyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: FunctionKey,
    pub callee: FunctionKey,
    pub count: u64,
    pub cost: CostVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    #[serde(rename = "self")]
    SelfCost,
    Inclusive,
}

impl FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "self" | "exclusive" => Ok(CostKind::SelfCost),
            "inclusive" | "incl" => Ok(CostKind::Inclusive),
            other => Err(format!(
                "unknown cost kind `{other}` (expected self or inclusive)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("event index {index} out of range ({len} events)")]
    EventOutOfRange { index: usize, len: usize },
    #[error("edge endpoint `{0}` is not a node")]
    DanglingEdge(String),
}

#[derive(Serialize, Deserialize)]
struct CallGraphRepr {
    events: EventSpec,
    nodes: Vec<FunctionNode>,
    edges: Vec<CallEdge>,
    total: CostVector,
}

/// Immutable call graph. Nodes are ordered by `first_record_index`; edges by
/// (caller, callee) node order, one edge per pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "CallGraphRepr", try_from = "CallGraphRepr")]
pub struct CallGraph {
    events: EventSpec,
    nodes: Vec<FunctionNode>,
    edges: Vec<CallEdge>,
    total: CostVector,
    index: HashMap<FunctionKey, usize>,
    endpoints: Vec<(usize, usize)>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.total == other.total
    }
}

impl Eq for CallGraph {}

impl From<CallGraph> for CallGraphRepr {
    fn from(g: CallGraph) -> Self {
        CallGraphRepr {
            events: g.events,
            nodes: g.nodes,
            edges: g.edges,
            total: g.total,
        }
    }
}

impl TryFrom<CallGraphRepr> for CallGraph {
    type Error = GraphError;

    fn try_from(r: CallGraphRepr) -> Result<Self, Self::Error> {
        CallGraph::from_parts(r.events, r.nodes, r.edges, r.total)
    }
}

/// Builds the call graph for `profile`.
///
/// Callees without their own `fn=` record become zero-cost frontier nodes,
/// numbered after all recorded functions in order of first mention.
pub fn build_graph(profile: &Profile) -> CallGraph {
    let n_events = profile.events.len();
    let mut nodes: Vec<FunctionNode> = Vec::new();
    let mut index: HashMap<FunctionKey, usize> = HashMap::new();
    let ordered = profile.functions_in_record_order();
    for (key, record) in &ordered {
        index.insert((*key).clone(), nodes.len());
        nodes.push(FunctionNode {
            key: (*key).clone(),
            self_cost: record.self_cost.clone().normalized(n_events),
            inclusive_cost: CostVector::zero(n_events),
            first_record_index: record.first_record_index,
            scc_id: 0,
            cyclic: false,
        });
    }
    let mut next_index = ordered.last().map_or(0, |(_, r)| r.first_record_index + 1);

    let mut merged: HashMap<(usize, usize), (u64, CostVector)> = HashMap::new();
    for (key, record) in &ordered {
        let caller = index[*key];
        for call in &record.calls {
            let callee = match index.get(&call.callee) {
                Some(&i) => i,
                None => {
                    let i = nodes.len();
                    index.insert(call.callee.clone(), i);
                    nodes.push(FunctionNode {
                        key: call.callee.clone(),
                        self_cost: CostVector::zero(n_events),
                        inclusive_cost: CostVector::zero(n_events),
                        first_record_index: next_index,
                        scc_id: 0,
                        cyclic: false,
                    });
                    next_index += 1;
                    i
                }
            };
            let slot = merged
                .entry((caller, callee))
                .or_insert_with(|| (0, CostVector::zero(n_events)));
            slot.0 = slot.0.saturating_add(call.count);
            slot.1.add(&call.inclusive_cost);
        }
    }

    let mut pairs: Vec<_> = merged.into_iter().collect();
    pairs.sort_by_key(|(k, _)| *k);
    let edges: Vec<CallEdge> = pairs
        .into_iter()
        .map(|((caller, callee), (count, cost))| CallEdge {
            caller: nodes[caller].key.clone(),
            callee: nodes[callee].key.clone(),
            count,
            cost,
        })
        .collect();

    let total = profile.total().normalized(n_events);
    CallGraph::from_parts(profile.events.clone(), nodes, edges, total)
        .expect("edges built from known nodes")
}

impl CallGraph {
    /// Assembles a graph and recomputes inclusive costs and components.
    ///
    /// Parallel edges are merged; nodes are re-sorted by record index.
    pub fn from_parts(
        events: EventSpec,
        mut nodes: Vec<FunctionNode>,
        edges: Vec<CallEdge>,
        total: CostVector,
    ) -> Result<CallGraph, GraphError> {
        let n_events = events.len();
        nodes.sort_by_key(|n| n.first_record_index);
        let index: HashMap<FunctionKey, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.key.clone(), i))
            .collect();

        let mut merged: HashMap<(usize, usize), (u64, CostVector)> = HashMap::new();
        for e in edges {
            let caller = *index
                .get(&e.caller)
                .ok_or_else(|| GraphError::DanglingEdge(e.caller.name.clone()))?;
            let callee = *index
                .get(&e.callee)
                .ok_or_else(|| GraphError::DanglingEdge(e.callee.name.clone()))?;
            let slot = merged
                .entry((caller, callee))
                .or_insert_with(|| (0, CostVector::zero(n_events)));
            slot.0 = slot.0.saturating_add(e.count);
            slot.1.add(&e.cost);
        }
        let mut pairs: Vec<_> = merged.into_iter().collect();
        pairs.sort_by_key(|(k, _)| *k);

        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut endpoints = Vec::with_capacity(pairs.len());
        let mut merged_edges = Vec::with_capacity(pairs.len());
        for (i, ((caller, callee), (count, cost))) in pairs.into_iter().enumerate() {
            outgoing[caller].push(i);
            incoming[callee].push(i);
            endpoints.push((caller, callee));
            merged_edges.push(CallEdge {
                caller: nodes[caller].key.clone(),
                callee: nodes[callee].key.clone(),
                count,
                cost: cost.normalized(n_events),
            });
        }

        for (i, node) in nodes.iter_mut().enumerate() {
            node.self_cost = std::mem::take(&mut node.self_cost).normalized(n_events);
            let mut inclusive = node.self_cost.clone();
            for &e in &outgoing[i] {
                inclusive.add(&merged_edges[e].cost);
            }
            node.inclusive_cost = inclusive;
        }

        let adjacency: Vec<Vec<usize>> = outgoing
            .iter()
            .map(|es| es.iter().map(|&e| endpoints[e].1).collect())
            .collect();
        let ids = scc::component_ids(&adjacency);
        let mut sizes = vec![0usize; ids.iter().max().map_or(0, |m| m + 1)];
        for &c in &ids {
            sizes[c] += 1;
        }
        for (i, node) in nodes.iter_mut().enumerate() {
            node.scc_id = ids[i];
            node.cyclic = sizes[ids[i]] > 1 || adjacency[i].contains(&i);
        }

        Ok(CallGraph {
            events,
            nodes,
            edges: merged_edges,
            total: total.normalized(n_events),
            index,
            endpoints,
            outgoing,
            incoming,
        })
    }

    pub fn events(&self) -> &EventSpec {
        &self.events
    }

    pub fn nodes(&self) -> &[FunctionNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CallEdge] {
        &self.edges
    }

    pub fn total(&self) -> &CostVector {
        &self.total
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, key: &FunctionKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn node(&self, key: &FunctionKey) -> Option<&FunctionNode> {
        self.node_index(key).map(|i| &self.nodes[i])
    }

    /// First node (in record order) whose symbol is `name`.
    pub fn node_named(&self, name: &str) -> Option<&FunctionNode> {
        self.nodes.iter().find(|n| n.key.name == name)
    }

    /// `(caller index, callee index)` for edge `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.endpoints[e]
    }

    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// Total number of calls into `node`.
    pub fn calls_in(&self, node: usize) -> u64 {
        self.incoming[node]
            .iter()
            .map(|&e| self.edges[e].count)
            .fold(0, u64::saturating_add)
    }

    /// Cost of `key` relative to the program total, capped at 100%.
    pub fn percent_of_total(
        &self,
        key: &FunctionKey,
        kind: CostKind,
        event: usize,
    ) -> Result<Share, GraphError> {
        let node = self
            .node(key)
            .ok_or_else(|| GraphError::UnknownFunction(key.name.clone()))?;
        if event >= self.events.len() {
            return Err(GraphError::EventOutOfRange {
                index: event,
                len: self.events.len(),
            });
        }
        let cost = match kind {
            CostKind::SelfCost => &node.self_cost,
            CostKind::Inclusive => &node.inclusive_cost,
        };
        Ok(Share::new(cost.get(event), self.total.get(event)))
    }

    /// Roots of the graph, most expensive first.
    ///
    /// Nodes without callers (self-calls ignored), ordered by descending
    /// inclusive cost of event 0 and then record index. A graph where every
    /// node has a caller yields its single most expensive node.
    pub fn entry_points(&self) -> Result<Vec<FunctionKey>, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let has_caller = |i: usize| self.incoming[i].iter().any(|&e| self.endpoints[e].0 != i);
        let by_cost = |a: &usize, b: &usize| {
            let (na, nb) = (&self.nodes[*a], &self.nodes[*b]);
            nb.inclusive_cost
                .get(0)
                .cmp(&na.inclusive_cost.get(0))
                .then(na.first_record_index.cmp(&nb.first_record_index))
        };
        let mut roots: Vec<usize> = (0..self.nodes.len()).filter(|&i| !has_caller(i)).collect();
        if roots.is_empty() {
            let best = (0..self.nodes.len())
                .min_by(by_cost)
                .expect("graph is non-empty");
            return Ok(vec![self.nodes[best].key.clone()]);
        }
        roots.sort_by(by_cost);
        Ok(roots
            .into_iter()
            .map(|i| self.nodes[i].key.clone())
            .collect())
    }

    /// The component partition, ordered by component id.
    pub fn strongly_connected_components(&self) -> Vec<Vec<FunctionKey>> {
        let ids: Vec<usize> = self.nodes.iter().map(|n| n.scc_id).collect();
        scc::components(&ids)
            .into_iter()
            .map(|members| {
                members
                    .into_iter()
                    .map(|i| self.nodes[i].key.clone())
                    .collect()
            })
            .collect()
    }
}
