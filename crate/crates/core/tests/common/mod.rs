//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anatomy::cost::{CostVector, EventSpec};
use anatomy::includes::{scan_includes, IncludeGraph, IncludeKind, DEFAULT_EXTENSIONS};
use anatomy::profile::{CallRecord, FunctionKey, FunctionRecord, Profile};
use indexmap::IndexMap;
use proptest::prelude::*;
use serde::Deserialize;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const OBJECTS: &[&str] = &["", "/usr/bin/app", "/lib/libfoo.so.1", "libGL.so"];
const FILES: &[&str] = &[
    "",
    "main.c",
    "src/render/gl_view.cpp",
    "???",
    "core/os/os.h",
];
const SCOPES: &[&str] = &[
    "",
    "Foo",
    "ns::Bar",
    "VisualServer",
    "ClassDB",
    "std::vector<int, std::allocator<int> >",
    "Physics2DServer",
];
const LEAVES: &[&str] = &[
    "run",
    "init",
    "get_singleton",
    "register_class<Object>",
    "Draw2D",
    "operator()",
    "operator\"\" _km",
    "setup(int, char const*)",
    "(1) odd",
    "back\\slash",
    "x11_open",
];

pub fn arb_name() -> impl Strategy<Value = String> {
    (0..SCOPES.len(), 0..LEAVES.len(), 0u32..4).prop_map(|(s, l, n)| {
        let leaf = if n == 0 {
            LEAVES[l].to_string()
        } else {
            format!("{}{n}", LEAVES[l])
        };
        match SCOPES[s] {
            "" => leaf,
            scope => format!("{scope}::{leaf}"),
        }
    })
}

pub fn arb_key() -> impl Strategy<Value = FunctionKey> {
    (0..OBJECTS.len(), 0..FILES.len(), arb_name())
        .prop_map(|(o, f, name)| FunctionKey::new(OBJECTS[o], FILES[f], name))
}

fn arb_header() -> impl Strategy<Value = BTreeMap<String, String>> {
    (
        any::<bool>(),
        proptest::option::of(0u32..100_000),
        proptest::option::of(prop_oneof![Just("line"), Just("instr line")]),
        proptest::option::of("[a-z]([a-z./ -]{0,18}[a-z])?"),
    )
        .prop_map(|(creator, pid, positions, cmd)| {
            let mut h = BTreeMap::new();
            if creator {
                h.insert("creator".to_string(), "valgrind-3.22.0".to_string());
            }
            if let Some(pid) = pid {
                h.insert("pid".to_string(), pid.to_string());
            }
            if let Some(p) = positions {
                h.insert("positions".to_string(), p.to_string());
            }
            if let Some(c) = cmd {
                h.insert("cmd".to_string(), c);
            }
            h
        })
}

const EVENT_NAMES: &[&str] = &["Ir", "Dr", "Dw", "I1mr"];

type RawCall = (usize, u64, Vec<u64>);
type RawFunction = (FunctionKey, Vec<u64>, Vec<RawCall>);

/// Random well-formed profile: unique keys, dense record indices, calls to
/// defined functions and to a few frontier keys never defined.
pub fn arb_profile_with(max_functions: usize, max_cost: u64) -> impl Strategy<Value = Profile> {
    (1usize..=3, 0usize..=max_functions).prop_flat_map(move |(n_events, n_funcs)| {
        let cost = prop::collection::vec(0..max_cost, n_events);
        let call = (0usize..64, 1u64..10_000, cost.clone());
        let func = (arb_key(), cost, prop::collection::vec(call, 0..4));
        (
            Just(n_events),
            prop::collection::vec(func, n_funcs),
            prop::collection::vec(arb_key(), 2),
            arb_header(),
            any::<bool>(),
        )
            .prop_map(|(n_events, funcs, frontier, header, with_summary)| {
                assemble(n_events, funcs, frontier, header, with_summary)
            })
    })
}

pub fn arb_profile() -> impl Strategy<Value = Profile> {
    arb_profile_with(12, 1_000_000_000_000)
}

fn assemble(
    n_events: usize,
    funcs: Vec<RawFunction>,
    frontier: Vec<FunctionKey>,
    header: BTreeMap<String, String>,
    with_summary: bool,
) -> Profile {
    let mut keys: Vec<FunctionKey> = Vec::new();
    let mut bodies = Vec::new();
    for (key, self_cost, calls) in funcs {
        if !keys.contains(&key) {
            keys.push(key);
            bodies.push((self_cost, calls));
        }
    }
    let targets: Vec<FunctionKey> = keys.iter().cloned().chain(frontier).collect();
    let mut functions = IndexMap::new();
    for (i, (key, (self_cost, calls))) in keys.iter().zip(bodies).enumerate() {
        let calls = calls
            .into_iter()
            .map(|(t, count, cost)| CallRecord {
                callee: targets[t % targets.len()].clone(),
                count,
                inclusive_cost: CostVector::from_values(cost),
            })
            .collect();
        functions.insert(
            key.clone(),
            FunctionRecord {
                self_cost: CostVector::from_values(self_cost),
                calls,
                first_record_index: i,
            },
        );
    }
    let mut profile = Profile {
        header,
        events: EventSpec::new(EVENT_NAMES[..n_events].iter().copied()),
        functions,
        summary: None,
    };
    if with_summary {
        profile.summary = Some(profile.self_cost_total());
    }
    profile
}

/// Random directed graph as adjacency lists.
pub fn arb_digraph(max_nodes: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1..=max_nodes).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..=3 * n).prop_map(move |edges| {
            let mut adj = vec![Vec::new(); n];
            for (a, b) in edges {
                adj[a].push(b);
            }
            adj
        })
    })
}

/// Profile whose call structure is `adj`: node `i` is `f{i}`.
pub fn profile_from_digraph(adj: &[Vec<usize>]) -> Profile {
    let mut text = String::from("events: Ir\n");
    for (i, succ) in adj.iter().enumerate() {
        text.push_str(&format!("fn=f{i}\n1 {}\n", i + 1));
        for &j in succ {
            text.push_str(&format!("cfn=f{j}\ncalls=1 1\n1 1\n"));
        }
    }
    anatomy::profile::parse_str(&text).expect("generated profile parses")
}

/// SCC partition by boolean transitive closure.
pub fn closure_partition(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, succ) in adj.iter().enumerate() {
        reach[i][i] = true;
        for &j in succ {
            reach[i][j] = true;
        }
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (cell, &v) in row.iter_mut().zip(&via) {
                *cell |= v;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let part: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &part {
            seen[j] = true;
        }
        parts.push(part);
    }
    parts.sort();
    parts
}

/// One invocation in an expanded call tree.
pub struct Invocation {
    pub name: &'static str,
    pub self_cost: u64,
    pub children: Vec<Invocation>,
}

pub fn call(name: &'static str, self_cost: u64, children: Vec<Invocation>) -> Invocation {
    Invocation {
        name,
        self_cost,
        children,
    }
}

impl Invocation {
    pub fn subtree_cost(&self) -> u64 {
        self.self_cost
            + self
                .children
                .iter()
                .map(Invocation::subtree_cost)
                .sum::<u64>()
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Invocation)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    /// Per-function (self, inclusive) summed over every occurrence.
    ///
    /// Only valid for acyclic programs: no function occurs inside its own
    /// subtree, so occurrences never double count.
    pub fn totals(&self) -> BTreeMap<&'static str, (u64, u64)> {
        let mut out = BTreeMap::new();
        self.walk(&mut |inv| {
            let e = out.entry(inv.name).or_insert((0, 0));
            e.0 += inv.self_cost;
            e.1 += inv.subtree_cost();
        });
        out
    }
}

/// The call structure of `call_tree.cg`, one node per invocation.
pub fn call_tree_oracle() -> Invocation {
    let c = || call("C", 5, vec![]);
    call(
        "main",
        2,
        vec![
            call("A", 3, vec![c()]),
            call("A", 3, vec![c()]),
            call("B", 11, vec![c(), c(), call("D", 7, vec![])]),
        ],
    )
}

/// Checks a DOT document against the subset grammar the emitter produces:
///
/// ```text
/// graph := "digraph" ID "{" stmt* "}"
/// stmt  := ("node" | "edge") attrs ";" | ID attrs? ";" | ID "->" ID attrs? ";"
/// attrs := "[" ID "=" value ("," ID "=" value)* "]"
/// value := ID | QUOTED
/// ```
pub fn validate_dot(text: &str) -> Result<(), String> {
    let tokens = tokenize_dot(text)?;
    let mut p = DotParser { tokens, pos: 0 };
    p.expect_word("digraph")?;
    p.id()?;
    p.expect("{")?;
    let mut ids = std::collections::HashSet::new();
    loop {
        match p.peek() {
            Some(Tok::Punct("}")) => {
                p.pos += 1;
                break;
            }
            Some(Tok::Word(w)) if w == "node" || w == "edge" => {
                p.pos += 1;
                p.attrs()?;
                p.expect(";")?;
            }
            Some(_) => {
                let a = p.id()?;
                if p.peek() == Some(&Tok::Punct("->")) {
                    p.pos += 1;
                    let b = p.id()?;
                    if !ids.contains(&a) || !ids.contains(&b) {
                        return Err(format!("edge {a} -> {b} uses an undeclared node"));
                    }
                } else if !ids.insert(a.clone()) {
                    return Err(format!("node {a} declared twice"));
                }
                if p.peek() == Some(&Tok::Punct("[")) {
                    p.attrs()?;
                }
                p.expect(";")?;
            }
            None => return Err("missing closing brace".into()),
        }
    }
    match p.peek() {
        None => Ok(()),
        Some(t) => Err(format!("trailing token {t:?}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Punct(&'static str),
}

fn tokenize_dot(text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '{' | '}' | '[' | ']' | ';' | ',' | '=' => {
                chars.next();
                out.push(Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    ';' => ";",
                    ',' => ",",
                    _ => "=",
                }));
            }
            '-' => {
                chars.next();
                if chars.next() != Some('>') {
                    return Err("stray '-'".into());
                }
                out.push(Tok::Punct("->"));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e @ ('"' | '\\' | 'n' | 'l' | 'r')) => {
                                s.push('\\');
                                s.push(e);
                            }
                            other => return Err(format!("bad escape {other:?}")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                out.push(Tok::Quoted(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Word(s));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct DotParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl DotParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, punct: &'static str) -> Result<(), String> {
        match self.next() {
            Some(Tok::Punct(p)) if p == punct => Ok(()),
            other => Err(format!("expected {punct}, got {other:?}")),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), String> {
        match self.next() {
            Some(Tok::Word(w)) if w == word => Ok(()),
            other => Err(format!("expected {word}, got {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Word(w)) if !w.starts_with(|c: char| c.is_ascii_digit()) => Ok(w),
            Some(Tok::Quoted(q)) => Ok(q),
            other => Err(format!("expected identifier, got {other:?}")),
        }
    }

    fn value(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Tok::Word(_)) | Some(Tok::Quoted(_)) => Ok(()),
            other => Err(format!("expected value, got {other:?}")),
        }
    }

    fn attrs(&mut self) -> Result<(), String> {
        self.expect("[")?;
        loop {
            self.id()?;
            self.expect("=")?;
            self.value()?;
            match self.next() {
                Some(Tok::Punct(",")) => continue,
                Some(Tok::Punct("]")) => return Ok(()),
                other => return Err(format!("expected , or ], got {other:?}")),
            }
        }
    }
}

/// Expected scan of the include fixture tree.
#[derive(Deserialize)]
pub struct Manifest {
    pub files: Vec<String>,
    pub include_dirs: Vec<PathBuf>,
    pub edge: Vec<ManifestEdge>,
    pub directories: Directories,
    pub cycle: Vec<Cycle>,
}

#[derive(Deserialize, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ManifestEdge {
    pub includer: String,
    pub name: String,
    pub kind: String,
    pub resolved: Option<String>,
}

#[derive(Deserialize)]
pub struct Directories {
    pub depth: usize,
    pub edges: Vec<(String, String, u64)>,
}

#[derive(Deserialize)]
pub struct Cycle {
    pub files: Vec<String>,
}

pub fn manifest() -> Manifest {
    toml::from_str(&read(&fixture("include_manifest.toml"))).unwrap()
}

pub fn scan(m: &Manifest) -> IncludeGraph {
    let ext: Vec<String> = DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect();
    scan_includes(&fixture("include_tree"), &ext, &m.include_dirs).unwrap()
}

pub fn edges_of(g: &IncludeGraph) -> BTreeSet<ManifestEdge> {
    g.edges
        .iter()
        .map(|e| ManifestEdge {
            includer: e.includer.clone(),
            name: e.name.clone(),
            kind: match e.kind {
                IncludeKind::Quoted => "quoted".into(),
                IncludeKind::Angled => "angled".into(),
            },
            resolved: e.resolved.clone(),
        })
        .collect()
}
