//! Static `#include` graphs of C and C++ source trees.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::{Component, Path, PathBuf};
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::aggregate::{group, AbstractGraph, GroupItem, Level};
use crate::cost::{CostVector, EventSpec};
use crate::profile::FunctionKey;
use crate::scc;

pub const DEFAULT_EXTENSIONS: [&str; 8] = ["h", "hpp", "hh", "c", "cc", "cpp", "cxx", "inl"];
pub const UNRESOLVED_GROUP: &str = "<unresolved>";

static INCLUDE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^\s*#\s*include\s*(?:"([^"]+)"|<([^>]+)>)"#).expect("include pattern")
});

#[derive(Debug, thiserror::Error)]
pub enum IncludeError {
    #[error("cannot scan `{path}`: {source}")]
    Root {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("include directory `{0}` is outside the scan root")]
    IncludeDirOutsideRoot(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncludeKind {
    Quoted,
    Angled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncludeEdge {
    pub includer: String,
    /// The name as written between the quotes or brackets.
    pub name: String,
    pub kind: IncludeKind,
    /// Path of the included file relative to the scan root, if found.
    pub resolved: Option<String>,
    pub line: usize,
}

impl IncludeEdge {
    /// The resolved path, or the written name for frontier edges.
    pub fn included(&self) -> &str {
        self.resolved.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanDiagnostic {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncludeGraph {
    pub scan_root: PathBuf,
    /// Scanned files, relative to the root, `/`-separated and sorted.
    pub nodes: Vec<String>,
    /// Sorted by includer, then by line.
    pub edges: Vec<IncludeEdge>,
    pub diagnostics: Vec<ScanDiagnostic>,
}

impl IncludeGraph {
    pub fn resolved_edges(&self) -> impl Iterator<Item = &IncludeEdge> {
        self.edges.iter().filter(|e| e.resolved.is_some())
    }

    pub fn unresolved_edges(&self) -> impl Iterator<Item = &IncludeEdge> {
        self.edges.iter().filter(|e| e.resolved.is_none())
    }
}

/// Removes `//` and `/* */` comments, keeping newlines so line numbers hold.
/// String and character literals are skipped over so that comment markers
/// inside them do not count.
pub fn strip_comments(text: &str) -> String {
    #[derive(PartialEq)]
    enum State {
        Code,
        Block,
    }
    let mut out = String::with_capacity(text.len());
    let mut state = State::Code;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match state {
            State::Block => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    out.push(' ');
                    state = State::Code;
                } else if c == '\n' {
                    out.push('\n');
                }
            }
            State::Code => match c {
                '/' if chars.peek() == Some(&'/') => {
                    for c in chars.by_ref() {
                        if c == '\n' {
                            out.push('\n');
                            break;
                        }
                    }
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = State::Block;
                }
                '"' | '\'' => {
                    out.push(c);
                    while let Some(d) = chars.next() {
                        out.push(d);
                        if d == '\\' {
                            if let Some(e) = chars.next() {
                                out.push(e);
                            }
                        } else if d == c || d == '\n' {
                            break;
                        }
                    }
                }
                _ => out.push(c),
            },
        }
    }
    out
}

/// `#include` directives of one file as `(line, name, kind)`.
pub fn find_includes(text: &str) -> Vec<(usize, String, IncludeKind)> {
    strip_comments(text)
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let caps = INCLUDE.captures(line)?;
            let (name, kind) = match (caps.get(1), caps.get(2)) {
                (Some(q), _) => (q.as_str(), IncludeKind::Quoted),
                (_, Some(a)) => (a.as_str(), IncludeKind::Angled),
                _ => return None,
            };
            Some((i + 1, name.to_string(), kind))
        })
        .collect()
}

/// Lexically normalizes a relative path; `None` if it climbs above the root.
fn normalize(path: &Path) -> Option<String> {
    let mut parts: Vec<String> = Vec::new();
    for c in path.components() {
        match c {
            Component::Normal(p) => parts.push(p.to_string_lossy().into_owned()),
            Component::ParentDir => {
                parts.pop()?;
            }
            Component::CurDir => {}
            Component::RootDir | Component::Prefix(_) => return None,
        }
    }
    Some(parts.join("/"))
}

fn relative_include_dir(root: &Path, dir: &Path) -> Result<PathBuf, IncludeError> {
    if dir.is_relative() {
        return Ok(dir.to_path_buf());
    }
    let canon_root = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    let canon_dir = dir.canonicalize().unwrap_or_else(|_| dir.to_path_buf());
    canon_dir
        .strip_prefix(&canon_root)
        .map(Path::to_path_buf)
        .map_err(|_| IncludeError::IncludeDirOutsideRoot(dir.to_path_buf()))
}

/// Scans every file under `root` whose extension is in `extensions`.
///
/// Quoted names are looked up next to the including file first, then in
/// `include_dirs`; angled names only in `include_dirs`. Relative include
/// directories are taken relative to `root`. Unreadable files are reported
/// in `diagnostics` and otherwise skipped.
pub fn scan_includes(
    root: &Path,
    extensions: &[String],
    include_dirs: &[PathBuf],
) -> Result<IncludeGraph, IncludeError> {
    let meta = std::fs::metadata(root).map_err(|source| IncludeError::Root {
        path: root.to_path_buf(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(IncludeError::Root {
            path: root.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        });
    }
    let include_dirs = include_dirs
        .iter()
        .map(|d| relative_include_dir(root, d))
        .collect::<Result<Vec<_>, _>>()?;
    let extensions: BTreeSet<String> = extensions
        .iter()
        .map(|e| e.trim_start_matches('.').to_lowercase())
        .collect();

    let mut diagnostics = Vec::new();
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e
                    .path()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default();
                diagnostics.push(ScanDiagnostic {
                    path,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let matches = entry
            .path()
            .extension()
            .map(|e| extensions.contains(&e.to_string_lossy().to_lowercase()))
            .unwrap_or(false);
        if !matches {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        if let Some(rel) = normalize(rel) {
            files.push((rel, entry.path().to_path_buf()));
        }
    }
    files.sort();

    type Scanned = (String, Result<Vec<(usize, String, IncludeKind)>, String>);
    let scanned: Vec<Scanned> = files
        .par_iter()
        .map(|(rel, full)| {
            let found = std::fs::read(full)
                .map(|bytes| find_includes(&String::from_utf8_lossy(&bytes)))
                .map_err(|e| e.to_string());
            (rel.clone(), found)
        })
        .collect();

    let mut nodes = Vec::new();
    let mut per_file = Vec::new();
    for (rel, found) in scanned {
        match found {
            Ok(inc) => {
                nodes.push(rel.clone());
                per_file.push((rel, inc));
            }
            Err(message) => diagnostics.push(ScanDiagnostic { path: rel, message }),
        }
    }
    let known: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
    let resolve = |includer: &str, name: &str, kind: IncludeKind| -> Option<String> {
        let mut candidates: Vec<PathBuf> = Vec::new();
        if kind == IncludeKind::Quoted {
            let dir = Path::new(includer).parent().unwrap_or(Path::new(""));
            candidates.push(dir.join(name));
        }
        candidates.extend(include_dirs.iter().map(|d| d.join(name)));
        candidates
            .iter()
            .filter_map(|c| normalize(c))
            .find(|c| known.contains(c.as_str()))
    };

    let mut edges = Vec::new();
    for (includer, found) in &per_file {
        let mut seen = BTreeSet::new();
        for (line, name, kind) in found {
            let resolved = resolve(includer, name, *kind);
            let target = resolved.clone().unwrap_or_else(|| name.clone());
            if !seen.insert(target) {
                continue;
            }
            edges.push(IncludeEdge {
                includer: includer.clone(),
                name: name.clone(),
                kind: *kind,
                resolved,
                line: *line,
            });
        }
    }
    Ok(IncludeGraph {
        scan_root: root.to_path_buf(),
        nodes,
        edges,
        diagnostics,
    })
}

/// Directory group of `path`: its first `depth` directory components.
pub fn directory_group(path: &str, depth: usize) -> String {
    let dirs: Vec<&str> = path.split('/').collect();
    let dirs = &dirs[..dirs.len().saturating_sub(1)];
    let take = depth.min(dirs.len());
    if take == 0 {
        ".".to_string()
    } else {
        dirs[..take].join("/")
    }
}

/// Groups files by directory. Counts carry the number of merged file-level
/// edges; costs are empty because the graph is static.
///
/// Unresolved includes are left out unless `include_unresolved` is set, in
/// which case they share one `<unresolved>` node.
pub fn aggregate_dirs(
    graph: &IncludeGraph,
    depth: usize,
    include_unresolved: bool,
) -> AbstractGraph {
    let depth = depth.max(1);
    let events = EventSpec::new(Vec::<String>::new());
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut items: Vec<GroupItem> = Vec::new();
    for (i, path) in graph.nodes.iter().enumerate() {
        index.insert(path.clone(), items.len());
        items.push(GroupItem {
            members: vec![FunctionKey::new("", path.clone(), path.clone())],
            self_cost: CostVector::zero(0),
            first_record_index: i,
            label: directory_group(path, depth),
        });
    }
    let mut frontier: BTreeMap<String, usize> = BTreeMap::new();
    if include_unresolved {
        for e in graph.unresolved_edges() {
            frontier.entry(e.name.clone()).or_insert(0);
        }
        for (n, (name, slot)) in frontier.iter_mut().enumerate() {
            *slot = items.len();
            items.push(GroupItem {
                members: vec![FunctionKey::new("", "", name.clone())],
                self_cost: CostVector::zero(0),
                first_record_index: graph.nodes.len() + n,
                label: UNRESOLVED_GROUP.to_string(),
            });
        }
    }
    let mut edges = Vec::new();
    for e in &graph.edges {
        let Some(&src) = index.get(&e.includer) else {
            continue;
        };
        let dst = match &e.resolved {
            Some(path) => index.get(path).copied(),
            None => frontier.get(&e.name).copied(),
        };
        if let Some(dst) = dst {
            edges.push((src, dst, 1, CostVector::zero(0)));
        }
    }
    group(
        Level::Directory,
        &events,
        &CostVector::zero(0),
        items,
        &edges,
        |_| None,
    )
}

/// One cycle per non-trivial strongly connected set of files.
///
/// Each cycle starts at the set's lexicographically smallest file and is a
/// shortest path back to it, following neighbours in sorted order.
pub fn find_cycles(graph: &IncludeGraph) -> Vec<Vec<String>> {
    let index: HashMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); graph.nodes.len()];
    for e in graph.resolved_edges() {
        let (Some(&s), Some(&t)) = (
            index.get(e.includer.as_str()),
            e.resolved.as_deref().and_then(|r| index.get(r)),
        ) else {
            continue;
        };
        if s != t {
            adjacency[s].push(t);
        }
    }
    for a in &mut adjacency {
        a.sort_by(|&x, &y| graph.nodes[x].cmp(&graph.nodes[y]));
        a.dedup();
    }
    let ids = scc::component_ids(&adjacency);
    let mut cycles = Vec::new();
    for members in scc::components(&ids) {
        if members.len() < 2 {
            continue;
        }
        let start = *members
            .iter()
            .min_by(|&&a, &&b| graph.nodes[a].cmp(&graph.nodes[b]))
            .expect("non-empty component");
        let comp = ids[start];
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut last = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if ids[v] != comp {
                    continue;
                }
                if v == start {
                    last = Some(u);
                    break 'bfs;
                }
                if let std::collections::hash_map::Entry::Vacant(slot) = parent.entry(v) {
                    slot.insert(u);
                    queue.push_back(v);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = last.expect("strongly connected component has a cycle through start");
        while cur != start {
            path.push(cur);
            cur = parent[&cur];
        }
        path.push(start);
        path.reverse();
        cycles.push(path.into_iter().map(|i| graph.nodes[i].clone()).collect());
    }
    cycles.sort();
    cycles
}
