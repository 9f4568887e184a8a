//! Strongly connected components (iterative Tarjan).

/// Partitions nodes `0..adjacency.len()` into strongly connected components.
///
/// Returns one component id per node. Ids are dense and ordered by the
/// smallest node index inside each component, so a caller that numbers
/// nodes in a meaningful order gets ids in that same order.
pub fn component_ids(adjacency: &[Vec<usize>]) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut raw_component = vec![UNVISITED; n];
    let mut components = 0usize;
    let mut counter = 0usize;
    // (node, position in its adjacency list)
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        frames.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut next)) = frames.last_mut() {
            if let Some(&w) = adjacency[v].get(*next) {
                *next += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    raw_component[w] = components;
                    if w == v {
                        break;
                    }
                }
                components += 1;
            }
        }
    }

    // Renumber by smallest member.
    let mut remap = vec![UNVISITED; components];
    let mut next_id = 0;
    let mut ids = vec![0; n];
    for v in 0..n {
        let c = raw_component[v];
        if remap[c] == UNVISITED {
            remap[c] = next_id;
            next_id += 1;
        }
        ids[v] = remap[c];
    }
    ids
}

/// Groups node indices by component id, each group ascending.
pub fn components(ids: &[usize]) -> Vec<Vec<usize>> {
    let count = ids.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); count];
    for (v, &c) in ids.iter().enumerate() {
        out[c].push(v);
    }
    out
}
