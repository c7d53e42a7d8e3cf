//! Fill-reducing symmetric orderings for the sparse LU, computed on the
//! pattern of `A + A^T`.
//!
//! Two orderings are provided: nested dissection with breadth-first level
//! separators (the default), and approximate minimum degree on a quotient
//! graph. On Liouvillians of coupled modes, whose graphs behave like
//! high-dimensional grids with diagonal edges, dissection gives the smaller
//! factors.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    #[default]
    NestedDissection,
    MinimumDegree,
}

/// Undirected adjacency structure without self loops.
#[derive(Debug, Clone)]
pub struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    /// Symmetrized pattern of a square CSC matrix. Nodes listed in `detached`
    /// keep no edges, so they never end up inside a separator.
    pub fn from_csc_pattern(n: usize, colptr: &[usize], rowidx: &[usize], detached: &[usize]) -> Self {
        let mut is_detached = vec![false; n];
        for &d in detached {
            is_detached[d] = true;
        }
        let mut deg = vec![0usize; n];
        for j in 0..n {
            for &i in &rowidx[colptr[j]..colptr[j + 1]] {
                if i != j && !is_detached[i] && !is_detached[j] {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for k in 0..n {
            ptr[k + 1] = ptr[k] + deg[k];
        }
        let mut next = ptr.clone();
        let mut adj = vec![0usize; ptr[n]];
        for j in 0..n {
            for &i in &rowidx[colptr[j]..colptr[j + 1]] {
                if i != j && !is_detached[i] && !is_detached[j] {
                    adj[next[i]] = j;
                    next[i] += 1;
                    adj[next[j]] = i;
                    next[j] += 1;
                }
            }
        }
        // Deduplicate each adjacency list.
        let mut out_ptr = vec![0usize; n + 1];
        let mut out_adj = Vec::with_capacity(adj.len());
        for k in 0..n {
            let list = &mut adj[ptr[k]..ptr[k + 1]];
            list.sort_unstable();
            let mut last = usize::MAX;
            for &v in list.iter() {
                if v != last {
                    out_adj.push(v);
                    last = v;
                }
            }
            out_ptr[k + 1] = out_adj.len();
        }
        Graph { ptr: out_ptr, adj: out_adj }
    }

    pub fn len(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

/// Approximate minimum-degree ordering. `perm[k]` is the node eliminated at
/// step `k`; nodes in `last` are appended at the end in the given order.
///
/// Eliminated nodes become elements of a quotient graph. A node's degree is
/// bounded by its remaining plain neighbours plus the sizes of its adjacent
/// elements outside the newest one; elements wholly contained in the newest
/// element are absorbed. Ties go to the lowest index, so the result is
/// deterministic.
pub fn minimum_degree(graph: &Graph, last: &[usize]) -> Vec<usize> {
    let n = graph.len();
    let mut eliminated = vec![false; n];
    for &v in last {
        eliminated[v] = true;
    }
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if eliminated[v] {
                Vec::new()
            } else {
                graph.neighbors(v).iter().copied().filter(|&w| !eliminated[w]).collect()
            }
        })
        .collect();
    let mut elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut alive = vec![false; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).filter(|&v| !eliminated[v]).map(|v| Reverse((degree[v], v))).collect();
    let mut remaining = heap.len();
    let mut mark = vec![0usize; n];
    let mut tag = 0usize;
    let mut w = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);

    while let Some(Reverse((d, p))) = heap.pop() {
        if eliminated[p] || d != degree[p] {
            continue;
        }
        eliminated[p] = true;
        order.push(p);
        remaining -= 1;
        tag += 1;

        // Reach of p: plain neighbours plus members of its elements, which
        // are all absorbed into the new element p.
        mark[p] = tag;
        let mut lp = Vec::new();
        for &j in &adj[p] {
            if !eliminated[j] && mark[j] != tag {
                mark[j] = tag;
                lp.push(j);
            }
        }
        for e in std::mem::take(&mut elems[p]) {
            if alive[e] {
                for &j in &members[e] {
                    if !eliminated[j] && mark[j] != tag {
                        mark[j] = tag;
                        lp.push(j);
                    }
                }
                alive[e] = false;
                members[e] = Vec::new();
            }
        }
        adj[p] = Vec::new();

        // w[e] = |L_e \ L_p| for every element adjacent to the reach.
        let mut touched = Vec::new();
        for &i in &lp {
            for &e in &elems[i] {
                if alive[e] {
                    if w[e] == usize::MAX {
                        w[e] = members[e].len();
                        touched.push(e);
                    }
                    w[e] -= 1;
                }
            }
        }
        for &i in &lp {
            elems[i].retain(|&e| alive[e] && w[e] != 0);
            adj[i].retain(|&j| !eliminated[j] && mark[j] != tag);
            let external: usize = elems[i].iter().map(|&e| w[e]).sum();
            elems[i].push(p);
            let bound = adj[i].len() + lp.len() - 1 + external;
            degree[i] = bound.min(remaining.saturating_sub(1));
            heap.push(Reverse((degree[i], i)));
        }
        for e in touched {
            if w[e] == 0 {
                alive[e] = false;
                members[e] = Vec::new();
            }
            w[e] = usize::MAX;
        }
        alive[p] = true;
        members[p] = lp;
    }
    order.extend_from_slice(last);
    order
}

/// Nested-dissection ordering. `perm[k]` is the node eliminated at step `k`;
/// nodes in `last` are appended at the end in the given order.
pub fn nested_dissection(graph: &Graph, last: &[usize], leaf_size: usize) -> Vec<usize> {
    let n = graph.len();
    let mut in_last = vec![false; n];
    for &v in last {
        in_last[v] = true;
    }
    // Partition label per node; only nodes whose label matches the current
    // part are visible to the BFS.
    let mut label = vec![0usize; n];
    for v in 0..n {
        if in_last[v] {
            label[v] = usize::MAX;
        }
    }
    let mut next_label = 1usize;
    let mut level = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);

    // Work items: either a part to dissect or a finished block to emit.
    enum Item {
        Part(Vec<usize>, usize),
        Emit(Vec<usize>),
    }
    let root: Vec<usize> = (0..n).filter(|&v| !in_last[v]).collect();
    let mut stack = vec![Item::Part(root, 0)];
    while let Some(item) = stack.pop() {
        match item {
            Item::Emit(nodes) => order.extend(nodes),
            Item::Part(nodes, lab) => {
                if nodes.len() <= leaf_size {
                    order.extend(nodes);
                    continue;
                }
                let (a, b, sep) = bisect(graph, &nodes, lab, &label, &mut level);
                if a.is_empty() || b.is_empty() {
                    // Could not split (near-clique); emit as is.
                    order.extend(nodes);
                    continue;
                }
                for &v in &sep {
                    label[v] = usize::MAX - 1;
                }
                let la = next_label;
                let lb = next_label + 1;
                next_label += 2;
                for &v in &a {
                    label[v] = la;
                }
                for &v in &b {
                    label[v] = lb;
                }
                // Pop order: a, then b, then the separator.
                stack.push(Item::Emit(sep));
                stack.push(Item::Part(b, lb));
                stack.push(Item::Part(a, la));
            }
        }
    }
    order.extend_from_slice(last);
    order
}

/// BFS from `start` over nodes carrying `lab`; fills `level` and returns the
/// visit order and number of levels.
fn bfs(graph: &Graph, start: usize, lab: usize, label: &[usize], level: &mut [usize]) -> (Vec<usize>, usize) {
    let mut visited = vec![start];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        let lv = level[v];
        depth = depth.max(lv + 1);
        for &w in graph.neighbors(v) {
            if label[w] == lab && level[w] == usize::MAX {
                level[w] = lv + 1;
                visited.push(w);
                queue.push_back(w);
            }
        }
    }
    (visited, depth)
}

fn bisect(
    graph: &Graph,
    nodes: &[usize],
    lab: usize,
    label: &[usize],
    level: &mut [usize],
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    // Pseudo-peripheral root: repeat BFS from the farthest, lowest-degree node.
    let mut root = nodes[0];
    let mut best_depth = 0;
    let mut visited;
    loop {
        let (vis, depth) = bfs(graph, root, lab, label, level);
        visited = vis;
        let far = visited
            .iter()
            .copied()
            .filter(|&v| level[v] + 1 == depth)
            .min_by_key(|&v| graph.neighbors(v).len())
            .unwrap_or(root);
        for &v in &visited {
            level[v] = usize::MAX;
        }
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        root = far;
    }
    let (visited, depth) = bfs(graph, root, lab, label, level);

    if visited.len() < nodes.len() {
        // Disconnected part: the reached component and the rest split without
        // a separator.
        let reached: Vec<usize> = visited.clone();
        for &v in &visited {
            level[v] = usize::MAX;
        }
        let mut mark = std::collections::HashSet::with_capacity(reached.len());
        mark.extend(reached.iter().copied());
        let rest: Vec<usize> = nodes.iter().copied().filter(|v| !mark.contains(v)).collect();
        return (reached, rest, Vec::new());
    }

    let mut counts = vec![0usize; depth];
    for &v in &visited {
        counts[level[v]] += 1;
    }
    let half = nodes.len() / 2;
    let mut acc = 0;
    let mut split = depth / 2;
    for (l, &c) in counts.iter().enumerate() {
        if acc + c > half {
            split = l;
            break;
        }
        acc += c;
    }
    let split = split.clamp(1.min(depth - 1), depth.saturating_sub(2).max(1));
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut sep = Vec::new();
    for &v in &visited {
        match level[v].cmp(&split) {
            std::cmp::Ordering::Less => a.push(v),
            std::cmp::Ordering::Equal => sep.push(v),
            std::cmp::Ordering::Greater => b.push(v),
        }
    }
    for &v in &visited {
        level[v] = usize::MAX;
    }
    (a, b, sep)
}
