//! Fill-reducing nested-dissection ordering on the symmetrized sparsity graph.
//!
//! Separators are middle level sets of a breadth-first search from a
//! pseudo-peripheral vertex, thinned so that every separator vertex touches
//! the far side.

use alloc::vec;
use alloc::vec::Vec;

use super::sparse::CsrMatrix;

const LEAF_SIZE: usize = 48;
const GROUP_LEAF_SIZE: usize = 4;

struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    /// Quotient graph of the symmetrized pattern over `groups` (one id per row).
    fn from_pattern(a: &CsrMatrix, groups: &[usize], n: usize) -> Self {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j, _) in a.iter() {
            let (gi, gj) = (groups[i], groups[j]);
            if gi != gj {
                lists[gi].push(gj);
                lists[gj].push(gi);
            }
        }
        let mut ptr = vec![0];
        let mut adj = Vec::new();
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
            adj.extend_from_slice(l);
            ptr.push(adj.len());
        }
        Graph { ptr, adj }
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

struct Workspace {
    member: Vec<u32>,
    visited: Vec<u32>,
    level: Vec<usize>,
    stamp: u32,
}

impl Workspace {
    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }
}

/// Elimination order as a permutation `new -> old`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let groups: Vec<usize> = (0..a.nrows()).collect();
    nested_dissection_grouped(a, &groups)
}

/// Nested dissection of the quotient graph in which each group of unknowns
/// (e.g. all unknowns of one cell) is a single vertex. Members of a group are
/// kept together in ascending index order. Group ids need not be contiguous
/// but must be `< a.nrows()`.
pub fn nested_dissection_grouped(a: &CsrMatrix, groups: &[usize]) -> Vec<usize> {
    let n = a.nrows();
    assert_eq!(groups.len(), n, "one group id per row");
    let ng = groups.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ng];
    for (i, &gi) in groups.iter().enumerate() {
        members[gi].push(i);
    }
    let used: Vec<usize> = (0..ng).filter(|&g| !members[g].is_empty()).collect();
    let g = Graph::from_pattern(a, groups, ng);
    let mut ws = Workspace { member: vec![0; ng], visited: vec![0; ng], level: vec![0; ng], stamp: 0 };
    let mut order = Vec::with_capacity(used.len());
    let leaf = if ng == n { LEAF_SIZE } else { GROUP_LEAF_SIZE };
    dissect(&g, used, leaf, &mut ws, &mut order);
    let mut out = Vec::with_capacity(n);
    for gi in order {
        out.extend_from_slice(&members[gi]);
    }
    debug_assert_eq!(out.len(), n);
    out
}

/// BFS restricted to stamped members; returns vertices in visit order and sets `ws.level`.
fn bfs(g: &Graph, root: usize, member: u32, ws: &mut Workspace) -> Vec<usize> {
    let vis = ws.next_stamp();
    let mut order = vec![root];
    ws.visited[root] = vis;
    ws.level[root] = 0;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in g.neighbors(v) {
            if ws.member[w] == member && ws.visited[w] != vis {
                ws.visited[w] = vis;
                ws.level[w] = ws.level[v] + 1;
                order.push(w);
            }
        }
    }
    order
}

fn dissect(g: &Graph, nodes: Vec<usize>, leaf: usize, ws: &mut Workspace, out: &mut Vec<usize>) {
    if nodes.len() <= leaf {
        out.extend_from_slice(&nodes);
        return;
    }
    let member = ws.next_stamp();
    for &v in &nodes {
        ws.member[v] = member;
    }
    // Split into connected components first.
    let first = bfs(g, nodes[0], member, ws);
    if first.len() < nodes.len() {
        let comp_stamp = ws.visited[nodes[0]];
        let rest: Vec<usize> = nodes.iter().copied().filter(|&v| ws.visited[v] != comp_stamp).collect();
        dissect(g, first, leaf, ws, out);
        dissect(g, rest, leaf, ws, out);
        return;
    }
    // Pseudo-peripheral root: repeat BFS from the farthest vertex.
    let mut order = first;
    let mut depth = ws.level[*order.last().unwrap()];
    for _ in 0..4 {
        let cand = *order.last().unwrap();
        let o = bfs(g, cand, member, ws);
        let d = ws.level[*o.last().unwrap()];
        let improved = d > depth;
        order = o;
        depth = d;
        if !improved {
            break;
        }
    }
    if depth < 2 {
        out.extend_from_slice(&order);
        return;
    }
    // Middle level: where the cumulative count crosses half.
    let mut counts = vec![0usize; depth + 1];
    for &v in &order {
        counts[ws.level[v]] += 1;
    }
    let half = nodes.len() / 2;
    let mut acc = 0;
    let mut sep_level = 1;
    for (l, &c) in counts.iter().enumerate() {
        acc += c;
        if acc >= half {
            sep_level = l.clamp(1, depth - 1);
            break;
        }
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut sep = Vec::new();
    for &v in &order {
        let l = ws.level[v];
        if l < sep_level {
            left.push(v);
        } else if l > sep_level {
            right.push(v);
        } else {
            sep.push(v);
        }
    }
    // Thinning: separator vertices with no neighbour on the right join the left part.
    let lv = &ws.level;
    let (keep, moved): (Vec<usize>, Vec<usize>) = sep
        .into_iter()
        .partition(|&v| g.neighbors(v).iter().any(|&w| ws.member[w] == member && lv[w] > sep_level));
    left.extend(moved);
    dissect(g, left, leaf, ws, out);
    dissect(g, right, leaf, ws, out);
    out.extend(keep);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = i * n + j;
                t.push((v, v, 4.0));
                if i + 1 < n {
                    t.push((v, v + n, -1.0));
                    t.push((v + n, v, -1.0));
                }
                if j + 1 < n {
                    t.push((v, v + 1, -1.0));
                    t.push((v + 1, v, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n * n, n * n, &t)
    }

    #[test]
    fn is_permutation() {
        for n in [1usize, 3, 10, 23] {
            let a = grid_laplacian(n);
            let mut p = nested_dissection(&a);
            p.sort_unstable();
            assert_eq!(p, (0..n * n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn grouped_keeps_members_together() {
        let a = grid_laplacian(12);
        let groups: Vec<usize> = (0..144).map(|v| (v / 12 / 2) * 6 + (v % 12) / 2).collect();
        let p = nested_dissection_grouped(&a, &groups);
        let mut s = p.clone();
        s.sort_unstable();
        assert_eq!(s, (0..144).collect::<Vec<_>>());
        for w in p.chunks(4) {
            assert!(w.iter().all(|&v| groups[v] == groups[w[0]]));
            assert!(w.windows(2).all(|x| x[0] < x[1]));
        }
    }

    #[test]
    fn disconnected_graph() {
        let a = CsrMatrix::identity(200);
        let mut p = nested_dissection(&a);
        p.sort_unstable();
        assert_eq!(p, (0..200).collect::<Vec<_>>());
    }
}
