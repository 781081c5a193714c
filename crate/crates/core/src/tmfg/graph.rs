//! Structural graph tests used to verify filtered graphs: connectivity,
//! chordality (maximum cardinality search) and planarity
//! (Demoucron–Malgrange–Pertuiset path embedding per biconnected block).
//!
//! Graphs are given as a vertex count and an undirected edge list; loops
//! and repeated edges are ignored.

use std::collections::{BTreeSet, HashSet, VecDeque};

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(u, v) in edges {
        if u != v && u < n && v < n {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    adj
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let adj = adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// True when every cycle of length ≥ 4 has a chord.
pub fn is_chordal(n: usize, edges: &[(usize, usize)]) -> bool {
    let adj = adjacency(n, edges);
    // maximum cardinality search; position[v] = visit index
    let mut weight = vec![0usize; n];
    let mut position = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| position[v] == usize::MAX)
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        position[v] = step;
        order.push(v);
        for &u in &adj[v] {
            if position[u] == usize::MAX {
                weight[u] += 1;
            }
        }
    }
    // the reverse visit order is a perfect elimination ordering iff chordal
    for &v in &order {
        let earlier: Vec<usize> = adj[v].iter().copied().filter(|&u| position[u] < position[v]).collect();
        let Some(&parent) = earlier.iter().max_by_key(|&&u| position[u]) else {
            continue;
        };
        if earlier.iter().any(|&u| u != parent && !adj[parent].contains(&u)) {
            return false;
        }
    }
    true
}

pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let adj = adjacency(n, edges);
    let m: usize = adj.iter().map(BTreeSet::len).sum::<usize>() / 2;
    if n >= 3 && m > 3 * n - 6 {
        return false;
    }
    biconnected_blocks(&adj).into_iter().all(|block| block.len() < 3 || embed_block(&block))
}

/// Edge sets of the biconnected components (Hopcroft–Tarjan, iterative).
fn biconnected_blocks(adj: &[BTreeSet<usize>]) -> Vec<Vec<(usize, usize)>> {
    let n = adj.len();
    let nbrs: Vec<Vec<usize>> = adj.iter().map(|s| s.iter().copied().collect()).collect();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut blocks = Vec::new();
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        // frames: (vertex, parent, next neighbour index)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, parent) = (top.0, top.1);
            if top.2 < nbrs[u].len() {
                let v = nbrs[u][top.2];
                top.2 += 1;
                if disc[v] == usize::MAX {
                    edge_stack.push((u, v));
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, u, 0));
                } else if v != parent && disc[v] < disc[u] {
                    edge_stack.push((u, v));
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == (p, u) {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

enum Fragment {
    Chord(usize, usize),
    Component { vertices: Vec<usize>, attachments: Vec<usize> },
}

impl Fragment {
    fn attachments(&self) -> Vec<usize> {
        match self {
            Fragment::Chord(u, v) => vec![*u, *v],
            Fragment::Component { attachments, .. } => attachments.clone(),
        }
    }
}

/// Path-addition embedding of one biconnected block.
fn embed_block(block: &[(usize, usize)]) -> bool {
    let mut ids: Vec<usize> = block.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let local = |x: usize| ids.binary_search(&x).unwrap();
    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in block {
        let (a, b) = (local(u), local(v));
        adj[a].push(b);
        adj[b].push(a);
    }
    let total_edges = block.len();

    let cycle = find_cycle(&adj);
    let mut on_h = vec![false; n];
    let mut h_edges: HashSet<(usize, usize)> = HashSet::new();
    for (k, &v) in cycle.iter().enumerate() {
        on_h[v] = true;
        let w = cycle[(k + 1) % cycle.len()];
        h_edges.insert(key(v, w));
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle];

    while h_edges.len() < total_edges {
        let fragments = fragments(&adj, &on_h, &h_edges);
        let mut faces_of = vec![Vec::new(); n];
        for (f, face) in faces.iter().enumerate() {
            for &v in face {
                faces_of[v].push(f);
            }
        }
        let mut chosen: Option<(usize, usize)> = None;
        for (k, frag) in fragments.iter().enumerate() {
            let att = frag.attachments();
            let admissible: Vec<usize> =
                faces_of[att[0]].iter().copied().filter(|&f| att.iter().all(|a| faces[f].contains(a))).collect();
            match admissible.len() {
                0 => return false,
                1 => {
                    chosen = Some((k, admissible[0]));
                    break;
                }
                _ if chosen.is_none() => chosen = Some((k, admissible[0])),
                _ => {}
            }
        }
        let Some((k, f)) = chosen else {
            // no fragments but edges remain: cannot happen for a block
            return false;
        };
        let path = match &fragments[k] {
            Fragment::Chord(u, v) => vec![*u, *v],
            Fragment::Component { vertices, attachments } => component_path(&adj, vertices, attachments),
        };
        for w in path.windows(2) {
            h_edges.insert(key(w[0], w[1]));
        }
        for &v in &path {
            on_h[v] = true;
        }
        let (first, second) = split_face(&faces[f], &path);
        faces[f] = first;
        faces.push(second);
    }
    true
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn find_cycle(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    let mut stack = vec![(0usize, 0usize)];
    depth[0] = 0;
    while let Some(top) = stack.last_mut() {
        let u = top.0;
        if top.1 == adj[u].len() {
            stack.pop();
            continue;
        }
        let v = adj[u][top.1];
        top.1 += 1;
        if depth[v] == usize::MAX {
            depth[v] = depth[u] + 1;
            parent[v] = u;
            stack.push((v, 0));
        } else if v != parent[u] && depth[v] < depth[u] {
            let mut cycle = vec![u];
            let mut x = u;
            while x != v {
                x = parent[x];
                cycle.push(x);
            }
            return cycle;
        }
    }
    unreachable!("a biconnected block with three or more vertices has a cycle")
}

fn fragments(adj: &[Vec<usize>], on_h: &[bool], h_edges: &HashSet<(usize, usize)>) -> Vec<Fragment> {
    let n = adj.len();
    let mut out = Vec::new();
    for u in 0..n {
        if !on_h[u] {
            continue;
        }
        for &v in &adj[u] {
            if u < v && on_h[v] && !h_edges.contains(&key(u, v)) {
                out.push(Fragment::Chord(u, v));
            }
        }
    }
    let mut seen = vec![false; n];
    for s in 0..n {
        if on_h[s] || seen[s] {
            continue;
        }
        let mut vertices = vec![s];
        let mut attachments = BTreeSet::new();
        seen[s] = true;
        let mut k = 0;
        while k < vertices.len() {
            let u = vertices[k];
            k += 1;
            for &v in &adj[u] {
                if on_h[v] {
                    attachments.insert(v);
                } else if !seen[v] {
                    seen[v] = true;
                    vertices.push(v);
                }
            }
        }
        out.push(Fragment::Component { vertices, attachments: attachments.into_iter().collect() });
    }
    out
}

/// Path from one attachment through the component to a different attachment.
fn component_path(adj: &[Vec<usize>], vertices: &[usize], attachments: &[usize]) -> Vec<usize> {
    let inside: HashSet<usize> = vertices.iter().copied().collect();
    let start = attachments[0];
    let mut prev: std::collections::HashMap<usize, usize> = Default::default();
    let mut queue = VecDeque::new();
    for &c in &adj[start] {
        if inside.contains(&c) && !prev.contains_key(&c) {
            prev.insert(c, start);
            queue.push_back(c);
        }
    }
    while let Some(u) = queue.pop_front() {
        if let Some(&end) = adj[u].iter().find(|&&w| w != start && attachments.contains(&w)) {
            let mut path = vec![end, u];
            let mut x = u;
            while let Some(&p) = prev.get(&x) {
                path.push(p);
                if p == start {
                    break;
                }
                x = p;
            }
            path.reverse();
            return path;
        }
        for &w in &adj[u] {
            if inside.contains(&w) && !prev.contains_key(&w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    unreachable!("fragment of a biconnected block has two attachments")
}

/// Splits a face boundary along a path whose endpoints lie on it.
fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (a, b) = (path[0], path[path.len() - 1]);
    let len = face.len();
    let ia = face.iter().position(|&v| v == a).unwrap();
    let ib = face.iter().position(|&v| v == b).unwrap();
    let interior = &path[1..path.len() - 1];
    let walk = |from: usize, to: usize| {
        let mut w = Vec::new();
        let mut k = from;
        loop {
            w.push(face[k]);
            if k == to {
                break;
            }
            k = (k + 1) % len;
        }
        w
    };
    let mut first = walk(ia, ib);
    first.extend(interior.iter().rev());
    let mut second = walk(ib, ia);
    second.extend(interior.iter());
    (first, second)
}
