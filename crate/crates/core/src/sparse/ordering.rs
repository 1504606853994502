use std::collections::VecDeque;

use super::CsrMatrix;

/// Adjacency lists of the symmetrized pattern of `a` (diagonal excluded).
fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Breadth-first level structure from `root`; returns (visit order, eccentricity).
fn bfs(adj: &[Vec<usize>], root: usize, seen: &mut [bool], by_degree: bool) -> (Vec<usize>, usize) {
    let mut order = vec![root];
    let mut level = vec![0usize; 1];
    let mut queue = VecDeque::from([(root, 0usize)]);
    seen[root] = true;
    let mut depth = 0;
    while let Some((v, d)) = queue.pop_front() {
        depth = depth.max(d);
        let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
        if by_degree {
            next.sort_by_key(|&w| (adj[w].len(), w));
        }
        for w in next {
            seen[w] = true;
            order.push(w);
            level.push(d + 1);
            queue.push_back((w, d + 1));
        }
    }
    (order, depth)
}

/// Pseudo-peripheral start node for the component containing `start`
/// (George–Liu: repeat BFS from a minimum-degree node of the last level).
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize) -> usize {
    let n = adj.len();
    let mut root = start;
    let mut seen = vec![false; n];
    let (_, mut ecc) = bfs(adj, root, &mut seen, false);
    loop {
        let mut seen = vec![false; n];
        let mut levels = vec![usize::MAX; n];
        levels[root] = 0;
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        let mut last = Vec::new();
        let mut max_level = 0;
        while let Some(v) = queue.pop_front() {
            if levels[v] > max_level {
                max_level = levels[v];
                last.clear();
            }
            if levels[v] == max_level {
                last.push(v);
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    levels[w] = levels[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let candidate = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap_or(&root);
        let mut seen = vec![false; n];
        let (_, cand_ecc) = bfs(adj, candidate, &mut seen, false);
        if cand_ecc > ecc {
            root = candidate;
            ecc = cand_ecc;
        } else {
            return root;
        }
    }
}

/// Reverse Cuthill–McKee permutation of the symmetrized pattern of `a`.
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = symmetric_adjacency(a);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));
    for &v in &by_degree {
        if seen[v] {
            continue;
        }
        let root = pseudo_peripheral(&adj, v);
        let (component, _) = bfs(&adj, root, &mut seen, true);
        order.extend(component);
    }
    order.reverse();
    order
}

/// Half-bandwidth `max |i - j|` over stored entries.
pub fn bandwidth(a: &CsrMatrix) -> usize {
    a.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
}
