//! De Bruijn graph with its self-loops and 2-cycles replaced by one long cycle.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Digraph;

const ROTATION_STEPS: usize = 100_000;
const DFS_BUDGET: u64 = 10_000_000;

pub(crate) fn de_bruijn_pairs(d: usize, n: usize) -> (usize, Vec<(usize, usize)>) {
    let size = d.pow(n as u32);
    let mut pairs = Vec::with_capacity(size * d);
    for u in 0..size {
        for b in 0..d {
            pairs.push((u, (u * d + b) % size));
        }
    }
    (size, pairs)
}

struct Admissible {
    nodes: Vec<usize>,
    adj: Vec<Vec<usize>>,
    base: Vec<(usize, usize)>,
    size: usize,
}

fn admissible(d: usize, n: usize) -> Admissible {
    let (size, pairs) = de_bruijn_pairs(d, n);
    let set: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
    let two_cycle = |u: usize, v: usize| u != v && set.contains(&(u, v)) && set.contains(&(v, u));
    let mut affected = BTreeSet::new();
    for &(u, v) in &pairs {
        if u == v || two_cycle(u, v) {
            affected.insert(u);
            affected.insert(v);
        }
    }
    let nodes: Vec<usize> = affected.into_iter().collect();
    let mut adj = vec![Vec::new(); size];
    for &u in &nodes {
        let mut list: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&v| v != u && (two_cycle(u, v) || (!set.contains(&(u, v)) && !set.contains(&(v, u)))))
            .collect();
        // Pairs that would not re-create a 2-cycle come first.
        list.sort_by_key(|&v| (two_cycle(u, v), v));
        adj[u] = list;
    }
    let base = pairs
        .into_iter()
        .filter(|&(u, v)| u != v && !two_cycle(u, v))
        .collect();
    Admissible {
        nodes,
        adj,
        base,
        size,
    }
}

fn dfs_cycle(a: &Admissible) -> Option<Vec<usize>> {
    fn go(a: &Admissible, path: &mut Vec<usize>, seen: &mut [bool], budget: &mut u64) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let last = *path.last().unwrap();
        if path.len() == a.nodes.len() {
            return a.adj[last].contains(&path[0]);
        }
        for &y in &a.adj[last] {
            if !seen[y] {
                seen[y] = true;
                path.push(y);
                if go(a, path, seen, budget) {
                    return true;
                }
                path.pop();
                seen[y] = false;
            }
        }
        false
    }
    let start = *a.nodes.first()?;
    let mut path = vec![start];
    let mut seen = vec![false; a.size];
    seen[start] = true;
    let mut budget = DFS_BUDGET;
    go(a, &mut path, &mut seen, &mut budget).then_some(path)
}

/// Rotation-extension search: extend greedily, and when stuck reverse the
/// tail after a neighbour of the endpoint.
fn rotation_cycle(a: &Admissible) -> Option<Vec<usize>> {
    let start = *a.nodes.first()?;
    let total = a.nodes.len();
    let mut path = vec![start];
    let mut on_path = vec![false; a.size];
    on_path[start] = true;
    let adjacent = |u: usize, v: usize| a.adj[u].contains(&v);
    for _ in 0..ROTATION_STEPS {
        let end = *path.last().unwrap();
        if let Some(&y) = a.adj[end].iter().find(|&&y| !on_path[y]) {
            on_path[y] = true;
            path.push(y);
            continue;
        }
        if path.len() == total && adjacent(end, path[0]) {
            return Some(path);
        }
        let rotate = |i: usize| {
            let mut p = path[..=i].to_vec();
            p.extend(path[i + 1..].iter().rev());
            p
        };
        let pivots: Vec<usize> = (0..path.len().saturating_sub(2))
            .filter(|&i| adjacent(path[i], end))
            .collect();
        let useful = pivots.iter().copied().find(|&i| {
            let new_end = path[i + 1];
            a.adj[new_end].iter().any(|&y| !on_path[y]) || (path.len() == total && adjacent(new_end, path[0]))
        });
        {
            let i = useful.or(pivots.first().copied())?;
            path = rotate(i)
        }
    }
    None
}

/// Hamiltonian cycle through the affected nodes, starting at the lowest.
pub fn dbj_mod_cycle(d: usize, n: usize) -> Result<Vec<usize>> {
    check_params(d, n)?;
    let a = admissible(d, n);
    let found = if d >= 4 {
        rotation_cycle(&a).or_else(|| dfs_cycle(&a))
    } else {
        dfs_cycle(&a)
    };
    found.ok_or(Error::NoHamiltonianCycle)
}

fn check_params(d: usize, n: usize) -> Result<()> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidParam(format!("DBJMod needs d >= 2 and n >= 2, got ({d},{n})")));
    }
    if (n as f64) * (d as f64).log2() > 24.0 {
        return Err(Error::InvalidParam(format!("DBJMod({d},{n}) is too large")));
    }
    Ok(())
}

/// Remaining de Bruijn arcs in order, then the cycle arcs.
pub fn dbj_mod(d: usize, n: usize) -> Result<Digraph> {
    check_params(d, n)?;
    let a = admissible(d, n);
    let cycle = dbj_mod_cycle(d, n)?;
    let mut pairs = a.base.clone();
    for i in 0..cycle.len() {
        pairs.push((cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    Ok(Digraph::new(a.size, &pairs)?.with_label(format!("DBJMod({d},{n})")))
}
