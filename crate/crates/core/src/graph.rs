//! Directed multigraphs with stable arc ids, plus the distance and symmetry
//! queries used by the schedulers.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Hop distance; unreachable pairs are `Infinite`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Distance {
    Finite(u32),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u32> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Arc {
    pub src: usize,
    pub dst: usize,
}

/// Directed multigraph. Arc ids are the positions in `arcs()`.
#[derive(Clone)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    label: Option<String>,
    skew_hint: Option<IsoMap>,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.arcs == other.arcs
    }
}

impl Eq for Digraph {}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n)
            .field("arcs", &self.arcs.len())
            .field("label", &self.label)
            .finish()
    }
}

impl Digraph {
    /// Arcs receive ids in input order.
    pub fn new(node_count: usize, arc_pairs: &[(usize, usize)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(arc_pairs.len());
        for &(s, d) in arc_pairs {
            for node in [s, d] {
                if node >= node_count {
                    return Err(Error::EndpointOutOfRange { node, n: node_count });
                }
            }
            arcs.push(Arc { src: s, dst: d });
        }
        Ok(Self::from_arcs(node_count, arcs))
    }

    fn from_arcs(n: usize, arcs: Vec<Arc>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (id, a) in arcs.iter().enumerate() {
            out_adj[a.src].push(id);
            in_adj[a.dst].push(id);
        }
        Digraph {
            n,
            arcs,
            out_adj,
            in_adj,
            label: None,
            skew_hint: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Attaches a candidate witness for `find_skew_symmetry`; it is verified
    /// before use.
    pub fn with_skew_hint(mut self, f: IsoMap) -> Self {
        self.skew_hint = Some(f);
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn get_arc(&self, id: usize) -> Option<Arc> {
        self.arcs.get(id).copied()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_pairs(&self) -> Vec<(usize, usize)> {
        self.arcs.iter().map(|a| (a.src, a.dst)).collect()
    }

    /// Out-arc ids of `u` in ascending order.
    pub fn out_arcs(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    pub fn in_arcs(&self, u: usize) -> &[usize] {
        &self.in_adj[u]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_adj[u].len()
    }

    /// `Some(d)` when every node has in- and out-degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.out_adj.first()?.len();
        let ok = (0..self.n).all(|u| self.out_adj[u].len() == d && self.in_adj[u].len() == d);
        ok.then_some(d)
    }

    pub fn self_loop_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.src == a.dst).count()
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loop_count() > 0
    }

    pub fn has_parallel_arcs(&self) -> bool {
        (0..self.n).any(|u| {
            let mut t: Vec<usize> = self.out_adj[u].iter().map(|&a| self.arcs[a].dst).collect();
            t.sort_unstable();
            t.windows(2).any(|w| w[0] == w[1])
        })
    }

    /// No self-loops and no parallel arcs.
    pub fn is_simple(&self) -> bool {
        !self.has_self_loops() && !self.has_parallel_arcs()
    }

    /// Number of unordered pairs `{u, v}`, `u != v`, with arcs both ways.
    pub fn two_cycle_count(&self) -> usize {
        let mut pairs: Vec<(usize, usize)> = self
            .arcs
            .iter()
            .filter(|a| a.src < a.dst && self.multiplicity(a.dst, a.src) > 0)
            .map(|a| (a.src, a.dst))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs.len()
    }

    /// Number of arcs from `u` to `v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.out_adj[u].iter().filter(|&&a| self.arcs[a].dst == v).count()
    }

    /// Arc ids from `u` to `v`, ascending.
    pub fn arcs_between(&self, u: usize, v: usize) -> Vec<usize> {
        self.out_adj[u]
            .iter()
            .copied()
            .filter(|&a| self.arcs[a].dst == v)
            .collect()
    }

    /// Reverses every arc, keeping ids.
    pub fn transpose(&self) -> Digraph {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc { src: a.dst, dst: a.src })
            .collect();
        let mut g = Self::from_arcs(self.n, arcs);
        g.label = self.label.as_ref().map(|l| format!("T({l})"));
        g
    }

    pub fn distances_from(&self, u: usize) -> Vec<Distance> {
        bfs(self.n, u, |x| self.out_adj[x].iter().map(|&a| self.arcs[a].dst))
    }

    /// Distances into `v` from every node.
    pub fn distances_to(&self, v: usize) -> Vec<Distance> {
        bfs(self.n, v, |x| self.in_adj[x].iter().map(|&a| self.arcs[a].src))
    }

    pub fn all_distances(&self) -> DistanceMatrix {
        let rows: Vec<Vec<Distance>> = (0..self.n)
            .into_par_iter()
            .map(|u| self.distances_from(u))
            .collect();
        DistanceMatrix {
            n: self.n,
            d: rows.into_iter().flatten().collect(),
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        self.distances_from(0).iter().all(|d| d.is_finite())
            && self.distances_to(0).iter().all(|d| d.is_finite())
    }

    pub fn diameter(&self) -> Result<u32> {
        if !self.is_strongly_connected() {
            return Err(Error::NotStronglyConnected);
        }
        let d = (0..self.n)
            .into_par_iter()
            .map(|u| {
                self.distances_from(u)
                    .iter()
                    .filter_map(|d| d.finite())
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        Ok(d)
    }

    /// `[|N_1(u)|, ..., |N_e(u)|]` where `e` is the eccentricity of `u`.
    pub fn neighborhood_sizes(&self, u: usize) -> Vec<usize> {
        profile(&self.distances_from(u))
    }

    pub fn in_neighborhood_sizes(&self, u: usize) -> Vec<usize> {
        profile(&self.distances_to(u))
    }
}

fn profile(dist: &[Distance]) -> Vec<usize> {
    let ecc = dist.iter().filter_map(|d| d.finite()).max().unwrap_or(0) as usize;
    let mut out = vec![0; ecc];
    for d in dist.iter().filter_map(|d| d.finite()) {
        if d > 0 {
            out[d as usize - 1] += 1;
        }
    }
    out
}

fn bfs<I, F>(n: usize, s: usize, next: F) -> Vec<Distance>
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut dist = vec![Distance::Infinite; n];
    dist[s] = Distance::Finite(0);
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        let Distance::Finite(dx) = dist[x] else {
            unreachable!()
        };
        for y in next(x) {
            if dist[y] == Distance::Infinite {
                dist[y] = Distance::Finite(dx + 1);
                q.push_back(y);
            }
        }
    }
    dist
}

/// Dense all-pairs hop distances, row `u` holding `d(u, .)`.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Distance>,
}

impl DistanceMatrix {
    pub fn get(&self, u: usize, v: usize) -> Distance {
        self.d[u * self.n + v]
    }

    /// Finite distance; panics on unreachable pairs.
    pub fn hops(&self, u: usize, v: usize) -> u32 {
        self.get(u, v).finite().expect("unreachable pair")
    }

    pub fn row(&self, u: usize) -> &[Distance] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn diameter(&self) -> Distance {
        self.d.iter().copied().max().unwrap_or(Distance::Finite(0))
    }
}

/// `sum_{i=0}^{k} d^i`, saturating.
pub fn moore_bound(d: u64, k: u32) -> u128 {
    let mut total: u128 = 0;
    let mut p: u128 = 1;
    for _ in 0..=k {
        total = total.saturating_add(p);
        p = p.saturating_mul(d as u128);
    }
    total
}

/// Node bijection.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IsoMap {
    mapping: Vec<usize>,
}

impl IsoMap {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= mapping.len() || seen[m] {
                return Err(Error::InvalidParam("mapping is not a permutation".into()));
            }
            seen[m] = true;
        }
        Ok(IsoMap { mapping })
    }

    pub fn identity(n: usize) -> Self {
        IsoMap {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, u: usize) -> usize {
        self.mapping[u]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> IsoMap {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        IsoMap { mapping: inv }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &IsoMap) -> IsoMap {
        IsoMap {
            mapping: first.mapping.iter().map(|&x| self.mapping[x]).collect(),
        }
    }
}

/// Pairs every arc of `a` with a distinct arc of `b` under `f`. Parallel
/// arcs are matched in ascending id order.
pub fn arc_matching(a: &Digraph, b: &Digraph, f: &IsoMap) -> Option<Vec<usize>> {
    if a.node_count() != b.node_count() || a.arc_count() != b.arc_count() || f.len() != a.node_count() {
        return None;
    }
    let mut used = vec![false; b.arc_count()];
    let mut out = vec![0; a.arc_count()];
    for (id, arc) in a.arcs().iter().enumerate() {
        let (s, d) = (f.apply(arc.src), f.apply(arc.dst));
        let hit = b
            .out_arcs(s)
            .iter()
            .copied()
            .find(|&x| !used[x] && b.arc(x).dst == d)?;
        used[hit] = true;
        out[id] = hit;
    }
    Some(out)
}

/// True iff `f` maps the arc multiset of `a` onto that of `b`.
pub fn verify_isomorphism(a: &Digraph, b: &Digraph, f: &IsoMap) -> bool {
    arc_matching(a, b, f).is_some()
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// Witness `f` with `(u,v)` in `transpose(g)` iff `(f(u), f(v))` in `g`.
pub fn find_skew_symmetry(g: &Digraph) -> Result<Option<IsoMap>> {
    find_skew_symmetry_with_budget(g, DEFAULT_SEARCH_BUDGET)
}

pub fn find_skew_symmetry_with_budget(g: &Digraph, budget: u64) -> Result<Option<IsoMap>> {
    let gt = g.transpose();
    if let Some(h) = &g.skew_hint {
        if verify_isomorphism(&gt, g, h) {
            return Ok(Some(h.clone()));
        }
    }
    find_isomorphism(&gt, g, budget)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Signature {
    out_deg: usize,
    in_deg: usize,
    loops: usize,
    out_profile: Vec<usize>,
    in_profile: Vec<usize>,
}

fn signatures(g: &Digraph) -> Vec<Signature> {
    (0..g.node_count())
        .into_par_iter()
        .map(|u| Signature {
            out_deg: g.out_degree(u),
            in_deg: g.in_degree(u),
            loops: g.multiplicity(u, u),
            out_profile: g.neighborhood_sizes(u),
            in_profile: g.in_neighborhood_sizes(u),
        })
        .collect()
}

/// Adjacency with multiplicities, sorted by neighbor.
fn weighted_adj(g: &Digraph, out: bool) -> Vec<Vec<(usize, usize)>> {
    (0..g.node_count())
        .map(|u| {
            let ids = if out { g.out_arcs(u) } else { g.in_arcs(u) };
            let mut nb: Vec<usize> = ids
                .iter()
                .map(|&a| if out { g.arc(a).dst } else { g.arc(a).src })
                .collect();
            nb.sort_unstable();
            let mut res: Vec<(usize, usize)> = Vec::new();
            for x in nb {
                match res.last_mut() {
                    Some((y, c)) if *y == x => *c += 1,
                    _ => res.push((x, 1)),
                }
            }
            res
        })
        .collect()
}

fn mult(adj: &[(usize, usize)], v: usize) -> usize {
    adj.binary_search_by_key(&v, |p| p.0)
        .map(|i| adj[i].1)
        .unwrap_or(0)
}

struct IsoSearch<'a> {
    a_out: Vec<Vec<(usize, usize)>>,
    a_in: Vec<Vec<(usize, usize)>>,
    b_out: Vec<Vec<(usize, usize)>>,
    b_in: Vec<Vec<(usize, usize)>>,
    sig_a: &'a [Signature],
    sig_b: &'a [Signature],
    order: Vec<usize>,
    parent: Vec<Option<(usize, bool)>>,
    fwd: Vec<Option<usize>>,
    back: Vec<Option<usize>>,
    steps: u64,
    budget: u64,
}

impl IsoSearch<'_> {
    fn consistent(&self, u: usize, c: usize) -> bool {
        for (adj_a, adj_b) in [(&self.a_out, &self.b_out), (&self.a_in, &self.b_in)] {
            for &(x, m) in &adj_a[u] {
                if let Some(fx) = self.fwd[x] {
                    if mult(&adj_b[c], fx) != m {
                        return false;
                    }
                }
            }
            for &(y, m) in &adj_b[c] {
                if let Some(x) = self.back[y] {
                    if mult(&adj_a[u], x) != m {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn run(&mut self, depth: usize) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let u = self.order[depth];
        let cands: Vec<usize> = match self.parent[u] {
            Some((p, out)) => {
                let fp = self.fwd[p].expect("parent assigned first");
                let adj = if out { &self.b_out[fp] } else { &self.b_in[fp] };
                adj.iter().map(|x| x.0).collect()
            }
            None => (0..self.sig_b.len()).collect(),
        };
        for c in cands {
            if self.back[c].is_some() || self.sig_a[u] != self.sig_b[c] {
                continue;
            }
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            if !self.consistent(u, c) {
                continue;
            }
            self.fwd[u] = Some(c);
            self.back[c] = Some(u);
            if self.run(depth + 1)? {
                return Ok(true);
            }
            self.fwd[u] = None;
            self.back[c] = None;
        }
        Ok(false)
    }
}

/// Backtracking isomorphism search from `a` to `b` refined by degree and
/// distance-profile signatures. Candidates are tried lowest index first.
pub fn find_isomorphism(a: &Digraph, b: &Digraph, budget: u64) -> Result<Option<IsoMap>> {
    let n = a.node_count();
    if n != b.node_count() || a.arc_count() != b.arc_count() {
        return Ok(None);
    }
    let sig_a = signatures(a);
    let sig_b = signatures(b);
    let mut sa = sig_a.clone();
    let mut sb = sig_b.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(None);
    }
    let a_out = weighted_adj(a, true);
    let a_in = weighted_adj(a, false);
    // BFS over the underlying undirected graph of `a`.
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            order.push(x);
            let nbrs = a_out[x]
                .iter()
                .map(|p| (p.0, true))
                .chain(a_in[x].iter().map(|p| (p.0, false)));
            for (y, out) in nbrs {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, out));
                    q.push_back(y);
                }
            }
        }
    }
    let mut search = IsoSearch {
        a_out,
        a_in,
        b_out: weighted_adj(b, true),
        b_in: weighted_adj(b, false),
        sig_a: &sig_a,
        sig_b: &sig_b,
        order,
        parent,
        fwd: vec![None; n],
        back: vec![None; n],
        steps: 0,
        budget,
    };
    if search.run(0)? {
        let mapping = search.fwd.into_iter().map(|x| x.expect("complete")).collect();
        Ok(Some(IsoMap { mapping }))
    } else {
        Ok(None)
    }
}
