//! Coverage validation and optimality predicates.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::chunk::ChunkSet;
use crate::cost::bandwidth_profile;
use crate::error::{Error, Result};
use crate::graph::{moore_bound, Digraph};
use crate::rational::{format_q, qi, Q};
use crate::schedule::{Collective, Schedule, Transfer};

/// Part of a shard that never reached its destination. For reduce-scatter
/// `node` is the contributor whose data misses `root`; for allgather it is
/// the receiver missing part of `root`'s shard.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Missing {
    pub root: usize,
    pub node: usize,
    pub uncovered: ChunkSet,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValidationReport {
    pub ok: bool,
    pub missing: Vec<Missing>,
}

fn transfers_by_root(s: &Schedule, n: usize) -> Vec<Vec<&Transfer>> {
    let mut per_root: Vec<Vec<&Transfer>> = vec![Vec::new(); n];
    for t in &s.transfers {
        per_root[t.root].push(t);
    }
    for v in &mut per_root {
        v.sort_by_key(|t| t.step);
    }
    per_root
}

/// Runs `f` on each maximal run of equal steps.
fn for_each_step<'a>(ts: &[&'a Transfer], mut f: impl FnMut(&[&'a Transfer])) {
    let mut i = 0;
    while i < ts.len() {
        let mut j = i;
        while j < ts.len() && ts[j].step == ts[i].step {
            j += 1;
        }
        f(&ts[i..j]);
        i = j;
    }
}

fn missing_rs(g: &Digraph, v: usize, ts: &[&Transfer]) -> Vec<Missing> {
    let n = g.node_count();
    let mut cover: Vec<BTreeMap<usize, ChunkSet>> = (0..n)
        .map(|u| BTreeMap::from([(u, ChunkSet::full())]))
        .collect();
    for_each_step(ts, |step| {
        let mut adds: Vec<(usize, usize, ChunkSet)> = Vec::new();
        for t in step {
            let a = g.arc(t.arc);
            for (&u, cs) in &cover[a.src] {
                let x = cs.intersection(&t.chunk);
                if !x.is_empty() {
                    adds.push((a.dst, u, x));
                }
            }
        }
        for (w, u, x) in adds {
            let e = cover[w].entry(u).or_default();
            *e = e.union(&x);
        }
    });
    (0..n)
        .filter(|&u| u != v)
        .filter_map(|u| {
            let have = cover[v].get(&u).cloned().unwrap_or_default();
            let gap = ChunkSet::full().difference(&have);
            (!gap.is_empty()).then_some(Missing {
                root: v,
                node: u,
                uncovered: gap,
            })
        })
        .collect()
}

fn missing_ag(g: &Digraph, v: usize, ts: &[&Transfer]) -> Vec<Missing> {
    let n = g.node_count();
    let mut cover = vec![ChunkSet::empty(); n];
    cover[v] = ChunkSet::full();
    for_each_step(ts, |step| {
        let mut adds = Vec::new();
        for t in step {
            let a = g.arc(t.arc);
            let x = cover[a.src].intersection(&t.chunk);
            if !x.is_empty() {
                adds.push((a.dst, x));
            }
        }
        for (w, x) in adds {
            cover[w] = cover[w].union(&x);
        }
    });
    (0..n)
        .filter(|&w| w != v)
        .filter_map(|w| {
            let gap = ChunkSet::full().difference(&cover[w]);
            (!gap.is_empty()).then_some(Missing {
                root: v,
                node: w,
                uncovered: gap,
            })
        })
        .collect()
}

/// Checks data-path coverage: data moves one hop per step and only data
/// present before a step can be forwarded during it.
pub fn validate(s: &Schedule, g: &Digraph) -> Result<ValidationReport> {
    s.check_against(g)?;
    let per_root = transfers_by_root(s, g.node_count());
    let missing: Vec<Missing> = per_root
        .par_iter()
        .enumerate()
        .flat_map_iter(|(v, ts)| match s.kind {
            Collective::ReduceScatter => missing_rs(g, v, ts),
            Collective::Allgather => missing_ag(g, v, ts),
        })
        .collect();
    Ok(ValidationReport {
        ok: missing.is_empty(),
        missing,
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OptimalityReport {
    pub equal_loads: bool,
    pub exactly_once: bool,
    pub y_is_optimal: bool,
    pub y: Q,
    pub optimal: bool,
    pub violations: Vec<String>,
}

/// Bandwidth optimality: (1) all arcs equally loaded at every step and (2)
/// every element of every shard crosses each node exactly once (sent for
/// reduce-scatter, received for allgather); cross-checked against
/// `y = (N-1)/N`.
pub fn check_bandwidth_optimal(s: &Schedule, g: &Digraph) -> Result<OptimalityReport> {
    s.check_against(g)?;
    let n = g.node_count();
    let mut violations = Vec::new();
    let profile = bandwidth_profile(s, g)?;
    let loads = crate::cost::arc_loads(s, g)?;
    let mut equal_loads = true;
    for (t, l) in loads.iter().enumerate() {
        let max = profile.max_arc_load[t];
        if let Some(a) = l.iter().position(|x| *x != max) {
            equal_loads = false;
            violations.push(format!(
                "step {}: arc {} carries {} but max is {}",
                t + 1,
                a,
                format_q(&l[a]),
                format_q(&max)
            ));
        }
    }

    let mut seen: BTreeMap<(usize, usize), Vec<ChunkSet>> = BTreeMap::new();
    for t in &s.transfers {
        let a = g.arc(t.arc);
        let node = match s.kind {
            Collective::ReduceScatter => a.src,
            Collective::Allgather => a.dst,
        };
        seen.entry((node, t.root)).or_default().push(t.chunk.clone());
    }
    let mut exactly_once = true;
    for u in 0..n {
        for w in 0..n {
            if u == w {
                continue;
            }
            let chunks = seen.get(&(u, w)).map(Vec::as_slice).unwrap_or(&[]);
            let mut acc = ChunkSet::empty();
            let mut total = Q::zero();
            for c in chunks {
                acc = acc.union(c);
                total += c.measure();
            }
            if !acc.is_full() || total != Q::from_integer(1) {
                exactly_once = false;
                if violations.len() < 64 {
                    violations.push(format!(
                        "node {u}, root {w}: chunks cover {acc} with total measure {}",
                        format_q(&total)
                    ));
                }
            }
        }
    }

    let target = qi(n as i128 - 1) / qi(n as i128);
    let y_is_optimal = profile.total == target;
    if !y_is_optimal {
        violations.push(format!(
            "y = {} but (N-1)/N = {}",
            format_q(&profile.total),
            format_q(&target)
        ));
    }
    Ok(OptimalityReport {
        equal_loads,
        exactly_once,
        y_is_optimal,
        y: profile.total,
        optimal: equal_loads && exactly_once && y_is_optimal,
        violations,
    })
}

/// `N > M_{d, k-1}` with `k = t_max`.
pub fn check_moore_optimal(s: &Schedule, g: &Digraph) -> Result<bool> {
    let d = g.regular_degree().ok_or(Error::Irregular)?;
    if s.t_max == 0 {
        return Ok(false);
    }
    Ok(g.node_count() as u128 > moore_bound(d as u64, s.t_max - 1))
}

/// Every transfer moves data one hop closer along a shortest path at the
/// step fixed by its remaining distance, and for each ordered pair the
/// chunks crossing the node cover the shard.
pub fn is_shortest_path_schedule(s: &Schedule, g: &Digraph) -> Result<bool> {
    s.check_against(g)?;
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let dm = g.all_distances();
    let diam = dm.diameter().finite().expect("strongly connected");
    let mut seen: BTreeMap<(usize, usize), ChunkSet> = BTreeMap::new();
    for t in &s.transfers {
        let a = g.arc(t.arc);
        let v = t.root;
        let ok = match s.kind {
            Collective::ReduceScatter => {
                let du = dm.hops(a.src, v);
                du == dm.hops(a.dst, v) + 1 && du + t.step == diam + 1
            }
            Collective::Allgather => {
                let du = dm.hops(v, a.src);
                du + 1 == dm.hops(v, a.dst) && du + 1 == t.step
            }
        };
        if !ok {
            return Ok(false);
        }
        let node = match s.kind {
            Collective::ReduceScatter => a.src,
            Collective::Allgather => a.dst,
        };
        let e = seen.entry((node, v)).or_default();
        *e = e.union(&t.chunk);
    }
    let n = g.node_count();
    for u in 0..n {
        for v in 0..n {
            if u != v && !seen.get(&(u, v)).map(|c| c.is_full()).unwrap_or(false) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn complete(m: usize) -> (Digraph, Schedule) {
        let mut pairs = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    pairs.push((i, j));
                }
            }
        }
        let g = Digraph::new(m, &pairs).unwrap();
        let ts = g
            .arcs()
            .iter()
            .enumerate()
            .map(|(id, a)| Transfer::new(a.dst, ChunkSet::full(), id, 1))
            .collect();
        (g, Schedule::new(Collective::ReduceScatter, ts))
    }

    fn ring_rs(m: usize) -> (Digraph, Schedule) {
        let pairs: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        let g = Digraph::new(m, &pairs).unwrap();
        let mut ts = Vec::new();
        for t in 1..m {
            for i in 0..m {
                ts.push(Transfer::new((i + m - t) % m, ChunkSet::full(), i, t as u32));
            }
        }
        (g, Schedule::new(Collective::ReduceScatter, ts))
    }

    #[test]
    fn complete_one_step_is_valid() {
        let (g, s) = complete(4);
        assert!(validate(&s, &g).unwrap().ok);
        assert!(check_bandwidth_optimal(&s, &g).unwrap().optimal);
        assert!(is_shortest_path_schedule(&s, &g).unwrap());
    }

    #[test]
    fn removed_transfer_is_reported() {
        let (g, mut s) = complete(4);
        let gone = s.transfers.remove(0);
        let r = validate(&s, &g).unwrap();
        assert!(!r.ok);
        assert_eq!(
            r.missing,
            vec![Missing {
                root: gone.root,
                node: g.arc(gone.arc).src,
                uncovered: ChunkSet::full()
            }]
        );
    }

    #[test]
    fn ring_is_valid_and_optimal() {
        for m in 2..=8 {
            let (g, s) = ring_rs(m);
            assert!(validate(&s, &g).unwrap().ok, "m = {m}");
            let r = check_bandwidth_optimal(&s, &g).unwrap();
            assert!(r.optimal, "{:?}", r.violations);
            assert_eq!(r.y, q(m as i128 - 1, m as i128));
        }
    }

    #[test]
    fn same_step_cannot_chain() {
        // 0 -> 1 -> 2 -> 0; root 2's data from 0 must take two steps.
        let g = Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let s = Schedule::new(
            Collective::ReduceScatter,
            vec![
                Transfer::new(2, ChunkSet::full(), 0, 1),
                Transfer::new(2, ChunkSet::full(), 1, 1),
            ],
        );
        let r = validate(&s, &g).unwrap();
        let for_two: Vec<_> = r.missing.iter().filter(|m| m.root == 2).collect();
        assert_eq!(for_two.len(), 1);
        assert_eq!(for_two[0].node, 0);
    }

    #[test]
    fn allgather_coverage() {
        let g = Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut ts = Vec::new();
        for t in 1..3u32 {
            for i in 0..3usize {
                ts.push(Transfer::new((i + 3 - (t as usize - 1)) % 3, ChunkSet::full(), i, t));
            }
        }
        let s = Schedule::new(Collective::Allgather, ts);
        assert!(validate(&s, &g).unwrap().ok);
        assert!(is_shortest_path_schedule(&s, &g).unwrap());
    }

    #[test]
    fn moore_optimality() {
        // A d = 1 ring meets the bound with its own diameter, but not with
        // an extra idle step.
        let (g, s) = ring_rs(8);
        assert!(check_moore_optimal(&s, &g).unwrap());
        let padded = Schedule::with_t_max(s.kind, s.transfers.clone(), 8);
        assert!(!check_moore_optimal(&padded, &g).unwrap());
        let (g, s) = complete(5);
        assert!(check_moore_optimal(&s, &g).unwrap());
    }

    #[test]
    fn validation_ignores_order_within_step() {
        let (g, s) = ring_rs(5);
        let mut r = s.clone();
        r.transfers.reverse();
        assert_eq!(validate(&s, &g).unwrap(), validate(&r, &g).unwrap());
    }
}
