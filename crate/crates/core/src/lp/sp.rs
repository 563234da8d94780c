//! Shortest-path schedules: one small program per (vertex, step) choosing
//! how each destination's data is split over the out-arcs that lie on a
//! shortest path to it.
//!
//! Destinations with the same set of eligible arcs are interchangeable, so
//! the program is solved over destination types (at most `2^d - 1` of them),
//! the optimum is snapped to an exact rational, certified by an exact max-flow
//! and a subset lower bound, and the per-type arc shares are then laid out
//! back-to-back over the type's destinations.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::chunk::ChunkSet;
use crate::cost::{arc_loads, measure_cost, CostVector};
use crate::error::{Error, Result};
use crate::graph::{Digraph, DistanceMatrix};
use crate::lp::format::{LpModel, Op, Sense};
use crate::lp::simplex::{self, LinearProgram, Relation};
use crate::rational::{qi, snap, Q};
use crate::schedule::{Collective, Schedule, Transfer};

pub const SNAP_DENOMINATOR: i128 = 1_000_000;

/// The program for vertex `u` at step `t`, whose destinations sit at
/// distance `D + 1 - t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpLpInstance {
    pub u: usize,
    pub t: u32,
    pub distance: u32,
    /// Out-arcs of `u`, ascending.
    pub arcs: Vec<usize>,
    /// Destination and the bitmask (over `arcs`) of arcs on a shortest path.
    pub dests: Vec<(usize, u64)>,
}

/// Share `[lo, hi)` of a destination's shard sent over `arc`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ArcPart {
    pub arc: usize,
    pub lo: Q,
    pub hi: Q,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpLpSolution {
    /// Optimal maximum arc load `U_{u,t}`.
    pub objective: Q,
    pub parts: Vec<(usize, Vec<ArcPart>)>,
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |b| mask >> b & 1 == 1)
}

/// Builds the instances of `u` for every step that has destinations.
pub fn instances_for(g: &Digraph, dm: &DistanceMatrix, u: usize) -> Result<Vec<SpLpInstance>> {
    let diam = dm.diameter().finite().ok_or(Error::NotStronglyConnected)?;
    let arcs: Vec<usize> = g.out_arcs(u).to_vec();
    if arcs.len() > 64 {
        return Err(Error::InvalidParam("out-degree above 64".into()));
    }
    let mut by_dist: Vec<Vec<(usize, u64)>> = vec![Vec::new(); diam as usize + 1];
    for v in 0..g.node_count() {
        if v == u {
            continue;
        }
        let x = dm.hops(u, v);
        let mut mask = 0u64;
        for (i, &a) in arcs.iter().enumerate() {
            if dm.hops(g.arc(a).dst, v) + 1 == x {
                mask |= 1 << i;
            }
        }
        by_dist[x as usize].push((v, mask));
    }
    Ok(by_dist
        .into_iter()
        .enumerate()
        .filter(|(_, d)| !d.is_empty())
        .map(|(x, dests)| SpLpInstance {
            u,
            t: diam + 1 - x as u32,
            distance: x as u32,
            arcs: arcs.clone(),
            dests,
        })
        .collect())
}

fn types(inst: &SpLpInstance) -> BTreeMap<u64, Vec<usize>> {
    let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &(v, m) in &inst.dests {
        out.entry(m).or_default().push(v);
    }
    out
}

/// Edmonds-Karp on a dense capacity matrix.
fn max_flow(cap: &mut [Vec<i128>], s: usize, t: usize) -> i128 {
    let n = cap.len();
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for y in 0..n {
                if prev[y] == usize::MAX && cap[x][y] > 0 {
                    prev[y] = x;
                    q.push_back(y);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut f = i128::MAX;
        let mut y = t;
        while y != s {
            f = f.min(cap[prev[y]][y]);
            y = prev[y];
        }
        let mut y = t;
        while y != s {
            cap[prev[y]][y] -= f;
            cap[y][prev[y]] += f;
            y = prev[y];
        }
        total += f;
    }
}

/// Largest `(#dests whose eligible set lies in W) / |W|` over arc subsets `W`.
pub fn subset_bound(inst: &SpLpInstance) -> Q {
    let k = inst.arcs.len();
    // inside[w] counts destinations whose mask is a subset of w.
    let mut inside = vec![0u64; 1 << k];
    for &(_, m) in &inst.dests {
        inside[m as usize] += 1;
    }
    for b in 0..k {
        for w in 0..inside.len() {
            if w >> b & 1 == 1 {
                inside[w] += inside[w ^ (1 << b)];
            }
        }
    }
    let (mut num, mut den) = (0u64, 1u64);
    for (w, &c) in inside.iter().enumerate().skip(1) {
        let size = (w as u64).count_ones() as u64;
        if c * den > num * size {
            (num, den) = (c, size);
        }
    }
    qi(num as i128) / qi(den as i128)
}

/// Solves one instance exactly (see module docs).
pub fn solve_lp(inst: &SpLpInstance) -> Result<SpLpSolution> {
    if inst.dests.is_empty() {
        return Ok(SpLpSolution {
            objective: Q::zero(),
            parts: Vec::new(),
        });
    }
    let ty = types(inst);
    if ty.contains_key(&0) {
        return Err(Error::InvalidParam("destination without eligible arc".into()));
    }
    let k = inst.arcs.len();
    // Variables: one per (type, eligible arc), then U.
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for (ti, (&m, _)) in ty.iter().enumerate() {
        for b in bits(m) {
            vars.push((ti, b));
        }
    }
    let u_var = vars.len();
    let mut lp = LinearProgram::new(vars.len() + 1);
    lp.objective[u_var] = 1.0;
    for (ti, (_, dests)) in ty.iter().enumerate() {
        let row = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.0 == ti)
            .map(|(j, _)| (j, 1.0))
            .collect();
        lp.add(row, Relation::Eq, dests.len() as f64);
    }
    for b in 0..k {
        let mut row: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.1 == b)
            .map(|(j, _)| (j, 1.0))
            .collect();
        if row.is_empty() {
            continue;
        }
        row.push((u_var, -1.0));
        lp.add(row, Relation::Le, 0.0);
    }
    let sol = simplex::solve(&lp)?;
    let objective = snap(sol.objective, SNAP_DENOMINATOR);

    // Exact feasibility of the snapped optimum.
    let scale = *objective.denom();
    let nt = ty.len();
    let (src, sink) = (0, nt + k + 1);
    let mut cap = vec![vec![0i128; nt + k + 2]; nt + k + 2];
    let mut demand = 0;
    for (ti, (&m, dests)) in ty.iter().enumerate() {
        let need = dests.len() as i128 * scale;
        cap[src][1 + ti] = need;
        demand += need;
        for b in bits(m) {
            cap[1 + ti][1 + nt + b] = need;
        }
    }
    for b in 0..k {
        cap[1 + nt + b][sink] = *objective.numer();
    }
    let original = cap.clone();
    if max_flow(&mut cap, src, sink) != demand {
        return Err(Error::Solver(format!(
            "snapped objective {objective} is infeasible at u={}, t={}",
            inst.u, inst.t
        )));
    }
    if k <= 16 && subset_bound(inst) != objective {
        return Err(Error::Solver(format!(
            "snapped objective {objective} is not optimal at u={}, t={}",
            inst.u, inst.t
        )));
    }

    let mut parts = Vec::with_capacity(inst.dests.len());
    for (ti, (&m, dests)) in ty.iter().enumerate() {
        // Lay arc shares back to back over [0, n) and cut at integers.
        let mut pos = Q::zero();
        let mut segs: Vec<(usize, Q, Q)> = Vec::new();
        for b in bits(m) {
            let flow = original[1 + ti][1 + nt + b] - cap[1 + ti][1 + nt + b];
            if flow > 0 {
                let len = Q::new(flow, scale);
                segs.push((inst.arcs[b], pos, pos + len));
                pos += len;
            }
        }
        for (i, &v) in dests.iter().enumerate() {
            let lo = qi(i as i128);
            let hi = lo + Q::one();
            let mine = segs
                .iter()
                .filter(|(_, a, b)| *a < hi && *b > lo)
                .map(|&(arc, a, b)| ArcPart {
                    arc,
                    lo: a.max(lo) - lo,
                    hi: b.min(hi) - lo,
                })
                .collect();
            parts.push((v, mine));
        }
    }
    parts.sort_by_key(|p| p.0);
    Ok(SpLpSolution { objective, parts })
}

impl SpLpInstance {
    /// The per-destination program in LP text form.
    pub fn to_lp_text(&self, g: &Digraph) -> String {
        let mut m = LpModel::new(Sense::Minimize);
        m.comment.push(format!(
            "shortest-path split at vertex {} step {} distance {}",
            self.u, self.t, self.distance
        ));
        m.objective = vec![(1.0, "U".into())];
        let var = |a: usize, v: usize| format!("x_{a}_{v}");
        for (i, &a) in self.arcs.iter().enumerate() {
            let mut terms: Vec<(f64, String)> = self
                .dests
                .iter()
                .filter(|(_, mask)| mask >> i & 1 == 1)
                .map(|&(v, _)| (1.0, var(a, v)))
                .collect();
            if terms.is_empty() {
                continue;
            }
            terms.push((-1.0, "U".into()));
            m.row(format!("load_{a}_{}", g.arc(a).dst), terms, Op::Le, 0.0);
        }
        for &(v, mask) in &self.dests {
            let terms = bits(mask).map(|b| (1.0, var(self.arcs[b], v))).collect();
            m.row(format!("dest_{v}"), terms, Op::Eq, 1.0);
        }
        for &(v, mask) in &self.dests {
            for b in bits(mask) {
                m.bounds.push((var(self.arcs[b], v), Some(0.0), Some(1.0)));
            }
        }
        m.render()
    }
}

struct Plan {
    diameter: u32,
    degree: usize,
    solved: Vec<(SpLpInstance, SpLpSolution)>,
}

fn plan(g: &Digraph) -> Result<Plan> {
    let degree = g.regular_degree().ok_or(Error::Irregular)?;
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let dm = g.all_distances();
    let diameter = dm.diameter().finite().expect("strongly connected");
    let per_u: Vec<Result<Vec<(SpLpInstance, SpLpSolution)>>> = (0..g.node_count())
        .into_par_iter()
        .map(|u| {
            instances_for(g, &dm, u)?
                .into_iter()
                .map(|inst| {
                    let s = solve_lp(&inst)?;
                    Ok((inst, s))
                })
                .collect()
        })
        .collect();
    let mut solved = Vec::new();
    for r in per_u {
        solved.extend(r?);
    }
    Ok(Plan {
        diameter,
        degree,
        solved,
    })
}

fn plan_cost(g: &Digraph, p: &Plan) -> CostVector {
    let mut u_max = vec![Q::zero(); p.diameter as usize];
    for (inst, s) in &p.solved {
        let slot = &mut u_max[inst.t as usize - 1];
        if s.objective > *slot {
            *slot = s.objective;
        }
    }
    let sum = u_max.iter().fold(Q::zero(), |a, b| a + b);
    CostVector::new(
        p.diameter,
        sum * qi(p.degree as i128) / qi(g.node_count() as i128),
    )
}

/// Cost of the optimal shortest-path schedule without materializing it.
pub fn lp_cost(g: &Digraph) -> Result<CostVector> {
    let p = plan(g)?;
    Ok(plan_cost(g, &p))
}

/// Optimal shortest-path reduce-scatter schedule and its analytic cost.
pub fn lp_schedule(g: &Digraph) -> Result<(Schedule, CostVector)> {
    let p = plan(g)?;
    let cost = plan_cost(g, &p);
    let mut transfers = Vec::new();
    for (inst, s) in &p.solved {
        for (v, parts) in &s.parts {
            for part in parts {
                transfers.push(Transfer::new(
                    *v,
                    ChunkSet::interval(part.lo, part.hi),
                    part.arc,
                    inst.t,
                ));
            }
        }
    }
    let s = Schedule::with_t_max(Collective::ReduceScatter, transfers, p.diameter).sorted();
    Ok((s, cost))
}

/// Largest-remainder rounding of `shares` to multiples of `1/p` summing to 1.
/// Ties go to the earlier entry.
pub fn round_shares(shares: &[Q], p: i128) -> Vec<i128> {
    let scaled: Vec<Q> = shares.iter().map(|x| *x * qi(p)).collect();
    let mut out: Vec<i128> = scaled.iter().map(|x| x.floor().to_integer()).collect();
    let rest = p - out.iter().sum::<i128>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(rest.max(0) as usize) {
        out[i] += 1;
    }
    out
}

/// Shortest-path schedule whose chunks are multiples of `1/p`, rounded from
/// the program's optimum per destination. Cost is measured.
pub fn integer_schedule(g: &Digraph, p: u32) -> Result<(Schedule, CostVector)> {
    if p < 1 {
        return Err(Error::InvalidParam("granularity must be at least 1".into()));
    }
    let pl = plan(g)?;
    let pp = p as i128;
    let mut transfers = Vec::new();
    for (inst, s) in &pl.solved {
        for (v, parts) in &s.parts {
            let mut sorted = parts.clone();
            sorted.sort_by_key(|x| x.arc);
            let shares: Vec<Q> = sorted.iter().map(|x| x.hi - x.lo).collect();
            let units = round_shares(&shares, pp);
            let mut off = 0;
            for (part, n) in sorted.iter().zip(units) {
                if n > 0 {
                    transfers.push(Transfer::new(
                        *v,
                        ChunkSet::interval(Q::new(off, pp), Q::new(off + n, pp)),
                        part.arc,
                        inst.t,
                    ));
                }
                off += n;
            }
        }
    }
    let s = Schedule::with_t_max(Collective::ReduceScatter, transfers, pl.diameter).sorted();
    let c = measure_cost(&s, g)?;
    Ok((s, c))
}

/// Bound on the rounding loss in units of `M/B`: `d (d^D - 1) / ((d-1) P N)`,
/// or `D / (P N)` for `d = 1`.
pub fn rounding_gap_bound(d: usize, diameter: u32, n: usize, p: u32) -> Q {
    let d = d as i128;
    let reach = if d == 1 {
        qi(diameter as i128)
    } else {
        qi(d * (d.pow(diameter) - 1)) / qi(d - 1)
    };
    reach / qi(p as i128 * n as i128)
}

/// True iff every node has the same distance profile `N_x` and every arc
/// carries exactly `N_x / d` shards at the step serving distance `x`.
pub fn check_sp_bandwidth_optimal(g: &Digraph, s: &Schedule) -> Result<bool> {
    let d = g.regular_degree().ok_or(Error::Irregular)?;
    let prof = g.neighborhood_sizes(0);
    if (1..g.node_count()).any(|u| g.neighborhood_sizes(u) != prof) {
        return Ok(false);
    }
    let diam = prof.len() as u32;
    if s.t_max != diam {
        return Ok(false);
    }
    let loads = arc_loads(s, g)?;
    for (t, l) in loads.iter().enumerate() {
        let x = diam - t as u32;
        let want = qi(prof[x as usize - 1] as i128) / qi(d as i128);
        if l.iter().any(|a| *a != want) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sum over steps of the largest per-arc destination count, divided by `N/d`:
/// the exact cost when every destination has a single eligible arc.
pub fn unique_path_cost(g: &Digraph) -> Result<Q> {
    let d = g.regular_degree().ok_or(Error::Irregular)?;
    let dm = g.all_distances();
    let diam = dm.diameter().finite().ok_or(Error::NotStronglyConnected)?;
    let mut per_t = vec![0usize; diam as usize];
    for u in 0..g.node_count() {
        for inst in instances_for(g, &dm, u)? {
            let mut counts = vec![0usize; inst.arcs.len()];
            for &(_, m) in &inst.dests {
                if m.count_ones() != 1 {
                    return Err(Error::InvalidParam("shortest paths are not unique".into()));
                }
                counts[m.trailing_zeros() as usize] += 1;
            }
            let mx = counts.into_iter().max().unwrap_or(0);
            let slot = &mut per_t[inst.t as usize - 1];
            *slot = (*slot).max(mx);
        }
    }
    let total: usize = per_t.iter().sum();
    Ok(qi(total as i128 * d as i128) / qi(g.node_count() as i128))
}

/// `y` as an `f64`, for reporting.
pub fn y_f64(c: &CostVector) -> f64 {
    c.y.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of every chunk endpoint denominator.
pub fn chunk_denominator(s: &Schedule) -> i128 {
    s.transfers
        .iter()
        .flat_map(|t| t.chunk.endpoints())
        .fold(1i128, |acc, e| acc.lcm(e.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::validate::{is_shortest_path_schedule, validate};

    fn ring(m: usize) -> Digraph {
        let pairs: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Digraph::new(m, &pairs).unwrap()
    }

    fn circulant(n: usize, d: usize) -> Digraph {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 1..=d {
                pairs.push((i, (i + j) % n));
            }
        }
        Digraph::new(n, &pairs).unwrap()
    }

    fn inst(arcs: usize, dests: Vec<u64>) -> SpLpInstance {
        SpLpInstance {
            u: 0,
            t: 1,
            distance: 1,
            arcs: (0..arcs).collect(),
            dests: dests.into_iter().enumerate().map(|(i, m)| (i + 1, m)).collect(),
        }
    }

    #[test]
    fn symmetric_split() {
        let s = solve_lp(&inst(2, vec![0b11])).unwrap();
        assert_eq!(s.objective, q(1, 2));
        let parts = &s.parts[0].1;
        assert_eq!(parts.len(), 2);
        assert_eq!((parts[0].lo, parts[0].hi), (q(0, 1), q(1, 2)));
        assert_eq!((parts[1].lo, parts[1].hi), (q(1, 2), q(1, 1)));
    }

    #[test]
    fn forced_single_arc() {
        let s = solve_lp(&inst(2, vec![0b01])).unwrap();
        assert_eq!(s.objective, q(1, 1));
    }

    #[test]
    fn objective_matches_subset_bound() {
        let cases = vec![
            vec![0b011, 0b011, 0b110, 0b100, 0b111],
            vec![0b1, 0b1, 0b1],
            vec![0b101, 0b110, 0b011, 0b111, 0b001],
        ];
        for c in cases {
            let i = inst(3, c);
            let s = solve_lp(&i).unwrap();
            assert_eq!(s.objective, subset_bound(&i));
            let mut load = [Q::zero(); 3];
            for (_, parts) in &s.parts {
                let total: Q = parts.iter().map(|p| p.hi - p.lo).sum();
                assert_eq!(total, Q::one());
                for p in parts {
                    load[p.arc] += p.hi - p.lo;
                }
            }
            assert!(load.iter().all(|l| *l <= s.objective));
        }
    }

    #[test]
    fn circulant_hand_schedule() {
        let g = circulant(4, 2);
        let (s, c) = lp_schedule(&g).unwrap();
        assert_eq!(c, CostVector::new(2, q(3, 4)));
        assert_eq!(measure_cost(&s, &g).unwrap(), c);
        assert!(validate(&s, &g).unwrap().ok);
        assert!(is_shortest_path_schedule(&s, &g).unwrap());
        // Distance-2 destination is split in halves over both arcs.
        let dm = g.all_distances();
        let step1 = instances_for(&g, &dm, 0).unwrap().into_iter().find(|i| i.t == 1).unwrap();
        assert_eq!(solve_lp(&step1).unwrap().objective, q(1, 2));
    }

    #[test]
    fn ring_is_classic() {
        let g = ring(5);
        let (s, c) = lp_schedule(&g).unwrap();
        assert_eq!(c, CostVector::new(4, q(4, 5)));
        assert!(validate(&s, &g).unwrap().ok);
        assert!(check_sp_bandwidth_optimal(&g, &s).unwrap());
    }

    #[test]
    fn integer_rounding_on_ring_is_exact() {
        let g = ring(4);
        let (s, c) = integer_schedule(&g, 4).unwrap();
        assert_eq!(c.y, q(3, 4));
        assert!(validate(&s, &g).unwrap().ok);
    }

    #[test]
    fn largest_remainder() {
        assert_eq!(round_shares(&[q(1, 3), q(1, 3), q(1, 3)], 4), vec![2, 1, 1]);
        assert_eq!(round_shares(&[q(1, 2), q(1, 2)], 1), vec![1, 0]);
        assert_eq!(round_shares(&[q(1, 1)], 8), vec![8]);
    }

    #[test]
    fn lp_text_has_rows() {
        let g = circulant(4, 2);
        let dm = g.all_distances();
        let i = instances_for(&g, &dm, 0).unwrap().pop().unwrap();
        let text = i.to_lp_text(&g);
        assert!(text.starts_with("\\ shortest-path split"));
        assert!(text.contains("dest_3: x_0_3 + x_1_3 = 1"));
    }
}
