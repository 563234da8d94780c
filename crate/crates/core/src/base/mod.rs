//! Base topologies, their canonical schedules and catalog annotations.

mod cyclemesh;
mod dbjmod;

use std::fmt;

use crate::chunk::ChunkSet;
use crate::cost::CostVector;
use crate::error::{Error, Result};
use crate::expand::{cartesian_power, power_rs};
use crate::graph::{find_skew_symmetry, Digraph, IsoMap};
use crate::lp::sp::lp_schedule;
use crate::rational::{q, Q};
use crate::schedule::{Collective, Schedule, Transfer};

pub use cyclemesh::{cycle_mesh, cycle_mesh_allgather, cycle_mesh_graph};
pub use dbjmod::{dbj_mod, dbj_mod_cycle};

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParam(msg()))
    }
}

fn full_shard_rs(g: &Digraph) -> Schedule {
    let ts = g
        .arcs()
        .iter()
        .enumerate()
        .map(|(id, a)| Transfer::new(a.dst, ChunkSet::full(), id, 1))
        .collect();
    Schedule::new(Collective::ReduceScatter, ts)
}

pub fn complete(m: usize) -> Result<(Digraph, Schedule)> {
    need(m >= 2, || format!("Complete needs m >= 2, got {m}"))?;
    let mut pairs = Vec::with_capacity(m * (m - 1));
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            pairs.push((i, j));
        }
    }
    let g = Digraph::new(m, &pairs)?
        .with_label(format!("Complete({m})"))
        .with_skew_hint(IsoMap::identity(m));
    let s = full_shard_rs(&g);
    Ok((g, s))
}

/// `x_i = i`, `y_i = d + i`. Step 1 spreads the shards of same-side peers
/// in `d` chunks over the other side; step 2 delivers them. With `d = 1`
/// there are no same-side peers and delivery happens at step 1.
pub fn complete_bipartite(d: usize) -> Result<(Digraph, Schedule)> {
    need(d >= 1, || "CompleteBipartite needs d >= 1".into())?;
    let mut pairs = Vec::with_capacity(2 * d * d);
    for side in [0, d] {
        let other = d - side;
        for i in 0..d {
            for k in 0..d {
                pairs.push((side + i, other + k));
            }
        }
    }
    let g = Digraph::new(2 * d, &pairs)?
        .with_label(format!("CompleteBipartite({d})"))
        .with_skew_hint(IsoMap::identity(2 * d));
    let arc = |side: usize, i: usize, k: usize| if side == 0 { i * d + k } else { d * d + i * d + k };
    let di = d as i128;
    let mut ts = Vec::new();
    for side in [0, d] {
        for i in 0..d {
            for j in (0..d).filter(|&j| j != i) {
                for k in 0..d {
                    let c = ChunkSet::interval(q(k as i128, di), q(k as i128 + 1, di));
                    ts.push(Transfer::new(side + j, c, arc(side, i, k), 1));
                }
            }
        }
        // The opposite side now delivers to this side.
        let step = if d == 1 { 1 } else { 2 };
        for k in 0..d {
            for j in 0..d {
                ts.push(Transfer::new(side + j, ChunkSet::full(), arc(d - side, k, j), step));
            }
        }
    }
    Ok((g, Schedule::new(Collective::ReduceScatter, ts).sorted()))
}

/// `d` parallel arcs `i -> i+1` with ids `i*d + k`; chunk `k` of every
/// shard rides the `k`-th ring.
pub fn uni_ring(d: usize, m: usize) -> Result<(Digraph, Schedule)> {
    need(d >= 1 && m >= 2, || format!("UniRing needs d >= 1, m >= 2, got ({d},{m})"))?;
    let mut pairs = Vec::with_capacity(d * m);
    for i in 0..m {
        for _ in 0..d {
            pairs.push((i, (i + 1) % m));
        }
    }
    let g = Digraph::new(m, &pairs)?
        .with_label(format!("UniRing({d},{m})"))
        .with_skew_hint(IsoMap::new((0..m).map(|i| (m - i) % m).collect())?);
    let di = d as i128;
    let mut ts = Vec::new();
    for t in 1..m {
        for i in 0..m {
            for k in 0..d {
                let c = ChunkSet::interval(q(k as i128, di), q(k as i128 + 1, di));
                ts.push(Transfer::new((i + m - t) % m, c, i * d + k, t as u32));
            }
        }
    }
    Ok((g, Schedule::new(Collective::ReduceScatter, ts).sorted()))
}

/// Per node: `d/2` arcs to `i+1`, then `d/2` arcs to `i-1`.
pub fn bi_ring(d: usize, m: usize) -> Result<Digraph> {
    need(d >= 2 && d.is_multiple_of(2) && m >= 3, || {
        format!("BiRing needs even d >= 2 and m >= 3, got ({d},{m})")
    })?;
    let mut pairs = Vec::with_capacity(d * m);
    for i in 0..m {
        for _ in 0..d / 2 {
            pairs.push((i, (i + 1) % m));
        }
        for _ in 0..d / 2 {
            pairs.push((i, (i + m - 1) % m));
        }
    }
    Ok(Digraph::new(m, &pairs)?
        .with_label(format!("BiRing({d},{m})"))
        .with_skew_hint(IsoMap::identity(m)))
}

/// Arcs `i -> i+j` for `j = 1..=d`.
pub fn circulant(n: usize, d: usize) -> Result<Digraph> {
    need(d >= 1 && n > d, || format!("Circulant needs n > d >= 1, got ({n},{d})"))?;
    let mut pairs = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 1..=d {
            pairs.push((i, (i + j) % n));
        }
    }
    Ok(Digraph::new(n, &pairs)?
        .with_label(format!("Circulant({n},{d})"))
        .with_skew_hint(IsoMap::new((0..n).map(|i| (n - i) % n).collect())?))
}

fn powered(base: (Digraph, Schedule), n: usize, label: String) -> Result<(Digraph, Schedule)> {
    need(n >= 1, || "dimension must be at least 1".into())?;
    let (g, s) = base;
    let p = cartesian_power(&g, n)?.with_label(label);
    let ps = power_rs(&g, &s, n)?;
    Ok((p, ps))
}

/// Directed `l`-ary `n`-torus; `l = 2` uses bidirectional edges.
pub fn torus(l: usize, n: usize) -> Result<(Digraph, Schedule)> {
    need(l >= 2, || format!("Torus needs l >= 2, got {l}"))?;
    let base = if l == 2 { complete(2)? } else { uni_ring(1, l)? };
    powered(base, n, format!("Torus({l},{n})"))
}

pub fn hypercube(n: usize) -> Result<(Digraph, Schedule)> {
    powered(complete(2)?, n, format!("Hypercube({n})"))
}

pub fn hamming(n: usize, q_: usize) -> Result<(Digraph, Schedule)> {
    need(q_ >= 2, || format!("Hamming needs q >= 2, got {q_}"))?;
    powered(complete(q_)?, n, format!("Hamming({n},{q_})"))
}

/// Shift-register graph on `d`-ary strings of length `n`; string reversal
/// is its skew witness.
pub fn de_bruijn(d: usize, n: usize) -> Result<Digraph> {
    need(d >= 2 && n >= 1, || format!("DeBruijn needs d >= 2, n >= 1, got ({d},{n})"))?;
    need((n as f64) * (d as f64).log2() <= 24.0, || format!("DeBruijn({d},{n}) is too large"))?;
    let (size, pairs) = dbjmod::de_bruijn_pairs(d, n);
    let reversal = (0..size)
        .map(|mut x| {
            let mut r = 0;
            for _ in 0..n {
                r = r * d + x % d;
                x /= d;
            }
            r
        })
        .collect();
    Ok(Digraph::new(size, &pairs)?
        .with_label(format!("DeBruijn({d},{n})"))
        .with_skew_hint(IsoMap::new(reversal)?))
}

/// Arcs `x -> -d x - a (mod m)` for `a = 1..=d`.
pub fn gen_kautz(d: usize, m: usize) -> Result<Digraph> {
    // With d = 1 the arcs form an involution, strongly connected only for m = 2.
    need(m > d && (d >= 2 || m == 2), || {
        format!("GenKautz needs m > d >= 2 (or d = 1, m = 2), got ({d},{m})")
    })?;
    let mut pairs = Vec::with_capacity(m * d);
    for x in 0..m {
        for a in 1..=d {
            let y = (2 * m * m - d * x - a) % m;
            pairs.push((x, y));
        }
    }
    Ok(Digraph::new(m, &pairs)?.with_label(format!("GenKautz({d},{m})")))
}

pub const DIAMOND_ARCS: [(usize, usize); 16] = [
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 7),
    (2, 3),
    (2, 4),
    (3, 6),
    (3, 7),
    (4, 1),
    (4, 5),
    (5, 0),
    (5, 1),
    (6, 2),
    (6, 5),
    (7, 0),
    (7, 6),
];

pub fn diamond() -> Digraph {
    Digraph::new(8, &DIAMOND_ARCS)
        .expect("constant arcs are in range")
        .with_label("Diamond")
}

/// Largest generalized Kautz graph searched for a skew-symmetry; larger
/// ones are treated as not skew-symmetric.
pub const GEN_KAUTZ_SKEW_SEARCH: usize = 128;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Family {
    Complete,
    CompleteBipartite,
    Circulant,
    UniRing,
    BiRing,
    Torus,
    Hypercube,
    Hamming,
    DeBruijn,
    DBJMod,
    GenKautz,
    Diamond,
    CycleMesh,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Complete,
        Family::CompleteBipartite,
        Family::Circulant,
        Family::UniRing,
        Family::BiRing,
        Family::Torus,
        Family::Hypercube,
        Family::Hamming,
        Family::DeBruijn,
        Family::DBJMod,
        Family::GenKautz,
        Family::Diamond,
        Family::CycleMesh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Complete => "Complete",
            Family::CompleteBipartite => "CompleteBipartite",
            Family::Circulant => "Circulant",
            Family::UniRing => "UniRing",
            Family::BiRing => "BiRing",
            Family::Torus => "Torus",
            Family::Hypercube => "Hypercube",
            Family::Hamming => "Hamming",
            Family::DeBruijn => "DeBruijn",
            Family::DBJMod => "DBJMod",
            Family::GenKautz => "GenKautz",
            Family::Diamond => "Diamond",
            Family::CycleMesh => "CycleMesh",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Family::Diamond => 0,
            Family::Complete | Family::CompleteBipartite | Family::Hypercube => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScheduleSource {
    Canonical,
    Lp,
    ImportOnly,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Latency {
    Exact(u32),
    ByBfs,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Bandwidth {
    Exact(Q),
    ByLp,
    /// Measured from the canonical schedule.
    Measured,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Annotations {
    pub degree: usize,
    pub size: usize,
    pub x: Latency,
    pub y: Bandwidth,
    pub bandwidth_optimal: bool,
    pub skew_symmetric: bool,
    /// The schedule routes everything along shortest paths.
    pub shortest_path: bool,
    pub schedule_source: ScheduleSource,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BaseSpec {
    pub family: Family,
    pub params: Vec<usize>,
}

impl fmt::Display for BaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            return write!(f, "{}", self.family.name());
        }
        let ps: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.family.name(), ps.join(","))
    }
}

fn optimal_y(n: usize) -> Q {
    q(n as i128 - 1, n as i128)
}

impl BaseSpec {
    pub fn new(family: Family, params: Vec<usize>) -> Result<Self> {
        if params.len() != family.arity() {
            return Err(Error::InvalidParam(format!(
                "{} takes {} parameter(s), got {}",
                family.name(),
                family.arity(),
                params.len()
            )));
        }
        let spec = BaseSpec { family, params };
        spec.check()?;
        Ok(spec)
    }

    fn p(&self, i: usize) -> usize {
        self.params[i]
    }

    fn check(&self) -> Result<()> {
        let p = &self.params;
        match self.family {
            Family::Complete => need(p[0] >= 2, || "Complete needs m >= 2".into()),
            Family::CompleteBipartite => need(p[0] >= 1, || "CompleteBipartite needs d >= 1".into()),
            Family::Circulant => need(p[1] >= 1 && p[0] > p[1], || "Circulant needs n > d >= 1".into()),
            Family::UniRing => need(p[0] >= 1 && p[1] >= 2, || "UniRing needs d >= 1, m >= 2".into()),
            Family::BiRing => need(p[0] >= 2 && p[0].is_multiple_of(2) && p[1] >= 3, || {
                "BiRing needs even d >= 2 and m >= 3".into()
            }),
            Family::Torus => need(p[0] >= 2 && p[1] >= 1, || "Torus needs l >= 2, n >= 1".into()),
            Family::Hypercube => need(p[0] >= 1, || "Hypercube needs n >= 1".into()),
            Family::Hamming => need(p[0] >= 1 && p[1] >= 2, || "Hamming needs n >= 1, q >= 2".into()),
            Family::DeBruijn => need(p[0] >= 2 && p[1] >= 1, || "DeBruijn needs d >= 2, n >= 1".into()),
            Family::DBJMod => need(p[0] >= 2 && p[1] >= 2, || "DBJMod needs d >= 2, n >= 2".into()),
            Family::GenKautz => need(p[1] > p[0] && (p[0] >= 2 || p[1] == 2), || {
                "GenKautz needs m > d >= 2 (or d = 1, m = 2)".into()
            }),
            Family::Diamond => Ok(()),
            Family::CycleMesh => need(p[0] >= 2 && p[1] >= 2, || "CycleMesh needs r, c >= 2".into()),
        }
    }

    pub fn size(&self) -> usize {
        match self.family {
            Family::Complete => self.p(0),
            Family::CompleteBipartite => 2 * self.p(0),
            Family::Circulant => self.p(0),
            Family::GenKautz => self.p(1),
            Family::UniRing | Family::BiRing => self.p(1),
            Family::Torus => self.p(0).pow(self.p(1) as u32),
            Family::Hypercube => 1 << self.p(0),
            Family::Hamming => self.p(1).pow(self.p(0) as u32),
            Family::DeBruijn | Family::DBJMod => self.p(0).pow(self.p(1) as u32),
            Family::Diamond => 8,
            Family::CycleMesh => self.p(0) * self.p(1),
        }
    }

    pub fn degree(&self) -> usize {
        match self.family {
            Family::Complete => self.p(0) - 1,
            Family::CompleteBipartite => self.p(0),
            Family::Circulant => self.p(1),
            Family::UniRing | Family::BiRing | Family::DeBruijn | Family::DBJMod | Family::GenKautz => self.p(0),
            Family::Torus => self.p(1),
            Family::Hypercube => self.p(0),
            Family::Hamming => self.p(0) * (self.p(1) - 1),
            Family::Diamond | Family::CycleMesh => 2,
        }
    }

    pub fn graph(&self) -> Result<Digraph> {
        let p = &self.params;
        Ok(match self.family {
            Family::Complete => complete(p[0])?.0,
            Family::CompleteBipartite => complete_bipartite(p[0])?.0,
            Family::Circulant => circulant(p[0], p[1])?,
            Family::UniRing => uni_ring(p[0], p[1])?.0,
            Family::BiRing => bi_ring(p[0], p[1])?,
            Family::Torus => torus(p[0], p[1])?.0,
            Family::Hypercube => hypercube(p[0])?.0,
            Family::Hamming => hamming(p[0], p[1])?.0,
            Family::DeBruijn => de_bruijn(p[0], p[1])?,
            Family::DBJMod => dbj_mod(p[0], p[1])?,
            Family::GenKautz => gen_kautz(p[0], p[1])?,
            Family::Diamond => diamond(),
            Family::CycleMesh => cycle_mesh_graph(p[0], p[1])?,
        })
    }

    /// The family's own reduce-scatter, if it has one.
    pub fn canonical(&self) -> Result<Option<(Digraph, Schedule)>> {
        let p = &self.params;
        Ok(Some(match self.family {
            Family::Complete => complete(p[0])?,
            Family::CompleteBipartite => complete_bipartite(p[0])?,
            Family::UniRing => uni_ring(p[0], p[1])?,
            Family::Torus => torus(p[0], p[1])?,
            Family::Hypercube => hypercube(p[0])?,
            Family::Hamming => hamming(p[0], p[1])?,
            Family::CycleMesh => cycle_mesh(p[0], p[1])?,
            _ => return Ok(None),
        }))
    }

    /// Canonical reduce-scatter, or the optimal shortest-path one from the LP.
    pub fn rs_schedule(&self) -> Result<(Digraph, Schedule, CostVector)> {
        if let Some((g, s)) = self.canonical()? {
            let c = crate::cost::measure_cost(&s, &g)?;
            return Ok((g, s, c));
        }
        let g = self.graph()?;
        let (s, c) = lp_schedule(&g)?;
        Ok((g, s, c))
    }

    pub fn annotations(&self) -> Annotations {
        let n = self.size();
        let d = self.degree();
        let p = &self.params;
        let exact = |x: u32, y: Q| (Latency::Exact(x), Bandwidth::Exact(y));
        let (x, y, bw, skew, sp, src) = match self.family {
            Family::Complete => {
                let (x, y) = exact(1, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::CompleteBipartite => {
                let (x, y) = exact(if p[0] == 1 { 1 } else { 2 }, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::Hamming => {
                let (x, y) = exact(p[0] as u32, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::Hypercube => {
                let (x, y) = exact(p[0] as u32, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::Torus => {
                let (x, y) = exact((p[1] * (p[0] - 1)) as u32, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::UniRing => {
                let (x, y) = exact(p[1] as u32 - 1, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Canonical)
            }
            Family::BiRing => {
                let (x, y) = exact(p[1] as u32 / 2, optimal_y(n));
                (x, y, true, true, true, ScheduleSource::Lp)
            }
            Family::Circulant => {
                let bw = p[0] <= p[1] + 2;
                (Latency::ByBfs, Bandwidth::ByLp, bw, true, true, ScheduleSource::Lp)
            }
            Family::GenKautz => {
                let bw = p[1] == p[0] + 1;
                // Not skew-symmetric in general (Pi_{2,5} is not); decided by search.
                let skew = n <= GEN_KAUTZ_SKEW_SEARCH
                    && gen_kautz(p[0], p[1])
                        .and_then(|g| find_skew_symmetry(&g))
                        .is_ok_and(|f| f.is_some());
                (Latency::ByBfs, Bandwidth::ByLp, bw, skew, true, ScheduleSource::Lp)
            }
            Family::DeBruijn => (
                Latency::Exact(p[1] as u32),
                Bandwidth::ByLp,
                p[1] <= 1,
                true,
                true,
                ScheduleSource::Lp,
            ),
            Family::Diamond => {
                let (x, y) = exact(3, optimal_y(8));
                (x, y, true, false, false, ScheduleSource::ImportOnly)
            }
            Family::DBJMod => {
                let table_x = match (p[0], p[1]) {
                    (2, 3) => Some(4),
                    (2, 4) => Some(5),
                    (3, 2) => Some(3),
                    (4, 2) => Some(3),
                    _ => None,
                };
                let skew = matches!((p[0], p[1]), (2, 3) | (2, 4));
                match table_x {
                    Some(tx) => {
                        let (x, y) = exact(tx, optimal_y(n));
                        (x, y, true, skew, false, ScheduleSource::ImportOnly)
                    }
                    None => (Latency::ByBfs, Bandwidth::ByLp, false, false, false, ScheduleSource::Lp),
                }
            }
            Family::CycleMesh => {
                let (lo, hi) = (p[0].min(p[1]), p[0].max(p[1]));
                if lo == hi {
                    let (x, y) = exact(2 * (hi as u32 - 1), optimal_y(n));
                    (x, y, true, true, true, ScheduleSource::Canonical)
                } else {
                    (
                        Latency::Exact(2 * (hi as u32 - 1)),
                        Bandwidth::Measured,
                        false,
                        true,
                        false,
                        ScheduleSource::Canonical,
                    )
                }
            }
        };
        Annotations {
            degree: d,
            size: n,
            x,
            y,
            bandwidth_optimal: bw,
            skew_symmetric: skew,
            shortest_path: sp,
            schedule_source: src,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::measure_cost;
    use crate::validate::{check_bandwidth_optimal, validate};

    fn assert_optimal(g: &Digraph, s: &Schedule, x: u32) {
        assert!(validate(s, g).unwrap().ok, "{:?}", g.label());
        let c = measure_cost(s, g).unwrap();
        assert_eq!(c.x, x, "{:?}", g.label());
        assert_eq!(c.y, optimal_y(g.node_count()), "{:?}", g.label());
        assert!(check_bandwidth_optimal(s, g).unwrap().optimal, "{:?}", g.label());
    }

    #[test]
    fn canonical_schedules_are_optimal() {
        let (g, s) = complete(5).unwrap();
        assert_optimal(&g, &s, 1);
        let (g, s) = complete(2).unwrap();
        assert_optimal(&g, &s, 1);
        for d in 1..=4 {
            let (g, s) = complete_bipartite(d).unwrap();
            assert_optimal(&g, &s, if d == 1 { 1 } else { 2 });
        }
        let (g, s) = uni_ring(1, 4).unwrap();
        assert_optimal(&g, &s, 3);
        let (g, s) = uni_ring(2, 3).unwrap();
        assert_eq!(g.arc_count(), 6);
        assert_optimal(&g, &s, 2);
        let (g, s) = torus(3, 2).unwrap();
        assert_optimal(&g, &s, 4);
        let (g, s) = hamming(2, 3).unwrap();
        assert_eq!(g.regular_degree(), Some(4));
        assert_optimal(&g, &s, 2);
        let (g, s) = hypercube(3).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert_optimal(&g, &s, 3);
    }

    #[test]
    fn small_graph_shapes() {
        let c = circulant(4, 2).unwrap();
        assert_eq!(c.arc_pairs()[..2], [(0, 1), (0, 2)]);
        assert_eq!(circulant(5, 1).unwrap(), uni_ring(1, 5).unwrap().0);
        let b = bi_ring(4, 3).unwrap();
        assert!(b.has_parallel_arcs());
        assert!(bi_ring(3, 5).is_err());
        let db = de_bruijn(2, 3).unwrap();
        assert_eq!(db.self_loop_count(), 2);
        assert_eq!(db.diameter().unwrap(), 3);
        let k = gen_kautz(2, 6).unwrap();
        assert_eq!(k.diameter().unwrap(), 2);
        assert_eq!(k.self_loop_count(), 0);
        let dia = diamond();
        assert_eq!(dia.regular_degree(), Some(2));
        assert_eq!(dia.diameter().unwrap(), 3);
    }

    #[test]
    fn skew_flags_match_search() {
        let cases: Vec<(BaseSpec, bool)> = [
            (Family::Complete, vec![4]),
            (Family::CompleteBipartite, vec![3]),
            (Family::Circulant, vec![6, 4]),
            (Family::UniRing, vec![2, 5]),
            (Family::BiRing, vec![2, 5]),
            (Family::Hamming, vec![2, 3]),
            (Family::DeBruijn, vec![2, 3]),
            (Family::GenKautz, vec![2, 12]),
            (Family::GenKautz, vec![2, 5]),
            (Family::GenKautz, vec![3, 7]),
            (Family::Diamond, vec![]),
            (Family::DBJMod, vec![2, 3]),
            (Family::DBJMod, vec![2, 4]),
            (Family::DBJMod, vec![3, 2]),
            (Family::DBJMod, vec![4, 2]),
        ]
        .into_iter()
        .map(|(f, p)| {
            let s = BaseSpec::new(f, p).unwrap();
            let skew = s.annotations().skew_symmetric;
            (s, skew)
        })
        .collect();
        for (spec, skew) in cases {
            let g = spec.graph().unwrap();
            assert_eq!(find_skew_symmetry(&g).unwrap().is_some(), skew, "{spec}");
        }
    }

    #[test]
    fn sizes_and_degrees_match_graphs() {
        let specs = [
            BaseSpec::new(Family::Torus, vec![2, 3]).unwrap(),
            BaseSpec::new(Family::Torus, vec![4, 2]).unwrap(),
            BaseSpec::new(Family::GenKautz, vec![3, 20]).unwrap(),
            BaseSpec::new(Family::Circulant, vec![7, 3]).unwrap(),
            BaseSpec::new(Family::CycleMesh, vec![3, 5]).unwrap(),
            BaseSpec::new(Family::Diamond, vec![]).unwrap(),
        ];
        for s in specs {
            let g = s.graph().unwrap();
            assert_eq!(g.node_count(), s.size(), "{s}");
            assert_eq!(g.regular_degree(), Some(s.degree()), "{s}");
        }
    }

    #[test]
    fn names_print() {
        assert_eq!(BaseSpec::new(Family::UniRing, vec![1, 4]).unwrap().to_string(), "UniRing(1,4)");
        assert_eq!(BaseSpec::new(Family::Diamond, vec![]).unwrap().to_string(), "Diamond");
        assert!(BaseSpec::new(Family::UniRing, vec![1]).is_err());
        assert_eq!(Family::from_name("DBJMod"), Some(Family::DBJMod));
    }
}
