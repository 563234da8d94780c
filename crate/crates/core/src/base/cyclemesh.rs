//! Two orthogonal ring covers of `r*c` nodes.

use crate::chunk::ChunkSet;
use crate::error::{Error, Result};
use crate::expand::{cartesian_power, power_rs};
use crate::graph::{Digraph, IsoMap};
use crate::rational::Q;
use crate::schedule::{map_schedule, reverse_schedule, Collective, Schedule, Transfer};

use super::uni_ring;

#[derive(Clone, Copy)]
struct Mesh {
    lo: usize,
    hi: usize,
    n: usize,
}

impl Mesh {
    fn new(r: usize, c: usize) -> Result<Self> {
        if r < 2 || c < 2 {
            return Err(Error::InvalidParam(format!("CycleMesh needs r, c >= 2, got ({r},{c})")));
        }
        Ok(Mesh {
            lo: r.min(c),
            hi: r.max(c),
            n: r * c,
        })
    }

    fn block(&self, i: usize) -> usize {
        (i / self.hi) * self.hi + (i % self.hi + 1) % self.hi
    }

    fn block_inv(&self, i: usize) -> usize {
        (i / self.hi) * self.hi + (i % self.hi + self.hi - 1) % self.hi
    }

    fn stride(&self, i: usize) -> usize {
        (i + self.lo) % self.n
    }

    fn stride_inv(&self, i: usize) -> usize {
        (i + self.n - self.lo) % self.n
    }
}

/// Blocks of `max(r,c)` consecutive nodes form one ring family, `i -> i +
/// min(r,c)` the other. Arc `2i` is the block arc of `i`, arc `2i+1` its
/// stride arc.
pub fn cycle_mesh_graph(r: usize, c: usize) -> Result<Digraph> {
    let m = Mesh::new(r, c)?;
    let mut pairs = Vec::with_capacity(2 * m.n);
    for i in 0..m.n {
        pairs.push((i, m.block(i)));
        pairs.push((i, m.stride(i)));
    }
    let skew = IsoMap::new((0..m.n).map(|i| (m.hi * m.n + m.hi - 1 - i) % m.n).collect())?;
    Ok(Digraph::new(m.n, &pairs)?
        .with_label(format!("CycleMesh({r},{c})"))
        .with_skew_hint(skew))
}

/// For every source: walk the first ring, then from every holder walk the
/// second ring until the next holder, each hop as early as possible.
fn two_ring_trees(
    n: usize,
    first: &dyn Fn(usize) -> (usize, usize),
    second: &dyn Fn(usize) -> (usize, usize),
    chunk: &ChunkSet,
) -> Vec<Transfer> {
    let mut out = Vec::new();
    for src in 0..n {
        let mut holders = vec![None; n];
        holders[src] = Some(0u32);
        let mut order = vec![(src, 0u32)];
        let mut x = src;
        loop {
            let (y, arc) = first(x);
            if y == src {
                break;
            }
            let k = order.len() as u32;
            out.push(Transfer::new(src, chunk.clone(), arc, k));
            holders[y] = Some(k);
            order.push((y, k));
            x = y;
        }
        for &(h, k) in &order {
            let (mut x, mut t) = (h, k);
            loop {
                let (y, arc) = second(x);
                if holders[y].is_some() {
                    break;
                }
                t += 1;
                out.push(Transfer::new(src, chunk.clone(), arc, t));
                x = y;
            }
        }
    }
    out
}

/// Allgather where half of every shard goes block-ring first and the other
/// half stride-ring first. `transposed` builds it on the transpose, whose
/// arc ids equal those of the forward graph.
fn mesh_allgather(m: Mesh, transposed: bool) -> Schedule {
    let half = Q::new(1, 2);
    let lower = ChunkSet::interval(Q::from_integer(0), half);
    let upper = ChunkSet::interval(half, Q::from_integer(1));
    let a = move |x: usize| {
        if transposed {
            let p = m.block_inv(x);
            (p, 2 * p)
        } else {
            (m.block(x), 2 * x)
        }
    };
    let b = move |x: usize| {
        if transposed {
            let p = m.stride_inv(x);
            (p, 2 * p + 1)
        } else {
            (m.stride(x), 2 * x + 1)
        }
    };
    let mut ts = two_ring_trees(m.n, &a, &b, &lower);
    ts.extend(two_ring_trees(m.n, &b, &a, &upper));
    Schedule::with_t_max(Collective::Allgather, ts, 2 * (m.hi as u32 - 1))
}

/// Reduce-scatter on `cycle_mesh_graph(r, c)`. With `r == c` this is the
/// torus power schedule; otherwise the two-phase ring trees, padded to
/// `2 (max(r,c) - 1)` steps.
pub fn cycle_mesh(r: usize, c: usize) -> Result<(Digraph, Schedule)> {
    let m = Mesh::new(r, c)?;
    let g = cycle_mesh_graph(r, c)?;
    if m.lo == m.hi {
        let (ring, rs) = uni_ring(1, m.hi)?;
        let torus = cartesian_power(&ring, 2)?;
        let s = power_rs(&ring, &rs, 2)?;
        let s = map_schedule(&s, &torus, &IsoMap::identity(m.n), &g)?;
        return Ok((g, s.sorted()));
    }
    Ok((g, reverse_schedule(&mesh_allgather(m, true)).sorted()))
}

/// Allgather counterpart of `cycle_mesh`, built on the graph directly.
pub fn cycle_mesh_allgather(r: usize, c: usize) -> Result<Schedule> {
    let m = Mesh::new(r, c)?;
    Ok(mesh_allgather(m, false).sorted())
}
