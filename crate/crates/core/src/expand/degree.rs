use crate::chunk::ChunkSet;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rational::Q;
use crate::schedule::{Collective, Schedule, Transfer};

/// `n` copies `v_0..v_{n-1}` of every node (`v_i = v*n + i`), and for every
/// arc `(u, v)` all `n^2` arcs `(u_i, v_j)`. Arc `(e, i, j)` has id
/// `e*n^2 + i*n + j`.
pub fn degree_expand(g: &Digraph, n: usize) -> Result<Digraph> {
    if n < 1 {
        return Err(Error::InvalidParam("degree expansion factor must be at least 1".into()));
    }
    if g.has_self_loops() {
        return Err(Error::SelfLoops);
    }
    let mut pairs = Vec::with_capacity(g.arc_count() * n * n);
    for a in g.arcs() {
        for i in 0..n {
            for j in 0..n {
                pairs.push((a.src * n + i, a.dst * n + j));
            }
        }
    }
    let h = Digraph::new(g.node_count() * n, &pairs)?;
    Ok(match g.label() {
        Some(x) => h.with_label(format!("Deg({x},{n})")),
        None => h,
    })
}

/// Step 1 spreads each sibling's shard over all out-arcs in `n d` equal
/// chunks (arcs ordered by head, then id); the original schedule follows,
/// shifted by one step and replicated across copies.
pub fn degree_expand_schedule(g: &Digraph, s: &Schedule, n: usize) -> Result<Schedule> {
    if s.kind != Collective::ReduceScatter {
        return Err(Error::WrongKind {
            expected: "reduce-scatter",
        });
    }
    let h = degree_expand(g, n)?;
    s.check_against(g)?;
    let mut transfers = Vec::new();
    for node in 0..h.node_count() {
        let i = node % n;
        let base = node - i;
        let mut outs: Vec<usize> = h.out_arcs(node).to_vec();
        outs.sort_by_key(|&a| (h.arc(a).dst, a));
        let k = outs.len() as i128;
        for j in (0..n).filter(|&j| j != i) {
            for (c, &a) in outs.iter().enumerate() {
                let chunk = ChunkSet::interval(Q::new(c as i128, k), Q::new(c as i128 + 1, k));
                transfers.push(Transfer::new(base + j, chunk, a, 1));
            }
        }
    }
    let nn = n * n;
    for t in &s.transfers {
        for i in 0..n {
            for j in 0..n {
                transfers.push(Transfer::new(
                    t.root * n + j,
                    t.chunk.clone(),
                    t.arc * nn + i * n + j,
                    t.step + 1,
                ));
            }
        }
    }
    Ok(Schedule::with_t_max(Collective::ReduceScatter, transfers, s.t_max + 1).sorted())
}
