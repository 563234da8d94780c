use crate::chunk::ChunkSet;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::schedule::{Collective, Schedule, Transfer};

/// Node `a` of the line graph is arc `a` of `g`; arcs `a -> b` exist when
/// `a` ends where `b` starts. Arcs are listed by `a`, then by `b` ascending.
pub fn line_graph(g: &Digraph) -> Digraph {
    let mut pairs = Vec::new();
    for (a, arc) in g.arcs().iter().enumerate() {
        for &b in g.out_arcs(arc.dst) {
            pairs.push((a, b));
        }
    }
    let l = Digraph::new(g.arc_count(), &pairs).expect("line graph endpoints are arc ids");
    match g.label() {
        Some(x) => l.with_label(format!("L({x})")),
        None => l,
    }
}

/// Id of the line-graph arc `a -> b`, given that `b` leaves `dst(a)`.
fn line_arc(g: &Digraph, offsets: &[usize], a: usize, b: usize) -> usize {
    let pos = g
        .out_arcs(g.arc(a).dst)
        .iter()
        .position(|&x| x == b)
        .expect("b leaves the head of a");
    offsets[a] + pos
}

/// Lifts a reduce-scatter schedule on `g` to `line_graph(g)` with one extra
/// final step that delivers full shards over the last hop.
pub fn line_expand_schedule(g: &Digraph, s: &Schedule) -> Result<Schedule> {
    if s.kind != Collective::ReduceScatter {
        return Err(Error::WrongKind {
            expected: "reduce-scatter",
        });
    }
    s.check_against(g)?;
    let mut offsets = Vec::with_capacity(g.arc_count());
    let mut acc = 0;
    for arc in g.arcs() {
        offsets.push(acc);
        acc += g.out_degree(arc.dst);
    }
    let mut transfers = Vec::new();
    for t in &s.transfers {
        let e = g.arc(t.arc);
        for &root in g.out_arcs(t.root) {
            for &p in g.in_arcs(e.src) {
                if p == root {
                    continue;
                }
                transfers.push(Transfer::new(root, t.chunk.clone(), line_arc(g, &offsets, p, t.arc), t.step));
            }
        }
    }
    let last = s.t_max + 1;
    for (p, arc) in g.arcs().iter().enumerate() {
        for &r in g.out_arcs(arc.dst) {
            if r != p {
                transfers.push(Transfer::new(r, ChunkSet::full(), line_arc(g, &offsets, p, r), last));
            }
        }
    }
    Ok(Schedule::with_t_max(Collective::ReduceScatter, transfers, last).sorted())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::measure_cost;
    use crate::rational::q;
    use crate::validate::validate;

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

    #[test]
    fn line_of_triangle_is_kautz() {
        let (g, _) = complete(3);
        let l = line_graph(&g);
        assert_eq!(l.node_count(), 6);
        assert_eq!(l.regular_degree(), Some(2));
        assert_eq!(l.diameter().unwrap(), 2);
    }

    #[test]
    fn line_of_self_loop() {
        let g = Digraph::new(1, &[(0, 0)]).unwrap();
        let l = line_graph(&g);
        assert_eq!(l.node_count(), 1);
        assert_eq!(l.self_loop_count(), 1);
    }

    #[test]
    fn line_of_k5_adds_one_over_n() {
        let (g, s) = complete(5);
        let l = line_graph(&g);
        let ls = line_expand_schedule(&g, &s).unwrap();
        assert!(validate(&ls, &l).unwrap().ok);
        let c = measure_cost(&ls, &l).unwrap();
        assert_eq!(c.x, 2);
        assert_eq!(c.y, q(1, 1));
    }

    #[test]
    fn rejects_allgather() {
        let (g, s) = complete(3);
        let ag = Schedule::new(Collective::Allgather, s.transfers);
        assert!(line_expand_schedule(&g, &ag).is_err());
    }
}
