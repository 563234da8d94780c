use crate::error::{Error, Result};
use crate::graph::{verify_isomorphism, Digraph, IsoMap};
use crate::rational::Q;
use crate::schedule::{map_schedule, Collective, Schedule, Transfer};

/// `g` plus its reversed arcs (ids `|E| + a`), with a reduce-scatter that
/// runs `s` on the lower half of every shard and the image of `s` on the
/// transpose on the upper half. `f` maps `transpose(g)` onto `g`.
pub fn to_undirected(g: &Digraph, s: &Schedule, f: &IsoMap) -> Result<(Digraph, Schedule)> {
    if s.kind != Collective::ReduceScatter {
        return Err(Error::WrongKind {
            expected: "reduce-scatter",
        });
    }
    let gt = g.transpose();
    if !verify_isomorphism(&gt, g, f) {
        return Err(Error::NotSkewSymmetric);
    }
    s.check_against(g)?;
    let e = g.arc_count();
    let mut pairs = g.arc_pairs();
    pairs.extend(g.arcs().iter().map(|a| (a.dst, a.src)));
    let mut u = Digraph::new(g.node_count(), &pairs)?;
    if let Some(x) = g.label() {
        u = u.with_label(format!("Undir({x})"));
    }
    let half = Q::new(1, 2);
    let mirrored = map_schedule(s, g, &f.inverse(), &gt)?;
    let mut transfers: Vec<Transfer> = s
        .transfers
        .iter()
        .map(|t| Transfer::new(t.root, t.chunk.affine(Q::from_integer(0), half), t.arc, t.step))
        .collect();
    transfers.extend(
        mirrored
            .transfers
            .iter()
            .map(|t| Transfer::new(t.root, t.chunk.affine(half, half), e + t.arc, t.step)),
    );
    Ok((u, Schedule::with_t_max(Collective::ReduceScatter, transfers, s.t_max).sorted()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::ChunkSet;
    use crate::cost::measure_cost;
    use crate::graph::find_skew_symmetry;
    use crate::rational::q;
    use crate::validate::validate;

    fn ring(m: usize) -> (Digraph, Schedule) {
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
    fn ring_becomes_bidirectional() {
        let (g, s) = ring(5);
        assert!(validate(&s, &g).unwrap().ok);
        let f = find_skew_symmetry(&g).unwrap().unwrap();
        let (u, us) = to_undirected(&g, &s, &f).unwrap();
        assert_eq!(u.regular_degree(), Some(2));
        assert!(validate(&us, &u).unwrap().ok);
        let c = measure_cost(&us, &u).unwrap();
        assert_eq!((c.x, c.y), (4, q(4, 5)));
    }

    #[test]
    fn bad_witness_rejected() {
        let (g, s) = ring(3);
        let f = IsoMap::identity(3);
        assert_eq!(to_undirected(&g, &s, &f).unwrap_err(), Error::NotSkewSymmetric);
    }
}
