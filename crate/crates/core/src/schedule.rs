//! Timed transfer sets and the structural transforms on them.

use std::fmt;

use crate::chunk::ChunkSet;
use crate::error::{Error, Result};
use crate::graph::{arc_matching, Digraph, IsoMap};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Collective {
    ReduceScatter,
    Allgather,
}

impl Collective {
    pub fn flipped(self) -> Self {
        match self {
            Collective::ReduceScatter => Collective::Allgather,
            Collective::Allgather => Collective::ReduceScatter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Collective::ReduceScatter => "reduce-scatter",
            Collective::Allgather => "allgather",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reduce-scatter" | "rs" => Some(Collective::ReduceScatter),
            "allgather" | "ag" => Some(Collective::Allgather),
            _ => None,
        }
    }
}

impl fmt::Display for Collective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `((root, chunk), arc, step)`. For reduce-scatter the root is the
/// destination of the data, for allgather its source.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Transfer {
    pub root: usize,
    pub chunk: ChunkSet,
    pub arc: usize,
    pub step: u32,
}

impl Transfer {
    pub fn new(root: usize, chunk: ChunkSet, arc: usize, step: u32) -> Self {
        Transfer {
            root,
            chunk,
            arc,
            step,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Schedule {
    pub kind: Collective,
    pub transfers: Vec<Transfer>,
    pub t_max: u32,
}

impl Schedule {
    /// `t_max` is the largest step present, or 0 when empty.
    pub fn new(kind: Collective, transfers: Vec<Transfer>) -> Self {
        let t_max = transfers.iter().map(|t| t.step).max().unwrap_or(0);
        Schedule {
            kind,
            transfers,
            t_max,
        }
    }

    /// Keeps an explicit `t_max`, which may exceed every step (idle tail).
    pub fn with_t_max(kind: Collective, transfers: Vec<Transfer>, t_max: u32) -> Self {
        Schedule {
            kind,
            transfers,
            t_max,
        }
    }

    pub fn len(&self) -> usize {
        self.transfers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transfers.is_empty()
    }

    /// Checks structural well-formedness against `g`.
    pub fn check_against(&self, g: &Digraph) -> Result<()> {
        for t in &self.transfers {
            if t.arc >= g.arc_count() {
                return Err(Error::UnknownArc(t.arc));
            }
            if t.root >= g.node_count() {
                return Err(Error::UnknownNode(t.root));
            }
            if t.step == 0 || t.step > self.t_max {
                return Err(Error::StepOutOfRange {
                    step: t.step,
                    t_max: self.t_max,
                });
            }
            if t.chunk.is_empty() {
                return Err(Error::EmptyChunk);
            }
        }
        Ok(())
    }

    /// Transfer indices grouped by step, `out[t - 1]`.
    pub fn by_step(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.t_max as usize];
        for (i, t) in self.transfers.iter().enumerate() {
            out[t.step as usize - 1].push(i);
        }
        out
    }

    /// Deterministic canonical order: step, arc, root, chunk.
    pub fn sorted(mut self) -> Self {
        self.transfers.sort_by(|a, b| {
            (a.step, a.arc, a.root)
                .cmp(&(b.step, b.arc, b.root))
                .then_with(|| a.chunk.endpoints().cmp(&b.chunk.endpoints()))
        });
        self
    }

    /// Shifts every step by `dt` and `t_max` with it.
    pub fn shifted(mut self, dt: u32) -> Self {
        for t in &mut self.transfers {
            t.step += dt;
        }
        self.t_max += dt;
        self
    }
}

/// Reverse schedule on the transpose graph: arcs keep their ids (and thus
/// flip direction), step `t` becomes `t_max - t + 1`, and the kind flips.
pub fn reverse_schedule(s: &Schedule) -> Schedule {
    let transfers = s
        .transfers
        .iter()
        .map(|t| Transfer::new(t.root, t.chunk.clone(), t.arc, s.t_max - t.step + 1))
        .collect();
    Schedule::with_t_max(s.kind.flipped(), transfers, s.t_max)
}

/// Relabels roots and arcs of a schedule on `g` through `f` onto `target`.
pub fn map_schedule(s: &Schedule, g: &Digraph, f: &IsoMap, target: &Digraph) -> Result<Schedule> {
    let arcs = arc_matching(g, target, f).ok_or(Error::NotIsomorphism)?;
    let transfers = s
        .transfers
        .iter()
        .map(|t| Transfer::new(f.apply(t.root), t.chunk.clone(), arcs[t.arc], t.step))
        .collect();
    Ok(Schedule::with_t_max(s.kind, transfers, s.t_max))
}

/// Opposite-kind schedule on the same skew-symmetric graph, where `f` maps
/// `transpose(g)` onto `g`.
pub fn dualize(s: &Schedule, g: &Digraph, f: &IsoMap) -> Result<Schedule> {
    let gt = g.transpose();
    map_schedule(&reverse_schedule(s), &gt, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ring3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn half() -> ChunkSet {
        ChunkSet::interval(q(0, 1), q(1, 2))
    }

    #[test]
    fn t_max_tracks_steps() {
        let s = Schedule::new(
            Collective::ReduceScatter,
            vec![Transfer::new(0, half(), 0, 2), Transfer::new(1, half(), 1, 1)],
        );
        assert_eq!(s.t_max, 2);
        assert_eq!(Schedule::new(Collective::Allgather, vec![]).t_max, 0);
        assert_eq!(s.by_step(), vec![vec![1], vec![0]]);
    }

    #[test]
    fn check_rejects_bad_arc_and_step() {
        let g = ring3();
        let s = Schedule::new(Collective::ReduceScatter, vec![Transfer::new(0, half(), 7, 1)]);
        assert_eq!(s.check_against(&g), Err(Error::UnknownArc(7)));
        let s = Schedule::with_t_max(
            Collective::ReduceScatter,
            vec![Transfer::new(0, half(), 0, 3)],
            2,
        );
        assert!(matches!(s.check_against(&g), Err(Error::StepOutOfRange { .. })));
    }

    #[test]
    fn reverse_is_involution() {
        let s = Schedule::new(
            Collective::ReduceScatter,
            vec![Transfer::new(0, half(), 0, 1), Transfer::new(2, half(), 1, 3)],
        );
        let r = reverse_schedule(&s);
        assert_eq!(r.kind, Collective::Allgather);
        assert_eq!(r.transfers[0].step, 3);
        assert_eq!(reverse_schedule(&r), s);
    }

    #[test]
    fn identity_map_is_noop() {
        let g = ring3();
        let s = Schedule::new(Collective::ReduceScatter, vec![Transfer::new(1, half(), 2, 1)]);
        let m = map_schedule(&s, &g, &IsoMap::identity(3), &g).unwrap();
        assert_eq!(m, s);
    }

    #[test]
    fn map_rejects_non_isomorphism() {
        let g = ring3();
        let s = Schedule::new(Collective::ReduceScatter, vec![]);
        let swap = IsoMap::new(vec![1, 0, 2]).unwrap();
        assert_eq!(map_schedule(&s, &g, &swap, &g), Err(Error::NotIsomorphism));
    }
}
