//! Builds the topology and schedules named by a construction expression.

use crate::base::{cycle_mesh_allgather, Family, ScheduleSource};
use crate::cost::{measure_cost, CostVector};
use crate::error::{Error, Result};
use crate::expand::{
    cartesian_power, degree_expand, degree_expand_schedule, line_expand_schedule, line_graph, power_rs,
    product_of, to_undirected,
};
use crate::expr::TopoExpr;
use crate::graph::{arc_matching, find_skew_symmetry, verify_isomorphism, Digraph, IsoMap};
use crate::lp::sp::lp_schedule;
use crate::schedule::{map_schedule, reverse_schedule, Collective, Schedule};

/// Topology of `e`, labelled with its text form.
pub fn graph_of(e: &TopoExpr) -> Result<Digraph> {
    let g = match e {
        TopoExpr::Base(b) => b.graph()?,
        TopoExpr::Line(inner) => line_graph(&graph_of(inner)?),
        TopoExpr::Deg(inner, n) => degree_expand(&graph_of(inner)?, *n)?,
        TopoExpr::Pow(inner, n) => cartesian_power(&graph_of(inner)?, *n)?,
        TopoExpr::Prod(a, b) => product_of(&graph_of(a)?, &graph_of(b)?),
        TopoExpr::Undir(inner) => {
            let g = graph_of(inner)?;
            let mut pairs = g.arc_pairs();
            pairs.extend(g.arcs().iter().map(|a| (a.dst, a.src)));
            Digraph::new(g.node_count(), &pairs)?
        }
    };
    Ok(g.with_label(e.to_string()))
}

/// Witness mapping `transpose(graph_of(e))` onto `graph_of(e)`, built from
/// the operands' witnesses where possible.
pub fn skew_witness(e: &TopoExpr, g: &Digraph) -> Result<Option<IsoMap>> {
    let composed = match e {
        TopoExpr::Base(_) => None,
        TopoExpr::Line(inner) => {
            let h = graph_of(inner)?;
            match skew_witness(inner, &h)? {
                Some(f) => arc_matching(&h.transpose(), &h, &f).map(IsoMap::new).transpose()?,
                None => return Ok(None),
            }
        }
        TopoExpr::Deg(inner, n) => {
            let h = graph_of(inner)?;
            match skew_witness(inner, &h)? {
                Some(f) => Some(IsoMap::new(
                    (0..g.node_count()).map(|x| f.apply(x / n) * n + x % n).collect(),
                )?),
                None => return Ok(None),
            }
        }
        TopoExpr::Pow(inner, n) => {
            let h = graph_of(inner)?;
            match skew_witness(inner, &h)? {
                Some(f) => {
                    let m = h.node_count();
                    Some(IsoMap::new(
                        (0..g.node_count())
                            .map(|mut x| {
                                let mut digits = Vec::with_capacity(*n);
                                for _ in 0..*n {
                                    digits.push(f.apply(x % m));
                                    x /= m;
                                }
                                digits.iter().rev().fold(0, |acc, &dgt| acc * m + dgt)
                            })
                            .collect(),
                    )?)
                }
                None => return Ok(None),
            }
        }
        TopoExpr::Prod(a, b) => {
            let (ga, gb) = (graph_of(a)?, graph_of(b)?);
            match (skew_witness(a, &ga)?, skew_witness(b, &gb)?) {
                (Some(fa), Some(fb)) => {
                    let m = gb.node_count();
                    Some(IsoMap::new(
                        (0..g.node_count())
                            .map(|x| fa.apply(x / m) * m + fb.apply(x % m))
                            .collect(),
                    )?)
                }
                _ => None,
            }
        }
        TopoExpr::Undir(_) => Some(IsoMap::identity(g.node_count())),
    };
    if let Some(f) = composed {
        if verify_isomorphism(&g.transpose(), g, &f) {
            return Ok(Some(f));
        }
    }
    find_skew_symmetry(g)
}

/// Re-labels arcs of `s` (built on `built`) onto the identical-node graph
/// `target`; a no-op when the arc lists already agree.
fn onto(built: &Digraph, s: Schedule, target: &Digraph) -> Result<Schedule> {
    if built == target {
        return Ok(s);
    }
    map_schedule(&s, built, &IsoMap::identity(target.node_count()), target)
}

/// Reduce-scatter on `graph_of(e)`, or on its transpose (same arc ids) when
/// `transposed` is set.
fn rs_on(e: &TopoExpr, transposed: bool) -> Result<(Digraph, Schedule)> {
    let g = graph_of(e)?;
    let target = if transposed { g.transpose() } else { g.clone() };
    let s = match e {
        TopoExpr::Base(b) => {
            let ann = b.annotations();
            let canonical = if ann.schedule_source == ScheduleSource::Canonical {
                b.canonical()?
            } else {
                None
            };
            match (canonical, transposed) {
                (Some((_, s)), false) => s,
                (Some((bg, s)), true) => {
                    if b.family == Family::CycleMesh && b.params[0] != b.params[1] {
                        reverse_schedule(&cycle_mesh_allgather(b.params[0], b.params[1])?)
                    } else if let Some(f) = find_skew_symmetry(&bg)? {
                        // f maps bg^T onto bg, so its inverse carries bg onto bg^T.
                        map_schedule(&s, &bg, &f.inverse(), &target)?
                    } else {
                        lp_schedule(&target)?.0
                    }
                }
                (None, _) => lp_schedule(&target)?.0,
            }
        }
        TopoExpr::Line(inner) => {
            let (h, s) = rs_on(inner, transposed)?;
            let l = line_graph(&h);
            let ls = line_expand_schedule(&h, &s)?;
            onto(&l, ls, &target)?
        }
        TopoExpr::Deg(inner, n) => {
            let (h, s) = rs_on(inner, transposed)?;
            let dg = degree_expand(&h, *n)?;
            let ds = degree_expand_schedule(&h, &s, *n)?;
            onto(&dg, ds, &target)?
        }
        TopoExpr::Pow(inner, n) => {
            let (h, s) = rs_on(inner, transposed)?;
            let pg = cartesian_power(&h, *n)?;
            let ps = power_rs(&h, &s, *n)?;
            onto(&pg, ps, &target)?
        }
        TopoExpr::Prod(_, _) => lp_schedule(&target)?.0,
        TopoExpr::Undir(inner) => {
            let (h, s) = rs_on(inner, transposed)?;
            let base = graph_of(inner)?;
            let f = skew_witness(inner, &base)?.ok_or(Error::NotSkewSymmetric)?;
            // On the transpose the witness runs the other way.
            let f = if transposed { f.inverse() } else { f };
            let (ug, us) = to_undirected(&h, &s, &f)?;
            onto(&ug, us, &target)?
        }
    };
    Ok((target, s))
}

#[derive(Clone, Debug)]
pub struct Materialized {
    pub graph: Digraph,
    pub schedule: Schedule,
    pub cost: CostVector,
}

pub fn reduce_scatter(e: &TopoExpr) -> Result<Materialized> {
    let (graph, schedule) = rs_on(e, false)?;
    let cost = measure_cost(&schedule, &graph)?;
    Ok(Materialized { graph, schedule, cost })
}

/// Allgather as the reverse of a reduce-scatter on the transpose.
pub fn allgather(e: &TopoExpr) -> Result<Materialized> {
    let (gt, s) = rs_on(e, true)?;
    let graph = gt.transpose().with_label(e.to_string());
    let schedule = reverse_schedule(&s).sorted();
    let cost = measure_cost(&schedule, &graph)?;
    Ok(Materialized { graph, schedule, cost })
}

pub fn materialize(e: &TopoExpr, kind: Collective) -> Result<Materialized> {
    match kind {
        Collective::ReduceScatter => reduce_scatter(e),
        Collective::Allgather => allgather(e),
    }
}

/// Reduce-scatter followed by allgather on the same topology.
pub fn allreduce(e: &TopoExpr) -> Result<(Materialized, Materialized)> {
    Ok((reduce_scatter(e)?, allgather(e)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, CostMode};
    use crate::expr::parse_expr;
    use crate::validate::validate;

    fn check(s: &str) {
        let e = parse_expr(s).unwrap();
        let a = analyze(&e, CostMode::Materialized).unwrap();
        for kind in [Collective::ReduceScatter, Collective::Allgather] {
            let m = materialize(&e, kind).unwrap();
            assert_eq!(m.graph, graph_of(&e).unwrap(), "{s}");
            assert!(validate(&m.schedule, &m.graph).unwrap().ok, "{s} {kind}");
            assert_eq!(m.cost.x, a.cost.x, "{s} {kind}");
            if a.exact {
                assert_eq!(m.cost.y, a.cost.y, "{s} {kind}");
            } else {
                assert!(m.cost.y <= a.cost.y, "{s} {kind}");
            }
        }
    }

    #[test]
    fn bases_and_expansions() {
        for s in [
            "Complete(4)",
            "CompleteBipartite(2)",
            "UniRing(2,3)",
            "BiRing(2,5)",
            "Diamond",
            "DBJMod(2,3)",
            "CycleMesh(2,3)",
            "L(CompleteBipartite(2))",
            "L(L(Complete(3)))",
            "Deg(UniRing(1,3),2)",
            "Pow(Complete(3),2)",
            "Pow(UniRing(1,3),2)",
            "Prod(UniRing(1,3),UniRing(1,4))",
            "Undir(UniRing(1,4))",
            "Undir(CompleteBipartite(2))",
            "L(Undir(UniRing(1,4)))",
            "Undir(L(Complete(3)))",
            "Undir(Deg(Complete(3),2))",
            "Undir(Pow(UniRing(1,3),2))",
            "L(DeBruijn(2,3))",
            "Deg(Diamond,2)",
        ] {
            check(s);
        }
    }
}
