//! Closed-form cost composition over construction expressions.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::base::{Bandwidth, BaseSpec, Latency, ScheduleSource};
use crate::cost::{measure_cost, CostVector};
use crate::error::{Error, Result};
use crate::expr::TopoExpr;
use crate::graph::Digraph;
use crate::lp::sp::lp_cost;
use crate::rational::{q, Q};
use crate::schedule::Collective;

/// Where base costs come from. `Table` uses the catalog annotations, so
/// import-only bases count with their published costs; `Materialized`
/// uses exactly what `materialize` can build.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CostMode {
    Table,
    Materialized,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Flags {
    pub self_loops: bool,
    pub parallel: bool,
    pub two_cycles: bool,
    pub skew: bool,
    /// The schedule is an optimal shortest-path schedule.
    pub sp_opt: bool,
    pub bw_opt: bool,
    /// Every node has at least two distinct in-neighbours.
    pub multi_in: bool,
}

impl Flags {
    pub fn simple(&self) -> bool {
        !self.self_loops && !self.parallel
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Analysis {
    pub n: u64,
    pub d: u64,
    pub cost: CostVector,
    /// Every rule used holds with equality, so materializing reproduces `cost`.
    pub exact: bool,
    /// Some base contributed a cost only an imported schedule attains.
    pub import_only: bool,
    pub flags: Flags,
}

fn optimal_y(n: u64) -> Q {
    q(n as i128 - 1, n as i128)
}

fn graph_flags(g: &Digraph) -> Flags {
    let multi_in = (0..g.node_count()).all(|u| {
        let mut srcs: Vec<usize> = g.in_arcs(u).iter().map(|&a| g.arc(a).src).collect();
        srcs.sort_unstable();
        srcs.dedup();
        srcs.len() > 1
    });
    Flags {
        self_loops: g.has_self_loops(),
        parallel: g.has_parallel_arcs(),
        two_cycles: g.two_cycle_count() > 0,
        multi_in,
        ..Flags::default()
    }
}

type BaseKey = (BaseSpec, CostMode, bool);

fn base_cache() -> &'static Mutex<HashMap<BaseKey, Analysis>> {
    static CACHE: OnceLock<Mutex<HashMap<BaseKey, Analysis>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn analyze_base(b: &BaseSpec, mode: CostMode) -> Result<Analysis> {
    analyze_base_on(b, mode, false)
}

/// Base analysis on the graph, or on its transpose when `transposed` is set.
fn analyze_base_on(b: &BaseSpec, mode: CostMode, transposed: bool) -> Result<Analysis> {
    let key = (b.clone(), mode, transposed);
    if let Some(a) = base_cache().lock().unwrap().get(&key) {
        return Ok(a.clone());
    }
    let a = if transposed {
        let forward = analyze_base_on(b, mode, false)?;
        if forward.flags.skew {
            forward
        } else {
            compute_base(b, mode, true)?
        }
    } else {
        compute_base(b, mode, false)?
    };
    base_cache().lock().unwrap().insert(key, a.clone());
    Ok(a)
}

fn compute_base(b: &BaseSpec, mode: CostMode, transposed: bool) -> Result<Analysis> {
    let ann = b.annotations();
    let g = if transposed { b.graph()?.transpose() } else { b.graph()? };
    let mut flags = graph_flags(&g);
    flags.skew = ann.skew_symmetric;
    let n = g.node_count() as u64;
    let d = g.regular_degree().ok_or(Error::Irregular)? as u64;
    let use_table = mode == CostMode::Table || ann.schedule_source != ScheduleSource::ImportOnly;
    let (cost, import_only) = if use_table {
        let x = match ann.x {
            Latency::Exact(x) => Some(x),
            Latency::ByBfs => None,
        };
        let y = match ann.y {
            Bandwidth::Exact(y) => Some(y),
            _ => None,
        };
        let cost = match (x, y, &ann.y) {
            (Some(x), Some(y), _) => CostVector::new(x, y),
            (_, _, Bandwidth::Measured) => {
                let (g, s) = b.canonical()?.ok_or(Error::InvalidParam(format!("{b} has no schedule")))?;
                measure_cost(&s, &g)?
            }
            (x, y, _) => {
                let c = lp_cost(&g)?;
                CostVector::new(x.unwrap_or(c.x), y.unwrap_or(c.y))
            }
        };
        (cost, ann.schedule_source == ScheduleSource::ImportOnly)
    } else {
        (lp_cost(&g)?, false)
    };
    flags.bw_opt = cost.y == optimal_y(n);
    flags.sp_opt = match ann.schedule_source {
        ScheduleSource::Lp => true,
        ScheduleSource::ImportOnly => !import_only,
        ScheduleSource::Canonical => ann.shortest_path && flags.bw_opt,
    };
    Ok(Analysis {
        n,
        d,
        cost,
        exact: !import_only,
        import_only,
        flags,
    })
}

/// Closed-form cost of the reduce-scatter built for `e`. Products of
/// operands that are not simple bandwidth-optimal shortest-path schedules
/// fall back to solving the LP on the product graph.
pub fn analyze(e: &TopoExpr, mode: CostMode) -> Result<Analysis> {
    analyze_on(e, mode, false)
}

/// Cost of the given collective built for `e`. An allgather is the reverse
/// of a reduce-scatter on the transpose, so it is analyzed there.
pub fn analyze_collective(e: &TopoExpr, mode: CostMode, kind: Collective) -> Result<Analysis> {
    analyze_on(e, mode, kind == Collective::Allgather)
}

fn analyze_on(e: &TopoExpr, mode: CostMode, transposed: bool) -> Result<Analysis> {
    let rec = |x: &TopoExpr| analyze_on(x, mode, transposed);
    match e {
        TopoExpr::Base(b) => analyze_base_on(b, mode, transposed),
        TopoExpr::Line(inner) => Ok(line_rule(&rec(inner)?)),
        TopoExpr::Deg(inner, k) => deg_rule(&rec(inner)?, *k),
        TopoExpr::Pow(inner, k) => pow_rule(&rec(inner)?, *k),
        TopoExpr::Prod(a, b) => {
            let (a1, b1) = (rec(a)?, rec(b)?);
            match prod_rule(&a1, &b1) {
                Some(r) => Ok(r),
                None => {
                    let g = crate::materialize::graph_of(e)?;
                    let g = if transposed { g.transpose() } else { g };
                    let c = lp_cost(&g)?;
                    let mut flags = graph_flags(&g);
                    flags.skew = a1.flags.skew && b1.flags.skew;
                    flags.sp_opt = true;
                    flags.bw_opt = c.y == optimal_y(a1.n * b1.n);
                    Ok(Analysis {
                        n: a1.n * b1.n,
                        d: a1.d + b1.d,
                        cost: c,
                        exact: true,
                        import_only: false,
                        flags,
                    })
                }
            }
        }
        TopoExpr::Undir(inner) => undir_rule(&rec(inner)?),
    }
}

/// One more step and `1/N` more bandwidth; equality needs an optimal
/// shortest-path operand whose nodes all have two or more in-neighbours.
pub fn line_rule(a: &Analysis) -> Analysis {
    let equality = a.flags.sp_opt && a.flags.multi_in;
    Analysis {
        n: a.n * a.d,
        d: a.d,
        cost: CostVector::new(a.cost.x + 1, a.cost.y + q(1, a.n as i128)),
        exact: a.exact && equality,
        import_only: a.import_only,
        flags: Flags {
            self_loops: a.flags.self_loops,
            parallel: false,
            two_cycles: a.flags.two_cycles,
            skew: a.flags.skew,
            sp_opt: equality,
            bw_opt: false,
            multi_in: a.d > 1,
        },
    }
}

pub fn deg_rule(a: &Analysis, k: usize) -> Result<Analysis> {
    if a.flags.self_loops {
        return Err(Error::SelfLoops);
    }
    if k < 1 {
        return Err(Error::InvalidParam("degree expansion factor must be at least 1".into()));
    }
    let k64 = k as u64;
    Ok(Analysis {
        n: a.n * k64,
        d: a.d * k64,
        cost: CostVector::new(a.cost.x + 1, a.cost.y + q(k as i128 - 1, k as i128 * a.n as i128)),
        exact: a.exact,
        import_only: a.import_only,
        flags: Flags {
            self_loops: false,
            parallel: a.flags.parallel,
            two_cycles: a.flags.two_cycles,
            skew: a.flags.skew,
            sp_opt: false,
            bw_opt: a.flags.bw_opt,
            multi_in: k >= 2 || a.flags.multi_in,
        },
    })
}

pub fn pow_rule(a: &Analysis, k: usize) -> Result<Analysis> {
    if k < 1 {
        return Err(Error::InvalidParam("power must be at least 1".into()));
    }
    let n = a.n as i128;
    let nk = n.checked_pow(k as u32).ok_or(Error::InvalidParam("power too large".into()))?;
    let y = a.cost.y * q(n, n - 1) * q(nk - 1, nk);
    Ok(Analysis {
        n: nk as u64,
        d: a.d * k as u64,
        cost: CostVector::new(a.cost.x * k as u32, y),
        exact: a.exact,
        import_only: a.import_only,
        flags: Flags {
            sp_opt: a.flags.sp_opt && a.flags.bw_opt && a.flags.simple(),
            multi_in: k >= 2 || a.flags.multi_in,
            ..a.flags
        },
    })
}

/// Latencies add and the product is bandwidth optimal, provided both
/// operands are simple with bandwidth-optimal shortest-path schedules.
pub fn prod_rule(a: &Analysis, b: &Analysis) -> Option<Analysis> {
    let ok = |x: &Analysis| x.flags.sp_opt && x.flags.bw_opt && x.flags.simple() && x.n >= 2;
    if !ok(a) || !ok(b) {
        return None;
    }
    let n = a.n * b.n;
    Some(Analysis {
        n,
        d: a.d + b.d,
        cost: CostVector::new(a.cost.x + b.cost.x, optimal_y(n)),
        exact: a.exact && b.exact,
        import_only: a.import_only || b.import_only,
        flags: Flags {
            self_loops: false,
            parallel: false,
            two_cycles: a.flags.two_cycles || b.flags.two_cycles,
            skew: a.flags.skew && b.flags.skew,
            sp_opt: true,
            bw_opt: true,
            multi_in: true,
        },
    })
}

pub fn undir_rule(a: &Analysis) -> Result<Analysis> {
    if !a.flags.skew {
        return Err(Error::NotSkewSymmetric);
    }
    Ok(Analysis {
        n: a.n,
        d: 2 * a.d,
        cost: a.cost,
        exact: a.exact,
        import_only: a.import_only,
        flags: Flags {
            self_loops: a.flags.self_loops,
            parallel: a.flags.parallel || a.flags.two_cycles || a.flags.self_loops,
            two_cycles: true,
            skew: true,
            sp_opt: false,
            bw_opt: a.flags.bw_opt,
            multi_in: a.flags.multi_in || a.n >= 3,
        },
    })
}
