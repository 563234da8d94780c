//! Alpha-beta cost evaluation. Bandwidth terms are kept as the exact
//! coefficient `y` of `M/B`.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rational::{format_q, qi, to_f64, Q};
use crate::schedule::Schedule;

/// Seconds, bits per second, bits.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct CostModel {
    pub alpha: f64,
    pub bandwidth: f64,
    pub model_bits: f64,
}

pub const MIB: f64 = 1024.0 * 1024.0;

impl CostModel {
    pub fn new(alpha: f64, bandwidth: f64, model_bits: f64) -> Result<Self> {
        if !(alpha > 0.0 && bandwidth > 0.0 && model_bits > 0.0) {
            return Err(Error::InvalidParam("cost model values must be positive".into()));
        }
        Ok(CostModel {
            alpha,
            bandwidth,
            model_bits,
        })
    }

    /// 10 us, 100 Gbps, 100 MiB.
    pub fn reference() -> Self {
        CostModel {
            alpha: 10e-6,
            bandwidth: 100e9,
            model_bits: 100.0 * MIB * 8.0,
        }
    }

    /// `M / B` in seconds.
    pub fn m_over_b(&self) -> f64 {
        self.model_bits / self.bandwidth
    }
}

/// `x` comm steps and bandwidth coefficient `y`: runtime `alpha x + (M/B) y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CostVector {
    pub x: u32,
    pub y: Q,
}

impl CostVector {
    pub fn new(x: u32, y: Q) -> Self {
        CostVector { x, y }
    }

    pub fn latency(&self, cm: &CostModel) -> f64 {
        cm.alpha * self.x as f64
    }

    pub fn bandwidth_time(&self, cm: &CostModel) -> f64 {
        cm.m_over_b() * to_f64(&self.y)
    }

    pub fn runtime(&self, cm: &CostModel) -> f64 {
        self.latency(cm) + self.bandwidth_time(cm)
    }

    /// Weakly better in both coordinates and strictly in one.
    pub fn dominates(&self, other: &CostVector) -> bool {
        self.x <= other.x && self.y <= other.y && (self.x < other.x || self.y < other.y)
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, y={})", self.x, format_q(&self.y))
    }
}

/// Per-step bandwidth coefficients; `total` is their sum.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BandwidthProfile {
    pub per_step: Vec<Q>,
    pub max_arc_load: Vec<Q>,
    pub total: Q,
}

/// Sum of chunk measures per arc at each step (shard units).
pub fn arc_loads(s: &Schedule, g: &Digraph) -> Result<Vec<Vec<Q>>> {
    let mut loads = vec![vec![Q::zero(); g.arc_count()]; s.t_max as usize];
    for t in &s.transfers {
        if t.arc >= g.arc_count() {
            return Err(Error::UnknownArc(t.arc));
        }
        if t.step == 0 || t.step > s.t_max {
            return Err(Error::StepOutOfRange {
                step: t.step,
                t_max: s.t_max,
            });
        }
        loads[t.step as usize - 1][t.arc] += t.chunk.measure();
    }
    Ok(loads)
}

/// Each step costs `(d/N) max_arc load` in units of `M/B`.
pub fn bandwidth_profile(s: &Schedule, g: &Digraph) -> Result<BandwidthProfile> {
    let d = g.regular_degree().ok_or(Error::Irregular)?;
    let scale = qi(d as i128) / qi(g.node_count() as i128);
    let loads = arc_loads(s, g)?;
    let max_arc_load: Vec<Q> = loads
        .iter()
        .map(|l| l.iter().copied().max().unwrap_or_else(Q::zero))
        .collect();
    let per_step: Vec<Q> = max_arc_load.iter().map(|m| *m * scale).collect();
    let total = per_step.iter().fold(Q::zero(), |a, b| a + b);
    Ok(BandwidthProfile {
        per_step,
        max_arc_load,
        total,
    })
}

pub fn measure_cost(s: &Schedule, g: &Digraph) -> Result<CostVector> {
    Ok(CostVector::new(s.t_max, bandwidth_profile(s, g)?.total))
}

/// `t_max * alpha`.
pub fn latency_t_l(s: &Schedule, cm: &CostModel) -> f64 {
    s.t_max as f64 * cm.alpha
}

/// Total bandwidth time and its per-step breakdown, in seconds.
pub fn bandwidth_t_b(s: &Schedule, g: &Digraph, cm: &CostModel) -> Result<(f64, Vec<f64>)> {
    let p = bandwidth_profile(s, g)?;
    let steps = p.per_step.iter().map(|y| cm.m_over_b() * to_f64(y)).collect();
    Ok((cm.m_over_b() * to_f64(&p.total), steps))
}
