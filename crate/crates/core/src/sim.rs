//! Per-layer allreduce simulation over a training trace.

use crate::cost::CostVector;
use crate::error::{Error, Result};
use crate::pareto::{moore_latency, ParetoEntry};
use crate::rational::{q, to_f64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Layer {
    /// Seconds.
    pub ready: f64,
    pub bits: f64,
}

/// Layers sorted by ready time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayerTrace {
    layers: Vec<Layer>,
}

impl LayerTrace {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        for (i, l) in layers.iter().enumerate() {
            if !(l.bits > 0.0) || !l.ready.is_finite() || l.ready < 0.0 {
                return Err(Error::Format(format!("layer {i}: need size > 0 and ready >= 0")));
            }
            if i > 0 && l.ready < layers[i - 1].ready {
                return Err(Error::Format(format!("layer {i}: ready times must be non-decreasing")));
            }
        }
        Ok(LayerTrace { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub finish: Vec<f64>,
    pub durations: Vec<f64>,
    pub f_max: f64,
}

impl SimResult {
    pub fn avg_duration(&self) -> f64 {
        if self.durations.is_empty() {
            0.0
        } else {
            self.durations.iter().sum::<f64>() / self.durations.len() as f64
        }
    }
}

/// `f_i = max(f_{i-1}, r_i) + duration(M_i)` with `f_0 = 0`.
pub fn simulate_with(trace: &LayerTrace, duration: impl Fn(f64) -> f64) -> SimResult {
    let mut f = 0.0f64;
    let mut finish = Vec::with_capacity(trace.len());
    let mut durations = Vec::with_capacity(trace.len());
    for l in &trace.layers {
        let dur = duration(l.bits);
        f = f.max(l.ready) + dur;
        finish.push(f);
        durations.push(dur);
    }
    SimResult {
        f_max: finish.last().copied().unwrap_or(0.0),
        finish,
        durations,
    }
}

/// Allreduce of each layer takes `2 (alpha x + (M_i / B) y)`.
pub fn simulate(trace: &LayerTrace, cost: &CostVector, alpha: f64, bandwidth: f64) -> SimResult {
    let (x, y) = (cost.x as f64, to_f64(&cost.y));
    simulate_with(trace, |bits| 2.0 * (alpha * x + bits / bandwidth * y))
}

/// Allreduce with separate reduce-scatter and allgather costs.
pub fn simulate_allreduce(trace: &LayerTrace, rs: &CostVector, ag: &CostVector, alpha: f64, bandwidth: f64) -> SimResult {
    if rs == ag {
        return simulate(trace, rs, alpha, bandwidth);
    }
    let x = (rs.x + ag.x) as f64;
    let y = to_f64(&(rs.y + ag.y));
    simulate_with(trace, |bits| alpha * x + bits / bandwidth * y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub entry: String,
    pub f_max: f64,
    pub avg_layer: f64,
}

/// Each entry, then the ring and double-binary-tree allreduce and the
/// lower bound for `(n, d)`.
pub fn compare(
    trace: &LayerTrace,
    entries: &[ParetoEntry],
    n: u64,
    d: u64,
    alpha: f64,
    bandwidth: f64,
) -> Vec<CompareRow> {
    let row = |name: String, r: SimResult| CompareRow {
        entry: name,
        f_max: r.f_max,
        avg_layer: r.avg_duration(),
    };
    let mut rows: Vec<CompareRow> = entries
        .iter()
        .map(|e| {
            let r = simulate_allreduce(trace, &e.cost, &e.ag_cost, alpha, bandwidth);
            row(e.expr.to_string(), r)
        })
        .collect();
    let nf = n as f64;
    let ring = CostVector::new(n as u32 - 1, q(n as i128 - 1, n as i128));
    rows.push(row("ring".into(), simulate(trace, &ring, alpha, bandwidth)));
    let log = nf.log2();
    rows.push(row(
        "dbt".into(),
        simulate_with(trace, |bits| 2.0 * alpha * log + 4.0 * bits / bandwidth * log),
    ));
    let lb = CostVector::new(moore_latency(n, d), q(n as i128 - 1, n as i128));
    rows.push(row("lower-bound".into(), simulate(trace, &lb, alpha, bandwidth)));
    rows
}

pub const COMPARE_HEADER: &str = "entry\tf_max_ms\tavg_layer_ms";

pub fn compare_tsv(rows: &[CompareRow]) -> String {
    let mut out = vec![COMPARE_HEADER.to_string()];
    for r in rows {
        out.push(format!("{}\t{:.6}\t{:.6}", r.entry, r.f_max * 1e3, r.avg_layer * 1e3));
    }
    out.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn trace(v: &[(f64, f64)]) -> LayerTrace {
        LayerTrace::new(v.iter().map(|&(ready, bits)| Layer { ready, bits }).collect()).unwrap()
    }

    #[test]
    fn single_layer() {
        let c = CostVector::new(3, q(1, 2));
        let r = simulate(&trace(&[(0.0, 8e6)]), &c, 1e-5, 1e9);
        assert_eq!(r.f_max, 2.0 * (1e-5 * 3.0 + 8e6 / 1e9 * 0.5));
    }

    #[test]
    fn late_layer_does_not_queue() {
        let c = CostVector::new(1, qi(1));
        let r = simulate(&trace(&[(0.0, 1e3), (100.0, 1e3)]), &c, 1e-6, 1e9);
        assert_eq!(r.finish[1], 100.0 + r.durations[1]);
    }

    #[test]
    fn constant_layers_stack() {
        let n = 8u64;
        let ring = CostVector::new(n as u32 - 1, q(7, 8));
        let (alpha, bw, bits) = (1e-5, 1e11, 4e6);
        let k = 5;
        let r = simulate(&trace(&vec![(0.0, bits); k]), &ring, alpha, bw);
        let one = 2.0 * (alpha * 7.0 + bits / bw * 0.875);
        let mut expect = 0.0;
        for _ in 0..k {
            expect += one;
        }
        assert_eq!(r.f_max, expect);
    }

    #[test]
    fn empty_and_unsorted() {
        let r = simulate(&LayerTrace::default(), &CostVector::new(1, qi(1)), 1.0, 1.0);
        assert_eq!((r.f_max, r.avg_duration()), (0.0, 0.0));
        assert!(LayerTrace::new(vec![Layer { ready: 2.0, bits: 1.0 }, Layer { ready: 1.0, bits: 1.0 }]).is_err());
        assert!(LayerTrace::new(vec![Layer { ready: 0.0, bits: 0.0 }]).is_err());
    }

    #[test]
    fn lower_bound_row_is_smallest() {
        let t = trace(&[(0.0, 2e6), (1e-4, 8e6), (3e-4, 1e5)]);
        let rows = compare(&t, &[], 1024, 4, 1e-5, 1e11);
        let lb = rows.iter().find(|r| r.entry == "lower-bound").unwrap().f_max;
        assert!(rows.iter().all(|r| lb <= r.f_max));
        assert!(compare_tsv(&rows).starts_with(COMPARE_HEADER));
    }
}
