//! Exhaustive search over construction expressions for a target size and
//! degree, keeping only latency/bandwidth Pareto-optimal candidates.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::analysis::{analyze_base, analyze_collective, deg_rule, line_rule, pow_rule, prod_rule, undir_rule, Analysis, CostMode, Flags};
use crate::base::{BaseSpec, Family};
use crate::cost::{CostModel, CostVector};
use crate::error::{Error, Result};
use crate::expr::TopoExpr;
use crate::graph::moore_bound;
use crate::rational::{q, Q};
use crate::schedule::Collective;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: usize,
    pub max_power: usize,
    pub max_lines: usize,
    /// Largest LP-costed base (de Bruijn, generalized Kautz) used below the target.
    pub max_lp_base: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: 6,
            max_power: 4,
            max_lines: 6,
            max_lp_base: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub limits: Limits,
    pub mode: CostMode,
    /// Prune with `y <= 2(N-1)/N` for the generalized Kautz graph at the
    /// target instead of solving its LP; survivors are solved afterwards.
    pub fast: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            limits: Limits::default(),
            mode: CostMode::Table,
            fast: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Analytic,
    LpMeasured,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::LpMeasured => "lp-measured",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParetoEntry {
    pub expr: TopoExpr,
    pub n_nodes: u64,
    pub degree: u64,
    /// Reduce-scatter cost.
    pub cost: CostVector,
    /// Allgather cost; differs from `cost` only off skew-symmetric graphs.
    pub ag_cost: CostVector,
    pub provenance: Provenance,
    /// BiRing or generalized Kautz seeded at the target.
    pub fallback: bool,
    pub exact: bool,
    pub import_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollectiveKind {
    /// Reduce-scatter or allgather alone.
    RsAg,
    Allreduce,
}

#[derive(Clone)]
struct Cand {
    expr: TopoExpr,
    a: Analysis,
    lp: bool,
}

fn tie_key(e: &TopoExpr) -> (usize, String) {
    (e.depth(), e.to_string())
}

fn better(a: &Cand, b: &Cand) -> bool {
    tie_key(&a.expr) < tie_key(&b.expr)
}

/// Pareto frontier of `cands` in `(x, y)`, one representative per point.
fn frontier(cands: Vec<Cand>) -> Vec<Cand> {
    let mut by_point: HashMap<(u32, Q), Cand> = HashMap::new();
    for c in cands {
        let key = (c.a.cost.x, c.a.cost.y);
        match by_point.get(&key) {
            Some(old) if !better(&c, old) => {}
            _ => {
                by_point.insert(key, c);
            }
        }
    }
    let mut pts: Vec<Cand> = by_point.into_values().collect();
    pts.sort_by(|a, b| a.a.cost.x.cmp(&b.a.cost.x).then(a.a.cost.y.cmp(&b.a.cost.y)));
    let mut out: Vec<Cand> = Vec::new();
    for c in pts {
        if out.last().is_none_or(|l| c.a.cost.y < l.a.cost.y) {
            out.push(c);
        }
    }
    out
}

/// Separate frontiers for candidates whose flags differ, since later
/// expansions depend on them.
fn prune_by_class(cands: Vec<Cand>) -> Vec<Cand> {
    let mut classes: HashMap<Flags, Vec<Cand>> = HashMap::new();
    for c in cands {
        classes.entry(c.a.flags).or_default().push(c);
    }
    let mut out: Vec<Cand> = classes.into_values().flat_map(frontier).collect();
    out.sort_by(|a, b| {
        a.a.cost
            .x
            .cmp(&b.a.cost.x)
            .then(a.a.cost.y.cmp(&b.a.cost.y))
            .then_with(|| tie_key(&a.expr).cmp(&tie_key(&b.expr)))
    });
    out
}

fn integer_root(n: u64, k: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r >= 2 && r.checked_pow(k) == Some(n))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..).take_while(|i| i * i <= n).filter(|i| n.is_multiple_of(*i)).collect();
    let hi: Vec<u64> = v.iter().rev().map(|i| n / i).filter(|j| j * j != n).collect();
    v.extend(hi);
    v
}

struct Search {
    opts: SearchOptions,
    memo: HashMap<(u64, u64, usize), Vec<Cand>>,
}

impl Search {
    fn base(&self, family: Family, params: Vec<usize>, out: &mut Vec<Cand>) {
        let Ok(spec) = BaseSpec::new(family, params) else {
            return;
        };
        let lp = matches!(spec.annotations().y, crate::base::Bandwidth::ByLp);
        if let Ok(a) = analyze_base(&spec, self.opts.mode) {
            out.push(Cand {
                expr: TopoExpr::Base(spec),
                a,
                lp,
            });
        }
    }

    fn bases(&self, n: u64, d: u64) -> Vec<Cand> {
        let mut out = Vec::new();
        let (nu, du) = (n as usize, d as usize);
        if n < 2 || d < 1 {
            return out;
        }
        if d + 1 == n {
            self.base(Family::Complete, vec![nu], &mut out);
        }
        if n == 2 * d {
            self.base(Family::CompleteBipartite, vec![du], &mut out);
        }
        if n == d + 2 {
            self.base(Family::Circulant, vec![nu, du], &mut out);
        }
        self.base(Family::UniRing, vec![du, nu], &mut out);
        if d.is_multiple_of(2) && n >= 3 {
            self.base(Family::BiRing, vec![du, nu], &mut out);
        }
        if nu <= self.opts.limits.max_lp_base {
            if d >= 2 {
                let mut p = d;
                let mut k = 1;
                while p < n {
                    p *= d;
                    k += 1;
                }
                if p == n {
                    self.base(Family::DeBruijn, vec![du, k], &mut out);
                }
            }
            if n > d {
                self.base(Family::GenKautz, vec![du, nu], &mut out);
            }
            if d == 2 {
                for r in 2..nu {
                    let c = nu / r;
                    if r * c == nu && r < c {
                        self.base(Family::CycleMesh, vec![r, c], &mut out);
                    }
                }
            }
        }
        for (bd, bn) in [(2usize, 3usize), (2, 4), (3, 2), (4, 2)] {
            if bd == du && bd.pow(bn as u32) == nu {
                self.base(Family::DBJMod, vec![bd, bn], &mut out);
            }
        }
        if (n, d) == (8, 2) {
            self.base(Family::Diamond, vec![], &mut out);
        }
        out
    }

    fn gen(&mut self, n: u64, d: u64, depth: usize) -> Vec<Cand> {
        if let Some(v) = self.memo.get(&(n, d, depth)) {
            return v.clone();
        }
        let mut out = self.bases(n, d);
        if depth > 0 {
            let lim = self.opts.limits;
            if d >= 2 && n.is_multiple_of(d) && n / d >= 2 {
                for c in self.gen(n / d, d, depth - 1) {
                    if c.expr.line_count() < lim.max_lines {
                        out.push(Cand {
                            a: line_rule(&c.a),
                            expr: c.expr.line(),
                            lp: c.lp,
                        });
                    }
                }
            }
            for k in 2..=d {
                if !d.is_multiple_of(k) || !n.is_multiple_of(k) || n / k < 2 {
                    continue;
                }
                for c in self.gen(n / k, d / k, depth - 1) {
                    if let Ok(a) = deg_rule(&c.a, k as usize) {
                        out.push(Cand {
                            a,
                            expr: c.expr.deg(k as usize),
                            lp: c.lp,
                        });
                    }
                }
            }
            for k in 2..=lim.max_power as u64 {
                if !d.is_multiple_of(k) {
                    continue;
                }
                let Some(r) = integer_root(n, k as u32) else {
                    continue;
                };
                for c in self.gen(r, d / k, depth - 1) {
                    if let Ok(a) = pow_rule(&c.a, k as usize) {
                        out.push(Cand {
                            a,
                            expr: c.expr.pow(k as usize),
                            lp: c.lp,
                        });
                    }
                }
            }
            for n1 in divisors(n) {
                let n2 = n / n1;
                if n1 < 2 || n2 < 2 || n1 > n2 {
                    continue;
                }
                for d1 in 1..d {
                    let d2 = d - d1;
                    if n1 == n2 && d1 > d2 {
                        continue;
                    }
                    let left = self.best_product_operand(n1, d1, depth - 1);
                    let right = self.best_product_operand(n2, d2, depth - 1);
                    if let (Some(l), Some(r)) = (left, right) {
                        if let Some(a) = prod_rule(&l.a, &r.a) {
                            out.push(Cand {
                                a,
                                expr: l.expr.prod(r.expr),
                                lp: l.lp || r.lp,
                            });
                        }
                    }
                }
            }
            if d.is_multiple_of(2) {
                for c in self.gen(n, d / 2, depth - 1) {
                    if let Ok(a) = undir_rule(&c.a) {
                        out.push(Cand {
                            a,
                            expr: c.expr.undir(),
                            lp: c.lp,
                        });
                    }
                }
            }
        }
        let out = prune_by_class(out);
        self.memo.insert((n, d, depth), out.clone());
        out
    }

    /// Lowest-latency simple bandwidth-optimal shortest-path candidate.
    fn best_product_operand(&mut self, n: u64, d: u64, depth: usize) -> Option<Cand> {
        self.gen(n, d, depth)
            .into_iter()
            .filter(|c| c.a.flags.sp_opt && c.a.flags.bw_opt && c.a.flags.simple())
            .min_by(|a, b| {
                a.a.cost
                    .x
                    .cmp(&b.a.cost.x)
                    .then_with(|| tie_key(&a.expr).cmp(&tie_key(&b.expr)))
            })
    }
}

fn is_fallback(e: &TopoExpr, n: u64, d: u64) -> bool {
    match e {
        TopoExpr::Base(b) => {
            matches!(b.family, Family::BiRing | Family::GenKautz) && b.size() as u64 == n && b.degree() as u64 == d
        }
        _ => false,
    }
}

fn fallbacks(n: u64, d: u64, opts: &SearchOptions) -> Result<Vec<Cand>> {
    let mut out = Vec::new();
    if d.is_multiple_of(2) && n >= 3 {
        let spec = BaseSpec::new(Family::BiRing, vec![d as usize, n as usize])?;
        out.push(Cand {
            a: analyze_base(&spec, opts.mode)?,
            expr: TopoExpr::Base(spec),
            lp: false,
        });
    }
    if n > d && (d >= 2 || n == 2) {
        let spec = BaseSpec::new(Family::GenKautz, vec![d as usize, n as usize])?;
        let a = if opts.fast && n as usize > opts.limits.max_lp_base {
            placeholder_gen_kautz(&spec)?
        } else {
            analyze_base(&spec, opts.mode)?
        };
        out.push(Cand {
            a,
            expr: TopoExpr::Base(spec),
            lp: true,
        });
    }
    Ok(out)
}

/// Diameter with the bandwidth bound `2(N-1)/N`; marked inexact.
fn placeholder_gen_kautz(spec: &BaseSpec) -> Result<Analysis> {
    let g = spec.graph()?;
    let n = g.node_count() as u64;
    Ok(Analysis {
        n,
        d: spec.degree() as u64,
        cost: CostVector::new(g.diameter()?, q(2 * (n as i128 - 1), n as i128)),
        exact: false,
        import_only: false,
        flags: Flags {
            skew: true,
            sp_opt: true,
            multi_in: true,
            ..Flags::default()
        },
    })
}

/// Pareto frontier of expressions whose size and degree equal the target.
pub fn enumerate(n: u64, d: u64, opts: &SearchOptions) -> Result<Vec<ParetoEntry>> {
    if n < 2 || d < 1 {
        return Err(Error::InvalidParam(format!("target needs N >= 2 and d >= 1, got ({n},{d})")));
    }
    let mut s = Search {
        opts: *opts,
        memo: HashMap::new(),
    };
    let mut cands = s.gen(n, d, opts.limits.max_depth);
    cands.extend(fallbacks(n, d, opts)?);
    let mut front = frontier(cands);
    if front.iter().any(|c| !c.a.exact && is_fallback(&c.expr, n, d) && c.lp) {
        let exact_opts = SearchOptions { fast: false, ..*opts };
        for c in front.iter_mut() {
            if let TopoExpr::Base(b) = &c.expr {
                if b.family == Family::GenKautz && !c.a.exact {
                    c.a = analyze_base(b, exact_opts.mode)?;
                }
            }
        }
        front = frontier(front);
    }
    front
        .into_iter()
        .map(|c| {
            let ag_cost = if c.a.flags.skew {
                c.a.cost
            } else {
                analyze_collective(&c.expr, opts.mode, Collective::Allgather)?.cost
            };
            Ok(ParetoEntry {
                fallback: is_fallback(&c.expr, n, d),
                n_nodes: c.a.n,
                degree: c.a.d,
                cost: c.a.cost,
                ag_cost,
                provenance: if c.lp { Provenance::LpMeasured } else { Provenance::Analytic },
                exact: c.a.exact,
                import_only: c.a.import_only,
                expr: c.expr,
            })
        })
        .collect()
}

/// Seconds for one entry; allreduce runs its reduce-scatter then its allgather.
pub fn entry_runtime(e: &ParetoEntry, cm: &CostModel, kind: CollectiveKind) -> f64 {
    match kind {
        CollectiveKind::RsAg => e.cost.runtime(cm),
        CollectiveKind::Allreduce => e.cost.runtime(cm) + e.ag_cost.runtime(cm),
    }
}

/// Seconds for a cost shared by both halves of an allreduce.
pub fn runtime(cost: &CostVector, cm: &CostModel, kind: CollectiveKind) -> f64 {
    let t = cost.runtime(cm);
    match kind {
        CollectiveKind::RsAg => t,
        CollectiveKind::Allreduce => 2.0 * t,
    }
}

fn cmp_entries(a: &ParetoEntry, b: &ParetoEntry, cm: &CostModel, kind: CollectiveKind) -> Ordering {
    entry_runtime(a, cm, kind)
        .total_cmp(&entry_runtime(b, cm, kind))
        .then(a.cost.x.cmp(&b.cost.x))
        .then_with(|| a.expr.to_string().cmp(&b.expr.to_string()))
}

/// Entry with the smallest runtime and that runtime in seconds.
pub fn best_for<'a>(
    entries: &'a [ParetoEntry],
    cm: &CostModel,
    kind: CollectiveKind,
) -> Option<(&'a ParetoEntry, f64)> {
    entries
        .iter()
        .min_by(|a, b| cmp_entries(a, b, cm, kind))
        .map(|e| (e, entry_runtime(e, cm, kind)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound {
    pub x: u32,
    pub y: Q,
    pub runtime: f64,
}

/// Smallest `k` with `N <= M_{d,k}`.
pub fn moore_latency(n: u64, d: u64) -> u32 {
    (0..).find(|&k| moore_bound(d, k) >= n as u128).unwrap()
}

pub fn theoretical_lower_bound(n: u64, d: u64, cm: &CostModel) -> LowerBound {
    let x = moore_latency(n, d);
    let y = q(n as i128 - 1, n as i128);
    LowerBound {
        x,
        y,
        runtime: CostVector::new(x, y).runtime(cm),
    }
}

/// Allreduce runtimes of the ring and double-binary-tree algorithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Baselines {
    pub ring: f64,
    pub dbt: f64,
}

pub fn baseline_costs(n: u64, cm: &CostModel) -> Baselines {
    let nf = n as f64;
    let m_b = cm.m_over_b();
    let log = nf.log2();
    Baselines {
        ring: 2.0 * cm.alpha * (nf - 1.0) + 2.0 * (nf - 1.0) * cm.model_bits / (nf * cm.bandwidth),
        dbt: 2.0 * cm.alpha * log + 4.0 * m_b * log,
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: u64,
    pub best: Option<(ParetoEntry, f64)>,
    pub lower_bound: LowerBound,
    pub baselines: Baselines,
}

pub fn sweep(
    range: std::ops::RangeInclusive<u64>,
    d: u64,
    cm: &CostModel,
    kind: CollectiveKind,
    opts: &SearchOptions,
) -> Result<Vec<SweepRow>> {
    range
        .filter(|&n| n >= 2)
        .map(|n| {
            let entries = enumerate(n, d, opts)?;
            Ok(SweepRow {
                n,
                best: best_for(&entries, cm, kind).map(|(e, t)| (e.clone(), t)),
                lower_bound: theoretical_lower_bound(n, d, cm),
                baselines: baseline_costs(n, cm),
            })
        })
        .collect()
}

pub const TSV_HEADER: &str = "expr\tN\td\tx\ty\truntime_ms";

fn tsv_line(expr: &str, n: u64, d: u64, x: u32, y: f64, secs: f64) -> String {
    format!("{expr}\t{n}\t{d}\t{x}\t{y:.6}\t{:.3}", secs * 1e3)
}

/// Frontier rows, then `@best`, `@lower-bound`, `@ring` and `@dbt` rows.
/// Baseline rows carry their allreduce closed forms as `x`, `y`.
pub fn pareto_tsv(n: u64, d: u64, entries: &[ParetoEntry], cm: &CostModel, kind: CollectiveKind) -> String {
    let mut out = vec![TSV_HEADER.to_string()];
    for e in entries {
        out.push(tsv_line(
            &e.expr.to_string(),
            n,
            d,
            e.cost.x,
            crate::rational::to_f64(&e.cost.y),
            entry_runtime(e, cm, kind),
        ));
    }
    if let Some((e, t)) = best_for(entries, cm, kind) {
        out.push(tsv_line(
            &format!("@best {}", e.expr),
            n,
            d,
            e.cost.x,
            crate::rational::to_f64(&e.cost.y),
            t,
        ));
    }
    let lb = theoretical_lower_bound(n, d, cm);
    let lb_cost = CostVector::new(lb.x, lb.y);
    out.push(tsv_line(
        "@lower-bound",
        n,
        d,
        lb.x,
        crate::rational::to_f64(&lb.y),
        runtime(&lb_cost, cm, kind),
    ));
    let b = baseline_costs(n, cm);
    let nf = n as f64;
    out.push(tsv_line("@ring", n, d, 2 * (n as u32 - 1), 2.0 * (nf - 1.0) / nf, b.ring));
    let log = nf.log2();
    out.push(tsv_line("@dbt", n, d, (2.0 * log).ceil() as u32, 4.0 * log, b.dbt));
    out.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::rational::to_f64;

    fn points(v: &[ParetoEntry]) -> Vec<(u32, String)> {
        v.iter()
            .map(|e| (e.cost.x, format!("{:.3}", to_f64(&e.cost.y))))
            .collect()
    }

    #[test]
    fn six_by_two_contains_line_of_triangle() {
        let v = enumerate(6, 2, &SearchOptions::default()).unwrap();
        assert!(!v.is_empty());
        for a in &v {
            for b in &v {
                assert!(!a.cost.dominates(&b.cost));
            }
        }
        // L(K3) measures (2, 1); the Moore-optimal x=2 point is on the frontier.
        assert_eq!(v[0].cost.x, 2);
        let lk3 = crate::analysis::analyze(&parse_expr("L(Complete(3))").unwrap(), CostMode::Table).unwrap();
        assert!(v.iter().any(|e| e.cost.x == 2 && e.cost.y <= lk3.cost.y));
    }

    #[test]
    fn primes_leave_only_fallbacks() {
        let v = enumerate(13, 4, &SearchOptions::default()).unwrap();
        assert!(v.iter().all(|e| e.fallback || matches!(e.expr, TopoExpr::Base(_))));
        assert!(v.iter().any(|e| e.fallback));
    }

    #[test]
    fn small_targets() {
        let v = enumerate(64, 4, &SearchOptions::default()).unwrap();
        let p = points(&v);
        assert_eq!(p[0].0, 3);
        assert!(v.iter().any(|e| e.cost.y == q(63, 64)));
    }

    #[test]
    fn lower_bound_and_baselines() {
        let cm = CostModel::reference();
        let lb = theoretical_lower_bound(1024, 4, &cm);
        assert_eq!(lb.x, 5);
        assert!((lb.runtime * 1e3 - 8.430).abs() < 1e-3);
        assert_eq!(theoretical_lower_bound(5, 4, &cm).x, 1);
        assert_eq!(theoretical_lower_bound(8, 2, &cm).x, 3);
        let b = baseline_costs(2, &cm);
        assert_eq!(b.ring, 2.0 * cm.alpha + cm.m_over_b());
        let b = baseline_costs(1024, &cm);
        assert!((b.ring * 1e3 - 37.22).abs() < 0.01);
        assert_eq!(b.dbt, 2.0 * cm.alpha * 10.0 + 40.0 * cm.m_over_b());
    }

    #[test]
    fn best_for_limits() {
        let v = enumerate(64, 4, &SearchOptions::default()).unwrap();
        let bw = CostModel::new(1e-12, 1e11, 1e9).unwrap();
        let (e, _) = best_for(&v, &bw, CollectiveKind::RsAg).unwrap();
        assert_eq!(e.cost.y, v.iter().map(|e| e.cost.y).min().unwrap());
        let lat = CostModel::new(1.0, 1e11, 1.0).unwrap();
        let (e, _) = best_for(&v, &lat, CollectiveKind::RsAg).unwrap();
        assert_eq!(e.cost.x, v[0].cost.x);
    }

    #[test]
    fn roots_and_divisors() {
        assert_eq!(integer_root(1024, 2), Some(32));
        assert_eq!(integer_root(1024, 5), Some(4));
        assert_eq!(integer_root(1000, 2), None);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(16), vec![1, 2, 4, 8, 16]);
    }
}
