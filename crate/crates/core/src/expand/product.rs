use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::rational::Q;
use crate::schedule::{reverse_schedule, Collective, Schedule, Transfer};

struct Layout {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    offsets: Vec<usize>,
    arc_counts: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new(factors: &[&Digraph]) -> Self {
        let sizes: Vec<usize> = factors.iter().map(|g| g.node_count()).collect();
        let mut strides = vec![1; sizes.len()];
        for a in (0..sizes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * sizes[a + 1];
        }
        let total: usize = sizes.iter().product();
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        let arc_counts: Vec<usize> = factors.iter().map(|g| g.arc_count()).collect();
        for (a, &e) in arc_counts.iter().enumerate() {
            offsets.push(acc);
            acc += (total / sizes[a].max(1)) * e;
        }
        Layout {
            sizes,
            strides,
            offsets,
            arc_counts,
            total,
        }
    }

    fn coords(&self, node: usize) -> Vec<usize> {
        (0..self.sizes.len())
            .map(|a| (node / self.strides[a]) % self.sizes[a])
            .collect()
    }

    fn node(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.strides).map(|(x, s)| x * s).sum()
    }

    /// Row-major index of `c` with axis `skip` removed.
    fn others(&self, c: &[usize], skip: usize) -> usize {
        let mut r = 0;
        for (a, &x) in c.iter().enumerate() {
            if a != skip {
                r = r * self.sizes[a] + x;
            }
        }
        r
    }

    fn arc_id(&self, c: &[usize], axis: usize, e: usize) -> usize {
        self.offsets[axis] + self.others(c, axis) * self.arc_counts[axis] + e
    }
}

/// Cartesian product with row-major nodes (first factor most significant).
/// Arcs of axis `k` come in one block; within it, arc `a` of factor `k` at
/// the `r`-th setting of the other coordinates has id `offset_k + r |E_k| + a`.
pub fn cartesian_product(factors: &[&Digraph]) -> Digraph {
    let lay = Layout::new(factors);
    let mut pairs = Vec::new();
    for (a, g) in factors.iter().enumerate() {
        let other_count = lay.total / lay.sizes[a].max(1);
        let mut c = vec![0; factors.len()];
        for r in 0..other_count {
            let mut rest = r;
            for b in (0..factors.len()).rev() {
                if b != a {
                    c[b] = rest % lay.sizes[b];
                    rest /= lay.sizes[b];
                }
            }
            for arc in g.arcs() {
                c[a] = arc.src;
                let s = lay.node(&c);
                c[a] = arc.dst;
                pairs.push((s, lay.node(&c)));
            }
        }
    }
    Digraph::new(lay.total, &pairs).expect("product endpoints are in range")
}

pub fn product_of(a: &Digraph, b: &Digraph) -> Digraph {
    let p = cartesian_product(&[a, b]);
    match (a.label(), b.label()) {
        (Some(x), Some(y)) => p.with_label(format!("Prod({x},{y})")),
        _ => p,
    }
}

pub fn cartesian_power(g: &Digraph, n: usize) -> Result<Digraph> {
    if n < 1 {
        return Err(Error::InvalidParam("power must be at least 1".into()));
    }
    let p = cartesian_product(&vec![g; n]);
    Ok(match g.label() {
        Some(x) => p.with_label(format!("Pow({x},{n})")),
        None => p,
    })
}

/// Allgather on `cartesian_power(g, n)` from an allgather on `g`. Shards are
/// split into `n` subshards; subshard `i` sweeps the axes in the order
/// `i, i+1, ..` (mod `n`), one base schedule per axis.
pub fn power_schedule(g: &Digraph, ag: &Schedule, n: usize) -> Result<Schedule> {
    if ag.kind != Collective::Allgather {
        return Err(Error::WrongKind { expected: "allgather" });
    }
    if n < 1 {
        return Err(Error::InvalidParam("power must be at least 1".into()));
    }
    ag.check_against(g)?;
    let factors = vec![g; n];
    let lay = Layout::new(&factors);
    let m = g.node_count();
    let width = Q::new(1, n as i128);
    let mut transfers = Vec::new();
    for i in 0..n {
        let sub = Q::new(i as i128, n as i128);
        for j in 0..n {
            let axis = (i + j) % n;
            let earlier: Vec<usize> = (0..j).map(|k| (i + k) % n).collect();
            let root_variants = m.pow(earlier.len() as u32);
            let dt = j as u32 * ag.t_max;
            for t in &ag.transfers {
                let arc = g.arc(t.arc);
                let chunk = t.chunk.affine(sub, width);
                for pos in 0..lay.total {
                    let mut c = lay.coords(pos);
                    if c[axis] != arc.src {
                        continue;
                    }
                    let id = lay.arc_id(&c, axis, t.arc);
                    c[axis] = t.root;
                    for x in 0..root_variants {
                        let mut rest = x;
                        for &b in &earlier {
                            c[b] = rest % m;
                            rest /= m;
                        }
                        transfers.push(Transfer::new(lay.node(&c), chunk.clone(), id, t.step + dt));
                    }
                }
            }
        }
    }
    Ok(Schedule::with_t_max(Collective::Allgather, transfers, ag.t_max * n as u32).sorted())
}

/// Reduce-scatter on `cartesian_power(g, n)`: the power allgather of the
/// reversed schedule on `transpose(g)`, reversed again. Arc ids line up
/// because the power of the transpose is the transpose of the power.
pub fn power_rs(g: &Digraph, rs: &Schedule, n: usize) -> Result<Schedule> {
    if rs.kind != Collective::ReduceScatter {
        return Err(Error::WrongKind {
            expected: "reduce-scatter",
        });
    }
    let gt = g.transpose();
    let ag = power_schedule(&gt, &reverse_schedule(rs), n)?;
    Ok(reverse_schedule(&ag).sorted())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::ChunkSet;
    use crate::cost::measure_cost;
    use crate::rational::q;
    use crate::validate::{check_bandwidth_optimal, validate};

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
    fn product_sizes_and_ids() {
        let (a, _) = complete(3);
        let (b, _) = ring(4);
        let p = cartesian_product(&[&a, &b]);
        assert_eq!(p.node_count(), 12);
        assert_eq!(p.arc_count(), 4 * 6 + 3 * 4);
        // Axis 0, other coordinate 0, arc 0 of K3 (0 -> 1).
        assert_eq!((p.arc(0).src, p.arc(0).dst), (0, 4));
        // Axis 1 block starts after 24 arcs: node (0,0) -> (0,1).
        assert_eq!((p.arc(24).src, p.arc(24).dst), (0, 1));
        assert_eq!(p.regular_degree(), Some(3));
    }

    #[test]
    fn power_of_transpose_is_transpose_of_power() {
        let (g, _) = ring(3);
        let a = cartesian_power(&g.transpose(), 3).unwrap();
        let b = cartesian_power(&g, 3).unwrap().transpose();
        assert_eq!(a, b);
    }

    #[test]
    fn k3_squared() {
        let (g, rs) = complete(3);
        let p = cartesian_power(&g, 2).unwrap();
        let s = power_rs(&g, &rs, 2).unwrap();
        assert!(validate(&s, &p).unwrap().ok);
        let c = measure_cost(&s, &p).unwrap();
        assert_eq!(c.x, 2);
        assert_eq!(c.y, q(8, 9));
        assert!(check_bandwidth_optimal(&s, &p).unwrap().optimal);
    }

    #[test]
    fn torus_3x3() {
        let (g, rs) = ring(3);
        let p = cartesian_power(&g, 2).unwrap();
        let s = power_rs(&g, &rs, 2).unwrap();
        assert!(validate(&s, &p).unwrap().ok);
        let c = measure_cost(&s, &p).unwrap();
        assert_eq!(c.x, 4);
        assert_eq!(c.y, q(8, 9));
        assert!(power_schedule(&g, &rs, 2).is_err());
    }

    #[test]
    fn cube_of_ring() {
        let (g, rs) = ring(2);
        let p = cartesian_power(&g, 3).unwrap();
        let s = power_rs(&g, &rs, 3).unwrap();
        assert!(validate(&s, &p).unwrap().ok);
        assert_eq!(measure_cost(&s, &p).unwrap().y, q(7, 8));
    }
}
