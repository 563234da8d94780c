//! LP-format writer for the linearized topology-synthesis MILP: choose
//! `d`-regular links `x_ij` maximizing the uniform all-to-all demand `k`.

use std::fmt::Write;

use crate::error::{Error, Result};

/// Variable and row counts of the model for `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MilpCounts {
    pub x: usize,
    pub f: usize,
    pub z: usize,
    pub k: usize,
    pub capacity_rows: usize,
    pub degree_rows: usize,
    pub conservation_rows: usize,
    pub endpoint_rows: usize,
    pub linearization_rows: usize,
}

impl MilpCounts {
    pub fn for_nodes(n: usize) -> Self {
        let c = n * (n - 1);
        MilpCounts {
            x: n * n,
            f: n * n * c,
            z: n * n * c,
            k: 1,
            capacity_rows: n * n,
            degree_rows: 2 * n,
            conservation_rows: c * (n - 2),
            endpoint_rows: 2 * c,
            linearization_rows: 4 * n * n * c,
        }
    }

    pub fn rows(&self) -> usize {
        self.capacity_rows + self.degree_rows + self.conservation_rows + self.endpoint_rows + self.linearization_rows
    }
}

fn commodities(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect()
}

fn z(i: usize, j: usize, (s, t): (usize, usize)) -> String {
    format!("z_{i}_{j}_{s}_{t}")
}

fn f(i: usize, j: usize, (s, t): (usize, usize)) -> String {
    format!("f_{i}_{j}_{s}_{t}")
}

/// Writes ` name: a + b + ...` wrapped eight terms per line.
fn row(out: &mut String, name: &str, plus: &[String], minus: &[String], rhs: &str) {
    let mut terms: Vec<String> = Vec::with_capacity(plus.len() + minus.len());
    for (i, p) in plus.iter().enumerate() {
        terms.push(if i == 0 { p.clone() } else { format!("+ {p}") });
    }
    for m in minus {
        terms.push(format!("- {m}"));
    }
    let _ = write!(out, " {name}:");
    for (i, t) in terms.iter().enumerate() {
        if i > 0 && i % 8 == 0 {
            out.push_str("\n   ");
        }
        let _ = write!(out, " {t}");
    }
    let _ = writeln!(out, " {rhs}");
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn emit_milp(n: usize, d: usize, cap: f64) -> Result<String> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 nodes, got {n}")));
    }
    if d >= n {
        return Err(Error::InvalidParam(format!("degree {d} must be below node count {n}")));
    }
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::InvalidParam("capacity must be positive".into()));
    }
    let cs = commodities(n);
    let capv = num(cap);
    let mut out = String::new();
    let _ = writeln!(out, "\\ topology synthesis: N={n} d={d} Cap={capv}");
    out.push_str("Maximize\n obj: k\nSubject To\n");
    for i in 0..n {
        for j in 0..n {
            let zs: Vec<String> = cs.iter().map(|&c| z(i, j, c)).collect();
            row(&mut out, &format!("cap_{i}_{j}"), &zs, &[], &format!("<= {capv}"));
        }
    }
    for j in 0..n {
        let xs: Vec<String> = (0..n).map(|i| format!("x_{i}_{j}")).collect();
        row(&mut out, &format!("indeg_{j}"), &xs, &[], &format!("= {d}"));
    }
    for j in 0..n {
        let xs: Vec<String> = (0..n).map(|i| format!("x_{j}_{i}")).collect();
        row(&mut out, &format!("outdeg_{j}"), &xs, &[], &format!("= {d}"));
    }
    for &c in &cs {
        let (s, t) = c;
        for j in (0..n).filter(|&j| j != s && j != t) {
            let ins: Vec<String> = (0..n).map(|i| z(i, j, c)).collect();
            let outs: Vec<String> = (0..n).map(|i| z(j, i, c)).collect();
            row(&mut out, &format!("cons_{s}_{t}_{j}"), &ins, &outs, "= 0");
        }
    }
    for &c in &cs {
        let (s, t) = c;
        let outs: Vec<String> = (0..n).map(|i| z(s, i, c)).collect();
        row(&mut out, &format!("src_{s}_{t}"), &outs, &["k".into()], "= 0");
        let ins: Vec<String> = (0..n).map(|i| z(i, t, c)).collect();
        row(&mut out, &format!("sink_{s}_{t}"), &ins, &["k".into()], "= 0");
    }
    for i in 0..n {
        for j in 0..n {
            for &c in &cs {
                let (s, t) = c;
                let tag = format!("{i}_{j}_{s}_{t}");
                let (zv, fv) = (z(i, j, c), f(i, j, c));
                let _ = writeln!(out, " lin1_{tag}: {zv} - {capv} x_{i}_{j} <= 0");
                let _ = writeln!(out, " lin2_{tag}: {zv} >= 0");
                let _ = writeln!(out, " lin3_{tag}: {zv} - {fv} <= 0");
                let _ = writeln!(out, " lin4_{tag}: {zv} - {fv} - {capv} x_{i}_{j} >= -{capv}");
            }
        }
    }
    out.push_str("Bounds\n");
    for i in 0..n {
        for j in 0..n {
            for &c in &cs {
                let _ = writeln!(out, " 0 <= {} <= {capv}", f(i, j, c));
            }
        }
    }
    out.push_str(" k free\nBinaries\n");
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(out, " x_{i}_{j}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Counts variables and rows of an emitted model by name prefix.
pub fn count_model(text: &str) -> MilpCounts {
    let mut vars: [std::collections::BTreeSet<&str>; 3] = Default::default();
    let mut rows = [0usize; 5];
    let mut section = "";
    let mut has_k = false;
    for line in text.lines() {
        let l = line.trim();
        match l {
            "Maximize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = l;
                continue;
            }
            _ => {}
        }
        if section == "Subject To" {
            if let Some((name, _)) = l.split_once(':') {
                let idx = match name.split('_').next().unwrap_or("") {
                    "cap" => 0,
                    "indeg" | "outdeg" => 1,
                    "cons" => 2,
                    "src" | "sink" => 3,
                    _ => 4,
                };
                rows[idx] += 1;
            }
        }
        for tok in l.split(|c: char| c.is_whitespace() || c == ':') {
            match tok.as_bytes().first() {
                Some(b'x') if tok.starts_with("x_") => {
                    vars[0].insert(tok);
                }
                Some(b'f') if tok.starts_with("f_") => {
                    vars[1].insert(tok);
                }
                Some(b'z') if tok.starts_with("z_") => {
                    vars[2].insert(tok);
                }
                Some(b'k') if tok == "k" => has_k = true,
                _ => {}
            }
        }
    }
    MilpCounts {
        x: vars[0].len(),
        f: vars[1].len(),
        z: vars[2].len(),
        k: has_k as usize,
        capacity_rows: rows[0],
        degree_rows: rows[1],
        conservation_rows: rows[2],
        endpoint_rows: rows[3],
        linearization_rows: rows[4],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_nodes_counts() {
        let c = MilpCounts::for_nodes(4);
        assert_eq!((c.x, c.f, c.z, c.k), (16, 192, 192, 1));
        let text = emit_milp(4, 2, 1.0).unwrap();
        assert_eq!(count_model(&text), c);
    }

    #[test]
    fn two_nodes_minimal() {
        let text = emit_milp(2, 1, 1.0).unwrap();
        let c = count_model(&text);
        assert_eq!(c, MilpCounts::for_nodes(2));
        assert_eq!(c.endpoint_rows, 4);
        assert!(text.contains("src_0_1") && text.contains("src_1_0"));
    }

    #[test]
    fn deterministic_and_checked() {
        assert_eq!(emit_milp(5, 2, 2.5).unwrap(), emit_milp(5, 2, 2.5).unwrap());
        assert!(emit_milp(4, 4, 1.0).is_err());
        assert!(emit_milp(1, 0, 1.0).is_err());
    }
}
