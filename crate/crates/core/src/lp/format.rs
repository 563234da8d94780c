//! Writer for the CPLEX LP text format.

use std::fmt::Write;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Op {
    Le,
    Eq,
    Ge,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Le => "<=",
            Op::Eq => "=",
            Op::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub op: Op,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct LpModel {
    pub comment: Vec<String>,
    pub sense: Sense,
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    /// `(var, lower, upper)`; `None` means unbounded on that side.
    pub bounds: Vec<(String, Option<f64>, Option<f64>)>,
    pub binaries: Vec<String>,
}

const TERMS_PER_LINE: usize = 8;

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, terms: &[(f64, String)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, (c, v)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        if i == 0 && sign == "+" {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(out, "{} ", num(mag));
        }
        out.push_str(v);
    }
}

impl LpModel {
    pub fn new(sense: Sense) -> Self {
        LpModel {
            comment: Vec::new(),
            sense,
            objective: Vec::new(),
            rows: Vec::new(),
            bounds: Vec::new(),
            binaries: Vec::new(),
        }
    }

    pub fn row(&mut self, name: impl Into<String>, terms: Vec<(f64, String)>, op: Op, rhs: f64) {
        self.rows.push(Row {
            name: name.into(),
            terms,
            op,
            rhs,
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comment {
            let _ = writeln!(out, "\\ {c}");
        }
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        out.push_str(" obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(out, " {}:", r.name);
            write_terms(&mut out, &r.terms);
            let _ = writeln!(out, " {} {}", r.op.symbol(), num(r.rhs));
        }
        if !self.bounds.is_empty() {
            out.push_str("Bounds\n");
            for (v, lo, hi) in &self.bounds {
                match (lo, hi) {
                    (Some(l), Some(h)) => {
                        let _ = writeln!(out, " {} <= {v} <= {}", num(*l), num(*h));
                    }
                    (Some(l), None) => {
                        let _ = writeln!(out, " {v} >= {}", num(*l));
                    }
                    (None, Some(h)) => {
                        let _ = writeln!(out, " -inf <= {v} <= {}", num(*h));
                    }
                    (None, None) => {
                        let _ = writeln!(out, " {v} free");
                    }
                }
            }
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in self.binaries.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut m = LpModel::new(Sense::Maximize);
        m.objective = vec![(1.0, "k".into())];
        m.row("c1", vec![(1.0, "a".into()), (-2.0, "b".into())], Op::Le, 3.0);
        m.bounds.push(("a".into(), Some(0.0), Some(1.0)));
        m.binaries.push("b".into());
        let s = m.render();
        assert_eq!(
            s,
            "Maximize\n obj: k\nSubject To\n c1: a - 2 b <= 3\nBounds\n 0 <= a <= 1\nBinaries\n b\nEnd\n"
        );
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = LpModel::new(Sense::Minimize);
        let terms = (0..20).map(|i| (1.0, format!("v{i}"))).collect();
        m.row("r", terms, Op::Eq, 1.0);
        let s = m.render();
        assert!(s.lines().all(|l| l.len() < 255));
        assert_eq!(s.matches("\n   ").count(), 2);
    }
}
