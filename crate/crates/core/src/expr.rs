//! Construction expressions: a base topology wrapped in expansions.

use std::fmt;

use crate::base::{BaseSpec, Family};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TopoExpr {
    Base(BaseSpec),
    Line(Box<TopoExpr>),
    Deg(Box<TopoExpr>, usize),
    Pow(Box<TopoExpr>, usize),
    Prod(Box<TopoExpr>, Box<TopoExpr>),
    Undir(Box<TopoExpr>),
}

impl TopoExpr {
    pub fn base(family: Family, params: Vec<usize>) -> Result<Self> {
        Ok(TopoExpr::Base(BaseSpec::new(family, params)?))
    }

    pub fn line(self) -> Self {
        TopoExpr::Line(Box::new(self))
    }

    pub fn deg(self, n: usize) -> Self {
        TopoExpr::Deg(Box::new(self), n)
    }

    pub fn pow(self, n: usize) -> Self {
        TopoExpr::Pow(Box::new(self), n)
    }

    pub fn prod(self, other: TopoExpr) -> Self {
        TopoExpr::Prod(Box::new(self), Box::new(other))
    }

    pub fn undir(self) -> Self {
        TopoExpr::Undir(Box::new(self))
    }

    /// `(N, d)` derived bottom-up, `None` on overflow.
    pub fn shape(&self) -> Option<(u64, u64)> {
        match self {
            TopoExpr::Base(b) => Some((b.size() as u64, b.degree() as u64)),
            TopoExpr::Line(e) => {
                let (n, d) = e.shape()?;
                Some((n.checked_mul(d)?, d))
            }
            TopoExpr::Deg(e, k) => {
                let (n, d) = e.shape()?;
                let k = *k as u64;
                Some((n.checked_mul(k)?, d.checked_mul(k)?))
            }
            TopoExpr::Pow(e, k) => {
                let (n, d) = e.shape()?;
                Some((n.checked_pow(*k as u32)?, d.checked_mul(*k as u64)?))
            }
            TopoExpr::Prod(a, b) => {
                let (n1, d1) = a.shape()?;
                let (n2, d2) = b.shape()?;
                Some((n1.checked_mul(n2)?, d1.checked_add(d2)?))
            }
            TopoExpr::Undir(e) => {
                let (n, d) = e.shape()?;
                Some((n, d.checked_mul(2)?))
            }
        }
    }

    /// Number of expansion nodes above the leaves.
    pub fn depth(&self) -> usize {
        match self {
            TopoExpr::Base(_) => 0,
            TopoExpr::Line(e) | TopoExpr::Deg(e, _) | TopoExpr::Pow(e, _) | TopoExpr::Undir(e) => 1 + e.depth(),
            TopoExpr::Prod(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn line_count(&self) -> usize {
        match self {
            TopoExpr::Base(_) => 0,
            TopoExpr::Line(e) => 1 + e.line_count(),
            TopoExpr::Deg(e, _) | TopoExpr::Pow(e, _) | TopoExpr::Undir(e) => e.line_count(),
            TopoExpr::Prod(a, b) => a.line_count() + b.line_count(),
        }
    }
}

impl fmt::Display for TopoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopoExpr::Base(b) => write!(f, "{b}"),
            TopoExpr::Line(e) => write!(f, "L({e})"),
            TopoExpr::Deg(e, n) => write!(f, "Deg({e},{n})"),
            TopoExpr::Pow(e, n) => write!(f, "Pow({e},{n})"),
            TopoExpr::Prod(a, b) => write!(f, "Prod({a},{b})"),
            TopoExpr::Undir(e) => write!(f, "Undir({e})"),
        }
    }
}

impl std::str::FromStr for TopoExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => self.err(self.pos, format!("expected '{}', found '{}'", c as char, x as char)),
            None => self.err(self.pos, format!("expected '{}', found end of input", c as char)),
        }
    }

    fn ident(&mut self) -> Result<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.src.get(start) {
                Some(&c) => self.err(start, format!("expected a name, found '{}'", c as char)),
                None => self.err(start, "expected a name, found end of input"),
            };
        }
        let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        Ok((start, s))
    }

    fn int(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected an integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err(start, "integer too large"))
    }

    fn expr(&mut self) -> Result<TopoExpr> {
        let (start, name) = self.ident()?;
        match name.as_str() {
            "L" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e.line())
            }
            "Undir" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e.undir())
            }
            "Deg" | "Pow" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b',')?;
                let at = self.pos;
                let n = self.int()?;
                if n < 1 {
                    return self.err(at, format!("{name} factor must be at least 1"));
                }
                self.expect(b')')?;
                Ok(if name == "Deg" { e.deg(n) } else { e.pow(n) })
            }
            "Prod" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(a.prod(b))
            }
            _ => {
                let Some(family) = Family::from_name(&name) else {
                    return self.err(start, format!("unknown topology '{name}'"));
                };
                let mut params = Vec::new();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    loop {
                        params.push(self.int()?);
                        match self.peek() {
                            Some(b',') => self.pos += 1,
                            _ => break,
                        }
                    }
                    self.expect(b')')?;
                }
                BaseSpec::new(family, params)
                    .map(TopoExpr::Base)
                    .or_else(|e| self.err(start, e.to_string()))
            }
        }
    }
}

/// Parses the text form printed by `Display`; whitespace is ignored.
pub fn parse_expr(text: &str) -> Result<TopoExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return p.err(p.pos, format!("unexpected trailing '{}'", c as char));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_reach_1024_by_4() {
        for s in [
            "L(L(L(DBJMod(4,2))))",
            "L(Pow(DBJMod(2,4),2))",
            "Pow(Prod(UniRing(1,4),UniRing(1,8)),2)",
            "GenKautz(4,1024)",
        ] {
            let e = parse_expr(s).unwrap();
            assert_eq!(e.shape(), Some((1024, 4)), "{s}");
            assert_eq!(e.to_string(), s);
        }
    }

    #[test]
    fn whitespace_is_ignored() {
        let e = parse_expr(" Prod ( UniRing(1, 4) ,\n Diamond ) ").unwrap();
        assert_eq!(e.to_string(), "Prod(UniRing(1,4),Diamond)");
        assert_eq!(e.shape(), Some((32, 3)));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_expr("L(Foo(1))"),
            Err(Error::Parse {
                pos: 2,
                msg: "unknown topology 'Foo'".into()
            })
        );
        assert!(matches!(parse_expr("L(Diamond"), Err(Error::Parse { pos: 9, .. })));
        assert!(matches!(parse_expr("Pow(Diamond,0)"), Err(Error::Parse { pos: 12, .. })));
        assert!(matches!(parse_expr("UniRing(1)"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_expr("Diamond x"), Err(Error::Parse { pos: 8, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Parse { pos: 0, .. })));
    }

    #[test]
    fn shapes() {
        let e = parse_expr("Undir(Deg(Complete(3),2))").unwrap();
        assert_eq!(e.shape(), Some((6, 8)));
        assert_eq!(e.depth(), 2);
        let big = parse_expr("Pow(Pow(Pow(GenKautz(4,1024),4),4),4)").unwrap();
        assert_eq!(big.shape(), None);
    }
}
