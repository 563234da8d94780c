#![allow(dead_code)]

use dctopo::{BaseSpec, Family, TopoExpr};
use proptest::prelude::*;

/// Small valid base specs, one strategy per family.
pub fn base_strategy() -> impl Strategy<Value = BaseSpec> {
    let spec = |f: Family, p: Vec<usize>| BaseSpec::new(f, p).unwrap();
    prop_oneof![
        (2usize..9).prop_map(move |m| spec(Family::Complete, vec![m])),
        (1usize..5).prop_map(move |d| spec(Family::CompleteBipartite, vec![d])),
        (2usize..20)
            .prop_flat_map(|n| (Just(n), 1..n))
            .prop_map(move |(n, d)| spec(Family::Circulant, vec![n, d])),
        (1usize..5, 2usize..30).prop_map(move |(d, m)| spec(Family::UniRing, vec![d, m])),
        (1usize..3, 3usize..30).prop_map(move |(h, m)| spec(Family::BiRing, vec![2 * h, m])),
        (2usize..6, 1usize..4).prop_map(move |(l, n)| spec(Family::Torus, vec![l, n])),
        (1usize..7).prop_map(move |n| spec(Family::Hypercube, vec![n])),
        (1usize..4, 2usize..5).prop_map(move |(n, q)| spec(Family::Hamming, vec![n, q])),
        (2usize..5, 1usize..4).prop_map(move |(d, n)| spec(Family::DeBruijn, vec![d, n])),
        (2usize..5, 2usize..4).prop_map(move |(d, n)| spec(Family::DBJMod, vec![d, n])),
        (2usize..5)
            .prop_flat_map(|d| (Just(d), d + 1..d + 40))
            .prop_map(move |(d, m)| spec(Family::GenKautz, vec![d, m])),
        Just(spec(Family::Diamond, vec![])),
        (2usize..6, 2usize..6).prop_map(move |(r, c)| spec(Family::CycleMesh, vec![r, c])),
    ]
}

/// Expression trees of depth at most four over `base_strategy`.
pub fn expr_strategy() -> impl Strategy<Value = TopoExpr> {
    base_strategy().prop_map(TopoExpr::Base).prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(TopoExpr::line),
            (inner.clone(), 1usize..5).prop_map(|(e, k)| e.deg(k)),
            (inner.clone(), 1usize..5).prop_map(|(e, k)| e.pow(k)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.prod(b)),
            inner.prop_map(TopoExpr::undir),
        ]
    })
}

/// Inserts spaces after commas and parentheses so the parser sees a
/// differently formatted but equivalent string.
pub fn spaced(s: &str) -> String {
    let mut out = String::with_capacity(s.len() * 2);
    for c in s.chars() {
        out.push(c);
        if matches!(c, ',' | '(') {
            out.push(' ');
        }
    }
    out.replace(')', " )")
}
