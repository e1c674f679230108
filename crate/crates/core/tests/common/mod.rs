#![allow(dead_code)]

use num::{Integer, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use plumbing_core::calculus::{apply_move, Move};
use plumbing_core::correction::d_invariant;
use plumbing_core::graph::PlumbingGraph;
use plumbing_core::invariants::{is_negative_definite, is_weakly_negative_definite, order_h};
use plumbing_core::rational::{frac, is_integer, rat, ri, from_int, Rat};
use plumbing_core::seifert::SeifertData;
use plumbing_core::spinc::{act, canonical_spinc, conjugate, enumerate_spinc, SpincClass};
use plumbing_core::zhat::{DeltaValue, ZhatContext};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Seifert data with `n` legs, `2 <= a_i <= max_a`, and `e < 0`.
pub fn random_seifert(r: &mut ChaCha8Rng, n: usize, max_a: i64) -> SeifertData {
    let mut pairs = Vec::new();
    for _ in 0..n {
        let a = r.gen_range(2..=max_a);
        let ws: Vec<i64> = (1..a).filter(|w| w.gcd(&a) == 1).collect();
        pairs.push((a, *ws.choose(r).unwrap()));
    }
    let sum: Rat = pairs.iter().map(|&(a, w)| rat(w, a)).sum();
    let b0 = sum.floor().to_integer();
    let b0 = i64::try_from(&b0).unwrap() + 1 + r.gen_range(0..=1);
    let d = SeifertData::new(b0, pairs).unwrap();
    assert!(d.euler().is_negative());
    d
}

/// Random tree on `s` vertices (random parent for each new vertex) with
/// weights in `lo..=-1`, resampled until negative definite.
pub fn random_nd_tree(r: &mut ChaCha8Rng, s: usize, lo: i64) -> PlumbingGraph {
    loop {
        let edges: Vec<(usize, usize)> = (1..s).map(|v| (r.gen_range(0..v), v)).collect();
        let weights: Vec<i64> = (0..s).map(|_| r.gen_range(lo..=-1)).collect();
        let g = PlumbingGraph::from_weights(&weights, &edges).unwrap();
        if is_negative_definite(&g) {
            return g;
        }
    }
}

/// Two degree-3 nodes joined by a string, each carrying two legs.
pub fn random_h_graph(r: &mut ChaCha8Rng) -> PlumbingGraph {
    loop {
        let mut weights = vec![r.gen_range(-4..=-1), r.gen_range(-4..=-1)];
        let mut edges = Vec::new();
        let mut chain = |from: usize, len: usize, weights: &mut Vec<i64>, r: &mut ChaCha8Rng| {
            let mut prev = from;
            for _ in 0..len {
                weights.push(r.gen_range(-5..=-2));
                let v = weights.len() - 1;
                edges.push((prev, v));
                prev = v;
            }
            prev
        };
        for node in [0, 1] {
            for _ in 0..2 {
                let len = r.gen_range(1..=2);
                chain(node, len, &mut weights, r);
            }
        }
        let bridge = r.gen_range(0..=2);
        let end = chain(0, bridge, &mut weights, r);
        edges.push((end, 1));
        let g = PlumbingGraph::from_weights(&weights, &edges).unwrap();
        if is_negative_definite(&g) {
            return g;
        }
    }
}

/// Weakly negative definite graph from a seed by random inverse moves that
/// never create nodes, with at least one 0-chain extrusion.
pub fn manufacture_weak(r: &mut ChaCha8Rng, seed: &PlumbingGraph) -> (PlumbingGraph, Vec<Move>) {
    'outer: loop {
        let mut g = seed.clone();
        let mut moves = Vec::new();
        let steps = r.gen_range(1..=4);
        let extrude_at = r.gen_range(0..steps);
        for step in 0..steps {
            let mv = if step == extrude_at {
                let strings: Vec<usize> = (0..g.s()).filter(|&v| g.degree(v) <= 2).collect();
                let v = *strings.choose(r).unwrap();
                let nbs: Vec<String> = g.neighbors(v).iter().map(|&w| g.id(w).to_string()).collect();
                let moved = match nbs.len() {
                    0 => vec![],
                    1 => {
                        if r.gen_bool(0.5) {
                            nbs
                        } else {
                            vec![]
                        }
                    }
                    _ => vec![nbs.choose(r).unwrap().clone()],
                };
                let weight = r.gen_range(-3..=1);
                Move::ZeroChainExtrude { vertex: g.id(v).to_string(), weight, moved }
            } else if r.gen_bool(0.5) {
                let edges = g.edges();
                let &(a, b) = edges.choose(r).unwrap();
                Move::BlowUpEdge {
                    eps: if r.gen_bool(0.5) { 1 } else { -1 },
                    a: g.id(a).to_string(),
                    b: g.id(b).to_string(),
                }
            } else {
                let leaves = g.leaves();
                let &v = leaves.choose(r).unwrap();
                Move::BlowUpVertex { eps: if r.gen_bool(0.5) { 1 } else { -1 }, vertex: g.id(v).to_string() }
            };
            let next = apply_move(&g, &mv).unwrap();
            assert!(next.nodes().len() <= g.nodes().len(), "generator created a node");
            g = next;
            moves.push(mv);
        }
        if g.matrix().determinant().is_zero() || !is_weakly_negative_definite(&g).unwrap() {
            continue 'outer;
        }
        return (g, moves);
    }
}

/// Outcome of the exponent and symmetry checks on one graph.
#[derive(Debug, Default)]
pub struct PropertyReport {
    pub classes_checked: usize,
    pub finite: usize,
    pub parity_checked: bool,
    pub violations: Vec<String>,
}

/// At most one node and every other weight `<= -2`: the plumbings on which
/// `Δ_can = -γ/4 + 1/2` is known, so that `d_can + Δ_can - 1/2 = -2 min χ`.
/// Non-minimal graphs fall outside it: `(-1)-(-2)` is `S^3` with `d = 0`,
/// `Δ_can = -1/2`.
pub fn seifert_form(g: &PlumbingGraph) -> bool {
    g.nodes().len() <= 1 && (0..g.s()).all(|v| g.is_node(v) || g.weight(v) <= -2)
}

/// Exponent lemma, conjugation symmetry, `4|H|Δ ∈ Z`, and (on graphs in
/// Seifert form) the parity of `d_can + Δ_can - 1/2`.
///
/// All classes are checked when `|H| <= full_limit`; otherwise the canonical
/// class and `sample` random translates of it, each with its conjugate.
pub fn property_suite(g: &PlumbingGraph, r: &mut ChaCha8Rng, full_limit: usize, sample: usize) -> PropertyReport {
    let mut rep = PropertyReport::default();
    let ctx = ZhatContext::new(g).unwrap();
    let cap = ctx.default_cap().unwrap();
    let h = order_h(g);
    let h_rat = from_int(&h);
    let inv = g.matrix().inverse().unwrap().clone();
    let s = g.s() as i64;
    let tr = g.trace();

    let mut classes: Vec<SpincClass> = if h <= full_limit.into() {
        enumerate_spinc(g).unwrap()
    } else {
        let can = canonical_spinc(g);
        let mut v = vec![can.clone()];
        for _ in 0..sample {
            let hv: Vec<i64> = (0..g.s()).map(|_| r.gen_range(-3..=3)).collect();
            v.push(act(g, &can, &hv).unwrap());
        }
        v
    };
    let extra: Vec<SpincClass> = classes.iter().map(|c| conjugate(g, c)).collect();
    classes.extend(extra);
    classes.sort();
    classes.dedup();

    let results: Vec<(SpincClass, DeltaValue)> = if h <= full_limit.into() {
        ctx.delta_all(&cap).unwrap().into_iter().map(|(c, d)| (c, d.value)).collect()
    } else {
        classes.iter().map(|c| (c.clone(), ctx.delta(c, &cap).unwrap().value)).collect()
    };
    let lookup = |c: &SpincClass| results.iter().find(|(k, _)| k == c).map(|(_, v)| v.clone()).unwrap();

    let mut finite_vals = Vec::new();
    for c in &classes {
        rep.classes_checked += 1;
        let dv = lookup(c);
        let conj = lookup(&conjugate(g, c));
        if dv != conj {
            rep.violations.push(format!("conjugation: {dv:?} vs {conj:?}"));
        }
        let DeltaValue::Finite(delta) = dv else { continue };
        rep.finite += 1;
        if !is_integer(&(ri(4) * &h_rat * &delta)) {
            rep.violations.push(format!("4|H|Δ not integral: Δ = {delta}"));
        }
        let b2 = inv.quadratic_i64(c.representative()).unwrap();
        let expected_frac = frac(&((ri(-3 * s - tr) - b2) / ri(4)));
        let series = ctx.series(c, &(&delta + ri(2))).unwrap();
        if series.min_exponent() != Some(&delta) {
            rep.violations.push(format!("series starts at {:?}, Δ = {delta}", series.min_exponent()));
        }
        for (e, _) in &series.terms {
            if frac(e) != expected_frac {
                rep.violations.push(format!("exponent {e} has fractional part other than {expected_frac}"));
            }
        }
        finite_vals.push(delta);
    }
    rep.finite = finite_vals.len();
    for w in finite_vals.windows(2) {
        if !is_integer(&(&h_rat * (&w[0] - &w[1]))) {
            rep.violations.push(format!("|H|Δ differs by a non-integer: {} vs {}", w[0], w[1]));
        }
    }

    if seifert_form(g) {
        rep.parity_checked = true;
        let can = canonical_spinc(g);
        if let DeltaValue::Finite(dc) = lookup(&can) {
            let d = d_invariant(g, &can).unwrap().value;
            let x = &d + &dc - rat(1, 2);
            if !is_integer(&x) || !x.to_integer().is_even() {
                rep.violations.push(format!("parity: d + Δ - 1/2 = {x}"));
            }
        }
    }
    rep
}
