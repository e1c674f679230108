mod common;

use std::collections::BTreeMap;

use num::{Integer, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

use plumbing_core::calculus::{apply_move, normalize, Move};
use plumbing_core::correction::d_invariant;
use plumbing_core::graph::PlumbingGraph;
use plumbing_core::invariants::{gamma, is_negative_definite, order_h, quadratic_form};
use plumbing_core::lattice::{minimize, Admissible, CosetFilter};
use plumbing_core::matrix::ExactMatrix;
use plumbing_core::rational::{from_int, is_integer, rat, ri, Int, Rat};
use plumbing_core::seifert::{
    dedekind_sum, delta_bounds, delta_can_closed, gamma_seifert, lens_gamma_check, seifert_graph,
};
use plumbing_core::spinc::{act, canonical_spinc, class_of, conjugate, enumerate_spinc, same_class};
use plumbing_core::splice::{h_shape_form, splice_diagram, HShapeWeights};
use plumbing_core::zhat::{coefficient_scale, ctilde, default_cap, delta, ZhatContext};

use common::*;

/// Random tree with `v`'s parent drawn from `0..v`; weights are `-deg - extra`
/// with `extra >= -1`, kept only when negative definite.
fn nd_tree(max_s: usize) -> impl Strategy<Value = PlumbingGraph> {
    (1..=max_s)
        .prop_flat_map(|s| {
            let parents: Vec<BoxedStrategy<usize>> = (1..s).map(|v| (0..v).boxed()).collect();
            (parents, prop::collection::vec(-1i64..=2, s))
        })
        .prop_filter_map("not negative definite", |(parents, extra)| {
            let s = extra.len();
            let edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            let mut deg = vec![0i64; s];
            for &(a, b) in &edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            let weights: Vec<i64> = (0..s).map(|v| (-deg[v] - extra[v]).min(-1)).collect();
            let g = PlumbingGraph::from_weights(&weights, &edges).ok()?;
            is_negative_definite(&g).then_some(g)
        })
}

fn symmetric(max_n: usize) -> impl Strategy<Value = ExactMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-4i64..=4, n * (n + 1) / 2).prop_map(move |upper| {
            let mut e = vec![0i64; n * n];
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    e[i * n + j] = upper[k];
                    e[j * n + i] = upper[k];
                    k += 1;
                }
            }
            ExactMatrix::from_i64(n, &e)
        })
    })
}

/// Every principal minor of order `k` has sign `(-1)^k`.
fn minors_oracle(m: &ExactMatrix) -> bool {
    let n = m.dim();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let d = m.principal(&idx).determinant().clone();
        if idx.len().is_multiple_of(2) {
            d.is_positive()
        } else {
            d.is_negative()
        }
    })
}

fn random_in_coset(g: &PlumbingGraph, b: &[i64], r: &mut impl Rng) -> Vec<i64> {
    let n: Vec<i64> = (0..g.s()).map(|_| r.gen_range(-2..=2)).collect();
    (0..g.s())
        .map(|v| {
            let mn: Int = (0..g.s()).map(|w| g.matrix().get(v, w).to_integer() * Int::from(n[w])).sum();
            -b[v] - 2 * i64::try_from(&mn).unwrap()
        })
        .collect()
}

fn node_weights(g: &PlumbingGraph) -> BTreeMap<String, Vec<Int>> {
    let sd = splice_diagram(g).unwrap();
    g.nodes()
        .into_iter()
        .map(|n| {
            let mut w: Vec<Int> = sd.weights_at(n).into_iter().map(|x| x.1).collect();
            w.sort();
            (g.id(n).to_string(), w)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn adjugate_is_integral(m in symmetric(5)) {
        prop_assume!(!m.determinant().is_zero());
        let inv = m.inverse().unwrap();
        let adj = inv.scale(m.determinant());
        prop_assert!(adj.is_integral());
        prop_assert_eq!(m.mul(inv).unwrap(), ExactMatrix::identity(m.dim()));
        let pivots = m.ldl_pivots();
        if pivots.len() == m.dim() && pivots.iter().all(|p| !p.is_zero()) {
            prop_assert_eq!(&pivots.iter().cloned().product::<Rat>(), m.determinant());
        }
    }

    #[test]
    fn definiteness_matches_minors(m in symmetric(6)) {
        prop_assert_eq!(m.is_negative_definite(), minors_oracle(&m));
    }

    #[test]
    fn plumbing_definiteness_matches_minors(weights in prop::collection::vec(-3i64..=1, 1..=6), seed in any::<u64>()) {
        let mut r = rng(seed);
        let edges: Vec<(usize, usize)> = (1..weights.len()).map(|v| (r.gen_range(0..v), v)).collect();
        let g = PlumbingGraph::from_weights(&weights, &edges).unwrap();
        prop_assert_eq!(is_negative_definite(&g), minors_oracle(g.matrix()));
    }

    #[test]
    fn form_is_positive(g in nd_tree(10), l in prop::collection::vec(-5i64..=5, 10)) {
        let l = &l[..g.s()];
        prop_assume!(l.iter().any(|&x| x != 0));
        let q = quadratic_form(g.matrix(), l).unwrap();
        prop_assert!(q.is_positive());
        prop_assert!(is_integer(&(from_int(&order_h(&g)) * q)));
    }

    #[test]
    fn spinc_count_is_det(g in nd_tree(8)) {
        let classes = enumerate_spinc(&g).unwrap();
        prop_assert_eq!(Int::from(classes.len()), order_h(&g));
        let mut sorted = classes.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), classes.len());
    }

    #[test]
    fn same_class_is_an_equivalence(g in nd_tree(7), seed in any::<u64>()) {
        let mut r = rng(seed);
        let can = canonical_spinc(&g);
        let reps: Vec<Vec<i64>> = (0..6)
            .map(|_| {
                let h: Vec<i64> = (0..g.s()).map(|_| r.gen_range(-2..=2)).collect();
                act(&g, &can, &h).unwrap().representative().to_vec()
            })
            .collect();
        for a in &reps {
            prop_assert!(same_class(&g, a, a).unwrap());
            for b in &reps {
                let ab = same_class(&g, a, b).unwrap();
                prop_assert_eq!(ab, same_class(&g, b, a).unwrap());
                prop_assert_eq!(ab, class_of(&g, a).unwrap() == class_of(&g, b).unwrap());
                for c in &reps {
                    if ab && same_class(&g, b, c).unwrap() {
                        prop_assert!(same_class(&g, a, c).unwrap());
                    }
                }
                let ca = conjugate(&g, &class_of(&g, a).unwrap());
                let cb = conjugate(&g, &class_of(&g, b).unwrap());
                prop_assert_eq!(ab, ca == cb);
            }
            let c = class_of(&g, a).unwrap();
            prop_assert_eq!(conjugate(&g, &conjugate(&g, &c)), c);
        }
    }

    #[test]
    fn coset_norms_and_exponent_differences(g in nd_tree(8), seed in any::<u64>()) {
        let mut r = rng(seed);
        let inv = g.matrix().inverse().unwrap();
        let h4 = ri(4) * from_int(&order_h(&g));
        for c in enumerate_spinc(&g).unwrap().iter().take(6) {
            let b = c.representative();
            let l1 = random_in_coset(&g, b, &mut r);
            let l2 = random_in_coset(&g, b, &mut r);
            let q1 = -inv.quadratic_i64(&l1).unwrap();
            let q2 = -inv.quadratic_i64(&l2).unwrap();
            prop_assert!(is_integer(&(&h4 * &q1)));
            prop_assert!(is_integer(&((&q1 - &q2) / ri(4))));
        }
    }

    #[test]
    fn ctilde_is_even_and_scaled_integral(g in nd_tree(9), l in prop::collection::vec(-5i64..=5, 9)) {
        let l = &l[..g.s()];
        let neg: Vec<i64> = l.iter().map(|x| -x).collect();
        let c = ctilde(&g, l).unwrap();
        prop_assert_eq!(&c, &ctilde(&g, &neg).unwrap());
        prop_assert!(is_integer(&(c * coefficient_scale(&g))));
    }

    #[test]
    fn direct_coset_walk_matches_filter(g in nd_tree(7), extra in 0i64..=8) {
        let ctx = ZhatContext::new(&g).unwrap();
        let bound = ctx.min_support_norm().unwrap() + ri(extra);
        let scale = coefficient_scale(&g);
        for c in enumerate_spinc(&g).unwrap().iter().take(12) {
            let a = ctx.coset_points_direct(c, &bound).unwrap();
            let b = ctx.coset_points_filtered(c, &bound).unwrap();
            prop_assert_eq!(&a, &b);
            let series = ctx.series(c, &ctx.exponent(&bound)).unwrap();
            for (_, coeff) in &series.terms {
                prop_assert!(is_integer(&(coeff * &scale)));
            }
        }
    }

    #[test]
    fn d_matches_lattice_search(g in nd_tree(6)) {
        let inv = g.matrix().inverse().unwrap();
        let neg_inv = inv.neg();
        let two_m = g.matrix().scale(&ri(2));
        let s = ri(g.s() as i64);
        for c in enumerate_spinc(&g).unwrap().iter().take(8) {
            let d = d_invariant(&g, c).unwrap();
            let k: Vec<i64> = (0..g.s())
                .map(|v| {
                    let mu: Int = (0..g.s()).map(|w| g.matrix().get(v, w).to_integer()).sum();
                    c.representative()[v] + i64::try_from(&mu).unwrap()
                })
                .collect();
            let start = neg_inv.quadratic_i64(&k).unwrap();
            let filter = CosetFilter::new(k.clone(), &two_m).unwrap();
            let (min, _) = minimize(&neg_inv, &vec![Admissible::Any; g.s()], None, Some(&filter), start, None)
                .unwrap()
                .unwrap();
            prop_assert_eq!(&d.value, &((&s - min) / ri(4)));
            prop_assert!(filter.contains(&d.maximizer));
        }
    }

    #[test]
    fn dedekind_bounds(p in 2i64..=60, a in 1i64..=60) {
        prop_assume!(a.gcd(&p) == 1);
        let s1 = dedekind_sum(1, p);
        prop_assert_eq!(&s1, &(rat(p, 12) + rat(1, 6 * p) - rat(1, 4)));
        let s = dedekind_sum(a, p);
        prop_assert!(-&s1 <= s && s <= s1);
        // reciprocity
        let lhs = dedekind_sum(a, p) + dedekind_sum(p, a);
        let rhs = rat(-1, 4) + (rat(a, p) + rat(p, a) + rat(1, a * p)) / ri(12);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn h_shape_symmetries(
        a in prop::array::uniform3(2i64..=7),
        b in prop::array::uniform3(2i64..=7),
        signs in prop::array::uniform4(any::<bool>()),
        x3 in -4i64..=4,
        y3 in -4i64..=4,
    ) {
        let w = HShapeWeights { a, a_prime: b, det: 7, c: rat(3, 5) };
        let m = HShapeWeights { a: b, a_prime: a, det: 7, c: rat(3, 5) };
        let u = |s: bool| if s { 1 } else { -1 };
        let x = [u(signs[0]), u(signs[1]), 2 * x3 + 1, u(signs[2]), u(signs[3]), 2 * y3 + 1];
        let neg = x.map(|t| -t);
        let mirror = [x[3], x[4], x[5], x[0], x[1], x[2]];
        let v = h_shape_form(&w, &x).unwrap();
        prop_assert_eq!(&v, &h_shape_form(&w, &neg).unwrap());
        prop_assert_eq!(&v, &h_shape_form(&m, &mirror).unwrap());
        prop_assert!(h_shape_form(&w, &[2, 1, 1, 1, 1, 1]).is_err());
        prop_assert!(h_shape_form(&w, &[1, 1, 2, 1, 1, 1]).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn seifert_closed_forms(seed in any::<u64>(), n in 3usize..=5) {
        let mut r = rng(seed);
        let d = random_seifert(&mut r, n, 7);
        let g = seifert_graph(&d).unwrap();
        prop_assert_eq!(gamma_seifert(&d).unwrap(), gamma(&g).unwrap());
        let (lo, hi) = delta_bounds(&d).unwrap();
        let v = delta_can_closed(&d).unwrap();
        prop_assert!(lo <= v && v <= hi);

        // leaves at ±1 and the node at t: the form in terms of Seifert data
        let h = from_int(&order_h(&g));
        let big_a = d.a_product();
        let inv = g.matrix().inverse().unwrap();
        let leaves: Vec<usize> = (0..n)
            .map(|j| (0..g.s()).find(|&v| g.degree(v) == 1 && g.id(v).starts_with(&format!("l{j}_"))).unwrap())
            .collect();
        let node = g.nodes()[0];
        for _ in 0..4 {
            let li: Vec<i64> = (0..n).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
            let t = 2 * r.gen_range(-3..=3) + n as i64 % 2;
            let mut l = vec![0i64; g.s()];
            for (j, &v) in leaves.iter().enumerate() {
                l[v] = li[j];
            }
            l[node] = t;
            let mut sum = ri(t * t * big_a);
            for i in 0..n {
                let ai = d.pairs[i].0;
                sum += ri(2 * li[i] * t * (big_a / ai));
                for j in 0..i {
                    sum += ri(2 * li[i] * li[j] * (big_a / (ai * d.pairs[j].0)));
                }
            }
            let diag: Rat = leaves.iter().map(|&v| inv.get(v, v).clone()).sum();
            prop_assert_eq!(quadratic_form(g.matrix(), &l).unwrap(), sum / &h - diag);
        }
    }

    #[test]
    fn moves_preserve_invariants(g in nd_tree(6), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mv = if g.s() > 1 && r.gen_bool(0.6) {
            let edges = g.edges();
            let (a, b) = edges[r.gen_range(0..edges.len())];
            Move::BlowUpEdge { eps: -1, a: g.id(a).to_string(), b: g.id(b).to_string() }
        } else {
            Move::BlowUpVertex { eps: -1, vertex: g.id(r.gen_range(0..g.s())).to_string() }
        };
        let h = apply_move(&g, &mv).unwrap();
        prop_assert!(is_negative_definite(&h));
        prop_assert_eq!(h.matrix().determinant().abs(), g.matrix().determinant().abs());
        let sign_flip = h.matrix().determinant() == &-g.matrix().determinant().clone();
        prop_assert_eq!(sign_flip, mv.flips_det_sign());
        prop_assert_eq!(gamma(&h).unwrap(), gamma(&g).unwrap());
        let dg = delta(&g, &canonical_spinc(&g), &default_cap(&g).unwrap()).unwrap().value;
        let dh = delta(&h, &canonical_spinc(&h), &default_cap(&h).unwrap()).unwrap().value;
        prop_assert_eq!(dg, dh);

        let down = apply_move(&h, &Move::BlowDownVertex { eps: -1, vertex: newest(&h) }).unwrap();
        prop_assert_eq!(down.canonical_hash(), g.canonical_hash());
    }

    #[test]
    fn splice_weights_survive_string_blowups(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = random_seifert(&mut r, 3 + (seed % 3) as usize, 7);
        let g = seifert_graph(&d).unwrap();
        let inner: Vec<(usize, usize)> = g.edges().into_iter().filter(|&(a, b)| !g.is_node(a) && !g.is_node(b)).collect();
        prop_assume!(!inner.is_empty());
        let (a, b) = inner[r.gen_range(0..inner.len())];
        let h = apply_move(&g, &Move::BlowUpEdge { eps: -1, a: g.id(a).to_string(), b: g.id(b).to_string() }).unwrap();
        prop_assert_eq!(node_weights(&h), node_weights(&g));
        let new = h.ids().iter().find(|id| g.index_of(id).is_none()).unwrap().clone();
        let back = apply_move(&h, &Move::BlowDownVertex { eps: -1, vertex: new }).unwrap();
        prop_assert_eq!(node_weights(&back), node_weights(&g));
    }

    #[test]
    fn normalize_never_creates_nodes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = r.gen_range(2..=6);
        let base = random_nd_tree(&mut r, s, -4);
        let (weak, _) = manufacture_weak(&mut r, &base);
        let (out, trace) = normalize(&weak).unwrap();
        prop_assert!(is_negative_definite(&out));
        prop_assert!((0..out.s()).all(|v| out.is_node(v) || out.weight(v) <= -2 || out.s() == 1));
        prop_assert_eq!(order_h(&out), order_h(&weak));
        let mut cur = trace.initial.clone();
        for rec in &trace.records {
            let next = apply_move(&cur, &rec.mv).unwrap();
            prop_assert!(next.nodes().len() <= cur.nodes().len());
            prop_assert_eq!(next.labeled_hash(), rec.hash_after.clone());
            cur = next;
        }
    }
}

/// The highest-numbered `n{k}` id.
fn newest(h: &PlumbingGraph) -> String {
    h.ids()
        .iter()
        .filter_map(|id| id.strip_prefix('n').and_then(|k| k.parse::<usize>().ok()).map(|k| (k, id.clone())))
        .max()
        .map(|x| x.1)
        .expect("a move added a vertex")
}

#[test]
fn lens_gamma_argument_order() {
    for p in 2..=20i64 {
        for r in 1..p {
            if r.gcd(&p) != 1 {
                continue;
            }
            let c = lens_gamma_check(p, r).unwrap();
            assert!(c.r_p_consistent(), "L({p},{r})");
        }
    }
    assert!(!lens_gamma_check(3, 1).unwrap().p_r_consistent());
}
