//! Seifert, Brieskorn and lens space plumbings, Dedekind sums, and the closed
//! forms for `γ` and `Δ_can` of Seifert manifolds.

use num::{Integer, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::invariants::{gamma, is_negative_definite};
use crate::rational::{floor, from_int, rat, ri, Rat};

/// `M(b0; (a_1, ω_1), …, (a_n, ω_n))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeifertData {
    pub b0: i64,
    pub pairs: Vec<(i64, i64)>,
}

impl SeifertData {
    pub fn new(b0: i64, pairs: Vec<(i64, i64)>) -> Result<Self> {
        for &(a, w) in &pairs {
            check_pair(a, w)?;
        }
        Ok(SeifertData { b0, pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// Orbifold Euler number `e = -b0 + Σ ω_i/a_i`.
    pub fn euler(&self) -> Rat {
        self.pairs.iter().fold(ri(-self.b0), |acc, &(a, w)| acc + rat(w, a))
    }

    pub fn a_product(&self) -> i64 {
        self.pairs.iter().map(|p| p.0).product()
    }

    fn require_negative(&self) -> Result<Rat> {
        let e = self.euler();
        if e.is_negative() {
            Ok(e)
        } else {
            Err(Error::NotNegativeDefinite)
        }
    }
}

fn check_pair(a: i64, w: i64) -> Result<()> {
    if a < 2 || w <= 0 || w >= a || a.gcd(&w) != 1 {
        return Err(Error::InvalidPair { a, w });
    }
    Ok(())
}

/// Hirzebruch–Jung expansion `a/w = b_1 - 1/(b_2 - 1/(…))`, all `b_i >= 2`.
pub fn hj_expansion(a: i64, w: i64) -> Result<Vec<i64>> {
    check_pair(a, w)?;
    let (mut num, mut den) = (a, w);
    let mut out = Vec::new();
    while den != 0 {
        let b = Integer::div_ceil(&num, &den);
        out.push(b);
        let next = b * den - num;
        num = den;
        den = next;
    }
    Ok(out)
}

/// Star-shaped plumbing: center `c` of weight `-b0`, leg `j` a chain
/// `l{j}_0 - l{j}_1 - …` with weights `-b_{j,k}`, attached at `l{j}_0`.
pub fn seifert_graph(d: &SeifertData) -> Result<PlumbingGraph> {
    d.require_negative()?;
    let mut vertices = vec![("c".to_string(), -d.b0)];
    let mut edges = Vec::new();
    for (j, &(a, w)) in d.pairs.iter().enumerate() {
        let mut prev = "c".to_string();
        for (k, b) in hj_expansion(a, w)?.into_iter().enumerate() {
            let id = format!("l{j}_{k}");
            vertices.push((id.clone(), -b));
            edges.push((prev, id.clone()));
            prev = id;
        }
    }
    let g = PlumbingGraph::new(vertices, edges)?;
    if !is_negative_definite(&g) {
        return Err(Error::NotNegativeDefinite);
    }
    Ok(g)
}

/// Seifert invariants of `Σ(a_1, …, a_n)` normalized by
/// `(A/a_i) ω_i ≡ -1 (mod a_i)`, which gives `e = -1/A`.
pub fn brieskorn(a: &[i64]) -> Result<SeifertData> {
    let ok = a.iter().all(|&x| x >= 2)
        && (0..a.len()).all(|i| (i + 1..a.len()).all(|j| a[i].gcd(&a[j]) == 1));
    if !ok || a.is_empty() {
        return Err(Error::NotCoprime(a.to_vec()));
    }
    let big_a: i64 = a.iter().product();
    let mut pairs = Vec::new();
    let mut total = 1i64;
    for &ai in a {
        let q = big_a / ai;
        let inv = mod_inverse(q.rem_euclid(ai), ai).ok_or_else(|| Error::NotCoprime(a.to_vec()))?;
        let w = (-inv).rem_euclid(ai);
        total += w * q;
        pairs.push((ai, w));
    }
    debug_assert_eq!(total % big_a, 0);
    SeifertData::new(total / big_a, pairs)
}

fn mod_inverse(x: i64, m: i64) -> Option<i64> {
    let g = x.extended_gcd(&m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

/// Linear chain `-b_1 - … - -b_k` for `p/r = [b_1, …, b_k]`, ids `v0…`.
pub fn lens_graph(p: i64, r: i64) -> Result<PlumbingGraph> {
    if !(p > r && r > 0) || p.gcd(&r) != 1 {
        return Err(Error::InvalidPair { a: p, w: r });
    }
    let w: Vec<i64> = hj_expansion(p, r)?.into_iter().map(|b| -b).collect();
    PlumbingGraph::chain(&w)
}

/// `((x))`: `x - floor(x) - 1/2`, and 0 on integers.
pub fn sawtooth(x: &Rat) -> Rat {
    if x.is_integer() {
        return Rat::zero();
    }
    x - from_int(&floor(x)) - rat(1, 2)
}

/// `s(a, p) = Σ_{k=1}^{p-1} ((k/p)) ((ka/p))`.
pub fn dedekind_sum(a: i64, p: i64) -> Rat {
    assert!(p > 0, "Dedekind sum modulus must be positive");
    (1..p).map(|k| sawtooth(&rat(k, p)) * sawtooth(&rat(k * a, p))).sum()
}

/// `γ = (1/e)(2 - n + Σ 1/a_i)^2 + e + 5 - 12 Σ s(ω_i, a_i)`.
pub fn gamma_seifert(d: &SeifertData) -> Result<Rat> {
    let e = d.require_negative()?;
    let x = seifert_x(d);
    let ds: Rat = d.pairs.iter().map(|&(a, w)| dedekind_sum(w, a)).sum();
    Ok(&x * &x / &e + &e + ri(5) - ri(12) * ds)
}

/// `2 - n + Σ 1/a_i`.
fn seifert_x(d: &SeifertData) -> Rat {
    d.pairs.iter().fold(ri(2 - d.n() as i64), |acc, &(a, _)| acc + rat(1, a))
}

/// `Δ_can = -γ/4 + 1/2`.
pub fn delta_can_closed(d: &SeifertData) -> Result<Rat> {
    Ok(-gamma_seifert(d)? / ri(4) + rat(1, 2))
}

/// Bounds on `Δ_can` from `|s(ω, a)| <= s(1, a)`.
pub fn delta_bounds(d: &SeifertData) -> Result<(Rat, Rat)> {
    let e = d.require_negative()?;
    let x = seifert_x(d);
    let n = d.n() as i64;
    let head = -(&x * &x) / (ri(4) * &e);
    let spread: Rat = d.pairs.iter().map(|&(a, _)| rat(a, 4) + rat(1, 2 * a)).sum();
    let upper = &head - (&e + ri(3 * (n + 1))) / ri(4) + &spread;
    let lower = &head - (&e + ri(3 * (1 - n))) / ri(4) - &spread;
    Ok((lower, upper))
}

/// `γ(L(p, r)) = 2 - 2/p - 12 s(r, p)`.
pub fn lens_gamma(p: i64, r: i64) -> Rat {
    ri(2) - rat(2, p) - ri(12) * dedekind_sum(r, p)
}

/// Both argument orders of the Dedekind sum in the lens space `γ` identity,
/// next to the value computed from the plumbing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LensGammaCheck {
    pub from_graph: Rat,
    pub with_s_r_p: Rat,
    pub with_s_p_r: Rat,
}

impl LensGammaCheck {
    pub fn r_p_consistent(&self) -> bool {
        self.from_graph == self.with_s_r_p
    }

    pub fn p_r_consistent(&self) -> bool {
        self.from_graph == self.with_s_p_r
    }
}

pub fn lens_gamma_check(p: i64, r: i64) -> Result<LensGammaCheck> {
    let g = lens_graph(p, r)?;
    Ok(LensGammaCheck {
        from_graph: gamma(&g)?,
        with_s_r_p: lens_gamma(p, r),
        with_s_p_r: ri(2) - rat(2, p) - ri(12) * dedekind_sum(p, r),
    })
}

/// One nonzero entry of the lens space `Δ` table: the classes `g^{-k} can`
/// for the listed `k` (mod p), which share the value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LensDelta {
    pub powers: Vec<i64>,
    pub value: Rat,
}

/// `Δ_can = Δ_{g^{-r-1} can} = 3 s(r,p) + 1/(2p)` and
/// `Δ_{g^{-1} can} = Δ_{g^{-r} can} = 3 s(r,p) - 1/(2p)`; every other class vanishes.
pub fn lens_delta_table(p: i64, r: i64) -> Result<Vec<LensDelta>> {
    if !(p > r && r > 0) || p.gcd(&r) != 1 {
        return Err(Error::InvalidPair { a: p, w: r });
    }
    let base = ri(3) * dedekind_sum(r, p);
    let mut plus = vec![0, (r + 1).rem_euclid(p)];
    let mut minus = vec![1 % p, r.rem_euclid(p)];
    plus.sort_unstable();
    plus.dedup();
    minus.sort_unstable();
    minus.dedup();
    Ok(vec![
        LensDelta { powers: plus, value: &base + rat(1, 2 * p) },
        LensDelta { powers: minus, value: &base - rat(1, 2 * p) },
    ])
}

/// Representative of `g^{-k} can` on `lens_graph(p, r)`, where the generator
/// `g` is the class of the dual of the last vertex of the chain.
pub fn lens_class_vector(g: &PlumbingGraph, k: i64) -> Vec<i64> {
    let mut b = crate::spinc::canonical_vector(g);
    let last = g.index_of(&format!("v{}", g.s() - 1)).expect("chain ids are v0..");
    b[last] -= 2 * k;
    b
}
