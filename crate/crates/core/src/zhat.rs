//! Expansion coefficients `c̃_l`, the series `Ẑ_b(q)` and its minimal exponent `Δ_b`.
//!
//! Everything is expressed through the norm `-l^2 = -l^T M^{-1} l`; a vector
//! `l` contributes `c̃_l q^{(-3s - Tr M - l^2)/4}` to `Ẑ_b` when `l ∈ -(2M Z^s + b)`.

use std::collections::{BTreeMap, HashMap};

use num::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::invariants::{gamma, norm_form, require_negative_definite};
use crate::lattice::{Admissible, BallSearch, CosetFilter};
use crate::matrix::ExactMatrix;
use crate::rational::{binomial, from_int, rat, ri, to_i64, Int, Rat};
use crate::snf::IntegerSolver;
use crate::spinc::{class_of, enumerate_spinc, SpincClass};

/// Coefficient of `z^l` in the symmetric expansion of `(z - 1/z)^{2 - δ}`.
pub fn ctilde_factor(degree: usize, l: i64) -> Rat {
    match degree {
        0 => match l {
            2 | -2 => ri(1),
            0 => ri(-2),
            _ => ri(0),
        },
        1 => match l {
            1 => ri(1),
            -1 => ri(-1),
            _ => ri(0),
        },
        2 => {
            if l == 0 {
                ri(1)
            } else {
                ri(0)
            }
        }
        _ => {
            let d = degree as i64 - 2;
            let a = l.abs();
            if a < d || (a - d) % 2 != 0 {
                return ri(0);
            }
            let k = ((a - d) / 2) as u64;
            let c = from_int(&binomial(k + d as u64 - 1, k)) * rat(1, 2);
            if l < 0 || d % 2 == 0 {
                c
            } else {
                -c
            }
        }
    }
}

/// `c̃_l = Π_v` of the per-vertex factors.
pub fn ctilde(g: &PlumbingGraph, l: &[i64]) -> Result<Rat> {
    if l.len() != g.s() {
        return Err(Error::DimensionMismatch { expected: g.s(), found: l.len() });
    }
    let mut acc = ri(1);
    for (v, &lv) in l.iter().enumerate() {
        let f = ctilde_factor(g.degree(v), lv);
        if f.is_zero() {
            return Ok(f);
        }
        acc *= f;
    }
    Ok(acc)
}

/// Support of `c̃` coordinate by coordinate.
pub fn ctilde_constraints(g: &PlumbingGraph) -> Vec<Admissible> {
    (0..g.s())
        .map(|v| match g.degree(v) {
            0 => Admissible::Set(vec![-2, 0, 2]),
            1 => Admissible::Set(vec![-1, 1]),
            2 => Admissible::Fixed(0),
            d => Admissible::ParityMin { parity: (d % 2) as i64, min_abs: d as i64 - 2 },
        })
        .collect()
}

/// Finite piece of a q-series: `Σ c_i q^{e_i}` with all terms of exponent
/// `<= level_bound` present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    pub terms: Vec<(Rat, Rat)>,
    pub level_bound: Rat,
}

impl QSeries {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<&Rat> {
        self.terms.first().map(|t| &t.0)
    }
}

impl std::fmt::Display for QSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({c})q^({e})"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeltaValue {
    Finite(Rat),
    /// No surviving shell with norm up to the given cap; vanishing is only tentative.
    Infinite(Rat),
}

impl DeltaValue {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            DeltaValue::Finite(r) => Some(r),
            DeltaValue::Infinite(_) => None,
        }
    }
}

/// All vectors of C̃_b with one value of `-l^2`, and their coefficient sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shell {
    pub norm: Rat,
    pub vectors: Vec<Vec<i64>>,
    pub coefficient: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaResult {
    pub value: DeltaValue,
    pub minimizing_vectors: Vec<Vec<i64>>,
    /// `Σ c̃_l` over the minimizing shell; zero when infinite.
    pub coefficient: Rat,
    /// Shells below the minimizing one whose coefficients summed to zero.
    pub cancelled_shells: Vec<Shell>,
}

/// Lattice data shared by all spin^c classes of one negative definite graph.
pub struct ZhatContext<'g> {
    g: &'g PlumbingGraph,
    search: BallSearch,
    offset: Rat,
    coset: CosetLattice,
}

/// Parametrization of one coset `-(2M Z^s + b)` intersected with the support
/// of `c̃`. Writing `l = -b - 2Mn`, the coordinates with finitely many allowed
/// values (all but the nodes) pin down `n` up to the kernel `K` of the
/// corresponding rows of `M`, and `-l^2 = 4 (n - t)^T (-M) (n - t)` with
/// `t = -M^{-1} b / 2` becomes a positive definite form on `K`.
struct CosetLattice {
    /// Non-node coordinates with their allowed values.
    finite: Vec<(usize, Vec<i64>)>,
    solver: IntegerSolver,
    kernel: Vec<Vec<i64>>,
    /// `4 K^T (-M) K`.
    gram: ExactMatrix,
    /// `(K^T (-M) K)^{-1}`.
    half_gram_inv: Option<ExactMatrix>,
}

impl CosetLattice {
    fn new(g: &PlumbingGraph) -> Result<Self> {
        let s = g.s();
        let m = g.matrix();
        let mut finite = Vec::new();
        for (v, a) in ctilde_constraints(g).into_iter().enumerate() {
            match a {
                Admissible::Set(vals) => finite.push((v, vals)),
                Admissible::Fixed(x) => finite.push((v, vec![x])),
                _ => {}
            }
        }
        let rows: Vec<Int> = finite
            .iter()
            .flat_map(|(v, _)| (0..s).map(move |j| m.get(*v, j).to_integer()))
            .collect();
        let solver = IntegerSolver::new(&rows, finite.len(), s).ok_or(Error::SingularMatrix)?;
        let kernel: Vec<Vec<i64>> = solver
            .kernel()
            .iter()
            .map(|c| c.iter().map(to_i64).collect())
            .collect();
        let k = kernel.len();
        let neg = m.neg();
        let mut half = vec![ri(0); k * k];
        for a in 0..k {
            let col: Vec<Rat> = kernel[a].iter().map(|&x| ri(x)).collect();
            let mc = neg.mul_vec(&col)?;
            for b in 0..k {
                half[b * k + a] = kernel[b].iter().zip(&mc).map(|(x, y)| ri(*x) * y).sum();
            }
        }
        let half = ExactMatrix::from_rats(k, half);
        let gram = half.scale(&ri(4));
        let half_gram_inv = if k > 0 { Some(half.inverse()?.clone()) } else { None };
        Ok(CosetLattice { finite, solver, kernel, gram, half_gram_inv })
    }
}

impl<'g> ZhatContext<'g> {
    pub fn new(g: &'g PlumbingGraph) -> Result<Self> {
        require_negative_definite(g)?;
        let form = norm_form(g)?;
        let search = BallSearch::new(&form, &ctilde_constraints(g), None, None)?;
        let offset = ri(-3 * g.s() as i64 - g.trace());
        let coset = CosetLattice::new(g)?;
        Ok(ZhatContext { g, search, offset, coset })
    }

    pub fn graph(&self) -> &PlumbingGraph {
        self.g
    }

    /// `(-3s - Tr M + norm)/4`.
    pub fn exponent(&self, norm: &Rat) -> Rat {
        (&self.offset + norm) / ri(4)
    }

    /// Norm bound matching an exponent level.
    pub fn norm_for_level(&self, level: &Rat) -> Rat {
        level * ri(4) - &self.offset
    }

    /// Points of C̃ (with their coefficient) of norm `<= bound`, optionally
    /// restricted to one coset.
    fn points(&self, bound: &Rat, coset: Option<&CosetFilter>) -> Result<Vec<(Vec<i64>, Rat, Rat)>> {
        let mut out = Vec::new();
        let mut err = None;
        self.search.walk(bound.clone(), |x, v| {
            if coset.is_none_or(|f| f.contains(x)) {
                match ctilde(self.g, x) {
                    Ok(c) => out.push((x.to_vec(), v.clone(), c)),
                    Err(e) => err = Some(e),
                }
            }
            bound.clone()
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(out)
    }

    /// Points of C̃ ∩ -(2M Z^s + b) of norm `<= bound`, enumerated inside the
    /// coset rather than filtered from all of C̃.
    fn coset_points(&self, b: &SpincClass, bound: &Rat) -> Result<Vec<(Vec<i64>, Rat, Rat)>> {
        let m = self.g.matrix();
        let inv = m.inverse()?;
        let neg = m.neg();
        let rep = b.representative();
        let rep_rat: Vec<Rat> = rep.iter().map(|&x| ri(x)).collect();
        let t: Vec<Rat> = inv.mul_vec(&rep_rat)?.into_iter().map(|x| -x / ri(2)).collect();
        let cl = &self.coset;
        let mut out = Vec::new();

        let mut choice = vec![0usize; cl.finite.len()];
        loop {
            let mut rhs = Vec::with_capacity(cl.finite.len());
            let mut parity_ok = true;
            for (i, (v, vals)) in cl.finite.iter().enumerate() {
                // (2Mn)_v = -b_v - l_v
                let twice = -rep[*v] - vals[choice[i]];
                parity_ok &= twice % 2 == 0;
                rhs.push(Int::from(twice / 2));
            }
            if let Some(n0) = parity_ok.then(|| cl.solver.solve(&rhs)).flatten() {
                let n0: Vec<i64> = n0.iter().map(to_i64).collect();
                self.kernel_walk(&n0, &t, &neg, bound, rep, &mut out)?;
            }
            // next combination of finite values
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return Ok(out);
                }
                choice[i] += 1;
                if choice[i] < cl.finite[i].1.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    fn kernel_walk(
        &self,
        n0: &[i64],
        t: &[Rat],
        neg: &ExactMatrix,
        bound: &Rat,
        rep: &[i64],
        out: &mut Vec<(Vec<i64>, Rat, Rat)>,
    ) -> Result<()> {
        let g = self.g;
        let cl = &self.coset;
        let k = cl.kernel.len();
        let s = g.s();
        let diff: Vec<Rat> = (0..s).map(|i| &t[i] - ri(n0[i])).collect();
        let (center, offset) = match &cl.half_gram_inv {
            None => (Vec::new(), ri(4) * neg.quadratic(&diff)?),
            Some(hinv) => {
                let nd = neg.mul_vec(&diff)?;
                let w: Vec<Rat> = cl
                    .kernel
                    .iter()
                    .map(|col| col.iter().zip(&nd).map(|(x, y)| ri(*x) * y).sum())
                    .collect();
                let c = hinv.mul_vec(&w)?;
                let resid: Vec<Rat> = (0..s)
                    .map(|i| &diff[i] - (0..k).map(|a| ri(cl.kernel[a][i]) * &c[a]).sum::<Rat>())
                    .collect();
                (c, ri(4) * neg.quadratic(&resid)?)
            }
        };
        if &offset > bound {
            return Ok(());
        }
        let mut err = None;
        let mut emit = |y: &[i64], value: Rat| {
            let n: Vec<i64> = (0..s).map(|i| n0[i] + (0..k).map(|a| cl.kernel[a][i] * y[a]).sum::<i64>()).collect();
            let l: Vec<i64> = (0..s)
                .map(|v| {
                    let mn: i64 = g.weight(v) * n[v] + g.neighbors(v).iter().map(|&w| n[w]).sum::<i64>();
                    -rep[v] - 2 * mn
                })
                .collect();
            match ctilde(g, &l) {
                Ok(c) if !c.is_zero() => out.push((l, value, c)),
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        };
        if k == 0 {
            emit(&[], offset);
        } else {
            let search = BallSearch::new(&cl.gram, &vec![Admissible::Any; k], Some(&center), None)?;
            let rest = bound - &offset;
            search.walk(rest.clone(), |y, v| {
                emit(y, &offset + v);
                rest.clone()
            })?;
        }
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Coset points by filtering all of C̃ through a congruence test; slower,
    /// kept as an independent route for cross-checks.
    pub fn coset_points_filtered(&self, b: &SpincClass, bound: &Rat) -> Result<Vec<(Vec<i64>, Rat, Rat)>> {
        let coset = self.coset_of(b)?;
        let mut pts: Vec<_> = self.points(bound, Some(&coset))?.into_iter().filter(|p| !p.2.is_zero()).collect();
        pts.sort();
        Ok(pts)
    }

    /// Coset points enumerated directly in the coset.
    pub fn coset_points_direct(&self, b: &SpincClass, bound: &Rat) -> Result<Vec<(Vec<i64>, Rat, Rat)>> {
        let mut pts = self.coset_points(b, bound)?;
        pts.sort();
        Ok(pts)
    }

    fn coset_of(&self, b: &SpincClass) -> Result<CosetFilter> {
        let target: Vec<i64> = b.representative().iter().map(|x| -x).collect();
        let two_m = self.g.matrix().scale(&ri(2));
        CosetFilter::new(target, &two_m)
    }

    /// Smallest norm over all of C̃, ignoring cosets.
    pub fn min_support_norm(&self) -> Result<Rat> {
        let mut bound = self.search.constant().clone() + ri(4);
        loop {
            let mut best: Option<Rat> = None;
            self.search.walk(bound.clone(), |_, v| {
                if best.as_ref().is_none_or(|b| v < b) {
                    best = Some(v.clone());
                }
                best.clone().unwrap()
            })?;
            if let Some(b) = best {
                return Ok(b);
            }
            bound = bound * ri(2) + ri(4);
        }
    }

    /// Eight integer exponent steps above the smallest norm over C̃.
    pub fn default_cap(&self) -> Result<Rat> {
        Ok(self.min_support_norm()? + ri(32))
    }

    pub fn series(&self, b: &SpincClass, level: &Rat) -> Result<QSeries> {
        let bound = self.norm_for_level(level);
        let mut terms = Vec::new();
        if !bound.is_negative() {
            for sh in group_shells(self.coset_points(b, &bound)?) {
                if !sh.coefficient.is_zero() {
                    terms.push((self.exponent(&sh.norm), sh.coefficient));
                }
            }
        }
        Ok(QSeries { terms, level_bound: level.clone() })
    }

    pub fn delta(&self, b: &SpincClass, cap: &Rat) -> Result<DeltaResult> {
        let mut bound = self.first_bound(cap)?;
        loop {
            let shells = group_shells(self.coset_points(b, &bound)?);
            if let Some(r) = self.resolve(shells, &bound, cap) {
                return Ok(r);
            }
            bound = grow(&bound, cap);
        }
    }

    /// `Δ_b` for every class, from one enumeration per bound shared by all cosets.
    pub fn delta_all(&self, cap: &Rat) -> Result<Vec<(SpincClass, DeltaResult)>> {
        let classes = enumerate_spinc(self.g)?;
        let mut done: HashMap<SpincClass, DeltaResult> = HashMap::new();
        let mut bound = self.first_bound(cap)?;
        loop {
            let mut buckets: HashMap<SpincClass, Vec<(Vec<i64>, Rat, Rat)>> = HashMap::new();
            for p in self.points(&bound, None)? {
                let neg: Vec<i64> = p.0.iter().map(|x| -x).collect();
                let c = class_of(self.g, &neg)?;
                if !done.contains_key(&c) {
                    buckets.entry(c).or_default().push(p);
                }
            }
            for c in &classes {
                if done.contains_key(c) {
                    continue;
                }
                let shells = group_shells(buckets.remove(c).unwrap_or_default());
                if let Some(r) = self.resolve(shells, &bound, cap) {
                    done.insert(c.clone(), r);
                }
            }
            if done.len() == classes.len() {
                break;
            }
            bound = grow(&bound, cap);
        }
        Ok(classes
            .into_iter()
            .map(|c| {
                let r = done.remove(&c).expect("every class resolved");
                (c, r)
            })
            .collect())
    }

    fn first_bound(&self, cap: &Rat) -> Result<Rat> {
        let b = self.min_support_norm()? + ri(4);
        Ok(if &b > cap { cap.clone() } else { b })
    }

    /// Δ from the complete shells up to `bound`, or `None` if the bound must grow.
    fn resolve(&self, shells: Vec<Shell>, bound: &Rat, cap: &Rat) -> Option<DeltaResult> {
        let mut cancelled = Vec::new();
        for sh in shells {
            if sh.coefficient.is_zero() {
                cancelled.push(sh);
            } else {
                return Some(DeltaResult {
                    value: DeltaValue::Finite(self.exponent(&sh.norm)),
                    minimizing_vectors: sh.vectors,
                    coefficient: sh.coefficient,
                    cancelled_shells: cancelled,
                });
            }
        }
        if bound >= cap {
            Some(DeltaResult {
                value: DeltaValue::Infinite(cap.clone()),
                minimizing_vectors: Vec::new(),
                coefficient: Rat::zero(),
                cancelled_shells: cancelled,
            })
        } else {
            None
        }
    }
}

fn grow(bound: &Rat, cap: &Rat) -> Rat {
    let next = bound * ri(2) + ri(4);
    if &next > cap {
        cap.clone()
    } else {
        next
    }
}

fn group_shells(points: Vec<(Vec<i64>, Rat, Rat)>) -> Vec<Shell> {
    let mut map: BTreeMap<Rat, (Vec<Vec<i64>>, Rat)> = BTreeMap::new();
    for (x, norm, c) in points {
        let e = map.entry(norm).or_insert_with(|| (Vec::new(), Rat::zero()));
        e.0.push(x);
        e.1 += c;
    }
    map.into_iter()
        .map(|(norm, (mut vectors, coefficient))| {
            vectors.sort();
            Shell { norm, vectors, coefficient }
        })
        .collect()
}

pub fn zhat_series(g: &PlumbingGraph, b: &SpincClass, level: &Rat) -> Result<QSeries> {
    ZhatContext::new(g)?.series(b, level)
}

pub fn delta(g: &PlumbingGraph, b: &SpincClass, cap: &Rat) -> Result<DeltaResult> {
    ZhatContext::new(g)?.delta(b, cap)
}

pub fn delta_all(g: &PlumbingGraph, cap: &Rat) -> Result<Vec<(SpincClass, DeltaResult)>> {
    ZhatContext::new(g)?.delta_all(cap)
}

pub fn default_cap(g: &PlumbingGraph) -> Result<Rat> {
    ZhatContext::new(g)?.default_cap()
}

/// Comparison of `min_b Δ_b` with `-γ/4 + 1/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureReport {
    pub min_delta: Option<Rat>,
    pub minimizing_classes: Vec<SpincClass>,
    pub bound: Rat,
    pub gamma: Rat,
    pub holds: bool,
    /// Some class had no surviving shell up to the cap.
    pub inconclusive: bool,
}

pub fn conjecture_report(g: &PlumbingGraph, cap: &Rat) -> Result<ConjectureReport> {
    let all = delta_all(g, cap)?;
    let gamma = gamma(g)?;
    let bound = -&gamma / ri(4) + rat(1, 2);
    let inconclusive = all.iter().any(|(_, r)| r.value.finite().is_none());
    let min_delta = all.iter().filter_map(|(_, r)| r.value.finite()).min().cloned();
    let minimizing_classes = all
        .iter()
        .filter(|(_, r)| r.value.finite() == min_delta.as_ref())
        .map(|(c, _)| c.clone())
        .collect();
    let holds = min_delta.as_ref().is_some_and(|m| m <= &bound);
    Ok(ConjectureReport { min_delta, minimizing_classes, bound, gamma, holds, inconclusive })
}

/// `delta_all` over several graphs concurrently, results in input order.
pub fn delta_all_many(
    graphs: &[PlumbingGraph],
    cap: Option<&Rat>,
) -> Vec<Result<Vec<(SpincClass, DeltaResult)>>> {
    graphs
        .par_iter()
        .map(|g| {
            let ctx = ZhatContext::new(g)?;
            let cap = match cap {
                Some(c) => c.clone(),
                None => ctx.default_cap()?,
            };
            ctx.delta_all(&cap)
        })
        .collect()
}

/// `2^{s_3}`, clearing the denominators of all `c̃_l`.
pub fn coefficient_scale(g: &PlumbingGraph) -> Rat {
    let mut r = Rat::one();
    for _ in g.nodes() {
        r *= ri(2);
    }
    r
}
