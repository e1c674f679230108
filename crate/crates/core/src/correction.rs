//! Correction terms `d_b = max_{k' ∈ [k]} (k'^2 + s)/4`.
//!
//! Writing `k' = k + 2Mn`, one gets `k'^2 = -4 (n - t)^T (-M) (n - t)` with
//! `t = -M^{-1}k/2`, so the maximum is a closest-vector problem for the tree
//! form `-M`. A feasible point bounds every coordinate of the minimizer
//! (`(n_v - t_v)^2 <= B (-M^{-1})_vv`), and on those finite boxes a form with
//! tree sparsity is minimized exactly by dynamic programming along the tree.

use num::{Integer, One, ToPrimitive};

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::invariants::require_negative_definite;
use crate::rational::{ceil, floor, ri, round_half_up, sqrt_floor, to_i64, Int, Rat};
use crate::spinc::{characteristic_vector, SpincClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DInvariant {
    pub value: Rat,
    /// A characteristic vector attaining the maximum.
    pub maximizer: Vec<i64>,
    /// The max formula is only known to compute `d` for almost rational
    /// graphs; this is set whenever the graph has more than one node.
    pub conjectural: bool,
}

pub fn d_invariant(g: &PlumbingGraph, b: &SpincClass) -> Result<DInvariant> {
    require_negative_definite(g)?;
    let s = g.s();
    let k0 = characteristic_vector(g, b);
    let inv = g.matrix().inverse()?;
    let k_rat: Vec<Rat> = k0.iter().map(|&x| ri(x)).collect();
    let c = inv.mul_vec(&k_rat)?;
    let t: Vec<Rat> = c.iter().map(|x| -x / ri(2)).collect();

    let scale = t.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let big_t: Vec<i128> = t
        .iter()
        .map(|x| to_i128(&(x.numer() * (&scale / x.denom()))))
        .collect::<Result<_>>()?;
    let dd = to_i128(&scale)?;
    let form = ScaledTreeForm { g, t: big_t, d: dd };

    let start = form.descend(t.iter().map(round_half_up).map(|x| to_i64(&x)).collect());
    let bound = Rat::new(Int::from(form.value(&start)), &scale * &scale);

    let neg_inv = inv.neg();
    let domains: Vec<Vec<i64>> = (0..s)
        .map(|v| {
            let radius2 = &bound * neg_inv.get(v, v);
            let r = sqrt_floor(&radius2) + 1;
            let lo = to_i64(&(floor(&t[v]) - &r));
            let hi = to_i64(&(ceil(&t[v]) + &r));
            (lo..=hi)
                .filter(|&x| {
                    let y = ri(x) - &t[v];
                    &y * &y <= radius2
                })
                .collect()
        })
        .collect();

    let (best_val, n) = form.tree_minimum(&domains);
    let q_min = Rat::new(Int::from(best_val), &scale * &scale);
    let value = ri(s as i64) / ri(4) - q_min;

    let m = g.matrix();
    let maximizer: Vec<i64> = (0..s)
        .map(|v| {
            let mn: i64 = (0..s).map(|w| to_i64(&m.get(v, w).to_integer()) * n[w]).sum();
            k0[v] + 2 * mn
        })
        .collect();
    debug_assert_eq!(
        (inv.quadratic_i64(&maximizer).unwrap() + ri(s as i64)) / ri(4),
        value
    );
    Ok(DInvariant { value, maximizer, conjectural: g.nodes().len() > 1 })
}

fn to_i128(x: &Int) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::ConstraintViolation(format!("{x} exceeds 128-bit range")))
}

/// `D^2 (n - t)^T (-M) (n - t)` in integers, with `T = D t`.
struct ScaledTreeForm<'g> {
    g: &'g PlumbingGraph,
    t: Vec<i128>,
    d: i128,
}

impl ScaledTreeForm<'_> {
    fn y(&self, v: usize, x: i64) -> i128 {
        self.d * x as i128 - self.t[v]
    }

    fn unary(&self, v: usize, x: i64) -> i128 {
        let y = self.y(v, x);
        -(self.g.weight(v) as i128) * y * y
    }

    /// Edge term `2 (-1) y_v y_w`.
    fn pair(&self, v: usize, x: i64, w: usize, xw: i64) -> i128 {
        -2 * self.y(v, x) * self.y(w, xw)
    }

    fn value(&self, n: &[i64]) -> i128 {
        let mut acc: i128 = (0..n.len()).map(|v| self.unary(v, n[v])).sum();
        for (v, w) in self.g.edges() {
            acc += self.pair(v, n[v], w, n[w]);
        }
        acc
    }

    /// Coordinate descent from `n`, each step moving one coordinate to its
    /// best integer value given the others.
    fn descend(&self, mut n: Vec<i64>) -> Vec<i64> {
        let s = n.len();
        for _ in 0..64 {
            let mut changed = false;
            for v in 0..s {
                // minimize a y^2 + 2 y Σ(-y_w) in y = D x - T_v
                let a = -(self.g.weight(v) as i128);
                let lin: i128 = self.g.neighbors(v).iter().map(|&w| -self.y(w, n[w])).sum();
                let target = Rat::new(
                    Int::from(self.t[v] * a - lin),
                    Int::from(a * self.d),
                );
                let cand = to_i64(&round_half_up(&target));
                let cost = |x: i64| {
                    let y = self.y(v, x);
                    a * y * y + 2 * y * lin
                };
                if cost(cand) < cost(n[v]) {
                    n[v] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        n
    }

    /// Exact minimum over the product of `domains`, by dynamic programming
    /// from the leaves toward vertex 0.
    fn tree_minimum(&self, domains: &[Vec<i64>]) -> (i128, Vec<i64>) {
        let s = domains.len();
        let mut order = Vec::with_capacity(s);
        let mut parent = vec![usize::MAX; s];
        let mut stack = vec![0usize];
        let mut seen = vec![false; s];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in self.g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
        // cost[v][i]: best value of the subtree at v with n_v = domains[v][i]
        let mut cost: Vec<Vec<i128>> = (0..s)
            .map(|v| domains[v].iter().map(|&x| self.unary(v, x)).collect())
            .collect();
        // choice[w][i]: best index of child w given its parent's index i
        let mut choice: Vec<Vec<usize>> = vec![Vec::new(); s];
        for &w in order.iter().rev() {
            let p = parent[w];
            if p == usize::MAX {
                continue;
            }
            let mut picks = Vec::with_capacity(domains[p].len());
            for (i, &xp) in domains[p].iter().enumerate() {
                let (best_j, best) = domains[w]
                    .iter()
                    .enumerate()
                    .map(|(j, &xw)| (j, cost[w][j] + self.pair(p, xp, w, xw)))
                    .min_by_key(|&(j, val)| (val, j))
                    .expect("domains are nonempty");
                cost[p][i] += best;
                picks.push(best_j);
            }
            choice[w] = picks;
        }
        let (root_i, &best) = cost[0]
            .iter()
            .enumerate()
            .min_by_key(|&(i, v)| (*v, i))
            .expect("root domain nonempty");
        let mut idx = vec![0usize; s];
        idx[0] = root_i;
        for &v in &order {
            if parent[v] != usize::MAX {
                idx[v] = choice[v][idx[parent[v]]];
            }
        }
        let n = (0..s).map(|v| domains[v][idx[v]]).collect();
        (best, n)
    }
}
