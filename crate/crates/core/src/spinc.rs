//! Spin^c structures as cosets `(2Z^s + δ) / 2MZ^s`.
//!
//! A class `[b]` is keyed by the residues of `U (b - δ)/2` modulo the diagonal of
//! a unimodular diagonalization `U M V = D`, which gives a stable hash and a
//! deterministic enumeration order of all `|det M|` classes.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use num::{Integer, Zero};

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::rational::{ri, round_half_up, to_i64, Int, Rat};
use crate::snf::{diagonalize, Diagonalization};

#[derive(Clone, Debug)]
pub(crate) struct SpincData {
    diag: Diagonalization,
    det: Int,
}

impl SpincData {
    pub(crate) fn new(g: &PlumbingGraph) -> Result<Self> {
        let m = g.matrix();
        let ints: Vec<Int> = m.entries().iter().map(|x| x.to_integer()).collect();
        let diag = diagonalize(&ints, g.s());
        let det = m.determinant().to_integer();
        Ok(SpincData { diag, det })
    }

    fn key(&self, x: &[Int]) -> Vec<Int> {
        self.diag
            .apply_u(x)
            .into_iter()
            .zip(&self.diag.diag)
            .map(|(r, d)| if d.is_zero() { r } else { r.mod_floor(d) })
            .collect()
    }
}

/// A spin^c structure, represented by some `b ∈ 2Z^s + δ`.
///
/// Equality, ordering and hashing go through the canonical key, so two
/// representatives of the same coset compare equal.
#[derive(Clone, Debug)]
pub struct SpincClass {
    rep: Vec<i64>,
    key: Vec<Int>,
}

impl SpincClass {
    pub fn representative(&self) -> &[i64] {
        &self.rep
    }

    pub fn key(&self) -> &[Int] {
        &self.key
    }
}

impl PartialEq for SpincClass {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for SpincClass {}

impl Hash for SpincClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for SpincClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpincClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

fn half_offset(g: &PlumbingGraph, b: &[i64]) -> Result<Vec<Int>> {
    if b.len() != g.s() {
        return Err(Error::DimensionMismatch { expected: g.s(), found: b.len() });
    }
    let delta = g.degrees();
    b.iter()
        .zip(&delta)
        .map(|(&bi, &di)| {
            if (bi - di).rem_euclid(2) != 0 {
                Err(Error::ConstraintViolation(format!(
                    "spin^c representative {b:?} is not congruent to the degree vector mod 2"
                )))
            } else {
                Ok(Int::from((bi - di) / 2))
            }
        })
        .collect()
}

/// The class of `b`; `b` must be congruent to the degree vector mod 2.
pub fn class_of(g: &PlumbingGraph, b: &[i64]) -> Result<SpincClass> {
    let x = half_offset(g, b)?;
    let key = g.spinc_data()?.key(&x);
    Ok(SpincClass { rep: b.to_vec(), key })
}

/// `2u - δ`.
pub fn canonical_vector(g: &PlumbingGraph) -> Vec<i64> {
    g.degrees().iter().map(|d| 2 - d).collect()
}

pub fn canonical_spinc(g: &PlumbingGraph) -> SpincClass {
    class_of(g, &canonical_vector(g)).expect("2u - δ is congruent to δ mod 2")
}

/// All `|det M|` classes, ordered by canonical key. Each representative is
/// reduced to `δ + 2x` with `x` in the fundamental domain of `M` around 0.
pub fn enumerate_spinc(g: &PlumbingGraph) -> Result<Vec<SpincClass>> {
    let data = g.spinc_data()?;
    if data.det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let inv = g.matrix().inverse()?;
    let delta = g.degrees();
    let diag = &data.diag.diag;
    let n = g.s();
    let mut residues = vec![Int::zero(); n];
    let mut out = Vec::new();
    loop {
        let x = data.diag.apply_u_inv(&residues);
        let x_red = reduce_mod_lattice(g, inv, &x)?;
        let rep: Vec<i64> = x_red.iter().zip(&delta).map(|(xi, d)| d + 2 * xi).collect();
        out.push(SpincClass { rep, key: residues.clone() });
        // mixed-radix increment, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                out.sort();
                return Ok(out);
            }
            i -= 1;
            residues[i] += 1;
            if residues[i] < diag[i] {
                break;
            }
            residues[i] = Int::zero();
        }
    }
}

fn reduce_mod_lattice(
    g: &PlumbingGraph,
    inv: &crate::matrix::ExactMatrix,
    x: &[Int],
) -> Result<Vec<i64>> {
    let xr: Vec<Rat> = x.iter().map(|v| Rat::from_integer(v.clone())).collect();
    let y = inv.mul_vec(&xr)?;
    let n: Vec<Rat> = y.iter().map(|v| Rat::from_integer(round_half_up(v))).collect();
    let mn = g.matrix().mul_vec(&n)?;
    Ok(xr.iter().zip(&mn).map(|(a, b)| to_i64(&(a - b).to_integer())).collect())
}

/// Whether `a` and `b` represent the same class: `M x = (a - b)/2` has an
/// integral solution.
pub fn same_class(g: &PlumbingGraph, a: &[i64], b: &[i64]) -> Result<bool> {
    half_offset(g, a)?;
    half_offset(g, b)?;
    let inv = g.matrix().inverse()?;
    let diff: Vec<Rat> = a.iter().zip(b).map(|(x, y)| ri((x - y) / 2)).collect();
    Ok(inv.mul_vec(&diff)?.iter().all(|v| v.is_integer()))
}

/// `[b] ↦ [-b]`.
pub fn conjugate(g: &PlumbingGraph, c: &SpincClass) -> SpincClass {
    let neg: Vec<i64> = c.rep.iter().map(|x| -x).collect();
    class_of(g, &neg).expect("negation preserves the parity condition")
}

/// Action of `h ∈ H_1 = Z^s / M Z^s`: `[b] ↦ [b + 2h]`.
pub fn act(g: &PlumbingGraph, c: &SpincClass, h: &[i64]) -> Result<SpincClass> {
    if h.len() != g.s() {
        return Err(Error::DimensionMismatch { expected: g.s(), found: h.len() });
    }
    let b: Vec<i64> = c.rep.iter().zip(h).map(|(x, y)| x + 2 * y).collect();
    class_of(g, &b)
}

/// Characteristic vector `k = b + M u` of the representative.
pub fn characteristic_vector(g: &PlumbingGraph, c: &SpincClass) -> Vec<i64> {
    let mu: Vec<i64> = (0..g.s())
        .map(|v| g.weight(v) + g.degree(v) as i64)
        .collect();
    c.rep.iter().zip(&mu).map(|(b, m)| b + m).collect()
}
