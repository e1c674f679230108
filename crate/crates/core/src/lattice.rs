//! Exact enumeration of integer points in an ellipsoid `(x - c)^T F (x - c) <= B`
//! with per-coordinate constraints, by Fincke–Pohst style recursive bounding on
//! an exact `U^T D U` factorization of `F`.
//!
//! Fixed coordinates are eliminated up front (they only shift the center and
//! add a constant), so searches over C̃ only branch on leaves and nodes.

use num::{Integer, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::rational::{ceil, floor, ri, sqrt_floor, to_i64, Int, Rat};

/// Admissible values of one coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissible {
    Any,
    Fixed(i64),
    /// Finite set of allowed values.
    Set(Vec<i64>),
    /// `x ≡ parity (mod 2)` and `|x| >= min_abs`.
    ParityMin { parity: i64, min_abs: i64 },
}

impl Admissible {
    pub fn allows(&self, x: i64) -> bool {
        match self {
            Admissible::Any => true,
            Admissible::Fixed(v) => x == *v,
            Admissible::Set(s) => s.contains(&x),
            Admissible::ParityMin { parity, min_abs } => {
                (x - parity).rem_euclid(2) == 0 && x.abs() >= *min_abs
            }
        }
    }
}

/// Membership test for `target + L Z^n`, with `L` a nonsingular integer matrix.
#[derive(Clone, Debug)]
pub struct CosetFilter {
    target: Vec<i64>,
    adj: Vec<Int>,
    det: Int,
}

impl CosetFilter {
    pub fn new(target: Vec<i64>, lattice: &ExactMatrix) -> Result<Self> {
        if target.len() != lattice.dim() {
            return Err(Error::DimensionMismatch { expected: lattice.dim(), found: target.len() });
        }
        let det = lattice.determinant().to_integer();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let adj = lattice.adjugate_int()?;
        Ok(CosetFilter { target, adj, det })
    }

    pub fn contains(&self, l: &[i64]) -> bool {
        let n = self.target.len();
        let diff: Vec<i64> = l.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        (0..n).all(|i| {
            let mut acc = Int::zero();
            for (j, d) in diff.iter().enumerate() {
                if *d != 0 {
                    acc += &self.adj[i * n + j] * Int::from(*d);
                }
            }
            acc.is_multiple_of(&self.det)
        })
    }
}

#[derive(Clone, Debug)]
pub struct LatticeBallQuery {
    /// Positive definite form `F`.
    pub form: ExactMatrix,
    pub bound: Rat,
    pub constraints: Vec<Admissible>,
    pub center: Option<Vec<Rat>>,
    pub coset: Option<CosetFilter>,
    /// Upper limit on visited search nodes; exceeding it is `CapExceeded`.
    pub node_budget: Option<usize>,
}

impl LatticeBallQuery {
    pub fn new(form: ExactMatrix, bound: Rat) -> Self {
        let n = form.dim();
        LatticeBallQuery {
            form,
            bound,
            constraints: vec![Admissible::Any; n],
            center: None,
            coset: None,
            node_budget: None,
        }
    }

    pub fn with_constraints(mut self, c: Vec<Admissible>) -> Self {
        self.constraints = c;
        self
    }

    pub fn with_center(mut self, c: Vec<Rat>) -> Self {
        self.center = Some(c);
        self
    }

    pub fn with_coset(mut self, f: CosetFilter) -> Self {
        self.coset = Some(f);
        self
    }

    pub fn with_budget(mut self, nodes: usize) -> Self {
        self.node_budget = Some(nodes);
        self
    }
}

/// A prepared search: the form restricted to the free coordinates, factored,
/// with the contribution of fixed coordinates folded into center and constant.
pub struct BallSearch {
    n: usize,
    free: Vec<usize>,
    base: Vec<i64>,
    constraints: Vec<Admissible>,
    center: Vec<Rat>,
    constant: Rat,
    d: Vec<Rat>,
    u: Vec<Rat>,
    budget: Option<usize>,
}

impl BallSearch {
    pub fn new(
        form: &ExactMatrix,
        constraints: &[Admissible],
        center: Option<&[Rat]>,
        budget: Option<usize>,
    ) -> Result<Self> {
        let n = form.dim();
        if constraints.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: constraints.len() });
        }
        if !form.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let c: Vec<Rat> = match center {
            Some(c) if c.len() != n => {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() })
            }
            Some(c) => c.to_vec(),
            None => vec![Rat::zero(); n],
        };
        let mut free = Vec::new();
        let mut fixed = Vec::new();
        let mut base = vec![0i64; n];
        for (i, a) in constraints.iter().enumerate() {
            match a {
                Admissible::Fixed(v) => {
                    base[i] = *v;
                    fixed.push(i);
                }
                _ => free.push(i),
            }
        }
        let z: Vec<Rat> = fixed.iter().map(|&i| ri(base[i]) - &c[i]).collect();
        let f_rr = form.principal(&free);
        let f_rx = form.block(&free, &fixed);
        let k = free.len();
        let mut center_free: Vec<Rat> = free.iter().map(|&i| c[i].clone()).collect();
        let mut constant = form.principal(&fixed).quadratic(&z)?;
        if k > 0 && !fixed.is_empty() {
            // y' = y + F_rr^{-1} F_rx z shifts the center by -F_rr^{-1} F_rx z
            let w: Vec<Rat> = (0..k)
                .map(|i| (0..fixed.len()).map(|j| &f_rx[i * fixed.len() + j] * &z[j]).sum())
                .collect();
            let shift = f_rr.solve(&w)?;
            for (ci, s) in center_free.iter_mut().zip(&shift) {
                *ci -= s;
            }
            let cross: Rat = w.iter().zip(&shift).map(|(a, b)| a * b).sum();
            constant -= cross;
        }
        let (d, u) = if k > 0 { f_rr.ldl_upper()? } else { (Vec::new(), Vec::new()) };
        Ok(BallSearch {
            n,
            free,
            base,
            constraints: constraints.to_vec(),
            center: center_free,
            constant,
            d,
            u,
            budget,
        })
    }

    /// Value of the form at the point where all free coordinates equal the center.
    pub fn constant(&self) -> &Rat {
        &self.constant
    }

    /// Visits every admissible point with value `<= bound`. The visitor returns
    /// the bound to use from then on, which lets minimization shrink the radius.
    pub fn walk<F>(&self, bound: Rat, mut visit: F) -> Result<()>
    where
        F: FnMut(&[i64], &Rat) -> Rat,
    {
        if bound < self.constant {
            return Ok(());
        }
        let mut state = WalkState {
            x: self.base.clone(),
            y: vec![Rat::zero(); self.free.len()],
            bound,
            nodes: 0,
        };
        if self.free.is_empty() {
            let c = self.constant.clone();
            visit(&state.x, &c);
            return Ok(());
        }
        let start = self.constant.clone();
        self.descend(self.free.len(), start, &mut state, &mut visit)
    }

    fn descend<F>(&self, level: usize, partial: Rat, st: &mut WalkState, visit: &mut F) -> Result<()>
    where
        F: FnMut(&[i64], &Rat) -> Rat,
    {
        let k = self.free.len();
        let i = level - 1;
        st.nodes += 1;
        if let Some(b) = self.budget {
            if st.nodes > b {
                return Err(Error::CapExceeded(b));
            }
        }
        // μ_i = c_i - Σ_{j>i} u_ij y_j
        let mut mu = self.center[i].clone();
        for j in i + 1..k {
            let uij = &self.u[i * k + j];
            if !uij.is_zero() && !st.y[j].is_zero() {
                mu -= uij * &st.y[j];
            }
        }
        let budget = &st.bound - &partial;
        if budget.is_negative() {
            return Ok(());
        }
        let di = &self.d[i];
        let r = sqrt_floor(&(&budget / di)) + 1;
        let lo = to_i64(&(floor(&mu) - &r));
        let hi = to_i64(&(ceil(&mu) + &r));
        let vi = self.free[i];
        for xv in candidates(&self.constraints[vi], lo, hi) {
            let t = ri(xv) - &mu;
            let val = &partial + di * &t * &t;
            if val > st.bound {
                continue;
            }
            st.x[vi] = xv;
            st.y[i] = ri(xv) - &self.center[i];
            if i == 0 {
                let nb = visit(&st.x, &val);
                st.bound = nb;
            } else {
                self.descend(i, val, st, visit)?;
            }
        }
        st.y[i] = Rat::zero();
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

struct WalkState {
    x: Vec<i64>,
    y: Vec<Rat>,
    bound: Rat,
    nodes: usize,
}

fn candidates(a: &Admissible, lo: i64, hi: i64) -> Vec<i64> {
    match a {
        Admissible::Any => (lo..=hi).collect(),
        Admissible::Fixed(v) => {
            if (lo..=hi).contains(v) {
                vec![*v]
            } else {
                Vec::new()
            }
        }
        Admissible::Set(s) => {
            let mut v: Vec<i64> = s.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
        Admissible::ParityMin { .. } => {
            let start = if (lo - first_parity(a)).rem_euclid(2) == 0 { lo } else { lo + 1 };
            (start..=hi).step_by(2).filter(|&x| a.allows(x)).collect()
        }
    }
}

fn first_parity(a: &Admissible) -> i64 {
    match a {
        Admissible::ParityMin { parity, .. } => *parity,
        _ => 0,
    }
}

/// All admissible points with value `<= bound`, sorted by (value, lex).
pub fn enumerate_ball(q: &LatticeBallQuery) -> Result<Vec<(Vec<i64>, Rat)>> {
    if q.bound.is_negative() {
        return Ok(Vec::new());
    }
    let search = BallSearch::new(&q.form, &q.constraints, q.center.as_deref(), q.node_budget)?;
    let mut out = Vec::new();
    let bound = q.bound.clone();
    search.walk(bound.clone(), |x, v| {
        if q.coset.as_ref().is_none_or(|f| f.contains(x)) {
            out.push((x.to_vec(), v.clone()));
        }
        bound.clone()
    })?;
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Minimum of the form over admissible points (optionally in a coset), with
/// all minimizers, or `None` if nothing lies within `bound`.
pub fn minimize(
    form: &ExactMatrix,
    constraints: &[Admissible],
    center: Option<&[Rat]>,
    coset: Option<&CosetFilter>,
    bound: Rat,
    budget: Option<usize>,
) -> Result<Option<(Rat, Vec<Vec<i64>>)>> {
    let search = BallSearch::new(form, constraints, center, budget)?;
    let mut best: Option<(Rat, Vec<Vec<i64>>)> = None;
    search.walk(bound.clone(), |x, v| {
        if coset.is_some_and(|f| !f.contains(x)) {
            return best.as_ref().map_or(bound.clone(), |b| b.0.clone());
        }
        match &mut best {
            Some((bv, pts)) if *bv == *v => pts.push(x.to_vec()),
            Some((bv, _)) if *bv < *v => {}
            _ => best = Some((v.clone(), vec![x.to_vec()])),
        }
        best.as_ref().unwrap().0.clone()
    })?;
    if let Some((_, pts)) = &mut best {
        pts.sort();
    }
    Ok(best)
}

/// Rational value of `(x - c)^T F (x - c)`.
pub fn form_value(form: &ExactMatrix, x: &[i64], center: Option<&[Rat]>) -> Result<Rat> {
    let v: Vec<Rat> = match center {
        Some(c) => x.iter().zip(c).map(|(a, b)| ri(*a) - b).collect(),
        None => x.iter().map(|a| ri(*a)).collect(),
    };
    form.quadratic(&v)
}

/// Exact lower bound on the smallest eigenvalue-like constant `λ` with
/// `F(x) >= λ |x|_∞^2`, used to size brute-force boxes: `1 / max_i (F^{-1})_ii`.
pub fn box_radius(form: &ExactMatrix, bound: &Rat) -> Result<i64> {
    let inv = form.inverse()?;
    let mut worst = Rat::zero();
    for i in 0..form.dim() {
        if *inv.get(i, i) > worst {
            worst = inv.get(i, i).clone();
        }
    }
    Ok(to_i64(&(sqrt_floor(&(bound * &worst)) + 1)))
}
