//! Diagonal reduction of integer matrices by unimodular row and column moves.
//!
//! Only the row transform is tracked: for `U A V = D` we keep `U` and `U^{-1}`,
//! which is what identifying `Z^n / A Z^n` with `⊕ Z/d_i` needs.

use num::{Integer, One, Signed, Zero};

use crate::rational::Int;

#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub n: usize,
    /// Nonnegative diagonal of `U A V`.
    pub diag: Vec<Int>,
    /// Row transform `U`, row-major.
    pub u: Vec<Int>,
    /// `U^{-1}`, row-major.
    pub u_inv: Vec<Int>,
}

impl Diagonalization {
    /// `U x`.
    pub fn apply_u(&self, x: &[Int]) -> Vec<Int> {
        mat_vec(&self.u, self.n, x)
    }

    pub fn apply_u_inv(&self, x: &[Int]) -> Vec<Int> {
        mat_vec(&self.u_inv, self.n, x)
    }

    /// Product of the diagonal, i.e. the order of the cokernel (0 if infinite).
    pub fn order(&self) -> Int {
        self.diag.iter().product()
    }
}

fn mat_vec(m: &[Int], n: usize, x: &[Int]) -> Vec<Int> {
    (0..n)
        .map(|i| (0..n).map(|j| &m[i * n + j] * &x[j]).sum())
        .collect()
}

pub fn diagonalize(a: &[Int], n: usize) -> Diagonalization {
    let mut a = a.to_vec();
    let mut u = identity(n);
    let mut u_inv = identity(n);

    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let v = &a[i * n + j];
                    if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < a[bi * n + bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            if pi != t {
                swap_rows(&mut a, n, pi, t);
                swap_rows(&mut u, n, pi, t);
                swap_cols(&mut u_inv, n, pi, t);
            }
            if pj != t {
                swap_cols(&mut a, n, pj, t);
            }
            let p = a[t * n + t].clone();
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i * n + t].div_floor(&p);
                if !q.is_zero() {
                    // row_i -= q row_t
                    for j in 0..n {
                        let d = &q * &a[t * n + j];
                        a[i * n + j] -= d;
                        let d = &q * &u[t * n + j];
                        u[i * n + j] -= d;
                    }
                    // inverse: col_t += q col_i
                    for r in 0..n {
                        let d = &q * &u_inv[r * n + i];
                        u_inv[r * n + t] += d;
                    }
                }
                if !a[i * n + t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[t * n + j].div_floor(&p);
                if !q.is_zero() {
                    for r in 0..n {
                        let d = &q * &a[r * n + t];
                        a[r * n + j] -= d;
                    }
                }
                if !a[t * n + j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[t * n + t].is_negative() {
            for j in 0..n {
                a[t * n + j] = -a[t * n + j].clone();
                u[t * n + j] = -u[t * n + j].clone();
            }
            for r in 0..n {
                u_inv[r * n + t] = -u_inv[r * n + t].clone();
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].clone()).collect();
    Diagonalization { n, diag, u, u_inv }
}

/// Integer solutions of `A n = r` for an `m × k` matrix `A` of full row rank,
/// from a column Hermite reduction `A V = [H | 0]` with `V` unimodular.
#[derive(Clone, Debug)]
pub struct IntegerSolver {
    m: usize,
    k: usize,
    /// Lower triangular `m × m` block `H`, row-major.
    h: Vec<Int>,
    /// `V`, row-major `k × k`.
    v: Vec<Int>,
}

impl IntegerSolver {
    pub fn new(a: &[Int], m: usize, k: usize) -> Option<Self> {
        assert_eq!(a.len(), m * k);
        let mut a = a.to_vec();
        let mut v = vec![Int::zero(); k * k];
        for i in 0..k {
            v[i * k + i] = Int::one();
        }
        // column ops on both a (m × k) and v (k × k)
        let col_op = |mat: &mut Vec<Int>, rows: usize, c1: usize, c2: usize, t: [&Int; 4]| {
            // (c1, c2) <- (t0 c1 + t1 c2, t2 c1 + t3 c2)
            for r in 0..rows {
                let x = mat[r * k + c1].clone();
                let y = mat[r * k + c2].clone();
                mat[r * k + c1] = t[0] * &x + t[1] * &y;
                mat[r * k + c2] = t[2] * &x + t[3] * &y;
            }
        };
        for i in 0..m {
            for j in i + 1..k {
                if a[i * k + j].is_zero() {
                    continue;
                }
                let p = a[i * k + i].clone();
                let q = a[i * k + j].clone();
                let e = p.extended_gcd(&q);
                // [p q] [[x, -q/g], [y, p/g]] = [g 0]
                let (qg, pg) = (-(&q / &e.gcd), &p / &e.gcd);
                let t = [&e.x, &e.y, &qg, &pg];
                col_op(&mut a, m, i, j, t);
                col_op(&mut v, k, i, j, t);
            }
            if a[i * k + i].is_zero() {
                return None;
            }
        }
        let h = (0..m).flat_map(|r| (0..m).map(move |c| (r, c))).map(|(r, c)| a[r * k + c].clone()).collect();
        Some(IntegerSolver { m, k, h, v })
    }

    /// Some integer `n` with `A n = r`, or `None` if there is none.
    pub fn solve(&self, r: &[Int]) -> Option<Vec<Int>> {
        let (m, k) = (self.m, self.k);
        let mut z = vec![Int::zero(); k];
        for i in 0..m {
            let mut rest = r[i].clone();
            for (j, zj) in z.iter().enumerate().take(i) {
                rest -= &self.h[i * m + j] * zj;
            }
            let (q, rem) = rest.div_rem(&self.h[i * m + i]);
            if !rem.is_zero() {
                return None;
            }
            z[i] = q;
        }
        Some((0..k).map(|i| (0..k).map(|j| &self.v[i * k + j] * &z[j]).sum()).collect())
    }

    /// Basis of the integer kernel of `A`, one vector per entry.
    pub fn kernel(&self) -> Vec<Vec<Int>> {
        let k = self.k;
        (self.m..k).map(|c| (0..k).map(|r| self.v[r * k + c].clone()).collect()).collect()
    }
}

fn identity(n: usize) -> Vec<Int> {
    let mut m = vec![Int::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = Int::one();
    }
    m
}

fn swap_rows(m: &mut [Int], n: usize, a: usize, b: usize) {
    for j in 0..n {
        m.swap(a * n + j, b * n + j);
    }
}

fn swap_cols(m: &mut [Int], n: usize, a: usize, b: usize) {
    for i in 0..n {
        m.swap(i * n + a, i * n + b);
    }
}
