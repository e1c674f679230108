//! Dense exact matrices over the rationals.
//!
//! Plumbing matrices are small (a few dozen rows at most), so everything here is
//! plain dense elimination over `BigRational`, with a fraction-free (Bareiss)
//! determinant for integral input. Derived data is cached in write-once cells so
//! a matrix can be shared freely between threads.

use std::fmt;
use std::sync::OnceLock;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{from_int, ri, Int, Rat};

#[derive(Clone)]
pub struct ExactMatrix {
    n: usize,
    entries: Vec<Rat>,
    det: OnceLock<Rat>,
    inverse: OnceLock<Option<Box<ExactMatrix>>>,
    pivots: OnceLock<Vec<Rat>>,
}

impl PartialEq for ExactMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries == other.entries
    }
}

impl Eq for ExactMatrix {}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            l.entry(&row);
        }
        l.finish()
    }
}

impl ExactMatrix {
    pub fn from_rats(n: usize, entries: Vec<Rat>) -> Self {
        assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
        ExactMatrix {
            n,
            entries,
            det: OnceLock::new(),
            inverse: OnceLock::new(),
            pivots: OnceLock::new(),
        }
    }

    pub fn from_i64(n: usize, entries: &[i64]) -> Self {
        Self::from_rats(n, entries.iter().map(|&x| ri(x)).collect())
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_i64(n, &flat)
    }

    pub fn identity(n: usize) -> Self {
        let mut e = vec![Rat::zero(); n * n];
        for i in 0..n {
            e[i * n + i] = Rat::one();
        }
        Self::from_rats(n, e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    pub fn trace(&self) -> Rat {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn neg(&self) -> ExactMatrix {
        Self::from_rats(self.n, self.entries.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, c: &Rat) -> ExactMatrix {
        Self::from_rats(self.n, self.entries.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out = vec![Rat::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(Self::from_rats(n, out))
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
        }
        Ok((0..self.n)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect())
    }

    /// `v^T A v`.
    pub fn quadratic(&self, v: &[Rat]) -> Result<Rat> {
        let av = self.mul_vec(v)?;
        Ok(v.iter().zip(&av).map(|(a, b)| a * b).sum())
    }

    pub fn quadratic_i64(&self, v: &[i64]) -> Result<Rat> {
        let v: Vec<Rat> = v.iter().map(|&x| ri(x)).collect();
        self.quadratic(&v)
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn principal(&self, idx: &[usize]) -> ExactMatrix {
        let k = idx.len();
        let mut e = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                e.push(self.get(i, j).clone());
            }
        }
        Self::from_rats(k, e)
    }

    /// Rectangular block `rows x cols`, row-major.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Rat> {
        let mut e = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                e.push(self.get(i, j).clone());
            }
        }
        e
    }

    pub fn determinant(&self) -> &Rat {
        self.det.get_or_init(|| {
            if self.is_integral() {
                from_int(&bareiss_det(self))
            } else {
                gaussian_det(self)
            }
        })
    }

    pub fn inverse(&self) -> Result<&ExactMatrix> {
        self.inverse
            .get_or_init(|| gauss_jordan_inverse(self).map(Box::new))
            .as_deref()
            .ok_or(Error::SingularMatrix)
    }

    /// `det(A) * A^{-1}`; integral whenever `A` is.
    pub fn adjugate(&self) -> Result<ExactMatrix> {
        let inv = self.inverse()?;
        Ok(inv.scale(self.determinant()))
    }

    /// Integer adjugate entries (row-major) of an integral matrix.
    pub fn adjugate_int(&self) -> Result<Vec<Int>> {
        let adj = self.adjugate()?;
        adj.entries
            .iter()
            .map(|x| {
                if x.is_integer() {
                    Ok(x.to_integer())
                } else {
                    Err(Error::ConstraintViolation("adjugate of a non-integral matrix".into()))
                }
            })
            .collect()
    }

    /// Pivots of symmetric elimination in the natural order. Stops right after
    /// the first zero pivot, so a short (or zero-terminated) list means the
    /// leading minors degenerate.
    pub fn ldl_pivots(&self) -> &[Rat] {
        self.pivots.get_or_init(|| {
            let n = self.n;
            let mut a = self.entries.clone();
            let mut pivots = Vec::with_capacity(n);
            for k in 0..n {
                let p = a[k * n + k].clone();
                pivots.push(p.clone());
                if p.is_zero() {
                    break;
                }
                for i in k + 1..n {
                    let f = &a[i * n + k] / &p;
                    if f.is_zero() {
                        continue;
                    }
                    for j in k + 1..n {
                        let t = &f * &a[k * n + j];
                        if !t.is_zero() {
                            a[i * n + j] -= t;
                        }
                    }
                }
            }
            pivots
        })
    }

    pub fn is_negative_definite(&self) -> bool {
        let p = self.ldl_pivots();
        self.is_symmetric() && p.len() == self.n && p.iter().all(|x| x.is_negative())
    }

    pub fn is_positive_definite(&self) -> bool {
        let p = self.ldl_pivots();
        self.is_symmetric() && p.len() == self.n && p.iter().all(|x| x.is_positive())
    }

    /// `A = U^T diag(d) U` with `U` unit upper triangular (row-major), for
    /// positive definite `A`.
    pub fn ldl_upper(&self) -> Result<(Vec<Rat>, Vec<Rat>)> {
        let n = self.n;
        let mut d: Vec<Rat> = Vec::with_capacity(n);
        let mut u = vec![Rat::zero(); n * n];
        for i in 0..n {
            u[i * n + i] = Rat::one();
        }
        for i in 0..n {
            let mut di = self.get(i, i).clone();
            for k in 0..i {
                let uki = &u[k * n + i];
                if !uki.is_zero() {
                    di -= uki * uki * &d[k];
                }
            }
            if !di.is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
            for j in i + 1..n {
                let mut v = self.get(i, j).clone();
                for k in 0..i {
                    let (uki, ukj) = (&u[k * n + i], &u[k * n + j]);
                    if !uki.is_zero() && !ukj.is_zero() {
                        v -= uki * ukj * &d[k];
                    }
                }
                u[i * n + j] = v / &di;
            }
            d.push(di);
        }
        Ok((d, u))
    }

    /// Solves `A x = b` exactly.
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>> {
        self.inverse()?.mul_vec(b)
    }
}

/// Fraction-free determinant with row pivoting.
fn bareiss_det(m: &ExactMatrix) -> Int {
    let n = m.n;
    if n == 0 {
        return Int::one();
    }
    let mut a: Vec<Int> = m.entries.iter().map(|x| x.to_integer()).collect();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n {
        if a[k * n + k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                return Int::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * prev
}

fn gaussian_det(m: &ExactMatrix) -> Rat {
    let n = m.n;
    let mut a = m.entries.clone();
    let mut det = Rat::one();
    for k in 0..n {
        let Some(r) = (k..n).find(|&r| !a[r * n + k].is_zero()) else {
            return Rat::zero();
        };
        if r != k {
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
            }
            det = -det;
        }
        let p = a[k * n + k].clone();
        det *= &p;
        for i in k + 1..n {
            let f = &a[i * n + k] / &p;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &f * &a[k * n + j];
                a[i * n + j] -= t;
            }
        }
    }
    det
}

fn gauss_jordan_inverse(m: &ExactMatrix) -> Option<ExactMatrix> {
    let n = m.n;
    let mut a = m.entries.clone();
    let mut inv = ExactMatrix::identity(n).entries;
    for k in 0..n {
        let r = (k..n).find(|&r| !a[r * n + k].is_zero())?;
        if r != k {
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
                inv.swap(k * n + j, r * n + j);
            }
        }
        let p = a[k * n + k].clone();
        for j in 0..n {
            if !a[k * n + j].is_zero() {
                a[k * n + j] /= &p;
            }
            if !inv[k * n + j].is_zero() {
                inv[k * n + j] /= &p;
            }
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[i * n + k].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                if !a[k * n + j].is_zero() {
                    let t = &f * &a[k * n + j];
                    a[i * n + j] -= t;
                }
                if !inv[k * n + j].is_zero() {
                    let t = &f * &inv[k * n + j];
                    inv[i * n + j] -= t;
                }
            }
        }
    }
    Some(ExactMatrix::from_rats(n, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn two_by_two_inverse() {
        let m = ExactMatrix::from_rows(&[vec![-2, 1], vec![1, -3]]);
        assert_eq!(m.determinant(), &ri(5));
        let inv = m.inverse().unwrap();
        let expected = ExactMatrix::from_rats(
            2,
            vec![rat(-3, 5), rat(-1, 5), rat(-1, 5), rat(-2, 5)],
        );
        assert_eq!(inv, &expected);
        assert_eq!(m.mul(inv).unwrap(), ExactMatrix::identity(2));
    }

    #[test]
    fn singular_inverse_errors() {
        let m = ExactMatrix::from_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.determinant(), &ri(0));
        assert_eq!(m.inverse().unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn indefinite_chain_pivots() {
        let m = ExactMatrix::from_rows(&[vec![-2, 1, 0], vec![1, 0, 1], vec![0, 1, -3]]);
        assert!(!m.is_negative_definite());
        let p = m.ldl_pivots();
        assert_eq!(p, &[ri(-2), rat(1, 2), ri(-5)]);
        assert_eq!(m.determinant(), &ri(5));

        let degenerate = ExactMatrix::from_rows(&[vec![0, 1], vec![1, -2]]);
        assert_eq!(degenerate.ldl_pivots(), &[ri(0)]);
        assert!(!degenerate.is_negative_definite());
    }

    #[test]
    fn bareiss_matches_gaussian() {
        let m = ExactMatrix::from_rows(&[
            vec![0, 1, 2, 0],
            vec![1, -3, 0, 4],
            vec![2, 0, 5, 1],
            vec![0, 4, 1, -6],
        ]);
        assert_eq!(m.determinant(), &gaussian_det(&m));
        let adj = m.adjugate_int().unwrap();
        // det * I = M * adj
        let adj_m = ExactMatrix::from_rats(4, adj.iter().map(from_int).collect());
        assert_eq!(m.mul(&adj_m).unwrap(), ExactMatrix::identity(4).scale(m.determinant()));
    }

    #[test]
    fn ldl_reconstructs() {
        let m = ExactMatrix::from_rows(&[vec![4, 2, 1], vec![2, 5, 3], vec![1, 3, 6]]);
        let (d, u) = m.ldl_upper().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: Rat = (0..3).map(|k| &u[k * 3 + i] * &d[k] * &u[k * 3 + j]).sum();
                assert_eq!(&v, m.get(i, j));
            }
        }
        let prod: Rat = d.iter().product();
        assert_eq!(&prod, m.determinant());
    }
}
