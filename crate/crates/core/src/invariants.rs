//! Quadratic form `-l^2`, definiteness checks and `γ` of a plumbing.

use num::Signed;

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::matrix::ExactMatrix;
use crate::rational::{ri, Int, Rat};
use crate::spinc::canonical_vector;

/// `-l^T M^{-1} l`, positive on nonzero `l` when `M` is negative definite.
pub fn quadratic_form(m: &ExactMatrix, l: &[i64]) -> Result<Rat> {
    if l.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: l.len() });
    }
    Ok(-m.inverse()?.quadratic_i64(l)?)
}

/// `-M^{-1}`, the positive definite form behind every exponent computation.
pub fn norm_form(g: &PlumbingGraph) -> Result<ExactMatrix> {
    Ok(g.matrix().inverse()?.neg())
}

pub fn is_negative_definite(g: &PlumbingGraph) -> bool {
    g.matrix().is_negative_definite()
}

/// The node block of `M^{-1}` is negative definite (vacuous without nodes).
pub fn is_weakly_negative_definite(g: &PlumbingGraph) -> Result<bool> {
    let inv = g.matrix().inverse()?;
    let nodes = g.nodes();
    if nodes.is_empty() {
        return Ok(true);
    }
    Ok(inv.principal(&nodes).is_negative_definite())
}

pub fn det(g: &PlumbingGraph) -> Int {
    g.matrix().determinant().to_integer()
}

/// `|H_1| = |det M|`.
pub fn order_h(g: &PlumbingGraph) -> Int {
    det(g).abs()
}

pub fn require_negative_definite(g: &PlumbingGraph) -> Result<()> {
    if is_negative_definite(g) {
        Ok(())
    } else {
        Err(Error::NotNegativeDefinite)
    }
}

/// `γ = 3s + Tr M + 2 + (2u - δ)^T M^{-1} (2u - δ)`.
pub fn gamma(g: &PlumbingGraph) -> Result<Rat> {
    require_negative_definite(g)?;
    let k = canonical_vector(g);
    let sq = g.matrix().inverse()?.quadratic_i64(&k)?;
    Ok(ri(3 * g.s() as i64 + g.trace() + 2) + sq)
}
