//! Splice diagrams of plumbing trees, the product formula for `M^{-1}`, and
//! the quadratic form of H-shaped diagrams with its rounding heuristic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::invariants::require_negative_definite;
use crate::rational::{floor, ri, Int, Rat};

/// One edge of the diagram: a maximal string of degree-2 vertices between
/// two vertices of degree `!= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpliceEdge {
    pub ends: (usize, usize),
    /// Interior degree-2 vertices, ordered from `ends.0` to `ends.1`.
    pub string: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SpliceDiagram {
    /// Plumbing vertices of degree `!= 2`.
    pub vertices: Vec<usize>,
    pub edges: Vec<SpliceEdge>,
    /// `(node, first plumbing vertex of the edge) -> det(-M(Γ_ve))`.
    pub weights: BTreeMap<(usize, usize), Int>,
    pub det: Int,
    /// No vertex of degree >= 3.
    pub degenerate: bool,
}

impl SpliceDiagram {
    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Weights at a node, keyed by the neighbor opening each edge.
    pub fn weights_at(&self, node: usize) -> Vec<(usize, Int)> {
        self.weights
            .range((node, 0)..=(node, usize::MAX))
            .map(|((_, e), w)| (*e, w.clone()))
            .collect()
    }
}

pub fn splice_diagram(g: &PlumbingGraph) -> Result<SpliceDiagram> {
    require_negative_definite(g)?;
    let vertices: Vec<usize> = (0..g.s()).filter(|&v| g.degree(v) != 2).collect();
    let mut edges = Vec::new();
    let mut weights = BTreeMap::new();
    for &v in &vertices {
        for &e in g.neighbors(v) {
            if g.is_node(v) {
                let comp = g.component_avoiding(e, &[v]);
                weights.insert((v, e), g.neg_det_of(&comp).to_integer());
            }
            let (end, string) = walk_string(g, v, e);
            if v < end {
                edges.push(SpliceEdge { ends: (v, end), string });
            }
        }
    }
    edges.sort_by_key(|e| e.ends);
    let det = g.matrix().neg().determinant().to_integer();
    let degenerate = g.nodes().is_empty();
    Ok(SpliceDiagram { vertices, edges, weights, det, degenerate })
}

/// Follows degree-2 vertices from `start` through `first` to the next vertex
/// of degree `!= 2`.
fn walk_string(g: &PlumbingGraph, start: usize, first: usize) -> (usize, Vec<usize>) {
    let mut prev = start;
    let mut cur = first;
    let mut string = Vec::new();
    while g.degree(cur) == 2 {
        string.push(cur);
        let next = g.neighbors(cur).iter().copied().find(|&w| w != prev).expect("degree 2");
        prev = cur;
        cur = next;
    }
    (cur, string)
}

/// `N_{vv'}`: product of the weights at nodes of the path that sit on edges
/// adjacent to, but not on, the path.
pub fn splice_product(g: &PlumbingGraph, sd: &SpliceDiagram, v: usize, w: usize) -> Result<Int> {
    for x in [v, w] {
        if !sd.contains(x) {
            return Err(Error::VertexNotInDiagram(g.id(x).to_string()));
        }
    }
    if v == w && !g.is_node(v) {
        return Err(Error::ConstraintViolation(format!(
            "diagonal entry at non-node {} is not a splice product",
            g.id(v)
        )));
    }
    let path = g.path(v, w);
    let mut n = Int::from(1);
    for (i, &x) in path.iter().enumerate() {
        if !g.is_node(x) {
            continue;
        }
        let on_path = |y: usize| {
            (i > 0 && path[i - 1] == y) || (i + 1 < path.len() && path[i + 1] == y)
        };
        for (e, wt) in sd.weights_at(x) {
            if !on_path(e) {
                n *= wt;
            }
        }
    }
    Ok(n)
}

/// `M^{-1}_{vw} = -N_{vw} / det(-M)`, falling back to the path determinant
/// formula where the product form does not apply.
pub fn inverse_entry_via_splice(g: &PlumbingGraph, sd: &SpliceDiagram, v: usize, w: usize) -> Result<Rat> {
    match splice_product(g, sd, v, w) {
        Ok(n) => Ok(-Rat::new(n, sd.det.clone())),
        Err(Error::VertexNotInDiagram(_)) | Err(Error::ConstraintViolation(_)) => {
            inverse_entry_path(g, v, w)
        }
        Err(e) => Err(e),
    }
}

/// `M^{-1}_{uv} = -det(-M(Γ \ p_uv)) / det(-M)`, valid for every pair.
pub fn inverse_entry_path(g: &PlumbingGraph, u: usize, v: usize) -> Result<Rat> {
    let det = g.matrix().neg().determinant().clone();
    if det == ri(0) {
        return Err(Error::SingularMatrix);
    }
    let path = g.path(u, v);
    let rest: Vec<usize> = (0..g.s()).filter(|x| !path.contains(x)).collect();
    Ok(-g.neg_det_of(&rest) / det)
}

/// Weights of an H-shaped diagram: at the node `n`, `a1` and `a2` toward the
/// leaves `x1`, `x2` and `a3` toward the other node `n'`; primed values mirror this.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HShapeWeights {
    pub a: [i64; 3],
    pub a_prime: [i64; 3],
    /// `det(-M)` of the source plumbing.
    pub det: i64,
    /// `-Σ_{leaves} M^{-1}_{vv}`.
    pub c: Rat,
}

/// An H-shaped plumbing with the vertices carrying the six coordinates
/// `(x1, x2, x3, x1', x2', x3')`, where `x3`, `x3'` sit on the nodes.
#[derive(Clone, Debug)]
pub struct HShape {
    pub weights: HShapeWeights,
    pub vertices: [usize; 6],
    pub s: usize,
}

impl HShape {
    pub fn from_graph(g: &PlumbingGraph) -> Result<Self> {
        require_negative_definite(g)?;
        let nodes = g.nodes();
        if nodes.len() != 2 || nodes.iter().any(|&n| g.degree(n) != 3) {
            return Err(Error::ConstraintViolation(
                "an H-shaped graph has exactly two nodes, both of degree 3".into(),
            ));
        }
        let sd = splice_diagram(g)?;
        let inv = g.matrix().inverse()?;
        let mut halves = Vec::new();
        for (i, &n) in nodes.iter().enumerate() {
            let other = nodes[1 - i];
            let mut legs = Vec::new();
            let mut toward = None;
            for (e, w) in sd.weights_at(n) {
                let (end, _) = walk_string(g, n, e);
                let w = i64::try_from(&w).expect("weight fits i64");
                if end == other {
                    toward = Some(w);
                } else {
                    legs.push((w, end));
                }
            }
            let a3 = toward.expect("nodes are joined by a string");
            halves.push(([legs[0].0, legs[1].0, a3], [legs[0].1, legs[1].1, n]));
        }
        let c = -g.leaves().iter().map(|&v| inv.get(v, v).clone()).sum::<Rat>();
        let det = i64::try_from(&sd.det).expect("det fits i64");
        let (a, va) = halves[0];
        let (ap, vb) = halves[1];
        Ok(HShape {
            weights: HShapeWeights { a, a_prime: ap, det, c },
            vertices: [va[0], va[1], va[2], vb[0], vb[1], vb[2]],
            s: g.s(),
        })
    }

    /// Full lattice vector with the six coordinates placed, zero elsewhere.
    pub fn embed(&self, x: &[i64; 6]) -> Vec<i64> {
        let mut l = vec![0; self.s];
        for (k, &v) in self.vertices.iter().enumerate() {
            l[v] = x[k];
        }
        l
    }
}

fn check_admissible(x: &[i64; 6]) -> Result<()> {
    let unit = |t: i64| t == 1 || t == -1;
    if !(unit(x[0]) && unit(x[1]) && unit(x[3]) && unit(x[4])) {
        return Err(Error::ConstraintViolation("leaf coordinates must be ±1".into()));
    }
    if x[2] % 2 == 0 || x[5] % 2 == 0 {
        return Err(Error::ConstraintViolation("node coordinates must be odd".into()));
    }
    Ok(())
}

/// Integer part `Σ` of `-l^2 = Σ/det + C`.
fn h_shape_numerator(w: &HShapeWeights, x: &[i64; 6]) -> i64 {
    let [a1, a2, a3] = w.a;
    let [b1, b2, b3] = w.a_prime;
    let [x1, x2, x3, y1, y2, y3] = *x;
    let half = |a1: i64, a2: i64, a3: i64, x1: i64, x2: i64, x3: i64| {
        x3 * x3 * a1 * a2 * a3 + 2 * x1 * x3 * a2 * a3 + 2 * x2 * x3 * a1 * a3 + 2 * x1 * x2 * a3
    };
    let cross = 2
        * (x3 * y3 * a1 * a2 * b1 * b2
            + x3 * y1 * a1 * a2 * b2
            + x3 * y2 * a1 * a2 * b1
            + y3 * x1 * b1 * b2 * a2
            + y3 * x2 * b1 * b2 * a1
            + x1 * y1 * a2 * b2
            + x1 * y2 * a2 * b1
            + x2 * y1 * a1 * b2
            + x2 * y2 * a1 * b1);
    half(a1, a2, a3, x1, x2, x3) + half(b1, b2, b3, y1, y2, y3) + cross
}

/// `-l^2` for `l` with coordinates `(x1, x2, x3, x1', x2', x3')`.
pub fn h_shape_form(w: &HShapeWeights, x: &[i64; 6]) -> Result<Rat> {
    check_admissible(x)?;
    Ok(Rat::new(Int::from(h_shape_numerator(w, x)), Int::from(w.det)) + &w.c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HShapeCandidate {
    pub x: [i64; 6],
    pub value: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HShapeMinimum {
    /// All candidates, sorted by value then coordinates, duplicates removed.
    pub candidates: Vec<HShapeCandidate>,
    pub minimum: Rat,
    pub minimizers: Vec<[i64; 6]>,
}

/// For each sign pattern of `(x1, x2, x1', x2')`, the real minimizer in
/// `(x3, x3')` is rounded to the two nearest odd integers per coordinate.
/// Each odd neighbor of one coordinate is also paired with the best odd
/// value of the other coordinate given it.
pub fn h_shape_minimize(w: &HShapeWeights) -> HShapeMinimum {
    let [a1, a2, a3] = w.a;
    let [b1, b2, b3] = w.a_prime;
    let alpha = a1 * a2 * a3;
    let alpha_p = b1 * b2 * b3;
    let beta = a1 * a2 * b1 * b2;
    let mut seen = std::collections::BTreeSet::new();
    let mut candidates = Vec::new();
    for mask in 0..16u32 {
        let sign = |bit: u32| if mask & (1 << bit) == 0 { 1 } else { -1 };
        let (x1, x2, y1, y2) = (sign(0), sign(1), sign(2), sign(3));
        let lin = x1 * a2 * a3 + x2 * a1 * a3 + y1 * a1 * a2 * b2 + y2 * a1 * a2 * b1;
        let lin_p = y1 * b2 * b3 + y2 * b1 * b3 + x1 * a2 * b1 * b2 + x2 * a1 * b1 * b2;
        // α x + β y = -L, β x + α' y = -L'
        let det = alpha * alpha_p - beta * beta;
        let xs = Rat::new(Int::from(-lin * alpha_p + beta * lin_p), Int::from(det));
        let ys = Rat::new(Int::from(-alpha * lin_p + beta * lin), Int::from(det));
        let mut pairs = Vec::new();
        for &x3 in &odd_neighbors(&xs) {
            for &y3 in &odd_neighbors(&ys) {
                pairs.push((x3, y3));
            }
            let y_given = Rat::new(Int::from(-(beta * x3 + lin_p)), Int::from(alpha_p));
            for &y3 in &odd_neighbors(&y_given) {
                pairs.push((x3, y3));
            }
        }
        for &y3 in &odd_neighbors(&ys) {
            let x_given = Rat::new(Int::from(-(beta * y3 + lin)), Int::from(alpha));
            for &x3 in &odd_neighbors(&x_given) {
                pairs.push((x3, y3));
            }
        }
        for (x3, y3) in pairs {
            let x = [x1, x2, x3, y1, y2, y3];
            if seen.insert(x) {
                let value = h_shape_form(w, &x).expect("admissible by construction");
                candidates.push(HShapeCandidate { x, value });
            }
        }
    }
    candidates.sort_by(|a, b| a.value.cmp(&b.value).then_with(|| a.x.cmp(&b.x)));
    let minimum = candidates[0].value.clone();
    let minimizers = candidates.iter().take_while(|c| c.value == minimum).map(|c| c.x).collect();
    HShapeMinimum { candidates, minimum, minimizers }
}

/// The odd integers nearest to `r`: `r` itself when it is odd, else the
/// odd neighbors on either side.
fn odd_neighbors(r: &Rat) -> Vec<i64> {
    let f = i64::try_from(&floor(r)).expect("fits i64");
    let lo = if f.rem_euclid(2) == 1 { f } else { f - 1 };
    if Rat::from_integer(lo.into()) == *r {
        vec![lo]
    } else {
        vec![lo, lo + 2]
    }
}
