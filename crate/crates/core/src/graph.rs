//! Plumbing graphs: vertex-weighted trees.
//!
//! Vertices are kept internally in degree order (leaves and isolated vertices,
//! then degree-2 vertices, then nodes), stable with respect to the input order.
//! Every vector indexed by vertices in this crate uses the internal order; the
//! input order is remembered for serialization.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num::{One, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::rational::{ri, Rat};
use crate::spinc::SpincData;

#[derive(Clone, Debug)]
pub struct PlumbingGraph {
    ids: Vec<String>,
    weights: Vec<i64>,
    adj: Vec<Vec<usize>>,
    input_pos: Vec<usize>,
    input_edges: Vec<(String, String)>,
    matrix: OnceLock<ExactMatrix>,
    spinc: OnceLock<Result<SpincData>>,
}

impl PartialEq for PlumbingGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.weights == other.weights && self.adj == other.adj
    }
}

impl Eq for PlumbingGraph {}

fn degree_class(d: usize) -> u8 {
    match d {
        0 | 1 => 0,
        2 => 1,
        _ => 2,
    }
}

impl PlumbingGraph {
    /// Builds a graph from `(id, weight)` pairs and id edges, in input order.
    pub fn new(vertices: Vec<(String, i64)>, edges: Vec<(String, String)>) -> Result<Self> {
        let s = vertices.len();
        if s == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, (id, _)) in vertices.iter().enumerate() {
            if index.insert(id.as_str(), i).is_some() {
                return Err(Error::InvalidGraph(format!("repeated vertex id {id:?}")));
            }
        }
        if edges.len() != s - 1 {
            return Err(Error::InvalidGraph(format!(
                "a tree on {s} vertices has {} edges, found {}",
                s - 1,
                edges.len()
            )));
        }
        let mut adj_in = vec![Vec::new(); s];
        for (a, b) in &edges {
            let ia = *index
                .get(a.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("edge refers to unknown vertex {a:?}")))?;
            let ib = *index
                .get(b.as_str())
                .ok_or_else(|| Error::InvalidGraph(format!("edge refers to unknown vertex {b:?}")))?;
            if ia == ib {
                return Err(Error::InvalidGraph(format!("loop at vertex {a:?}")));
            }
            if adj_in[ia].contains(&ib) {
                return Err(Error::InvalidGraph(format!("repeated edge {a:?}-{b:?}")));
            }
            adj_in[ia].push(ib);
            adj_in[ib].push(ia);
        }
        // connected + s-1 edges => tree
        let mut seen = vec![false; s];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj_in[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != s {
            return Err(Error::InvalidGraph("graph is not connected (contains a cycle)".into()));
        }

        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by_key(|&i| degree_class(adj_in[i].len()));
        let mut to_internal = vec![0; s];
        for (k, &i) in order.iter().enumerate() {
            to_internal[i] = k;
        }
        let ids = order.iter().map(|&i| vertices[i].0.clone()).collect();
        let weights = order.iter().map(|&i| vertices[i].1).collect();
        let adj = order
            .iter()
            .map(|&i| {
                let mut nb: Vec<usize> = adj_in[i].iter().map(|&j| to_internal[j]).collect();
                nb.sort_unstable();
                nb
            })
            .collect();
        Ok(PlumbingGraph {
            ids,
            weights,
            adj,
            input_pos: order,
            input_edges: edges,
            matrix: OnceLock::new(),
            spinc: OnceLock::new(),
        })
    }

    /// Graph with ids `v0, v1, ...` and edges given by input positions.
    pub fn from_weights(weights: &[i64], edges: &[(usize, usize)]) -> Result<Self> {
        let vs = weights.iter().enumerate().map(|(i, &w)| (format!("v{i}"), w)).collect();
        let es = edges.iter().map(|&(a, b)| (format!("v{a}"), format!("v{b}"))).collect();
        Self::new(vs, es)
    }

    /// Linear chain with the given weights.
    pub fn chain(weights: &[i64]) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..weights.len()).map(|i| (i - 1, i)).collect();
        Self::from_weights(weights, &edges)
    }

    pub fn s(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> i64 {
        self.weights[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.adj.iter().map(|a| a.len() as i64).collect()
    }

    pub fn is_node(&self, v: usize) -> bool {
        self.degree(v) >= 3
    }

    pub fn nodes(&self) -> Vec<usize> {
        (0..self.s()).filter(|&v| self.is_node(v)).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.s()).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Internal edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::with_capacity(self.s().saturating_sub(1));
        for v in 0..self.s() {
            for &w in &self.adj[v] {
                if v < w {
                    e.push((v, w));
                }
            }
        }
        e
    }

    pub fn trace(&self) -> i64 {
        self.weights.iter().sum()
    }

    /// Vertices `(id, weight)` in the original input order.
    pub fn input_vertices(&self) -> Vec<(String, i64)> {
        let mut out = vec![(String::new(), 0); self.s()];
        for (k, &i) in self.input_pos.iter().enumerate() {
            out[i] = (self.ids[k].clone(), self.weights[k]);
        }
        out
    }

    pub fn input_edges(&self) -> &[(String, String)] {
        &self.input_edges
    }

    /// Input position of each internal vertex.
    pub fn input_positions(&self) -> &[usize] {
        &self.input_pos
    }

    /// The plumbing matrix, in internal vertex order.
    pub fn matrix(&self) -> &ExactMatrix {
        self.matrix.get_or_init(|| {
            let s = self.s();
            let mut e = vec![Rat::zero(); s * s];
            for v in 0..s {
                e[v * s + v] = ri(self.weights[v]);
                for &w in &self.adj[v] {
                    e[v * s + w] = Rat::one();
                }
            }
            ExactMatrix::from_rats(s, e)
        })
    }

    pub(crate) fn spinc_data(&self) -> Result<&SpincData> {
        self.spinc
            .get_or_init(|| SpincData::new(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Vertices of the component of `self - removed` containing `start`.
    pub fn component_avoiding(&self, start: usize, removed: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.s()];
        for &r in removed {
            seen[r] = true;
        }
        if seen[start] {
            return Vec::new();
        }
        seen[start] = true;
        let mut out = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    out.push(w);
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The unique path from `u` to `v`, both ends included.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let s = self.s();
        let mut parent = vec![usize::MAX; s];
        parent[u] = u;
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if x == v {
                break;
            }
            for &y in &self.adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
        let mut p = vec![v];
        let mut x = v;
        while x != u {
            x = parent[x];
            p.push(x);
        }
        p.reverse();
        p
    }

    /// `det(-M(sub))` for the full subgraph on `vertices` (1 when empty).
    pub fn neg_det_of(&self, vertices: &[usize]) -> Rat {
        if vertices.is_empty() {
            return Rat::one();
        }
        self.matrix().principal(vertices).neg().determinant().clone()
    }

    /// Hash of the labelled graph (ids, weights, edges); stable under
    /// reordering of the input but sensitive to ids.
    pub fn labeled_hash(&self) -> String {
        let mut vs: Vec<(&str, i64)> = self.ids.iter().map(|s| s.as_str()).zip(self.weights.iter().copied()).collect();
        vs.sort();
        let mut es: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (self.id(a), self.id(b));
                if x <= y { (x, y) } else { (y, x) }
            })
            .collect();
        es.sort();
        let mut text = String::new();
        for (id, w) in vs {
            text.push_str(&format!("v {id} {w}\n"));
        }
        for (a, b) in es {
            text.push_str(&format!("e {a} {b}\n"));
        }
        short_hash(&text)
    }

    /// Isomorphism-invariant hash of the weighted tree (ids ignored).
    pub fn canonical_hash(&self) -> String {
        short_hash(&self.canonical_form())
    }

    /// Canonical string of the weighted tree: AHU encoding rooted at the
    /// center(s), minimized over centers.
    pub fn canonical_form(&self) -> String {
        self.centers()
            .into_iter()
            .map(|c| self.rooted_code(c, usize::MAX))
            .min()
            .expect("a tree has a center")
    }

    fn rooted_code(&self, v: usize, parent: usize) -> String {
        let mut children: Vec<String> = self.adj[v]
            .iter()
            .filter(|&&w| w != parent)
            .map(|&w| self.rooted_code(w, v))
            .collect();
        children.sort();
        format!("({}{})", self.weights[v], children.concat())
    }

    fn centers(&self) -> Vec<usize> {
        let s = self.s();
        if s <= 2 {
            return (0..s).collect();
        }
        let mut deg: Vec<usize> = (0..s).map(|v| self.degree(v)).collect();
        let mut layer: Vec<usize> = (0..s).filter(|&v| deg[v] <= 1).collect();
        let mut remaining = s;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &v in &layer {
                deg[v] = 0;
                for &w in &self.adj[v] {
                    if deg[w] > 0 {
                        deg[w] -= 1;
                        if deg[w] == 1 {
                            next.push(w);
                        }
                    }
                }
            }
            layer = next;
        }
        layer.sort_unstable();
        layer
    }

    /// Counts of `(leaves, degree-2, nodes)`; isolated vertices count as leaves.
    pub fn degree_profile(&self) -> (usize, usize, usize) {
        let mut c = BTreeMap::new();
        for v in 0..self.s() {
            *c.entry(degree_class(self.degree(v))).or_insert(0usize) += 1;
        }
        (
            c.get(&0).copied().unwrap_or(0),
            c.get(&1).copied().unwrap_or(0),
            c.get(&2).copied().unwrap_or(0),
        )
    }
}

pub(crate) fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
}
