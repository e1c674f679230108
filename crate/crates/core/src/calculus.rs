//! Neumann moves on plumbing trees, replayable move traces, and the reduction
//! of weakly negative definite graphs to negative definite ones.
//!
//! Moves act on ids, so a trace stays meaningful across the internal
//! reordering of vertices. New vertices get the smallest unused id `n{k}`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::PlumbingGraph;
use crate::invariants::is_weakly_negative_definite;
use crate::matrix::ExactMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// Remove an `ε`-vertex of valency at most 2.
    BlowDownVertex { eps: i64, vertex: String },
    /// Insert an `ε`-vertex on the edge `a - b`.
    BlowUpEdge { eps: i64, a: String, b: String },
    /// Attach an `ε`-leaf to `vertex`.
    BlowUpVertex { eps: i64, vertex: String },
    /// Disjoint `ε`-vertex; never a tree, so never applicable here.
    BlowUpFree { eps: i64 },
    /// Remove a 0-vertex of valency 2 and merge its neighbors, or remove a
    /// 0-leaf together with its valency-2 neighbor.
    ZeroChainAbsorb { vertex: String },
    /// Inverse of absorption: `vertex` keeps weight `weight`, followed by a new
    /// 0-vertex and a new vertex of the remaining weight, which takes over the
    /// neighbors listed in `moved`.
    ZeroChainExtrude { vertex: String, weight: i64, moved: Vec<String> },
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::BlowDownVertex { .. } => "BlowDownVertex",
            Move::BlowUpEdge { .. } => "BlowUpEdge",
            Move::BlowUpVertex { .. } => "BlowUpVertex",
            Move::BlowUpFree { .. } => "BlowUpFree",
            Move::ZeroChainAbsorb { .. } => "ZeroChainAbsorb",
            Move::ZeroChainExtrude { .. } => "ZeroChainExtrude",
        }
    }

    /// `ε` for blow-ups and downs; the kept weight for extrusion; 0 otherwise.
    fn eps_field(&self) -> i64 {
        match self {
            Move::BlowDownVertex { eps, .. }
            | Move::BlowUpEdge { eps, .. }
            | Move::BlowUpVertex { eps, .. }
            | Move::BlowUpFree { eps } => *eps,
            Move::ZeroChainAbsorb { .. } => 0,
            Move::ZeroChainExtrude { weight, .. } => *weight,
        }
    }

    fn location(&self) -> Vec<String> {
        match self {
            Move::BlowDownVertex { vertex, .. }
            | Move::BlowUpVertex { vertex, .. }
            | Move::ZeroChainAbsorb { vertex } => vec![vertex.clone()],
            Move::BlowUpEdge { a, b, .. } => vec![a.clone(), b.clone()],
            Move::BlowUpFree { .. } => Vec::new(),
            Move::ZeroChainExtrude { vertex, moved, .. } => {
                let mut v = vec![vertex.clone()];
                if !moved.is_empty() {
                    v.push(moved.join(","));
                }
                v
            }
        }
    }

    /// Whether `det M` changes sign (`ε = -1` moves and 0-chain moves).
    pub fn flips_det_sign(&self) -> bool {
        match self {
            Move::BlowDownVertex { eps, .. }
            | Move::BlowUpEdge { eps, .. }
            | Move::BlowUpVertex { eps, .. }
            | Move::BlowUpFree { eps } => *eps == -1,
            Move::ZeroChainAbsorb { .. } | Move::ZeroChainExtrude { .. } => true,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind(), self.eps_field())?;
        for loc in self.location() {
            write!(f, " {loc}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Work {
    verts: Vec<(String, i64)>,
    edges: Vec<(String, String)>,
}

impl Work {
    fn of(g: &PlumbingGraph) -> Self {
        Work { verts: g.input_vertices(), edges: g.input_edges().to_vec() }
    }

    fn pos(&self, id: &str) -> Result<usize> {
        self.verts
            .iter()
            .position(|(v, _)| v == id)
            .ok_or_else(|| Error::MoveNotApplicable(format!("no vertex {id:?}")))
    }

    fn weight(&self, id: &str) -> Result<i64> {
        Ok(self.verts[self.pos(id)?].1)
    }

    fn add_weight(&mut self, id: &str, delta: i64) -> Result<()> {
        let p = self.pos(id)?;
        self.verts[p].1 += delta;
        Ok(())
    }

    /// Neighbors in the order their edges appear.
    fn neighbors(&self, id: &str) -> Vec<String> {
        self.edges
            .iter()
            .filter_map(|(a, b)| {
                if a == id {
                    Some(b.clone())
                } else if b == id {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    fn remove_vertex(&mut self, id: &str) {
        self.verts.retain(|(v, _)| v != id);
        self.edges.retain(|(a, b)| a != id && b != id);
    }

    fn remove_edge(&mut self, a: &str, b: &str) {
        self.edges.retain(|(x, y)| !((x == a && y == b) || (x == b && y == a)));
    }

    fn fresh_id(&self) -> String {
        let used: HashSet<&str> = self.verts.iter().map(|(v, _)| v.as_str()).collect();
        (0..)
            .map(|k| format!("n{k}"))
            .find(|c| !used.contains(c.as_str()))
            .expect("unbounded supply of ids")
    }

    fn build(self) -> Result<PlumbingGraph> {
        PlumbingGraph::new(self.verts, self.edges)
    }
}

fn not_applicable<T>(msg: String) -> Result<T> {
    Err(Error::MoveNotApplicable(msg))
}

pub fn apply_move(g: &PlumbingGraph, mv: &Move) -> Result<PlumbingGraph> {
    let mut w = Work::of(g);
    match mv {
        Move::BlowDownVertex { eps, vertex } => {
            check_eps(*eps)?;
            if w.weight(vertex)? != *eps {
                return not_applicable(format!("{vertex} does not have weight {eps}"));
            }
            let nb = w.neighbors(vertex);
            match nb.len() {
                0 => return not_applicable(format!("blowing down {vertex} empties the graph")),
                1 => w.add_weight(&nb[0], -eps)?,
                2 => {
                    w.add_weight(&nb[0], -eps)?;
                    w.add_weight(&nb[1], -eps)?;
                }
                _ => return not_applicable(format!("{vertex} has valency {}", nb.len())),
            }
            w.remove_vertex(vertex);
            if nb.len() == 2 {
                w.edges.push((nb[0].clone(), nb[1].clone()));
            }
        }
        Move::BlowUpEdge { eps, a, b } => {
            check_eps(*eps)?;
            if !w.has_edge(a, b) {
                return not_applicable(format!("no edge {a}-{b}"));
            }
            let n = w.fresh_id();
            w.add_weight(a, *eps)?;
            w.add_weight(b, *eps)?;
            w.remove_edge(a, b);
            w.verts.push((n.clone(), *eps));
            w.edges.push((a.clone(), n.clone()));
            w.edges.push((n, b.clone()));
        }
        Move::BlowUpVertex { eps, vertex } => {
            check_eps(*eps)?;
            let n = w.fresh_id();
            w.add_weight(vertex, *eps)?;
            w.verts.push((n.clone(), *eps));
            w.edges.push((vertex.clone(), n));
        }
        Move::BlowUpFree { eps } => {
            check_eps(*eps)?;
            return not_applicable("a disjoint vertex does not give a tree".into());
        }
        Move::ZeroChainAbsorb { vertex } => {
            if w.weight(vertex)? != 0 {
                return not_applicable(format!("{vertex} is not 0-decorated"));
            }
            let nb = w.neighbors(vertex);
            match nb.len() {
                2 => {
                    let (pa, pb) = (w.pos(&nb[0])?, w.pos(&nb[1])?);
                    let (keep, gone) = if pa < pb { (&nb[0], &nb[1]) } else { (&nb[1], &nb[0]) };
                    let total = w.weight(keep)? + w.weight(gone)?;
                    let gone_nb: Vec<String> =
                        w.neighbors(gone).into_iter().filter(|x| x != vertex).collect();
                    w.remove_vertex(vertex);
                    w.remove_vertex(gone);
                    let kp = w.pos(keep)?;
                    w.verts[kp].1 = total;
                    for x in gone_nb {
                        w.edges.push((keep.clone(), x));
                    }
                }
                1 => {
                    let v = &nb[0];
                    let vnb = w.neighbors(v);
                    match vnb.len() {
                        1 => return not_applicable(format!("absorbing {vertex} empties the graph")),
                        2 => {
                            w.remove_vertex(vertex);
                            w.remove_vertex(v);
                        }
                        _ => {
                            return Err(Error::ImpossibleForWeaklyNegDef {
                                leaf: vertex.clone(),
                                node: v.clone(),
                            })
                        }
                    }
                }
                k => return not_applicable(format!("0-vertex {vertex} has valency {k}")),
            }
        }
        Move::ZeroChainExtrude { vertex, weight, moved } => {
            let m = w.weight(vertex)?;
            let nb = w.neighbors(vertex);
            if let Some(x) = moved.iter().find(|x| !nb.contains(x)) {
                return not_applicable(format!("{x} is not a neighbor of {vertex}"));
            }
            let z = w.fresh_id();
            w.verts.push((z.clone(), 0));
            let far = w.fresh_id();
            w.verts.push((far.clone(), m - weight));
            let p = w.pos(vertex)?;
            w.verts[p].1 = *weight;
            for x in moved {
                w.remove_edge(vertex, x);
                w.edges.push((far.clone(), x.clone()));
            }
            w.edges.push((vertex.clone(), z.clone()));
            w.edges.push((z, far));
        }
    }
    w.build()
}

fn check_eps(eps: i64) -> Result<()> {
    if eps == 1 || eps == -1 {
        Ok(())
    } else {
        not_applicable(format!("ε must be ±1, got {eps}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub mv: Move,
    /// Labelled hash of the graph after the move.
    pub hash_after: String,
}

#[derive(Clone, Debug)]
pub struct MoveTrace {
    pub initial: PlumbingGraph,
    pub records: Vec<MoveRecord>,
    pub result: PlumbingGraph,
}

impl MoveTrace {
    pub fn new(initial: PlumbingGraph) -> Self {
        MoveTrace { result: initial.clone(), initial, records: Vec::new() }
    }

    pub fn push(&mut self, mv: Move) -> Result<()> {
        let next = apply_move(&self.result, &mv)?;
        self.records.push(MoveRecord { mv, hash_after: next.labeled_hash() });
        self.result = next;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One line per move: `<kind> <ε> <location-ids> | <graph-hash-after>`.
    pub fn certificate(&self) -> String {
        self.records
            .iter()
            .map(|r| format!("{} | {}\n", r.mv, r.hash_after))
            .collect()
    }

    /// Replays the trace from the initial graph, checking every hash.
    pub fn replay(&self) -> Result<PlumbingGraph> {
        replay_records(&self.initial, &self.records)
    }
}

pub fn parse_certificate(text: &str) -> Result<Vec<MoveRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: &str| Error::Certificate { line: line_no, message: m.to_string() };
        let (mv_text, hash) = line.split_once('|').ok_or_else(|| bad("missing '|'"))?;
        let hash = hash.trim().to_string();
        if hash.is_empty() {
            return Err(bad("missing graph hash"));
        }
        let toks: Vec<&str> = mv_text.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(bad("expected '<kind> <ε> <location>'"));
        }
        let eps: i64 = toks[1].parse().map_err(|_| bad("ε is not an integer"))?;
        let loc = &toks[2..];
        let need = |n: usize| if loc.len() == n { Ok(()) } else { Err(bad("wrong number of location ids")) };
        let mv = match toks[0] {
            "BlowDownVertex" => {
                need(1)?;
                Move::BlowDownVertex { eps, vertex: loc[0].into() }
            }
            "BlowUpEdge" => {
                need(2)?;
                Move::BlowUpEdge { eps, a: loc[0].into(), b: loc[1].into() }
            }
            "BlowUpVertex" => {
                need(1)?;
                Move::BlowUpVertex { eps, vertex: loc[0].into() }
            }
            "BlowUpFree" => {
                need(0)?;
                Move::BlowUpFree { eps }
            }
            "ZeroChainAbsorb" => {
                need(1)?;
                Move::ZeroChainAbsorb { vertex: loc[0].into() }
            }
            "ZeroChainExtrude" => {
                if loc.is_empty() || loc.len() > 2 {
                    return Err(bad("wrong number of location ids"));
                }
                let moved = loc
                    .get(1)
                    .map(|m| m.split(',').map(String::from).collect())
                    .unwrap_or_default();
                Move::ZeroChainExtrude { vertex: loc[0].into(), weight: eps, moved }
            }
            other => return Err(bad(&format!("unknown move kind {other:?}"))),
        };
        out.push(MoveRecord { mv, hash_after: hash });
    }
    Ok(out)
}

pub fn replay_records(initial: &PlumbingGraph, records: &[MoveRecord]) -> Result<PlumbingGraph> {
    let mut g = initial.clone();
    for (i, r) in records.iter().enumerate() {
        g = apply_move(&g, &r.mv).map_err(|e| Error::Certificate {
            line: i + 1,
            message: e.to_string(),
        })?;
        if g.labeled_hash() != r.hash_after {
            return Err(Error::Certificate {
                line: i + 1,
                message: format!("graph hash {} does not match {}", g.labeled_hash(), r.hash_after),
            });
        }
    }
    Ok(g)
}

/// Reduces a weakly negative definite graph to a negative definite one using
/// only moves on strings that never create nodes.
///
/// Rules, in priority order, each at the first matching vertex in input order:
/// 0-vertex absorption, blowing down `+1`, lowering a string weight `e >= 2`
/// by a `-1` blow-up on one of its edges, blowing down `-1`. It stops once every
/// string vertex has weight `<= -2`.
pub fn normalize(g: &PlumbingGraph) -> Result<(PlumbingGraph, MoveTrace)> {
    let mut trace = MoveTrace::new(g.clone());
    if g.matrix().is_negative_definite() {
        return Ok((g.clone(), trace));
    }
    if !is_weakly_negative_definite(g)? {
        return Err(Error::NotWeaklyNegativeDefinite);
    }
    let cap = 1000 + 100 * (g.s() + g.weights().iter().map(|w| w.unsigned_abs() as usize).sum::<usize>());
    for _ in 0..cap {
        let cur = trace.result.clone();
        let Some(mv) = next_move(&cur)? else {
            if !cur.matrix().is_negative_definite() {
                return Err(Error::NotNegativeDefinite);
            }
            return Ok((cur, trace));
        };
        let nodes_before = cur.nodes().len();
        let next = apply_move(&cur, &mv)?;
        if next.nodes().len() > nodes_before {
            return Err(Error::NodeCreatingMoveRejected(mv.to_string()));
        }
        let before = cur.matrix().determinant().clone();
        let expect = if mv.flips_det_sign() { -before } else { before };
        if next.matrix().determinant() != &expect {
            return Err(Error::ConstraintViolation(format!("{mv} changed |det M|")));
        }
        trace.push(mv)?;
    }
    Err(Error::NonTermination(cap))
}

/// The next normalization move, or `None` when every string weight is `<= -2`
/// (or the graph is a single vertex of negative weight).
fn next_move(g: &PlumbingGraph) -> Result<Option<Move>> {
    let order = input_order(g);
    let string = |v: usize| g.degree(v) <= 2;
    if g.s() == 1 {
        let w = g.weight(0);
        let id = g.id(0).to_string();
        return match w {
            w if w <= -1 => Ok(None),
            1 => Err(Error::EmptyNormalForm),
            _ => Ok(Some(Move::BlowUpVertex { eps: -1, vertex: id })),
        };
    }
    for &v in &order {
        if string(v) && g.weight(v) == 0 {
            let id = g.id(v).to_string();
            if g.degree(v) == 1 {
                let nb = g.neighbors(v)[0];
                match g.degree(nb) {
                    1 => return Err(Error::EmptyNormalForm),
                    2 => {}
                    _ => {
                        return Err(Error::ImpossibleForWeaklyNegDef {
                            leaf: id,
                            node: g.id(nb).to_string(),
                        })
                    }
                }
            }
            return Ok(Some(Move::ZeroChainAbsorb { vertex: id }));
        }
    }
    for &v in &order {
        if string(v) && g.weight(v) == 1 {
            return Ok(Some(Move::BlowDownVertex { eps: 1, vertex: g.id(v).to_string() }));
        }
    }
    for &v in &order {
        if string(v) && g.weight(v) >= 2 {
            let nb = *g
                .neighbors(v)
                .iter()
                .min_by_key(|&&w| g.input_positions()[w])
                .expect("s > 1 so every vertex has a neighbor");
            return Ok(Some(Move::BlowUpEdge {
                eps: -1,
                a: g.id(v).to_string(),
                b: g.id(nb).to_string(),
            }));
        }
    }
    for &v in &order {
        if string(v) && g.weight(v) == -1 {
            return Ok(Some(Move::BlowDownVertex { eps: -1, vertex: g.id(v).to_string() }));
        }
    }
    Ok(None)
}

/// Internal indices sorted by input position.
fn input_order(g: &PlumbingGraph) -> Vec<usize> {
    let mut v: Vec<usize> = (0..g.s()).collect();
    v.sort_by_key(|&i| g.input_positions()[i]);
    v
}

/// Schur complement split of `M` into the node block `A` and the rest `D`:
/// checks `S^{-1} = (M^{-1})|_{nodes}` for `S = A - B D^{-1} B^T`, and returns
/// whether `D` and `(M^{-1})|_{nodes}` are both negative definite.
pub fn schur_split_check(m: &ExactMatrix, node_set: &[usize]) -> Result<bool> {
    let n = m.dim();
    let rest: Vec<usize> = (0..n).filter(|i| !node_set.contains(i)).collect();
    let d = m.principal(&rest);
    if !rest.is_empty() && d.determinant() == &crate::rational::ri(0) {
        return Err(Error::SingularBlock);
    }
    let inv = m.inverse()?;
    let node_block = inv.principal(node_set);
    if !node_set.is_empty() {
        let a = m.principal(node_set);
        let s = if rest.is_empty() {
            a
        } else {
            let k = node_set.len();
            let r = rest.len();
            let bm = m.block(node_set, &rest);
            let dinv = d.inverse()?;
            let mut entries = a.entries().to_vec();
            for i in 0..k {
                for j in 0..k {
                    let mut acc = crate::rational::ri(0);
                    for p in 0..r {
                        for q in 0..r {
                            acc += &bm[i * r + p] * dinv.get(p, q) * &bm[j * r + q];
                        }
                    }
                    entries[i * k + j] -= acc;
                }
            }
            ExactMatrix::from_rats(k, entries)
        };
        if s.inverse()? != &node_block {
            return Err(Error::ConstraintViolation(
                "Schur complement inverse differs from the node block of M^{-1}".into(),
            ));
        }
    }
    let d_ok = rest.is_empty() || d.is_negative_definite();
    let ok = d_ok && (node_set.is_empty() || node_block.is_negative_definite());
    if ok {
        debug_assert!(m.is_negative_definite());
    }
    Ok(ok)
}
