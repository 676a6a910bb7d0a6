//! Multigraphs with degree bounds, f-matchings and alternating trails.
//!
//! Edges are identified by dense ids in order of insertion; all sets of
//! edges (matchings, trails) are keyed by id so that parallel edges and
//! loops are handled uniformly. A matched loop contributes 2 to the degree
//! of its vertex.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite `x`. For a loop this is `x` itself.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn has_endpoint(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeId>>,
}

impl Multigraph {
    pub fn new(n: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::new(),
            incidence: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut g = Multigraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::UnknownVertex(x));
            }
        }
        let id = self.edges.len();
        self.edges.push(Edge { u, v });
        self.incidence[u].push(id);
        if u != v {
            self.incidence[v].push(id);
        }
        Ok(id)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn try_edge(&self, e: EdgeId) -> Result<Edge> {
        self.edges.get(e).copied().ok_or(Error::UnknownEdge(e))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.edges.iter().copied().enumerate()
    }

    /// Incident edge ids of `v` in ascending order; a loop is listed once.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    /// No two edges join the same pair of vertices. Loops are permitted.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        self.edges
            .iter()
            .all(|e| seen.insert((e.u.min(e.v), e.u.max(e.v))))
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }
}

/// The degree bound function f.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBound(Vec<u32>);

impl DegreeBound {
    pub fn uniform(n: usize, k: u32) -> Self {
        DegreeBound(vec![k; n])
    }

    pub fn from_vec(f: Vec<u32>) -> Self {
        DegreeBound(f)
    }

    pub fn get(&self, v: VertexId) -> u32 {
        self.0[v]
    }

    pub fn set(&mut self, v: VertexId, k: u32) {
        self.0[v] = k;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// f(V).
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&k| u64::from(k)).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MType {
    Matched,
    Unmatched,
}

impl MType {
    pub fn flip(self) -> MType {
        match self {
            MType::Matched => MType::Unmatched,
            MType::Unmatched => MType::Matched,
        }
    }
}

/// An f-matching: a set of edge ids with per-vertex degree accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    member: Vec<bool>,
    degree: Vec<u32>,
    size: usize,
}

impl Matching {
    pub fn empty(g: &Multigraph) -> Self {
        Matching {
            member: vec![false; g.edge_count()],
            degree: vec![0; g.vertex_count()],
            size: 0,
        }
    }

    /// Builds a matching from edge ids and checks it against `f`.
    pub fn from_edges(g: &Multigraph, f: &DegreeBound, ids: &[EdgeId]) -> Result<Self> {
        let mut m = Matching::empty(g);
        for &e in ids {
            g.try_edge(e)?;
            if m.member[e] {
                return Err(Error::Contract(format!("edge {e} listed twice")));
            }
            m.insert(g, e);
        }
        m.check_feasible(f)?;
        Ok(m)
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.member[e]
    }

    pub fn mtype(&self, e: EdgeId) -> MType {
        if self.member[e] {
            MType::Matched
        } else {
            MType::Unmatched
        }
    }

    /// |δ(v,M)| + 2|γ(v,M)|.
    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v]
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(e, &b)| b.then_some(e))
    }

    pub fn deficiency(&self, v: VertexId, f: &DegreeBound) -> u32 {
        f.get(v).saturating_sub(self.degree[v])
    }

    pub fn is_free(&self, v: VertexId, f: &DegreeBound) -> bool {
        self.degree[v] < f.get(v)
    }

    pub fn check_feasible(&self, f: &DegreeBound) -> Result<()> {
        for (v, &d) in self.degree.iter().enumerate() {
            if d > f.get(v) {
                return Err(Error::Infeasible {
                    vertex: v,
                    degree: d,
                    bound: f.get(v),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn insert(&mut self, g: &Multigraph, e: EdgeId) {
        debug_assert!(!self.member[e]);
        let Edge { u, v } = g.edge(e);
        self.member[e] = true;
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.size += 1;
    }

    pub(crate) fn remove(&mut self, g: &Multigraph, e: EdgeId) {
        debug_assert!(self.member[e]);
        let Edge { u, v } = g.edge(e);
        self.member[e] = false;
        self.degree[u] -= 1;
        self.degree[v] -= 1;
        self.size -= 1;
    }

    pub(crate) fn toggle(&mut self, g: &Multigraph, e: EdgeId) {
        if self.member[e] {
            self.remove(g, e);
        } else {
            self.insert(g, e);
        }
    }
}

/// def(v) = f(v) − |δ(v,M)| − 2|γ(v,M)|.
pub fn deficiency(v: VertexId, m: &Matching, f: &DegreeBound) -> u32 {
    m.deficiency(v, f)
}

/// The 0/2 weight: 2 for matched edges, 0 otherwise.
pub fn edge_weight(e: EdgeId, m: &Matching) -> i64 {
    if m.contains(e) {
        2
    } else {
        0
    }
}

/// One directed traversal of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step {
            edge: self.edge,
            from: self.to,
            to: self.from,
        }
    }
}

/// A walk that does not repeat edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trail {
    start: VertexId,
    steps: Vec<Step>,
}

impl Trail {
    pub fn new(g: &Multigraph, start: VertexId, steps: Vec<Step>) -> Result<Self> {
        if start >= g.vertex_count() {
            return Err(Error::UnknownVertex(start));
        }
        let mut at = start;
        let mut used = std::collections::HashSet::with_capacity(steps.len());
        for (k, s) in steps.iter().enumerate() {
            let e = g.try_edge(s.edge)?;
            let ok = (e.u == s.from && e.v == s.to) || (e.v == s.from && e.u == s.to);
            if !ok {
                return Err(Error::InvalidTrail(format!(
                    "step {k}: edge {} does not join {} and {}",
                    s.edge, s.from, s.to
                )));
            }
            if s.from != at {
                return Err(Error::InvalidTrail(format!(
                    "step {k} starts at {} but the walk is at {at}",
                    s.from
                )));
            }
            if !used.insert(s.edge) {
                return Err(Error::InvalidTrail(format!("edge {} repeats", s.edge)));
            }
            at = s.to;
        }
        Ok(Trail { start, steps })
    }

    pub fn empty(start: VertexId) -> Self {
        Trail {
            start,
            steps: Vec::new(),
        }
    }

    /// Builds a trail from a vertex sequence and the edge ids joining
    /// consecutive vertices.
    pub fn from_vertex_edges(
        g: &Multigraph,
        vertices: &[VertexId],
        edges: &[EdgeId],
    ) -> Result<Self> {
        if vertices.len() != edges.len() + 1 {
            return Err(Error::InvalidTrail(
                "vertex sequence must be one longer than the edge sequence".into(),
            ));
        }
        let steps = edges
            .iter()
            .zip(vertices.windows(2))
            .map(|(&edge, w)| Step {
                edge,
                from: w[0],
                to: w[1],
            })
            .collect();
        Trail::new(g, vertices[0], steps)
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        !self.steps.is_empty() && self.start == self.end()
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.to))
            .collect()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.steps.iter().map(|s| s.edge)
    }

    pub fn reversed(&self) -> Trail {
        Trail {
            start: self.end(),
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    pub fn is_alternating(&self, m: &Matching) -> bool {
        self.steps
            .windows(2)
            .all(|w| m.contains(w[0].edge) != m.contains(w[1].edge))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailClass {
    pub alternating: bool,
    pub closed: bool,
    pub augmenting: bool,
}

/// w(T,M) = w(T − M) − w(T ∩ M).
pub fn incremental_weight(t: &Trail, m: &Matching) -> Result<i64> {
    if !t.is_alternating(m) {
        return Err(Error::Contract("incremental weight needs an alternating trail".into()));
    }
    Ok(t.edge_ids().map(|e| -edge_weight(e, m)).sum())
}

/// Degree change at each vertex caused by rematching `t`.
fn degree_delta(g: &Multigraph, t: &Trail, m: &Matching) -> Vec<(VertexId, i64)> {
    let mut delta: std::collections::BTreeMap<VertexId, i64> = Default::default();
    for s in t.steps() {
        let d = if m.contains(s.edge) { -1 } else { 1 };
        let e = g.edge(s.edge);
        *delta.entry(e.u).or_default() += d;
        *delta.entry(e.v).or_default() += d;
    }
    delta.into_iter().filter(|&(_, d)| d != 0).collect()
}

pub fn classify_trail(g: &Multigraph, t: &Trail, m: &Matching, f: &DegreeBound) -> TrailClass {
    let alternating = t.is_alternating(m);
    let closed = t.is_closed();
    let augmenting = !t.is_empty()
        && alternating
        && !m.contains(t.steps()[0].edge)
        && !m.contains(t.steps()[t.len() - 1].edge)
        && m.is_free(t.start(), f)
        && m.is_free(t.end(), f)
        && degree_delta(g, t, m)
            .into_iter()
            .all(|(v, d)| i64::from(m.degree(v)) + d <= i64::from(f.get(v)));
    TrailClass {
        alternating,
        closed,
        augmenting,
    }
}

/// M ⊕ T for an augmenting trail T.
pub fn augment(g: &Multigraph, m: &Matching, t: &Trail, f: &DegreeBound) -> Result<Matching> {
    if !classify_trail(g, t, m, f).augmenting {
        return Err(Error::Contract("trail is not augmenting".into()));
    }
    let mut out = m.clone();
    for e in t.edge_ids() {
        out.toggle(g, e);
    }
    out.check_feasible(f)?;
    Ok(out)
}

/// Parses the line-oriented graph format:
///
/// ```text
/// # comment
/// p fgraph <n> <m>
/// f <v> <k>      (optional, default 1)
/// e <u> <v>      (m times; edge id = order of appearance)
/// ```
pub fn parse_graph(text: &str) -> Result<(Multigraph, DegreeBound)> {
    let mut header: Option<(usize, usize)> = None;
    let mut g = Multigraph::new(0);
    let mut f = DegreeBound::uniform(0, 1);
    let mut edge_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tok: Vec<&str> = content.split_whitespace().collect();
        let num = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected a non-negative integer, found {s:?}"),
            })
        };
        let bad = |message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        match tok[0] {
            "p" => {
                if header.is_some() {
                    return Err(bad("duplicate problem line"));
                }
                if tok.len() != 4 || tok[1] != "fgraph" {
                    return Err(bad("expected `p fgraph <n> <m>`"));
                }
                let (n, m) = (num(tok[2])?, num(tok[3])?);
                header = Some((n, m));
                g = Multigraph::new(n);
                f = DegreeBound::uniform(n, 1);
            }
            "f" | "e" => {
                let Some((n, _)) = header else {
                    return Err(bad("data line before the problem line"));
                };
                if tok.len() != 3 {
                    return Err(bad(&format!("expected `{} <a> <b>`", tok[0])));
                }
                let (a, b) = (num(tok[1])?, num(tok[2])?);
                if tok[0] == "f" {
                    if a >= n {
                        return Err(Error::VertexRange { line, vertex: a, n });
                    }
                    let k = u32::try_from(b).map_err(|_| bad("degree bound too large"))?;
                    f.set(a, k);
                } else {
                    for x in [a, b] {
                        if x >= n {
                            return Err(Error::VertexRange { line, vertex: x, n });
                        }
                    }
                    g.add_edge(a, b)?;
                    edge_line = line;
                }
            }
            other => return Err(bad(&format!("unknown line type {other:?}"))),
        }
    }
    let Some((_, m)) = header else {
        return Err(Error::Parse {
            line: 0,
            message: "missing `p fgraph` line".into(),
        });
    };
    if g.edge_count() != m {
        return Err(Error::Parse {
            line: edge_line,
            message: format!("header declares {m} edges, found {}", g.edge_count()),
        });
    }
    Ok((g, f))
}

pub fn write_graph(g: &Multigraph, f: &DegreeBound) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p fgraph {} {}", g.vertex_count(), g.edge_count());
    for v in 0..g.vertex_count() {
        if f.get(v) != 1 {
            let _ = writeln!(out, "f {v} {}", f.get(v));
        }
    }
    for (_, e) in g.edges() {
        let _ = writeln!(out, "e {} {}", e.u, e.v);
    }
    out
}

/// Parses a matching file: one edge id per line, `#` comments allowed.
pub fn parse_matching(text: &str, g: &Multigraph, f: &DegreeBound) -> Result<Matching> {
    let mut ids = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let e = content.parse::<usize>().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("expected an edge id, found {content:?}"),
        })?;
        ids.push(e);
    }
    Matching::from_edges(g, f, &ids)
}

pub fn write_matching(m: &Matching) -> String {
    m.edges().map(|e| format!("{e}\n")).collect()
}
