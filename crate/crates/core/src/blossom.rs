//! Blossoms, dual variables and structured matchings.
//!
//! A blossom is stored as the closed trail `C` of its contracted graph:
//! `children[t]` is the t-th node of `C` and `steps[t]` is the edge of `C`
//! leaving `children[t]` toward `children[(t + 1) % k]`. `children[0]` is
//! the node `α` holding the base vertex. Atoms may occur more than once in
//! `children`; sub-blossoms occur exactly once.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DegreeBound, EdgeId, MType, Matching, Multigraph, Step, Trail, VertexId};

pub type BlossomId = usize;

/// Sentinel id of the artificial vertex feeding free vertices.
pub const EPSILON: VertexId = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Node {
    Atom(VertexId),
    Blossom(BlossomId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BaseEdge {
    Real(EdgeId),
    /// The matched edge ε→β of a free blossom.
    Artificial,
}

impl BaseEdge {
    pub fn is(&self, e: EdgeId) -> bool {
        *self == BaseEdge::Real(e)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Blossom {
    pub id: BlossomId,
    pub m_type: MType,
    pub base: VertexId,
    pub base_edge: BaseEdge,
    pub children: Vec<Node>,
    pub steps: Vec<Step>,
    pub parent: Option<BlossomId>,
    /// Sorted.
    pub vertices: Vec<VertexId>,
}

impl Blossom {
    pub fn is_free(&self) -> bool {
        self.base_edge == BaseEdge::Artificial
    }

    pub fn is_heavy(&self) -> bool {
        self.m_type == MType::Matched
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BlossomForest {
    blossoms: Vec<Blossom>,
    /// Innermost blossom containing each vertex.
    leaf: Vec<Option<BlossomId>>,
}

impl BlossomForest {
    pub fn new(n: usize) -> Self {
        BlossomForest {
            blossoms: Vec::new(),
            leaf: vec![None; n],
        }
    }

    /// Adds a blossom whose children are atoms or existing maximal blossoms.
    pub fn add(
        &mut self,
        m_type: MType,
        base: VertexId,
        base_edge: BaseEdge,
        children: Vec<Node>,
        steps: Vec<Step>,
    ) -> Result<BlossomId> {
        if children.is_empty() || children.len() != steps.len() {
            return Err(Error::Structural(
                "closed trail needs one step per child".into(),
            ));
        }
        let id = self.blossoms.len();
        let mut vertices = Vec::new();
        for c in &children {
            match *c {
                Node::Atom(v) => {
                    if v >= self.leaf.len() {
                        return Err(Error::UnknownVertex(v));
                    }
                    vertices.push(v);
                }
                Node::Blossom(b) => {
                    let child = self
                        .blossoms
                        .get(b)
                        .ok_or_else(|| Error::Structural(format!("dangling blossom {b}")))?;
                    if child.parent.is_some() {
                        return Err(Error::Structural(format!("blossom {b} already nested")));
                    }
                    vertices.extend_from_slice(&child.vertices);
                }
            }
        }
        vertices.sort_unstable();
        vertices.dedup();
        for c in &children {
            match *c {
                Node::Atom(v) => {
                    if self.leaf[v].is_some() {
                        return Err(Error::Structural(format!("vertex {v} already in a blossom")));
                    }
                }
                Node::Blossom(_) => {}
            }
        }
        for c in &children {
            match *c {
                Node::Atom(v) => self.leaf[v] = Some(id),
                Node::Blossom(b) => self.blossoms[b].parent = Some(id),
            }
        }
        self.blossoms.push(Blossom {
            id,
            m_type,
            base,
            base_edge,
            children,
            steps,
            parent: None,
            vertices,
        });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.blossoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blossoms.is_empty()
    }

    pub fn get(&self, b: BlossomId) -> &Blossom {
        &self.blossoms[b]
    }

    pub fn try_get(&self, b: BlossomId) -> Result<&Blossom> {
        self.blossoms
            .get(b)
            .ok_or_else(|| Error::Structural(format!("dangling blossom {b}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Blossom> {
        self.blossoms.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.leaf.len()
    }

    /// Blossoms containing `v`, innermost first.
    pub fn chain(&self, v: VertexId) -> Chain<'_> {
        Chain {
            forest: self,
            next: self.leaf.get(v).copied().flatten(),
        }
    }

    pub fn contains(&self, b: BlossomId, v: VertexId) -> bool {
        self.blossoms[b].vertices.binary_search(&v).is_ok()
    }

    pub fn outermost(&self, mut b: BlossomId) -> BlossomId {
        while let Some(p) = self.blossoms[b].parent {
            b = p;
        }
        b
    }

    /// The maximal node containing `v`.
    pub fn top(&self, v: VertexId) -> Node {
        match self.leaf[v] {
            None => Node::Atom(v),
            Some(b) => Node::Blossom(self.outermost(b)),
        }
    }

    /// The child of `b` containing `v`.
    pub fn child_node(&self, b: BlossomId, v: VertexId) -> Option<Node> {
        let mut cur = self.leaf[v]?;
        if cur == b {
            return Some(Node::Atom(v));
        }
        loop {
            let p = self.blossoms[cur].parent?;
            if p == b {
                return Some(Node::Blossom(cur));
            }
            cur = p;
        }
    }

    pub fn node_contains(&self, node: Node, v: VertexId) -> bool {
        match node {
            Node::Atom(a) => a == v,
            Node::Blossom(b) => self.contains(b, v),
        }
    }

    pub fn node_base(&self, node: Node) -> VertexId {
        match node {
            Node::Atom(a) => a,
            Node::Blossom(b) => self.blossoms[b].base,
        }
    }

    pub fn set_parent(&mut self, b: BlossomId, parent: Option<BlossomId>) {
        self.blossoms[b].parent = parent;
    }

    /// E(B): edges of the closed trails of `b` and all its sub-blossoms.
    pub fn edge_set(&self, b: BlossomId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(x) = stack.pop() {
            let bl = &self.blossoms[x];
            out.extend(bl.steps.iter().map(|s| s.edge));
            for c in &bl.children {
                if let Node::Blossom(cb) = *c {
                    stack.push(cb);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub struct Chain<'a> {
    forest: &'a BlossomForest,
    next: Option<BlossomId>,
}

impl Iterator for Chain<'_> {
    type Item = BlossomId;

    fn next(&mut self) -> Option<BlossomId> {
        let cur = self.next?;
        self.next = self.forest.blossoms[cur].parent;
        Some(cur)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DualState {
    pub y: Vec<i64>,
    /// Indexed by blossom id; zero for zero blossoms.
    pub z: Vec<i64>,
    pub y_free: i64,
}

impl DualState {
    pub fn zero(n: usize) -> Self {
        DualState {
            y: vec![0; n],
            z: Vec::new(),
            y_free: 0,
        }
    }

    /// L = −y(φ).
    pub fn l(&self) -> i64 {
        -self.y_free
    }

    pub fn z_of(&self, b: BlossomId) -> i64 {
        self.z.get(b).copied().unwrap_or(0)
    }

    pub fn is_positive(&self, b: BlossomId) -> bool {
        self.z_of(b) > 0
    }
}

#[derive(Clone, Debug)]
pub struct StructuredMatching {
    pub matching: Matching,
    pub forest: BlossomForest,
    pub duals: DualState,
}

impl StructuredMatching {
    pub fn trivial(g: &Multigraph, m: Matching) -> Self {
        StructuredMatching {
            matching: m,
            forest: BlossomForest::new(g.vertex_count()),
            duals: DualState::zero(g.vertex_count()),
        }
    }

    /// Positive blossoms containing `v`, innermost first.
    pub fn positive_chain(&self, v: VertexId) -> impl Iterator<Item = BlossomId> + '_ {
        self.forest
            .chain(v)
            .filter(move |&b| self.duals.is_positive(b))
    }

    /// z(v): total z over blossoms containing `v`.
    pub fn z_total(&self, v: VertexId) -> i64 {
        self.forest.chain(v).map(|b| self.duals.z_of(b)).sum()
    }
}

/// A list of violated conditions; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub violations: Vec<String>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Invariant(self.violations.join("; ")))
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.violations.join("\n"))
        }
    }
}

/// e ∈ I(B) = δ(V(B),M) ⊕ η(B), for `e` leaving `B`.
pub fn in_incident_set(b: &Blossom, e: EdgeId, matched: bool) -> bool {
    matched != b.base_edge.is(e)
}

/// ŷz(e) = y(u) + y(v) + Σ z(B) over B with e ∈ γ(B) ∪ I(B).
pub fn yz_hat(g: &Multigraph, s: &StructuredMatching, e: EdgeId) -> i64 {
    let edge = g.edge(e);
    let (u, v) = (edge.u, edge.v);
    let matched = s.matching.contains(e);
    let mut val = s.duals.y[u] + s.duals.y[v];
    for b in s.forest.chain(u) {
        let z = s.duals.z_of(b);
        if z == 0 {
            continue;
        }
        if s.forest.contains(b, v) || in_incident_set(s.forest.get(b), e, matched) {
            val += z;
        }
    }
    if u != v {
        for b in s.forest.chain(v) {
            let z = s.duals.z_of(b);
            if z != 0 && !s.forest.contains(b, u) && in_incident_set(s.forest.get(b), e, matched) {
                val += z;
            }
        }
    }
    val
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeClass {
    Tight,
    StrictlyDominated,
    StrictlyUnderrated,
    Infeasible,
}

pub fn classify_value(matched: bool, yz: i64) -> EdgeClass {
    let w = if matched { 2 } else { 0 };
    match (matched, yz.cmp(&w)) {
        (_, std::cmp::Ordering::Equal) => EdgeClass::Tight,
        (true, std::cmp::Ordering::Less) => EdgeClass::StrictlyUnderrated,
        (false, std::cmp::Ordering::Greater) => EdgeClass::StrictlyDominated,
        _ => EdgeClass::Infeasible,
    }
}

pub fn classify_edge(g: &Multigraph, s: &StructuredMatching, e: EdgeId) -> EdgeClass {
    classify_value(s.matching.contains(e), yz_hat(g, s, e))
}

fn node_name(n: Node) -> String {
    match n {
        Node::Atom(v) => format!("atom {v}"),
        Node::Blossom(b) => format!("blossom {b}"),
    }
}

/// Checks the clauses of the recursive definition for one blossom.
pub fn validate_blossom(
    g: &Multigraph,
    m: &Matching,
    forest: &BlossomForest,
    b: BlossomId,
) -> Result<Report> {
    let bl = forest.try_get(b)?;
    let mut rep = Report::default();
    let k = bl.children.len();
    if k == 0 || bl.steps.len() != k {
        rep.push(format!("blossom {b}: {k} children but {} steps", bl.steps.len()));
        return Ok(rep);
    }
    for c in &bl.children {
        if let Node::Blossom(cb) = *c {
            forest.try_get(cb)?;
        }
    }
    let mt = |e: EdgeId| m.mtype(e);
    let mut seen = std::collections::HashSet::new();
    for (t, s) in bl.steps.iter().enumerate() {
        let Ok(edge) = g.try_edge(s.edge) else {
            rep.push(format!("blossom {b}: step {t} uses unknown edge {}", s.edge));
            continue;
        };
        if !((edge.u == s.from && edge.v == s.to) || (edge.v == s.from && edge.u == s.to)) {
            rep.push(format!("blossom {b}: step {t} endpoints disagree with edge {}", s.edge));
        }
        if !seen.insert(s.edge) {
            rep.push(format!("blossom {b}: edge {} repeats in the closed trail", s.edge));
        }
        let from_node = bl.children[t];
        let to_node = bl.children[(t + 1) % k];
        if !forest.node_contains(from_node, s.from) {
            rep.push(format!("blossom {b}: step {t} does not leave {}", node_name(from_node)));
        }
        if !forest.node_contains(to_node, s.to) {
            rep.push(format!("blossom {b}: step {t} does not enter {}", node_name(to_node)));
        }
    }
    if !rep.is_ok() {
        return Ok(rep);
    }

    // Base node α.
    match bl.children[0] {
        Node::Atom(a) => {
            if bl.base != a {
                rep.push(format!("blossom {b}: base {} is not the atom α = {a}", bl.base));
            }
            let first = mt(bl.steps[0].edge);
            let last = mt(bl.steps[k - 1].edge);
            if first != last {
                rep.push(format!("blossom {b}: closed trail starts and ends with different M-types"));
            }
            if first != bl.m_type {
                rep.push(format!("blossom {b}: M-type differs from the closed trail's end edges"));
            }
        }
        Node::Blossom(cb) => {
            let c = forest.get(cb);
            if c.m_type != bl.m_type || c.base != bl.base {
                rep.push(format!("blossom {b}: M-type or base differs from α = blossom {cb}"));
            }
            if c.base_edge != bl.base_edge {
                rep.push(format!("blossom {b}: base edge differs from α = blossom {cb}"));
            }
        }
    }
    if let BaseEdge::Real(e) = bl.base_edge {
        match g.try_edge(e) {
            Ok(edge) => {
                if !edge.has_endpoint(bl.base) {
                    rep.push(format!("blossom {b}: base edge {e} misses the base vertex"));
                } else if forest.contains(b, edge.other(bl.base)) {
                    rep.push(format!("blossom {b}: base edge {e} does not leave the blossom"));
                }
                if mt(e) == bl.m_type {
                    rep.push(format!("blossom {b}: base edge {e} has the blossom's M-type"));
                }
            }
            Err(_) => rep.push(format!("blossom {b}: unknown base edge {e}")),
        }
    } else if bl.m_type != MType::Unmatched {
        rep.push(format!("blossom {b}: free blossom must be light"));
    }

    // Alternation at atom occurrences and degree/base conditions at sub-blossoms.
    let mut sub_count = std::collections::HashMap::new();
    for t in 0..k {
        let in_e = bl.steps[(t + k - 1) % k].edge;
        let out_e = bl.steps[t].edge;
        match bl.children[t] {
            Node::Atom(a) => {
                if t != 0 && mt(in_e) == mt(out_e) {
                    rep.push(format!("blossom {b}: edges {in_e},{out_e} do not alternate at atom {a}"));
                }
            }
            Node::Blossom(cb) => {
                *sub_count.entry(cb).or_insert(0usize) += 1;
                if t == 0 {
                    continue;
                }
                let c = forest.get(cb);
                let want = c.m_type.flip();
                let at_base = |e: EdgeId, endpoint: VertexId| endpoint == c.base && mt(e) == want;
                let in_ok = at_base(in_e, bl.steps[(t + k - 1) % k].to);
                let out_ok = at_base(out_e, bl.steps[t].from);
                if !in_ok && !out_ok {
                    rep.push(format!(
                        "blossom {b}: no edge of opposite M-type at the base of sub-blossom {cb}"
                    ));
                }
                let eta_ok = (in_ok && c.base_edge.is(in_e)) || (out_ok && c.base_edge.is(out_e));
                if !eta_ok {
                    rep.push(format!(
                        "blossom {b}: base edge of sub-blossom {cb} is not its closed-trail edge"
                    ));
                }
            }
        }
    }
    for (cb, cnt) in sub_count {
        if cnt != 1 {
            rep.push(format!("blossom {b}: sub-blossom {cb} has degree {} in C", 2 * cnt));
        }
        if forest.get(cb).parent != Some(b) {
            rep.push(format!("blossom {b}: sub-blossom {cb} has a different parent"));
        }
    }
    Ok(rep)
}

struct PCtx<'a> {
    m: &'a Matching,
    forest: &'a BlossomForest,
}

impl PCtx<'_> {
    fn mt(&self, e: EdgeId) -> MType {
        self.m.mtype(e)
    }

    fn type_of(&self, n: Node) -> Option<MType> {
        match n {
            Node::Atom(_) => None,
            Node::Blossom(b) => Some(self.forest.get(b).m_type),
        }
    }

    /// Appends P_i(v, β(b)) to `out`.
    fn p(&self, b: BlossomId, v: VertexId, i: u8, out: &mut Vec<Step>) -> Result<()> {
        let bl = self.forest.get(b);

        let mu = bl.m_type;
        let pos = bl
            .children
            .iter()
            .position(|&c| self.forest.node_contains(c, v))
            .ok_or_else(|| Error::Structural(format!("vertex {v} not in blossom {b}")))?;
        if pos == 0 {
            return match bl.children[0] {
                Node::Blossom(cb) => self.p(cb, v, i, out),
                Node::Atom(_) if i == 0 => Ok(()),
                Node::Atom(_) => self.walk(b, 0, true, out),
            };
        }
        let want = if i == 1 { mu } else { mu.flip() };
        match bl.children[pos] {
            Node::Atom(a) => {
                let fwd = bl.steps[pos];
                let bwd = bl.steps[pos - 1];
                if self.mt(fwd.edge) == want {
                    self.walk(b, pos, true, out)
                } else if self.mt(bwd.edge) == want {
                    self.walk(b, pos, false, out)
                } else {
                    Err(Error::Structural(format!(
                        "no P_{i} trail from atom {a} in blossom {b}"
                    )))
                }
            }
            Node::Blossom(cb) => {
                let c = self.forest.get(cb);
                let ii = if want == c.m_type { 1 } else { 0 };
                self.p(cb, v, ii, out)?;
                let forward = if c.base_edge.is(bl.steps[pos].edge) {
                    true
                } else if c.base_edge.is(bl.steps[pos - 1].edge) {
                    false
                } else {
                    return Err(Error::Structural(format!(
                        "sub-blossom {cb} of blossom {b} has no base edge in C"
                    )));
                };
                self.walk(b, pos, forward, out)
            }
        }
    }

    /// Walks around the closed trail of `b` from child `pos` to child 0,
    /// expanding sub-blossoms, and finishes inside α.
    fn walk(&self, b: BlossomId, mut pos: usize, forward: bool, out: &mut Vec<Step>) -> Result<()> {
        let bl = self.forest.get(b);
        let k = bl.children.len();
        let step_at = |p: usize| -> (Step, usize) {
            if forward {
                (bl.steps[p], (p + 1) % k)
            } else {
                (bl.steps[p - 1].reversed(), p - 1)
            }
        };
        loop {
            let (step, next) = step_at(pos);
            out.push(step);
            if next == 0 {
                if let Node::Blossom(cb) = bl.children[0] {
                    let ii = if Some(self.mt(step.edge)) == self.type_of(bl.children[0]) { 0 } else { 1 };
                    self.p(cb, step.to, ii, out)?;
                }
                return Ok(());
            }
            if let Node::Blossom(cb) = bl.children[next] {
                let c = self.forest.get(cb);
                let (exit, _) = step_at(next);
                if c.base_edge.is(exit.edge) {
                    let ii = if self.mt(step.edge) == c.m_type { 0 } else { 1 };
                    self.p(cb, step.to, ii, out)?;
                } else if c.base_edge.is(step.edge) {
                    let ii = if self.mt(exit.edge) == c.m_type { 0 } else { 1 };
                    let mut inner = Vec::new();
                    self.p(cb, exit.from, ii, &mut inner)?;
                    out.extend(inner.into_iter().rev().map(Step::reversed));
                } else {
                    return Err(Error::Structural(format!(
                        "sub-blossom {cb} of blossom {b} is crossed without its base edge"
                    )));
                }
            }
            pos = next;
        }
    }
}

/// Steps of P_i(v, β(b)).
pub fn p_steps(m: &Matching, forest: &BlossomForest, b: BlossomId, v: VertexId, i: u8) -> Result<Vec<Step>> {
    let ctx = PCtx { m, forest };
    let mut out = Vec::new();
    ctx.p(b, v, i, &mut out)?;
    Ok(out)
}

/// The alternating vβ-trail P_i(v, β) inside E(B).
pub fn p_trail(
    g: &Multigraph,
    m: &Matching,
    forest: &BlossomForest,
    b: BlossomId,
    v: VertexId,
    i: u8,
) -> Result<Trail> {
    if i > 1 {
        return Err(Error::Contract(format!("parity {i} is not 0 or 1")));
    }
    let steps = p_steps(m, forest, b, v, i)?;
    let t = Trail::new(g, v, steps).map_err(|e| Error::Structural(e.to_string()))?;
    if !t.is_alternating(m) {
        return Err(Error::Structural(format!("P_{i}({v}) in blossom {b} does not alternate")));
    }
    Ok(t)
}

/// Checks dual feasibility, tightness of positive blossoms and equal free
/// y-values. `active` restricts the check to a subgraph.
pub fn validate_structured(
    g: &Multigraph,
    f: &DegreeBound,
    s: &StructuredMatching,
    active: Option<&[bool]>,
) -> Report {
    let mut rep = Report::default();
    let on = |e: EdgeId| active.is_none_or(|a| a[e]);
    for (e, _) in g.edges() {
        if !on(e) {
            continue;
        }
        let yz = yz_hat(g, s, e);
        if classify_value(s.matching.contains(e), yz) == EdgeClass::Infeasible {
            let what = if s.matching.contains(e) { "underrated" } else { "dominated" };
            rep.push(format!("edge {e} is not {what} (yz = {yz})"));
        }
    }
    for bl in s.forest.iter() {
        let z = s.duals.z_of(bl.id);
        if z < 0 || z % 2 != 0 {
            rep.push(format!("blossom {}: z = {z} is not even and nonnegative", bl.id));
        }
        if z == 0 {
            continue;
        }
        match validate_blossom(g, &s.matching, &s.forest, bl.id) {
            Ok(r) => rep.violations.extend(r.violations),
            Err(e) => rep.push(e.to_string()),
        }
        let mut edges = s.forest.edge_set(bl.id);
        if let BaseEdge::Real(e) = bl.base_edge {
            edges.push(e);
        }
        for e in edges {
            if classify_edge(g, s, e) != EdgeClass::Tight {
                rep.push(format!("edge {e} of positive blossom {} is loose", bl.id));
            }
        }
        if bl.is_free() && s.matching.deficiency(bl.base, f) != 1 {
            rep.push(format!("free blossom {} has base deficiency != 1", bl.id));
        }
    }
    for v in 0..g.vertex_count() {
        if s.matching.is_free(v, f) {
            let y = s.duals.y[v];
            if y != s.duals.y_free {
                rep.push(format!("free vertex {v} has y = {y} != y_free = {}", s.duals.y_free));
            }
        }
    }
    rep
}
