//! The f-matching search: grows a forest of atoms and blossoms over tight
//! edges, adjusting duals until an augmenting trail of maximum incremental
//! weight appears or none exists.
//!
//! Duals start from zero on every call. Every blossom formed here is
//! outer-like, so z-values only grow and no blossom is ever expanded.

use std::collections::{HashSet, VecDeque};
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::Serialize;

use crate::blossom::{
    in_incident_set, p_steps, validate_structured, BaseEdge, BlossomForest, BlossomId, DualState,
    Node, StructuredMatching,
};
use crate::error::{Error, Result};
use crate::graph::{DegreeBound, EdgeId, MType, Matching, Multigraph, Step, Trail, VertexId};

#[derive(Clone, Debug, Default)]
pub struct SearchOptions<'a> {
    /// Give up once L would exceed this value.
    pub max_l: Option<i64>,
    /// Run `validate_structured` after every step.
    pub debug_validate: bool,
    pub trace: bool,
    /// Restrict the search to edges marked true.
    pub active: Option<&'a [bool]>,
}

impl SearchOptions<'_> {
    pub fn from_env() -> Self {
        SearchOptions {
            debug_validate: debug_assert_env(),
            ..Default::default()
        }
    }
}

/// True when `FMATCH_DEBUG_ASSERT=1`.
pub fn debug_assert_env() -> bool {
    std::env::var("FMATCH_DEBUG_ASSERT").is_ok_and(|v| v == "1")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Grow { edge: EdgeId, from: VertexId, to: VertexId, outer: bool },
    Blossom { blossom: BlossomId, edge: EdgeId, base: VertexId, heavy: bool },
    Augment { edge: EdgeId, length: usize },
    Adjust { y_free: i64, duals_hash: u64 },
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub structured: StructuredMatching,
    pub trail: Option<Trail>,
    /// L = −y(φ) when the search stopped.
    pub l: i64,
    pub trace: Vec<TraceEvent>,
}

impl SearchOutcome {
    pub fn sat_length(&self) -> Option<usize> {
        self.trail.as_ref().map(Trail::len)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AtomKind {
    Outer,
    Inner,
}

struct Search<'a> {
    g: &'a Multigraph,
    f: &'a DegreeBound,
    m: &'a Matching,
    active: Option<&'a [bool]>,
    forest: BlossomForest,
    duals: DualState,
    yz: Vec<i64>,
    top: Vec<Option<Node>>,
    atom_kind: Vec<AtomKind>,
    atom_tau: Vec<Option<Step>>,
    blossom_tau: Vec<Option<Step>>,
    tree: Vec<VertexId>,
    in_s: Vec<VertexId>,
    top_blossoms: Vec<BlossomId>,
    queue: VecDeque<(VertexId, EdgeId)>,
    trace: Option<Vec<TraceEvent>>,
    debug_validate: bool,
}

enum Found {
    Trail(Trail),
    Exhausted,
}

impl<'a> Search<'a> {
    fn is_active(&self, e: EdgeId) -> bool {
        self.active.is_none_or(|a| a[e])
    }

    fn weight(&self, e: EdgeId) -> i64 {
        if self.m.contains(e) {
            2
        } else {
            0
        }
    }

    fn tau(&self, n: Node) -> Option<Step> {
        match n {
            Node::Atom(v) => self.atom_tau[v],
            Node::Blossom(b) => self.blossom_tau[b],
        }
    }

    fn parent(&self, n: Node) -> Option<Node> {
        self.tau(n).map(|s| self.top[s.to].expect("parent in S"))
    }

    /// Whether `e` may leave node `n` in an alternating extension.
    fn eligible(&self, n: Node, e: EdgeId, matched: bool) -> bool {
        match n {
            Node::Atom(v) => match self.atom_kind[v] {
                AtomKind::Outer => !matched,
                AtomKind::Inner => matched,
            },
            Node::Blossom(b) => self.blossom_tau[b].is_none_or(|s| s.edge != e),
        }
    }

    fn push_vertex(&mut self, v: VertexId) {
        for &e in self.g.incident(v) {
            if self.is_active(e) {
                self.queue.push_back((v, e));
            }
        }
    }

    fn event(&mut self, ev: impl FnOnce(&Self) -> TraceEvent) {
        if self.trace.is_some() {
            let ev = ev(self);
            self.trace.as_mut().unwrap().push(ev);
        }
    }

    fn new(g: &'a Multigraph, f: &'a DegreeBound, m: &'a Matching, opts: &SearchOptions<'a>) -> Self {
        let n = g.vertex_count();
        let mut s = Search {
            g,
            f,
            m,
            active: opts.active,
            forest: BlossomForest::new(n),
            duals: DualState::zero(n),
            yz: vec![0; g.edge_count()],
            top: vec![None; n],
            atom_kind: vec![AtomKind::Outer; n],
            atom_tau: vec![None; n],
            blossom_tau: Vec::new(),
            tree: (0..n).collect(),
            in_s: Vec::new(),
            top_blossoms: Vec::new(),
            queue: VecDeque::new(),
            trace: opts.trace.then(Vec::new),
            debug_validate: opts.debug_validate,
        };
        for v in 0..n {
            if m.is_free(v, f) {
                s.top[v] = Some(Node::Atom(v));
                s.in_s.push(v);
            }
        }
        for i in 0..s.in_s.len() {
            let v = s.in_s[i];
            s.push_vertex(v);
        }
        s
    }

    fn structured(&self) -> StructuredMatching {
        StructuredMatching {
            matching: self.m.clone(),
            forest: self.forest.clone(),
            duals: self.duals.clone(),
        }
    }

    fn check(&self) -> Result<()> {
        if !self.debug_validate {
            return Ok(());
        }
        let sm = self.structured();
        for (e, _) in self.g.edges() {
            if self.is_active(e) && self.yz[e] != crate::blossom::yz_hat(self.g, &sm, e) {
                return Err(Error::Invariant(format!("cached yz of edge {e} is stale")));
            }
        }
        validate_structured(self.g, self.f, &sm, self.active).into_result()
    }

    fn run(&mut self, max_l: Option<i64>) -> Result<Found> {
        let cap = 4 * self.g.vertex_count() as i64 + 8;
        loop {
            while let Some((x, e)) = self.queue.pop_front() {
                if let Some(t) = self.scan(x, e)? {
                    return Ok(Found::Trail(t));
                }
            }
            if max_l.is_some_and(|ml| self.duals.l() >= ml) {
                return Ok(Found::Exhausted);
            }
            if !self.adjust()? {
                return Ok(Found::Exhausted);
            }
            if self.duals.l() > cap {
                return Err(Error::Invariant(format!("dual adjustment ran past L = {cap}")));
            }
            self.check()?;
        }
    }

    fn scan(&mut self, x: VertexId, e: EdgeId) -> Result<Option<Trail>> {
        let Some(u_node) = self.top[x] else {
            return Ok(None);
        };
        let edge = self.g.edge(e);
        let y = edge.other(x);
        let matched = self.m.contains(e);
        if !self.eligible(u_node, e, matched) || self.yz[e] != self.weight(e) {
            return Ok(None);
        }
        match self.top[y] {
            None => {
                self.grow(x, y, e, matched);
                self.check()?;
                Ok(None)
            }
            Some(v_node) if v_node == u_node => {
                if edge.is_loop() && matches!(u_node, Node::Atom(_)) {
                    self.cycle(u_node, u_node, x, y, e)
                } else {
                    Ok(None)
                }
            }
            Some(v_node) => {
                if !self.eligible(v_node, e, matched) {
                    return Ok(None);
                }
                if self.tree[x] != self.tree[y] {
                    self.augmenting_trail(x, y, e).map(Some)
                } else {
                    self.cycle(u_node, v_node, x, y, e)
                }
            }
        }
    }

    fn grow(&mut self, x: VertexId, y: VertexId, e: EdgeId, matched: bool) {
        let kind = if matched { AtomKind::Outer } else { AtomKind::Inner };
        self.top[y] = Some(Node::Atom(y));
        self.atom_kind[y] = kind;
        self.atom_tau[y] = Some(Step { edge: e, from: y, to: x });
        self.tree[y] = self.tree[x];
        self.in_s.push(y);
        self.push_vertex(y);
        self.event(|_| TraceEvent::Grow { edge: e, from: x, to: y, outer: matched });
    }

    fn nca(&self, a: Node, b: Node) -> Node {
        let mut seen = HashSet::new();
        let mut cur = Some(a);
        while let Some(n) = cur {
            seen.insert(n);
            cur = self.parent(n);
        }
        let mut cur = b;
        loop {
            if seen.contains(&cur) {
                return cur;
            }
            cur = self.parent(cur).expect("nodes in one tree share a root");
        }
    }

    /// Nodes from `n` up to, excluding, `anc`.
    fn path_up(&self, n: Node, anc: Node) -> Vec<Node> {
        let mut out = Vec::new();
        let mut cur = n;
        while cur != anc {
            out.push(cur);
            cur = self.parent(cur).expect("ancestor reachable");
        }
        out
    }

    fn cycle(&mut self, u: Node, v: Node, x: VertexId, y: VertexId, e: EdgeId) -> Result<Option<Trail>> {
        let a = self.nca(u, v);
        if let Node::Atom(r) = a {
            if self.atom_tau[r].is_none() && self.m.deficiency(r, self.f) >= 2 {
                return self.augmenting_trail(x, y, e).map(Some);
            }
        }
        self.form_blossom(a, u, v, x, y, e)?;
        self.check()?;
        Ok(None)
    }

    fn form_blossom(&mut self, a: Node, u: Node, v: Node, x: VertexId, y: VertexId, e: EdgeId) -> Result<()> {
        let u_path = self.path_up(u, a);
        let v_path = self.path_up(v, a);
        let mut children = vec![a];
        let mut steps = Vec::with_capacity(1 + u_path.len() + v_path.len());
        for &c in u_path.iter().rev() {
            children.push(c);
            steps.push(self.tau(c).expect("non-root").reversed());
        }
        steps.push(Step { edge: e, from: x, to: y });
        for &c in &v_path {
            children.push(c);
            steps.push(self.tau(c).expect("non-root"));
        }
        let (m_type, base) = match a {
            Node::Atom(r) => (self.m.mtype(steps[0].edge), r),
            Node::Blossom(b) => {
                let bl = self.forest.get(b);
                (bl.m_type, bl.base)
            }
        };
        let tau = self.tau(a);
        let base_edge = tau.map_or(BaseEdge::Artificial, |s| BaseEdge::Real(s.edge));
        let id = self.forest.add(m_type, base, base_edge, children.clone(), steps)?;
        self.duals.z.push(0);
        self.blossom_tau.push(tau);
        self.top_blossoms.retain(|b| !children.contains(&Node::Blossom(*b)));
        self.top_blossoms.push(id);
        let verts = self.forest.get(id).vertices.clone();
        for &w in &verts {
            self.top[w] = Some(Node::Blossom(id));
        }
        for &w in &verts {
            self.push_vertex(w);
        }
        self.event(|_| TraceEvent::Blossom {
            blossom: id,
            edge: e,
            base,
            heavy: m_type == MType::Matched,
        });
        Ok(())
    }

    /// Steps from `x` to the root of its tree, arriving at `x` on an edge of
    /// M-type `incoming`.
    fn path_to_root(&self, x: VertexId, incoming: MType) -> Result<Vec<Step>> {
        let mut out = Vec::new();
        let mut cur = x;
        let mut t = incoming;
        loop {
            let node = self.top[cur].expect("vertex in S");
            if let Node::Blossom(b) = node {
                let mu = self.forest.get(b).m_type;
                let i = if t == mu { 0 } else { 1 };
                out.extend(p_steps(self.m, &self.forest, b, cur, i)?);
            }
            match self.tau(node) {
                None => return Ok(out),
                Some(s) => {
                    out.push(s);
                    cur = s.to;
                    t = self.m.mtype(s.edge);
                }
            }
        }
    }

    fn augmenting_trail(&mut self, x: VertexId, y: VertexId, e: EdgeId) -> Result<Trail> {
        let t = self.m.mtype(e);
        let left = self.path_to_root(x, t)?;
        let right = self.path_to_root(y, t)?;
        let start = self.tree[x];
        let mut steps: Vec<Step> = left.into_iter().rev().map(Step::reversed).collect();
        steps.push(Step { edge: e, from: x, to: y });
        steps.extend(right);
        let trail = Trail::new(self.g, start, steps)?;
        let s = trail.len() as i64;
        if s != 1 + 2 * self.duals.l() {
            return Err(Error::Invariant(format!(
                "found trail of length {s} but L = {}",
                self.duals.l()
            )));
        }
        let len = trail.len();
        self.event(|_| TraceEvent::Augment { edge: e, length: len });
        Ok(trail)
    }

    fn endpoint_coef(&self, x: VertexId, e: EdgeId, matched: bool) -> i64 {
        match self.top[x] {
            None => 0,
            Some(Node::Atom(a)) => match self.atom_kind[a] {
                AtomKind::Outer => -1,
                AtomKind::Inner => 1,
            },
            Some(Node::Blossom(b)) => {
                if in_incident_set(self.forest.get(b), e, matched) {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Rate of change of ŷz(e) per unit of dual adjustment.
    fn coef(&self, e: EdgeId) -> i64 {
        let edge = self.g.edge(e);
        let matched = self.m.contains(e);
        match (self.top[edge.u], self.top[edge.v]) {
            (Some(a), Some(b)) if a == b => match a {
                Node::Atom(_) => 2 * self.endpoint_coef(edge.u, e, matched),
                Node::Blossom(_) => 0,
            },
            _ => self.endpoint_coef(edge.u, e, matched) + self.endpoint_coef(edge.v, e, matched),
        }
    }

    /// One unit of dual change. Returns false when no edge limits it.
    fn adjust(&mut self) -> Result<bool> {
        let mut limit: Option<i64> = None;
        let mut coefs = vec![0i64; self.g.edge_count()];
        for e in 0..self.g.edge_count() {
            if !self.is_active(e) {
                continue;
            }
            let c = self.coef(e);
            coefs[e] = c;
            let matched = self.m.contains(e);
            let room = if matched && c > 0 {
                (2 - self.yz[e]) / c
            } else if !matched && c < 0 {
                self.yz[e] / -c
            } else {
                continue;
            };
            limit = Some(limit.map_or(room, |l| l.min(room)));
        }
        let Some(limit) = limit else {
            return Ok(false);
        };
        if limit < 1 {
            return Err(Error::Invariant(
                "dual adjustment blocked by an unprocessed tight edge".into(),
            ));
        }
        for &v in &self.in_s {
            match self.top[v] {
                Some(Node::Atom(a)) if self.atom_kind[a] == AtomKind::Inner => self.duals.y[v] += 1,
                _ => self.duals.y[v] -= 1,
            }
        }
        for &b in &self.top_blossoms {
            self.duals.z[b] += 2;
        }
        self.duals.y_free -= 1;
        for (e, &c) in coefs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            self.yz[e] += c;
            if self.yz[e] == self.weight(e) {
                let edge = self.g.edge(e);
                for w in [edge.u, edge.v] {
                    if self.top[w].is_some() {
                        self.queue.push_back((w, e));
                    }
                }
            }
        }
        self.event(|s| TraceEvent::Adjust {
            y_free: s.duals.y_free,
            duals_hash: s.duals_hash(),
        });
        Ok(true)
    }

    fn duals_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.duals.y.hash(&mut h);
        self.duals.z.hash(&mut h);
        h.finish()
    }
}

/// Runs one f-matching search from zero duals.
pub fn f_matching_search(
    g: &Multigraph,
    f: &DegreeBound,
    m: &Matching,
    opts: &SearchOptions<'_>,
) -> Result<SearchOutcome> {
    if f.len() != g.vertex_count() {
        return Err(Error::Contract("degree bound size differs from vertex count".into()));
    }
    m.check_feasible(f)
        .map_err(|e| Error::Contract(format!("search needs a feasible matching: {e}")))?;
    let mut s = Search::new(g, f, m, opts);
    s.check()?;
    let found = s.run(opts.max_l)?;
    let trail = match found {
        Found::Trail(t) => Some(t),
        Found::Exhausted => None,
    };
    Ok(SearchOutcome {
        structured: s.structured(),
        trail,
        l: s.duals.l(),
        trace: s.trace.take().unwrap_or_default(),
    })
}
