//! Independent ground truth for tests: exhaustive search, max-flow on
//! bipartite graphs, symmetric-difference decomposition and checks of the
//! phase bounds.

use std::collections::VecDeque;

use serde::Serialize;

use crate::blocking::PhaseStats;
use crate::blossom::Report;
use crate::error::{Error, Result};
use crate::graph::{DegreeBound, EdgeId, Matching, Multigraph, Step, Trail, VertexId};

pub const BRUTE_FORCE_MAX_EDGES: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub max_cardinality: usize,
    pub witness: Vec<EdgeId>,
    pub method: &'static str,
}

/// Exact maximum f-matching by enumerating edge subsets with degree
/// pruning. Refuses graphs with more than 24 edges.
pub fn brute_force_max_f_matching(g: &Multigraph, f: &DegreeBound) -> Result<OracleResult> {
    let m = g.edge_count();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(Error::TooLarge {
            method: "brute force",
            detail: format!("{m} edges > {BRUTE_FORCE_MAX_EDGES}"),
        });
    }
    struct St<'a> {
        g: &'a Multigraph,
        cap: Vec<u32>,
        chosen: Vec<EdgeId>,
        best: Vec<EdgeId>,
    }
    fn go(st: &mut St<'_>, i: usize) {
        let m = st.g.edge_count();
        if st.chosen.len() > st.best.len() {
            st.best = st.chosen.clone();
        }
        if i == m {
            return;
        }
        let cap_half = st.cap.iter().map(|&c| c as usize).sum::<usize>() / 2;
        if st.chosen.len() + (m - i).min(cap_half) <= st.best.len() {
            return;
        }
        let e = st.g.edge(i);
        let fits = if e.is_loop() { st.cap[e.u] >= 2 } else { st.cap[e.u] >= 1 && st.cap[e.v] >= 1 };
        if fits {
            st.cap[e.u] -= 1;
            st.cap[e.v] -= 1;
            st.chosen.push(i);
            go(st, i + 1);
            st.chosen.pop();
            st.cap[e.u] += 1;
            st.cap[e.v] += 1;
        }
        go(st, i + 1);
    }
    let mut st = St {
        g,
        cap: f.as_slice().to_vec(),
        chosen: Vec::new(),
        best: Vec::new(),
    };
    go(&mut st, 0);
    Ok(OracleResult {
        max_cardinality: st.best.len(),
        witness: st.best,
        method: "brute",
    })
}

/// Two-coloring of `g`, or `None` when an odd cycle or loop exists.
pub fn bipartition(g: &Multigraph) -> Option<Vec<bool>> {
    let n = g.vertex_count();
    let mut color: Vec<Option<bool>> = vec![None; n];
    for s in 0..n {
        if color[s].is_some() {
            continue;
        }
        color[s] = Some(false);
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            let cv = color[v].unwrap();
            for &e in g.incident(v) {
                let w = g.edge(e).other(v);
                match color[w] {
                    None => {
                        color[w] = Some(!cv);
                        q.push_back(w);
                    }
                    Some(cw) if cw == cv => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.unwrap_or(false)).collect())
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, a: usize, b: usize, c: i64) -> usize {
        let id = self.to.len();
        self.head[a].push(id);
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(id + 1);
        self.to.push(a);
        self.cap.push(0);
        id
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.head.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &a in &self.head[v] {
                    if self.cap[a] > 0 && level[self.to[a]] == usize::MAX {
                        level[self.to[a]] = level[v] + 1;
                        q.push_back(self.to[a]);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0usize; n];
            loop {
                let pushed = self.dfs(s, t, i64::MAX, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, lim: i64, level: &[usize], it: &mut [usize]) -> i64 {
        if v == t {
            return lim;
        }
        while it[v] < self.head[v].len() {
            let a = self.head[v][it[v]];
            let w = self.to[a];
            if self.cap[a] > 0 && level[w] == level[v] + 1 {
                let got = self.dfs(w, t, lim.min(self.cap[a]), level, it);
                if got > 0 {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            it[v] += 1;
        }
        0
    }
}

/// Maximum f-matching of a bipartite multigraph via max-flow with vertex
/// capacities f.
pub fn bipartite_flow_oracle(g: &Multigraph, f: &DegreeBound) -> Result<OracleResult> {
    if g.has_loops() {
        return Err(Error::Refused("graph has loops".into()));
    }
    let side = bipartition(g).ok_or_else(|| Error::Refused("graph is not bipartite".into()))?;
    let n = g.vertex_count();
    let (s, t) = (n, n + 1);
    let mut d = Dinic::new(n + 2);
    for v in 0..n {
        if side[v] {
            d.add(v, t, i64::from(f.get(v)));
        } else {
            d.add(s, v, i64::from(f.get(v)));
        }
    }
    let mut arcs = Vec::new();
    for (e, edge) in g.edges() {
        let (l, r) = if side[edge.u] { (edge.v, edge.u) } else { (edge.u, edge.v) };
        arcs.push((e, d.add(l, r, 1)));
    }
    let flow = d.max_flow(s, t);
    let witness: Vec<EdgeId> = arcs
        .into_iter()
        .filter(|&(_, a)| d.cap[a] == 0)
        .map(|(e, _)| e)
        .collect();
    debug_assert_eq!(witness.len() as i64, flow);
    Ok(OracleResult {
        max_cardinality: flow as usize,
        witness,
        method: "flow",
    })
}

/// M ⊕ N split into alternating trails and circuits.
#[derive(Clone, Debug, Default)]
pub struct Decomposition {
    pub trails: Vec<Trail>,
    pub circuits: Vec<Trail>,
}

impl Decomposition {
    /// Trails whose first and last edges lie in N − M.
    pub fn augmenting<'a>(&'a self, m: &'a Matching) -> impl Iterator<Item = &'a Trail> + 'a {
        self.trails.iter().filter(move |t| {
            let s = t.steps();
            !m.contains(s[0].edge) && !m.contains(s[s.len() - 1].edge)
        })
    }

    /// Trails whose first and last edges lie in M − N.
    pub fn decreasing<'a>(&'a self, m: &'a Matching) -> impl Iterator<Item = &'a Trail> + 'a {
        self.trails.iter().filter(move |t| {
            let s = t.steps();
            m.contains(s[0].edge) && m.contains(s[s.len() - 1].edge)
        })
    }
}

/// Pairs the half-edges of M ⊕ N at every vertex, one from M − N with one
/// from N − M, and follows the pairing. Unpaired halves are trail ends.
pub fn symmetric_difference_decompose(g: &Multigraph, m: &Matching, n: &Matching) -> Decomposition {
    let nv = g.vertex_count();
    // half 2e is at edge.u, 2e+1 at edge.v
    let half_vertex = |h: usize| {
        let e = g.edge(h / 2);
        if h % 2 == 0 {
            e.u
        } else {
            e.v
        }
    };
    let in_d = |e: EdgeId| m.contains(e) != n.contains(e);
    let mut pair = vec![usize::MAX; 2 * g.edge_count()];
    let mut at: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); nv];
    for (e, edge) in g.edges() {
        if !in_d(e) {
            continue;
        }
        for (h, v) in [(2 * e, edge.u), (2 * e + 1, edge.v)] {
            if m.contains(e) {
                at[v].0.push(h);
            } else {
                at[v].1.push(h);
            }
        }
    }
    for (ms, ns) in &at {
        for (&a, &b) in ms.iter().zip(ns.iter()) {
            pair[a] = b;
            pair[b] = a;
        }
    }
    let mut used = vec![false; 2 * g.edge_count()];
    let walk = |start_half: usize, closed: bool, used: &mut Vec<bool>| -> Trail {
        let start = half_vertex(start_half);
        let mut steps = Vec::new();
        let mut h = start_half;
        loop {
            used[h] = true;
            let other = h ^ 1;
            used[other] = true;
            steps.push(Step {
                edge: h / 2,
                from: half_vertex(h),
                to: half_vertex(other),
            });
            let next = pair[other];
            if next == usize::MAX || (closed && next == start_half) {
                break;
            }
            h = next;
        }
        Trail::new(g, start, steps).expect("pairing yields a trail")
    };
    let mut out = Decomposition::default();
    // N-ends first so that augmenting trails start on an unmatched edge.
    for pass in 0..2 {
        for v in 0..nv {
            let (ms, ns) = &at[v];
            let ends: Vec<usize> = if pass == 0 {
                ns.iter().skip(ms.len()).copied().collect()
            } else {
                ms.iter().skip(ns.len()).copied().collect()
            };
            for h in ends {
                if !used[h] {
                    out.trails.push(walk(h, false, &mut used));
                }
            }
        }
    }
    for h in 0..pair.len() {
        if pair[h] != usize::MAX && !used[h] {
            out.circuits.push(walk(h, true, &mut used));
        }
    }
    out
}

/// All augmenting trails of length at most `max_len`, each listed once in
/// a canonical orientation, found by depth-first search over alternating
/// extensions from every free vertex.
pub fn enumerate_augmenting_trails(
    g: &Multigraph,
    f: &DegreeBound,
    m: &Matching,
    max_len: usize,
) -> Vec<Trail> {
    struct Dfs<'a> {
        g: &'a Multigraph,
        f: &'a DegreeBound,
        m: &'a Matching,
        max_len: usize,
        used: Vec<bool>,
        steps: Vec<Step>,
        found: std::collections::BTreeMap<Vec<EdgeId>, Trail>,
    }
    fn go(d: &mut Dfs<'_>, start: VertexId, at: VertexId, need_matched: bool) {
        if d.steps.len() >= d.max_len {
            return;
        }
        for &e in d.g.incident(at) {
            if d.used[e] || d.m.contains(e) != need_matched {
                continue;
            }
            let to = d.g.edge(e).other(at);
            d.used[e] = true;
            d.steps.push(Step { edge: e, from: at, to });
            if !need_matched {
                let ok_end = if to == start {
                    d.m.deficiency(to, d.f) >= 2
                } else {
                    d.m.is_free(to, d.f)
                };
                if ok_end {
                    let t = Trail::new(d.g, start, d.steps.clone()).expect("dfs builds trails");
                    let fwd: Vec<EdgeId> = t.edge_ids().collect();
                    let mut rev = fwd.clone();
                    rev.reverse();
                    let (key, trail) = if rev < fwd { (rev, t.reversed()) } else { (fwd, t) };
                    d.found.entry(key).or_insert(trail);
                }
            }
            go(d, start, to, !need_matched);
            d.steps.pop();
            d.used[e] = false;
        }
    }
    let mut d = Dfs {
        g,
        f,
        m,
        max_len,
        used: vec![false; g.edge_count()],
        steps: Vec::new(),
        found: Default::default(),
    };
    for v in 0..g.vertex_count() {
        if m.is_free(v, f) {
            go(&mut d, v, v, false);
        }
    }
    d.found.into_values().collect()
}

/// Length of a shortest augmenting trail, by exhaustive search.
pub fn brute_force_sat_length(g: &Multigraph, f: &DegreeBound, m: &Matching) -> Option<usize> {
    let mut len = 1;
    while len <= 2 * g.edge_count() + 1 {
        let found = enumerate_augmenting_trails(g, f, m, len);
        if let Some(t) = found.iter().map(Trail::len).min() {
            return Some(t);
        }
        if len >= g.edge_count() {
            return None;
        }
        len += 2;
    }
    None
}

/// Sat lengths must be odd and strictly increasing.
pub fn check_sat_monotonicity(sat_lengths: &[usize]) -> Report {
    let mut rep = Report::default();
    for (k, &s) in sat_lengths.iter().enumerate() {
        if s % 2 == 0 {
            rep.push(format!("phase {}: even sat length {s}", k + 1));
        }
        if s < 2 * k + 1 {
            rep.push(format!("phase {}: sat length {s} < {}", k + 1, 2 * k + 1));
        }
    }
    for (k, w) in sat_lengths.windows(2).enumerate() {
        if w[1] <= w[0] {
            rep.push(format!("phase {}: sat length {} does not exceed {}", k + 2, w[1], w[0]));
        }
    }
    rep
}

/// Phase-count and sat-length bounds.
pub fn bound_check(stats: &PhaseStats, n: usize, f_total: u64, simple: bool) -> Report {
    let mut rep = Report::default();
    let phases = stats.phase_count as f64;
    let sqrt_bound = 2.0 * (f_total as f64).sqrt() + 1.0;
    if phases > sqrt_bound {
        rep.push(format!("{phases} phases > 2·sqrt(f(V)) + 1 = {sqrt_bound:.3}"));
    }
    if simple {
        let b = 4.0 * (n as f64).powf(2.0 / 3.0);
        if phases >= b {
            rep.push(format!("{phases} phases >= 4·n^(2/3) = {b:.3}"));
        }
    }
    for p in &stats.phases {
        if p.s > 2 * n {
            rep.push(format!("phase {}: sat length {} > 2n = {}", p.phase, p.s, 2 * n));
        }
    }
    rep
}

/// At the start of every phase, the augmentations still to come (measured
/// against the final cardinality) number at most 4(n/s)² for that phase's s.
pub fn remaining_augmentations_check(stats: &PhaseStats, n: usize) -> Report {
    let mut rep = Report::default();
    for p in &stats.phases {
        let remaining = stats.final_cardinality - p.cardinality_before;
        let bound = 4 * n * n;
        if remaining * p.s * p.s > bound {
            rep.push(format!(
                "phase {}: {remaining} augmentations remain, 4(n/s)^2 = {:.3}",
                p.phase,
                bound as f64 / (p.s * p.s) as f64
            ));
        }
    }
    rep
}

/// Vertices with positive deficiency.
pub fn free_vertices(m: &Matching, f: &DegreeBound) -> Vec<VertexId> {
    (0..f.len()).filter(|&v| m.is_free(v, f)).collect()
}
