//! The nested-blossom family EG(b).
//!
//! b blossoms B_1 ⊂ … ⊂ B_b with bases β_1..β_b. B_1 is the triangle
//! β_1 β_1′ s_24; B_i adds the path β_{i−1} β_i s_i1 s_i2 s_i3 s_i4 where
//! s_i4 is s_{i−1,1} (s_24 for i = 2). An alternating path P = p_0 … p_{3b−2}
//! hangs off the blossoms through the cross edges e_i = β_i p_{1+3(b−i)}.
//! β_b and p_0 are the only free vertices, and every shortest augmenting
//! trail has length 4b+1.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::blocking::{certify, solve_from, SolveOptions};
use crate::blossom::{validate_structured, Report};
use crate::error::{Error, Result};
use crate::graph::{classify_trail, DegreeBound, EdgeId, MType, Matching, Multigraph, Trail, VertexId};
use crate::oracle::{brute_force_sat_length, enumerate_augmenting_trails};
use crate::petalevel::{track_trail, Mode};

/// Largest b for which verification enumerates every sat.
pub const ENUMERATE_MAX_B: usize = 4;

#[derive(Clone, Debug)]
pub struct EgInstance {
    pub b: usize,
    pub graph: Multigraph,
    pub f: DegreeBound,
    pub m0: Matching,
    pub layout: EgLayout,
}

/// Vertex and edge names of an instance; also the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgLayout {
    pub b: usize,
    pub expected_s: usize,
    /// β_1..β_b.
    pub beta: Vec<VertexId>,
    pub beta1_prime: VertexId,
    pub s24: VertexId,
    /// `spine[i - 2]` = [s_i1, s_i2, s_i3, s_i4] for i = 2..b.
    pub spine: Vec<[VertexId; 4]>,
    /// p_0..p_{3b−2}.
    pub path: Vec<VertexId>,
    /// `path_edges[r - 1]` = p_{r−1} p_r.
    pub path_edges: Vec<EdgeId>,
    /// `cross[i - 1]` = e_i.
    pub cross: Vec<EdgeId>,
    /// E(B_b).
    pub blossom_edges: Vec<EdgeId>,
    /// s_i3 s_i4 for i > 1, and s_24 β_1′.
    pub spt_excluded: Vec<EdgeId>,
    pub m0: Vec<EdgeId>,
}

struct Builder {
    g: Multigraph,
    matched: Vec<EdgeId>,
}

impl Builder {
    fn edge(&mut self, u: VertexId, v: VertexId, t: MType) -> EdgeId {
        let e = self.g.add_edge(u, v).expect("vertices in range");
        if t == MType::Matched {
            self.matched.push(e);
        }
        e
    }
}

fn unmatched_iff(c: bool) -> MType {
    if c {
        MType::Unmatched
    } else {
        MType::Matched
    }
}

pub fn generate_eg(b: usize) -> Result<EgInstance> {
    if b < 2 || b % 2 != 0 {
        return Err(Error::Contract(format!("EG(b) needs an even b >= 2, got {b}")));
    }
    let beta: Vec<VertexId> = (0..b).collect();
    let beta1_prime = b;
    let s24 = b + 1;
    let mut spine = Vec::new();
    for i in 2..=b {
        let base = b + 2 + 3 * (i - 2);
        let s4 = if i == 2 { s24 } else { spine.last().map(|s: &[VertexId; 4]| s[0]).unwrap() };
        spine.push([base, base + 1, base + 2, s4]);
    }
    let p0 = b + 2 + 3 * (b - 1);
    let path: Vec<VertexId> = (p0..p0 + 3 * b - 1).collect();
    let n = p0 + path.len();
    let mut bd = Builder {
        g: Multigraph::new(n),
        matched: Vec::new(),
    };
    let mut blossom_edges = vec![
        bd.edge(beta[0], s24, MType::Matched),
        bd.edge(beta1_prime, beta[0], MType::Matched),
    ];
    let s24_b1p = bd.edge(s24, beta1_prime, MType::Unmatched);
    blossom_edges.push(s24_b1p);
    let mut spt_excluded = vec![s24_b1p];
    for i in 2..=b {
        let s = spine[i - 2];
        let even = i % 2 == 0;
        blossom_edges.push(bd.edge(beta[i - 2], beta[i - 1], unmatched_iff(even)));
        blossom_edges.push(bd.edge(beta[i - 1], s[0], unmatched_iff(even)));
        blossom_edges.push(bd.edge(s[0], s[1], unmatched_iff(!even)));
        blossom_edges.push(bd.edge(s[1], s[2], unmatched_iff(even)));
        let e = bd.edge(s[2], s[3], unmatched_iff(!even));
        blossom_edges.push(e);
        spt_excluded.push(e);
    }
    let path_edges: Vec<EdgeId> = (1..path.len())
        .map(|r| bd.edge(path[r - 1], path[r], unmatched_iff(r % 2 == 1)))
        .collect();
    let cross: Vec<EdgeId> = (1..=b)
        .map(|i| bd.edge(beta[i - 1], path[1 + 3 * (b - i)], unmatched_iff(i % 2 == 1)))
        .collect();
    let g = bd.g;
    let mut deg = vec![0u32; n];
    for &e in &bd.matched {
        let x = g.edge(e);
        deg[x.u] += 1;
        deg[x.v] += 1;
    }
    deg[beta[b - 1]] += 1;
    deg[path[0]] += 1;
    let f = DegreeBound::from_vec(deg);
    let m0 = Matching::from_edges(&g, &f, &bd.matched)?;
    let layout = EgLayout {
        b,
        expected_s: 4 * b + 1,
        beta,
        beta1_prime,
        s24,
        spine,
        path,
        path_edges,
        cross,
        blossom_edges,
        spt_excluded,
        m0: bd.matched,
    };
    Ok(EgInstance {
        b,
        graph: g,
        f,
        m0,
        layout,
    })
}

impl EgInstance {
    fn edge_between(&self, u: VertexId, v: VertexId) -> Result<EdgeId> {
        self.graph
            .incident(u)
            .iter()
            .copied()
            .find(|&e| self.graph.edge(e).other(u) == v)
            .ok_or_else(|| Error::Structural(format!("no edge {u}-{v}")))
    }

    fn trail_through(&self, vs: &[VertexId]) -> Result<Trail> {
        let edges = vs
            .windows(2)
            .map(|w| self.edge_between(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Trail::from_vertex_edges(&self.graph, vs, &edges)
    }

    /// Vertices of the prefix from β_b to β_i, before the cross edge.
    pub fn prefix_vertices(&self, i: usize) -> Vec<VertexId> {
        let l = &self.layout;
        let mut vs: Vec<VertexId> = (i..=self.b).rev().map(|k| l.beta[k - 1]).collect();
        for k in (2..=i).rev() {
            vs.extend_from_slice(&l.spine[k - 2][..3]);
        }
        vs.push(l.s24);
        vs.push(l.beta1_prime);
        vs.extend((1..=i).map(|k| l.beta[k - 1]));
        vs
    }
}

/// The sat through cross edge e_i: β_b … β_i S β_1′ β_1 … β_i, then e_i and
/// P back down to p_0.
pub fn expected_cross_trail(inst: &EgInstance, i: usize) -> Result<Trail> {
    if !(1..=inst.b).contains(&i) {
        return Err(Error::Contract(format!("cross edge index {i} outside 1..={}", inst.b)));
    }
    let mut vs = inst.prefix_vertices(i);
    let r = 1 + 3 * (inst.b - i);
    vs.extend((0..=r).rev().map(|k| inst.layout.path[k]));
    inst.trail_through(&vs)
}

/// Edges on which each vertex of V(B_b) is first reached by an alternating
/// walk from β_b inside E(B_b), breadth first.
pub fn shortest_path_tree(inst: &EgInstance) -> Result<BTreeSet<EdgeId>> {
    let g = &inst.graph;
    let inside: BTreeSet<EdgeId> = inst.layout.blossom_edges.iter().copied().collect();
    let root = inst.layout.beta[inst.b - 1];
    // state: (vertex, type of the edge it was reached on); root as if matched
    let idx = |t: MType| usize::from(t == MType::Matched);
    let mut dist = vec![[usize::MAX; 2]; g.vertex_count()];
    let mut parent: Vec<[Vec<EdgeId>; 2]> = vec![Default::default(); g.vertex_count()];
    dist[root][1] = 0;
    let mut q = VecDeque::from([(root, MType::Matched)]);
    while let Some((u, t)) = q.pop_front() {
        let d = dist[u][idx(t)];
        for &e in g.incident(u) {
            let et = inst.m0.mtype(e);
            if !inside.contains(&e) || et == t {
                continue;
            }
            let v = g.edge(e).other(u);
            let slot = &mut dist[v][idx(et)];
            if *slot == usize::MAX {
                *slot = d + 1;
                q.push_back((v, et));
            }
            if *slot == d + 1 {
                parent[v][idx(et)].push(e);
            }
        }
    }
    let mut tree = BTreeSet::new();
    let vertices: BTreeSet<VertexId> = inside
        .iter()
        .flat_map(|&e| [g.edge(e).u, g.edge(e).v])
        .collect();
    for v in vertices {
        if v == root {
            continue;
        }
        let best = (0..2).filter(|&k| dist[v][k] != usize::MAX).min_by_key(|&k| dist[v][k]);
        let Some(k) = best else {
            return Err(Error::Structural(format!("vertex {v} unreachable inside B_b")));
        };
        if dist[v][0] == dist[v][1] || parent[v][k].len() != 1 {
            return Err(Error::Structural(format!("vertex {v} has no unique tree edge")));
        }
        tree.insert(parent[v][k][0]);
    }
    Ok(tree)
}

#[derive(Clone, Debug, Serialize)]
pub struct EgReport {
    pub b: usize,
    pub n: usize,
    pub m: usize,
    pub expected_s: usize,
    pub solver_s: Option<usize>,
    pub phases: usize,
    pub final_cardinality: usize,
    /// `level_table[i - 1]` = natural petalevels of β_1..β_i on the e_i trail.
    pub level_table: Vec<Vec<i64>>,
    /// Distinct (vertex, natural petalevel) pairs over the b expected sats.
    pub distinct_pairs: usize,
    /// Distinct (base vertex, level) pairs from the level table.
    pub distinct_base_pairs: usize,
    /// Number of sats found by exhaustive enumeration, when b is small.
    pub enumerated_sats: Option<usize>,
    pub report: Report,
}

/// Runs every check on `inst`; failures land in the report.
pub fn verify_eg(inst: &EgInstance) -> Result<EgReport> {
    let (g, f, b) = (&inst.graph, &inst.f, inst.b);
    let l = &inst.layout;
    let mut report = Report::default();

    if f.as_slice().iter().any(|&k| !(1..=2).contains(&k)) {
        report.push("some f value is outside {1, 2}");
    }
    let free: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| inst.m0.is_free(v, f)).collect();
    if free != vec![l.beta[b - 1].min(l.path[0]), l.beta[b - 1].max(l.path[0])] {
        report.push(format!("free vertices are {free:?}"));
    }

    let mut expected = Vec::new();
    for i in 1..=b {
        let t = expected_cross_trail(inst, i)?;
        let c = classify_trail(g, &t, &inst.m0, f);
        if !c.augmenting {
            report.push(format!("expected trail {i} is not augmenting"));
        }
        if t.len() != l.expected_s {
            report.push(format!("expected trail {i} has length {}", t.len()));
        }
        let prefix = inst.prefix_vertices(i).len() - 1;
        if prefix != b + 3 * i - 1 {
            report.push(format!("expected trail {i} has prefix length {prefix}"));
        }
        expected.push(t);
    }

    let sol = solve_from(
        g,
        f,
        &inst.m0,
        SolveOptions {
            record: true,
            debug_validate: false,
        },
    )?;
    let solver_s = sol.stats.phases.first().map(|p| p.s);
    if sol.stats.phase_count != 1 {
        report.push(format!("solver used {} phases", sol.stats.phase_count));
    }
    if solver_s != Some(l.expected_s) {
        report.push(format!("solver sat length {solver_s:?}"));
    }
    if sol.matching.len() != inst.m0.len() + 1 {
        report.push(format!("final cardinality {}", sol.matching.len()));
    }
    let cert = certify(g, f, &sol.matching, &sol.final_search);
    if !cert.is_valid() {
        report.push(format!("final matching not certified: {}", cert.structured));
    }

    let mut level_table = Vec::new();
    let mut pairs = BTreeSet::new();
    let mut base_pairs = BTreeSet::new();
    if let Some(rec) = sol.records.first() {
        let st = &rec.outcome.structured;
        let v = validate_structured(g, f, st, None);
        if !v.is_ok() {
            report.push(format!("phase duals invalid: {v}"));
        }
        if st.duals.y_free != -2 * b as i64 {
            report.push(format!("y_free = {}, expected {}", st.duals.y_free, -2 * b as i64));
        }
        let found = rec.outcome.trail.as_ref().expect("phase has a sat");
        let key = |t: &Trail| t.edge_ids().collect::<BTreeSet<_>>();
        if !expected.iter().any(|t| key(t) == key(found)) {
            report.push("solver sat is none of the expected cross trails");
        }
        for (i, t) in expected.iter().enumerate() {
            let tr = track_trail(g, st, t, &Mode::Natural)?;
            for (k, x) in tr.iter().enumerate() {
                if x.level != k as i64 {
                    report.push(format!("expected trail {}: step {k} at level {}", i + 1, x.level));
                    break;
                }
            }
            let prefix = inst.prefix_vertices(i + 1).len();
            let row: Vec<i64> = tr[prefix - (i + 1)..prefix].iter().map(|x| x.level).collect();
            for (k, &lev) in row.iter().enumerate() {
                base_pairs.insert((l.beta[k], lev));
            }
            level_table.push(row);
            pairs.extend(tr.iter().map(|x| (x.vertex, x.level)));
        }
    }
    if base_pairs.len() < b * (b - 1) / 2 {
        report.push(format!("only {} distinct base petalevels", base_pairs.len()));
    }

    let mut want: BTreeSet<EdgeId> = l.blossom_edges.iter().copied().collect();
    for e in &l.spt_excluded {
        want.remove(e);
    }
    match shortest_path_tree(inst) {
        Ok(tree) if tree == want => {}
        Ok(tree) => report.push(format!(
            "shortest path tree differs: extra {:?}, missing {:?}",
            tree.difference(&want).collect::<Vec<_>>(),
            want.difference(&tree).collect::<Vec<_>>()
        )),
        Err(e) => report.push(format!("shortest path tree: {e}")),
    }

    let mut enumerated_sats = None;
    if b <= ENUMERATE_MAX_B {
        let s = brute_force_sat_length(g, f, &inst.m0);
        if s != Some(l.expected_s) {
            report.push(format!("exhaustive sat length {s:?}"));
        }
        let sats = enumerate_augmenting_trails(g, f, &inst.m0, l.expected_s);
        let cross: HashMap<EdgeId, usize> = l.cross.iter().enumerate().map(|(k, &e)| (e, k + 1)).collect();
        for t in &sats {
            let hit: Vec<usize> = t.edge_ids().filter_map(|e| cross.get(&e).copied()).collect();
            let [i] = hit[..] else {
                report.push(format!("sat {:?} uses cross edges {hit:?}", t.edge_ids().collect::<Vec<_>>()));
                continue;
            };
            let on_p: BTreeSet<EdgeId> = t.edge_ids().filter(|e| l.path_edges.contains(e)).collect();
            let want: BTreeSet<EdgeId> = l.path_edges[..1 + 3 * (b - i)].iter().copied().collect();
            if t.len() != l.expected_s || on_p != want {
                report.push(format!("sat through e_{i} leaves the expected shape"));
            }
        }
        enumerated_sats = Some(sats.len());
    }

    Ok(EgReport {
        b,
        n: g.vertex_count(),
        m: g.edge_count(),
        expected_s: l.expected_s,
        solver_s,
        phases: sol.stats.phase_count,
        final_cardinality: sol.matching.len(),
        level_table,
        distinct_pairs: pairs.len(),
        distinct_base_pairs: base_pairs.len(),
        enumerated_sats,
        report,
    })
}

/// Least-squares slope of log(count) against log(b).
pub fn power_law_exponent(points: &[(usize, usize)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 as f64).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
