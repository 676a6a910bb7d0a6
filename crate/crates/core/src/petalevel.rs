//! Ordinary levels, petalevels and the level graph LG*.
//!
//! Levels are read off the duals of a structured matching. A trail is
//! tracked edge by edge; each vertex it reaches gets an io-type (the type of
//! the edge it arrived on) and an entrance sequence recording, for every
//! positive blossom containing it, whether the trail came in on the base
//! edge (`B`) or on a petal (`P`).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::blossom::{yz_hat, BaseEdge, BlossomId, Report, StructuredMatching};
use crate::error::{Error, Result};
use crate::graph::{edge_weight, EdgeId, MType, Multigraph, Trail, VertexId};
use crate::search::SearchOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum IoType {
    Inner,
    Outer,
}

impl IoType {
    pub fn flip(self) -> IoType {
        match self {
            IoType::Inner => IoType::Outer,
            IoType::Outer => IoType::Inner,
        }
    }

    /// The type a vertex gets when reached along an edge of type `t`.
    pub fn from_mtype(t: MType) -> IoType {
        match t {
            MType::Unmatched => IoType::Inner,
            MType::Matched => IoType::Outer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Entrance {
    B,
    P,
}

pub type EntranceSequence = BTreeMap<BlossomId, Entrance>;

/// l_j(v) with all blossoms entered on their base.
pub fn ordinary_level(s: &StructuredMatching, phi: VertexId, v: VertexId, j: IoType) -> i64 {
    let y = &s.duals.y;
    match j {
        IoType::Outer => y[v] - y[phi],
        IoType::Inner => 1 - (y[v] + y[phi] + s.z_total(v)),
    }
}

/// l_j(v, ι). `iota` must cover every positive blossom containing `v`.
pub fn petalevel(
    s: &StructuredMatching,
    phi: VertexId,
    v: VertexId,
    j: IoType,
    iota: &EntranceSequence,
) -> Result<i64> {
    let (mut zb, mut zp) = (0, 0);
    for a in s.positive_chain(v) {
        match iota.get(&a) {
            Some(Entrance::B) => zb += s.duals.z_of(a),
            Some(Entrance::P) => zp += s.duals.z_of(a),
            None => {
                return Err(Error::Contract(format!(
                    "entrance sequence of {v} misses positive blossom {a}"
                )))
            }
        }
    }
    let y = &s.duals.y;
    Ok(match j {
        IoType::Outer => y[v] - y[phi] + zp,
        IoType::Inner => 1 - (y[v] + y[phi] + zb),
    })
}

/// ι(v) after advancing on `e` = uv from a vertex with sequence `iota_u`.
pub fn entrance_update_natural(
    s: &StructuredMatching,
    iota_u: &EntranceSequence,
    u: VertexId,
    v: VertexId,
    e: EdgeId,
) -> EntranceSequence {
    s.positive_chain(v)
        .map(|a| {
            let c = if s.forest.contains(a, u) {
                iota_u[&a]
            } else if s.forest.get(a).base_edge.is(e) {
                Entrance::B
            } else {
                Entrance::P
            };
            (a, c)
        })
        .collect()
}

/// Like [`entrance_update_natural`], but every blossom in `base_entered` is
/// read as entered on its base.
pub fn entrance_update_shortened(
    s: &StructuredMatching,
    iota_u: &EntranceSequence,
    u: VertexId,
    v: VertexId,
    base_entered: &BTreeSet<BlossomId>,
) -> EntranceSequence {
    s.positive_chain(v)
        .map(|a| {
            let c = if s.forest.contains(a, u) {
                iota_u[&a]
            } else if base_entered.contains(&a) {
                Entrance::B
            } else {
                Entrance::P
            };
            (a, c)
        })
        .collect()
}

/// Sequence of a free vertex reached from ε: a free blossom is entered on its
/// artificial base edge, anything else on a petal.
fn start_sequence(s: &StructuredMatching, phi: VertexId, shortened: Option<&BTreeSet<BlossomId>>) -> EntranceSequence {
    s.positive_chain(phi)
        .map(|a| {
            let natural = s.forest.get(a).base_edge == BaseEdge::Artificial && s.forest.get(a).base == phi;
            let c = match shortened {
                Some(be) if be.contains(&a) => Entrance::B,
                Some(_) => Entrance::P,
                None if natural => Entrance::B,
                None => Entrance::P,
            };
            (a, c)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrackedStep {
    /// None for the initial ε→φ step.
    pub edge: Option<EdgeId>,
    pub vertex: VertexId,
    pub io: IoType,
    pub iota: EntranceSequence,
    pub level: i64,
    /// l_j̄(u) + 1 − l_j(v); zero for the initial step.
    pub slack: i64,
    /// Tight and alternating at every positive blossom left.
    pub structural_equality: bool,
}

#[derive(Clone, Debug)]
pub enum Mode<'a> {
    Natural,
    Shortened(&'a BTreeSet<BlossomId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Advancement {
    pub slack: i64,
    pub equality: bool,
    pub structural_equality: bool,
}

/// Compares the levels at both ends of an advancing step `u → v` on `e`.
#[allow(clippy::too_many_arguments)]
pub fn check_advancement(
    g: &Multigraph,
    s: &StructuredMatching,
    phi: VertexId,
    e: EdgeId,
    u: VertexId,
    v: VertexId,
    iota_u: &EntranceSequence,
    iota_v: &EntranceSequence,
) -> Result<Advancement> {
    let j = IoType::from_mtype(s.matching.mtype(e));
    let lu = petalevel(s, phi, u, j.flip(), iota_u)?;
    let lv = petalevel(s, phi, v, j, iota_v)?;
    let slack = lu + 1 - lv;
    let tight = yz_hat(g, s, e) == edge_weight(e, &s.matching);
    let alternates = s
        .positive_chain(u)
        .filter(|&a| !s.forest.contains(a, v))
        .all(|a| iota_u[&a] == Entrance::B || s.forest.get(a).base_edge.is(e));
    Ok(Advancement {
        slack,
        equality: slack == 0,
        structural_equality: tight && alternates,
    })
}

/// Tracks `t` from its free start. The first entry is φ itself, reached
/// from ε as if on a matched edge. Negative slack is an invariant failure.
pub fn track_trail(g: &Multigraph, s: &StructuredMatching, t: &Trail, mode: &Mode<'_>) -> Result<Vec<TrackedStep>> {
    let phi = t.start();
    let shortened = match mode {
        Mode::Natural => None,
        Mode::Shortened(b) => Some(*b),
    };
    let iota0 = start_sequence(s, phi, shortened);
    let level0 = petalevel(s, phi, phi, IoType::Outer, &iota0)?;
    let mut out = vec![TrackedStep {
        edge: None,
        vertex: phi,
        io: IoType::Outer,
        iota: iota0,
        level: level0,
        slack: 0,
        structural_equality: true,
    }];
    for st in t.steps() {
        let prev = out.last().expect("nonempty");
        let j = IoType::from_mtype(s.matching.mtype(st.edge));
        if prev.io != j.flip() {
            return Err(Error::Contract(format!("trail does not alternate at edge {}", st.edge)));
        }
        let iota = match shortened {
            None => entrance_update_natural(s, &prev.iota, st.from, st.to, st.edge),
            Some(be) => entrance_update_shortened(s, &prev.iota, st.from, st.to, be),
        };
        let adv = check_advancement(g, s, phi, st.edge, st.from, st.to, &prev.iota, &iota)?;
        if adv.slack < 0 {
            return Err(Error::Invariant(format!(
                "petalevel rises by {} on edge {}",
                1 - adv.slack,
                st.edge
            )));
        }
        let level = prev.level + 1 - adv.slack;
        out.push(TrackedStep {
            edge: Some(st.edge),
            vertex: st.to,
            io: j,
            iota,
            level,
            slack: adv.slack,
            structural_equality: adv.structural_equality,
        });
    }
    Ok(out)
}

/// l_j(v, ι) − l_j(v, ι′) where ι′ turns Δ entries of ι from P to B.
/// Asserts the drop is at least 2Δ.
pub fn shorten_delta(
    s: &StructuredMatching,
    phi: VertexId,
    v: VertexId,
    j: IoType,
    iota: &EntranceSequence,
    iota2: &EntranceSequence,
) -> Result<i64> {
    if iota.keys().ne(iota2.keys()) {
        return Err(Error::Contract("entrance sequences cover different blossoms".into()));
    }
    let mut delta = 0;
    for (a, c) in iota {
        match (c, iota2[a]) {
            (x, y) if *x == y => {}
            (Entrance::P, Entrance::B) => delta += 1,
            _ => return Err(Error::Contract(format!("blossom {a} changes from B to P"))),
        }
    }
    let d = petalevel(s, phi, v, j, iota)? - petalevel(s, phi, v, j, iota2)?;
    if d < 2 * delta {
        return Err(Error::Invariant(format!("shortening {delta} blossoms lowers the level by only {d}")));
    }
    Ok(d)
}

/// Positive blossoms that some trail of `trails` enters on its base edge,
/// including free blossoms whose base starts a trail.
pub fn base_entered(s: &StructuredMatching, trails: &[Trail]) -> BTreeSet<BlossomId> {
    let mut out = BTreeSet::new();
    for t in trails {
        let phi = t.start();
        for a in s.positive_chain(phi) {
            let b = s.forest.get(a);
            if b.base_edge == BaseEdge::Artificial && b.base == phi {
                out.insert(a);
            }
        }
        for st in t.steps() {
            for a in s.positive_chain(st.to) {
                if !s.forest.contains(a, st.from) && s.forest.get(a).base_edge.is(st.edge) {
                    out.insert(a);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LgNode {
    pub vertex: VertexId,
    pub io: IoType,
    pub level: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelGraph {
    pub s: usize,
    /// `layers[k]` holds the nodes on level k, for k = 0..=s.
    pub layers: Vec<Vec<LgNode>>,
    /// `edges[k]` joins level k to level k+1: (edge, tail, head).
    pub edges: Vec<Vec<(EdgeId, LgNode, LgNode)>>,
    pub base_entered: BTreeSet<BlossomId>,
}

impl LevelGraph {
    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, e: EdgeId, from: LgNode, to: LgNode) -> bool {
        let k = from.level;
        k >= 0 && (k as usize) < self.edges.len() && self.edges[k as usize].contains(&(e, from, to))
    }
}

/// LG* for phase trails `trails` of length `s`: every vertex takes its two
/// petalevels under the fixed sequence "B iff some trail enters on the base",
/// and every edge joining consecutive levels is kept.
pub fn build_level_graph(g: &Multigraph, st: &StructuredMatching, trails: &[Trail], s: usize) -> Result<LevelGraph> {
    let mut seen = vec![false; g.edge_count()];
    for t in trails {
        for e in t.edge_ids() {
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::Contract(format!("edge {e} lies on two trails")));
            }
        }
    }
    let phi = trails
        .first()
        .map(Trail::start)
        .ok_or_else(|| Error::Contract("level graph needs at least one trail".into()))?;
    let be = base_entered(st, trails);
    let n = g.vertex_count();
    let mut node = vec![[None::<LgNode>; 2]; n];
    let mut layers = vec![Vec::new(); s + 1];
    for (v, slot) in node.iter_mut().enumerate() {
        let iota: EntranceSequence = st
            .positive_chain(v)
            .map(|a| (a, if be.contains(&a) { Entrance::B } else { Entrance::P }))
            .collect();
        for (k, j) in [IoType::Inner, IoType::Outer].into_iter().enumerate() {
            let level = petalevel(st, phi, v, j, &iota)?;
            if (0..=s as i64).contains(&level) {
                let x = LgNode { vertex: v, io: j, level };
                slot[k] = Some(x);
                layers[level as usize].push(x);
            }
        }
    }
    let idx = |j: IoType| usize::from(j == IoType::Outer);
    let mut edges = vec![Vec::new(); s];
    for (e, edge) in g.edges() {
        let j = IoType::from_mtype(st.matching.mtype(e));
        let mut dirs = vec![(edge.u, edge.v)];
        if !edge.is_loop() {
            dirs.push((edge.v, edge.u));
        }
        for (u, v) in dirs {
            if let (Some(a), Some(b)) = (node[u][idx(j.flip())], node[v][idx(j)]) {
                if b.level == a.level + 1 {
                    edges[a.level as usize].push((e, a, b));
                }
            }
        }
    }
    Ok(LevelGraph {
        s,
        layers,
        edges,
        base_entered: be,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bottleneck {
    /// Edges of the layer join level `layer` to `layer + 1`.
    pub layer: usize,
    pub node_count: usize,
    pub edge_capacity: usize,
}

/// The layer whose two levels hold the fewest nodes.
pub fn bottleneck_layer(lg: &LevelGraph) -> Bottleneck {
    (0..lg.s)
        .map(|k| {
            let (a, b) = (lg.layers[k].len(), lg.layers[k + 1].len());
            Bottleneck {
                layer: k,
                node_count: a + b,
                edge_capacity: a * b,
            }
        })
        .min_by_key(|b| (b.node_count, b.layer))
        .unwrap_or(Bottleneck {
            layer: 0,
            node_count: lg.layers.first().map_or(0, Vec::len),
            edge_capacity: 0,
        })
}

/// Layers `k` (edges from level k to k+1) that the tracked trail uses with
/// an edge of `lg`.
pub fn layers_crossed(lg: &LevelGraph, steps: &[TrackedStep]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for w in steps.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let from = LgNode { vertex: a.vertex, io: a.io, level: a.level };
        let to = LgNode { vertex: b.vertex, io: b.io, level: b.level };
        if let Some(e) = b.edge {
            if lg.has_edge(e, from, to) {
                out.insert(a.level as usize);
            }
        }
    }
    out
}

fn check_tracked(r: &mut Report, what: &str, tr: &[TrackedStep], target: i64, exact: bool) {
    for (k, x) in tr.iter().enumerate().skip(1) {
        if exact && x.slack != 0 {
            r.push(format!("{what}: step {k} has slack {}", x.slack));
        }
        if exact && (x.slack == 0) != x.structural_equality {
            r.push(format!("{what}: step {k} equality flag disagrees with slack {}", x.slack));
        }
    }
    let last = tr.last().map_or(0, |x| x.level);
    if last != target {
        r.push(format!("{what}: ends at level {last}, expected {target}"));
    }
}

/// Everything checked about the levels of one phase.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseAudit {
    pub s: usize,
    pub l: i64,
    pub natural: Vec<Vec<TrackedStep>>,
    pub shortened: Vec<Vec<TrackedStep>>,
    pub level_graph: LevelGraph,
    pub bottleneck: Bottleneck,
    pub report: Report,
}

/// Tracks the phase's sat and blocking trails against the duals of the
/// phase search and builds LG*. Violations go to `report`; only malformed
/// input is an error.
pub fn audit_phase(g: &Multigraph, outcome: &SearchOutcome, trails: &[Trail]) -> Result<PhaseAudit> {
    let st = &outcome.structured;
    let l = outcome.l;
    let target = 1 + 2 * l;
    let mut report = Report::default();
    let sat = outcome
        .trail
        .as_ref()
        .ok_or_else(|| Error::Contract("audit needs a search that found a sat".into()))?;
    let s = sat.len();
    if s as i64 != target {
        report.push(format!("sat has length {s}, 1+2L = {target}"));
    }
    let mut natural = Vec::new();
    for (i, t) in trails.iter().enumerate() {
        match track_trail(g, st, t, &Mode::Natural) {
            Ok(tr) => {
                check_tracked(&mut report, &format!("natural trail {i}"), &tr, target, true);
                let mut levels: Vec<i64> = tr.iter().map(|x| x.level).collect();
                levels.sort_unstable();
                levels.dedup();
                if levels.len() != tr.len() {
                    report.push(format!("natural trail {i} repeats a petalevel"));
                }
                natural.push(tr);
            }
            Err(e) => report.push(format!("natural trail {i}: {e}")),
        }
    }
    let lg = build_level_graph(g, st, trails, s)?;
    let be = lg.base_entered.clone();
    if lg.node_count() > 2 * g.vertex_count() {
        report.push(format!("LG* has {} nodes, n = {}", lg.node_count(), g.vertex_count()));
    }
    let mut shortened = Vec::new();
    for (i, t) in trails.iter().enumerate() {
        match track_trail(g, st, t, &Mode::Shortened(&be)) {
            Ok(tr) => {
                check_tracked(&mut report, &format!("shortened trail {i}"), &tr, target, false);
                for x in &tr {
                    if (0..=s as i64).contains(&x.level) {
                        let node = LgNode { vertex: x.vertex, io: x.io, level: x.level };
                        if !lg.layers[x.level as usize].contains(&node) {
                            report.push(format!("shortened trail {i}: {node:?} is not an LG* node"));
                        }
                    }
                }
                let crossed = layers_crossed(&lg, &tr);
                if let Some(k) = (0..s).find(|k| !crossed.contains(k)) {
                    report.push(format!("shortened trail {i} misses layer {k}"));
                }
                shortened.push(tr);
            }
            Err(e) => report.push(format!("shortened trail {i}: {e}")),
        }
    }
    let bottleneck = bottleneck_layer(&lg);
    let n = g.vertex_count() as f64;
    let sf = s as f64;
    if bottleneck.node_count as f64 > 4.0 * n / sf {
        report.push(format!("bottleneck has {} nodes > 4n/s", bottleneck.node_count));
    }
    if bottleneck.edge_capacity as f64 > 4.0 * (n / sf).powi(2) {
        report.push(format!("bottleneck capacity {} > 4(n/s)^2", bottleneck.edge_capacity));
    }
    Ok(PhaseAudit {
        s,
        l,
        natural,
        shortened,
        level_graph: lg,
        bottleneck,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DegreeBound, Matching};
    use crate::search::{f_matching_search, SearchOptions};

    fn search(g: &Multigraph, f: &DegreeBound, m: &Matching) -> crate::search::SearchOutcome {
        f_matching_search(g, f, m, &SearchOptions::default()).unwrap()
    }

    #[test]
    fn flip_is_involution() {
        for j in [IoType::Inner, IoType::Outer] {
            assert_eq!(j.flip().flip(), j);
            assert_ne!(j.flip(), j);
        }
    }

    #[test]
    fn single_edge_levels() {
        let g = Multigraph::from_edges(2, &[(0, 1)]).unwrap();
        let f = DegreeBound::uniform(2, 1);
        let out = search(&g, &f, &Matching::empty(&g));
        let t = out.trail.clone().unwrap();
        let tr = track_trail(&g, &out.structured, &t, &Mode::Natural).unwrap();
        assert_eq!(tr.iter().map(|x| x.level).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(out.l, 0);
        assert_eq!(ordinary_level(&out.structured, 0, 0, IoType::Outer), 0);

        let lg = build_level_graph(&g, &out.structured, &[t], 1).unwrap();
        assert_eq!(lg.layers.len(), 2);
        assert!(lg.layers[0].contains(&LgNode { vertex: 0, io: IoType::Outer, level: 0 }));
        assert!(lg.layers[1].contains(&LgNode { vertex: 1, io: IoType::Inner, level: 1 }));
        assert!(bottleneck_layer(&lg).node_count <= 8);
    }

    #[test]
    fn all_base_is_ordinary() {
        // 0 free – 1 = 2, triangle 2,3,4 with 3 = 4, 3 – 5 free.
        let g = Multigraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (2, 4), (3, 4), (3, 5)]).unwrap();
        let f = DegreeBound::uniform(6, 1);
        let m = Matching::from_edges(&g, &f, &[1, 4]).unwrap();
        let out = search(&g, &f, &m);
        let s = &out.structured;
        for v in 0..6 {
            let iota: EntranceSequence = s.positive_chain(v).map(|a| (a, Entrance::B)).collect();
            for j in [IoType::Inner, IoType::Outer] {
                assert_eq!(petalevel(s, 0, v, j, &iota).unwrap(), ordinary_level(s, 0, v, j));
                let iota_p: EntranceSequence = iota.keys().map(|&a| (a, Entrance::P)).collect();
                assert!(petalevel(s, 0, v, j, &iota_p).unwrap() >= ordinary_level(s, 0, v, j));
                let d = shorten_delta(s, 0, v, j, &iota_p, &iota).unwrap();
                assert_eq!(d, s.z_total(v));
            }
        }
    }

    /// First random search outcome holding a positive blossom.
    fn with_positive_blossom() -> (Multigraph, crate::search::SearchOutcome) {
        use crate::random::{random_instance, RandomParams};
        for seed in 0.. {
            let (g, f) = random_instance(&RandomParams::multigraph(8, 12, 2), seed);
            let sol = crate::blocking::solve_from(
                &g,
                &f,
                &Matching::empty(&g),
                crate::blocking::SolveOptions { record: true, debug_validate: false },
            )
            .unwrap();
            for r in sol.records {
                if r.outcome.structured.duals.z.iter().any(|&z| z > 0) {
                    return (g, r.outcome);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn incomplete_sequence_is_contract_error() {
        let (g, out) = with_positive_blossom();
        let s = &out.structured;
        let v = (0..g.vertex_count())
            .find(|&v| s.positive_chain(v).next().is_some())
            .unwrap();
        assert!(matches!(
            petalevel(s, 0, v, IoType::Outer, &EntranceSequence::new()),
            Err(Error::Contract(_))
        ));
        let t = out.trail.clone().unwrap();
        let tr = track_trail(&g, s, &t, &Mode::Natural).unwrap();
        assert!(tr.iter().enumerate().all(|(k, x)| x.level == k as i64));
    }

    #[test]
    fn shorten_delta_rejects_b_to_p() {
        let g = Multigraph::from_edges(2, &[(0, 1)]).unwrap();
        let s = StructuredMatching::trivial(&g, Matching::empty(&g));
        let a: EntranceSequence = [(0, Entrance::B)].into();
        let b: EntranceSequence = [(0, Entrance::P)].into();
        assert!(shorten_delta(&s, 0, 0, IoType::Outer, &a, &b).is_err());
        let e = EntranceSequence::new();
        assert_eq!(shorten_delta(&s, 0, 1, IoType::Inner, &e, &e).unwrap(), 0);
    }

    #[test]
    fn search_sats_advance_by_one() {
        let g = Multigraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (2, 4), (3, 4), (3, 5)]).unwrap();
        let f = DegreeBound::uniform(6, 1);
        let m = Matching::from_edges(&g, &f, &[1, 4]).unwrap();
        let out = search(&g, &f, &m);
        let t = out.trail.clone().unwrap();
        let tr = track_trail(&g, &out.structured, &t, &Mode::Natural).unwrap();
        for (k, x) in tr.iter().enumerate() {
            assert_eq!(x.level, k as i64);
            assert!(x.structural_equality);
        }
        assert_eq!(tr.last().unwrap().level, 1 + 2 * out.l);
    }
}
