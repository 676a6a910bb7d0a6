mod common;

use std::collections::BTreeSet;

use common::small_multigraph;
use fmatch::blocking::{solve_from, SolveOptions};
use fmatch::blossom::*;
use fmatch::eg::generate_eg;
use fmatch::graph::*;
use fmatch::petalevel::{track_trail, Mode};
use fmatch::search::{f_matching_search, SearchOptions, SearchOutcome};
use proptest::prelude::*;

/// Clause-by-clause reading of the definition for a blossom whose closed
/// trail visits atoms only, on the vertex sequence of the trail.
fn brute_atom_blossom(g: &Multigraph, m: &Matching, walk: &[VertexId], edges: &[EdgeId], mt: MType, eta: BaseEdge) -> bool {
    let k = edges.len();
    let alpha = walk[0];
    if walk[k] != alpha || edges.iter().collect::<BTreeSet<_>>().len() != k {
        return false;
    }
    let ty: Vec<MType> = edges.iter().map(|&e| m.mtype(e)).collect();
    // α: same type at both ends, which is the blossom's type
    if ty[0] != ty[k - 1] || ty[0] != mt {
        return false;
    }
    // every visit of an atom other than the start/end of C alternates
    for x in 1..k {
        if ty[x - 1] == ty[x] {
            return false;
        }
    }
    let inside: BTreeSet<VertexId> = walk.iter().copied().collect();
    match eta {
        BaseEdge::Artificial => mt == MType::Unmatched,
        BaseEdge::Real(e) => {
            let x = g.edge(e);
            x.has_endpoint(alpha) && !inside.contains(&x.other(alpha)) && !edges.contains(&e) && m.mtype(e) != mt
        }
    }
}

/// A closed walk from `start` picking unused edges by `picks`; None if it
/// gets stuck before returning.
fn closed_walk(g: &Multigraph, start: VertexId, picks: &[u8]) -> Option<(Vec<VertexId>, Vec<EdgeId>)> {
    let mut used = vec![false; g.edge_count()];
    let (mut walk, mut edges) = (vec![start], Vec::new());
    let mut at = start;
    for &p in picks {
        let opts: Vec<EdgeId> = g.incident(at).iter().copied().filter(|&e| !used[e]).collect::<BTreeSet<_>>().into_iter().collect();
        if opts.is_empty() {
            return None;
        }
        let e = opts[p as usize % opts.len()];
        used[e] = true;
        at = g.edge(e).other(at);
        walk.push(at);
        edges.push(e);
        if at == start {
            return Some((walk, edges));
        }
    }
    None
}

fn any_matching(g: &Multigraph, mask: u32) -> (Matching, DegreeBound) {
    let f = DegreeBound::uniform(g.vertex_count(), 64);
    let ids: Vec<EdgeId> = (0..g.edge_count()).filter(|&e| mask >> (e % 32) & 1 == 1).collect();
    (Matching::from_edges(g, &f, &ids).unwrap(), f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5000))]

    #[test]
    fn validate_blossom_matches_clause_check(
        (g, _) in small_multigraph(),
        mask in any::<u32>(),
        start in 0usize..8,
        picks in prop::collection::vec(any::<u8>(), 1..10),
        heavy in any::<bool>(),
        eta_pick in any::<u8>(),
    ) {
        let start = start % g.vertex_count();
        let Some((walk, edges)) = closed_walk(&g, start, &picks) else { return Ok(()) };
        let (m, _) = any_matching(&g, mask);
        let mt = if heavy { MType::Matched } else { MType::Unmatched };
        let cands = g.incident(start);
        let eta = if eta_pick as usize % (cands.len() + 1) == cands.len() {
            BaseEdge::Artificial
        } else {
            BaseEdge::Real(cands[eta_pick as usize % (cands.len() + 1)])
        };
        let mut forest = BlossomForest::new(g.vertex_count());
        let children: Vec<Node> = walk[..edges.len()].iter().map(|&v| Node::Atom(v)).collect();
        let steps: Vec<Step> = edges.iter().zip(walk.windows(2)).map(|(&e, w)| Step { edge: e, from: w[0], to: w[1] }).collect();
        let b = forest.add(mt, start, eta, children, steps).unwrap();
        let ours = validate_blossom(&g, &m, &forest, b).unwrap().is_ok();
        prop_assert_eq!(ours, brute_atom_blossom(&g, &m, &walk, &edges, mt, eta));
    }
}

/// Search outcomes (with blossoms) from phases of random runs.
fn outcomes(g: &Multigraph, f: &DegreeBound) -> Vec<SearchOutcome> {
    let sol = solve_from(g, f, &Matching::empty(g), SolveOptions { record: true, debug_validate: false }).unwrap();
    let mut v: Vec<SearchOutcome> = sol.records.into_iter().map(|r| r.outcome).collect();
    v.push(sol.final_search);
    v
}

fn check_structure(g: &Multigraph, f: &DegreeBound, out: &SearchOutcome) -> Result<(), TestCaseError> {
    let s = &out.structured;
    prop_assert!(validate_structured(g, f, s, None).is_ok());
    for bl in s.forest.iter() {
        let rep = validate_blossom(g, &s.matching, &s.forest, bl.id).unwrap();
        prop_assert!(rep.is_ok(), "{}", rep);
        for &v in &bl.vertices {
            for i in 0..2u8 {
                if v == bl.base && i == 0 {
                    prop_assert!(p_trail(g, &s.matching, &s.forest, bl.id, v, 0).unwrap().is_empty());
                    continue;
                }
                let t = p_trail(g, &s.matching, &s.forest, bl.id, v, i).unwrap();
                prop_assert!(t.is_alternating(&s.matching));
                prop_assert_eq!(t.end(), bl.base);
                let first = s.matching.mtype(t.steps()[0].edge);
                let last = s.matching.mtype(t.steps()[t.len() - 1].edge);
                prop_assert_eq!(first, if i == 1 { bl.m_type } else { bl.m_type.flip() });
                prop_assert_eq!(last, bl.m_type);
                let inside: BTreeSet<EdgeId> = s.forest.edge_set(bl.id).into_iter().collect();
                prop_assert!(t.edge_ids().all(|e| inside.contains(&e)));
            }
        }
        if s.duals.is_positive(bl.id) {
            for e in s.forest.edge_set(bl.id) {
                prop_assert_eq!(classify_edge(g, s, e), EdgeClass::Tight);
            }
            if let BaseEdge::Real(e) = bl.base_edge {
                prop_assert_eq!(classify_edge(g, s, e), EdgeClass::Tight);
            }
        }
        // nested blossoms with the same base share the base edge
        if let Some(p) = bl.parent {
            let parent = s.forest.get(p);
            if parent.base == bl.base {
                prop_assert_eq!(parent.base_edge, bl.base_edge);
            }
        }
    }
    if let Some(t) = &out.trail {
        // the sat alternates at every positive blossom it leaves
        let tr = track_trail(g, s, t, &Mode::Natural).unwrap();
        prop_assert!(tr.iter().all(|x| x.structural_equality));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn search_structures_are_valid((g, f) in small_multigraph()) {
        for out in outcomes(&g, &f) {
            check_structure(&g, &f, &out)?;
        }
    }
}

#[test]
fn light_triangle() {
    // β=0, a=1, b=2; ab matched
    let g = Multigraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (0, 3)]).unwrap();
    let f = DegreeBound::uniform(4, 2);
    let steps = |g: &Multigraph| {
        Trail::from_vertex_edges(g, &[0, 1, 2, 0], &[0, 1, 2]).unwrap().steps().to_vec()
    };
    let children = vec![Node::Atom(0), Node::Atom(1), Node::Atom(2)];
    for (matched, ok) in [(vec![1, 3], true), (vec![3], false)] {
        let m = Matching::from_edges(&g, &f, &matched).unwrap();
        let mut forest = BlossomForest::new(4);
        let b = forest.add(MType::Unmatched, 0, BaseEdge::Real(3), children.clone(), steps(&g)).unwrap();
        assert_eq!(validate_blossom(&g, &m, &forest, b).unwrap().is_ok(), ok);
    }
}

#[test]
fn eg4_blossoms_are_valid() {
    let inst = generate_eg(4).unwrap();
    let out = f_matching_search(&inst.graph, &inst.f, &inst.m0, &SearchOptions::default()).unwrap();
    assert!(out.structured.forest.len() >= 4);
    check_structure(&inst.graph, &inst.f, &out).unwrap();
}

#[test]
fn dangling_child_is_structural_error() {
    let mut forest = BlossomForest::new(3);
    let r = forest.add(MType::Unmatched, 0, BaseEdge::Artificial, vec![Node::Blossom(7)], vec![Step { edge: 0, from: 0, to: 0 }]);
    assert!(matches!(r, Err(fmatch::Error::Structural(_))));
}
