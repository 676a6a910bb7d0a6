mod common;

use common::{greedy_matching, small_multigraph};
use fmatch::graph::*;
use fmatch::oracle::enumerate_augmenting_trails;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn length_identity_and_augment((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let m = greedy_matching(&g, &f, mseed);
        for t in enumerate_augmenting_trails(&g, &f, &m, 7) {
            let w = incremental_weight(&t, &m).unwrap();
            prop_assert_eq!(t.len() as i64, -w + (t.len() as i64 % 2));
            prop_assert_eq!(t.len() % 2, 1);
            let m2 = augment(&g, &m, &t, &f).unwrap();
            prop_assert!(m2.check_feasible(&f).is_ok());
            prop_assert_eq!(m2.len(), m.len() + 1);
            for v in 0..g.vertex_count() {
                let (before, after) = (m.deficiency(v, &f), m2.deficiency(v, &f));
                if v != t.start() && v != t.end() {
                    prop_assert_eq!(before, after);
                } else {
                    prop_assert!(after < before);
                }
            }
        }
    }

    #[test]
    fn text_round_trip((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let (g2, f2) = parse_graph(&write_graph(&g, &f)).unwrap();
        prop_assert_eq!(&g2, &g);
        prop_assert_eq!(&f2, &f);
        let m = greedy_matching(&g, &f, mseed);
        let m2 = parse_matching(&write_matching(&m), &g, &f).unwrap();
        prop_assert_eq!(m2, m);
    }
}

#[test]
fn loop_consumes_two() {
    let g = Multigraph::from_edges(1, &[(0, 0)]).unwrap();
    assert!(Matching::from_edges(&g, &DegreeBound::uniform(1, 1), &[0]).is_err());
    let m = Matching::from_edges(&g, &DegreeBound::uniform(1, 2), &[0]).unwrap();
    assert_eq!(m.degree(0), 2);
}

#[test]
fn repeated_edge_is_not_a_trail() {
    let g = Multigraph::from_edges(2, &[(0, 1)]).unwrap();
    assert!(Trail::from_vertex_edges(&g, &[0, 1, 0], &[0, 0]).is_err());
}

#[test]
fn closed_trail_needs_deficiency_two() {
    // loop-free closed trail 0-1-2-0 starting and ending unmatched at 0
    let g = Multigraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    let m_ids = [1];
    let f1 = DegreeBound::from_vec(vec![1, 1, 1]);
    let f2 = DegreeBound::from_vec(vec![2, 1, 1]);
    let m = Matching::from_edges(&g, &f1, &m_ids).unwrap();
    let t = Trail::from_vertex_edges(&g, &[0, 1, 2, 0], &[0, 1, 2]).unwrap();
    assert!(!classify_trail(&g, &t, &m, &f1).augmenting);
    assert!(classify_trail(&g, &t, &m, &f2).augmenting);
    assert!(t.is_closed());
}

#[test]
fn parse_errors_have_lines() {
    match parse_graph("p fgraph 2 1\ne 0 5\n") {
        Err(fmatch::Error::VertexRange { line, vertex, .. }) => assert_eq!((line, vertex), (2, 5)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_graph("e 0 1\n"), Err(fmatch::Error::Parse { line: 1, .. })));
    assert!(matches!(parse_graph("p fgraph 2 2\ne 0 1\n"), Err(fmatch::Error::Parse { .. })));
}
