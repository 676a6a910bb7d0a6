use fmatch::eg::*;
use fmatch::graph::{classify_trail, incremental_weight};

#[test]
fn verify_each_b() {
    for b in [2, 4, 6, 8] {
        let inst = generate_eg(b).unwrap();
        let r = verify_eg(&inst).unwrap();
        assert!(r.report.is_ok(), "b={b}: {}", r.report);
        assert_eq!(r.solver_s, Some(4 * b + 1));
        assert_eq!(r.final_cardinality, inst.m0.len() + 1);
        assert!(r.distinct_base_pairs >= b * (b - 1) / 2);
    }
}

#[test]
fn enumeration_only_for_small_b() {
    assert!(verify_eg(&generate_eg(2).unwrap()).unwrap().enumerated_sats.is_some());
    assert!(verify_eg(&generate_eg(6).unwrap()).unwrap().enumerated_sats.is_none());
}

#[test]
fn sat_weight() {
    let inst = generate_eg(4).unwrap();
    let t = expected_cross_trail(&inst, 3).unwrap();
    assert_eq!(incremental_weight(&t, &inst.m0).unwrap(), -16);
    assert!(expected_cross_trail(&inst, 0).is_err());
    assert!(expected_cross_trail(&inst, 5).is_err());
}

#[test]
fn expected_trails_alternate_for_larger_b() {
    for b in [10, 12, 20] {
        let inst = generate_eg(b).unwrap();
        for i in 1..=b {
            let t = expected_cross_trail(&inst, i).unwrap();
            assert!(classify_trail(&inst.graph, &t, &inst.m0, &inst.f).augmenting);
        }
    }
}

#[test]
fn spt_excludes_spine_closers() {
    let inst = generate_eg(4).unwrap();
    let tree = shortest_path_tree(&inst).unwrap();
    assert_eq!(tree.len(), inst.layout.blossom_edges.len() - inst.layout.spt_excluded.len());
    for e in &inst.layout.spt_excluded {
        assert!(!tree.contains(e));
    }
}
