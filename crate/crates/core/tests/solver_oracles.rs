mod common;

use common::{greedy_matching, small_multigraph};
use fmatch::blocking::*;
use fmatch::graph::*;
use fmatch::oracle::*;
use fmatch::random::{random_instance, RandomParams};
use fmatch::search::{f_matching_search, SearchOptions};
use proptest::prelude::*;

fn run(g: &Multigraph, f: &DegreeBound, m0: &Matching) -> Solution {
    solve_from(g, f, m0, SolveOptions { record: true, debug_validate: true }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn matches_brute_force((g, f) in small_multigraph()) {
        let sol = run(&g, &f, &Matching::empty(&g));
        let bf = brute_force_max_f_matching(&g, &f).unwrap();
        prop_assert_eq!(sol.matching.len(), bf.max_cardinality);
        prop_assert!(certify(&g, &f, &sol.matching, &sol.final_search).is_valid());
        prop_assert!(check_sat_monotonicity(&sol.stats.sat_lengths()).is_ok());
        prop_assert!(bound_check(&sol.stats, g.vertex_count(), f.total(), g.is_simple()).is_ok());
    }

    #[test]
    fn sat_lengths_are_shortest((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let m0 = greedy_matching(&g, &f, mseed);
        let sol = run(&g, &f, &m0);
        for r in &sol.records {
            prop_assert_eq!(brute_force_sat_length(&g, &f, &r.matching_before), Some(r.blocking.s));
            // blocking trails are edge-disjoint sats, jointly augmentable
            let mut seen = std::collections::BTreeSet::new();
            for t in &r.blocking.trails {
                prop_assert_eq!(t.len(), r.blocking.s);
                prop_assert!(classify_trail(&g, t, &r.matching_before, &f).augmenting);
                for e in t.edge_ids() {
                    prop_assert!(seen.insert(e));
                }
            }
            let after = augment_all(&g, &f, &r.matching_before, &r.blocking).unwrap();
            // maximality: no sat of the same length survives
            let next = f_matching_search(&g, &f, &after, &SearchOptions::default()).unwrap();
            if let Some(s) = next.sat_length() {
                prop_assert!(s > r.blocking.s);
            }
        }
        prop_assert_eq!(brute_force_sat_length(&g, &f, &sol.matching), None);
    }

    #[test]
    fn decomposition_counts((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let m = greedy_matching(&g, &f, mseed);
        let best = run(&g, &f, &Matching::empty(&g)).matching;
        let d = symmetric_difference_decompose(&g, &m, &best);
        let aug: Vec<&Trail> = d.augmenting(&m).collect();
        prop_assert_eq!(aug.len(), best.len() - m.len());
        prop_assert_eq!(d.decreasing(&m).count(), 0);
        if let Some(s) = brute_force_sat_length(&g, &f, &m) {
            prop_assert!(aug.iter().all(|t| t.len() >= s));
        }
    }
}

#[test]
fn bipartite_matches_flow() {
    for seed in 0..200u64 {
        let n = 2 + (seed % 59) as usize;
        let p = RandomParams::bipartite(n, (seed as usize * 7) % (2 * n) + n / 2, 3);
        let (g, f) = random_instance(&p, seed);
        let (m, stats) = solve_max_f_matching(&g, &f).unwrap();
        let flow = bipartite_flow_oracle(&g, &f).unwrap();
        assert_eq!(m.len(), flow.max_cardinality, "seed {seed}");
        assert!(check_sat_monotonicity(&stats.sat_lengths()).is_ok());
    }
}

#[test]
fn flow_refuses_odd_cycle() {
    let g = Multigraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    assert!(matches!(
        bipartite_flow_oracle(&g, &DegreeBound::uniform(3, 1)),
        Err(fmatch::Error::Refused(_))
    ));
}

#[test]
fn simple_graph_bounds() {
    for seed in 0..30u64 {
        let n = 50 + 10 * seed as usize;
        let (g, f) = random_instance(&RandomParams::simple(n, 2 * n, 2), seed);
        let (_, stats) = solve_max_f_matching(&g, &f).unwrap();
        assert!(bound_check(&stats, n, f.total(), true).is_ok());
        assert!(remaining_augmentations_check(&stats, n).is_ok());
    }
}
