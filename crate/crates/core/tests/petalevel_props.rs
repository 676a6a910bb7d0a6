mod common;

use common::{greedy_matching, small_multigraph};
use fmatch::blocking::{solve_from, SolveOptions, Solution};
use fmatch::graph::*;
use fmatch::oracle::enumerate_augmenting_trails;
use fmatch::petalevel::*;
use fmatch::random::{random_instance, RandomParams};
use proptest::prelude::*;

fn recorded(g: &Multigraph, f: &DegreeBound, m0: &Matching) -> Solution {
    solve_from(g, f, m0, SolveOptions { record: true, debug_validate: false }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn advancement_on_every_augmenting_trail((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let sol = recorded(&g, &f, &greedy_matching(&g, &f, mseed));
        for r in &sol.records {
            let st = &r.outcome.structured;
            for t in enumerate_augmenting_trails(&g, &f, &r.matching_before, 9) {
                for t in [t.clone(), t.reversed()] {
                    let tr = track_trail(&g, st, &t, &Mode::Natural).unwrap();
                    for x in &tr[1..] {
                        prop_assert!(x.slack >= 0);
                        prop_assert_eq!(x.slack == 0, x.structural_equality);
                    }
                    // levels never drop below the ordinary ones
                    for x in &tr {
                        prop_assert!(x.level >= ordinary_level(st, t.start(), x.vertex, x.io));
                    }
                }
            }
        }
    }

    #[test]
    fn phase_audits_hold((g, f) in small_multigraph(), mseed in any::<u64>()) {
        let sol = recorded(&g, &f, &greedy_matching(&g, &f, mseed));
        for r in &sol.records {
            let a = audit_phase(&g, &r.outcome, &r.blocking.trails).unwrap();
            prop_assert!(a.report.is_ok(), "{}", a.report);
        }
    }

    #[test]
    fn shortening_lowers_levels(seed in any::<u64>(), n in 4usize..12, picks in prop::collection::vec(any::<u8>(), 8)) {
        let (g, f) = random_instance(&RandomParams::multigraph(n, 2 * n, 3), seed);
        let sol = recorded(&g, &f, &Matching::empty(&g));
        for r in &sol.records {
            let st = &r.outcome.structured;
            let phi = r.outcome.trail.as_ref().unwrap().start();
            for v in 0..n {
                let chain: Vec<usize> = st.positive_chain(v).collect();
                let iota: EntranceSequence = chain.iter().enumerate()
                    .map(|(k, &a)| (a, if picks[k % 8] & 1 == 0 { Entrance::P } else { Entrance::B }))
                    .collect();
                let mut iota2 = iota.clone();
                let mut delta = 0;
                for (k, (_, c)) in iota2.iter_mut().enumerate() {
                    if *c == Entrance::P && picks[(k + 3) % 8] & 2 == 0 {
                        *c = Entrance::B;
                        delta += 1;
                    }
                }
                for j in [IoType::Inner, IoType::Outer] {
                    let d = shorten_delta(st, phi, v, j, &iota, &iota2).unwrap();
                    prop_assert!(d >= 2 * delta);
                }
            }
        }
    }
}

#[test]
fn campaign_audits() {
    for seed in 0..300u64 {
        let n = 20 + (seed % 80) as usize;
        let p = if seed % 2 == 0 { RandomParams::simple(n, 2 * n, 2) } else { RandomParams::multigraph(n, 2 * n, 3) };
        let (g, f) = random_instance(&p, seed);
        let sol = recorded(&g, &f, &Matching::empty(&g));
        for r in &sol.records {
            let a = audit_phase(&g, &r.outcome, &r.blocking.trails).unwrap();
            assert!(a.report.is_ok(), "seed {seed}: {}", a.report);
            assert!(a.level_graph.node_count() <= 2 * n);
        }
    }
}
