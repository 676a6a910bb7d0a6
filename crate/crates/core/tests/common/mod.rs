#![allow(dead_code)]

use fmatch::graph::{DegreeBound, Matching, Multigraph};
use fmatch::random::{random_instance, RandomParams};
use proptest::prelude::*;

/// Small multigraphs with loops and parallel edges, f in 1..=3.
pub fn small_multigraph() -> impl Strategy<Value = (Multigraph, DegreeBound)> {
    (2usize..=8, 0usize..=14, any::<u64>())
        .prop_map(|(n, m, seed)| random_instance(&RandomParams::multigraph(n, m, 3), seed))
}

/// A feasible matching picked greedily from a random edge order.
pub fn greedy_matching(g: &Multigraph, f: &DegreeBound, order_seed: u64) -> Matching {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut ids: Vec<usize> = (0..g.edge_count()).collect();
    ids.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(order_seed));
    let mut deg = vec![0u32; g.vertex_count()];
    let mut keep = Vec::new();
    for e in ids {
        let x = g.edge(e);
        let need_u = if x.is_loop() { 2 } else { 1 };
        if deg[x.u] + need_u <= f.get(x.u) && (x.is_loop() || deg[x.v] < f.get(x.v)) {
            deg[x.u] += need_u;
            if !x.is_loop() {
                deg[x.v] += 1;
            }
            keep.push(e);
        }
    }
    Matching::from_edges(g, f, &keep).expect("greedy keeps degrees within f")
}
