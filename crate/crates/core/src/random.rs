//! Seeded random instances.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{DegreeBound, Multigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n: usize,
    pub m: usize,
    pub f_min: u32,
    pub f_max: u32,
    /// No parallel edges and no loops.
    pub simple: bool,
    /// Edges only between the first ⌈n/2⌉ vertices and the rest.
    pub bipartite: bool,
    /// Allow loops (ignored when simple or bipartite).
    pub loops: bool,
}

impl RandomParams {
    pub fn simple(n: usize, m: usize, f_max: u32) -> Self {
        RandomParams {
            n,
            m,
            f_min: 1,
            f_max,
            simple: true,
            bipartite: false,
            loops: false,
        }
    }

    pub fn multigraph(n: usize, m: usize, f_max: u32) -> Self {
        RandomParams {
            simple: false,
            loops: true,
            ..RandomParams::simple(n, m, f_max)
        }
    }

    pub fn bipartite(n: usize, m: usize, f_max: u32) -> Self {
        RandomParams {
            bipartite: true,
            ..RandomParams::simple(n, m, f_max)
        }
    }
}

/// The same `(params, seed)` always yields the same instance. A simple
/// request for more edges than exist yields the complete (bipartite) graph.
pub fn random_instance(p: &RandomParams, seed: u64) -> (Multigraph, DegreeBound) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n;
    let mut g = Multigraph::new(n);
    let left = n.div_ceil(2);
    let max_pairs = if p.bipartite {
        left * (n - left)
    } else {
        n * n.saturating_sub(1) / 2
    };
    let m = if p.simple { p.m.min(max_pairs) } else { p.m };
    let can_edge = if p.bipartite { max_pairs > 0 } else { n > 1 || (p.loops && !p.simple && n > 0) };
    let mut seen = HashSet::new();
    while can_edge && g.edge_count() < m {
        let (u, v) = if p.bipartite {
            (rng.gen_range(0..left), rng.gen_range(left..n))
        } else {
            (rng.gen_range(0..n), rng.gen_range(0..n))
        };
        if u == v && (p.simple || !p.loops || p.bipartite) {
            continue;
        }
        if p.simple && !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        g.add_edge(u, v).expect("endpoints in range");
    }
    let f = (0..n).map(|_| rng.gen_range(p.f_min..=p.f_max.max(p.f_min))).collect();
    (g, DegreeBound::from_vec(f))
}
