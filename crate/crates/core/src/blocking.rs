//! The phase driver: search, extract a blocking set of shortest augmenting
//! trails, augment them all, repeat.

use serde::Serialize;

use crate::blossom::{validate_structured, Report};
use crate::error::{Error, Result};
use crate::graph::{augment, DegreeBound, Matching, Multigraph, Trail};
use crate::oracle;
use crate::search::{f_matching_search, SearchOptions, SearchOutcome};

/// Edge-disjoint, jointly augmentable sats of one phase.
#[derive(Clone, Debug)]
pub struct BlockingSet {
    pub trails: Vec<Trail>,
    pub s: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseStat {
    pub phase: usize,
    pub s: usize,
    pub l: i64,
    pub trails: usize,
    pub cardinality_before: usize,
    pub cardinality_after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub phases: Vec<PhaseStat>,
    pub phase_count: usize,
    pub final_cardinality: usize,
}

impl PhaseStats {
    pub fn sat_lengths(&self) -> Vec<usize> {
        self.phases.iter().map(|p| p.s).collect()
    }
}

/// Everything a phase saw, kept for instrumentation.
#[derive(Clone, Debug)]
pub struct PhaseRecord {
    pub matching_before: Matching,
    pub outcome: SearchOutcome,
    pub blocking: BlockingSet,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Keep a [`PhaseRecord`] per phase.
    pub record: bool,
    pub debug_validate: bool,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub matching: Matching,
    pub stats: PhaseStats,
    pub records: Vec<PhaseRecord>,
    /// The last search, which found no augmenting trail.
    pub final_search: SearchOutcome,
}

/// Extends the sat of `outcome` to a maximal set of edge-disjoint sats by
/// repeated searches on the residual graph: used edges are deleted and the
/// degree bounds lowered so that all trails stay jointly augmentable.
pub fn find_blocking_set(
    g: &Multigraph,
    f: &DegreeBound,
    m: &Matching,
    outcome: &SearchOutcome,
) -> Result<BlockingSet> {
    find_blocking_set_with(g, f, m, outcome, false)
}

fn find_blocking_set_with(
    g: &Multigraph,
    f: &DegreeBound,
    m: &Matching,
    outcome: &SearchOutcome,
    debug_validate: bool,
) -> Result<BlockingSet> {
    let first = outcome
        .trail
        .clone()
        .ok_or_else(|| Error::Contract("blocking set needs a search that found a sat".into()))?;
    let s = first.len();
    let mut used = vec![false; g.edge_count()];
    let mut rm = m.clone();
    let mut rf: Vec<u32> = f.as_slice().to_vec();
    let mut trails = Vec::new();
    let mut take = |t: Trail, used: &mut Vec<bool>, rm: &mut Matching, rf: &mut Vec<u32>| {
        for st in t.steps() {
            used[st.edge] = true;
            if m.contains(st.edge) {
                rm.remove(g, st.edge);
                let e = g.edge(st.edge);
                rf[e.u] -= 1;
                rf[e.v] -= 1;
            }
        }
        rf[t.start()] -= 1;
        rf[t.end()] -= 1;
        trails.push(t);
    };
    take(first, &mut used, &mut rm, &mut rf);
    loop {
        let active: Vec<bool> = used.iter().map(|&u| !u).collect();
        let bound = DegreeBound::from_vec(rf.clone());
        let opts = SearchOptions {
            max_l: Some(outcome.l),
            active: Some(&active),
            debug_validate,
            ..Default::default()
        };
        let out = f_matching_search(g, &bound, &rm, &opts)?;
        match out.trail {
            None => break,
            Some(t) if t.len() == s => take(t, &mut used, &mut rm, &mut rf),
            Some(t) => {
                return Err(Error::Invariant(format!(
                    "residual search returned a trail of length {} in a phase with s = {s}",
                    t.len()
                )))
            }
        }
    }
    Ok(BlockingSet { trails, s })
}

/// Augments every trail of `b` in order.
pub fn augment_all(g: &Multigraph, f: &DegreeBound, m: &Matching, b: &BlockingSet) -> Result<Matching> {
    let mut cur = m.clone();
    for t in &b.trails {
        cur = augment(g, &cur, t, f)?;
    }
    Ok(cur)
}

pub fn solve_from(g: &Multigraph, f: &DegreeBound, m0: &Matching, opts: SolveOptions) -> Result<Solution> {
    let sopts = SearchOptions {
        debug_validate: opts.debug_validate,
        ..Default::default()
    };
    let mut m = m0.clone();
    let mut stats = PhaseStats::default();
    let mut records = Vec::new();
    loop {
        let out = f_matching_search(g, f, &m, &sopts)?;
        if out.trail.is_none() {
            stats.phase_count = stats.phases.len();
            stats.final_cardinality = m.len();
            return Ok(Solution {
                matching: m,
                stats,
                records,
                final_search: out,
            });
        }
        let blocking = find_blocking_set_with(g, f, &m, &out, opts.debug_validate)?;
        let next = augment_all(g, f, &m, &blocking)?;
        stats.phases.push(PhaseStat {
            phase: stats.phases.len() + 1,
            s: blocking.s,
            l: out.l,
            trails: blocking.trails.len(),
            cardinality_before: m.len(),
            cardinality_after: next.len(),
        });
        if opts.record {
            records.push(PhaseRecord {
                matching_before: m,
                outcome: out,
                blocking,
            });
        }
        m = next;
    }
}

pub fn solve_max_f_matching(g: &Multigraph, f: &DegreeBound) -> Result<(Matching, PhaseStats)> {
    let sol = solve_from(g, f, &Matching::empty(g), SolveOptions::default())?;
    Ok((sol.matching, sol.stats))
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    /// Violations of the structured matching returned by the last search.
    pub structured: Report,
    /// The last search stopped without an augmenting trail.
    pub exhausted: bool,
    /// Brute-force agreement, when the instance is small enough.
    pub brute_force_agrees: Option<bool>,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.structured.is_ok() && self.exhausted && self.brute_force_agrees != Some(false)
    }
}

pub fn certify(g: &Multigraph, f: &DegreeBound, m: &Matching, last: &SearchOutcome) -> Certificate {
    let mut structured = validate_structured(g, f, &last.structured, None);
    if last.structured.matching != *m {
        structured.push("certificate belongs to a different matching");
    }
    let brute_force_agrees = oracle::brute_force_max_f_matching(g, f)
        .ok()
        .map(|r| r.max_cardinality == m.len());
    Certificate {
        structured,
        exhausted: last.trail.is_none(),
        brute_force_agrees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Multigraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Multigraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn two_disjoint_edges_block_together() {
        let g = Multigraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let f = DegreeBound::uniform(4, 1);
        let m = Matching::empty(&g);
        let out = f_matching_search(&g, &f, &m, &SearchOptions::default()).unwrap();
        let b = find_blocking_set(&g, &f, &m, &out).unwrap();
        assert_eq!(b.trails.len(), 2);
        assert!(b.trails.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn star_blocks_once() {
        let g = Multigraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let f = DegreeBound::uniform(4, 1);
        let m = Matching::empty(&g);
        let out = f_matching_search(&g, &f, &m, &SearchOptions::default()).unwrap();
        let b = find_blocking_set(&g, &f, &m, &out).unwrap();
        assert_eq!(b.trails.len(), 1);
    }

    #[test]
    fn cycles() {
        let (m, _) = solve_max_f_matching(&cycle(4), &DegreeBound::uniform(4, 1)).unwrap();
        assert_eq!(m.len(), 2);
        let (m, _) = solve_max_f_matching(&cycle(5), &DegreeBound::uniform(5, 2)).unwrap();
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn petersen() {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        let g = Multigraph::from_edges(10, &edges).unwrap();
        let f = DegreeBound::uniform(10, 1);
        let (m, stats) = solve_max_f_matching(&g, &f).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(stats.final_cardinality, 5);
    }

    #[test]
    fn certificates() {
        let g = Multigraph::from_edges(2, &[(0, 1)]).unwrap();
        let f = DegreeBound::uniform(2, 1);
        let sol = solve_from(&g, &f, &Matching::empty(&g), SolveOptions::default()).unwrap();
        assert!(certify(&g, &f, &sol.matching, &sol.final_search).is_valid());

        let tri = cycle(3);
        let f = DegreeBound::uniform(3, 1);
        let m = Matching::from_edges(&tri, &f, &[0]).unwrap();
        let sol = solve_from(&tri, &f, &m, SolveOptions::default()).unwrap();
        assert_eq!(sol.stats.phase_count, 0);
        assert!(certify(&tri, &f, &sol.matching, &sol.final_search).is_valid());
    }
}
