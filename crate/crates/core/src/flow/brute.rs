//! Exhaustive reference solver for small graphs.
//!
//! Detections are visited in frame order; each one is either left out,
//! starts a new trajectory, or extends a trajectory whose current tail links
//! to it. The minimum over every such choice sequence is found by dynamic
//! programming over `(next detection, set of open tails)`, which covers
//! every set of disjoint gap-valid paths exactly once.

use std::collections::HashMap;

use super::graph::FlowGraph;
use super::solver::FlowSolution;
use crate::error::{Error, Result};

pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy)]
enum Choice {
    Skip,
    Start,
    Extend(usize),
}

struct Search<'a> {
    g: &'a FlowGraph,
    /// Largest detection index each detection links to, if any.
    last_successor: Vec<Option<usize>>,
    memo: HashMap<(usize, u32), (f64, Choice)>,
}

impl Search<'_> {
    fn best(&mut self, k: usize, open: u32) -> f64 {
        let n = self.g.detections().len();
        if k == n {
            return 0.0;
        }
        let open = self.normalize(k, open);
        if let Some(&(cost, _)) = self.memo.get(&(k, open)) {
            return cost;
        }
        let det = self.g.detection_costs()[k];
        let bit = 1u32 << k;
        let mut best = (self.best(k + 1, open), Choice::Skip);
        let start = self.g.entry_cost() + self.g.exit_cost() + det + self.best(k + 1, open | bit);
        if start < best.0 {
            best = (start, Choice::Start);
        }
        for t in 0..k {
            if open & (1 << t) == 0 {
                continue;
            }
            if let Some(link) = self.g.link_cost(t, k) {
                let c = det + link + self.best(k + 1, (open & !(1 << t)) | bit);
                if c < best.0 {
                    best = (c, Choice::Extend(t));
                }
            }
        }
        self.memo.insert((k, open), best);
        best.0
    }

    /// Drops tails that can no longer be extended at or after `k`.
    fn normalize(&self, k: usize, open: u32) -> u32 {
        let mut open = open;
        for t in 0..k {
            if open & (1 << t) != 0 && self.last_successor[t].is_none_or(|s| s < k) {
                open &= !(1 << t);
            }
        }
        open
    }
}

/// Exact minimum-cost trajectory set by exhaustive search. Only for graphs
/// with at most [`BRUTE_FORCE_LIMIT`] detections; meant as a test oracle.
pub fn brute_force_solve(g: &FlowGraph) -> Result<FlowSolution> {
    let n = g.detections().len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::InvalidInput(format!(
            "brute force supports at most {BRUTE_FORCE_LIMIT} detections, got {n}"
        )));
    }
    let mut last_successor = vec![None; n];
    for l in g.links() {
        last_successor[l.from] = Some(last_successor[l.from].map_or(l.to, |s: usize| s.max(l.to)));
    }
    let mut search = Search {
        g,
        last_successor,
        memo: HashMap::new(),
    };
    search.best(0, 0);

    // Replay the recorded choices.
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut open = 0u32;
    for k in 0..n {
        open = search.normalize(k, open);
        let (_, choice) = search.memo[&(k, open)];
        match choice {
            Choice::Skip => {}
            Choice::Start => {
                paths.push(vec![k]);
                open |= 1 << k;
            }
            Choice::Extend(t) => {
                let path = paths
                    .iter_mut()
                    .find(|p| p.last() == Some(&t))
                    .expect("open tail belongs to a path");
                path.push(k);
                open = (open & !(1 << t)) | (1 << k);
            }
        }
    }
    FlowSolution::from_paths(g, paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::graph::Link;
    use crate::model::{BoundingBox, Detection};

    fn det(frame: u32) -> Detection {
        Detection::new(frame, BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap(), 1.0, 0).unwrap()
    }

    #[test]
    fn empty_graph() {
        let g = FlowGraph::new(vec![], vec![], 1.0, 15, vec![]).unwrap();
        let s = brute_force_solve(&g).unwrap();
        assert_eq!(s.total_cost, 0.0);
        assert!(s.paths.is_empty());
    }

    #[test]
    fn singleton() {
        let g = FlowGraph::new(vec![det(1)], vec![-2.0], 0.5, 15, vec![]).unwrap();
        let s = brute_force_solve(&g).unwrap();
        assert_eq!(s.total_cost, -1.0);
        assert_eq!(s.paths, vec![vec![0]]);
    }

    #[test]
    fn pair_enumeration() {
        let link = vec![Link {
            from: 0,
            to: 1,
            cost: -0.5,
        }];
        let g = FlowGraph::new(vec![det(1), det(2)], vec![-0.5; 2], 0.6, 15, link.clone()).unwrap();
        assert!((brute_force_solve(&g).unwrap().total_cost + 0.3).abs() < 1e-12);
        let g = FlowGraph::new(vec![det(1), det(2)], vec![-0.5; 2], 0.8, 15, link).unwrap();
        assert_eq!(brute_force_solve(&g).unwrap().total_cost, 0.0);
    }

    #[test]
    fn size_limit() {
        let dets: Vec<Detection> = (1..=13).map(det).collect();
        let g = FlowGraph::new(dets, vec![0.0; 13], 1.0, 15, vec![]).unwrap();
        assert!(brute_force_solve(&g).is_err());
    }
}
