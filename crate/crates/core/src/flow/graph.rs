use std::collections::BTreeMap;

use super::costs::{detection_cost, link_cost, normalize_scores, CostConfig};
use crate::error::{Error, Result};
use crate::model::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const SOURCE: NodeId = NodeId(0);
    pub const SINK: NodeId = NodeId(1);

    /// Entry half of detection `i`.
    pub fn inlet(i: usize) -> NodeId {
        NodeId(2 + 2 * i)
    }

    /// Exit half of detection `i`.
    pub fn outlet(i: usize) -> NodeId {
        NodeId(3 + 2 * i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Entry(usize),
    Detection(usize),
    Exit(usize),
    Link(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEdge {
    pub kind: EdgeKind,
    pub from: NodeId,
    pub to: NodeId,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
}

/// The association network. Detections are indexed in frame order; links
/// are kept sorted by `(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    detections: Vec<Detection>,
    det_costs: Vec<f64>,
    c_in: f64,
    c_out: f64,
    max_link_gap: u32,
    links: Vec<Link>,
}

impl FlowGraph {
    pub fn new(
        detections: Vec<Detection>,
        det_costs: Vec<f64>,
        c_in_out: f64,
        max_link_gap: u32,
        mut links: Vec<Link>,
    ) -> Result<Self> {
        if detections.len() != det_costs.len() {
            return Err(Error::Graph("one detection cost per detection required".into()));
        }
        if detections.windows(2).any(|w| w[1].frame < w[0].frame) {
            return Err(Error::Graph("detections must be sorted by frame".into()));
        }
        if !c_in_out.is_finite() || det_costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Graph("costs must be finite".into()));
        }
        links.sort_by_key(|l| (l.from, l.to));
        if links.windows(2).any(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to)) {
            return Err(Error::Graph("duplicate link edge".into()));
        }
        for l in &links {
            if l.from >= detections.len() || l.to >= detections.len() {
                return Err(Error::Graph(format!("link {}->{} out of range", l.from, l.to)));
            }
            let (a, b) = (detections[l.from].frame, detections[l.to].frame);
            if b <= a || b - a > max_link_gap {
                return Err(Error::Graph(format!(
                    "link {}->{} spans frames {a}->{b}, outside 1..={max_link_gap}",
                    l.from, l.to
                )));
            }
            if !l.cost.is_finite() {
                return Err(Error::Graph("costs must be finite".into()));
            }
        }
        Ok(Self {
            detections,
            det_costs,
            c_in: c_in_out,
            c_out: c_in_out,
            max_link_gap,
            links,
        })
    }

    pub fn detections(&self) -> &[Detection] {
        &self.detections
    }

    pub fn detection_costs(&self) -> &[f64] {
        &self.det_costs
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn entry_cost(&self) -> f64 {
        self.c_in
    }

    pub fn exit_cost(&self) -> f64 {
        self.c_out
    }

    pub fn max_link_gap(&self) -> u32 {
        self.max_link_gap
    }

    pub fn node_count(&self) -> usize {
        2 + 2 * self.detections.len()
    }

    pub fn edge_count(&self) -> usize {
        3 * self.detections.len() + self.links.len()
    }

    /// All edges in canonical order: entries, detections, exits, links.
    pub fn edges(&self) -> Vec<FlowEdge> {
        let n = self.detections.len();
        let mut edges = Vec::with_capacity(self.edge_count());
        edges.extend((0..n).map(|i| FlowEdge {
            kind: EdgeKind::Entry(i),
            from: NodeId::SOURCE,
            to: NodeId::inlet(i),
            cost: self.c_in,
        }));
        edges.extend((0..n).map(|i| FlowEdge {
            kind: EdgeKind::Detection(i),
            from: NodeId::inlet(i),
            to: NodeId::outlet(i),
            cost: self.det_costs[i],
        }));
        edges.extend((0..n).map(|i| FlowEdge {
            kind: EdgeKind::Exit(i),
            from: NodeId::outlet(i),
            to: NodeId::SINK,
            cost: self.c_out,
        }));
        edges.extend(self.links.iter().map(|l| FlowEdge {
            kind: EdgeKind::Link(l.from, l.to),
            from: NodeId::outlet(l.from),
            to: NodeId::inlet(l.to),
            cost: l.cost,
        }));
        edges
    }

    /// Cost of routing one unit of flow through `path` (detection indices).
    pub fn path_cost(&self, path: &[usize]) -> Option<f64> {
        let mut cost = self.c_in + self.c_out;
        for (k, &i) in path.iter().enumerate() {
            cost += self.det_costs[i];
            if k + 1 < path.len() {
                cost += self.link_cost(i, path[k + 1])?;
            }
        }
        Some(cost)
    }

    pub fn link_cost(&self, from: usize, to: usize) -> Option<f64> {
        self.links
            .binary_search_by_key(&(from, to), |l| (l.from, l.to))
            .ok()
            .map(|k| self.links[k].cost)
    }
}

/// Builds the network from detections sorted by frame and a map of pairwise
/// match probabilities keyed by detection index. Pairs missing from the map
/// get no link edge.
pub fn build_graph(
    detections: &[Detection],
    pair_scores: &BTreeMap<(usize, usize), f64>,
    cfg: &CostConfig,
) -> Result<FlowGraph> {
    cfg.validate()?;
    let raw: Vec<f64> = detections.iter().map(|d| d.score).collect();
    let det_costs = normalize_scores(&raw)
        .into_iter()
        .map(|s| detection_cost(s, cfg.v_det))
        .collect();
    let mut links = Vec::with_capacity(pair_scores.len());
    for (&(from, to), &p) in pair_scores {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "pair score {p} for {from}->{to} is outside [0, 1]"
            )));
        }
        if from >= detections.len() || to >= detections.len() {
            return Err(Error::Graph(format!("pair {from}->{to} out of range")));
        }
        let gap = i64::from(detections[to].frame) - i64::from(detections[from].frame);
        if gap < 1 || gap > i64::from(cfg.max_link_gap) {
            continue;
        }
        links.push(Link {
            from,
            to,
            cost: link_cost(p, cfg.v_link),
        });
    }
    FlowGraph::new(detections.to_vec(), det_costs, cfg.c_in_out, cfg.max_link_gap, links)
}
