use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::graph::{EdgeKind, FlowGraph, NodeId};
use crate::error::{Error, Result};
use crate::model::Trajectory;

/// Augmenting paths whose cost is not below `-COST_EPS` are not taken.
const COST_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Units of flow per edge, aligned with [`FlowGraph::edges`].
    pub flows: Vec<u32>,
    pub total_cost: f64,
    /// Detection indices of every trajectory, in trajectory id order.
    pub paths: Vec<Vec<usize>>,
    pub trajectories: Vec<Trajectory>,
}

impl FlowSolution {
    pub(crate) fn from_paths(g: &FlowGraph, mut paths: Vec<Vec<usize>>) -> Result<Self> {
        paths.sort_by_key(|p| p.first().copied());
        let edges = g.edges();
        let n = g.detections().len();
        let mut flows = vec![0u32; edges.len()];
        let link_base = 3 * n;
        for path in &paths {
            let (&first, &last) = match (path.first(), path.last()) {
                (Some(f), Some(l)) => (f, l),
                _ => return Err(Error::Flow("empty path".into())),
            };
            flows[first] += 1;
            flows[2 * n + last] += 1;
            for (k, &i) in path.iter().enumerate() {
                flows[n + i] += 1;
                if let Some(&j) = path.get(k + 1) {
                    let pos = g
                        .links()
                        .binary_search_by_key(&(i, j), |l| (l.from, l.to))
                        .map_err(|_| Error::Flow(format!("path uses missing link {i}->{j}")))?;
                    flows[link_base + pos] += 1;
                }
            }
        }
        let total_cost = edges.iter().zip(&flows).map(|(e, &f)| e.cost * f64::from(f)).sum();
        let trajectories = to_trajectories(g, &paths)?;
        Ok(Self {
            flows,
            total_cost,
            paths,
            trajectories,
        })
    }
}

fn to_trajectories(g: &FlowGraph, paths: &[Vec<usize>]) -> Result<Vec<Trajectory>> {
    paths
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let id = u32::try_from(k + 1).map_err(|_| Error::Flow("too many trajectories".into()))?;
            Trajectory::new(id, p.iter().map(|&i| g.detections()[i]).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    cap: u32,
    cost: f64,
}

/// Residual network: arc `2k` is edge `k` forward, `2k + 1` its reverse.
struct Residual {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(g: &FlowGraph) -> Self {
        let mut adj = vec![Vec::new(); g.node_count()];
        let mut arcs = Vec::with_capacity(2 * g.edge_count());
        for e in g.edges() {
            adj[e.from.0].push(arcs.len());
            arcs.push(Arc {
                to: e.to.0,
                cap: 1,
                cost: e.cost,
            });
            adj[e.to.0].push(arcs.len());
            arcs.push(Arc {
                to: e.from.0,
                cap: 0,
                cost: -e.cost,
            });
        }
        Self { arcs, adj }
    }
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest distances from the source on the initial network. Nodes listed as
/// `source, u_0, v_0, u_1, v_1, ..., sink` form a topological order because
/// links only point forward in time, so one relaxation pass in that order is
/// a complete Bellman-Ford.
fn initial_potentials(g: &FlowGraph, res: &Residual) -> Vec<f64> {
    let n = g.detections().len();
    let mut dist = vec![f64::INFINITY; g.node_count()];
    dist[NodeId::SOURCE.0] = 0.0;
    let order = std::iter::once(NodeId::SOURCE.0)
        .chain((0..n).flat_map(|i| [NodeId::inlet(i).0, NodeId::outlet(i).0]))
        .chain(std::iter::once(NodeId::SINK.0));
    for u in order {
        if dist[u].is_infinite() {
            continue;
        }
        for &a in &res.adj[u] {
            let arc = res.arcs[a];
            if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] {
                dist[arc.to] = dist[u] + arc.cost;
            }
        }
    }
    dist
}

/// Dijkstra on reduced costs. Returns the predecessor arc of every node.
fn dijkstra(res: &Residual, potential: &[f64], dist: &mut [f64], prev: &mut [Option<usize>]) {
    dist.fill(f64::INFINITY);
    prev.fill(None);
    let mut done = vec![false; dist.len()];
    let mut heap = BinaryHeap::new();
    dist[NodeId::SOURCE.0] = 0.0;
    heap.push(Reverse((Dist(0.0), NodeId::SOURCE.0)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &a in &res.adj[u] {
            let arc = res.arcs[a];
            if arc.cap == 0 || done[arc.to] || potential[arc.to].is_infinite() {
                continue;
            }
            // Rounding can leave reduced costs a hair below zero.
            let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
            let nd = d + reduced;
            if nd < dist[arc.to] {
                dist[arc.to] = nd;
                prev[arc.to] = Some(a);
                heap.push(Reverse((Dist(nd), arc.to)));
            }
        }
    }
}

/// Finds the minimum-cost flow of any magnitude by successive shortest
/// paths. Augmentation stops at the first path whose cost is not negative;
/// since path costs never decrease, no later extra unit could help.
pub fn solve_mcf(g: &FlowGraph) -> Result<FlowSolution> {
    let mut res = Residual::new(g);
    let nodes = g.node_count();
    let mut potential = initial_potentials(g, &res);
    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![None; nodes];
    let sink = NodeId::SINK.0;
    let max_units = g.detections().len();

    for _ in 0..max_units {
        dijkstra(&res, &potential, &mut dist, &mut prev);
        if dist[sink].is_infinite() {
            break;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while let Some(a) = prev[v] {
            path.push(a);
            v = res.arcs[a ^ 1].to;
        }
        let path_cost: f64 = path.iter().map(|&a| res.arcs[a].cost).sum();
        if path_cost >= -COST_EPS {
            break;
        }
        for &a in &path {
            res.arcs[a].cap -= 1;
            res.arcs[a ^ 1].cap += 1;
        }
        for (p, d) in potential.iter_mut().zip(&dist) {
            if d.is_finite() {
                *p += d;
            }
        }
    }

    let flows: Vec<u32> = (0..g.edge_count()).map(|k| res.arcs[2 * k + 1].cap).collect();
    let paths = extract_paths(g, &flows)?;
    FlowSolution::from_paths(g, paths)
}

/// Follows unit flows from the source and returns the detection indices of
/// every trajectory, ordered by first detection.
pub fn extract_paths(g: &FlowGraph, flows: &[u32]) -> Result<Vec<Vec<usize>>> {
    let edges = g.edges();
    if flows.len() != edges.len() {
        return Err(Error::Flow(format!(
            "{} flow values for {} edges",
            flows.len(),
            edges.len()
        )));
    }
    let n = g.detections().len();
    let mut inflow = vec![0u32; n];
    let mut through = vec![0u32; n];
    let mut outflow = vec![0u32; n];
    let mut next = vec![None; n];
    let mut starts = Vec::new();
    for (e, &f) in edges.iter().zip(flows) {
        if f > 1 {
            return Err(Error::Flow(format!("flow {f} exceeds unit capacity on {:?}", e.kind)));
        }
        if f == 0 {
            continue;
        }
        match e.kind {
            EdgeKind::Entry(i) => {
                inflow[i] += 1;
                starts.push(i);
            }
            EdgeKind::Detection(i) => through[i] += 1,
            EdgeKind::Exit(i) => outflow[i] += 1,
            EdgeKind::Link(i, j) => {
                outflow[i] += 1;
                inflow[j] += 1;
                next[i] = Some(j);
            }
        }
    }
    for i in 0..n {
        if inflow[i] != through[i] || through[i] != outflow[i] {
            return Err(Error::Flow(format!(
                "flow not conserved at detection {i}: in {}, through {}, out {}",
                inflow[i], through[i], outflow[i]
            )));
        }
    }
    starts.sort_unstable();
    let paths = starts
        .into_iter()
        .map(|start| {
            let mut path = vec![start];
            let mut cur = start;
            while let Some(j) = next[cur] {
                path.push(j);
                cur = j;
            }
            path
        })
        .collect();
    Ok(paths)
}

/// Trajectories carried by a feasible integral flow, ids assigned from 1 in
/// order of each trajectory's first detection.
pub fn extract_trajectories(g: &FlowGraph, flows: &[u32]) -> Result<Vec<Trajectory>> {
    let paths = extract_paths(g, flows)?;
    to_trajectories(g, &paths)
}
