use std::collections::BTreeMap;

use rayon::prelude::*;

use super::costs::CostConfig;
use super::graph::build_graph;
use super::solver::solve_mcf;
use crate::error::{Error, Result};
use crate::features::{candidate_pairs, contextual_features, feature_vector, CONTEXT_DIM};
use crate::gbm::GbmModel;
use crate::model::{center, Detection, Trajectory};
use crate::mot_io::ScoreTable;

/// Probability that an earlier detection `a` and a later `b` are the same
/// person. `None` means the pair gets no link edge.
pub trait PairScorer: Sync {
    fn score(&self, a: &Detection, b: &Detection) -> Result<Option<f64>>;
}

/// Learned scorer: contextual features, optionally preceded by external
/// appearance features, fed to a boosted tree model.
pub struct GbmScorer<'a> {
    model: &'a GbmModel,
    external: Option<&'a ScoreTable>,
}

impl<'a> GbmScorer<'a> {
    pub fn new(model: &'a GbmModel, external: Option<&'a ScoreTable>) -> Result<Self> {
        let ext = external.map_or(0, ScoreTable::dim);
        if model.feature_count != ext + CONTEXT_DIM {
            return Err(Error::DimensionMismatch {
                expected: model.feature_count,
                found: ext + CONTEXT_DIM,
            });
        }
        Ok(Self { model, external })
    }
}

impl PairScorer for GbmScorer<'_> {
    fn score(&self, a: &Detection, b: &Detection) -> Result<Option<f64>> {
        let ext = match self.external {
            Some(table) => match table.get(a, b) {
                Some(v) => Some(v),
                None => return Ok(None),
            },
            None => None,
        };
        let x = feature_vector(ext, &contextual_features(a, b)?);
        self.model.predict(&x).map(Some)
    }
}

/// Probabilities read straight from a one-value score file.
pub struct ExternalScorer<'a> {
    table: &'a ScoreTable,
}

impl<'a> ExternalScorer<'a> {
    pub fn new(table: &'a ScoreTable) -> Result<Self> {
        if !table.is_empty() && table.dim() != 1 {
            return Err(Error::InvalidInput(format!(
                "score file used as probabilities must have one value per pair, found {}",
                table.dim()
            )));
        }
        Ok(Self { table })
    }
}

impl PairScorer for ExternalScorer<'_> {
    fn score(&self, a: &Detection, b: &Detection) -> Result<Option<f64>> {
        Ok(self.table.get(a, b).map(|v| v[0]))
    }
}

/// Distance-only baseline: `max(0, 1 - d / tau)` with `d` the distance
/// between box centers.
#[derive(Debug, Clone, Copy)]
pub struct Lp2dScorer {
    pub tau: f64,
}

impl Lp2dScorer {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("distance scale must be positive, got {tau}")));
        }
        Ok(Self { tau })
    }
}

impl PairScorer for Lp2dScorer {
    fn score(&self, a: &Detection, b: &Detection) -> Result<Option<f64>> {
        let (ax, ay) = center(&a.bbox);
        let (bx, by) = center(&b.bbox);
        let d = (ax - bx).hypot(ay - by);
        Ok(Some((1.0 - d / self.tau).max(0.0)))
    }
}

/// Adapts a closure into a scorer.
pub struct FnScorer<F>(pub F);

impl<F> PairScorer for FnScorer<F>
where
    F: Fn(&Detection, &Detection) -> Option<f64> + Sync,
{
    fn score(&self, a: &Detection, b: &Detection) -> Result<Option<f64>> {
        Ok((self.0)(a, b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub trajectories: Vec<Trajectory>,
    pub total_cost: f64,
    pub node_count: usize,
    pub edge_count: usize,
}

/// Scores every gap-valid detection pair, builds the network, solves it and
/// returns the trajectories.
pub fn track_sequence(detections: &[Detection], scorer: &dyn PairScorer, cfg: &CostConfig) -> Result<TrackOutput> {
    cfg.validate()?;
    let mut dets = detections.to_vec();
    dets.sort_by_key(|d| (d.frame, d.source_index));
    let pairs = candidate_pairs(&dets, cfg.max_link_gap);
    // Collecting an indexed parallel iterator keeps canonical pair order.
    let scored: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| scorer.score(&dets[i], &dets[j]))
        .collect::<Result<_>>()?;
    let pair_scores: BTreeMap<(usize, usize), f64> = pairs
        .into_iter()
        .zip(scored)
        .filter_map(|(k, s)| s.map(|s| (k, s)))
        .collect();
    let graph = build_graph(&dets, &pair_scores, cfg)?;
    let solution = solve_mcf(&graph)?;
    Ok(TrackOutput {
        trajectories: solution.trajectories,
        total_cost: solution.total_cost,
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
    })
}
