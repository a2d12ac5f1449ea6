//! Parameter sweep over tracker costs.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::config::GridAxis;
use crate::clearmot::evaluate_sequence;
use crate::error::{Error, Result};
use crate::flow::{track_sequence, CostConfig, PairScorer};
use crate::model::{Detection, Trajectory};

/// A training sequence with its ground truth and the scorer to use on it.
pub struct TuneSequence<'a> {
    pub name: String,
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<Trajectory>,
    pub scorer: Box<dyn PairScorer + 'a>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub costs: CostConfig,
    pub mean_mota: f64,
    pub id_switches: usize,
    pub false_positives: usize,
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// One row per grid point, in grid order.
    pub rows: Vec<SweepRow>,
    /// Index of the selected row.
    pub best: usize,
}

impl SweepResult {
    pub fn winner(&self) -> &SweepRow {
        &self.rows[self.best]
    }
}

/// Expands grid axes into cost configurations. `vlink` varies slowest and
/// `cinout` fastest, so each run of constant `(vlink, vdet)` is a row of
/// increasing entry/exit cost.
pub fn grid_points(axes: &[GridAxis], base: &CostConfig) -> Result<Vec<CostConfig>> {
    let axis = |key: &str, default: f64| -> Vec<f64> {
        axes.iter()
            .find(|a| a.key == key)
            .map_or_else(|| vec![default], |a| a.values.clone())
    };
    let mut points = Vec::new();
    for &v_link in &axis("vlink", base.v_link) {
        for &v_det in &axis("vdet", base.v_det) {
            for &c_in_out in &axis("cinout", base.c_in_out) {
                let cfg = CostConfig {
                    v_det,
                    v_link,
                    c_in_out,
                    max_link_gap: base.max_link_gap,
                };
                cfg.validate()?;
                points.push(cfg);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    Ok(points)
}

/// Ranking used to pick the winner: higher mean MOTA, then fewer identity
/// switches, then fewer false positives.
fn better(a: &SweepRow, b: &SweepRow) -> Ordering {
    a.mean_mota
        .total_cmp(&b.mean_mota)
        .then(b.id_switches.cmp(&a.id_switches))
        .then(b.false_positives.cmp(&a.false_positives))
}

pub fn select_best(rows: &[SweepRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if best.is_none_or(|b| better(row, &rows[b]) == Ordering::Greater) {
            best = Some(i);
        }
    }
    best
}

fn run_point(seqs: &[TuneSequence<'_>], costs: &CostConfig) -> Result<SweepRow> {
    let mut mota = 0.0;
    let (mut idsw, mut fp, mut count) = (0, 0, 0);
    for seq in seqs {
        let out = track_sequence(&seq.detections, seq.scorer.as_ref(), costs)?;
        let report = evaluate_sequence(&seq.ground_truth, &out.trajectories)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", seq.name)))?;
        mota += report.mota;
        idsw += report.id_switches;
        fp += report.false_positives;
        count += out.trajectories.len();
    }
    Ok(SweepRow {
        costs: costs.clone(),
        mean_mota: mota / seqs.len() as f64,
        id_switches: idsw,
        false_positives: fp,
        trajectories: count,
    })
}

/// Tracks and evaluates every sequence at every grid point.
pub fn sweep(seqs: &[TuneSequence<'_>], points: &[CostConfig]) -> Result<SweepResult> {
    if seqs.is_empty() {
        return Err(Error::InvalidInput("no training sequences".into()));
    }
    if points.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let rows: Vec<SweepRow> = points.par_iter().map(|p| run_point(seqs, p)).collect::<Result<_>>()?;
    let best = select_best(&rows).expect("rows are non-empty");
    Ok(SweepResult { rows, best })
}

pub fn render_table(result: &SweepResult) -> String {
    let mut s = format!(
        "{:>6} {:>8} {:>6} {:>9} {:>6} {:>7} {:>6}\n",
        "vdet", "cinout", "vlink", "meanMOTA", "IDsw", "FP", "tracks"
    );
    for (i, r) in result.rows.iter().enumerate() {
        s.push_str(&format!(
            "{:>6} {:>8} {:>6} {:>9.4} {:>6} {:>7} {:>6}{}\n",
            r.costs.v_det,
            r.costs.c_in_out,
            r.costs.v_link,
            r.mean_mota,
            r.id_switches,
            r.false_positives,
            r.trajectories,
            if i == result.best { "  *" } else { "" }
        ));
    }
    let w = result.winner();
    s.push_str(&format!(
        "best: vdet={} cinout={} vlink={} mean MOTA={:.4}\n",
        w.costs.v_det, w.costs.c_in_out, w.costs.v_link, w.mean_mota
    ));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mota: f64, idsw: usize, fp: usize) -> SweepRow {
        SweepRow {
            costs: CostConfig::default(),
            mean_mota: mota,
            id_switches: idsw,
            false_positives: fp,
            trajectories: 0,
        }
    }

    #[test]
    fn selection_tie_breaks() {
        assert_eq!(select_best(&[row(0.5, 3, 1), row(0.6, 9, 9)]), Some(1));
        assert_eq!(select_best(&[row(0.5, 3, 1), row(0.5, 2, 9)]), Some(1));
        assert_eq!(select_best(&[row(0.5, 2, 4), row(0.5, 2, 3)]), Some(1));
        assert_eq!(select_best(&[row(0.5, 2, 3), row(0.5, 2, 3)]), Some(0));
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn grid_order_and_validation() {
        let axes = vec![
            GridAxis {
                key: "vdet".into(),
                values: vec![0.3, 0.6],
            },
            GridAxis {
                key: "cinout".into(),
                values: vec![0.5, 1.0, 2.0],
            },
        ];
        let pts = grid_points(&axes, &CostConfig::default()).unwrap();
        let pairs: Vec<(f64, f64)> = pts.iter().map(|c| (c.v_det, c.c_in_out)).collect();
        assert_eq!(
            pairs,
            vec![(0.3, 0.5), (0.3, 1.0), (0.3, 2.0), (0.6, 0.5), (0.6, 1.0), (0.6, 2.0)]
        );
        let bad = vec![GridAxis {
            key: "vdet".into(),
            values: vec![1.0],
        }];
        assert!(grid_points(&bad, &CostConfig::default()).is_err());
    }
}
