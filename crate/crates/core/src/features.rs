//! Contextual association features and labeled training pairs.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{center, iou, Detection, Sequence};
use crate::mot_io::ScoreTable;

/// Number of contextual features appended to every feature vector.
pub const CONTEXT_DIM: usize = 6;

/// Motion and scale cues between an earlier detection `a` and a later `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextualFeatures {
    /// `(s_a - s_b) / (s_a + s_b)` per dimension, `s = (w, h)`.
    pub rel_size_change: [f64; 2],
    /// `x_a - x_b` on box centers.
    pub position_change: [f64; 2],
    /// `position_change / (t_b - t_a)`.
    pub rel_velocity: [f64; 2],
}

impl ContextualFeatures {
    pub fn to_array(&self) -> [f64; CONTEXT_DIM] {
        [
            self.rel_size_change[0],
            self.rel_size_change[1],
            self.position_change[0],
            self.position_change[1],
            self.rel_velocity[0],
            self.rel_velocity[1],
        ]
    }
}

pub fn contextual_features(a: &Detection, b: &Detection) -> Result<ContextualFeatures> {
    if a.frame == b.frame {
        return Err(Error::InvalidInput(format!(
            "contextual features need distinct frames, both are {}",
            a.frame
        )));
    }
    let (ax, ay) = center(&a.bbox);
    let (bx, by) = center(&b.bbox);
    let dt = f64::from(b.frame) - f64::from(a.frame);
    let rel = |s1: f64, s2: f64| (s1 - s2) / (s1 + s2);
    let dx = ax - bx;
    let dy = ay - by;
    Ok(ContextualFeatures {
        rel_size_change: [
            rel(a.bbox.width(), b.bbox.width()),
            rel(a.bbox.height(), b.bbox.height()),
        ],
        position_change: [dx, dy],
        rel_velocity: [dx / dt, dy / dt],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NegativeClass {
    /// Two true detections of different people.
    CrossIdentity,
    /// A true detection and a false positive.
    TrueFalse,
    /// Two false positives.
    FalseFalse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub a: Detection,
    pub b: Detection,
    pub context: ContextualFeatures,
    pub external: Option<Vec<f64>>,
    pub label: bool,
}

impl PairSample {
    pub fn frame_gap(&self) -> u32 {
        self.b.frame - self.a.frame
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGenConfig {
    /// Maximum frame gap between the two detections of a pair.
    pub rewind_window: u32,
    /// IoU needed for a detection to count as a true positive.
    pub gt_match_iou: f64,
    /// Negatives kept per class, as a multiple of the positive count.
    pub negative_ratio: [f64; 3],
    pub seed: u64,
}

impl Default for PairGenConfig {
    fn default() -> Self {
        Self {
            rewind_window: 15,
            gt_match_iou: 0.5,
            negative_ratio: [1.0; 3],
            seed: 0,
        }
    }
}

impl PairGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rewind_window < 1 {
            return Err(Error::Config("rewind window must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gt_match_iou) {
            return Err(Error::Config("gt_match_iou must lie in [0, 1]".into()));
        }
        if self.negative_ratio.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config("negative ratios must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn ratio(&self, class: NegativeClass) -> f64 {
        match class {
            NegativeClass::CrossIdentity => self.negative_ratio[0],
            NegativeClass::TrueFalse => self.negative_ratio[1],
            NegativeClass::FalseFalse => self.negative_ratio[2],
        }
    }
}

/// Assigns each detection a ground-truth identity, or `None` for false
/// positives, by greedy one-to-one IoU matching within each frame.
pub fn label_detections(detections: &[Detection], ground_truth: &[(u32, Detection)], min_iou: f64) -> Vec<Option<u32>> {
    let mut gt_by_frame: HashMap<u32, Vec<(u32, &Detection)>> = HashMap::new();
    for (id, g) in ground_truth {
        gt_by_frame.entry(g.frame).or_default().push((*id, g));
    }
    let mut det_by_frame: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, d) in detections.iter().enumerate() {
        det_by_frame.entry(d.frame).or_default().push(i);
    }
    let mut labels = vec![None; detections.len()];
    for (frame, dets) in &det_by_frame {
        let Some(gts) = gt_by_frame.get(frame) else {
            continue;
        };
        let mut candidates = Vec::new();
        for (di, &d) in dets.iter().enumerate() {
            for (gi, (_, g)) in gts.iter().enumerate() {
                let o = iou(&detections[d].bbox, &g.bbox);
                if o >= min_iou && o > 0.0 {
                    candidates.push((o, di, gi));
                }
            }
        }
        candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut det_used = vec![false; dets.len()];
        let mut gt_used = vec![false; gts.len()];
        for (_, di, gi) in candidates {
            if det_used[di] || gt_used[gi] {
                continue;
            }
            det_used[di] = true;
            gt_used[gi] = true;
            labels[dets[di]] = Some(gts[gi].0);
        }
    }
    labels
}

/// Index pairs `(i, j)` of detections sorted by frame with
/// `1 <= frame_j - frame_i <= max_gap`, in canonical `(i, j)` order.
pub fn candidate_pairs(detections: &[Detection], max_gap: u32) -> Vec<(usize, usize)> {
    debug_assert!(detections.windows(2).all(|w| w[0].frame <= w[1].frame));
    let mut pairs = Vec::new();
    let mut start = 0;
    for (i, a) in detections.iter().enumerate() {
        while start < detections.len() && detections[start].frame <= a.frame {
            start += 1;
        }
        for (j, b) in detections.iter().enumerate().skip(start) {
            if b.frame - a.frame > max_gap {
                break;
            }
            pairs.push((i, j));
        }
    }
    pairs
}

/// Builds labeled detection pairs from a sequence with ground truth.
///
/// Positives are every pair of detections matched to the same identity
/// within the rewind window. Negatives come from three classes (different
/// identities, true/false positive, two false positives) and are subsampled
/// per class to `ratio * positives` using the configured seed.
pub fn generate_pairs(seq: &Sequence, cfg: &PairGenConfig) -> Result<Vec<PairSample>> {
    cfg.validate()?;
    let gt = seq
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("sequence {:?} has no ground truth", seq.name)))?;
    let mut dets = seq.detections.clone();
    dets.sort_by_key(|d| (d.frame, d.source_index));
    let labels = label_detections(&dets, gt, cfg.gt_match_iou);

    let mut positives = Vec::new();
    let mut negatives: [Vec<(usize, usize)>; 3] = Default::default();
    for (i, j) in candidate_pairs(&dets, cfg.rewind_window) {
        match (labels[i], labels[j]) {
            (Some(x), Some(y)) if x == y => positives.push((i, j)),
            (Some(_), Some(_)) => negatives[0].push((i, j)),
            (Some(_), None) | (None, Some(_)) => negatives[1].push((i, j)),
            (None, None) => negatives[2].push((i, j)),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let classes = [
        NegativeClass::CrossIdentity,
        NegativeClass::TrueFalse,
        NegativeClass::FalseFalse,
    ];
    let mut kept: Vec<(usize, usize, bool)> = positives.iter().map(|&(i, j)| (i, j, true)).collect();
    for (class, mut pool) in classes.into_iter().zip(negatives) {
        let want = (cfg.ratio(class) * positives.len() as f64).round() as usize;
        if want < pool.len() {
            pool.shuffle(&mut rng);
            pool.truncate(want);
        }
        kept.extend(pool.into_iter().map(|(i, j)| (i, j, false)));
    }
    kept.sort_unstable();

    kept.into_iter()
        .map(|(i, j, label)| {
            Ok(PairSample {
                a: dets[i],
                b: dets[j],
                context: contextual_features(&dets[i], &dets[j])?,
                external: None,
                label,
            })
        })
        .collect()
}

/// Attaches external (appearance) values from a bound score table.
pub fn attach_external(pairs: &mut [PairSample], table: &ScoreTable) -> Result<()> {
    for p in pairs {
        let v = table.get(&p.a, &p.b).ok_or(Error::MissingScore {
            frame_a: p.a.frame,
            index_a: p.a.source_index,
            frame_b: p.b.frame,
            index_b: p.b.source_index,
        })?;
        p.external = Some(v.to_vec());
    }
    Ok(())
}

/// Feature layout: `[external..., rel_size_w, rel_size_h, dx, dy, vx, vy]`.
pub fn feature_vector(external: Option<&[f64]>, context: &ContextualFeatures) -> Vec<f64> {
    let ext = external.unwrap_or(&[]);
    let mut v = Vec::with_capacity(ext.len() + CONTEXT_DIM);
    v.extend_from_slice(ext);
    v.extend_from_slice(&context.to_array());
    v
}

pub fn assemble_feature_vector(p: &PairSample) -> Vec<f64> {
    feature_vector(p.external.as_deref(), &p.context)
}

/// Feature vectors for a whole dataset; external dimensionality must agree.
pub fn assemble_dataset(pairs: &[PairSample]) -> Result<Vec<Vec<f64>>> {
    let dim = pairs.first().map_or(0, |p| p.external.as_ref().map_or(0, Vec::len));
    pairs
        .iter()
        .map(|p| {
            let d = p.external.as_ref().map_or(0, Vec::len);
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim + CONTEXT_DIM,
                    found: d + CONTEXT_DIM,
                });
            }
            Ok(assemble_feature_vector(p))
        })
        .collect()
}
