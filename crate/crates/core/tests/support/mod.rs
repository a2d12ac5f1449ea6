//! Synthetic tracking data shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use flowtrack::{BoundingBox, Detection, Trajectory};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOX_W: f64 = 40.0;
pub const BOX_H: f64 = 100.0;

pub struct SyntheticSpec {
    pub tracks: usize,
    pub frames: u32,
    /// Fraction of ground-truth boxes without a detection.
    pub miss_rate: f64,
    /// Spurious boxes, as a fraction of the ground-truth box count.
    pub spurious_rate: f64,
    /// Half-width of the uniform position noise, in pixels.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            tracks: 5,
            frames: 50,
            miss_rate: 0.1,
            spurious_rate: 0.1,
            noise: 2.0,
            seed: 0,
        }
    }
}

pub struct Synthetic {
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<Trajectory>,
    /// Ground-truth id behind each detection key; spurious boxes are absent.
    pub identity: HashMap<(u32, usize), u32>,
    pub missed: usize,
    pub spurious: usize,
}

impl Synthetic {
    pub fn gt_labeled(&self) -> Vec<(u32, Detection)> {
        self.ground_truth
            .iter()
            .flat_map(|t| t.detections.iter().map(move |d| (t.id, *d)))
            .collect()
    }

    /// 1 for two detections of the same person, 0 otherwise.
    pub fn oracle(&self, a: &Detection, b: &Detection) -> Option<f64> {
        let same = matches!(
            (self.identity.get(&a.key()), self.identity.get(&b.key())),
            (Some(x), Some(y)) if x == y
        );
        Some(if same { 1.0 } else { 0.0 })
    }
}

/// Tracks walk in straight lines across the image in opposite directions so
/// that they cross mid-sequence. Exactly `round(miss_rate * boxes)` ground
/// truth boxes are dropped and `round(spurious_rate * boxes)` random boxes
/// are added. True detections score in [0.6, 1); spurious ones score lower.
pub fn synthetic(spec: &SyntheticSpec) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.tracks;
    let last = f64::from(spec.frames - 1).max(1.0);
    let mut ground_truth = Vec::with_capacity(n);
    let mut true_boxes = Vec::new();
    for k in 0..n {
        let x0 = 40.0 + 110.0 * k as f64 + rng.random_range(-10.0..10.0);
        let x1 = 40.0 + 110.0 * (n - 1 - k) as f64 + rng.random_range(-10.0..10.0);
        let y0 = 120.0 + 40.0 * k as f64;
        let y1 = 120.0 + 40.0 * ((k + 2) % n) as f64;
        let dets: Vec<Detection> = (1..=spec.frames)
            .map(|f| {
                let t = f64::from(f - 1) / last;
                let bbox = BoundingBox::new(x0 + (x1 - x0) * t, y0 + (y1 - y0) * t, BOX_W, BOX_H).unwrap();
                Detection::new(f, bbox, 1.0, k).unwrap()
            })
            .collect();
        for d in &dets {
            true_boxes.push((k as u32 + 1, *d));
        }
        ground_truth.push(Trajectory::new(k as u32 + 1, dets).unwrap());
    }

    let total = true_boxes.len();
    let missed = (spec.miss_rate * total as f64).round() as usize;
    true_boxes.shuffle(&mut rng);
    let kept = &true_boxes[missed..];

    let mut raw: Vec<(u32, BoundingBox, f64, Option<u32>)> = Vec::new();
    for &(id, d) in kept {
        let b = &d.bbox;
        let bbox = BoundingBox::new(
            b.left() + rng.random_range(-spec.noise..=spec.noise),
            b.top() + rng.random_range(-spec.noise..=spec.noise),
            b.width() + rng.random_range(-1.0..=1.0),
            b.height() + rng.random_range(-1.0..=1.0),
        )
        .unwrap();
        raw.push((d.frame, bbox, rng.random_range(0.6..1.0), Some(id)));
    }
    // Most spurious boxes come in short static runs, like a background object
    // the detector keeps firing on. The rest are isolated low-score boxes.
    let spurious = (spec.spurious_rate * total as f64).round() as usize;
    let in_runs = (0.6 * spurious as f64).round() as usize;
    let mut placed = 0;
    while placed < spurious {
        let len = if placed < in_runs {
            rng.random_range(6..=10).min(in_runs - placed).min(spec.frames as usize) as u32
        } else {
            1
        };
        let start = rng.random_range(1..=spec.frames - len + 1);
        let (x, y) = (rng.random_range(0.0..600.0), rng.random_range(0.0..380.0));
        let (w, h) = (rng.random_range(30.0..50.0), rng.random_range(80.0..120.0));
        for frame in start..start + len {
            let bbox =
                BoundingBox::new(x + rng.random_range(-1.0..=1.0), y + rng.random_range(-1.0..=1.0), w, h).unwrap();
            let score = if len > 1 {
                rng.random_range(0.35..0.5)
            } else {
                rng.random_range(0.0..0.2)
            };
            raw.push((frame, bbox, score, None));
        }
        placed += len as usize;
    }
    // Shuffle within frames so the source index carries no identity.
    raw.shuffle(&mut rng);
    raw.sort_by_key(|r| r.0);

    let mut detections = Vec::with_capacity(raw.len());
    let mut identity = HashMap::new();
    let mut index = 0;
    for (i, &(frame, bbox, score, id)) in raw.iter().enumerate() {
        if i > 0 && raw[i - 1].0 != frame {
            index = 0;
        }
        let d = Detection::new(frame, bbox, score, index).unwrap();
        if let Some(id) = id {
            identity.insert(d.key(), id);
        }
        detections.push(d);
        index += 1;
    }
    Synthetic {
        detections,
        ground_truth,
        identity,
        missed,
        spurious,
    }
}
