//! CLEAR MOT evaluation.
//!
//! Frames are processed in order. Correspondences from the previous frame
//! are kept while their overlap stays at or above the IoU threshold; the
//! remaining boxes are matched greedily by descending IoU. A ground-truth
//! track matched to a different hypothesis than the last one it was matched
//! to counts as an identity switch.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{iou, BoundingBox, Trajectory};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
/// Coverage above which a track is mostly tracked.
pub const MOSTLY_TRACKED: f64 = 0.8;
/// Coverage below which a track is mostly lost.
pub const MOSTLY_LOST: f64 = 0.2;

/// Matching state carried from frame to frame.
#[derive(Debug, Clone, Default)]
pub struct MatchState {
    /// Pairs matched in the previous frame.
    previous: BTreeMap<u32, u32>,
    /// Most recent hypothesis matched to each ground-truth id.
    last: HashMap<u32, u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMatch {
    /// `(gt id, hypothesis id, iou)`.
    pub matches: Vec<(u32, u32, f64)>,
    pub misses: usize,
    pub false_positives: usize,
    pub id_switches: usize,
}

/// Matches one frame and advances the state.
pub fn match_frame(
    state: &mut MatchState,
    gt: &[(u32, BoundingBox)],
    hyp: &[(u32, BoundingBox)],
    iou_threshold: f64,
) -> FrameMatch {
    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];
    let mut matches = Vec::new();

    // Carry over last frame's correspondences that still overlap enough.
    for (gi, (gid, gbox)) in gt.iter().enumerate() {
        let Some(&hid) = state.previous.get(gid) else {
            continue;
        };
        if let Some(hi) = hyp.iter().position(|(h, _)| *h == hid) {
            let o = iou(gbox, &hyp[hi].1);
            if !hyp_used[hi] && o >= iou_threshold {
                gt_used[gi] = true;
                hyp_used[hi] = true;
                matches.push((gi, hi, o));
            }
        }
    }

    let mut candidates = Vec::new();
    for (gi, (_, gbox)) in gt.iter().enumerate() {
        if gt_used[gi] {
            continue;
        }
        for (hi, (_, hbox)) in hyp.iter().enumerate() {
            if hyp_used[hi] {
                continue;
            }
            let o = iou(gbox, hbox);
            if o >= iou_threshold && o > 0.0 {
                candidates.push((o, gi, hi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (o, gi, hi) in candidates {
        if gt_used[gi] || hyp_used[hi] {
            continue;
        }
        gt_used[gi] = true;
        hyp_used[hi] = true;
        matches.push((gi, hi, o));
    }

    let mut id_switches = 0;
    let mut previous = BTreeMap::new();
    let mut out = Vec::with_capacity(matches.len());
    for (gi, hi, o) in matches {
        let (gid, hid) = (gt[gi].0, hyp[hi].0);
        if let Some(&before) = state.last.get(&gid) {
            if before != hid {
                id_switches += 1;
            }
        }
        state.last.insert(gid, hid);
        previous.insert(gid, hid);
        out.push((gid, hid, o));
    }
    state.previous = previous;
    out.sort_by_key(|&(g, h, _)| (g, h));

    FrameMatch {
        misses: gt_used.iter().filter(|&&u| !u).count(),
        false_positives: hyp_used.iter().filter(|&&u| !u).count(),
        id_switches,
        matches: out,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mota: f64,
    /// Mean IoU of matched pairs, in `[0, 1]`.
    pub motp: f64,
    pub mostly_tracked: usize,
    pub mostly_lost: usize,
    pub gt_tracks: usize,
    pub id_switches: usize,
    pub false_positives: usize,
    pub misses: usize,
    pub matches: usize,
    pub gt_count: usize,
}

impl EvalReport {
    pub fn mt_fraction(&self) -> f64 {
        self.mostly_tracked as f64 / self.gt_tracks as f64
    }

    pub fn ml_fraction(&self) -> f64 {
        self.mostly_lost as f64 / self.gt_tracks as f64
    }

    /// `metric,value` rows.
    pub fn to_csv(&self) -> String {
        let rows: [(&str, String); 12] = [
            ("mota", self.mota.to_string()),
            ("motp", self.motp.to_string()),
            ("mt", self.mostly_tracked.to_string()),
            ("mt_fraction", self.mt_fraction().to_string()),
            ("ml", self.mostly_lost.to_string()),
            ("ml_fraction", self.ml_fraction().to_string()),
            ("id_switches", self.id_switches.to_string()),
            ("fp", self.false_positives.to_string()),
            ("fn", self.misses.to_string()),
            ("matches", self.matches.to_string()),
            ("gt_count", self.gt_count.to_string()),
            ("gt_tracks", self.gt_tracks.to_string()),
        ];
        let mut s = String::from("metric,value\n");
        for (k, v) in rows {
            s.push_str(k);
            s.push(',');
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>7} {:>7} {:>12} {:>12} {:>6} {:>7} {:>7} {:>7}",
            "MOTA", "MOTP", "MT", "ML", "IDsw", "FP", "FN", "GT"
        )?;
        write!(
            f,
            "{:>6.1}% {:>6.1}% {:>4} ({:>4.1}%) {:>4} ({:>4.1}%) {:>6} {:>7} {:>7} {:>7}",
            100.0 * self.mota,
            100.0 * self.motp,
            self.mostly_tracked,
            100.0 * self.mt_fraction(),
            self.mostly_lost,
            100.0 * self.ml_fraction(),
            self.id_switches,
            self.false_positives,
            self.misses,
            self.gt_count
        )
    }
}

fn by_frame(tracks: &[Trajectory]) -> BTreeMap<u32, Vec<(u32, BoundingBox)>> {
    let mut frames: BTreeMap<u32, Vec<(u32, BoundingBox)>> = BTreeMap::new();
    for t in tracks {
        for d in &t.detections {
            frames.entry(d.frame).or_default().push((t.id, d.bbox));
        }
    }
    frames
}

pub fn evaluate_sequence(gt: &[Trajectory], hyps: &[Trajectory]) -> Result<EvalReport> {
    evaluate_with_threshold(gt, hyps, DEFAULT_IOU_THRESHOLD)
}

pub fn evaluate_with_threshold(gt: &[Trajectory], hyps: &[Trajectory], iou_threshold: f64) -> Result<EvalReport> {
    let gt_count: usize = gt.iter().map(Trajectory::len).sum();
    if gt_count == 0 {
        return Err(Error::InvalidInput("ground truth is empty".into()));
    }
    let gt_frames = by_frame(gt);
    let hyp_frames = by_frame(hyps);
    let frames: BTreeSet<u32> = gt_frames.keys().chain(hyp_frames.keys()).copied().collect();

    let mut state = MatchState::default();
    let mut covered: HashMap<u32, usize> = HashMap::new();
    let (mut misses, mut fps, mut idsw, mut matched) = (0, 0, 0, 0);
    let mut overlap = 0.0;
    for frame in frames {
        let g = gt_frames.get(&frame).map_or(&[][..], Vec::as_slice);
        let h = hyp_frames.get(&frame).map_or(&[][..], Vec::as_slice);
        let m = match_frame(&mut state, g, h, iou_threshold);
        misses += m.misses;
        fps += m.false_positives;
        idsw += m.id_switches;
        matched += m.matches.len();
        for &(gid, _, o) in &m.matches {
            overlap += o;
            *covered.entry(gid).or_default() += 1;
        }
    }

    let (mut mt, mut ml) = (0, 0);
    for t in gt {
        let coverage = covered.get(&t.id).copied().unwrap_or(0) as f64 / t.len().max(1) as f64;
        if coverage > MOSTLY_TRACKED {
            mt += 1;
        } else if coverage < MOSTLY_LOST {
            ml += 1;
        }
    }

    Ok(EvalReport {
        mota: 1.0 - (misses + fps + idsw) as f64 / gt_count as f64,
        motp: if matched > 0 { overlap / matched as f64 } else { 0.0 },
        mostly_tracked: mt,
        mostly_lost: ml,
        gt_tracks: gt.len(),
        id_switches: idsw,
        false_positives: fps,
        misses,
        matches: matched,
        gt_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Detection;

    fn bb(x: f64) -> BoundingBox {
        BoundingBox::new(x, 0.0, 10.0, 10.0).unwrap()
    }

    fn track(id: u32, boxes: &[(u32, f64)]) -> Trajectory {
        let dets = boxes
            .iter()
            .map(|&(f, x)| Detection::new(f, bb(x), 1.0, 0).unwrap())
            .collect();
        Trajectory::new(id, dets).unwrap()
    }

    #[test]
    fn identical_boxes_match() {
        let mut s = MatchState::default();
        let m = match_frame(
            &mut s,
            &[(1, bb(0.0)), (2, bb(50.0))],
            &[(7, bb(0.0)), (8, bb(50.0))],
            0.5,
        );
        assert_eq!(m.matches.len(), 2);
        assert_eq!((m.misses, m.false_positives, m.id_switches), (0, 0, 0));
    }

    #[test]
    fn low_overlap_is_miss_and_false_positive() {
        let mut s = MatchState::default();
        let m = match_frame(&mut s, &[(1, bb(0.0))], &[(1, bb(5.0))], 0.5);
        assert_eq!((m.misses, m.false_positives), (1, 1));
    }

    #[test]
    fn swap_counts_two_switches() {
        let gt = [track(1, &[(1, 0.0), (2, 0.0)]), track(2, &[(1, 50.0), (2, 50.0)])];
        let hyp = [track(1, &[(1, 0.0), (2, 50.0)]), track(2, &[(1, 50.0), (2, 0.0)])];
        let r = evaluate_sequence(&gt, &hyp).unwrap();
        assert_eq!(r.id_switches, 2);
        assert_eq!((r.misses, r.false_positives), (0, 0));
        assert!((r.mota - 0.5).abs() < 1e-12);
    }

    #[test]
    fn carry_over_beats_better_newcomer() {
        let mut s = MatchState::default();
        match_frame(&mut s, &[(1, bb(0.0))], &[(5, bb(1.0))], 0.5);
        // Hypothesis 6 overlaps better, but 5 still qualifies.
        let m = match_frame(&mut s, &[(1, bb(0.0))], &[(6, bb(0.0)), (5, bb(2.0))], 0.5);
        assert_eq!(m.matches[0].1, 5);
        assert_eq!((m.id_switches, m.false_positives), (0, 1));
    }

    #[test]
    fn perfect_and_empty() {
        let gt = [
            track(1, &[(1, 0.0), (2, 1.0), (3, 2.0)]),
            track(2, &[(1, 50.0), (2, 51.0)]),
        ];
        let r = evaluate_sequence(&gt, &gt).unwrap();
        assert_eq!(
            (r.mota, r.motp, r.mostly_tracked, r.mostly_lost, r.id_switches),
            (1.0, 1.0, 2, 0, 0)
        );
        let r = evaluate_sequence(&gt, &[]).unwrap();
        assert_eq!(r.mota, 0.0);
        assert_eq!(r.misses, 5);
        assert_eq!(r.mostly_lost, 2);
        assert!(evaluate_sequence(&[], &gt).is_err());
    }

    #[test]
    fn mota_arithmetic() {
        // 100 GT boxes over 100 frames, 20 missed, 10 spurious, 2 switches.
        let gt: Vec<(u32, f64)> = (1..=100).map(|f| (f, 0.0)).collect();
        let gt = [track(1, &gt)];
        let mut hyp = Vec::new();
        let seg =
            |id: u32, frames: std::ops::RangeInclusive<u32>| track(id, &frames.map(|f| (f, 0.0)).collect::<Vec<_>>());
        hyp.push(seg(1, 21..=40));
        hyp.push(seg(2, 41..=60));
        hyp.push(seg(3, 61..=100));
        hyp.push(track(9, &(1..=10).map(|f| (f, 500.0)).collect::<Vec<_>>()));
        let r = evaluate_sequence(&gt, &hyp).unwrap();
        assert_eq!((r.misses, r.false_positives, r.id_switches), (20, 10, 2));
        assert!((r.mota - 0.68).abs() < 1e-12);
    }

    #[test]
    fn report_renders() {
        let gt = [track(1, &[(1, 0.0)])];
        let r = evaluate_sequence(&gt, &gt).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("metric,value\nmota,1\n"));
        assert!(r.to_string().contains("MOTA"));
    }
}
