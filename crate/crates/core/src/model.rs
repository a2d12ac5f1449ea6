//! Domain types shared across the toolkit.

use crate::error::{Error, Result};

/// Axis-aligned box in image coordinates, top-left anchored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        if !(left.is_finite() && top.is_finite() && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinates ({left}, {top}, {width}, {height})"
            )));
        }
        if width <= 0.0 || height <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "width and height must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            left,
            top,
            width,
            height,
        })
    }

    /// Builds a box from its center point and size.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(cx - width / 2.0, cy - height / 2.0, width, height)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn top(&self) -> f64 {
        self.top
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    // Area measured through the edge coordinates, so that it agrees bit-for-bit
    // with the intersection of a box with itself.
    fn edge_area(&self) -> f64 {
        (self.right() - self.left) * (self.bottom() - self.top)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(self.left + dx, self.top + dy, self.width, self.height)
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.left.max(b.left);
    let ih = a.bottom().min(b.bottom()) - a.top.max(b.top);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.edge_area() + b.edge_area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Center point of a box. Motion features are computed on centers so that
/// they are insensitive to a box growing around a fixed point.
pub fn center(b: &BoundingBox) -> (f64, f64) {
    (b.left + b.width / 2.0, b.top + b.height / 2.0)
}

/// One detector (or ground truth) box at a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bbox: BoundingBox,
    /// Raw detector confidence, unbounded.
    pub score: f64,
    /// 0-based position within its frame, in input file order.
    pub source_index: usize,
}

impl Detection {
    pub fn new(frame: u32, bbox: BoundingBox, score: f64, source_index: usize) -> Result<Self> {
        if frame < 1 {
            return Err(Error::InvalidDetection("frame numbers start at 1".into()));
        }
        if !score.is_finite() {
            return Err(Error::InvalidDetection(format!("non-finite score {score}")));
        }
        Ok(Self {
            frame,
            bbox,
            score,
            source_index,
        })
    }

    /// Join key used by score files.
    pub fn key(&self) -> (u32, usize) {
        (self.frame, self.source_index)
    }
}

/// A tracked identity: detections ordered by strictly increasing frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: u32,
    pub detections: Vec<Detection>,
}

impl Trajectory {
    pub fn new(id: u32, detections: Vec<Detection>) -> Result<Self> {
        if id == 0 {
            return Err(Error::InvalidInput("trajectory ids are positive".into()));
        }
        if detections.windows(2).any(|w| w[1].frame <= w[0].frame) {
            return Err(Error::InvalidInput(format!(
                "trajectory {id}: frames must be strictly increasing"
            )));
        }
        Ok(Self { id, detections })
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn max_gap(&self) -> u32 {
        self.detections
            .windows(2)
            .map(|w| w[1].frame - w[0].frame)
            .max()
            .unwrap_or(0)
    }
}

/// Detections of one video sequence, optionally with ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub name: String,
    pub frame_count: u32,
    pub detections: Vec<Detection>,
    /// `(track id, box)` pairs.
    pub ground_truth: Option<Vec<(u32, Detection)>>,
}

impl Sequence {
    /// Builds a sequence; `frame_count` defaults to the last frame seen.
    pub fn new(
        name: impl Into<String>,
        frame_count: Option<u32>,
        mut detections: Vec<Detection>,
        ground_truth: Option<Vec<(u32, Detection)>>,
    ) -> Result<Self> {
        detections.sort_by_key(|d| (d.frame, d.source_index));
        let last = detections
            .iter()
            .map(|d| d.frame)
            .chain(ground_truth.iter().flatten().map(|(_, d)| d.frame))
            .max()
            .unwrap_or(0);
        let frame_count = frame_count.unwrap_or(last);
        if last > frame_count {
            return Err(Error::InvalidInput(format!(
                "frame {last} exceeds frame count {frame_count}"
            )));
        }
        Ok(Self {
            name: name.into(),
            frame_count,
            detections,
            ground_truth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(l: f64, t: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(l, t, w, h).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(100.0, 100.0, 10.0, 10.0)), 0.0);
        let third = iou(&a, &bb(5.0, 0.0, 10.0, 10.0));
        assert!((third - 50.0 / 150.0).abs() < 1e-15);
        // touching edges
        assert_eq!(iou(&a, &bb(10.0, 0.0, 10.0, 10.0)), 0.0);
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&bb(0.0, 0.0, 10.0, 10.0)), (5.0, 5.0));
        assert_eq!(center(&bb(-5.0, -5.0, 10.0, 10.0)), (0.0, 0.0));
        assert!(BoundingBox::new(10.0, 20.0, 0.0, 5.0).is_err());
        assert!(BoundingBox::new(10.0, 20.0, 5.0, -1.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 20.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn detection_frame_starts_at_one() {
        assert!(Detection::new(0, bb(0.0, 0.0, 1.0, 1.0), 0.5, 0).is_err());
    }

    #[test]
    fn trajectory_rejects_non_increasing_frames() {
        let d = Detection::new(3, bb(0.0, 0.0, 1.0, 1.0), 0.5, 0).unwrap();
        assert!(Trajectory::new(1, vec![d, d]).is_err());
        assert!(Trajectory::new(0, vec![d]).is_err());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-500.0..500.0f64, -500.0..500.0f64, 0.5..200.0f64, 0.5..200.0f64).prop_map(|(l, t, w, h)| bb(l, t, w, h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }

        #[test]
        fn iou_translation_invariant(a in arb_box(), b in arb_box(), dx in -300.0..300.0f64, dy in -300.0..300.0f64) {
            let before = iou(&a, &b);
            let after = iou(&a.translated(dx, dy).unwrap(), &b.translated(dx, dy).unwrap());
            prop_assert!((before - after).abs() < 1e-12);
        }
    }
}
