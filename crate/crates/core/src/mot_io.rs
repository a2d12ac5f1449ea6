//! Readers and writers for the MOTChallenge text formats, pairwise score
//! files and serialized boosted-tree models.
//!
//! MOT lines are `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`
//! without a header. Input may use LF or CRLF line endings; output always
//! uses LF. Reals are written with Rust's shortest round-trip rendering, so
//! reading back anything written here reproduces the original values exactly.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::gbm::{GbmModel, Node, RegressionTree};
use crate::model::{BoundingBox, Detection, Trajectory};

/// Which flavour of MOT file is being read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotKind {
    Detections,
    GroundTruth,
    Results,
}

/// One parsed MOT line.
#[derive(Debug, Clone, PartialEq)]
pub struct MotRecord {
    /// Raw id column (`-1` for detector output).
    pub id: i64,
    pub detection: Detection,
}

/// Parsed contents of a MOT file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MotFile {
    /// Records sorted by frame, then file order within the frame.
    pub records: Vec<MotRecord>,
    /// Lines dropped because their box had a non-positive size.
    pub rejected: usize,
}

impl MotFile {
    pub fn detections(&self) -> Vec<Detection> {
        self.records.iter().map(|r| r.detection).collect()
    }

    /// Ground truth as `(track id, box)` pairs in frame order.
    pub fn labeled(&self) -> Result<Vec<(u32, Detection)>> {
        self.records
            .iter()
            .map(|r| {
                u32::try_from(r.id)
                    .ok()
                    .filter(|&id| id > 0)
                    .map(|id| (id, r.detection))
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "frame {}: track id {} is not a positive integer",
                            r.detection.frame, r.id
                        ))
                    })
            })
            .collect()
    }

    /// Records grouped by id into trajectories, ordered by id.
    pub fn trajectories(&self) -> Result<Vec<Trajectory>> {
        let mut by_id: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
        for (id, det) in self.labeled()? {
            by_id.entry(id).or_default().push(det);
        }
        by_id.into_iter().map(|(id, dets)| Trajectory::new(id, dets)).collect()
    }
}

fn parse_real(field: &str, line: usize, name: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{name}: cannot parse {field:?} as a number"),
    })
}

fn parse_integral(field: &str, line: usize, name: &str) -> Result<i64> {
    let field = field.trim();
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    // Some tools write integral columns as `12.000`.
    let v = parse_real(field, line, name)?;
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Ok(v as i64)
    } else {
        Err(Error::Parse {
            line,
            message: format!("{name}: expected an integer, got {field:?}"),
        })
    }
}

fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l.map_err(Error::from)))
}

/// Parses a MOT detection, ground-truth or result file.
pub fn parse_mot_file<R: BufRead>(reader: R, kind: MotKind) -> Result<MotFile> {
    let mut raw = Vec::new();
    let mut rejected = 0;
    for (lineno, line) in lines(reader) {
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 6 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least 6 fields, found {}", fields.len()),
            });
        }
        let frame = parse_integral(fields[0], lineno, "frame")?;
        let frame = u32::try_from(frame)
            .ok()
            .filter(|&f| f >= 1)
            .ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("frame {frame} out of range"),
            })?;
        let id = parse_integral(fields[1], lineno, "id")?;
        let left = parse_real(fields[2], lineno, "bb_left")?;
        let top = parse_real(fields[3], lineno, "bb_top")?;
        let width = parse_real(fields[4], lineno, "bb_width")?;
        let height = parse_real(fields[5], lineno, "bb_height")?;
        let score = match fields.get(6) {
            Some(f) => parse_real(f, lineno, "conf")?,
            None => 1.0,
        };
        for (i, f) in fields.iter().enumerate().skip(7) {
            parse_real(f, lineno, &format!("column {}", i + 1))?;
        }
        // Detector output carries id -1; tracks need a real identity.
        if kind != MotKind::Detections && (id < 1 || id > i64::from(u32::MAX)) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("track id {id} is not a positive integer"),
            });
        }
        let bbox = match BoundingBox::new(left, top, width, height) {
            Ok(b) => b,
            Err(_) if width.is_finite() && height.is_finite() && (width <= 0.0 || height <= 0.0) => {
                rejected += 1;
                continue;
            }
            Err(e) => {
                return Err(Error::Parse {
                    line: lineno,
                    message: e.to_string(),
                })
            }
        };
        if !score.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: "non-finite confidence".into(),
            });
        }
        raw.push((frame, id, bbox, score));
    }

    // Stable sort keeps file order within each frame.
    raw.sort_by_key(|&(frame, ..)| frame);
    let mut records = Vec::with_capacity(raw.len());
    let mut current = 0u32;
    let mut index = 0usize;
    for (frame, id, bbox, score) in raw {
        if frame != current {
            current = frame;
            index = 0;
        }
        records.push(MotRecord {
            id,
            detection: Detection::new(frame, bbox, score, index)?,
        });
        index += 1;
    }
    Ok(MotFile { records, rejected })
}

/// Writes trajectories as a MOT results file, sorted by frame then id.
pub fn write_results<W: Write>(trajectories: &[Trajectory], mut out: W) -> Result<()> {
    let mut ids: Vec<u32> = trajectories.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate trajectory id".into()));
    }
    let mut rows: Vec<(u32, u32, &Detection)> = trajectories
        .iter()
        .flat_map(|t| t.detections.iter().map(move |d| (d.frame, t.id, d)))
        .collect();
    rows.sort_by_key(|&(frame, id, _)| (frame, id));
    for (frame, id, d) in rows {
        let b = &d.bbox;
        writeln!(
            out,
            "{frame},{id},{},{},{},{},{},-1,-1,-1",
            b.left(),
            b.top(),
            b.width(),
            b.height(),
            d.score
        )?;
    }
    Ok(())
}

pub fn results_to_string(trajectories: &[Trajectory]) -> Result<String> {
    let mut buf = Vec::new();
    write_results(trajectories, &mut buf)?;
    Ok(String::from_utf8(buf).expect("results are ASCII"))
}

/// One line of a pairwise score file: detection `a` (earlier) to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub frame_a: u32,
    pub index_a: usize,
    pub frame_b: u32,
    pub index_b: usize,
    pub values: Vec<f64>,
}

/// Parses `frame_a,index_a,frame_b,index_b,v1[,v2,...]` lines.
pub fn parse_score_file<R: BufRead>(reader: R) -> Result<Vec<ScoreRecord>> {
    let mut records: Vec<ScoreRecord> = Vec::new();
    for (lineno, line) in lines(reader) {
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least 5 fields, found {}", fields.len()),
            });
        }
        let int = |i: usize, name: &str| -> Result<i64> { parse_integral(fields[i], lineno, name) };
        let frame = |v: i64| -> Result<u32> {
            u32::try_from(v).ok().filter(|&f| f >= 1).ok_or(Error::Parse {
                line: lineno,
                message: format!("frame {v} out of range"),
            })
        };
        let index = |v: i64| -> Result<usize> {
            usize::try_from(v).map_err(|_| Error::Parse {
                line: lineno,
                message: format!("index {v} out of range"),
            })
        };
        let frame_a = frame(int(0, "frame_a")?)?;
        let index_a = index(int(1, "index_a")?)?;
        let frame_b = frame(int(2, "frame_b")?)?;
        let index_b = index(int(3, "index_b")?)?;
        if frame_a >= frame_b {
            return Err(Error::Parse {
                line: lineno,
                message: format!("frame_a {frame_a} must precede frame_b {frame_b}"),
            });
        }
        let values = fields[4..]
            .iter()
            .map(|f| {
                let v = parse_real(f, lineno, "value")?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line: lineno,
                        message: "non-finite value".into(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = records.first() {
            if first.values.len() != values.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!(
                        "arity mismatch: expected {} values, found {}",
                        first.values.len(),
                        values.len()
                    ),
                });
            }
        }
        records.push(ScoreRecord {
            frame_a,
            index_a,
            frame_b,
            index_b,
            values,
        });
    }
    Ok(records)
}

pub fn write_score_file<W: Write>(records: &[ScoreRecord], mut out: W) -> Result<()> {
    for r in records {
        write!(out, "{},{},{},{}", r.frame_a, r.index_a, r.frame_b, r.index_b)?;
        for v in &r.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `(frame, source_index)` of a detection.
type DetKey = (u32, usize);

/// Score records bound to a concrete detection list, keyed by
/// `(frame, source_index)` of both endpoints.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    dim: usize,
    values: HashMap<(DetKey, DetKey), Vec<f64>>,
}

impl ScoreTable {
    /// Binds records to detections; any reference to a detection that does
    /// not exist is an error.
    pub fn bind(records: Vec<ScoreRecord>, detections: &[Detection]) -> Result<Self> {
        let known: std::collections::HashSet<(u32, usize)> = detections.iter().map(Detection::key).collect();
        let dim = records.first().map_or(0, |r| r.values.len());
        let mut values = HashMap::with_capacity(records.len());
        for r in records {
            for (frame, index) in [(r.frame_a, r.index_a), (r.frame_b, r.index_b)] {
                if !known.contains(&(frame, index)) {
                    return Err(Error::DanglingDetection { frame, index });
                }
            }
            if r.values.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.values.len(),
                });
            }
            values.insert(((r.frame_a, r.index_a), (r.frame_b, r.index_b)), r.values);
        }
        Ok(Self { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, a: &Detection, b: &Detection) -> Option<&[f64]> {
        self.values.get(&(a.key(), b.key())).map(Vec::as_slice)
    }
}

const MODEL_MAGIC: &str = "gbm-v1";

/// Serializes a model in the versioned `gbm-v1` text format.
///
/// ```text
/// gbm-v1
/// trees <count>
/// learning_rate <real>
/// base_score <real>
/// features <count>
/// tree <index> <node count>
/// <node id> <feature|-1> <threshold> <left|-1> <right|-1> <leaf value>
/// ...
/// end
/// ```
pub fn write_model<W: Write>(model: &GbmModel, mut out: W) -> Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    writeln!(out, "trees {}", model.trees.len())?;
    writeln!(out, "learning_rate {}", model.learning_rate)?;
    writeln!(out, "base_score {}", model.base_score)?;
    writeln!(out, "features {}", model.feature_count)?;
    for (t, tree) in model.trees.iter().enumerate() {
        writeln!(out, "tree {t} {}", tree.nodes.len())?;
        for (id, node) in tree.nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(out, "{id} {feature} {threshold} {left} {right} 0")?,
                Node::Leaf { value } => writeln!(out, "{id} -1 0 -1 -1 {value}")?,
            }
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

pub fn model_to_string(model: &GbmModel) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("model text is ASCII")
}

/// Reads a model written by [`write_model`].
pub fn read_model<R: BufRead>(reader: R) -> Result<GbmModel> {
    let mut it = reader
        .lines()
        .map(|l| l.map(|s| s.trim_end_matches('\r').trim().to_string()))
        .filter(|l| !matches!(l, Ok(s) if s.is_empty()));
    let mut next = |what: &str| -> Result<String> {
        match it.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::ModelFormat(format!("truncated: expected {what}"))),
        }
    };
    let magic = next("version line")?;
    if magic != MODEL_MAGIC {
        return Err(Error::ModelFormat(format!(
            "unsupported version {magic:?}, expected {MODEL_MAGIC:?}"
        )));
    }
    fn header<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => v
                .parse()
                .map_err(|_| Error::ModelFormat(format!("bad value for {key}: {v:?}"))),
            _ => Err(Error::ModelFormat(format!("expected `{key} <value>`, got {line:?}"))),
        }
    }
    let n_trees: usize = header(&next("tree count")?, "trees")?;
    let learning_rate: f64 = header(&next("learning rate")?, "learning_rate")?;
    let base_score: f64 = header(&next("base score")?, "base_score")?;
    let feature_count: usize = header(&next("feature count")?, "features")?;

    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let line = next("tree header")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let n_nodes: usize = match parts.as_slice() {
            ["tree", idx, n] if idx.parse::<usize>().ok() == Some(t) => n
                .parse()
                .map_err(|_| Error::ModelFormat(format!("bad node count {n:?}")))?,
            _ => return Err(Error::ModelFormat(format!("expected `tree {t} <nodes>`, got {line:?}"))),
        };
        let mut nodes = Vec::with_capacity(n_nodes);
        for id in 0..n_nodes {
            let line = next("tree node")?;
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 6 || p[0].parse::<usize>().ok() != Some(id) {
                return Err(Error::ModelFormat(format!("tree {t}: bad node line {line:?}")));
            }
            let bad = |what: &str| Error::ModelFormat(format!("tree {t} node {id}: bad {what}"));
            let feature: i64 = p[1].parse().map_err(|_| bad("feature"))?;
            let threshold: f64 = p[2].parse().map_err(|_| bad("threshold"))?;
            let left: i64 = p[3].parse().map_err(|_| bad("left child"))?;
            let right: i64 = p[4].parse().map_err(|_| bad("right child"))?;
            let value: f64 = p[5].parse().map_err(|_| bad("leaf value"))?;
            nodes.push(if feature < 0 {
                Node::Leaf { value }
            } else {
                Node::Split {
                    feature: feature as usize,
                    threshold,
                    left: usize::try_from(left).map_err(|_| bad("left child"))?,
                    right: usize::try_from(right).map_err(|_| bad("right child"))?,
                }
            });
        }
        trees.push(RegressionTree::from_nodes(nodes)?);
    }
    let end = next("end marker")?;
    if end != "end" {
        return Err(Error::ModelFormat(format!("expected `end`, got {end:?}")));
    }
    GbmModel::new(base_score, learning_rate, feature_count, trees)
}

pub fn model_from_str(text: &str) -> Result<GbmModel> {
    read_model(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_detection_line() {
        let f = parse_mot_file("1,-1,10,20,30,60,0.9,-1,-1,-1\n".as_bytes(), MotKind::Detections).unwrap();
        assert_eq!(f.records.len(), 1);
        let d = f.records[0].detection;
        assert_eq!(d.frame, 1);
        assert_eq!(d.score, 0.9);
        assert_eq!(d.source_index, 0);
        assert_eq!(
            (d.bbox.left(), d.bbox.top(), d.bbox.width(), d.bbox.height()),
            (10.0, 20.0, 30.0, 60.0)
        );
        assert_eq!(f.records[0].id, -1);
    }

    #[test]
    fn empty_file_is_empty() {
        let f = parse_mot_file("".as_bytes(), MotKind::Detections).unwrap();
        assert!(f.records.is_empty());
        assert_eq!(f.rejected, 0);
    }

    #[test]
    fn non_positive_size_is_rejected_not_fatal() {
        let text = "1,-1,10,20,-5,60,0.9,-1,-1,-1\n1,-1,0,0,5,5,0.4,-1,-1,-1\n";
        let f = parse_mot_file(text.as_bytes(), MotKind::Detections).unwrap();
        assert_eq!(f.rejected, 1);
        assert_eq!(f.records.len(), 1);
        assert_eq!(f.records[0].detection.source_index, 0);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = "1,-1,10,20,5,60,0.9,-1,-1,-1\n\n2,-1,abc,20,5,60,0.9\n";
        match parse_mot_file(text.as_bytes(), MotKind::Detections) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_mot_file("1,2,3\n".as_bytes(), MotKind::Detections).is_err());
        assert!(parse_mot_file("0,-1,1,1,1,1,1\n".as_bytes(), MotKind::Detections).is_err());
    }

    #[test]
    fn sorts_by_frame_and_indexes_in_file_order() {
        let text = "2,-1,0,0,1,1,0.1\r\n1,-1,5,5,1,1,0.2\r\n2,-1,9,9,1,1,0.3\r\n";
        let f = parse_mot_file(text.as_bytes(), MotKind::Detections).unwrap();
        let keys: Vec<_> = f
            .records
            .iter()
            .map(|r| (r.detection.key(), r.detection.score))
            .collect();
        assert_eq!(keys, vec![((1, 0), 0.2), ((2, 0), 0.1), ((2, 1), 0.3)]);
    }

    #[test]
    fn results_interleave_by_frame() {
        let d = |f: u32, x: f64| Detection::new(f, BoundingBox::new(x, 0.0, 1.0, 1.0).unwrap(), 1.0, 0).unwrap();
        let t1 = Trajectory::new(2, vec![d(1, 0.0), d(2, 0.5)]).unwrap();
        let t2 = Trajectory::new(1, vec![d(1, 5.0), d(3, 6.0)]).unwrap();
        let text = results_to_string(&[t1, t2]).unwrap();
        let heads: Vec<&str> = text.lines().map(|l| &l[..3]).collect();
        assert_eq!(heads, vec!["1,1", "1,2", "2,2", "3,1"]);
        assert_eq!(text.lines().next().unwrap(), "1,1,5,0,1,1,1,-1,-1,-1");
    }

    #[test]
    fn duplicate_result_ids_rejected() {
        let d = Detection::new(1, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), 1.0, 0).unwrap();
        let t = Trajectory::new(1, vec![d]).unwrap();
        assert!(results_to_string(&[t.clone(), t]).is_err());
    }

    #[test]
    fn score_file_parsing() {
        let r = parse_score_file("1,0,2,0,0.87\n".as_bytes()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].values, vec![0.87]);
        let r = parse_score_file("1,0,2,0,0.1,0.2,0.3\n1,1,3,0,1,2,3\n".as_bytes()).unwrap();
        assert!(r.iter().all(|x| x.values.len() == 3));
        match parse_score_file("1,0,2,0,0.5\n1,0,3,0,0.5,0.5\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_score_file("2,0,2,1,0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn score_binding_detects_dangling_references() {
        let det = |f: u32, i: usize| Detection::new(f, BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), 1.0, i).unwrap();
        let dets = vec![det(1, 0), det(2, 0)];
        let recs = parse_score_file("1,0,2,0,0.87\n".as_bytes()).unwrap();
        let table = ScoreTable::bind(recs, &dets).unwrap();
        assert_eq!(table.get(&dets[0], &dets[1]), Some(&[0.87][..]));
        assert_eq!(table.get(&dets[1], &dets[0]), None);
        let recs = parse_score_file("1,0,2,5,0.87\n".as_bytes()).unwrap();
        assert!(matches!(
            ScoreTable::bind(recs, &dets),
            Err(Error::DanglingDetection { frame: 2, index: 5 })
        ));
    }

    #[test]
    fn model_header_errors() {
        assert!(model_from_str("gbm-v2\ntrees 0\n").is_err());
        assert!(model_from_str("gbm-v1\ntrees 1\nlearning_rate 0.1\nbase_score 0\nfeatures 1\n").is_err());
        assert!(model_from_str("gbm-v1\ntrees x\n").is_err());
        let m = model_from_str("gbm-v1\ntrees 0\nlearning_rate 0.1\nbase_score 0\nfeatures 2\nend\n").unwrap();
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap(), 0.5);
    }
}
