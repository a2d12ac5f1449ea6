//! C ABI over the `flowtrack` crate.
//!
//! Every fallible function returns an [`FtStatus`]. On failure a message for
//! the calling thread is available from [`ft_last_error`]. Objects are opaque
//! handles created by `*_read`/`*_from_string`/`ft_track*` and released by
//! the matching `*_free`. Strings returned by the library must be released
//! with [`ft_string_free`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use flowtrack::clearmot::evaluate_with_threshold;
use flowtrack::flow::{self, CostConfig, ExternalScorer, GbmScorer, Lp2dScorer, PairScorer};
use flowtrack::gbm::GbmModel;
use flowtrack::mot_io::{self, MotKind, ScoreTable};
use flowtrack::{Detection, Error, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Parse = 3,
    ModelFormat = 4,
    DimensionMismatch = 5,
    InvalidInput = 6,
    Io = 7,
    Internal = 8,
}

/// A trained association model.
pub struct FtModel(GbmModel);

/// Tracking output.
pub struct FtTracks {
    trajectories: Vec<Trajectory>,
    total_cost: f64,
}

/// Tracker costs. `v_det` and `v_link` lie in (0, 1), `c_in_out` > 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtCostConfig {
    pub v_det: f64,
    pub v_link: f64,
    pub c_in_out: f64,
    pub max_link_gap: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FtEvalReport {
    pub mota: f64,
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

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::DanglingDetection { .. } => FtStatus::Parse,
            Error::ModelFormat(_) => FtStatus::ModelFormat,
            Error::DimensionMismatch { .. } => FtStatus::DimensionMismatch,
            Error::Config(_) => FtStatus::InvalidArgument,
            Error::Io(_) => FtStatus::Io,
            _ => FtStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            FtStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FtStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(FtStatus::Internal, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn ft_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn ft_cost_config_default() -> FtCostConfig {
    let d = CostConfig::default();
    FtCostConfig {
        v_det: d.v_det,
        v_link: d.v_link,
        c_in_out: d.c_in_out,
        max_link_gap: d.max_link_gap,
    }
}

#[no_mangle]
pub extern "C" fn ft_detection_cost(score: f64, v_det: f64) -> f64 {
    flow::detection_cost(score, v_det)
}

#[no_mangle]
pub extern "C" fn ft_link_cost(probability: f64, v_link: f64) -> f64 {
    flow::link_cost(probability, v_link)
}

/// Loads a `gbm-v1` model file.
#[no_mangle]
pub unsafe extern "C" fn ft_model_read(path: *const c_char, out: *mut *mut FtModel) -> FtStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let file = std::fs::File::open(Path::new(path)).map_err(|e| Failure::from(Error::Io(e)))?;
        let model = mot_io::read_model(std::io::BufReader::new(file))?;
        *out = Box::into_raw(Box::new(FtModel(model)));
        Ok(())
    })
}

/// Parses a model from `gbm-v1` text.
#[no_mangle]
pub unsafe extern "C" fn ft_model_from_string(model_text: *const c_char, out: *mut *mut FtModel) -> FtStatus {
    guard(|| {
        let s = text(model_text, "model_text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(FtModel(mot_io::model_from_str(s)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ft_model_free(model: *mut FtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of input features the model expects, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ft_model_feature_count(model: *const FtModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.feature_count)
}

/// Match probability for one feature vector of length `len`.
#[no_mangle]
pub unsafe extern "C" fn ft_model_predict(
    model: *const FtModel,
    features: *const f64,
    len: usize,
    out: *mut f64,
) -> FtStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x = if len == 0 {
            &[][..]
        } else if features.is_null() {
            return Err(null("features"));
        } else {
            std::slice::from_raw_parts(features, len)
        };
        *out = model.0.predict(x)?;
        Ok(())
    })
}

unsafe fn cost_config(cfg: *const FtCostConfig) -> Result<CostConfig, Failure> {
    let c = cfg.as_ref().copied().unwrap_or_else(|| ft_cost_config_default());
    let cfg = CostConfig {
        v_det: c.v_det,
        v_link: c.v_link,
        c_in_out: c.c_in_out,
        max_link_gap: c.max_link_gap,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn detections(mot: &str) -> Result<Vec<Detection>, Failure> {
    Ok(mot_io::parse_mot_file(mot.as_bytes(), MotKind::Detections)?.detections())
}

fn scores(table: &str, dets: &[Detection]) -> Result<ScoreTable, Failure> {
    Ok(ScoreTable::bind(mot_io::parse_score_file(table.as_bytes())?, dets)?)
}

unsafe fn run_tracker(
    dets: &[Detection],
    scorer: &dyn PairScorer,
    cfg: &CostConfig,
    out: *mut *mut FtTracks,
) -> Result<(), Failure> {
    let result = flow::track_sequence(dets, scorer, cfg)?;
    *out = Box::into_raw(Box::new(FtTracks {
        trajectories: result.trajectories,
        total_cost: result.total_cost,
    }));
    Ok(())
}

/// Tracks MOT detection text.
///
/// With `model` set, pair probabilities come from the model and `score_text`
/// optionally supplies its external features. Without a model, `score_text`
/// is required and holds one probability per pair. `cfg` may be null for the
/// defaults.
#[no_mangle]
pub unsafe extern "C" fn ft_track(
    detections_mot: *const c_char,
    score_text: *const c_char,
    model: *const FtModel,
    cfg: *const FtCostConfig,
    out: *mut *mut FtTracks,
) -> FtStatus {
    guard(|| {
        let dets = detections(text(detections_mot, "detections_mot")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = cost_config(cfg)?;
        let table = if score_text.is_null() {
            None
        } else {
            Some(scores(text(score_text, "score_text")?, &dets)?)
        };
        match (model.as_ref(), &table) {
            (Some(m), t) => run_tracker(&dets, &GbmScorer::new(&m.0, t.as_ref())?, &cfg, out),
            (None, Some(t)) => run_tracker(&dets, &ExternalScorer::new(t)?, &cfg, out),
            (None, None) => Err(Failure(
                FtStatus::NullArgument,
                "either model or score_text is required".into(),
            )),
        }
    })
}

/// Tracks with the distance-only baseline scorer of scale `tau` pixels.
#[no_mangle]
pub unsafe extern "C" fn ft_track_lp2d(
    detections_mot: *const c_char,
    tau: f64,
    cfg: *const FtCostConfig,
    out: *mut *mut FtTracks,
) -> FtStatus {
    guard(|| {
        let dets = detections(text(detections_mot, "detections_mot")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = cost_config(cfg)?;
        run_tracker(&dets, &Lp2dScorer::new(tau)?, &cfg, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ft_tracks_free(tracks: *mut FtTracks) {
    if !tracks.is_null() {
        drop(Box::from_raw(tracks));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ft_tracks_count(tracks: *const FtTracks) -> usize {
    tracks.as_ref().map_or(0, |t| t.trajectories.len())
}

#[no_mangle]
pub unsafe extern "C" fn ft_tracks_total_cost(tracks: *const FtTracks) -> f64 {
    tracks.as_ref().map_or(0.0, |t| t.total_cost)
}

/// Renders the trajectories as a MOT results file. Free with
/// [`ft_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ft_tracks_to_mot(tracks: *const FtTracks, out: *mut *mut c_char) -> FtStatus {
    guard(|| {
        let tracks = tracks.as_ref().ok_or_else(|| null("tracks"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(mot_io::results_to_string(&tracks.trajectories)?)?;
        Ok(())
    })
}

/// CLEAR MOT evaluation of MOT results text against ground truth text.
#[no_mangle]
pub unsafe extern "C" fn ft_evaluate(
    gt_mot: *const c_char,
    results_mot: *const c_char,
    iou_threshold: f64,
    out: *mut FtEvalReport,
) -> FtStatus {
    guard(|| {
        let gt = mot_io::parse_mot_file(text(gt_mot, "gt_mot")?.as_bytes(), MotKind::GroundTruth)?.trajectories()?;
        let res =
            mot_io::parse_mot_file(text(results_mot, "results_mot")?.as_bytes(), MotKind::Results)?.trajectories()?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(Failure(
                FtStatus::InvalidArgument,
                format!("iou_threshold must lie in (0, 1], got {iou_threshold}"),
            ));
        }
        let r = evaluate_with_threshold(&gt, &res, iou_threshold)?;
        *out = FtEvalReport {
            mota: r.mota,
            motp: r.motp,
            mostly_tracked: r.mostly_tracked,
            mostly_lost: r.mostly_lost,
            gt_tracks: r.gt_tracks,
            id_switches: r.id_switches,
            false_positives: r.false_positives,
            misses: r.misses,
            matches: r.matches,
            gt_count: r.gt_count,
        };
        Ok(())
    })
}
