use crate::error::{Error, Result};

/// Tracker cost parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CostConfig {
    /// Normalized detector score at which the detection cost crosses zero.
    pub v_det: f64,
    /// Match probability at which the link cost crosses zero.
    pub v_link: f64,
    /// Shared entry and exit cost.
    pub c_in_out: f64,
    /// Largest frame gap a link edge may bridge.
    pub max_link_gap: u32,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            v_det: 0.5,
            v_link: 0.35,
            c_in_out: 1.0,
            max_link_gap: 15,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_det", self.v_det), ("v_link", self.v_link)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!(
                    "{name} must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        if !(self.c_in_out > 0.0 && self.c_in_out.is_finite()) {
            return Err(Error::Config(format!(
                "c_in_out must be positive, got {}",
                self.c_in_out
            )));
        }
        if self.max_link_gap < 1 {
            return Err(Error::Config("max_link_gap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Min-max normalizes raw detector scores over a sequence; if every score
/// is equal they all map to 0.5.
pub fn normalize_scores(raw: &[f64]) -> Vec<f64> {
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
        (lo.min(s), hi.max(s))
    });
    if raw.is_empty() || hi <= lo {
        return vec![0.5; raw.len()];
    }
    raw.iter().map(|&s| ((s - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
}

/// Maps a confidence in `[0, 1]` to a signed cost: +1 at 0, 0 at the
/// threshold, -1 at 1, linear on each side.
pub fn piecewise_cost(s: f64, threshold: f64) -> f64 {
    if s < threshold {
        -s / threshold + 1.0
    } else {
        (-s + 1.0) / (1.0 - threshold) - 1.0
    }
}

pub fn detection_cost(s: f64, v_det: f64) -> f64 {
    piecewise_cost(s, v_det)
}

pub fn link_cost(p: f64, v_link: f64) -> f64 {
    piecewise_cost(p, v_link)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize_scores(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_scores(&[7.0]), vec![0.5]);
        assert_eq!(normalize_scores(&[3.0, 3.0]), vec![0.5, 0.5]);
        assert_eq!(normalize_scores(&[0.0, 0.3, 1.0]), vec![0.0, 0.3, 1.0]);
        assert!(normalize_scores(&[]).is_empty());
    }

    #[test]
    fn detection_cost_values() {
        assert_eq!(detection_cost(0.0, 0.5), 1.0);
        assert_eq!(detection_cost(1.0, 0.5), -1.0);
        assert_eq!(detection_cost(0.25, 0.5), 0.5);
        assert_eq!(detection_cost(0.5, 0.5), 0.0);
    }

    #[test]
    fn link_cost_values() {
        assert_eq!(link_cost(0.35, 0.35), 0.0);
        assert_eq!(link_cost(1.0, 0.35), -1.0);
        assert_eq!(link_cost(0.0, 0.35), 1.0);
        assert!((link_cost(0.675, 0.35) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(CostConfig::default().validate().is_ok());
        let bad = CostConfig {
            v_link: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CostConfig {
            v_det: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CostConfig {
            c_in_out: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
