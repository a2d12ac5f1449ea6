//! `key=value` settings files and sweep grids.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Keys accepted in a settings file. They match the long flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "rewind",
    "seed",
    "gt-iou",
    "neg-ratio",
    "trees",
    "depth",
    "lr",
    "min-leaf",
    "subsample",
    "vdet",
    "vlink",
    "cinout",
    "maxgap",
    "tau",
    "iou",
    "grid",
];

/// Values from an optional settings file. Command-line flags win over file
/// values, which win over defaults.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Resolves a setting: explicit flag, then file, then default.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(text) => text
                .parse()
                .map_err(|_| CliError::Usage(format!("config value for {key}: cannot parse {text:?}"))),
            None => Ok(default),
        }
    }
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<f64>,
}

/// Parses `key=start:stop:step` or `key=value` items separated by commas.
pub fn parse_grid(text: &str) -> Result<Vec<GridAxis>, CliError> {
    let mut axes: Vec<GridAxis> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, range) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("grid item {item:?}: expected key=range")))?;
        let key = key.trim().to_string();
        if !["vdet", "cinout", "vlink"].contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "grid key {key:?} is not one of vdet, cinout, vlink"
            )));
        }
        if axes.iter().any(|a| a.key == key) {
            return Err(CliError::Usage(format!("grid key {key:?} given twice")));
        }
        let num = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("grid item {item:?}: bad number {s:?}")))
        };
        let parts: Vec<&str> = range.split(':').collect();
        let values = match parts.as_slice() {
            [v] => vec![num(v)?],
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if step <= 0.0 || stop < start {
                    return Err(CliError::Usage(format!("grid item {item:?}: empty range")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
            _ => return Err(CliError::Usage(format!("grid item {item:?}: expected start:stop:step"))),
        };
        axes.push(GridAxis { key, values });
    }
    if axes.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    Ok(axes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_precedence() {
        let s = Settings::parse("# comment\nvdet = 0.4\ntrees=10\n").unwrap();
        assert_eq!(s.pick(Some(0.7), "vdet", 0.5).unwrap(), 0.7);
        assert_eq!(s.pick(None, "vdet", 0.5).unwrap(), 0.4);
        assert_eq!(s.pick(None, "vlink", 0.35).unwrap(), 0.35);
        assert_eq!(s.pick::<usize>(None, "trees", 400).unwrap(), 10);
        assert!(Settings::parse("bogus=1").is_err());
        assert!(Settings::parse("novalue").is_err());
        assert!(Settings::parse("vdet=abc")
            .unwrap()
            .pick::<f64>(None, "vdet", 0.5)
            .is_err());
    }

    #[test]
    fn grid_ranges() {
        let g = parse_grid("vdet=0.3:0.7:0.1,cinout=0.2:2:0.2").unwrap();
        assert_eq!(g[0].values, vec![0.3, 0.4, 0.5, 0.6, 0.7]);
        assert_eq!(g[1].values.len(), 10);
        assert_eq!(*g[1].values.last().unwrap(), 2.0);
        assert_eq!(parse_grid("vdet=0.5").unwrap()[0].values, vec![0.5]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("foo=1").is_err());
        assert!(parse_grid("vdet=0.9:0.1:0.1").is_err());
        assert!(parse_grid("vdet=0.1,vdet=0.2").is_err());
    }
}
