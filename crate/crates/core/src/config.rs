//! Job configuration: flat `key=value` files and overrides, value parsers,
//! and the scan record and raster formats.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{ClassificationTag, ScanCell, Window};

pub const MIN_RESOLUTION: usize = 64;
pub const MAX_DEPTH: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error("bad scan record: {0}")]
    Record(String),
}

/// Parses a flat configuration: one `key=value` per line, `#` comments and
/// blank lines ignored, surrounding whitespace trimmed.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = parse_pair(line).ok_or(ConfigError::Syntax { line: i + 1 })?;
        if out.insert(key.clone(), value).is_some() {
            return Err(ConfigError::Duplicate { line: i + 1, key });
        }
    }
    Ok(out)
}

/// Splits `key=value`; the key must be a non-empty identifier.
pub fn parse_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    let ok = !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    ok.then(|| (k.to_ascii_lowercase().replace('-', "_"), v.trim().to_string()))
}

/// Complex literals such as `2`, `-0.5i`, `2+0.1i`, `-1e-3-2i` or `inf`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let num = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok().filter(|x| x.is_finite()),
        }
    };
    let out = if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // Split at the last sign that is neither leading nor part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match split {
            Some(i) => Complex64::new(body[..i].parse::<f64>().ok().filter(|x| x.is_finite())?, num(&body[i..])?),
            None => Complex64::new(0.0, num(body)?),
        }
    } else {
        Complex64::new(s.parse::<f64>().ok().filter(|x| x.is_finite())?, 0.0)
    };
    Some(out)
}

/// `[re0,re1]x[im0,im1]` (`×` also accepted).
pub fn parse_window(s: &str) -> Option<Window> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (a, b) = s.split_once('x').or_else(|| s.split_once('×'))?;
    let range = |t: &str| -> Option<[f64; 2]> {
        let t = t.strip_prefix('[')?.strip_suffix(']')?;
        let (lo, hi) = t.split_once(',')?;
        Some([lo.replace('−', "-").parse().ok()?, hi.replace('−', "-").parse().ok()?])
    };
    Window::new(range(a)?, range(b)?).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Rational { p: u64, q: u64 },
    Real(f64),
}

impl Angle {
    pub fn value(&self) -> f64 {
        match *self {
            Angle::Rational { p, q } => p as f64 / q as f64,
            Angle::Real(x) => x,
        }
    }
}

/// `p/q` or a decimal in `[0, 1)`.
pub fn parse_angle(s: &str) -> Option<Angle> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (p.trim().parse::<u64>().ok()?, q.trim().parse::<u64>().ok()?);
        return (q > 0 && p < q).then_some(Angle::Rational { p, q });
    }
    let x = s.parse::<f64>().ok()?;
    (x.is_finite() && (0.0..1.0).contains(&x)).then_some(Angle::Real(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scan,
    Classify,
    Center,
    Cuts,
    Ray,
    ReglueDemo,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "scan" => Command::Scan,
            "classify" => Command::Classify,
            "center" => Command::Center,
            "cuts" => Command::Cuts,
            "ray" => Command::Ray,
            "reglue-demo" | "reglue_demo" => Command::ReglueDemo,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaChoice {
    /// A straight segment from the critical value.
    Segment,
    /// The closure of an internal ray landing at the critical value.
    Ray,
}

/// A validated job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: Command,
    pub k: u32,
    pub parameter: Option<Complex64>,
    pub window: Option<Window>,
    pub resolution: usize,
    pub basin_resolution: usize,
    pub depth: usize,
    pub angle: Option<Angle>,
    pub tolerance: f64,
    /// Iteration budget; the default depends on the command.
    pub max_iter: Option<usize>,
    pub landing: Option<usize>,
    pub beta: BetaChoice,
    pub beta_end: Option<Complex64>,
    /// Trace the ray in a component touching the critical value instead of
    /// the basin of the marked cycle.
    pub boundary: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
    /// Stop a scan after this many new cells (the rest is left for a resume).
    pub limit: Option<usize>,
}

impl JobConfig {
    pub fn defaults(command: Command) -> Self {
        JobConfig {
            command,
            k: 1,
            parameter: None,
            window: None,
            resolution: 128,
            basin_resolution: 128,
            depth: 3,
            angle: None,
            tolerance: 1e-12,
            max_iter: None,
            landing: None,
            beta: BetaChoice::Segment,
            beta_end: None,
            boundary: false,
            out: PathBuf::from("."),
            seed: 0,
            samples: 1000,
            limit: None,
        }
    }

    /// Applies `pairs` in order (later ones win) over the defaults and validates.
    pub fn from_pairs<'a>(
        command: Command,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(command);
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::InvalidValue { key: key.to_string(), value: value.to_string() };
        let int = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "command" => {
                if Command::parse(value) != Some(self.command) {
                    return Err(bad());
                }
            }
            "k" => self.k = value.parse().map_err(|_| bad())?,
            "a" | "c" | "parameter" => self.parameter = Some(parse_complex(value).ok_or_else(bad)?),
            "window" => self.window = Some(parse_window(value).ok_or_else(bad)?),
            "res" | "resolution" => self.resolution = int()?,
            "basin_res" | "basin_resolution" => self.basin_resolution = int()?,
            "depth" => self.depth = int()?,
            "angle" => self.angle = Some(parse_angle(value).ok_or_else(bad)?),
            "tol" | "tolerance" => self.tolerance = value.parse().map_err(|_| bad())?,
            "max_iter" => self.max_iter = Some(int()?),
            "landing" => self.landing = Some(int()?),
            "beta" => {
                self.beta = match value {
                    "segment" => BetaChoice::Segment,
                    "ray" => BetaChoice::Ray,
                    _ => return Err(bad()),
                }
            }
            "beta_end" => self.beta_end = Some(parse_complex(value).ok_or_else(bad)?),
            "boundary" => self.boundary = value.parse().map_err(|_| bad())?,
            "out" => {
                if value.is_empty() {
                    return Err(bad());
                }
                self.out = PathBuf::from(value)
            }
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "samples" => self.samples = int()?,
            "limit" => self.limit = Some(int()?),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(self.k == 1 || self.k == 2) {
            return invalid(format!("family k={} is not implemented (use 1 or 2)", self.k));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return invalid(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.resolution < MIN_RESOLUTION || self.basin_resolution < MIN_RESOLUTION {
            return invalid(format!("resolution must be at least {MIN_RESOLUTION}"));
        }
        if self.resolution > 1 << 14 || self.basin_resolution > 1 << 14 {
            return invalid("resolution is capped at 16384".into());
        }
        if self.depth > MAX_DEPTH {
            return invalid(format!("depth must be at most {MAX_DEPTH}, got {}", self.depth));
        }
        if self.max_iter == Some(0) {
            return invalid("max_iter must be positive".into());
        }
        if self.k == 2 && self.parameter == Some(Complex64::new(0.0, 0.0)) {
            return invalid("a = 0 is not a degree-2 map".into());
        }
        match self.command {
            Command::Classify | Command::Cuts | Command::Ray if self.parameter.is_none() => {
                Err(ConfigError::Missing("parameter (a= or c=)"))
            }
            Command::Center if self.angle.is_none() && self.landing.is_none() => {
                Err(ConfigError::Missing("angle= or landing="))
            }
            Command::Center if self.angle.is_some() && self.k != 1 => {
                invalid("spider centers are only available for k=1".into())
            }
            Command::Center if self.angle.is_none() && self.parameter.is_none() => Err(ConfigError::Missing("guess (a= or c=)")),
            Command::Ray if self.angle.is_none() => Err(ConfigError::Missing("angle")),
            Command::Center if matches!(self.angle, Some(Angle::Real(_))) => {
                invalid("spider angles must be rational p/q".into())
            }
            _ => Ok(()),
        }
    }

    /// The scan window, defaulting to a view of the whole slice.
    pub fn scan_window(&self) -> Window {
        self.window.unwrap_or(match self.k {
            1 => Window { re: [-2.2, 0.8], im: [-1.3, 1.3] },
            _ => Window { re: [-3.0, 5.0], im: [-4.0, 4.0] },
        })
    }
}

/// Parses one line of a scan record file.
pub fn parse_scan_line(line: &str) -> Result<ScanCell, ConfigError> {
    let cell: ScanCell = serde_json::from_str(line).map_err(|e| ConfigError::Record(e.to_string()))?;
    if !(cell.parameter.re.is_finite() && cell.parameter.im.is_finite()) {
        return Err(ConfigError::Record("non-finite parameter".into()));
    }
    Ok(cell)
}

/// Serializes a scan cell as one line (without the newline).
pub fn scan_line(cell: &ScanCell) -> String {
    serde_json::to_string(cell).expect("scan cells serialize")
}

pub fn tag_color(tag: ClassificationTag) -> [u8; 3] {
    match tag {
        ClassificationTag::PeriodicCritical => [255, 255, 255],
        ClassificationTag::Immediate => [40, 90, 200],
        ClassificationTag::Capture => [230, 160, 30],
        ClassificationTag::OtherAttractor => [60, 170, 80],
        ClassificationTag::Unresolved => [0, 0, 0],
    }
}

/// Binary PPM (P6) of a complete scan, cells in index order.
pub fn scan_ppm(cells: &[ScanCell], resolution: usize) -> Vec<u8> {
    let mut out = format!("P6\n{resolution} {resolution}\n255\n").into_bytes();
    let mut pixels = vec![0u8; 3 * resolution * resolution];
    for cell in cells {
        if cell.index < resolution * resolution {
            pixels[3 * cell.index..3 * cell.index + 3].copy_from_slice(&tag_color(cell.tag));
        }
    }
    out.extend(pixels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2+0.1i"), Some(c(2., 0.1)));
        assert_eq!(parse_complex("-1"), Some(c(-1., 0.)));
        assert_eq!(parse_complex("-i"), Some(c(0., -1.)));
        assert_eq!(parse_complex("0.5i"), Some(c(0., 0.5)));
        assert_eq!(parse_complex("-1e-3-2i"), Some(c(-1e-3, -2.)));
        assert_eq!(parse_complex("1e+2+1e-2i"), Some(c(100., 0.01)));
        assert_eq!(parse_complex("-0.122561 + 0.744862i"), Some(c(-0.122561, 0.744862)));
        for bad in ["", "i+", "2+", "nan", "1+infi", "abc", "1..2"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn windows_and_angles() {
        let w = parse_window("[-2.2,0.8]x[-1.3,1.3]").unwrap();
        assert_eq!((w.re, w.im), ([-2.2, 0.8], [-1.3, 1.3]));
        assert!(parse_window("[−2.2,0.8]×[−1.3,1.3]").is_some());
        assert!(parse_window("[1,0]x[0,1]").is_none());
        assert_eq!(parse_angle("1/7"), Some(Angle::Rational { p: 1, q: 7 }));
        assert_eq!(parse_angle("0.25"), Some(Angle::Real(0.25)));
        assert!(parse_angle("7/7").is_none() && parse_angle("1.5").is_none());
    }

    #[test]
    fn config_file_and_overrides() {
        let pairs = parse_config("# scan job\nk = 2\nres=64\n\nwindow=[0,1]x[0,1] # unit square\n").unwrap();
        let mut all: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        all.push(("res", "80"));
        let cfg = JobConfig::from_pairs(Command::Scan, all).unwrap();
        assert_eq!((cfg.k, cfg.resolution), (2, 80));
        assert!(matches!(parse_config("k=1\nk=2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(parse_config("novalue"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn validation() {
        let check = |pairs: &[(&str, &str)]| JobConfig::from_pairs(Command::Cuts, pairs.iter().copied());
        assert!(check(&[("a", "2")]).is_ok());
        assert!(matches!(check(&[("a", "2"), ("tol", "0")]), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(&[("a", "2"), ("res", "32")]), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(&[("a", "2"), ("depth", "13")]), Err(ConfigError::Invalid(_))));
        assert!(matches!(check(&[("depth", "2")]), Err(ConfigError::Missing(_))));
        assert!(matches!(check(&[("a", "2"), ("colour", "red")]), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(check(&[("a", "2"), ("k", "3")]), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn ppm_header() {
        let ppm = scan_ppm(&[], 64);
        assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
        assert_eq!(ppm.len(), 13 + 3 * 64 * 64);
    }
}
