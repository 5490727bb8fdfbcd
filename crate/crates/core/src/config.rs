//! Render job configuration: flat `key = value` text, one key per line, `#` comments.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use crate::colorize::{resolve_palette, ColorScheme};
use crate::expr::{parse_complex, parse_expr};
use crate::lattice::{LatticeError, UnimodularMatrix};
use crate::orbit::solve_periodic_orbit;
use crate::render::{RenderJob, Viewport};

pub const KEYS: &[&str] = &[
    "B",
    "expression",
    "frames",
    "seconds",
    "center",
    "width",
    "resolution",
    "supersample",
    "palette",
    "contour_strength",
    "contours_per_decade",
    "hue_offset",
    "zero_darkening",
    "gif",
    "output_dir",
    "threads",
];

const MAX_SUPERSAMPLE: u32 = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("B: {0}")]
    Matrix(#[from] LatticeError),
}

impl ConfigError {
    /// True when the mathematical input (the matrix `B`) is at fault rather than the document.
    pub fn is_math(&self) -> bool {
        matches!(self, ConfigError::Matrix(_))
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub b: [i64; 4],
    pub expression: String,
    pub frames: u32,
    pub seconds: f64,
    pub center: Complex64,
    pub width: f64,
    pub resolution: (u32, u32),
    pub supersample: u32,
    /// Builtin palette name or palette file path.
    pub palette: String,
    pub contour_strength: f64,
    pub contours_per_decade: f64,
    pub hue_offset: f64,
    pub zero_darkening: f64,
    pub gif: bool,
    pub output_dir: PathBuf,
    /// Worker count; 0 uses every core.
    pub threads: usize,
}

impl Default for JobConfig {
    fn default() -> Self {
        let scheme = ColorScheme::default();
        JobConfig {
            b: [2, 1, 1, 1],
            expression: "P".into(),
            frames: 50,
            seconds: 2.0,
            center: Complex64::default(),
            width: 3.0,
            resolution: (256, 256),
            supersample: 1,
            palette: "cyclic-rainbow".into(),
            contour_strength: scheme.contour_strength,
            contours_per_decade: scheme.contours_per_decade,
            hue_offset: scheme.hue_offset,
            zero_darkening: scheme.zero_darkening,
            gif: true,
            output_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(key, format!("'{v}' is not a valid number")))
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_num(key, v)?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str, seps: &[char]) -> Result<Vec<T>, ConfigError> {
    v.split(|c: char| seps.contains(&c)).map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_num(key, s)).collect()
}

impl JobConfig {
    /// Parses a config document on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = JobConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected 'key = value', found '{content}'"),
                });
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(invalid(assignment, "override must look like key=value"));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(invalid(key, "unknown key"));
        }
        self.set(key, value.trim())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "B" => {
                let entries: Vec<i64> = parse_list(key, v, &[','])?;
                self.b = entries
                    .try_into()
                    .map_err(|e: Vec<i64>| invalid(key, format!("expected 4 integers, found {}", e.len())))?;
            }
            "expression" => self.expression = v.to_string(),
            "frames" => self.frames = parse_num(key, v)?,
            "seconds" => self.seconds = parse_real(key, v)?,
            "center" => self.center = parse_complex(v).map_err(|e| invalid(key, e.to_string()))?,
            "width" => self.width = parse_real(key, v)?,
            "resolution" => {
                let dims: Vec<u32> = parse_list(key, v, &[',', 'x', 'X'])?;
                match dims.as_slice() {
                    [w, h] => self.resolution = (*w, *h),
                    _ => return Err(invalid(key, "expected WIDTHxHEIGHT")),
                }
            }
            "supersample" => self.supersample = parse_num(key, v)?,
            "palette" => self.palette = v.to_string(),
            "contour_strength" => self.contour_strength = parse_real(key, v)?,
            "contours_per_decade" => self.contours_per_decade = parse_real(key, v)?,
            "hue_offset" => self.hue_offset = parse_real(key, v)?,
            "zero_darkening" => self.zero_darkening = parse_real(key, v)?,
            "gif" => {
                self.gif = match v {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(invalid(key, format!("'{v}' is not a boolean"))),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(v),
            "threads" => self.threads = parse_num(key, v)?,
            _ => unreachable!("key list checked by callers"),
        }
        Ok(())
    }

    pub fn scheme(&self) -> ColorScheme {
        ColorScheme {
            contour_strength: self.contour_strength,
            contours_per_decade: self.contours_per_decade,
            hue_offset: self.hue_offset,
            zero_darkening: self.zero_darkening,
            ..ColorScheme::default()
        }
    }

    pub fn matrix(&self) -> Result<UnimodularMatrix, ConfigError> {
        let [a, b, c, d] = self.b;
        Ok(UnimodularMatrix::new(a, b, c, d)?)
    }

    /// Checks every value and assembles the render job.
    pub fn to_job(&self) -> Result<RenderJob, ConfigError> {
        if self.frames < 2 {
            return Err(invalid("frames", format!("{} given, at least 2 required", self.frames)));
        }
        if self.seconds <= 0.0 {
            return Err(invalid("seconds", "must be positive"));
        }
        if self.width <= 0.0 {
            return Err(invalid("width", "must be positive"));
        }
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(invalid("resolution", "must be positive"));
        }
        if !(1..=MAX_SUPERSAMPLE).contains(&self.supersample) {
            return Err(invalid("supersample", format!("must be between 1 and {MAX_SUPERSAMPLE}")));
        }
        let scheme = self.scheme();
        scheme.validate().map_err(|e| invalid("scheme", e.to_string()))?;
        let expr = parse_expr(&self.expression).map_err(|e| invalid("expression", e.to_string()))?;
        let palette = resolve_palette(&self.palette).map_err(|e| invalid("palette", e.to_string()))?;
        let orbit = solve_periodic_orbit(self.matrix()?)?;
        let viewport = Viewport {
            center: self.center,
            width: self.width,
            pixels_x: self.resolution.0,
            pixels_y: self.resolution.1,
            supersample: self.supersample,
        };
        Ok(RenderJob {
            orbit,
            expr,
            viewport,
            palette,
            scheme,
            frames: self.frames,
            seconds: self.seconds,
            output_dir: self.output_dir.clone(),
            gif: self.gif,
        })
    }

    /// `(key, value)` pairs in canonical order, as they would be written in a config file.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let [a, b, c, d] = self.b;
        let center = {
            let sign = if self.center.im.is_sign_negative() { '-' } else { '+' };
            format!("{}{}{}i", self.center.re, sign, self.center.im.abs())
        };
        vec![
            ("B", format!("{a},{b},{c},{d}")),
            ("expression", self.expression.clone()),
            ("frames", self.frames.to_string()),
            ("seconds", self.seconds.to_string()),
            ("center", center),
            ("width", self.width.to_string()),
            ("resolution", format!("{}x{}", self.resolution.0, self.resolution.1)),
            ("supersample", self.supersample.to_string()),
            ("palette", self.palette.clone()),
            ("contour_strength", self.contour_strength.to_string()),
            ("contours_per_decade", self.contours_per_decade.to_string()),
            ("hue_offset", self.hue_offset.to_string()),
            ("zero_darkening", self.zero_darkening.to_string()),
            ("gif", self.gif.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("threads", self.threads.to_string()),
        ]
    }
}

impl fmt::Display for JobConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
