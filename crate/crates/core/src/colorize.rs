//! Domain coloring: argument to hue through a cyclic palette, modulus to
//! optional contour shading.
//!
//! Palette files are UTF-8 text. Blank lines and `#` comments are ignored, an
//! optional `name = <text>` line names the palette, and every other line holds
//! one RGB sample as three reals in `[0, 1]` separated by spaces or commas.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ext::ExtComplex;

pub type Rgb = [f64; 3];

/// Fewest samples a palette may have.
pub const MIN_SAMPLES: usize = 8;

const BUILTIN: &[(&str, &str)] = &[
    ("cyclic-rainbow", include_str!("../palettes/cyclic-rainbow.pal")),
    ("twilight", include_str!("../palettes/twilight.pal")),
];

#[derive(Debug, Error)]
pub enum PaletteError {
    #[error("palette format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("palette has {found} samples, at least {MIN_SAMPLES} required")]
    TooFewSamples { found: usize },
    #[error("cannot read palette {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown palette '{0}'")]
    UnknownPalette(String),
    #[error("invalid color scheme: {0}")]
    InvalidScheme(String),
}

/// A cyclic color ramp.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub name: String,
    samples: Vec<Rgb>,
}

impl Palette {
    pub fn new(name: impl Into<String>, samples: Vec<Rgb>) -> Result<Self, PaletteError> {
        if samples.len() < MIN_SAMPLES {
            return Err(PaletteError::TooFewSamples { found: samples.len() });
        }
        if let Some(i) = samples.iter().position(|s| s.iter().any(|c| !(0.0..=1.0).contains(c))) {
            return Err(PaletteError::Format { line: i + 1, message: "channel outside [0, 1]".into() });
        }
        Ok(Palette { name: name.into(), samples })
    }

    pub fn samples(&self) -> &[Rgb] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Parses palette text; `default_name` is used when the text has no `name =` line.
pub fn parse_palette(text: &str, default_name: &str) -> Result<Palette, PaletteError> {
    let mut name = default_name.to_string();
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() != "name" {
                return Err(PaletteError::Format { line: line_no, message: format!("unknown key '{}'", key.trim()) });
            }
            name = value.trim().to_string();
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 3 {
            return Err(PaletteError::Format {
                line: line_no,
                message: format!("expected 3 channels, found {}", fields.len()),
            });
        }
        let mut rgb = [0.0; 3];
        for (slot, field) in rgb.iter_mut().zip(&fields) {
            let v: f64 = field
                .parse()
                .map_err(|_| PaletteError::Format { line: line_no, message: format!("'{field}' is not a number") })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(PaletteError::Format { line: line_no, message: format!("channel {v} outside [0, 1]") });
            }
            *slot = v;
        }
        samples.push(rgb);
    }
    Palette::new(name, samples)
}

/// Reads a palette file.
pub fn load_palette(path: &Path) -> Result<Palette, PaletteError> {
    let text = std::fs::read_to_string(path).map_err(|source| PaletteError::Io { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("palette");
    parse_palette(&text, stem)
}

/// Names of the embedded palettes.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

/// One of the embedded palettes by name.
pub fn builtin_palette(name: &str) -> Result<Palette, PaletteError> {
    let (_, text) =
        BUILTIN.iter().find(|(n, _)| *n == name).ok_or_else(|| PaletteError::UnknownPalette(name.to_string()))?;
    parse_palette(text, name)
}

/// A builtin name, or else a path to a palette file.
pub fn resolve_palette(spec: &str) -> Result<Palette, PaletteError> {
    if builtin_names().contains(&spec) {
        return builtin_palette(spec);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(PaletteError::UnknownPalette(spec.to_string()));
    }
    load_palette(path)
}

/// Palette files (`*.pal`) in `dir`, sorted by name; missing directories yield nothing.
pub fn discover_palettes(dir: &Path) -> Vec<PathBuf> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut found: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pal"))
        .collect();
    found.sort();
    found
}

fn wrap_unit(u: f64) -> f64 {
    let w = u - u.floor();
    if w >= 1.0 || !w.is_finite() {
        0.0
    } else {
        w
    }
}

/// Cyclic linear interpolation; `u = k / len` returns `samples[k]` exactly.
pub fn sample_palette(p: &Palette, u: f64) -> Rgb {
    let n = p.samples.len();
    let x = wrap_unit(u) * n as f64;
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        return p.samples[nearest as usize % n];
    }
    let k = x.floor();
    let f = x - k;
    let a = p.samples[k as usize % n];
    let b = p.samples[(k as usize + 1) % n];
    [a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f]
}

/// Shading parameters layered on top of the palette.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorScheme {
    /// Depth of the modulus contours in `[0, 1]`; 0 disables them.
    pub contour_strength: f64,
    pub contours_per_decade: f64,
    pub pole_color: Rgb,
    /// How much exact zeros are darkened, in `[0, 1]`.
    pub zero_darkening: f64,
    /// Rotation of the hue wheel in `[0, 1)`.
    pub hue_offset: f64,
}

impl Default for ColorScheme {
    fn default() -> Self {
        ColorScheme {
            contour_strength: 0.0,
            contours_per_decade: 1.0,
            pole_color: [1.0, 1.0, 1.0],
            zero_darkening: 1.0,
            hue_offset: 0.0,
        }
    }
}

impl ColorScheme {
    pub fn validate(&self) -> Result<(), PaletteError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.contour_strength) {
            return Err(PaletteError::InvalidScheme(format!(
                "contour_strength {} outside [0, 1]",
                self.contour_strength
            )));
        }
        if !(self.contours_per_decade > 0.0 && self.contours_per_decade.is_finite()) {
            return Err(PaletteError::InvalidScheme(format!(
                "contours_per_decade {} must be positive",
                self.contours_per_decade
            )));
        }
        if !unit(self.zero_darkening) {
            return Err(PaletteError::InvalidScheme(format!("zero_darkening {} outside [0, 1]", self.zero_darkening)));
        }
        if !(0.0..1.0).contains(&self.hue_offset) {
            return Err(PaletteError::InvalidScheme(format!("hue_offset {} outside [0, 1)", self.hue_offset)));
        }
        if !self.pole_color.iter().all(|&c| unit(c)) {
            return Err(PaletteError::InvalidScheme("pole color outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Palette position of a finite value: `arg(w) / 2 pi + hue_offset`, wrapped into `[0, 1)`.
pub fn hue_index(w: num_complex::Complex64, s: &ColorScheme) -> f64 {
    wrap_unit(w.arg() / (2.0 * PI) + s.hue_offset)
}

/// `log10 |w|` without overflow for huge finite components.
fn log10_modulus(w: num_complex::Complex64) -> f64 {
    let m = w.re.abs().max(w.im.abs());
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    m.log10() + (w / m).norm().log10()
}

/// Brightness multiplier from the contour shading; 1 when contours are off.
pub fn luminance_factor(w: num_complex::Complex64, s: &ColorScheme) -> f64 {
    if s.contour_strength == 0.0 {
        return 1.0;
    }
    let l = log10_modulus(w);
    if !l.is_finite() {
        return 1.0;
    }
    let x = s.contours_per_decade * l;
    1.0 - s.contour_strength * (x - x.floor())
}

fn clamp(c: Rgb) -> Rgb {
    c.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
}

/// The color of a function value. Total: every input yields channels in `[0, 1]`.
pub fn color_value(w: ExtComplex, p: &Palette, s: &ColorScheme) -> Rgb {
    let z = match w {
        ExtComplex::Infinity => return s.pole_color,
        ExtComplex::Finite(z) => z,
    };
    let base = sample_palette(p, hue_index(z, s));
    if z.re == 0.0 && z.im == 0.0 {
        let k = 1.0 - s.zero_darkening;
        return clamp(base.map(|c| c * k));
    }
    let k = luminance_factor(z, s);
    clamp(base.map(|c| c * k))
}

impl fmt::Display for Palette {
    /// Writes the palette in its file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name)?;
        for s in &self.samples {
            writeln!(f, "{:.6} {:.6} {:.6}", s[0], s[1], s[2])?;
        }
        Ok(())
    }
}
