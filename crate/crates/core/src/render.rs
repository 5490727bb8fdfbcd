//! Rasterizing domain-colored frames of a flowing elliptic function.
//!
//! Rows of a frame and frames of an animation are independent pure
//! computations, so the output does not depend on how work is scheduled.

use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::colorize::{color_value, ColorScheme, Palette, Rgb};
use crate::elliptic::{invariants_of, EllipticError, LatticeInvariants, TruncationSpec};
use crate::expr::{eval_expr, EllipticExpr};
use crate::lattice::Lattice;
use crate::orbit::PeriodicOrbit;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("invalid viewport: {0}")]
    InvalidViewport(String),
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// The visible rectangle of the plane and its sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    /// Width of the visible field in complex units.
    pub width: f64,
    pub pixels_x: u32,
    pub pixels_y: u32,
    /// Sub-samples per pixel along each axis.
    pub supersample: u32,
}

impl Viewport {
    pub fn new(
        center: Complex64,
        width: f64,
        pixels_x: u32,
        pixels_y: u32,
        supersample: u32,
    ) -> Result<Self, RenderError> {
        let vp = Viewport { center, width, pixels_x, pixels_y, supersample };
        vp.validate()?;
        Ok(vp)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(RenderError::InvalidViewport(format!("width {} must be positive", self.width)));
        }
        if self.pixels_x == 0 || self.pixels_y == 0 {
            return Err(RenderError::InvalidViewport("resolution must be positive".into()));
        }
        if self.supersample == 0 {
            return Err(RenderError::InvalidViewport("supersample must be at least 1".into()));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(RenderError::InvalidViewport("center must be finite".into()));
        }
        Ok(())
    }

    /// Height in complex units, keeping square pixels.
    pub fn height(&self) -> f64 {
        self.width * self.pixels_y as f64 / self.pixels_x as f64
    }

    /// The point sampled by sub-sample `(sx, sy)` of pixel `(px, py)`; `(0, 0)` is top-left.
    pub fn sample_point(&self, px: u32, py: u32, sx: u32, sy: u32) -> Complex64 {
        let s = self.supersample as f64;
        let step_x = self.width / self.pixels_x as f64;
        let step_y = self.height() / self.pixels_y as f64;
        let fx = px as f64 + (sx as f64 + 0.5) / s;
        let fy = py as f64 + (sy as f64 + 0.5) / s;
        Complex64::new(
            self.center.re - self.width / 2.0 + fx * step_x,
            self.center.im + self.height() / 2.0 - fy * step_y,
        )
    }

    /// The center of pixel `(px, py)`.
    pub fn pixel_center(&self, px: u32, py: u32) -> Complex64 {
        let single = Viewport { supersample: 1, ..*self };
        single.sample_point(px, py, 0, 0)
    }
}

/// Row-major RGB8 raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image { width, height, pixels: vec![0; 3 * width as usize * height as usize] }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == 3 * width as usize * height as usize).then_some(Image { width, height, pixels })
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Largest per-channel difference to `other`; `None` if the sizes differ.
    pub fn max_channel_diff(&self, other: &Image) -> Option<u8> {
        if self.width != other.width || self.height != other.height {
            return None;
        }
        Some(self.pixels.iter().zip(&other.pixels).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0))
    }
}

/// How rendering work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// A worker pool of the given size; 0 picks the number of cores.
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        threads: usize,
    },
}

impl Execution {
    pub fn with_threads(threads: usize) -> Self {
        if threads == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { threads }
        }
    }

    fn run<R: Send>(self, job: impl FnOnce(bool) -> R + Send) -> R {
        match self {
            Execution::Sequential => job(false),
            Execution::Parallel { threads } => run_in_pool(threads, job),
        }
    }
}

#[cfg(feature = "parallel")]
fn run_in_pool<R: Send>(threads: usize, job: impl FnOnce(bool) -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| job(true)),
        Err(_) => job(false),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_in_pool<R: Send>(_threads: usize, job: impl FnOnce(bool) -> R + Send) -> R {
    job(false)
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        c * 12.92
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn to_u8(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Everything a pixel worker reads, shared immutably.
struct FrameContext<'a> {
    expr: &'a EllipticExpr,
    inv: LatticeInvariants,
    vp: &'a Viewport,
    palette: &'a Palette,
    scheme: &'a ColorScheme,
}

impl FrameContext<'_> {
    fn color_at(&self, z: Complex64) -> Rgb {
        color_value(eval_expr(self.expr, z, &self.inv), self.palette, self.scheme)
    }

    fn pixel(&self, px: u32, py: u32) -> [u8; 3] {
        let s = self.vp.supersample;
        if s == 1 {
            return self.color_at(self.vp.sample_point(px, py, 0, 0)).map(to_u8);
        }
        let mut acc = [0.0; 3];
        for sy in 0..s {
            for sx in 0..s {
                let c = self.color_at(self.vp.sample_point(px, py, sx, sy));
                for ch in 0..3 {
                    acc[ch] += srgb_to_linear(c[ch]);
                }
            }
        }
        let n = (s * s) as f64;
        acc.map(|v| to_u8(linear_to_srgb(v / n)))
    }

    fn fill_row(&self, py: u32, row: &mut [u8]) {
        for (px, out) in row.chunks_exact_mut(3).enumerate() {
            out.copy_from_slice(&self.pixel(px as u32, py));
        }
    }

    fn render(&self, parallel_rows: bool) -> Image {
        let mut img = Image::new(self.vp.pixels_x, self.vp.pixels_y);
        let row_len = 3 * self.vp.pixels_x as usize;
        if parallel_rows {
            fill_rows_parallel(self, &mut img.pixels, row_len);
        } else {
            for (py, row) in img.pixels.chunks_mut(row_len).enumerate() {
                self.fill_row(py as u32, row);
            }
        }
        img
    }
}

#[cfg(feature = "parallel")]
fn fill_rows_parallel(ctx: &FrameContext<'_>, pixels: &mut [u8], row_len: usize) {
    use rayon::prelude::*;
    pixels.par_chunks_mut(row_len).enumerate().for_each(|(py, row)| ctx.fill_row(py as u32, row));
}

#[cfg(not(feature = "parallel"))]
fn fill_rows_parallel(ctx: &FrameContext<'_>, pixels: &mut [u8], row_len: usize) {
    for (py, row) in pixels.chunks_mut(row_len).enumerate() {
        ctx.fill_row(py as u32, row);
    }
}

fn frame_context<'a>(
    expr: &'a EllipticExpr,
    lattice: &Lattice,
    vp: &'a Viewport,
    palette: &'a Palette,
    scheme: &'a ColorScheme,
) -> Result<FrameContext<'a>, RenderError> {
    vp.validate()?;
    let inv = invariants_of(lattice, &TruncationSpec::default())?;
    Ok(FrameContext { expr, inv, vp, palette, scheme })
}

/// Renders one frame of `expr` on `lattice`. The lattice invariants are computed
/// once and shared by every pixel.
pub fn render_frame(
    expr: &EllipticExpr,
    lattice: &Lattice,
    vp: &Viewport,
    palette: &Palette,
    scheme: &ColorScheme,
    exec: Execution,
) -> Result<Image, RenderError> {
    let ctx = frame_context(expr, lattice, vp, palette, scheme)?;
    Ok(exec.run(|parallel| ctx.render(parallel)))
}

/// A complete animation request.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderJob {
    pub orbit: PeriodicOrbit,
    pub expr: EllipticExpr,
    pub viewport: Viewport,
    pub palette: Palette,
    pub scheme: ColorScheme,
    pub frames: u32,
    pub seconds: f64,
    pub output_dir: PathBuf,
    pub gif: bool,
}

impl RenderJob {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.frames < 2 {
            return Err(RenderError::InvalidJob(format!("frames = {} but at least 2 are needed", self.frames)));
        }
        if !(self.seconds > 0.0 && self.seconds.is_finite()) {
            return Err(RenderError::InvalidJob(format!("seconds = {} must be positive", self.seconds)));
        }
        self.scheme.validate().map_err(|e| RenderError::InvalidJob(e.to_string()))?;
        self.viewport.validate()
    }

    /// Flow time of frame `k`.
    pub fn frame_time(&self, k: u32) -> f64 {
        frame_time(k, self.frames, self.orbit.t0)
    }

    /// GIF delay per frame in centiseconds.
    pub fn delay_cs(&self) -> u16 {
        gif_delay_cs(self.seconds, self.frames)
    }
}

/// `t_k = t0 * (k / frames)`, computed absolutely so there is no drift and
/// `k = frames / 2` lands exactly on `t0 / 2`.
pub fn frame_time(k: u32, frames: u32, t0: f64) -> f64 {
    t0 * (k as f64 / frames as f64)
}

/// `round(100 * seconds / frames)` centiseconds, at least 1.
pub fn gif_delay_cs(seconds: f64, frames: u32) -> u16 {
    let cs = (100.0 * seconds / frames as f64).round();
    cs.clamp(1.0, u16::MAX as f64) as u16
}

/// Renders `job` at an arbitrary flow time.
pub fn render_at(job: &RenderJob, t: f64, exec: Execution) -> Result<Image, RenderError> {
    let lattice = job.orbit.lattice().flow(t);
    render_frame(&job.expr, &lattice, &job.viewport, &job.palette, &job.scheme, exec)
}

/// All frames of `job`, in order. Frames are rendered concurrently when `exec` allows.
pub fn render_animation(job: &RenderJob, exec: Execution) -> Result<Vec<Image>, RenderError> {
    job.validate()?;
    let base = job.orbit.lattice();
    let one = |k: u32, parallel: bool| -> Result<Image, RenderError> {
        let lattice = base.flow(job.frame_time(k));
        let ctx = frame_context(&job.expr, &lattice, &job.viewport, &job.palette, &job.scheme)?;
        Ok(ctx.render(parallel))
    };
    exec.run(|parallel| frames_in_order(job.frames, parallel, &one))
}

#[cfg(feature = "parallel")]
fn frames_in_order(
    frames: u32,
    parallel: bool,
    one: &(dyn Fn(u32, bool) -> Result<Image, RenderError> + Sync),
) -> Result<Vec<Image>, RenderError> {
    use rayon::prelude::*;
    if parallel {
        (0..frames).into_par_iter().map(|k| one(k, true)).collect()
    } else {
        (0..frames).map(|k| one(k, false)).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn frames_in_order(
    frames: u32,
    _parallel: bool,
    one: &(dyn Fn(u32, bool) -> Result<Image, RenderError> + Sync),
) -> Result<Vec<Image>, RenderError> {
    (0..frames).map(|k| one(k, false)).collect()
}
