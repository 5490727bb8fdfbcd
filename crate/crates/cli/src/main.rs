use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use modflow::colorize::{builtin_names, discover_palettes, resolve_palette, sample_palette, PaletteError};
use modflow::config::{ConfigError, JobConfig};
use modflow::encode::{encode_gif, encode_png, GifOptions};
use modflow::render::{render_at, Execution, Image, RenderError, RenderJob};
use modflow::validate::{run_validation, Fault, Level};
use modflow::{solve_periodic_orbit, verify_closure, LatticeError, UnimodularMatrix};

const CLOSURE_TOL: f64 = 1e-9;
const SWEEP_WIDTH: u32 = 512;
const SWEEP_HEIGHT: u32 = 64;
const GIF_NAME: &str = "animation.gif";
const MANIFEST_NAME: &str = "manifest.json";

#[derive(Parser)]
#[command(
    name = "modflow",
    version,
    about = "Periodic orbits of the modular flow and looping elliptic-function animations"
)]
struct Cli {
    /// Worker threads for rendering (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the periodic orbit of an integer matrix.
    Orbit {
        /// Matrix entries a,b,c,d of [[a, b], [c, d]].
        #[arg(short = 'B', allow_hyphen_values = true)]
        b: String,
    },
    /// Render the animation described by a config file.
    Render {
        config: PathBuf,
        /// Override a config value, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Ordered dithering when quantizing the GIF.
        #[arg(long)]
        dither: bool,
    },
    /// Run the numerical cross-validation suites.
    Validate {
        #[arg(value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Inspect palettes.
    Palette {
        #[command(subcommand)]
        action: PaletteAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum PaletteAction {
    /// List builtin palettes and palette files found in a directory.
    List {
        #[arg(long, default_value = "palettes")]
        dir: PathBuf,
    },
    /// Write a 512x64 sweep of a palette as PNG.
    Show {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Failure { code: 1, message: message.to_string() }
    }

    fn math(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: if e.is_math() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Elliptic(_) => Failure::math(e),
            _ => Failure::config(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Orbit { ref b } => cmd_orbit(b),
        Command::Render { ref config, ref overrides, dither } => cmd_render(&cli, config, overrides, dither),
        Command::Validate { level, inject_fault } => cmd_validate(level, inject_fault),
        Command::Palette { ref action } => cmd_palette(action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_matrix(text: &str) -> Result<UnimodularMatrix, Failure> {
    let entries: Vec<i64> = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::config(format!("-B expects four integers a,b,c,d, got '{text}'")))?;
    let [a, b, c, d] = entries[..] else {
        return Err(Failure::config(format!("-B expects four integers a,b,c,d, got '{text}'")));
    };
    UnimodularMatrix::new(a, b, c, d).map_err(Failure::math)
}

fn cmd_orbit(b: &str) -> Result<(), Failure> {
    let b = parse_matrix(b)?;
    let orbit = solve_periodic_orbit(b).map_err(Failure::math)?;
    let (g1, g2) = orbit.generators();
    println!("B           = {b}");
    println!("solved      = {}{}", orbit.solved_matrix(), if orbit.negated { " (negated)" } else { "" });
    println!("t0          = {:.15}", orbit.t0);
    println!("lambda1     = {:.15}", orbit.lambda1);
    println!("omega1      = {:.15} {:+.15}i", g1.re, g1.im);
    println!("omega2      = {:.15} {:+.15}i", g2.re, g2.im);
    println!(
        "U           = [[{:.15}, {:.15}], [{:.15}, {:.15}]]",
        orbit.u[0][0], orbit.u[0][1], orbit.u[1][0], orbit.u[1][1]
    );
    let cert = verify_closure(&orbit, CLOSURE_TOL).map_err(|e: LatticeError| Failure::math(e))?;
    println!("certificate = {cert} (trace {}, det {})", cert.trace(), cert.det());
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_render(cli: &Cli, config: &Path, overrides: &[String], dither: bool) -> Result<(), Failure> {
    let mut cfg = JobConfig::load(config)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    let job = cfg.to_job()?;
    job.validate()?;
    let exec = Execution::with_threads(cfg.threads);
    fs::create_dir_all(&job.output_dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", job.output_dir.display())))?;

    let started = Instant::now();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_outputs(cli, &cfg, &job, exec, dither, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result?;
    println!(
        "rendered {} frames to {} (t0 = {:.12}, {:.2} s)",
        job.frames,
        job.output_dir.display(),
        job.orbit.t0,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Frames, GIF and manifest; every file written is pushed onto `written`.
fn write_outputs(
    cli: &Cli,
    cfg: &JobConfig,
    job: &RenderJob,
    exec: Execution,
    dither: bool,
    written: &mut Vec<PathBuf>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let (frames, records) = render_frames(cli, job, exec, written)?;
    let gif = if job.gif {
        let delay = job.delay_cs();
        let bytes = encode_gif(&frames, delay, GifOptions { dither }).map_err(Failure::config)?;
        let path = job.output_dir.join(GIF_NAME);
        write_bytes(&path, &bytes)?;
        written.push(path.clone());
        if cli.verbose {
            eprintln!("wrote {}", path.display());
        }
        json!({ "file": GIF_NAME, "sha256": sha256_hex(&bytes), "delay_cs": delay, "dither": dither })
    } else {
        serde_json::Value::Null
    };
    let manifest = json!({
        "version": modflow::VERSION,
        "config": cfg.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "t0": job.orbit.t0,
        "frame_count": job.frames,
        "frames": records,
        "gif": gif,
        "total_wall_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(Failure::config)?;
    write_bytes(&job.output_dir.join(MANIFEST_NAME), text.as_bytes())
}

fn render_frames(
    cli: &Cli,
    job: &RenderJob,
    exec: Execution,
    written: &mut Vec<PathBuf>,
) -> Result<(Vec<Image>, Vec<serde_json::Value>), Failure> {
    let mut frames = Vec::with_capacity(job.frames as usize);
    let mut records = Vec::with_capacity(job.frames as usize);
    for k in 0..job.frames {
        let start = Instant::now();
        let t = job.frame_time(k);
        let img = render_at(job, t, exec)?;
        let bytes = encode_png(&img).map_err(Failure::config)?;
        let name = format!("frame-{:06}.png", k + 1);
        let path = job.output_dir.join(&name);
        write_bytes(&path, &bytes)?;
        written.push(path);
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        if cli.verbose {
            eprintln!("frame {}/{} t = {t:.6} ({wall_ms:.1} ms)", k + 1, job.frames);
        }
        records.push(json!({ "file": name, "t": t, "sha256": sha256_hex(&bytes), "wall_ms": wall_ms }));
        frames.push(img);
    }
    Ok((frames, records))
}

fn cmd_validate(level: LevelArg, inject_fault: bool) -> Result<(), Failure> {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let fault = inject_fault.then_some(Fault::WpCoefficient(1.01));
    let report = run_validation(level, fault);
    for suite in &report.suites {
        println!("{suite}");
    }
    if report.passed() {
        println!("all suites passed");
        Ok(())
    } else {
        let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
        Err(Failure { code: 3, message: format!("validation failed: {}", failed.join(", ")) })
    }
}

fn palette_failure(e: PaletteError) -> Failure {
    match e {
        PaletteError::UnknownPalette(_) => Failure::math(e),
        _ => Failure::config(e),
    }
}

fn cmd_palette(action: &PaletteAction) -> Result<(), Failure> {
    match action {
        PaletteAction::List { dir } => {
            for name in builtin_names() {
                println!("{name} (builtin)");
            }
            for path in discover_palettes(dir) {
                println!("{}", path.display());
            }
            Ok(())
        }
        PaletteAction::Show { name, output } => {
            let palette = resolve_palette(name).map_err(palette_failure)?;
            let mut img = Image::new(SWEEP_WIDTH, SWEEP_HEIGHT);
            for x in 0..SWEEP_WIDTH {
                let rgb = sample_palette(&palette, x as f64 / (SWEEP_WIDTH - 1) as f64);
                let px = rgb.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8);
                for y in 0..SWEEP_HEIGHT {
                    img.put(x, y, px);
                }
            }
            let path = output.clone().unwrap_or_else(|| {
                let stem = Path::new(name).file_stem().map_or("palette".into(), |s| s.to_string_lossy().into_owned());
                PathBuf::from(format!("{stem}.png"))
            });
            let bytes = encode_png(&img).map_err(Failure::config)?;
            write_bytes(&path, &bytes)?;
            println!("wrote {} ({} samples)", path.display(), palette.len());
            Ok(())
        }
    }
}
