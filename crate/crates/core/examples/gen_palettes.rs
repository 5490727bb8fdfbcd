//! Regenerates the embedded palette files under `palettes/`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

const SAMPLES: usize = 256;

/// Sine-based hue wheel starting at red; the channels are phase-shifted squared sines.
fn rainbow(t: f64) -> [f64; 3] {
    let s = |phase: f64| (PI * (t + 0.5 + phase)).sin().powi(2);
    [s(0.0), s(1.0 / 3.0), s(2.0 / 3.0)]
}

/// Light, blue, dark, red, back to light, with smooth cosine easing between keys.
fn twilight(t: f64) -> [f64; 3] {
    const KEYS: [[f64; 3]; 4] =
        [[0.886, 0.851, 0.886], [0.373, 0.478, 0.741], [0.188, 0.078, 0.212], [0.706, 0.306, 0.247]];
    let x = t * KEYS.len() as f64;
    let k = x.floor() as usize % KEYS.len();
    let f = x - x.floor();
    let e = (1.0 - (PI * f).cos()) / 2.0;
    let (a, b) = (KEYS[k], KEYS[(k + 1) % KEYS.len()]);
    [0, 1, 2].map(|c| a[c] + (b[c] - a[c]) * e)
}

fn write(dir: &Path, name: &str, header: &str, f: fn(f64) -> [f64; 3]) {
    let mut text = format!("# {header}\nname = {name}\n");
    for k in 0..SAMPLES {
        let [r, g, b] = f(k as f64 / SAMPLES as f64);
        writeln!(text, "{r:.6} {g:.6} {b:.6}").unwrap();
    }
    std::fs::write(dir.join(format!("{name}.pal")), text).unwrap();
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("palettes");
    std::fs::create_dir_all(&dir).unwrap();
    write(&dir, "cyclic-rainbow", "cyclic hue wheel, 256 samples", rainbow);
    write(&dir, "twilight", "cyclic light-blue-dark-red ramp, 256 samples", twilight);
}
