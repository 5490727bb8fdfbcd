use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn modflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modflow")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

fn t0_line(out: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with("t0")).unwrap();
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn orbit_reports_periods() {
    let dir = tempfile::tempdir().unwrap();
    let o = modflow(&["orbit", "-B", "2,1,1,1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((t0_line(&stdout(&o)) - 0.9624).abs() < 1e-4);
    assert!(stdout(&o).contains("certificate = [[1, 1], [1, 2]] (trace 3, det 1)"));

    let o = modflow(&["orbit", "-B", "5,2,12,5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!((t0_line(&stdout(&o)) - 2.292).abs() < 1e-3);

    let o = modflow(&["orbit", "-B", "-3,-1,-2,-1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn orbit_rejects_bad_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let o = modflow(&["orbit", "-B", "1,1,0,1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not hyperbolic (|trace| <= 2"), "{}", stderr(&o));
    let o = modflow(&["orbit", "-B", "2,1,1,2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unimodular"));
    let o = modflow(&["orbit", "-B", "2,1,x,1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn render_writes_frames_gif_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["render", &config("phase.cfg"), "--set", "resolution=32x32", "--set", "output_dir=run"];
    let o = modflow(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("run");
    for k in 1..=50 {
        assert!(run.join(format!("frame-{k:06}.png")).exists());
    }
    assert!(!run.join("frame-000051.png").exists());
    let gif = modflow::encode::decode_gif(&fs::read(run.join("animation.gif")).unwrap()).unwrap();
    assert_eq!(gif.frames.len(), 50);
    assert!((gif.duration() - 2.0).abs() < 1e-12 && gif.loops_forever);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["resolution"], "32x32");
    assert_eq!(manifest["config"]["B"], "2,1,1,1");
    assert_eq!(manifest["frames"].as_array().unwrap().len(), 50);
    assert_eq!(manifest["frames"][0]["file"], "frame-000001.png");
    assert!(manifest["frames"][0]["wall_ms"].as_f64().is_some());
    assert!((manifest["t0"].as_f64().unwrap() - 0.962_423_650_119_206_9).abs() < 1e-12);
    assert_eq!(manifest["version"], modflow::VERSION);

    let first: Vec<Vec<u8>> = (1..=50).map(|k| fs::read(run.join(format!("frame-{k:06}.png"))).unwrap()).collect();
    let gif_bytes = fs::read(run.join("animation.gif")).unwrap();
    let o = modflow(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let second: Vec<Vec<u8>> = (1..=50).map(|k| fs::read(run.join(format!("frame-{k:06}.png"))).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(gif_bytes, fs::read(run.join("animation.gif")).unwrap());
}

#[test]
fn render_thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["render", &config("cn.cfg"), "--set", "resolution=24x24", "--set", "frames=4", "--set", "gif=false"];
    let mut one = base.to_vec();
    one.extend(["--set", "output_dir=one", "--threads", "1"]);
    let mut four = base.to_vec();
    four.extend(["--set", "output_dir=four", "--threads", "4"]);
    assert_eq!(modflow(&one, dir.path()).status.code(), Some(0));
    assert_eq!(modflow(&four, dir.path()).status.code(), Some(0));
    for k in 1..=4 {
        let name = format!("frame-{k:06}.png");
        assert_eq!(
            fs::read(dir.path().join("one").join(&name)).unwrap(),
            fs::read(dir.path().join("four").join(&name)).unwrap()
        );
    }
    assert!(!dir.path().join("one/animation.gif").exists());
}

#[test]
fn render_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let phase = config("phase.cfg");
    let o = modflow(&["render", &phase, "--set", "frames=0", "--set", "output_dir=x"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("frames"));
    let o = modflow(&["render", &phase, "--set", "B=1,1,0,1", "--set", "output_dir=x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trace"));
    let o = modflow(&["render", "missing.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = modflow(&["render", &phase, "--set", "colour=red"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = modflow(&["render", &phase, "--set", "expression=P'^2", "--set", "output_dir=x"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("x").exists());

    fs::write(dir.path().join("bad.cfg"), "frames = 4\nframes = 5\n").unwrap();
    let o = modflow(&["render", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn failed_render_removes_partial_frames() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::create_dir(out.join("frame-000003.png")).unwrap();
    let args = ["render", &config("phase.cfg"), "--set", "resolution=8x8", "--set", "output_dir=out"];
    let o = modflow(&args, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("frame-000001.png").exists());
    assert!(!out.join("frame-000002.png").exists());
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn validate_passes_and_catches_faults() {
    let dir = tempfile::tempdir().unwrap();
    let o = modflow(&["validate", "quick"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for suite in ["oracle-equivalence", "differential-eq", "legendre", "loop-closure"] {
        assert!(out.lines().any(|l| l.starts_with("PASS") && l.contains(suite)), "{out}");
    }
    let o = modflow(&["validate", "quick", "--inject-fault"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL") && l.contains("differential-eq")));
}

#[test]
fn palettes_list_and_show() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("palettes")).unwrap();
    let custom = "# grey ramp\n0 0 0\n0.1 0.1 0.1\n0.2 0.2 0.2\n0.3 0.3 0.3\n0.4 0.4 0.4\n0.3 0.3 0.3\n0.2 0.2 0.2\n0.1 0.1 0.1\n";
    fs::write(dir.path().join("palettes/grey.pal"), custom).unwrap();
    let o = modflow(&["palette", "list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("cyclic-rainbow") && out.contains("twilight") && out.contains("grey.pal"), "{out}");

    let o = modflow(&["palette", "show", "cyclic-rainbow"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let img = modflow::encode::decode_png(&fs::read(dir.path().join("cyclic-rainbow.png")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (512, 64));
    for y in 0..64 {
        assert_eq!(img.get(0, y), img.get(511, y));
    }
    assert_ne!(img.get(0, 0), img.get(256, 0));

    let o = modflow(&["palette", "show", "palettes/grey.pal", "-o", "g.png"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("g.png").exists());

    let o = modflow(&["palette", "show", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_gif_write_removes_frames() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::create_dir_all(out.join("animation.gif")).unwrap();
    let args =
        ["render", &config("phase.cfg"), "--set", "resolution=8x8", "--set", "frames=3", "--set", "output_dir=out"];
    let o = modflow(&args, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("animation.gif"));
    assert!(!out.join("frame-000001.png").exists());
    assert!(!out.join("manifest.json").exists());
}
