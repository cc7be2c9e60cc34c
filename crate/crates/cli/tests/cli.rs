use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gelforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gelforce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Reference pad mesh and a config naming it, inside `dir`.
fn setup(dir: &Path) -> std::path::PathBuf {
    let mesh = dir.join("pad.mesh");
    let o = gelforce(&["mesh-gen", "--preset", "reference-pad", "--out", p(&mesh)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("2000 elements"));
    let config = dir.join("config.json");
    fs::write(
        &config,
        r#"{
  "schema": "gelforce-config/1",
  "mesh_path": "pad.mesh",
  "stiffness_path": "pad.stiff",
  "material": "paper-defaults",
  "camera": { "virtual_camera_m": [0.024, 0.018, -0.048], "refractive_index": 1.41 },
  "marker_spacing_m": 0.001,
  "pixel_pitch_m": 0.0001,
  "image_origin_m": [0.0, 0.0],
  "match_radius_m": 0.0005,
  "idw_cutoff_m": 0.002,
  "indenter": { "sphere_radius_m": 0.01 },
  "detection": { "threshold": 128, "min_area_px": 3, "max_area_px": 400 }
}
"#,
    )
    .unwrap();
    config
}

fn resultant(path: &Path) -> [f64; 3] {
    let text = fs::read_to_string(path).unwrap();
    let line = text
        .lines()
        .find(|l| l.starts_with("# resultant_n,"))
        .unwrap();
    let v: Vec<f64> = line["# resultant_n,".len()..]
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    [v[0], v[1], v[2]]
}

#[test]
fn version_lists_schemas() {
    let o = gelforce(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for needle in [
        "gelmesh 1",
        "GFSTIFF v1",
        "gelforce-config/1",
        "gelforce-result 1",
        "gelgrid 1",
    ] {
        assert!(s.contains(needle), "missing {needle} in {s}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gelforce(&[]).status.code(), Some(2));
    assert_eq!(gelforce(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        gelforce(&["reconstruct", "--config", "c.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gelforce(&["validate", "--suite", "sphere", "--noise", "0.1mm"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(gelforce(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = gelforce(&["precompute", "--config", p(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema\": \"gelforce-config/1\", \"bogus\": 1}").unwrap();
    let o = gelforce(&["precompute", "--config", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn simulate_reconstruct_plot_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = setup(d);
    let o = gelforce(&["precompute", "--config", p(&config)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("pad.stiff").exists());

    let sim = d.join("sim");
    let o = gelforce(&[
        "simulate",
        "--config",
        p(&config),
        "--center-m",
        "0.024,0.022",
        "--depth-m",
        "0.0006",
        "--shift-m",
        "0.0002,0.0001",
        "--images",
        "--out-dir",
        p(&sim),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "frame_0000.csv",
        "frame_0001.csv",
        "frame_0001.mask.pgm",
        "frame_0000.pgm",
        "frame_0001.pgm",
        "truth.txt",
    ] {
        assert!(sim.join(f).exists(), "{f}");
    }
    let truth = resultant(&sim.join("truth.txt"));
    let load = truth.iter().map(|v| v * v).sum::<f64>().sqrt();

    // from marker tables, picking up the companion mask
    let out = d.join("result.csv");
    let o = gelforce(&[
        "reconstruct",
        "--config",
        p(&config),
        "--ref",
        p(&sim.join("frame_0000.csv")),
        "--cur",
        p(&sim.join("frame_0001.csv")),
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est = resultant(&out);
    for k in 0..3 {
        assert!(
            (est[k] - truth[k]).abs() <= 0.05 * load,
            "{est:?} vs {truth:?}"
        );
    }

    // from rendered images, through detection
    let out_img = d.join("result_img.csv");
    let o = gelforce(&[
        "reconstruct",
        "--config",
        p(&config),
        "--ref",
        p(&sim.join("frame_0000.pgm")),
        "--cur",
        p(&sim.join("frame_0001.pgm")),
        "--mask",
        p(&sim.join("frame_0001.mask.pgm")),
        "--out",
        p(&out_img),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est = resultant(&out_img);
    for k in 0..3 {
        assert!(
            (est[k] - truth[k]).abs() <= 0.15 * load,
            "{est:?} vs {truth:?}"
        );
    }

    let corr = d.join("corr.csv");
    let o = gelforce(&[
        "track",
        "--config",
        p(&config),
        "--ref",
        p(&sim.join("frame_0000.csv")),
        "--cur",
        p(&sim.join("frame_0001.csv")),
        "--out",
        p(&corr),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(&corr)
        .unwrap()
        .starts_with("id,x_m,y_m,dx_m,dy_m"));

    for style in ["displacement", "tangential-force", "normal-force-heatmap"] {
        let svg = d.join(format!("{style}.svg"));
        let o = gelforce(&[
            "plot",
            "--config",
            p(&config),
            "--result",
            p(&out),
            "--style",
            style,
            "--out",
            p(&svg),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = fs::read_to_string(&svg).unwrap();
        assert!(
            text.starts_with("<svg") && text.contains("class=\"contact\""),
            "{style}"
        );
    }
}

#[test]
fn stream_writes_one_result_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = setup(d);
    let sim = d.join("sim");
    let o = gelforce(&[
        "simulate",
        "--config",
        p(&config),
        "--center-m",
        "0.02,0.02",
        "--depth-m",
        "0.0005",
        "--out-dir",
        p(&sim),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    fs::remove_file(sim.join("truth.txt")).unwrap();
    let out = d.join("stream");
    let o = gelforce(&[
        "stream",
        "--config",
        p(&config),
        "--dir",
        p(&sim),
        "--out-dir",
        p(&out),
        "--fps",
        "30",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(resultant(&out.join("result_0000.csv")), [0.0; 3]);
    let text = fs::read_to_string(out.join("result_0001.csv")).unwrap();
    assert!(text.contains("# timestamp,0.0333"));
    assert!(resultant(&out.join("result_0001.csv"))[2] < 0.0);
}

#[test]
fn validate_prints_table_and_enforces_limit() {
    let o = gelforce(&[
        "validate", "--suite", "sphere", "--noise", "0.1px", "--count", "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.lines().next().unwrap().contains("Fz_est"));
    assert_eq!(s.lines().count(), 1 + 5 + 1);
    assert!(s.contains("5 cases"));
    let o = gelforce(&[
        "validate",
        "--suite",
        "sphere",
        "--count",
        "3",
        "--max-error",
        "0.000001",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("validation failed"));
}
