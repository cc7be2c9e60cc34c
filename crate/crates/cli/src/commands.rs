use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gelforce::config::{load_config, PipelineConfig, CONFIG_SCHEMA};
use gelforce::fem::persist::STIFFNESS_FORMAT_VERSION;
use gelforce::io::{
    companion_mask, emit_quiver_svg, frame_source, list_frames, load_markers, read_mesh,
    read_result_file, write_correspondence, write_frame_file, write_mesh, write_result_file,
    PlotStyle, MESH_HEADER, RESULT_HEADER,
};
use gelforce::mesh::{generate_grid, reference_pad, CropMask, Rect};
use gelforce::pipeline::{
    marker_grid, precompute, reference_estimator, render_markers, run_stream, simulator_for,
    sphere_suite, ForceEstimator, FrameResult, MarkerNoise, SpherePose, SuiteParams,
};
use gelforce::raster::{BinaryGrid, GRID_TEXT_HEADER};
use gelforce::tracking::{match_markers, FrameSource};
use gelforce::Execution;

use crate::cli::*;

/// Dot blur used when rendering simulated marker images (pixels).
const RENDER_DOT_SIGMA_PX: f64 = 1.5;

pub fn version_text() -> String {
    format!(
        "gelforce {}\nmesh format: {MESH_HEADER}\nstiffness dump: GFSTIFF v{STIFFNESS_FORMAT_VERSION}\nconfig schema: {CONFIG_SCHEMA}\nresult table: {}\nmask grid: {GRID_TEXT_HEADER}\n",
        env!("CARGO_PKG_VERSION"),
        RESULT_HEADER.trim_start_matches("# ")
    )
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::MeshGen(a) => mesh_gen(a),
        Command::Precompute(a) => precompute_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Track(a) => track(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Stream(a) => stream(a),
        Command::Plot(a) => plot(a),
        Command::Validate(a) => validate(a),
    }
}

fn config(path: &Path) -> Result<PipelineConfig> {
    load_config(path).with_context(|| format!("loading config {}", path.display()))
}

fn estimator(path: &Path) -> Result<ForceEstimator> {
    Ok(ForceEstimator::from_config(config(path)?)?)
}

fn mesh_gen(a: MeshGenArgs) -> Result<()> {
    let mut mesh = match a.preset {
        Some(MeshPreset::ReferencePad) => reference_pad(),
        None => {
            let [x0, y0, x1, y1] = a.bounds_m.expect("required by the grammar");
            generate_grid(
                Rect::new([x0, y0], [x1, y1]),
                a.element_m.expect("required by the grammar"),
                a.thickness_m.expect("required by the grammar"),
            )?
        }
    };
    if let Some(poly) = a.crop_m {
        mesh = mesh.crop(&CropMask::new(poly)?)?;
    }
    write_mesh(&mesh, &a.out)?;
    println!(
        "wrote {}: {} elements, {} nodes",
        a.out.display(),
        mesh.element_count(),
        mesh.node_count()
    );
    Ok(())
}

fn precompute_cmd(a: PrecomputeArgs) -> Result<()> {
    let cfg = config(&a.config)?;
    let Some(out) = a.out.or_else(|| cfg.stiffness_path.clone()) else {
        bail!("no --out given and the config has no stiffness_path");
    };
    let start = std::time::Instant::now();
    let (op, sum) = precompute(&cfg, &out, Execution::default())?;
    println!(
        "wrote {}: {} dofs, {} nonzeros in {:.1} ms\nsha256 {sum}",
        out.display(),
        op.matrix().dim(),
        op.matrix().nnz(),
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let est = estimator(&a.config)?;
    let sim = simulator_for(&est, marker_grid(est.config()))?;
    let pose = SpherePose {
        center_m: a.center_m,
        depth_m: a.depth_m,
        shift_m: a.shift_m,
    };
    let noise = (a.noise > 0.0).then(|| MarkerNoise {
        sigma_m: a.noise * est.config().pixel_pitch_m,
        seed: a.seed,
    });
    let contact = sim.simulate_contact(&pose, noise)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let path = |name: &str| a.out_dir.join(name);
    write_frame_file(&contact.reference, &path("frame_0000.csv"))?;
    write_frame_file(&contact.current, &path("frame_0001.csv"))?;
    contact.contact_mask.write(&path("frame_0001.mask.pgm"))?;
    if a.images {
        let frame = sim.pixel_frame();
        for (name, markers) in [
            ("frame_0000.pgm", &contact.reference),
            ("frame_0001.pgm", &contact.current),
        ] {
            render_markers(
                &markers.centroids,
                &frame,
                sim.image_size(),
                RENDER_DOT_SIGMA_PX,
            )
            .write_pgm(&path(name))?;
        }
    }
    let truth = FrameResult {
        timestamp: 0.0,
        valid: true,
        note: Some("simulator ground truth".into()),
        patch: contact.patch,
        matched: contact.reference.len(),
        displacement: contact.displacement.clone(),
        force: contact.force.clone(),
        resultant: contact.resultant,
        reaction: gelforce::fem::resultant(&contact.force, est.mesh().fixed_nodes()),
        timings: Default::default(),
    };
    write_result_file(&truth, est.mesh(), &path("truth.txt"))?;
    let r = contact.resultant;
    println!(
        "wrote {} markers to {}\nground-truth resultant [N]: {:.4} {:.4} {:.4}",
        contact.reference.len(),
        a.out_dir.display(),
        r[0],
        r[1],
        r[2]
    );
    Ok(())
}

fn track(a: TrackArgs) -> Result<()> {
    let cfg = config(&a.config)?;
    let reference = load_markers(&a.reference, &cfg, FrameSource::Reference)?;
    let current = load_markers(&a.current, &cfg, FrameSource::Current)?;
    let corr = match_markers(&reference, &current, cfg.match_radius_m);
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_correspondence(&corr, std::io::BufWriter::new(file))?;
    println!(
        "{} reference, {} current, {} matched, {} unmatched reference, {} unmatched current",
        reference.len(),
        current.len(),
        corr.pairs.len(),
        corr.unmatched_reference.len(),
        corr.unmatched_current.len()
    );
    Ok(())
}

fn print_summary(r: &FrameResult) {
    let f = r.resultant;
    let t = &r.timings;
    println!(
        "t={:.4}s valid={} matched={} resultant [N]: {:.4} {:.4} {:.4} total {:.2} ms{}",
        r.timestamp,
        r.valid,
        r.matched,
        f[0],
        f[1],
        f[2],
        t.total_ms,
        r.note
            .as_deref()
            .map(|n| format!(" ({n})"))
            .unwrap_or_default()
    );
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let est = estimator(&a.config)?;
    let cfg = est.config();
    let reference = load_markers(&a.reference, cfg, FrameSource::Reference)?;
    let current = load_markers(&a.current, cfg, FrameSource::Current)?;
    let mask_path = a.mask.or_else(|| companion_mask(&a.current));
    let mask = mask_path.as_deref().map(BinaryGrid::read).transpose()?;
    let result = est.process_frame(&reference, &current, mask.as_ref(), a.timestamp);
    write_result_file(&result, est.mesh(), &a.out)?;
    print_summary(&result);
    Ok(())
}

fn stream(a: StreamArgs) -> Result<()> {
    if !(a.fps.is_finite() && a.fps > 0.0) {
        bail!("--fps must be positive");
    }
    let est = estimator(&a.config)?;
    let paths: Vec<PathBuf> = match &a.dir {
        Some(dir) => list_frames(dir)?,
        None => a.frames.clone(),
    };
    if paths.is_empty() {
        bail!("no frames found");
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (k, result) in run_stream(&est, frame_source(&paths, est.config(), a.fps)).enumerate() {
        let result = result.with_context(|| format!("frame {}", paths[k].display()))?;
        write_result_file(
            &result,
            est.mesh(),
            &a.out_dir.join(format!("result_{k:04}.csv")),
        )?;
        print_summary(&result);
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let mesh_path = match (&a.mesh, &a.config) {
        (Some(m), _) => m.clone(),
        (None, Some(c)) => config(c)?.mesh_path,
        (None, None) => unreachable!("required by the grammar"),
    };
    let mesh = read_mesh(&mesh_path)?;
    let result = read_result_file(&a.result)?;
    let (style, field) = match a.style {
        StyleArg::Displacement => (PlotStyle::Displacement, result.displacement.as_slice()),
        StyleArg::TangentialForce => (PlotStyle::TangentialForce, result.force.as_slice()),
        StyleArg::NormalForceHeatmap => (PlotStyle::NormalForceHeatmap, result.force.as_slice()),
    };
    let overlay = result.patch.filter(|_| !a.no_overlay);
    emit_quiver_svg(field, &mesh, style, overlay.as_ref(), &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let Suite::Sphere = a.suite;
    let est = match &a.config {
        Some(c) => estimator(c)?,
        None => reference_estimator()?,
    };
    let sim = simulator_for(&est, marker_grid(est.config()))?;
    let params = SuiteParams {
        count: a.count,
        noise_px: a.noise,
        seed: a.seed,
        ..SuiteParams::default()
    };
    let start = std::time::Instant::now();
    let reports = sphere_suite(&est, &sim, &params, Execution::default())?;
    println!(
        "{:>4} {:>8} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>7} {:>7} {:>7}",
        "case",
        "depth_mm",
        "shift_mm",
        "Fx_true",
        "Fy_true",
        "Fz_true",
        "Fx_est",
        "Fy_est",
        "Fz_est",
        "ex_%",
        "ey_%",
        "ez_%"
    );
    for r in &reports {
        let e = r.relative_error();
        println!(
            "{:>4} {:>8.3} {:>8.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>7.2} {:>7.2} {:>7.2}{}",
            r.case,
            r.pose.depth_m * 1e3,
            r.pose.shift_m[0].hypot(r.pose.shift_m[1]) * 1e3,
            r.truth[0],
            r.truth[1],
            r.truth[2],
            r.estimate[0],
            r.estimate[1],
            r.estimate[2],
            100.0 * e[0],
            100.0 * e[1],
            100.0 * e[2],
            if r.valid { "" } else { "  invalid" }
        );
    }
    let worst = reports
        .iter()
        .map(|r| r.worst_relative_error())
        .fold(0.0, f64::max);
    let mean = if reports.is_empty() {
        0.0
    } else {
        reports
            .iter()
            .map(|r| r.worst_relative_error())
            .sum::<f64>()
            / reports.len() as f64
    };
    let invalid = reports.iter().filter(|r| !r.valid).count();
    println!(
        "{} cases, noise {} px, seed {}: worst per-axis error {:.2}% of load, mean {:.2}%, {} invalid, {:.1} s",
        reports.len(),
        a.noise,
        a.seed,
        100.0 * worst,
        100.0 * mean,
        invalid,
        start.elapsed().as_secs_f64()
    );
    if let Some(limit) = a.max_error {
        if worst > limit || invalid > 0 {
            bail!(
                "validation failed: worst error {:.2}% exceeds {:.2}% or invalid frames present",
                100.0 * worst,
                100.0 * limit
            );
        }
    }
    Ok(())
}
