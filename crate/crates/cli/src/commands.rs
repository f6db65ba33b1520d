//! Subcommand bodies. Results go to stdout as `key=value` lines; logs go to stderr.

use std::path::Path;

use hrtf_bem::{
    equivalent_cap_source, hrtf_to_hrir, load_hrtf_json, save_hrtf_json, sphere_oracle,
    synthesize_hrtf, Ear, HrtfSet, SphereSource,
};
use hrtf_core::io::{load_mesh, save_mesh};
use hrtf_core::prep::{behead, cleanup, grade, icp_align, label_regions, BeheadOutcome};
use hrtf_core::{apply_transform, validate as check_mesh, Region, TriangleMesh, Vec3};
use hrtf_metrics::{compare, emit_report};
use hrtf_subdiv::{
    train as fit, training_log_csv, upsample as refine, SubdivNetParams, TrainingPair,
};

use crate::config::{HrirSpec, PipelineConfig};
use crate::error::{domain, usage, CliError, Result};
use crate::manifest::{DatasetManifest, Split};

fn read_mesh(path: &Path, unit_scale: f64) -> Result<TriangleMesh> {
    load_mesh(path, unit_scale).map_err(usage(format!("mesh {}", path.display())))
}

fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    save_mesh(mesh, path).map_err(domain(format!("writing {}", path.display())))
}

fn stage(name: &str, mesh: &TriangleMesh) {
    println!(
        "stage={name} vertices={} faces={}",
        mesh.vertex_count(),
        mesh.face_count()
    );
}

pub fn validate(path: &Path, unit_scale: f64) -> Result<()> {
    let mesh = read_mesh(path, unit_scale)?;
    let report = check_mesh(&mesh);
    println!("{report}");
    if report.is_closed_sphere() {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "not a closed genus-0 manifold ({} boundary edges, {} non-manifold edges)",
            report.boundary_edge_count, report.non_manifold_edge_count
        )))
    }
}

pub fn prep(cfg: &PipelineConfig, input: &Path, output: &Path) -> Result<()> {
    let p = cfg.prep()?;
    if output
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
        != Some("obj")
    {
        return Err(CliError::Usage(format!(
            "{}: prep output must be .obj to keep labels",
            output.display()
        )));
    }
    let plane = p.cut_plane.as_ref().map(|c| c.plane()).transpose()?;
    let markers = p.ear_markers.markers();
    let reference = match &cfg.io.reference_mesh {
        Some(r) => Some(read_mesh(r, cfg.io.unit_scale)?),
        None => None,
    };

    let mut mesh = read_mesh(input, cfg.io.unit_scale)?;
    stage("load", &mesh);
    mesh = cleanup(&mesh, p.weld_tol, p.area_eps).map_err(domain("cleanup"))?;
    stage("cleanup", &mesh);
    if let Some(reference) = reference {
        let fit = icp_align(&mesh, &reference, p.icp.max_iters, p.icp.convergence_eps)
            .map_err(domain("align"))?;
        mesh = apply_transform(&mesh, &fit.transform).map_err(domain("align"))?;
        println!(
            "stage=align rms={:e} iterations={} status={:?}",
            fit.rms, fit.iterations, fit.status
        );
    }
    if let Some(plane) = plane {
        mesh = match behead(&mesh, &plane).map_err(domain("behead"))? {
            BeheadOutcome::Clipped(m) => m,
            BeheadOutcome::Untouched(m) => {
                log::warn!("cut plane misses the mesh; nothing removed");
                m
            }
        };
        stage("behead", &mesh);
    }
    if p.grade {
        mesh = grade(&mesh, &p.grading.params()).map_err(domain("grade"))?;
        stage("grade", &mesh);
    }
    mesh = label_regions(&mesh, &markers).map_err(domain("label"))?;
    println!(
        "stage=label left_ear_faces={} right_ear_faces={}",
        mesh.faces_with_label(Region::LeftEar).len(),
        mesh.faces_with_label(Region::RightEar).len()
    );
    write_mesh(&mesh, output)
}

/// Loads a pair, or `None` with a warning when either mesh is not a closed genus-0 manifold.
fn load_pair(
    id: &str,
    coarse: &Path,
    truth: &Path,
    unit_scale: f64,
) -> Result<Option<TrainingPair>> {
    let coarse = read_mesh(coarse, unit_scale)?;
    let truth = read_mesh(truth, unit_scale)?;
    for (name, m) in [("low-res", &coarse), ("high-res", &truth)] {
        if !check_mesh(m).is_closed_sphere() {
            log::warn!("subject {id}: {name} mesh is not a closed genus-0 manifold; skipped");
            return Ok(None);
        }
    }
    Ok(Some(TrainingPair { coarse, truth }))
}

fn split_pairs(man: &DatasetManifest, split: Split, unit_scale: f64) -> Result<Vec<TrainingPair>> {
    let mut out = Vec::new();
    for s in man.pairs(split) {
        let truth = s
            .high_res_mesh_path
            .as_ref()
            .expect("pairs() filters on it");
        if let Some(p) = load_pair(&s.id, &s.low_res_mesh_path, truth, unit_scale)? {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn train(
    cfg: &PipelineConfig,
    seed: u64,
    manifest: &Path,
    output: &Path,
    loss_csv: &Path,
) -> Result<()> {
    let model = cfg.model()?;
    let man = DatasetManifest::load(manifest)?;
    if man.pairs(Split::Train).next().is_none() {
        return Err(CliError::Usage(
            "manifest has no train subject with a high_res_mesh_path".into(),
        ));
    }
    let pairs = split_pairs(&man, Split::Train, cfg.io.unit_scale)?;
    if pairs.is_empty() {
        return Err(CliError::Domain("every training pair was skipped".into()));
    }
    let val = split_pairs(&man, Split::Val, cfg.io.unit_scale)?;
    let train_cfg = model.train.config(seed);
    train_cfg.check().map_err(usage("model.train"))?;
    if model.feature_dim == 0 || model.levels == 0 || model.hidden.contains(&0) {
        return Err(CliError::Usage(
            "model.feature_dim, model.levels and model.hidden must be positive".into(),
        ));
    }
    let init = SubdivNetParams::new_random(model.feature_dim, &model.hidden, model.levels, seed);
    println!(
        "train_pairs={} val_pairs={} parameters={}",
        pairs.len(),
        val.len(),
        init.param_count()
    );

    let mut rows = Vec::new();
    let mut val_error = None;
    let outcome = fit(&pairs, init, &train_cfg, |stats, params| {
        let mut line = format!("epoch={} mean_loss={:e}", stats.epoch, stats.mean_loss);
        let mut row = format!("{},{:e}", stats.epoch, stats.mean_loss);
        if !val.is_empty() {
            let mut sum = 0.0;
            for p in &val {
                match refine(params, &p.coarse, model.levels, Some(&p.truth)) {
                    Ok(u) => sum += u.hausdorff.expect("truth given").symmetric,
                    Err(e) => {
                        val_error.get_or_insert(e);
                        sum = f64::NAN;
                    }
                }
            }
            let mean = sum / val.len() as f64;
            line.push_str(&format!(" val_hausdorff={mean:e}"));
            row.push_str(&format!(",{mean:e}"));
        }
        println!("{line}");
        rows.push(row);
    })
    .map_err(domain("training"))?;
    if let Some(e) = val_error {
        return Err(CliError::Domain(format!("validation upsample: {e}")));
    }
    log::debug!("{}", training_log_csv(&outcome.history).trim_end());

    outcome
        .params
        .save(output)
        .map_err(domain(format!("writing {}", output.display())))?;
    let mut csv = String::from(if val.is_empty() {
        "epoch,mean_loss\n"
    } else {
        "epoch,mean_loss,val_hausdorff\n"
    });
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    std::fs::write(loss_csv, csv).map_err(domain(format!("writing {}", loss_csv.display())))?;
    Ok(())
}

pub fn upsample(
    cfg: &PipelineConfig,
    model: &Path,
    input: &Path,
    output: &Path,
    levels: Option<usize>,
    truth: Option<&Path>,
) -> Result<()> {
    let params =
        SubdivNetParams::load(model).map_err(usage(format!("model {}", model.display())))?;
    let mesh = read_mesh(input, cfg.io.unit_scale)?;
    let truth = truth.map(|t| read_mesh(t, cfg.io.unit_scale)).transpose()?;
    let levels = levels.unwrap_or(params.levels);
    let out = refine(&params, &mesh, levels, truth.as_ref()).map_err(domain("upsample"))?;
    write_mesh(&out.mesh, output)?;
    println!(
        "levels={levels} vertices={} faces={}",
        out.mesh.vertex_count(),
        out.mesh.face_count()
    );
    if let Some(h) = out.hausdorff {
        println!(
            "hausdorff_forward={:e} hausdorff_backward={:e} hausdorff_symmetric={:e}",
            h.forward, h.backward, h.symmetric
        );
    }
    Ok(())
}

fn ears_present(mesh: &TriangleMesh) -> Vec<Ear> {
    [Ear::Left, Ear::Right]
        .into_iter()
        .filter(|e| !mesh.faces_with_label(e.region()).is_empty())
        .collect()
}

/// Radius of a sphere centered at the origin, when every vertex lies on one.
fn sphere_radius(mesh: &TriangleMesh) -> Option<f64> {
    let r: Vec<f64> = mesh.vertices.iter().map(|v| v.norm()).collect();
    let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    (hi > 0.0 && (hi - lo) <= 1e-6 * hi).then_some(hi)
}

fn attach_hrir(set: HrtfSet, hrir: Option<&HrirSpec>) -> Result<HrtfSet> {
    match hrir {
        Some(h) => hrtf_to_hrir(&set, h.sample_rate, h.taps).map_err(usage("bem.hrir")),
        None => Ok(set),
    }
}

/// Per-frequency worst magnitude and phase deviation of `test` from `oracle`.
fn print_oracle_deltas(test: &HrtfSet, oracle: &HrtfSet) {
    for (fi, f) in test.frequencies.iter().enumerate() {
        let Some(oi) = oracle.frequencies.iter().position(|g| g == f) else {
            continue;
        };
        let (mut db, mut deg) = (0.0f64, 0.0f64);
        for d in 0..test.directions.len() {
            for e in 0..test.ears.len() {
                let (a, b) = (test.value(d, e, fi), oracle.value(d, e, oi));
                db = db.max((20.0 * (a.norm() / b.norm()).log10()).abs());
                deg = deg.max((a / b).arg().to_degrees().abs());
            }
        }
        println!("oracle_delta frequency_hz={f} max_db={db:.4} max_phase_deg={deg:.3}");
    }
}

fn cap_sources(mesh: &TriangleMesh, radius: f64) -> Result<Vec<(Ear, SphereSource)>> {
    ears_present(mesh)
        .into_iter()
        .map(|e| {
            Ok((
                e,
                equivalent_cap_source(mesh, e.region(), radius).map_err(domain("oracle source"))?,
            ))
        })
        .collect()
}

pub fn solve(cfg: &PipelineConfig, mesh_path: &Path, output: &Path) -> Result<()> {
    let bem = cfg.bem()?;
    let mesh = read_mesh(mesh_path, cfg.io.unit_scale)?;
    if ears_present(&mesh).is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no faces labeled left_ear or right_ear; run prep first",
            mesh_path.display()
        )));
    }
    let syn = synthesize_hrtf(&mesh, &bem.acoustic, &bem.grid).map_err(domain("solve"))?;
    println!(
        "frequencies_solved={} frequencies_failed={} directions={} ears={}",
        syn.set.frequencies.len(),
        syn.failures.len(),
        syn.set.directions.len(),
        syn.set.ears.len()
    );
    if let Some(radius) = sphere_radius(&mesh) {
        let sources = cap_sources(&mesh, radius)?;
        let mut acoustic = bem.acoustic.clone();
        acoustic.frequencies = syn.set.frequencies.clone();
        match sphere_oracle(radius, &sources, &acoustic, &bem.grid, bem.oracle.terms) {
            Ok(oracle) => print_oracle_deltas(&syn.set, &oracle),
            Err(e) => log::warn!("sphere oracle unavailable: {e}"),
        }
    }
    let set = if syn.failures.is_empty() {
        attach_hrir(syn.set, bem.hrir.as_ref())?
    } else {
        syn.set
    };
    save_hrtf_json(&set, output, cfg.io.hrtf_encoding)
        .map_err(domain(format!("writing {}", output.display())))?;
    if let Some(f) = syn.failures.first() {
        return Err(CliError::Domain(format!(
            "{} frequencies failed, first at {} Hz: {}",
            syn.failures.len(),
            f.frequency,
            f.error
        )));
    }
    Ok(())
}

pub fn oracle_sphere(cfg: &PipelineConfig, output: &Path, mesh: Option<&Path>) -> Result<()> {
    let bem = cfg.bem()?;
    let a = bem.oracle.radius;
    let sources = match mesh {
        Some(path) => {
            let mesh = read_mesh(path, cfg.io.unit_scale)?;
            if ears_present(&mesh).is_empty() {
                return Err(CliError::Usage(format!(
                    "{}: no ear labels",
                    path.display()
                )));
            }
            cap_sources(&mesh, a)?
        }
        None => {
            let alpha = bem.oracle.cap_half_angle_deg.to_radians();
            if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
                return Err(CliError::Usage(
                    "bem.oracle.cap_half_angle_deg must lie in (0, 180)".into(),
                ));
            }
            let area = 2.0 * std::f64::consts::PI * a * a * (1.0 - alpha.cos());
            [(Ear::Left, 1.0), (Ear::Right, -1.0)]
                .into_iter()
                .map(|(e, side)| {
                    (
                        e,
                        SphereSource {
                            position: Vec3::new(0.0, side * a, 0.0),
                            volume_velocity: area,
                            cap_half_angle: alpha,
                        },
                    )
                })
                .collect()
        }
    };
    let set = sphere_oracle(a, &sources, &bem.acoustic, &bem.grid, bem.oracle.terms)
        .map_err(domain("oracle"))?;
    let set = attach_hrir(set, bem.hrir.as_ref())?;
    save_hrtf_json(&set, output, cfg.io.hrtf_encoding)
        .map_err(domain(format!("writing {}", output.display())))?;
    println!(
        "frequencies={} directions={} ears={}",
        set.frequencies.len(),
        set.directions.len(),
        set.ears.len()
    );
    Ok(())
}

fn read_hrtf(path: &Path, hrir: Option<&HrirSpec>) -> Result<HrtfSet> {
    let set = load_hrtf_json(path).map_err(usage(format!("HRTF {}", path.display())))?;
    match (hrir, &set.impulse) {
        (Some(h), None) => match hrtf_to_hrir(&set, h.sample_rate, h.taps) {
            Ok(s) => Ok(s),
            Err(e) => {
                log::warn!(
                    "{}: no impulse responses derived ({e}); ITD skipped",
                    path.display()
                );
                Ok(set)
            }
        },
        _ => Ok(set),
    }
}

pub fn eval(
    cfg: &PipelineConfig,
    reference: &Path,
    tests: &[std::path::PathBuf],
    labels: &[String],
    subject: Option<String>,
    reference_tag: String,
    out_dir: &Path,
) -> Result<()> {
    if !labels.is_empty() && labels.len() != tests.len() {
        return Err(CliError::Usage(format!(
            "{} labels for {} tests",
            labels.len(),
            tests.len()
        )));
    }
    let hrir = cfg.bem.as_ref().and_then(|b| b.hrir.as_ref());
    let reference_set = read_hrtf(reference, hrir)?;
    let mut reports = Vec::with_capacity(tests.len());
    for (i, path) in tests.iter().enumerate() {
        let label = match labels.get(i) {
            Some(l) => l.clone(),
            None => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("test{i}")),
        };
        let test = read_hrtf(path, hrir)?;
        let cc = cfg
            .metrics
            .compare_config(subject.clone(), label.clone(), reference_tag.clone());
        let report = compare(&test, &reference_set, &cc)
            .map_err(domain(format!("comparing {}", path.display())))?;
        let m = &report.metadata;
        log::info!(
            "{label}: {} frequency bins, {} directions matched, {} test and {} reference directions dropped",
            m.frequency_bins,
            m.matched_directions,
            m.dropped_test_directions,
            m.dropped_reference_directions
        );
        println!(
            "condition={label} lsd_summary_db={:.4} frequency_bins={} matched_directions={} excluded_bins={}",
            report.lsd.summary_db, m.frequency_bins, m.matched_directions, report.lsd.excluded_bins
        );
        reports.push(report);
    }
    let files = emit_report(&reports, out_dir).map_err(domain("report"))?;
    println!(
        "csv={} svg={} json={}",
        files.csv.display(),
        files.svg.display(),
        files.json.display()
    );
    Ok(())
}
