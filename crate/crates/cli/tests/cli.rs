//! End-to-end runs of the `hrtf-forge` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hrtf_bem::{load_hrtf_json, save_hrtf_json, Encoding};
use hrtf_core::io::{load_obj, save_obj};
use hrtf_core::{midpoint_subdivide, shapes, validate, Region, Vec3};
use hrtf_subdiv::SubdivNetParams;

const A: f64 = 0.0875;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrtf-forge"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn labeled_sphere(dir: &Path, level: usize) -> PathBuf {
    let mesh = hrtf_bem::label_patches(
        shapes::icosphere(level, A),
        &[
            (Region::LeftEar, Vec3::new(0.0, A, 0.0)),
            (Region::RightEar, Vec3::new(0.0, -A, 0.0)),
        ],
        0.02,
    )
    .unwrap();
    let p = dir.join(format!("sphere{level}.obj"));
    save_obj(&mesh, &p).unwrap();
    p
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("ico.obj");
    save_obj(&shapes::icosphere(2, 1.0), &closed).unwrap();
    let out = forge(&["validate", s(&closed)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("genus: 0"));

    let open = write(
        dir.path(),
        "fan.obj",
        "v 0 0 0\nv 1 0 0\nv 0 1 0\nv -1 0 0\nf 1 2 3\nf 1 3 4\n",
    );
    let out = forge(&["validate", s(&open)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("boundary_edges: 4"));

    assert_eq!(
        code(&forge(&["validate", s(&dir.path().join("missing.obj"))])),
        2
    );
    let junk = write(dir.path(), "junk.obj", "v 0 0\nf 1 2 3\n");
    assert_eq!(code(&forge(&["validate", s(&junk)])), 2);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = labeled_sphere(dir.path(), 1);
    let out_path = dir.path().join("o.json");
    let typo = write(
        dir.path(),
        "typo.json",
        r#"{"bem": {"acoustic": {"frequncies": [500]}}}"#,
    );
    let out = forge(&[
        "solve",
        "--config",
        s(&typo),
        "--mesh",
        s(&mesh),
        "--output",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("frequncies"));
    let no_section = write(dir.path(), "empty.json", "{}");
    let out = forge(&[
        "solve",
        "--config",
        s(&no_section),
        "--mesh",
        s(&mesh),
        "--output",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bem"));
    assert_eq!(
        code(&forge(&[
            "solve",
            "--mesh",
            s(&mesh),
            "--output",
            s(&out_path)
        ])),
        2
    );
    assert_eq!(code(&forge(&["frobnicate"])), 2);
    assert!(!out_path.exists());
}

#[test]
fn prep_sphere_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.obj");
    save_obj(&shapes::icosphere(3, A), &raw).unwrap();
    let cfg = write(
        dir.path(),
        "prep.json",
        r#"{"prep": {
            "cut_plane": {"point": [0, 0, -0.06], "normal": [0, 0, 1]},
            "ear_markers": {"left": [0, 0.0875, 0], "right": [0, -0.0875, 0], "radius": 0.015},
            "grading": {"h_min": 0.004, "h_max": 0.012, "iterations": 3}
        }}"#,
    );
    let a = dir.path().join("a.obj");
    let b = dir.path().join("b.obj");
    let out = forge(&[
        "prep",
        "--config",
        s(&cfg),
        "--input",
        s(&raw),
        "--output",
        s(&a),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for stage in [
        "stage=load",
        "stage=cleanup",
        "stage=behead",
        "stage=grade",
        "stage=label",
    ] {
        assert!(text.contains(stage), "{text}");
    }
    let mesh = load_obj(&a).unwrap();
    assert!(validate(&mesh).is_closed_sphere());
    assert!(!mesh.faces_with_label(Region::LeftEar).is_empty());
    assert!(!mesh.faces_with_label(Region::RightEar).is_empty());
    assert!(mesh.bounding_box().0.z > -0.06 - 1e-9);

    assert_eq!(
        code(&forge(&[
            "prep",
            "--config",
            s(&cfg),
            "--input",
            s(&raw),
            "--output",
            s(&b)
        ])),
        0
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let no_markers = write(dir.path(), "nomark.json", r#"{"prep": {"grade": false}}"#);
    let out = forge(&[
        "prep",
        "--config",
        s(&no_markers),
        "--input",
        s(&raw),
        "--output",
        s(&b),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ear_markers"), "{}", stderr(&out));
}

fn train_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let axes = [
        Vec3::new(1.0, 0.9, 0.8),
        Vec3::new(0.8, 1.0, 0.9),
        Vec3::new(0.9, 0.8, 1.1),
    ];
    let mut entries = Vec::new();
    for (i, ax) in axes.iter().enumerate() {
        save_obj(&shapes::ellipsoid(1, *ax), dir.join(format!("c{i}.obj"))).unwrap();
        save_obj(&shapes::ellipsoid(3, *ax), dir.join(format!("f{i}.obj"))).unwrap();
        let split = if i == 2 { "val" } else { "train" };
        entries.push(format!(
            r#"{{"id": "s{i}", "low_res_mesh_path": "c{i}.obj", "high_res_mesh_path": "f{i}.obj", "split": "{split}"}}"#
        ));
    }
    let manifest = write(
        dir,
        "manifest.json",
        &format!(r#"{{"subjects": [{}]}}"#, entries.join(",")),
    );
    let cfg = write(
        dir,
        "train.json",
        r#"{"seed": 4, "model": {"feature_dim": 8, "hidden": [16], "levels": 2, "train": {"epochs": 3, "batch_size": 2}}}"#,
    );
    (manifest, cfg)
}

#[test]
fn train_writes_model_and_loss_history() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, cfg) = train_fixture(dir.path());
    let m1 = dir.path().join("m1.nsub");
    let m2 = dir.path().join("m2.nsub");
    let out = forge(&[
        "train",
        "--config",
        s(&cfg),
        "--manifest",
        s(&manifest),
        "--output",
        s(&m1),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("val_hausdorff=").count(), 3);
    let csv = std::fs::read_to_string(dir.path().join("m1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(csv.lines().next().unwrap(), "epoch,mean_loss,val_hausdorff");

    let out = forge(&[
        "train",
        "--config",
        s(&cfg),
        "--manifest",
        s(&manifest),
        "--output",
        s(&m2),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("m1.csv")).unwrap(),
        std::fs::read(dir.path().join("m2.csv")).unwrap()
    );

    let empty = write(dir.path(), "empty.json", r#"{"subjects": []}"#);
    assert_eq!(
        code(&forge(&[
            "train",
            "--config",
            s(&cfg),
            "--manifest",
            s(&empty),
            "--output",
            s(&m2)
        ])),
        2
    );
}

#[test]
fn train_skips_non_genus_zero_pairs() {
    let dir = tempfile::tempdir().unwrap();
    save_obj(&shapes::torus(12, 8, 1.0, 0.3), dir.path().join("t.obj")).unwrap();
    save_obj(&shapes::torus(24, 16, 1.0, 0.3), dir.path().join("T.obj")).unwrap();
    let manifest = write(
        dir.path(),
        "m.json",
        r#"{"subjects": [{"id": "torus", "low_res_mesh_path": "t.obj", "high_res_mesh_path": "T.obj", "split": "train"}]}"#,
    );
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model": {"train": {"epochs": 1}}}"#,
    );
    let out = forge(&[
        "train",
        "--config",
        s(&cfg),
        "--manifest",
        s(&manifest),
        "--output",
        s(&dir.path().join("m.nsub")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("skipped"));
}

#[test]
fn upsample_zero_model_is_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("zero.nsub");
    SubdivNetParams::zeros(8, &[16], 2).save(&model).unwrap();
    let coarse = shapes::ellipsoid(1, Vec3::new(1.0, 0.8, 0.6));
    let input = dir.path().join("in.obj");
    save_obj(&coarse, &input).unwrap();
    let truth = dir.path().join("truth.obj");
    save_obj(&shapes::ellipsoid(3, Vec3::new(1.0, 0.8, 0.6)), &truth).unwrap();
    let output = dir.path().join("out.obj");
    let out = forge(&[
        "upsample",
        "--model",
        s(&model),
        "--input",
        s(&input),
        "--output",
        s(&output),
        "--truth",
        s(&truth),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("hausdorff_symmetric="));
    let got = load_obj(&output).unwrap();
    assert_eq!(got.face_count(), 16 * coarse.face_count());
    let want = midpoint_subdivide(&midpoint_subdivide(&coarse).mesh).mesh;
    assert_eq!(got.faces, want.faces);
    for (a, b) in got.vertices.iter().zip(&want.vertices) {
        assert!((a - b).norm() < 1e-12);
    }
}

fn solve_config(dir: &Path) -> PathBuf {
    write(
        dir,
        "solve.json",
        r#"{"bem": {"acoustic": {"frequencies": [1000, 2000, 3000], "chief_point_count": 8},
                    "hrir": {"sample_rate": 6000, "taps": 6}}}"#,
    )
}

#[test]
fn solve_sphere_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = labeled_sphere(dir.path(), 2);
    let cfg = solve_config(dir.path());
    let output = dir.path().join("h.json");
    let out = forge(&[
        "solve",
        "--config",
        s(&cfg),
        "--mesh",
        s(&mesh),
        "--output",
        s(&output),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // 320 faces are too coarse for 3 kHz at six elements per wavelength.
    assert!(stderr(&out).contains("level=WARN"), "{}", stderr(&out));
    assert_eq!(stdout(&out).matches("oracle_delta").count(), 3);
    let set = load_hrtf_json(&output).unwrap();
    assert_eq!(set.directions.len(), 360);
    assert_eq!(set.frequencies, vec![1000.0, 2000.0, 3000.0]);
    assert_eq!(set.ears.len(), 2);
    assert_eq!(set.impulse.as_ref().unwrap().taps, 6);

    let misfit = write(
        dir.path(),
        "misfit.json",
        r#"{"bem": {"acoustic": {"frequencies": [500, 1500]}, "hrir": {"sample_rate": 8000, "taps": 16}}}"#,
    );
    let out = forge(&[
        "solve",
        "--config",
        s(&misfit),
        "--mesh",
        s(&mesh),
        "--output",
        s(&output),
    ]);
    assert_eq!(code(&out), 2);

    let bare = dir.path().join("bare.obj");
    save_obj(&shapes::icosphere(2, A), &bare).unwrap();
    let out = forge(&[
        "solve",
        "--config",
        s(&cfg),
        "--mesh",
        s(&bare),
        "--output",
        s(&output),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_sphere_is_deterministic_and_checks_terms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"bem": {"acoustic": {"frequencies": [500, 1000, 1500, 2000]}, "hrir": {"sample_rate": 4000, "taps": 8}}}"#,
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(
        code(&forge(&[
            "oracle-sphere",
            "--config",
            s(&cfg),
            "--output",
            s(&a)
        ])),
        0
    );
    assert_eq!(
        code(&forge(&[
            "oracle-sphere",
            "--config",
            s(&cfg),
            "--output",
            s(&b)
        ])),
        0
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let set = load_hrtf_json(&a).unwrap();
    assert_eq!(set.impulse.as_ref().unwrap().taps, 8);

    let short = write(
        dir.path(),
        "short.json",
        r#"{"bem": {"acoustic": {"frequencies": [500]}, "oracle": {"terms": 4}}}"#,
    );
    let out = forge(&["oracle-sphere", "--config", s(&short), "--output", s(&a)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("terms"), "{}", stderr(&out));
}

#[test]
fn eval_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"bem": {"acoustic": {"frequencies": [250, 500, 750, 1000, 1250, 1500, 1750, 2000]},
                    "grid": {"directions": [{"az": 0, "el": 0}, {"az": 90, "el": 0}, {"az": 270, "el": 0}], "radius": 1.2},
                    "hrir": {"sample_rate": 8000, "taps": 32}},
            "metrics": {"lsd_band": [200, 2000], "ild_band": [200, 2000]}}"#,
    );
    let reference = dir.path().join("ref.json");
    assert_eq!(
        code(&forge(&[
            "oracle-sphere",
            "--config",
            s(&cfg),
            "--output",
            s(&reference)
        ])),
        0
    );

    // Louder copy on a finer grid with slightly shifted directions.
    let mut louder = load_hrtf_json(&reference).unwrap();
    louder.values.iter_mut().for_each(|v| *v *= 2.0);
    louder.directions[1].az = 91.0;
    let loud_path = dir.path().join("loud.json");
    save_hrtf_json(&louder, &loud_path, Encoding::Inline).unwrap();

    let out_dir = dir.path().join("report");
    let out = forge(&[
        "eval",
        "--config",
        s(&cfg),
        "--reference",
        s(&reference),
        "--test",
        s(&reference),
        "--test",
        s(&loud_path),
        "--label",
        "self",
        "--label",
        "louder",
        "--subject",
        "P1",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("condition=self lsd_summary_db=0.0000"));
    assert!(stdout(&out).contains("condition=louder lsd_summary_db=6.0206"));
    assert!(stderr(&out).contains("frequency bins"));
    let svg = std::fs::read_to_string(out_dir.join("lsd.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    let csv = std::fs::read_to_string(out_dir.join("lsd.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("frequency_hz,self (P1),louder (P1)\n"));
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(json.contains("\"direction_weighting\": \"uniform\""));

    let out = forge(&[
        "eval",
        "--reference",
        s(&reference),
        "--test",
        s(&reference),
        "--label",
        "a",
        "--label",
        "b",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 2);
}
