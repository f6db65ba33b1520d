//! Training behavior: overfitting, determinism, model files.

use hrtf_core::{shapes, validate, Vec3};
use hrtf_subdiv::params::DEFAULT_HIDDEN;
use hrtf_subdiv::{train, upsample, SubdivError, SubdivNetParams, TrainConfig, TrainingPair};

fn sphere_pair() -> TrainingPair {
    TrainingPair {
        coarse: shapes::icosphere(1, 1.0),
        truth: shapes::icosphere(3, 1.0),
    }
}

#[test]
fn overfits_a_single_pair() {
    let params = SubdivNetParams::new_random(16, &DEFAULT_HIDDEN, 2, 7);
    let cfg = TrainConfig {
        epochs: 200,
        learning_rate: 1e-3,
        ..Default::default()
    };
    let out = train(&[sphere_pair()], params, &cfg, |_, _| {}).unwrap();
    let first = out.history[0].mean_loss;
    let last = out.history.last().unwrap().mean_loss;
    assert!(last < 0.1 * first, "first {first:e}, last {last:e}");

    let refined = upsample(&out.params, &sphere_pair().coarse, 2, Some(&sphere_pair().truth)).unwrap();
    assert!(validate(&refined.mesh).is_closed_sphere());
}

#[test]
fn training_is_thread_count_independent() {
    let pairs = [
        sphere_pair(),
        TrainingPair {
            coarse: shapes::ellipsoid(1, Vec3::new(1.0, 0.8, 0.6)),
            truth: shapes::ellipsoid(3, Vec3::new(1.0, 0.8, 0.6)),
        },
    ];
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 2,
        seed: 99,
        ..Default::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let init = SubdivNetParams::new_random(8, &[16, 16], 2, 3);
        pool.install(|| train(&pairs, init, &cfg, |_, _| {}).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.params.to_bytes(), b.params.to_bytes());
    let bits = |o: &hrtf_subdiv::TrainOutcome| o.history.iter().map(|s| s.mean_loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn model_file_round_trip_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.nsub");
    let p = SubdivNetParams::new_random(8, &[16], 2, 1);
    p.save(&path).unwrap();
    assert_eq!(SubdivNetParams::load(&path).unwrap(), p);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[..8].copy_from_slice(b"NSUBDIV2");
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(SubdivNetParams::load(&path), Err(SubdivError::ModelFormat(_))));

    // Header claims feature_dim 9 while the networks are sized for 8.
    let mut bytes = p.to_bytes();
    bytes[8..12].copy_from_slice(&9u32.to_le_bytes());
    assert!(matches!(SubdivNetParams::from_bytes(&bytes), Err(SubdivError::ModelFormat(_))));

    assert!(matches!(SubdivNetParams::load(dir.path().join("missing")), Err(SubdivError::Io { .. })));
}

#[test]
fn zero_model_upsample_is_midpoint_subdivision() {
    let p = SubdivNetParams::zeros(8, &[16], 2);
    let m = shapes::ellipsoid(1, Vec3::new(0.09, 0.07, 0.11));
    let out = upsample(&p, &m, 2, None).unwrap().mesh;
    let expect = hrtf_subdiv::midpoint_subdivide(&hrtf_subdiv::midpoint_subdivide(&m).unwrap()).unwrap();
    assert_eq!(out, expect);
}
