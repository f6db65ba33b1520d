//! Loss gradients and the deterministic training loop.

use std::fmt::Write as _;
use std::time::Instant;

use hrtf_core::{TargetSurface, TriangleMesh};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::{adam_step, AdamState};
use crate::config::TrainConfig;
use crate::error::{Result, SubdivError};
use crate::loss::{assign_faces, loss_with_faces};
use crate::model::{backward_pass, check_input, forward};
use crate::params::SubdivNetParams;

#[derive(Debug, Clone)]
pub struct Gradient {
    pub loss: f64,
    pub grad: SubdivNetParams,
    /// Truth face assigned to each output vertex.
    pub faces: Vec<usize>,
}

/// Loss value and parameter gradients for one coarse/truth pair.
///
/// A prediction with non-finite vertices gives a NaN loss and a zero gradient.
pub fn backward(
    params: &SubdivNetParams,
    coarse: &TriangleMesh,
    levels: usize,
    truth: &TargetSurface,
    cfg: &TrainConfig,
) -> Result<Gradient> {
    let pass = forward(params, coarse, levels)?;
    if pass.mesh.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return Ok(Gradient {
            loss: f64::NAN,
            grad: params.zeros_like(),
            faces: Vec::new(),
        });
    }
    let faces = assign_faces(&pass.mesh, truth, cfg.max_normal_angle_deg);
    let l = loss_with_faces(&pass.mesh.vertices, &truth.mesh, &faces, cfg);
    let grad = backward_pass(params, &pass, &l.grad)?;
    Ok(Gradient {
        loss: l.value,
        grad,
        faces,
    })
}

/// As [`backward`] with a caller-supplied face assignment.
pub fn backward_with_faces(
    params: &SubdivNetParams,
    coarse: &TriangleMesh,
    levels: usize,
    truth: &TriangleMesh,
    faces: &[usize],
    cfg: &TrainConfig,
) -> Result<Gradient> {
    let pass = forward(params, coarse, levels)?;
    check_face_count(faces, &pass.mesh)?;
    let l = loss_with_faces(&pass.mesh.vertices, truth, faces, cfg);
    let grad = backward_pass(params, &pass, &l.grad)?;
    Ok(Gradient {
        loss: l.value,
        grad,
        faces: faces.to_vec(),
    })
}

/// Loss value only, with a fixed face assignment.
pub fn loss_with_fixed_faces(
    params: &SubdivNetParams,
    coarse: &TriangleMesh,
    levels: usize,
    truth: &TriangleMesh,
    faces: &[usize],
    cfg: &TrainConfig,
) -> Result<f64> {
    let pass = forward(params, coarse, levels)?;
    check_face_count(faces, &pass.mesh)?;
    Ok(loss_with_faces(&pass.mesh.vertices, truth, faces, cfg).value)
}

fn check_face_count(faces: &[usize], mesh: &TriangleMesh) -> Result<()> {
    if faces.len() == mesh.vertex_count() {
        Ok(())
    } else {
        Err(SubdivError::DimensionMismatch(format!(
            "{} assigned faces for {} vertices",
            faces.len(),
            mesh.vertex_count()
        )))
    }
}

#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub coarse: TriangleMesh,
    pub truth: TriangleMesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean over pairs of the loss seen during the epoch.
    pub mean_loss: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: SubdivNetParams,
    pub history: Vec<EpochStats>,
    pub optimizer: AdamState,
}

/// Mini-batch Adam over `pairs` for `cfg.epochs` epochs. `observer` sees each
/// epoch's statistics and the parameters after it.
///
/// Pair order is reshuffled every epoch from a ChaCha8 stream seeded with
/// `cfg.seed`. Results do not depend on the rayon thread count.
pub fn train(
    pairs: &[TrainingPair],
    init: SubdivNetParams,
    cfg: &TrainConfig,
    mut observer: impl FnMut(&EpochStats, &SubdivNetParams),
) -> Result<TrainOutcome> {
    cfg.check()?;
    init.check()?;
    if pairs.is_empty() {
        return Err(SubdivError::NoPairs);
    }
    let mut targets = Vec::with_capacity(pairs.len());
    for p in pairs {
        check_input(&p.coarse)?;
        targets.push(TargetSurface::new(p.truth.clone())?);
    }
    let levels = init.levels;
    let mut params = init;
    let mut optimizer = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut losses = vec![0.0; pairs.len()];
        for batch in order.chunks(cfg.batch_size) {
            let mut acc = params.zeros_like();
            for &pi in batch {
                let g = backward(&params, &pairs[pi].coarse, levels, &targets[pi], cfg)?;
                if !g.loss.is_finite() {
                    return Err(SubdivError::NonFiniteLoss { epoch, pair: pi });
                }
                losses[pi] = g.loss;
                acc.add_assign(&g.grad);
            }
            acc.scale(1.0 / batch.len() as f64);
            adam_step(&mut params, &acc, &mut optimizer, cfg)?;
        }
        let stats = EpochStats {
            epoch,
            mean_loss: losses.iter().sum::<f64>() / pairs.len() as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        log::debug!("epoch {epoch}: mean loss {:.6e}", stats.mean_loss);
        observer(&stats, &params);
        history.push(stats);
    }
    Ok(TrainOutcome {
        params,
        history,
        optimizer,
    })
}

/// Training log with one `epoch,mean_loss,wall_seconds` row per epoch.
pub fn training_log_csv(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch,mean_loss,wall_seconds\n");
    for s in history {
        let _ = writeln!(out, "{},{:e},{:.6}", s.epoch, s.mean_loss, s.wall_seconds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrtf_core::{shapes, Vec3};

    fn pair() -> TrainingPair {
        TrainingPair {
            coarse: shapes::icosahedron(),
            truth: shapes::icosphere(2, 1.0),
        }
    }

    fn small_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            learning_rate: 1e-3,
            ..Default::default()
        }
    }

    #[test]
    fn zero_hausdorff_weight_on_surface_gives_zero_gradient() {
        // The zero network reproduces the truth exactly.
        let coarse = shapes::icosahedron();
        let truth = crate::model::midpoint_subdivide(&coarse).unwrap();
        let p = SubdivNetParams::zeros(4, &[8], 1);
        let target = TargetSurface::new(truth).unwrap();
        let cfg = TrainConfig {
            hausdorff_weight: 0.0,
            ..Default::default()
        };
        let g = backward(&p, &coarse, 1, &target, &cfg).unwrap();
        assert!(g.loss.abs() < 1e-20);
        assert!(g.grad.params().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn doubling_weights_doubles_gradients() {
        let p = SubdivNetParams::new_random(4, &[8], 1, 2);
        let coarse = shapes::icosahedron();
        let target = TargetSurface::new(shapes::icosphere(2, 1.0)).unwrap();
        let cfg = TrainConfig::default();
        let twice = TrainConfig {
            chamfer_weight: 2.0,
            hausdorff_weight: 0.2,
            ..cfg.clone()
        };
        let a = backward(&p, &coarse, 1, &target, &cfg).unwrap();
        let b = backward(&p, &coarse, 1, &target, &twice).unwrap();
        assert_eq!(a.faces, b.faces);
        for (x, y) in a.grad.params().zip(b.grad.params()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_loss_constant() {
        let p = SubdivNetParams::new_random(4, &[8], 1, 3);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..small_cfg(4)
        };
        let out = train(&[pair()], p.clone(), &cfg, |_, _| {}).unwrap();
        assert_eq!(out.params, p);
        let first = out.history[0].mean_loss;
        assert!(out.history.iter().all(|s| s.mean_loss == first));
    }

    #[test]
    fn same_seed_same_history() {
        let p = SubdivNetParams::new_random(4, &[8], 1, 4);
        let pairs = [pair(), TrainingPair { coarse: shapes::ellipsoid(0, Vec3::new(1.0, 0.8, 0.7)), truth: shapes::ellipsoid(2, Vec3::new(1.0, 0.8, 0.7)) }];
        let cfg = TrainConfig { batch_size: 2, ..small_cfg(3) };
        let a = train(&pairs, p.clone(), &cfg, |_, _| {}).unwrap();
        let b = train(&pairs, p, &cfg, |_, _| {}).unwrap();
        let la: Vec<u64> = a.history.iter().map(|s| s.mean_loss.to_bits()).collect();
        let lb: Vec<u64> = b.history.iter().map(|s| s.mean_loss.to_bits()).collect();
        assert_eq!(la, lb);
        assert_eq!(a.params.to_bytes(), b.params.to_bytes());
    }

    #[test]
    fn empty_pairs_and_bad_config_rejected() {
        let p = SubdivNetParams::new_random(4, &[8], 1, 4);
        assert!(matches!(train(&[], p.clone(), &small_cfg(1), |_, _| {}), Err(SubdivError::NoPairs)));
        let bad = TrainConfig { learning_rate: -1.0, ..small_cfg(1) };
        assert!(matches!(train(&[pair()], p, &bad, |_, _| {}), Err(SubdivError::InvalidConfig(_))));
    }

    #[test]
    fn non_finite_loss_names_epoch_and_pair() {
        let mut p = SubdivNetParams::new_random(4, &[8], 1, 4);
        p.edge_net.layers.last_mut().unwrap().bias[0] = f64::INFINITY;
        let err = train(&[pair()], p, &small_cfg(2), |_, _| {}).unwrap_err();
        assert!(matches!(err, SubdivError::NonFiniteLoss { epoch: 1, pair: 0 }), "{err}");
    }

    #[test]
    fn csv_log_has_one_row_per_epoch() {
        let h = vec![
            EpochStats { epoch: 1, mean_loss: 0.5, wall_seconds: 0.25 },
            EpochStats { epoch: 2, mean_loss: 0.25, wall_seconds: 0.5 },
        ];
        let csv = training_log_csv(&h);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("epoch,mean_loss,wall_seconds\n1,5e-1,"));
    }
}
