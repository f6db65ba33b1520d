use crate::config::TrainConfig;
use crate::error::{Result, SubdivError};
use crate::params::SubdivNetParams;

/// First and second moment estimates, flattened in parameter storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &SubdivNetParams) -> Self {
        let n = params.param_count();
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(
    params: &mut SubdivNetParams,
    grads: &SubdivNetParams,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    let n = params.param_count();
    if grads.param_count() != n || state.m.len() != n || state.v.len() != n {
        return Err(SubdivError::DimensionMismatch(format!(
            "adam: {n} parameters, {} gradients, {} moments",
            grads.param_count(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((p, g), m), v) in params
        .params_mut()
        .zip(grads.params())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps_adam);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::Mlp;

    /// Tiny container whose first parameter is `p`; the rest are zero.
    fn scalar(p: f64) -> SubdivNetParams {
        let mut s = SubdivNetParams {
            init_net: Mlp::zeros(&[1, 1]),
            vertex_net: Mlp::zeros(&[1, 1]),
            edge_net: Mlp::zeros(&[1, 1]),
            feature_dim: 0,
            levels: 0,
        };
        s.init_net.layers[0].weights[0] = p;
        s
    }

    fn first(s: &SubdivNetParams) -> f64 {
        s.init_net.layers[0].weights[0]
    }

    fn cfg(lr: f64) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            ..Default::default()
        }
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let mut p = scalar(1.0);
        let g = scalar(1.0);
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &g, &mut st, &cfg(0.1)).unwrap();
        assert!((first(&p) - 0.9).abs() < 1e-6);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn two_steps_match_hand_trace() {
        let (lr, b1, b2, eps) = (0.1, 0.9, 0.999, 1e-8);
        let mut p = scalar(1.0);
        let mut st = AdamState::new(&p);
        let grads = [1.0, -0.5];
        let (mut x, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
        for (t, g) in grads.iter().enumerate() {
            adam_step(&mut p, &scalar(*g), &mut st, &cfg(lr)).unwrap();
            let t = (t + 1) as i32;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            x -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
        }
        // By hand: m = 0.04, v = 0.001249, so the second update is 0.1 · 0.2105263 / 0.7904509.
        assert!((m - 0.04).abs() < 1e-15);
        assert!((v - 0.001249).abs() < 1e-15);
        assert!((first(&p) - x).abs() < 1e-15);
        assert!((first(&p) - 0.8733663).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_leaves_fresh_parameters_and_decays_moments() {
        let mut p = scalar(0.7);
        let zero = scalar(0.0);
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &zero, &mut st, &cfg(0.1)).unwrap();
        assert_eq!(first(&p), 0.7);

        st.m[0] = 0.5;
        st.v[0] = 0.25;
        adam_step(&mut p, &zero, &mut st, &cfg(0.1)).unwrap();
        assert_eq!(st.m[0], 0.9 * 0.5);
        assert_eq!(st.v[0], 0.999 * 0.25);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = SubdivNetParams::zeros(4, &[8], 1);
        let g = SubdivNetParams::zeros(2, &[8], 1);
        let mut st = AdamState::new(&p);
        assert!(adam_step(&mut p, &g, &mut st, &cfg(0.1)).is_err());
    }
}
