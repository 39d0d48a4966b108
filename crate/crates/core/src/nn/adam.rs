use super::{shapes_match, zeros_for, Gradients, LayerParams, NetworkParams};
use crate::{Error, Result};

/// Adam moment estimates for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Vec<LayerParams>,
    second_moment: Vec<LayerParams>,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    /// Fresh state with the usual `(0.9, 0.999, 1e-8)` hyperparameters.
    pub fn new(params: &NetworkParams) -> Self {
        Self::with_hyperparameters(
            params,
            Self::DEFAULT_BETA1,
            Self::DEFAULT_BETA2,
            Self::DEFAULT_EPSILON,
        )
    }

    pub fn with_hyperparameters(
        params: &NetworkParams,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            first_moment: zeros_for(params.arch()),
            second_moment: zeros_for(params.arch()),
            step_count: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> impl Iterator<Item = &f64> {
        self.first_moment.iter().flat_map(LayerParams::values)
    }

    pub fn second_moment(&self) -> impl Iterator<Item = &f64> {
        self.second_moment.iter().flat_map(LayerParams::values)
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut NetworkParams, grads: &Gradients, lr: f64) -> Result<()> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {lr}")));
        }
        if !shapes_match(&params.layers, &grads.layers)
            || !shapes_match(&params.layers, &self.first_moment)
        {
            return Err(Error::invalid("parameter, gradient and optimizer shapes disagree"));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let m_correction = 1.0 - b1.powi(t);
        let v_correction = 1.0 - b2.powi(t);

        let p = params.values_mut();
        let g = grads.values();
        let m = self.first_moment.iter_mut().flat_map(LayerParams::values_mut);
        let v = self.second_moment.iter_mut().flat_map(LayerParams::values_mut);
        for (((p, &g), m), v) in p.zip(g).zip(m).zip(v) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / m_correction;
            let v_hat = *v / v_correction;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    state.step(params, grads, lr)
}
