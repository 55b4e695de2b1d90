//! AdamW: Adam with bias-corrected moments and decoupled weight decay.
//!
//! ```text
//! θ ← θ − lr·λ·θ
//! m ← β₁·m + (1 − β₁)·g
//! v ← β₂·v + (1 − β₂)·g²
//! θ ← θ − lr · m̂ / (√v̂ + ε),   m̂ = m / (1 − β₁ᵗ),  v̂ = v / (1 − β₂ᵗ)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    pub steps: usize,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            steps: 300,
        }
    }
}

impl AdamWConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(invalid(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(invalid(format!("weight_decay must be >= 0, got {}", self.weight_decay)));
        }
        Ok(())
    }
}

/// Moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    name: String,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
}

impl AdamWState {
    /// Zeroed state for a tensor of `len` parameters; `name` labels errors.
    pub fn new(name: impl Into<String>, len: usize) -> Self {
        Self {
            name: name.into(),
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }

    /// `m / (1 − β₁ᵗ)` at the current step.
    pub fn bias_corrected_first_moment(&self, cfg: &AdamWConfig) -> Vec<f64> {
        let c = 1.0 - cfg.beta1.powi(self.step_count as i32);
        self.first_moment.iter().map(|m| m / c).collect()
    }
}

/// One in-place AdamW update of `params`.
pub fn adamw_step(params: &mut [f64], grads: &[f64], state: &mut AdamWState, cfg: &AdamWConfig) -> Result<()> {
    cfg.validate()?;
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(invalid(format!(
            "shape mismatch for {}: {} params, {} grads, {} state entries",
            state.name,
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            tensor: format!("gradient of {}", state.name),
        });
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let decay = cfg.learning_rate * cfg.weight_decay;

    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        *p -= decay * *p;
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lr: f64, wd: f64) -> AdamWConfig {
        AdamWConfig {
            learning_rate: lr,
            weight_decay: wd,
            ..AdamWConfig::default()
        }
    }

    #[test]
    fn zero_grad_no_decay_is_identity() {
        let mut p = vec![1.0, -2.0, 3.5];
        let mut s = AdamWState::new("p", 3);
        for _ in 0..5 {
            adamw_step(&mut p, &[0.0; 3], &mut s, &cfg(0.1, 0.0)).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
        assert_eq!(s.step_count(), 5);
    }

    #[test]
    fn first_step_closed_form() {
        let mut p = vec![1.0];
        let mut s = AdamWState::new("p", 1);
        adamw_step(&mut p, &[2.0], &mut s, &cfg(0.1, 0.0)).unwrap();
        let expected = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-10);
        assert!((p[0] - 0.9).abs() < 1e-8);
    }

    #[test]
    fn decoupled_decay_at_zero_grad() {
        let mut p = vec![1.0];
        let mut s = AdamWState::new("p", 1);
        adamw_step(&mut p, &[0.0], &mut s, &cfg(0.1, 0.1)).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-10);
    }

    #[test]
    fn errors() {
        let mut s = AdamWState::new("logits", 2);
        let mut p = vec![0.0, 0.0];
        assert!(matches!(
            adamw_step(&mut p, &[1.0], &mut s, &cfg(0.1, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
        let err = adamw_step(&mut p, &[1.0, f64::NAN], &mut s, &cfg(0.1, 0.0)).unwrap_err();
        assert!(err.to_string().contains("logits"), "{err}");
        assert_eq!(s.step_count(), 0);
        let bad = AdamWConfig {
            beta1: 1.0,
            ..AdamWConfig::default()
        };
        assert!(adamw_step(&mut p, &[1.0, 1.0], &mut s, &bad).is_err());
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut p = vec![0.3; 4];
        let mut s = AdamWState::new("p", 4);
        for i in 0..50 {
            let g: Vec<f64> = (0..4).map(|k| ((i * 7 + k) as f64).sin()).collect();
            adamw_step(&mut p, &g, &mut s, &cfg(0.01, 0.01)).unwrap();
            assert!(s.second_moment().iter().all(|v| *v >= 0.0));
        }
    }
}
