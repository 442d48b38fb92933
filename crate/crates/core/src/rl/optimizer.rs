//! RMSprop with the plain (uncentered, momentum-free) update rule.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::RlError;

/// Optimizer hyperparameters. Defaults follow the experiments: learning rate
/// 0.01, smoothing 0.99, epsilon 1e-8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    /// Exponential smoothing factor of the squared-gradient accumulator.
    pub alpha: f64,
    /// Added to the root of the accumulator to avoid division by zero.
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { learning_rate: 0.01, alpha: 0.99, eps: 1e-8 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        for (name, value) in [
            ("learning_rate", self.learning_rate),
            ("eps", self.eps),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(RlError::ConfigInvalid(alloc::format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(RlError::ConfigInvalid(alloc::format!(
                "alpha {} outside [0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// RMSprop state: a per-parameter running average of squared gradients,
/// initialized to zeros.
///
/// Each update performs, element-wise,
/// `s <- alpha * s + (1 - alpha) * g^2` then
/// `p <- p - lr * g / (sqrt(s) + eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    config: OptimizerConfig,
    square_avg: Vec<f64>,
    steps: u64,
}

impl RmsProp {
    pub fn new(config: OptimizerConfig, n_params: usize) -> Self {
        RmsProp { config, square_avg: vec![0.0; n_params], steps: 0 }
    }

    /// Restore from a checkpointed accumulator.
    pub fn from_state(config: OptimizerConfig, square_avg: Vec<f64>, steps: u64) -> Self {
        RmsProp { config, square_avg, steps }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn square_avg(&self) -> &[f64] {
        &self.square_avg
    }

    /// Gradient-bearing updates performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Apply one update in place. A non-finite gradient entry aborts with the
    /// optimizer step index before any parameter is touched.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), RlError> {
        if params.len() != self.square_avg.len() || grads.len() != self.square_avg.len() {
            return Err(RlError::ShapeMismatch {
                expected: self.square_avg.len(),
                got: if params.len() != self.square_avg.len() { params.len() } else { grads.len() },
            });
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(RlError::NonFiniteGradient { step: self.steps, index });
        }
        let OptimizerConfig { learning_rate, alpha, eps } = self.config;
        for ((p, s), &g) in params.iter_mut().zip(&mut self.square_avg).zip(grads) {
            *s = alpha * *s + (1.0 - alpha) * g * g;
            *p -= learning_rate * g / (libm::sqrt(*s) + eps);
        }
        self.steps += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut opt = RmsProp::new(OptimizerConfig::default(), 3);
        let mut params = [1.0, -2.0, 0.5];
        opt.update(&mut params, &[0.0; 3]).unwrap();
        assert_eq!(params, [1.0, -2.0, 0.5]);
        assert_eq!(opt.steps(), 1);
    }

    #[test]
    fn first_unit_gradient_step_matches_the_closed_form() {
        // s = 0.99*0 + 0.01*1 = 0.01; delta = -0.01 * 1 / (0.1 + 1e-8).
        let mut opt = RmsProp::new(OptimizerConfig::default(), 1);
        let mut params = [0.0];
        opt.update(&mut params, &[1.0]).unwrap();
        assert_abs_diff_eq!(opt.square_avg()[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(params[0], -0.01 / (0.1 + 1e-8), epsilon = 1e-15);
        assert_abs_diff_eq!(params[0], -0.09999999, epsilon = 1e-9);
    }

    #[test]
    fn repeated_equal_gradients_shrink_the_step() {
        // Oracle: run the recurrence directly and compare each delta.
        let mut opt = RmsProp::new(OptimizerConfig::default(), 1);
        let mut params = [0.0];
        let mut previous = f64::INFINITY;
        let mut s_oracle = 0.0f64;
        let mut p_oracle = 0.0f64;
        for _ in 0..5 {
            let before = params[0];
            opt.update(&mut params, &[1.0]).unwrap();
            let delta = (params[0] - before).abs();
            assert!(delta < previous, "step sizes must shrink: {delta} vs {previous}");
            previous = delta;

            s_oracle = 0.99 * s_oracle + 0.01;
            p_oracle -= 0.01 / (s_oracle.sqrt() + 1e-8);
            assert_abs_diff_eq!(params[0], p_oracle, epsilon = 1e-15);
        }
    }

    #[test]
    fn non_finite_gradients_abort_with_the_step_index() {
        let mut opt = RmsProp::new(OptimizerConfig::default(), 2);
        let mut params = [1.0, 1.0];
        opt.update(&mut params, &[0.1, 0.1]).unwrap();
        let err = opt.update(&mut params, &[0.1, f64::NAN]).unwrap_err();
        assert_eq!(err, RlError::NonFiniteGradient { step: 1, index: 1 });
        // The failed call must not have moved anything.
        let expected = 1.0 - 0.01 * 0.1 / ((0.01f64 * 0.1 * 0.1).sqrt() + 1e-8);
        assert_abs_diff_eq!(params[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let mut opt = RmsProp::new(OptimizerConfig::default(), 2);
        let mut params = [0.0, 0.0];
        assert_eq!(
            opt.update(&mut params, &[1.0]),
            Err(RlError::ShapeMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn invalid_hyperparameters_fail_validation() {
        let bad = OptimizerConfig { learning_rate: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { alpha: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(OptimizerConfig::default().validate().is_ok());
    }
}
