//! Plain stochastic gradient descent with inverse-time learning-rate decay.

use serde::{Deserialize, Serialize};

use super::network::{GradientBuffers, Network};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub eta0: f64,
    pub decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 >= 0.0 && self.eta0.is_finite()) || !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} and decay {} must be finite and non-negative",
                self.eta0, self.decay
            )));
        }
        Ok(())
    }

    /// `eta0 / (1 + decay * t)`
    pub fn learning_rate(&self, t: usize) -> f64 {
        self.eta0 / (1.0 + self.decay * t as f64)
    }
}

/// `W <- W - lr * dE/dW` for every parameter.
pub fn sgd_step(net: &mut Network, grads: &GradientBuffers, lr: f64) -> Result<()> {
    if !grads.matches(net) {
        return Err(Error::Shape("gradient buffers do not mirror the network parameters".into()));
    }
    if lr == 0.0 {
        return Ok(());
    }
    for (layer, g) in net.layers.iter_mut().zip(&grads.layers) {
        for (p, g) in layer.params_mut().into_iter().zip(g) {
            for (w, d) in p.iter_mut().zip(g) {
                *w -= lr * d;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_examples() {
        let cfg = TrainConfig { eta0: 0.1, decay: 0.1, epochs: 1, seed: 0 };
        assert!((cfg.learning_rate(10) - 0.05).abs() < 1e-15);
        let flat = TrainConfig { decay: 0.0, ..cfg };
        assert!((0..50).all(|t| flat.learning_rate(t) == 0.1));
    }

    proptest! {
        #[test]
        fn schedule_is_non_increasing(eta0 in 0.0f64..1.0, decay in 0.0f64..2.0, t in 0usize..1000) {
            let cfg = TrainConfig { eta0, decay, epochs: 1, seed: 0 };
            prop_assert!(cfg.learning_rate(t + 1) <= cfg.learning_rate(t));
            prop_assert!(cfg.learning_rate(t) >= 0.0);
        }
    }
}
