//! Fully connected classifier layer: `u_j = sum_k x_k w_jk - theta_j`,
//! `y_j = f(u_j)`.

use serde::{Deserialize, Serialize};

use super::tensor::{dot, FeatureStack, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    /// `1 / (1 + exp(-beta u))`
    Sigmoid { beta: f64 },
    Tanh,
}

impl Activation {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Activation::Sigmoid { beta } => 1.0 / (1.0 + (-beta * u).exp()),
            Activation::Tanh => u.tanh(),
        }
    }

    /// Derivative expressed through the output `y = f(u)`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid { beta } => beta * y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `[outputs][inputs]`.
    pub weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub activation: Activation,
}

impl FullLayer {
    pub fn new(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            theta: vec![0.0; outputs],
            activation,
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        if input.len() != self.inputs {
            return Err(Error::Shape(format!(
                "fully connected layer expects {} inputs, got {} ({input})",
                self.inputs,
                input.len()
            )));
        }
        Ok(Shape::new(self.outputs, 1, 1))
    }

    /// Forward pass on a flat vector.
    pub fn forward_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs {
            return Err(Error::Shape(format!(
                "fully connected layer expects {} inputs, got {}",
                self.inputs,
                x.len()
            )));
        }
        Ok((0..self.outputs)
            .map(|j| {
                let u = dot(&self.weights[j * self.inputs..(j + 1) * self.inputs], x) - self.theta[j];
                self.activation.apply(u)
            })
            .collect())
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        let shape = self.output_shape(x.shape())?;
        FeatureStack::from_vec(shape, self.forward_vec(x.as_slice())?)
    }

    pub fn backward(
        &self,
        x: &FeatureStack,
        y: &FeatureStack,
        dy: &FeatureStack,
        grads: &mut [Vec<f64>],
    ) -> FeatureStack {
        let xs = x.as_slice();
        let mut dx = FeatureStack::zeros(x.shape());
        for j in 0..self.outputs {
            let delta = dy.as_slice()[j] * self.activation.derivative_from_output(y.as_slice()[j]);
            let row = j * self.inputs..(j + 1) * self.inputs;
            for (g, &v) in grads[0][row.clone()].iter_mut().zip(xs) {
                *g += delta * v;
            }
            grads[1][j] -= delta;
            for (d, &w) in dx.as_mut_slice().iter_mut().zip(&self.weights[row]) {
                *d += delta * w;
            }
        }
        dx
    }
}
