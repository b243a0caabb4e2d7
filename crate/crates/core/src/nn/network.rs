//! A feed-forward stack of layers with reverse-mode gradients.

use rand::Rng;

use super::conv::Conv;
use super::full::FullLayer;
use super::loss::{mse_gradient, mse_loss};
use super::nonlin::Nonlinearity;
use super::norm::{DivisiveNorm, SubtractiveNorm};
use super::pool::{LpPool, Subsampling};
use super::tensor::{FeatureStack, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(Conv),
    Nonlin(Nonlinearity),
    SubNorm(SubtractiveNorm),
    DivNorm(DivisiveNorm),
    Subs(Subsampling),
    LpPool(LpPool),
    Full(FullLayer),
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Nonlin(Nonlinearity::Tanh) => "tanh",
            Layer::Nonlin(Nonlinearity::RectifiedSigmoid { .. }) => "rectified-sigmoid",
            Layer::SubNorm(_) => "subtractive-norm",
            Layer::DivNorm(_) => "divisive-norm",
            Layer::Subs(_) => "subs-pool",
            Layer::LpPool(_) => "lp-pool",
            Layer::Full(_) => "full",
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        match self {
            Layer::Conv(c) => c.output_shape(input),
            Layer::Nonlin(Nonlinearity::RectifiedSigmoid { gains }) if gains.len() != input.maps => Err(
                Error::Shape(format!("{} gains for {} maps", gains.len(), input.maps)),
            ),
            Layer::Nonlin(_) | Layer::SubNorm(_) | Layer::DivNorm(_) => Ok(input),
            Layer::Subs(p) => p.output_shape(input),
            Layer::LpPool(p) => p.output_shape(input),
            Layer::Full(f) => f.output_shape(input),
        }
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        match self {
            Layer::Conv(c) => c.forward(x),
            Layer::Nonlin(n) => n.forward(x),
            Layer::SubNorm(n) => Ok(n.forward(x)),
            Layer::DivNorm(n) => Ok(n.forward(x)),
            Layer::Subs(p) => p.forward(x),
            Layer::LpPool(p) => p.forward(x),
            Layer::Full(f) => f.forward(x),
        }
    }

    /// Accumulates parameter gradients into `grads` and returns `dE/dx`
    /// (`None` only for a first conv layer, whose input gradient is unused).
    fn backward(
        &self,
        x: &FeatureStack,
        y: &FeatureStack,
        dy: &FeatureStack,
        grads: &mut [Vec<f64>],
        want_input_grad: bool,
    ) -> Option<FeatureStack> {
        match self {
            Layer::Conv(c) => c.backward(x, dy, grads, want_input_grad),
            Layer::Nonlin(n) => Some(n.backward(x, dy, grads)),
            Layer::SubNorm(n) => Some(n.backward(dy)),
            Layer::DivNorm(n) => Some(n.backward(x, dy)),
            Layer::Subs(p) => Some(p.backward(x, dy, grads)),
            Layer::LpPool(p) => Some(p.backward(x, dy)),
            Layer::Full(f) => Some(f.backward(x, y, dy, grads)),
        }
    }

    /// Trainable tensors in a fixed order.
    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Conv(c) => vec![&c.kernels, &c.bias],
            Layer::Nonlin(Nonlinearity::RectifiedSigmoid { gains }) => vec![gains],
            Layer::Subs(p) => vec![&p.coeff, &p.bias],
            Layer::Full(f) => vec![&f.weights, &f.theta],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Conv(c) => vec![&mut c.kernels, &mut c.bias],
            Layer::Nonlin(Nonlinearity::RectifiedSigmoid { gains }) => vec![gains],
            Layer::Subs(p) => vec![&mut p.coeff, &mut p.bias],
            Layer::Full(f) => vec![&mut f.weights, &mut f.theta],
            _ => Vec::new(),
        }
    }

    /// Logical dimensions of each tensor in `params`.
    pub fn param_dims(&self) -> Vec<Vec<usize>> {
        match self {
            Layer::Conv(c) => vec![
                vec![c.table.outputs(), c.table.inputs(), c.kh, c.kw],
                vec![c.table.outputs()],
            ],
            Layer::Nonlin(Nonlinearity::RectifiedSigmoid { gains }) => vec![vec![gains.len()]],
            Layer::Subs(p) => vec![vec![p.coeff.len()], vec![p.bias.len()]],
            Layer::Full(f) => vec![vec![f.outputs, f.inputs], vec![f.outputs]],
            _ => Vec::new(),
        }
    }

    /// Number of parameters that influence the output (unconnected kernel
    /// slots excluded).
    pub fn effective_param_count(&self) -> usize {
        match self {
            Layer::Conv(c) => c.table.pairs().len() * c.kh * c.kw + c.bias.len(),
            _ => self.params().iter().map(|p| p.len()).sum(),
        }
    }
}

/// Layer inputs and outputs recorded by a forward pass;
/// `activations[0]` is the network input, `activations[k + 1]` the output of
/// layer `k`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<FeatureStack>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(|a| a.as_slice()).unwrap_or(&[])
    }
}

/// Per-layer, per-tensor partial derivatives shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffers {
    pub layers: Vec<Vec<Vec<f64>>>,
}

impl GradientBuffers {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| l.params().iter().map(|p| vec![0.0; p.len()]).collect())
                .collect(),
        }
    }

    pub fn clear(&mut self) {
        self.layers.iter_mut().flatten().for_each(|g| g.fill(0.0));
    }

    pub fn matches(&self, net: &Network) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                let p = l.params();
                g.len() == p.len() && g.iter().zip(&p).all(|(a, b)| a.len() == b.len())
            })
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flatten().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input: Shape,
    pub layers: Vec<Layer>,
}

impl Network {
    /// Checks the shape chain from `input` through every layer.
    pub fn new(input: Shape, layers: Vec<Layer>) -> Result<Self> {
        let mut shape = input;
        for (k, layer) in layers.iter().enumerate() {
            shape = layer
                .output_shape(shape)
                .map_err(|e| Error::Shape(format!("layer {k} ({}): {e}", layer.name())))?;
        }
        Ok(Self { input, layers })
    }

    pub fn input_shape(&self) -> Shape {
        self.input
    }

    pub fn output_shape(&self) -> Shape {
        self.layers
            .iter()
            .try_fold(self.input, |s, l| l.output_shape(s))
            .expect("shape chain checked at construction")
    }

    fn check_input(&self, x: &FeatureStack) -> Result<()> {
        if x.shape() != self.input {
            return Err(Error::Shape(format!(
                "network expects {} input, got {}",
                self.input,
                x.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.forward(&a)?;
        }
        Ok(a.into_vec())
    }

    pub fn forward_trace(&self, x: &FeatureStack) -> Result<Trace> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("non-empty"))?;
            activations.push(next);
        }
        Ok(Trace { activations })
    }

    /// Loss for one pattern and its gradient with respect to every parameter.
    pub fn backward(&self, trace: &Trace, target: &[f64]) -> Result<(f64, GradientBuffers)> {
        let mut grads = GradientBuffers::zeros_like(self);
        let loss = self.backward_into(trace, target, &mut grads)?;
        Ok((loss, grads))
    }

    /// As `backward`, accumulating into existing buffers.
    pub fn backward_into(&self, trace: &Trace, target: &[f64], grads: &mut GradientBuffers) -> Result<f64> {
        if trace.activations.len() != self.layers.len() + 1 {
            return Err(Error::MissingForwardState(format!(
                "trace holds {} activations, network needs {}",
                trace.activations.len(),
                self.layers.len() + 1
            )));
        }
        if !grads.matches(self) {
            return Err(Error::Shape("gradient buffers do not mirror the network parameters".into()));
        }
        let y = trace.output();
        let loss = mse_loss(y, target)?;
        let out = trace.activations.last().expect("non-empty");
        let mut dy = FeatureStack::from_vec(out.shape(), mse_gradient(y, target)?)?;
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.activations[k];
            let yk = &trace.activations[k + 1];
            match layer.backward(x, yk, &dy, &mut grads.layers[k], k > 0) {
                Some(dx) => dy = dx,
                None => break,
            }
        }
        Ok(loss)
    }

    pub fn loss(&self, x: &FeatureStack, target: &[f64]) -> Result<f64> {
        mse_loss(&self.forward(x)?, target)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::effective_param_count).sum()
    }

    /// Weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`; biases 0; gains and
    /// pooling coefficients 1.
    pub fn initialize<R: Rng>(&mut self, rng: &mut R) {
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) => {
                    let kk = c.kh * c.kw;
                    for j in 0..c.table.outputs() {
                        let r = 1.0 / ((c.table.fan_in(j) * kk) as f64).sqrt();
                        for i in 0..c.table.inputs() {
                            let o = (j * c.table.inputs() + i) * kk;
                            let connected = c.table.is_connected(i, j);
                            for v in &mut c.kernels[o..o + kk] {
                                *v = if connected { rng.random_range(-r..r) } else { 0.0 };
                            }
                        }
                    }
                    c.bias.fill(0.0);
                }
                Layer::Nonlin(Nonlinearity::RectifiedSigmoid { gains }) => gains.fill(1.0),
                Layer::Subs(p) => {
                    p.coeff.fill(1.0);
                    p.bias.fill(0.0);
                }
                Layer::Full(f) => {
                    let r = 1.0 / (f.inputs as f64).sqrt();
                    f.weights.iter_mut().for_each(|v| *v = rng.random_range(-r..r));
                    f.theta.fill(0.0);
                }
                _ => {}
            }
        }
    }

    /// Every parameter drawn from `U(lo, hi)`.
    pub fn randomize<R: Rng>(&mut self, lo: f64, hi: f64, rng: &mut R) {
        for layer in &mut self.layers {
            for p in layer.params_mut() {
                p.iter_mut().for_each(|v| *v = rng.random_range(lo..hi));
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.params().iter().all(|p| p.iter().all(|v| v.is_finite())))
    }
}
