use serde::{Deserialize, Serialize};

use super::tensor::FeatureStack;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonlinearityKind {
    Tanh,
    RectifiedSigmoid,
}

/// Pointwise `tanh(x)`, or `|g_i tanh(x)|` with one trainable gain per map.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    Tanh,
    RectifiedSigmoid { gains: Vec<f64> },
}

impl Nonlinearity {
    pub fn rectified(maps: usize) -> Self {
        Nonlinearity::RectifiedSigmoid { gains: vec![1.0; maps] }
    }

    pub fn kind(&self) -> NonlinearityKind {
        match self {
            Nonlinearity::Tanh => NonlinearityKind::Tanh,
            Nonlinearity::RectifiedSigmoid { .. } => NonlinearityKind::RectifiedSigmoid,
        }
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        let mut y = x.clone();
        match self {
            Nonlinearity::Tanh => y.as_mut_slice().iter_mut().for_each(|v| *v = v.tanh()),
            Nonlinearity::RectifiedSigmoid { gains } => {
                if gains.len() != x.shape().maps {
                    return Err(Error::Shape(format!(
                        "{} gains for {} maps",
                        gains.len(),
                        x.shape().maps
                    )));
                }
                for (i, &g) in gains.iter().enumerate() {
                    y.map_mut(i).iter_mut().for_each(|v| *v = (g * v.tanh()).abs());
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &FeatureStack, dy: &FeatureStack, grads: &mut [Vec<f64>]) -> FeatureStack {
        let mut dx = dy.clone();
        match self {
            Nonlinearity::Tanh => {
                for (d, &v) in dx.as_mut_slice().iter_mut().zip(x.as_slice()) {
                    let t = v.tanh();
                    *d *= 1.0 - t * t;
                }
            }
            Nonlinearity::RectifiedSigmoid { gains } => {
                for (i, &g) in gains.iter().enumerate() {
                    let mut dg = 0.0;
                    for (d, &v) in dx.map_mut(i).iter_mut().zip(x.map(i)) {
                        let t = v.tanh();
                        // d|s|/ds with subgradient 0 at s = 0.
                        let sign = sign(g * t);
                        dg += *d * sign * t;
                        *d *= sign * g * (1.0 - t * t);
                    }
                    grads[0][i] += dg;
                }
            }
        }
        dx
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::tensor::Shape;

    #[test]
    fn examples() {
        let zero = FeatureStack::from_vec(Shape::new(1, 1, 1), vec![0.0]).unwrap();
        assert_eq!(Nonlinearity::Tanh.forward(&zero).unwrap().as_slice(), &[0.0]);

        let x = FeatureStack::from_vec(Shape::new(1, 1, 1), vec![0.5f64.atanh()]).unwrap();
        let rect = Nonlinearity::RectifiedSigmoid { gains: vec![-2.0] };
        assert!((rect.forward(&x).unwrap().as_slice()[0] - 1.0).abs() < 1e-15);

        let xs = FeatureStack::from_vec(Shape::new(2, 2, 2), (0..8).map(|v| v as f64 - 4.5).collect()).unwrap();
        let rect = Nonlinearity::RectifiedSigmoid { gains: vec![0.7, -1.3] };
        assert!(rect.forward(&xs).unwrap().as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_activation_has_zero_subgradient() {
        let x = FeatureStack::from_vec(Shape::new(1, 1, 2), vec![0.0, 1.0]).unwrap();
        let dy = FeatureStack::from_vec(Shape::new(1, 1, 2), vec![1.0, 1.0]).unwrap();
        let rect = Nonlinearity::rectified(1);
        let mut grads = vec![vec![0.0]];
        let dx = rect.backward(&x, &dy, &mut grads);
        assert_eq!(dx.as_slice()[0], 0.0);
        assert!(dx.as_slice()[1] > 0.0);
    }
}
