//! Feature pooling: `subs` (window average with a trainable coefficient and
//! bias per map) and Lp-pooling `O = (sum G |I|^P)^(1/P)` with a normalized
//! Gaussian `G` over each window.

use serde::{Deserialize, Serialize};

use super::tensor::{FeatureStack, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoolingKind {
    Subs,
    /// Lp-pooling with P = 2.
    L2Pool,
}

impl PoolingKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolingKind::Subs => "subs",
            PoolingKind::L2Pool => "l2pool",
        }
    }
}

impl std::str::FromStr for PoolingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subs" => Ok(PoolingKind::Subs),
            "l2pool" => Ok(PoolingKind::L2Pool),
            other => Err(Error::InvalidArgument(format!("unknown pooling `{other}` (subs | l2pool)"))),
        }
    }
}

/// Exponent of an Lp pool; `Infinite` is the window maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PNorm {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsampling {
    pub size: usize,
    pub coeff: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Subsampling {
    pub fn new(maps: usize, size: usize) -> Self {
        Self {
            size,
            coeff: vec![1.0; maps],
            bias: vec![0.0; maps],
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        if input.maps != self.coeff.len() {
            return Err(Error::Shape(format!(
                "subsampling has {} coefficients for {} maps",
                self.coeff.len(),
                input.maps
            )));
        }
        if self.size == 0 || input.height % self.size != 0 || input.width % self.size != 0 {
            return Err(Error::Shape(format!(
                "{}x{} map is not divisible into {s}x{s} windows",
                input.height,
                input.width,
                s = self.size
            )));
        }
        Ok(Shape::new(input.maps, input.height / self.size, input.width / self.size))
    }

    fn window_means(&self, x: &FeatureStack, out_shape: Shape) -> FeatureStack {
        let s = self.size;
        let w = x.shape().width;
        let inv = 1.0 / (s * s) as f64;
        let mut avg = FeatureStack::zeros(out_shape);
        for i in 0..out_shape.maps {
            let input = x.map(i);
            let out = avg.map_mut(i);
            for oy in 0..out_shape.height {
                for ox in 0..out_shape.width {
                    let mut acc = 0.0;
                    for dy in 0..s {
                        let row = &input[(oy * s + dy) * w + ox * s..][..s];
                        acc += row.iter().sum::<f64>();
                    }
                    out[oy * out_shape.width + ox] = acc * inv;
                }
            }
        }
        avg
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        let out_shape = self.output_shape(x.shape())?;
        let mut y = self.window_means(x, out_shape);
        for i in 0..out_shape.maps {
            let (c, b) = (self.coeff[i], self.bias[i]);
            y.map_mut(i).iter_mut().for_each(|v| *v = c * *v + b);
        }
        Ok(y)
    }

    pub fn backward(&self, x: &FeatureStack, dy: &FeatureStack, grads: &mut [Vec<f64>]) -> FeatureStack {
        let out_shape = dy.shape();
        let avg = self.window_means(x, out_shape);
        let s = self.size;
        let w = x.shape().width;
        let inv = 1.0 / (s * s) as f64;
        let mut dx = FeatureStack::zeros(x.shape());
        for i in 0..out_shape.maps {
            let g = dy.map(i);
            grads[0][i] += g.iter().zip(avg.map(i)).map(|(a, b)| a * b).sum::<f64>();
            grads[1][i] += g.iter().sum::<f64>();
            let scale = self.coeff[i] * inv;
            let d = dx.map_mut(i);
            for oy in 0..out_shape.height {
                for ox in 0..out_shape.width {
                    let v = g[oy * out_shape.width + ox] * scale;
                    for ddy in 0..s {
                        d[(oy * s + ddy) * w + ox * s..][..s].iter_mut().for_each(|a| *a = v);
                    }
                }
            }
        }
        dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpPool {
    pub size: usize,
    pub stride: usize,
    pub p: PNorm,
    /// Window weights, row-major `size x size`, non-negative, summing to 1.
    pub gaussian: Vec<f64>,
}

impl LpPool {
    /// Gaussian window with sigma = size / 2 centred on the window.
    pub fn new(size: usize, stride: usize, p: PNorm) -> Self {
        let sigma = size as f64 / 2.0;
        let c = (size as f64 - 1.0) / 2.0;
        let g1: Vec<f64> = (0..size)
            .map(|k| (-(k as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        let raw: Vec<f64> = g1.iter().flat_map(|a| g1.iter().map(move |b| a * b)).collect();
        let s: f64 = raw.iter().sum();
        Self {
            size,
            stride,
            p,
            gaussian: raw.into_iter().map(|v| v / s).collect(),
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        let fits = self.size > 0 && self.stride > 0 && self.size <= input.height && self.size <= input.width;
        if !fits || (input.height - self.size) % self.stride != 0 || (input.width - self.size) % self.stride != 0 {
            return Err(Error::Shape(format!(
                "{s}x{s} windows with stride {} do not tile a {}x{} map",
                self.stride,
                input.height,
                input.width,
                s = self.size
            )));
        }
        Ok(Shape::new(
            input.maps,
            (input.height - self.size) / self.stride + 1,
            (input.width - self.size) / self.stride + 1,
        ))
    }

    fn window<'a>(&self, input: &'a [f64], w: usize, oy: usize, ox: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        let (s, st) = (self.size, self.stride);
        (0..s * s).map(move |k| {
            let idx = (oy * st + k / s) * w + ox * st + k % s;
            (idx, input[idx])
        })
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        let out_shape = self.output_shape(x.shape())?;
        let w = x.shape().width;
        let mut y = FeatureStack::zeros(out_shape);
        for i in 0..out_shape.maps {
            let input = x.map(i);
            for oy in 0..out_shape.height {
                for ox in 0..out_shape.width {
                    let v = match self.p {
                        PNorm::Infinite => self.window(input, w, oy, ox).map(|(_, v)| v.abs()).fold(0.0, f64::max),
                        PNorm::Finite(p) => {
                            let s: f64 = self
                                .window(input, w, oy, ox)
                                .zip(&self.gaussian)
                                .map(|((_, v), g)| g * pow_abs(v, p))
                                .sum();
                            root(s, p)
                        }
                    };
                    y.set(i, oy, ox, v);
                }
            }
        }
        Ok(y)
    }

    pub fn backward(&self, x: &FeatureStack, dy: &FeatureStack) -> FeatureStack {
        let out_shape = dy.shape();
        let w = x.shape().width;
        let mut dx = FeatureStack::zeros(x.shape());
        for i in 0..out_shape.maps {
            let input = x.map(i);
            let g = dy.map(i);
            for oy in 0..out_shape.height {
                for ox in 0..out_shape.width {
                    let go = g[oy * out_shape.width + ox];
                    let d = dx.map_mut(i);
                    match self.p {
                        PNorm::Infinite => {
                            let (idx, v) = self
                                .window(input, w, oy, ox)
                                .fold((usize::MAX, -1.0), |best, (k, v)| if v.abs() > best.1 { (k, v.abs()) } else { best });
                            if idx != usize::MAX && v > 0.0 {
                                d[idx] += go * input[idx].signum();
                            }
                        }
                        PNorm::Finite(p) => {
                            let s: f64 = self
                                .window(input, w, oy, ox)
                                .zip(&self.gaussian)
                                .map(|((_, v), g)| g * pow_abs(v, p))
                                .sum();
                            if p == 1.0 {
                                for ((k, v), gw) in self.window(input, w, oy, ox).zip(&self.gaussian) {
                                    d[k] += go * gw * sign(v);
                                }
                            } else if s > 0.0 {
                                // dO/dI = S^(1/P - 1) G |I|^(P-1) sign(I)
                                let outer = s.powf(1.0 / p - 1.0);
                                for ((k, v), gw) in self.window(input, w, oy, ox).zip(&self.gaussian) {
                                    d[k] += go * outer * gw * pow_abs(v, p - 1.0) * sign(v);
                                }
                            }
                        }
                    }
                }
            }
        }
        dx
    }
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

fn root(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
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
