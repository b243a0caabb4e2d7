//! Local subtractive and divisive normalization.
//!
//! Both use a normalized, truncated Gaussian window that pools over the
//! spatial neighbourhood and over all maps (the map sum is divided by the
//! map count). Near the borders the window is clipped to the map and its
//! remaining weights re-normalized to sum to one, so the output keeps the
//! input size.

use serde::{Deserialize, Serialize};

use super::tensor::{FeatureStack, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWindow {
    /// Odd side length.
    pub side: usize,
    pub sigma: f64,
}

impl GaussianWindow {
    pub fn new(side: usize, sigma: f64) -> Result<Self> {
        if side % 2 == 0 || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "normalization window needs an odd side and positive sigma, got {side} / {sigma}"
            )));
        }
        Ok(Self { side, sigma })
    }

    /// The 1-D profile `g`, normalized to sum 1; the 2-D window is `g g^T`.
    pub fn profile(&self) -> Vec<f64> {
        let r = (self.side / 2) as f64;
        let raw: Vec<f64> = (0..self.side)
            .map(|k| {
                let d = k as f64 - r;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }

    /// Full 2-D weights `w_pq`, row-major.
    pub fn weights(&self) -> Vec<f64> {
        let g = self.profile();
        g.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect()
    }
}

/// Separable clipped blur along one axis: for each position, the in-range
/// taps and their re-normalized weights.
struct Blur1d {
    taps: Vec<Vec<(usize, f64)>>,
}

impl Blur1d {
    fn new(len: usize, profile: &[f64]) -> Self {
        let r = (profile.len() / 2) as isize;
        let taps = (0..len as isize)
            .map(|pos| {
                let mut t: Vec<(usize, f64)> = (-r..=r)
                    .filter_map(|d| {
                        let src = pos + d;
                        (0..len as isize)
                            .contains(&src)
                            .then(|| (src as usize, profile[(d + r) as usize]))
                    })
                    .collect();
                let s: f64 = t.iter().map(|x| x.1).sum();
                t.iter_mut().for_each(|x| x.1 /= s);
                t
            })
            .collect();
        Self { taps }
    }
}

/// The linear operator `A`: average over maps, then 2-D clipped blur.
struct LocalMean {
    rows: Blur1d,
    cols: Blur1d,
    height: usize,
    width: usize,
}

impl LocalMean {
    fn new(shape: Shape, window: &GaussianWindow) -> Self {
        let g = window.profile();
        Self {
            rows: Blur1d::new(shape.height, &g),
            cols: Blur1d::new(shape.width, &g),
            height: shape.height,
            width: shape.width,
        }
    }

    /// Blurs one plane.
    fn apply(&self, plane: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut tmp = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                tmp[y * w + x] = self.cols.taps[x].iter().map(|&(s, c)| c * plane[y * w + s]).sum();
            }
        }
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            for &(s, c) in &self.rows.taps[y] {
                for x in 0..w {
                    out[y * w + x] += c * tmp[s * w + x];
                }
            }
        }
        out
    }

    /// Adjoint of `apply`.
    fn apply_transpose(&self, plane: &[f64]) -> Vec<f64> {
        let (h, w) = (self.height, self.width);
        let mut tmp = vec![0.0; h * w];
        for y in 0..h {
            for &(s, c) in &self.rows.taps[y] {
                for x in 0..w {
                    tmp[s * w + x] += c * plane[y * w + x];
                }
            }
        }
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                let g = tmp[y * w + x];
                for &(s, c) in &self.cols.taps[x] {
                    out[y * w + s] += c * g;
                }
            }
        }
        out
    }
}

fn map_mean(x: &FeatureStack, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let shape = x.shape();
    let mut acc = vec![0.0; shape.plane()];
    for i in 0..shape.maps {
        for (a, &v) in acc.iter_mut().zip(x.map(i)) {
            *a += f(v);
        }
    }
    let inv = 1.0 / shape.maps as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

/// `v_ijk = x_ijk - sum_{i,p,q} w_pq x_{i,j+p,k+q} / n_maps`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtractiveNorm {
    pub window: GaussianWindow,
}

impl SubtractiveNorm {
    pub fn forward(&self, x: &FeatureStack) -> FeatureStack {
        let op = LocalMean::new(x.shape(), &self.window);
        let mean = op.apply(&map_mean(x, |v| v));
        let mut v = x.clone();
        for i in 0..x.shape().maps {
            v.map_mut(i).iter_mut().zip(&mean).for_each(|(a, m)| *a -= m);
        }
        v
    }

    pub fn backward(&self, dv: &FeatureStack) -> FeatureStack {
        let op = LocalMean::new(dv.shape(), &self.window);
        let back = op.apply_transpose(&map_mean(dv, |v| v));
        let mut dx = dv.clone();
        for i in 0..dv.shape().maps {
            dx.map_mut(i).iter_mut().zip(&back).for_each(|(a, b)| *a -= b);
        }
        dx
    }
}

/// `y_ijk = v_ijk / max(mean(sigma), sigma_jk, epsilon)` with
/// `sigma_jk = sqrt(sum_{i,p,q} w_pq v^2_{i,j+p,k+q} / n_maps)` and the mean
/// taken over all spatial positions of the stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisiveNorm {
    pub window: GaussianWindow,
    pub epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 1e-4;

enum Denominator {
    Local,
    Mean,
    Floor,
}

struct DivisiveState {
    sigma: Vec<f64>,
    denom: Vec<f64>,
    source: Vec<Denominator>,
}

impl DivisiveNorm {
    fn state(&self, v: &FeatureStack, op: &LocalMean) -> DivisiveState {
        let sigma: Vec<f64> = op.apply(&map_mean(v, |a| a * a)).into_iter().map(|s| s.max(0.0).sqrt()).collect();
        let mean = sigma.iter().sum::<f64>() / sigma.len() as f64;
        let (denom, source) = sigma
            .iter()
            .map(|&s| {
                if s >= mean && s >= self.epsilon {
                    (s, Denominator::Local)
                } else if mean >= self.epsilon {
                    (mean, Denominator::Mean)
                } else {
                    (self.epsilon, Denominator::Floor)
                }
            })
            .unzip();
        DivisiveState { sigma, denom, source }
    }

    pub fn forward(&self, v: &FeatureStack) -> FeatureStack {
        let op = LocalMean::new(v.shape(), &self.window);
        let st = self.state(v, &op);
        let mut y = v.clone();
        for i in 0..v.shape().maps {
            y.map_mut(i).iter_mut().zip(&st.denom).for_each(|(a, d)| *a /= d);
        }
        y
    }

    pub fn backward(&self, v: &FeatureStack, dy: &FeatureStack) -> FeatureStack {
        let shape = v.shape();
        let op = LocalMean::new(shape, &self.window);
        let st = self.state(v, &op);
        let plane = shape.plane();

        // dE/d(denominator) at each position.
        let mut g_denom = vec![0.0; plane];
        for i in 0..shape.maps {
            for (k, (&g, &a)) in dy.map(i).iter().zip(v.map(i)).enumerate() {
                g_denom[k] -= g * a / (st.denom[k] * st.denom[k]);
            }
        }
        let mut g_sigma = vec![0.0; plane];
        let mut g_mean = 0.0;
        for k in 0..plane {
            match st.source[k] {
                Denominator::Local => g_sigma[k] += g_denom[k],
                Denominator::Mean => g_mean += g_denom[k],
                Denominator::Floor => {}
            }
        }
        let share = g_mean / plane as f64;
        // sigma = sqrt(s2): d sigma / d s2 = 1 / (2 sigma).
        let g_s2: Vec<f64> = g_sigma
            .iter()
            .zip(&st.sigma)
            .map(|(&g, &s)| if s > 0.0 { (g + share) / (2.0 * s) } else { 0.0 })
            .collect();
        let g_sq = op.apply_transpose(&g_s2);
        let inv_maps = 1.0 / shape.maps as f64;

        let mut dv = dy.clone();
        for i in 0..shape.maps {
            let vi = v.map(i);
            for (k, d) in dv.map_mut(i).iter_mut().enumerate() {
                *d = *d / st.denom[k] + g_sq[k] * inv_maps * 2.0 * vi[k];
            }
        }
        dv
    }
}
