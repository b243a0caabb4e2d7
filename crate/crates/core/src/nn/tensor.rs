use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub maps: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(maps: usize, height: usize, width: usize) -> Self {
        Self { maps, height, width }
    }

    pub fn len(&self) -> usize {
        self.maps * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane(&self) -> usize {
        self.height * self.width
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.maps, self.height, self.width)
    }
}

/// A stack of `maps` two-dimensional feature maps, stored map-major then
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    shape: Shape,
    data: Vec<f64>,
}

impl FeatureStack {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Shape(format!("feature stack dimensions must be positive, got {shape}")));
        }
        if data.len() != shape.len() {
            return Err(Error::Shape(format!("{} values for a {shape} stack", data.len())));
        }
        Ok(Self { shape, data })
    }

    /// A single map holding 8-bit pixels scaled to [0, 1].
    pub fn from_pixels(side: usize, pixels: &[u8]) -> Result<Self> {
        Self::from_vec(
            Shape::new(1, side, side),
            pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
        )
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, i: usize) -> &[f64] {
        let n = self.shape.plane();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn map_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.shape.plane();
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn get(&self, map: usize, row: usize, col: usize) -> f64 {
        self.data[(map * self.shape.height + row) * self.shape.width + col]
    }

    pub fn set(&mut self, map: usize, row: usize, col: usize, value: f64) {
        self.data[(map * self.shape.height + row) * self.shape.width + col] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
