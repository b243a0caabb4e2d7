//! Filter bank layer: `y_j = b_j + sum_i k_ij * x_i` over the connected
//! (input, output) pairs, computed as valid cross-correlation (no kernel
//! flip, no padding).

use serde::{Deserialize, Serialize};

use super::tensor::{axpy, dot, FeatureStack, Shape};
use crate::error::{Error, Result};

/// Which input maps feed which output maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionTable {
    inputs: usize,
    outputs: usize,
    /// `connected[j * inputs + i]`
    connected: Vec<bool>,
}

impl ConnectionTable {
    pub fn full(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            connected: vec![true; inputs * outputs],
        }
    }

    pub fn from_pairs(inputs: usize, outputs: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut connected = vec![false; inputs * outputs];
        for &(i, j) in pairs {
            if i >= inputs || j >= outputs {
                return Err(Error::InvalidArgument(format!(
                    "connection ({i}, {j}) outside a {inputs}->{outputs} table"
                )));
            }
            connected[j * inputs + i] = true;
        }
        let table = Self {
            inputs,
            outputs,
            connected,
        };
        if let Some(j) = (0..outputs).find(|&j| (0..inputs).all(|i| !table.is_connected(i, j))) {
            return Err(Error::InvalidArgument(format!("output map {j} has no incoming connection")));
        }
        Ok(table)
    }

    /// The classic 6 -> 16 LeNet-5 C3 table.
    pub fn lenet5_c3() -> Self {
        const COLUMNS: [&[usize]; 16] = [
            &[0, 1, 2],
            &[1, 2, 3],
            &[2, 3, 4],
            &[3, 4, 5],
            &[0, 4, 5],
            &[0, 1, 5],
            &[0, 1, 2, 3],
            &[1, 2, 3, 4],
            &[2, 3, 4, 5],
            &[0, 3, 4, 5],
            &[0, 1, 4, 5],
            &[0, 1, 2, 5],
            &[0, 1, 3, 4],
            &[1, 2, 4, 5],
            &[0, 2, 3, 5],
            &[0, 1, 2, 3, 4, 5],
        ];
        let pairs: Vec<(usize, usize)> = COLUMNS
            .iter()
            .enumerate()
            .flat_map(|(j, ins)| ins.iter().map(move |&i| (i, j)))
            .collect();
        Self::from_pairs(6, 16, &pairs).expect("static table is valid")
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn is_connected(&self, input: usize, output: usize) -> bool {
        self.connected[output * self.inputs + input]
    }

    pub fn fan_in(&self, output: usize) -> usize {
        (0..self.inputs).filter(|&i| self.is_connected(i, output)).count()
    }

    pub fn is_full(&self) -> bool {
        self.connected.iter().all(|&c| c)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.outputs)
            .flat_map(|j| (0..self.inputs).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_connected(i, j))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv {
    pub table: ConnectionTable,
    pub kh: usize,
    pub kw: usize,
    /// Dense `[out][in][kh][kw]`; kernels of unconnected pairs stay unused.
    pub kernels: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv {
    pub fn new(table: ConnectionTable, kh: usize, kw: usize) -> Self {
        let n = table.inputs() * table.outputs() * kh * kw;
        let outputs = table.outputs();
        Self {
            table,
            kh,
            kw,
            kernels: vec![0.0; n],
            bias: vec![0.0; outputs],
        }
    }

    fn kernel_offset(&self, i: usize, j: usize) -> usize {
        (j * self.table.inputs() + i) * self.kh * self.kw
    }

    pub fn kernel(&self, i: usize, j: usize) -> &[f64] {
        let o = self.kernel_offset(i, j);
        &self.kernels[o..o + self.kh * self.kw]
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        if input.maps != self.table.inputs() {
            return Err(Error::Shape(format!(
                "convolution expects {} input maps, got {}",
                self.table.inputs(),
                input.maps
            )));
        }
        if self.kh > input.height || self.kw > input.width {
            return Err(Error::Shape(format!(
                "{}x{} kernel does not fit a {}x{} map",
                self.kh, self.kw, input.height, input.width
            )));
        }
        Ok(Shape::new(
            self.table.outputs(),
            input.height - self.kh + 1,
            input.width - self.kw + 1,
        ))
    }

    pub fn forward(&self, x: &FeatureStack) -> Result<FeatureStack> {
        let in_shape = x.shape();
        let out_shape = self.output_shape(in_shape)?;
        let (oh, ow, w) = (out_shape.height, out_shape.width, in_shape.width);
        let mut y = FeatureStack::zeros(out_shape);
        for j in 0..self.table.outputs() {
            let out = y.map_mut(j);
            out.fill(self.bias[j]);
            for i in (0..self.table.inputs()).filter(|&i| self.table.is_connected(i, j)) {
                let input = x.map(i);
                let kernel = self.kernel(i, j);
                if ow == 1 && oh == 1 && self.kw == w {
                    // Kernel covers the whole map: one contiguous dot product.
                    out[0] += dot(kernel, &input[..self.kh * w]);
                    continue;
                }
                for oy in 0..oh {
                    let out_row = &mut out[oy * ow..(oy + 1) * ow];
                    for ky in 0..self.kh {
                        let in_row = &input[(oy + ky) * w..(oy + ky + 1) * w];
                        for kx in 0..self.kw {
                            axpy(kernel[ky * self.kw + kx], &in_row[kx..kx + ow], out_row);
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    /// Accumulates `dE/dk` and `dE/db` into `grads` (`[kernels, bias]`) and
    /// returns `dE/dx` when `want_input_grad`.
    pub fn backward(
        &self,
        x: &FeatureStack,
        dy: &FeatureStack,
        grads: &mut [Vec<f64>],
        want_input_grad: bool,
    ) -> Option<FeatureStack> {
        let in_shape = x.shape();
        let out_shape = dy.shape();
        let (oh, ow, w) = (out_shape.height, out_shape.width, in_shape.width);
        let kk = self.kh * self.kw;
        let mut dx = want_input_grad.then(|| FeatureStack::zeros(in_shape));
        let (gk, gb) = grads.split_at_mut(1);
        let (gk, gb) = (&mut gk[0], &mut gb[0]);
        for j in 0..self.table.outputs() {
            let g = dy.map(j);
            gb[j] += g.iter().sum::<f64>();
            for i in (0..self.table.inputs()).filter(|&i| self.table.is_connected(i, j)) {
                let input = x.map(i);
                let o = self.kernel_offset(i, j);
                let gker = &mut gk[o..o + kk];
                let kernel = &self.kernels[o..o + kk];
                if oh == 1 && ow == 1 {
                    axpy(g[0], &input[..kk], gker);
                    if let Some(dx) = dx.as_mut() {
                        axpy(g[0], kernel, &mut dx.map_mut(i)[..kk]);
                    }
                    continue;
                }
                for oy in 0..oh {
                    let g_row = &g[oy * ow..(oy + 1) * ow];
                    for ky in 0..self.kh {
                        let in_row = &input[(oy + ky) * w..(oy + ky + 1) * w];
                        for kx in 0..self.kw {
                            gker[ky * self.kw + kx] += dot(g_row, &in_row[kx..kx + ow]);
                        }
                    }
                }
                if let Some(dx) = dx.as_mut() {
                    let dmap = dx.map_mut(i);
                    for oy in 0..oh {
                        let g_row = &g[oy * ow..(oy + 1) * ow];
                        for ky in 0..self.kh {
                            let d_row = &mut dmap[(oy + ky) * w..(oy + ky + 1) * w];
                            for kx in 0..self.kw {
                                axpy(kernel[ky * self.kw + kx], g_row, &mut d_row[kx..kx + ow]);
                            }
                        }
                    }
                }
            }
        }
        dx
    }
}
