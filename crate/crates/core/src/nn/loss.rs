//! Squared-error loss `E = ||T - y||^2` against one-hot targets.

use crate::error::{Error, Result};

fn check(y: &[f64], target: &[f64]) -> Result<()> {
    if y.len() != target.len() {
        return Err(Error::Shape(format!(
            "output has {} entries, target has {}",
            y.len(),
            target.len()
        )));
    }
    Ok(())
}

pub fn mse_loss(y: &[f64], target: &[f64]) -> Result<f64> {
    check(y, target)?;
    Ok(y.iter().zip(target).map(|(a, t)| (t - a) * (t - a)).sum())
}

/// `dE/dy = 2 (y - T)`
pub fn mse_gradient(y: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    check(y, target)?;
    Ok(y.iter().zip(target).map(|(a, t)| 2.0 * (a - t)).collect())
}

pub fn one_hot(index: usize, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    v
}

/// Index of the largest output; ties go to the lowest index.
pub fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in y.iter().enumerate().skip(1) {
        if v > y[best] {
            best = k;
        }
    }
    best
}
