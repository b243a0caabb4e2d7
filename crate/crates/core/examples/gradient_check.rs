//! Compare backpropagated gradients with central differences of the loss
//! for a small network that uses every layer type.
//!
//! cargo run --release --example gradient_check

use rand::Rng;
use spectral_cnn::nn::{
    Activation, ConnectionTable, Conv, DivisiveNorm, FeatureStack, FullLayer, GaussianWindow, Layer, LpPool, Network,
    Nonlinearity, PNorm, Shape, Subsampling, SubtractiveNorm, DEFAULT_EPSILON,
};
use spectral_cnn::seed;

const STEP: f64 = 1e-5;

fn main() -> spectral_cnn::Result<()> {
    let window = GaussianWindow::new(3, 0.75)?;
    let sparse = ConnectionTable::from_pairs(3, 4, &[(0, 0), (1, 0), (1, 1), (2, 2), (0, 3), (2, 3)])?;
    let mut net = Network::new(
        Shape::new(1, 12, 12),
        vec![
            Layer::Conv(Conv::new(ConnectionTable::full(1, 3), 3, 3)),
            Layer::Nonlin(Nonlinearity::rectified(3)),
            Layer::SubNorm(SubtractiveNorm { window: window.clone() }),
            Layer::DivNorm(DivisiveNorm { window, epsilon: DEFAULT_EPSILON }),
            Layer::Subs(Subsampling::new(3, 2)),
            Layer::Conv(Conv::new(sparse, 3, 3)),
            Layer::Nonlin(Nonlinearity::Tanh),
            Layer::LpPool(LpPool::new(3, 3, PNorm::Finite(2.0))),
            Layer::Full(FullLayer::new(4, 3, Activation::Sigmoid { beta: 1.0 })),
        ],
    )?;
    let mut rng = seed::rng(5, &[]);
    net.randomize(-0.5, 0.5, &mut rng);
    let x = FeatureStack::from_vec(net.input_shape(), (0..144).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let target = [0.0, 1.0, 0.0];

    let trace = net.forward_trace(&x)?;
    let (loss, grads) = net.backward(&trace, &target)?;
    println!("loss {loss:.6}, {} parameters", net.param_count());

    let mut probe = net.clone();
    for (k, layer_grads) in grads.layers.iter().enumerate() {
        let mut worst: f64 = 0.0;
        let mut n = 0;
        for (t, g) in layer_grads.iter().enumerate() {
            for (i, &analytic) in g.iter().enumerate() {
                let orig = probe.layers[k].params_mut()[t][i];
                probe.layers[k].params_mut()[t][i] = orig + STEP;
                let plus = probe.loss(&x, &target)?;
                probe.layers[k].params_mut()[t][i] = orig - STEP;
                let minus = probe.loss(&x, &target)?;
                probe.layers[k].params_mut()[t][i] = orig;
                let numeric = (plus - minus) / (2.0 * STEP);
                let scale = analytic.abs().max(numeric.abs());
                if scale > 1e-9 {
                    worst = worst.max((analytic - numeric).abs() / scale);
                }
                n += 1;
            }
        }
        if n > 0 {
            println!("{:<18} {n:>4} params  worst relative error {worst:.2e}", net.layers[k].name());
        }
    }
    Ok(())
}
