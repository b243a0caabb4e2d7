#![allow(dead_code)]

use rand::Rng;
use spectral_cnn::harness::LabeledSample;
use spectral_cnn::nn::{FeatureStack, Network, Shape};
use spectral_cnn::preprocess::{spectrum_to_image, PreprocessOptions};
use spectral_cnn::sampler::Split;
use spectral_cnn::seed;
use spectral_cnn::synth::{synth_dataset, SynthOptions, SynthStyle};

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Gradients below this magnitude on both sides count as agreeing zeros.
pub const FD_ZERO: f64 = 1e-9;

#[derive(Debug, Default, Clone, Copy)]
pub struct GradCheck {
    pub checked: usize,
    pub worst: f64,
    pub failures: usize,
}

impl GradCheck {
    pub fn merge(self, o: GradCheck) -> GradCheck {
        GradCheck {
            checked: self.checked + o.checked,
            worst: self.worst.max(o.worst),
            failures: self.failures + o.failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < FD_ZERO {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares every parameter gradient of `net` with a central difference of
/// the loss.
pub fn check_network(net: &Network, x: &FeatureStack, target: &[f64]) -> GradCheck {
    let trace = net.forward_trace(x).unwrap();
    let (_, grads) = net.backward(&trace, target).unwrap();
    let mut probe = net.clone();
    let mut out = GradCheck::default();
    for (k, layer_grads) in grads.layers.iter().enumerate() {
        for (t, g) in layer_grads.iter().enumerate() {
            for i in 0..g.len() {
                let orig = probe.layers[k].params_mut()[t][i];
                probe.layers[k].params_mut()[t][i] = orig + FD_STEP;
                let plus = probe.loss(x, target).unwrap();
                probe.layers[k].params_mut()[t][i] = orig - FD_STEP;
                let minus = probe.loss(x, target).unwrap();
                probe.layers[k].params_mut()[t][i] = orig;
                let numeric = (plus - minus) / (2.0 * FD_STEP);
                let err = relative_error(g[i], numeric);
                out.checked += 1;
                out.worst = out.worst.max(err);
                if err >= FD_TOLERANCE {
                    out.failures += 1;
                }
            }
        }
    }
    out
}

pub fn random_stack(shape: Shape, rng: &mut impl Rng) -> FeatureStack {
    FeatureStack::from_vec(shape, (0..shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_target(len: usize, s: u64) -> Vec<f64> {
    let mut rng = seed::rng(s, &[99]);
    (0..len).map(|_| rng.random_range(-0.5..0.5)).collect()
}

pub struct Samples {
    pub train: Vec<LabeledSample>,
    pub valid: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

/// Synthesizes spectra and runs them through preprocessing in memory.
pub fn synthetic_samples(opts: &SynthOptions, side: usize) -> Samples {
    let ds = synth_dataset(opts).unwrap();
    let po = PreprocessOptions { side, ..PreprocessOptions::default() };
    let convert = |split: Split| -> Vec<LabeledSample> {
        ds.get(split)
            .iter()
            .map(|s| {
                let img = spectrum_to_image(s, &po).unwrap().expect("synthetic spectra pass the filters");
                LabeledSample::from_image(&img).unwrap()
            })
            .collect()
    };
    Samples {
        train: convert(Split::Train),
        valid: convert(Split::Valid),
        test: convert(Split::Test),
    }
}

pub fn synth_options(counts: [usize; 3], noise: f64, style: SynthStyle, seed: u64) -> SynthOptions {
    SynthOptions {
        counts,
        z_ranges: [(0.0, 1.5); 3],
        noise_sigma: noise,
        style,
        seed,
    }
}

use spectral_cnn::nn::{
    Activation, ConnectionTable, Conv, DivisiveNorm, FullLayer, GaussianWindow, Layer, LpPool, Nonlinearity, PNorm,
    Subsampling, SubtractiveNorm, DEFAULT_EPSILON,
};

fn window3() -> GaussianWindow {
    GaussianWindow::new(3, 0.9).unwrap()
}

fn conv(inputs: usize, outputs: usize, k: usize) -> Layer {
    Layer::Conv(Conv::new(ConnectionTable::full(inputs, outputs), k, k))
}

/// One small network per layer type; parameter-free layers sit behind a
/// convolution so their input gradient shows up in its kernel gradient.
pub fn layer_cases() -> Vec<(&'static str, Network)> {
    let sparse = ConnectionTable::from_pairs(3, 4, &[(0, 0), (1, 0), (1, 1), (2, 2), (0, 3), (2, 3)]).unwrap();
    let s = |m, n| Shape::new(m, n, n);
    let cases: Vec<(&'static str, Shape, Vec<Layer>)> = vec![
        ("conv", s(2, 6), vec![conv(2, 3, 3)]),
        ("conv (sparse table)", s(3, 5), vec![Layer::Conv(Conv::new(sparse, 2, 2))]),
        ("tanh", s(1, 6), vec![conv(1, 3, 3), Layer::Nonlin(Nonlinearity::Tanh)]),
        ("rectified sigmoid", s(1, 6), vec![conv(1, 3, 3), Layer::Nonlin(Nonlinearity::rectified(3))]),
        ("subtractive norm", s(1, 7), vec![conv(1, 3, 3), Layer::SubNorm(SubtractiveNorm { window: window3() })]),
        (
            "divisive norm",
            s(1, 7),
            vec![conv(1, 3, 3), Layer::DivNorm(DivisiveNorm { window: window3(), epsilon: DEFAULT_EPSILON })],
        ),
        ("subs pool", s(1, 6), vec![conv(1, 2, 3), Layer::Subs(Subsampling::new(2, 2))]),
        ("lp pool P=1", s(1, 6), vec![conv(1, 2, 3), Layer::LpPool(LpPool::new(2, 2, PNorm::Finite(1.0)))]),
        ("lp pool P=2", s(1, 6), vec![conv(1, 2, 3), Layer::LpPool(LpPool::new(2, 2, PNorm::Finite(2.0)))]),
        ("full (sigmoid)", s(3, 2), vec![Layer::Full(FullLayer::new(12, 3, Activation::Sigmoid { beta: 1.5 }))]),
        ("full (tanh)", s(3, 2), vec![Layer::Full(FullLayer::new(12, 3, Activation::Tanh))]),
    ];
    cases
        .into_iter()
        .map(|(name, shape, layers)| (name, Network::new(shape, layers).unwrap()))
        .collect()
}

/// 12x12 input through every layer type.
pub fn composed_network() -> Network {
    let c3 = ConnectionTable::from_pairs(4, 6, &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2), (0, 3), (3, 3), (0, 4), (1, 4), (2, 4), (3, 4), (0, 5), (2, 5)])
        .unwrap();
    Network::new(
        Shape::new(1, 12, 12),
        vec![
            conv(1, 4, 3),
            Layer::Nonlin(Nonlinearity::rectified(4)),
            Layer::SubNorm(SubtractiveNorm { window: window3() }),
            Layer::DivNorm(DivisiveNorm { window: window3(), epsilon: DEFAULT_EPSILON }),
            Layer::Subs(Subsampling::new(4, 2)),
            Layer::Conv(Conv::new(c3, 3, 3)),
            Layer::Nonlin(Nonlinearity::Tanh),
            Layer::LpPool(LpPool::new(3, 3, PNorm::Finite(2.0))),
            Layer::Full(FullLayer::new(6, 3, Activation::Sigmoid { beta: 1.0 })),
        ],
    )
    .unwrap()
}

/// Randomizes parameters and input from `U(-0.5, 0.5)` / `U(-1, 1)` and
/// runs the finite-difference comparison.
pub fn check_case(net: &Network, s: u64) -> GradCheck {
    let mut net = net.clone();
    let mut rng = seed::rng(s, &[1]);
    net.randomize(-0.5, 0.5, &mut rng);
    let x = random_stack(net.input_shape(), &mut rng);
    let target = random_target(net.output_shape().len(), s);
    check_network(&net, &x, &target)
}
