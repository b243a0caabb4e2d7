//! Train a small LeNet-5 on synthetic 28x28 images, keep the best epoch,
//! then classify the test split and print the listings.
//!
//! cargo run --release --example train_classify

use spectral_cnn::arch::{build_lenet5, build_network, BodyOptions};
use spectral_cnn::harness::{classify, render_report, summary_line, train, LabeledSample, TrainOptions};
use spectral_cnn::nn::{checkpoint, TrainConfig};
use spectral_cnn::preprocess::{spectrum_to_image, PreprocessOptions};
use spectral_cnn::sampler::Split;
use spectral_cnn::synth::{synth_dataset, SynthOptions, SynthStyle};

fn main() -> spectral_cnn::Result<()> {
    let side = 28;
    let ds = synth_dataset(&SynthOptions {
        counts: [60, 20, 20],
        z_ranges: [(0.0, 1.5); 3],
        noise_sigma: 0.2,
        style: SynthStyle::Templates,
        seed: 9,
    })?;
    let opts = PreprocessOptions { side, ..Default::default() };
    let load = |split: Split| -> spectral_cnn::Result<Vec<LabeledSample>> {
        ds.get(split)
            .iter()
            .filter_map(|s| match spectrum_to_image(s, &opts) {
                Ok(Ok(img)) => Some(LabeledSample::from_image(&img)),
                Ok(Err(_rejected)) => None,
                Err(e) => Some(Err(e)),
            })
            .collect()
    };
    let (train_set, valid_set, test_set) = (load(Split::Train)?, load(Split::Valid)?, load(Split::Test)?);

    let work = tempfile_dir();
    let arch = build_lenet5(side, &BodyOptions::default())?;
    let mut net = build_network(&arch, 9)?;
    let cfg = TrainConfig { eta0: 0.02, decay: 0.1, epochs: 8, seed: 9 };
    let report = train(
        &mut net,
        &cfg,
        &train_set,
        &valid_set,
        &TrainOptions { checkpoint_dir: Some(work.clone()), report_path: None },
    )?;
    print!("{}", render_report(&report));

    let best = report.best_row().expect("at least one epoch");
    checkpoint::load_into(best.checkpoint.as_ref().expect("checkpointed"), &mut net)?;
    let result = classify(&net, &test_set)?;
    println!("\ntest split, epoch {}: {}", best.epoch, summary_line(&result.confusion));
    result.write(&work)?;
    print!("{}", std::fs::read_to_string(work.join("classify_mismatch.txt")).expect("listing just written"));
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("train_classify_{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}
