//! Generate a labeled synthetic corpus on disk in the same layout as the
//! real one: spectra, catalog and train/valid/test lists.
//!
//! cargo run --example synth_corpus -- [dir]

use spectral_cnn::catalog::ObjectClass;
use spectral_cnn::sampler::Split;
use spectral_cnn::synth::{synth_dataset, SynthOptions, SynthStyle};

fn main() -> spectral_cnn::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("synth_corpus"), Into::into);
    let opts = SynthOptions {
        counts: [20, 5, 5],
        z_ranges: [(0.0, 0.8), (0.3, 3.0), (0.0, 0.002)],
        noise_sigma: 0.1,
        style: SynthStyle::Templates,
        seed: 2024,
    };
    let ds = synth_dataset(&opts)?;
    for split in Split::ALL {
        let spectra = ds.get(split);
        let per_class: Vec<String> = ObjectClass::ALL
            .iter()
            .map(|&c| format!("{c}={}", spectra.iter().filter(|s| s.label == Some(c)).count()))
            .collect();
        println!("{split:<5} {:>3} spectra ({})", spectra.len(), per_class.join(", "));
    }
    ds.write(&dir.join("spectra"), &dir.join("catalog/catalog.txt"), &dir.join("sets"))?;
    println!("wrote corpus under {}", dir.display());
    Ok(())
}
