//! Turn one spectrum into a square 8-bit image and write it as a PGM.
//!
//! cargo run --example preprocess_spectrum -- [side] [out.pgm]

use spectral_cnn::catalog::{ObjectClass, ObjectId};
use spectral_cnn::preprocess::{
    bin_spectrum, filter_impaired, normalize_8bit, rasterize, reduce_spectrum, spectrum_to_image, FilterThresholds,
    PreprocessOptions, WINDOW_HI, WINDOW_LO,
};
use spectral_cnn::synth::{synth_spectrum, template};

fn main() -> spectral_cnn::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: usize = args.next().map_or(60, |s| s.parse().expect("side must be an integer"));
    let out = args.next().unwrap_or_else(|| "spectrum.pgm".into());

    let id = ObjectId::new(3586, 55181, 45);
    let raw = synth_spectrum(id, &template(ObjectClass::Quasar), 1.2, 0.05, 1)?;
    println!("raw spectrum: {} samples, log10 lambda {:.4}..{:.4}", raw.len(), raw.loglam[0], raw.loglam[raw.len() - 1]);

    let reduced = reduce_spectrum(&raw, WINDOW_LO, WINDOW_HI)?;
    println!("window {WINDOW_LO}..{WINDOW_HI}: {} samples", reduced.len());
    match filter_impaired(&reduced.flux, &FilterThresholds::default()) {
        Ok(()) => println!("quality filter: ok"),
        Err(why) => println!("quality filter: rejected ({why})"),
    }

    let binned = bin_spectrum(&reduced.flux, side)?;
    let matrix = rasterize(&binned, side)?;
    let pixels = normalize_8bit(&matrix)?;
    println!("{side}x{side} image, first row: {:?}", &pixels[..side.min(12)]);

    let image = spectrum_to_image(&raw, &PreprocessOptions { side, ..Default::default() })?
        .expect("clean synthetic spectrum passes the filter");
    assert_eq!(image.pixels, pixels);
    image.write(out.as_ref())?;
    println!("wrote {out}");
    Ok(())
}
