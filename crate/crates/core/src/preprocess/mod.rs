//! Spectrum preprocessing: window reduction, impairment filtering, binning,
//! row-major rasterization and linear 8-bit normalization.

pub mod pgm;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{ObjectClass, ObjectId};
use crate::error::{Error, Result};

/// Native SDSS grid step in log10(Angstrom).
pub const NATIVE_STEP: f64 = 1e-4;
const STEPS_PER_DEX: f64 = 1e4;

pub const WINDOW_LO: f64 = 3.6;
pub const WINDOW_HI: f64 = 3.96;

/// Samples on the default reduction window.
pub const REDUCED_LEN: usize = 3601;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub id: ObjectId,
    /// log10 wavelength in Angstrom, strictly increasing.
    pub loglam: Vec<f64>,
    /// Flux in 1e-17 erg/s/cm^2/Angstrom.
    pub flux: Vec<f64>,
    pub label: Option<ObjectClass>,
    pub z: Option<f64>,
}

impl Spectrum {
    pub fn new(id: ObjectId, loglam: Vec<f64>, flux: Vec<f64>) -> Result<Self> {
        if loglam.len() != flux.len() {
            return Err(Error::Shape(format!(
                "spectrum {id}: {} wavelengths but {} flux values",
                loglam.len(),
                flux.len()
            )));
        }
        if loglam.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!("spectrum {id}: loglam is not strictly increasing")));
        }
        Ok(Self {
            id,
            loglam,
            flux,
            label: None,
            z: None,
        })
    }

    pub fn with_label(mut self, label: ObjectClass, z: f64) -> Self {
        self.label = Some(label);
        self.z = Some(z);
        self
    }

    pub fn len(&self) -> usize {
        self.flux.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flux.is_empty()
    }
}

/// Index of `loglam` on the 1e-4 dex lattice, when it lies on it.
fn lattice_index(loglam: f64) -> Option<i64> {
    let k = (loglam * STEPS_PER_DEX).round();
    ((loglam * STEPS_PER_DEX - k).abs() < 1e-6).then_some(k as i64)
}

/// The reduced grid `lo, lo + 1e-4, ..., hi`.
pub fn window_grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) * STEPS_PER_DEX).round() as usize + 1;
    match lattice_index(lo) {
        Some(base) => (0..n).map(|k| (base + k as i64) as f64 / STEPS_PER_DEX).collect(),
        None => (0..n).map(|k| lo + k as f64 * NATIVE_STEP).collect(),
    }
}

/// Largest tolerated hole in the native coverage, in native steps.
pub const MAX_GAP_STEPS: f64 = 10.0;

/// Resamples `s` onto the window grid by nearest native sample.
pub fn reduce_spectrum(s: &Spectrum, lo: f64, hi: f64) -> Result<Spectrum> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
    }
    let grid = window_grid(lo, hi);
    let max_gap = MAX_GAP_STEPS * NATIVE_STEP;
    let half = 0.5 * NATIVE_STEP;
    let (first, last) = match (s.loglam.first(), s.loglam.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::ImpairedSpectrum(format!("{}: no samples", s.id))),
    };
    if first > lo + half || last < hi - half {
        return Err(Error::ImpairedSpectrum(format!(
            "{}: covers [{first:.5}, {last:.5}], window is [{lo:.5}, {hi:.5}]",
            s.id
        )));
    }
    let gap = s
        .loglam
        .windows(2)
        .filter(|w| w[1] >= lo && w[0] <= hi)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    if gap > max_gap + 1e-9 {
        return Err(Error::ImpairedSpectrum(format!(
            "{}: coverage gap of {:.1} native steps inside the window",
            s.id,
            gap / NATIVE_STEP
        )));
    }

    let mut flux = Vec::with_capacity(grid.len());
    let mut j = 0;
    for &g in &grid {
        while j + 1 < s.loglam.len() && (s.loglam[j + 1] - g).abs() <= (s.loglam[j] - g).abs() {
            j += 1;
        }
        flux.push(s.flux[j]);
    }
    Ok(Spectrum {
        id: s.id,
        loglam: grid,
        flux,
        label: s.label,
        z: s.z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterThresholds {
    /// Maximum tolerated fraction of exactly-zero samples.
    pub max_zero_fraction: f64,
    /// Maximum tolerated contiguous zero run, as a fraction of the window.
    pub max_zero_run_fraction: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            max_zero_fraction: 0.20,
            max_zero_run_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Impairment {
    NonFinite,
    TooManyZeros,
    ZeroRun,
}

impl std::fmt::Display for Impairment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Impairment::NonFinite => "non-finite flux",
            Impairment::TooManyZeros => "too many zero samples",
            Impairment::ZeroRun => "long run of zero samples",
        })
    }
}

/// `Ok(())` when `flux` passes, otherwise the first failed check.
pub fn filter_impaired(flux: &[f64], thresholds: &FilterThresholds) -> std::result::Result<(), Impairment> {
    if flux.iter().any(|v| !v.is_finite()) {
        return Err(Impairment::NonFinite);
    }
    let n = flux.len() as f64;
    let zeros = flux.iter().filter(|&&v| v == 0.0).count();
    if zeros as f64 >= thresholds.max_zero_fraction * n {
        return Err(Impairment::TooManyZeros);
    }
    let mut run = 0usize;
    let mut longest = 0usize;
    for &v in flux {
        run = if v == 0.0 { run + 1 } else { 0 };
        longest = longest.max(run);
    }
    if longest > 0 && longest as f64 >= thresholds.max_zero_run_fraction * n {
        return Err(Impairment::ZeroRun);
    }
    Ok(())
}

/// Averages `v` down to `side * side` contiguous chunks whose sizes differ by
/// at most one; the leading chunks take the extra samples.
pub fn bin_spectrum(v: &[f64], side: usize) -> Result<Vec<f64>> {
    let cells = side * side;
    if side == 0 || cells > v.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot bin {} samples into a {side}x{side} matrix",
            v.len()
        )));
    }
    let base = v.len() / cells;
    let extra = v.len() % cells;
    let mut out = Vec::with_capacity(cells);
    let mut start = 0;
    for k in 0..cells {
        let len = base + usize::from(k < extra);
        let chunk = &v[start..start + len];
        out.push(if len == 1 { chunk[0] } else { chunk.iter().sum::<f64>() / len as f64 });
        start += len;
    }
    Ok(out)
}

/// Row-major square matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    side: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.side + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.side)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Fills a `side x side` matrix line after line: element `k` lands at row
/// `k / side`, column `k % side`.
pub fn rasterize(v: &[f64], side: usize) -> Result<RealMatrix> {
    if side == 0 || v.len() != side * side {
        return Err(Error::Shape(format!("{} values cannot fill a {side}x{side} matrix", v.len())));
    }
    Ok(RealMatrix {
        side,
        data: v.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralImage {
    pub id: ObjectId,
    pub side: usize,
    /// Row-major pixels.
    pub pixels: Vec<u8>,
    pub label: Option<ObjectClass>,
}

impl SpectralImage {
    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.side + col]
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        pgm::write(path, self.side, &self.pixels)
    }

    /// Reads a square PGM; the id is taken from the `PLATE-MJD-FIBERID` file stem.
    pub fn read(path: &Path, label: Option<ObjectClass>) -> Result<Self> {
        let (w, h, pixels) = pgm::read(path)?;
        if w != h {
            return Err(Error::Image(format!("{}: image is {w}x{h}, not square", path.display())));
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(ObjectId::parse_stem)
            .ok_or_else(|| Error::Image(format!("{}: file name is not PLATE-MJD-FIBERID", path.display())))?;
        Ok(Self {
            id,
            side: w,
            pixels,
            label,
        })
    }
}

/// `round(255 (x - min) / (max - min))`, halves rounded up. A constant
/// matrix maps to all zeros.
pub fn normalize_8bit(mat: &RealMatrix) -> Result<Vec<u8>> {
    let data = mat.as_slice();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in matrix".into()));
    }
    let (min, max) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Ok(vec![0; data.len()]);
    }
    let range = max - min;
    Ok(data
        .iter()
        .map(|&v| {
            // The 1e-9 slack makes x.4999999999999 and x.5 quantize alike,
            // so rescaled inputs give identical bytes.
            let p = (255.0 * (v - min) / range + 0.5 + 1e-9).floor();
            p.clamp(0.0, 255.0) as u8
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub lo: f64,
    pub hi: f64,
    pub side: usize,
    pub thresholds: FilterThresholds,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            lo: WINDOW_LO,
            hi: WINDOW_HI,
            side: 60,
            thresholds: FilterThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    Coverage(String),
    Impaired(Impairment),
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::Coverage(msg) => write!(f, "coverage: {msg}"),
            Rejection::Impaired(why) => write!(f, "{why}"),
        }
    }
}

/// Reduce, filter, bin, rasterize and quantize one spectrum.
pub fn spectrum_to_image(s: &Spectrum, opts: &PreprocessOptions) -> Result<std::result::Result<SpectralImage, Rejection>> {
    let reduced = match reduce_spectrum(s, opts.lo, opts.hi) {
        Ok(r) => r,
        Err(Error::ImpairedSpectrum(msg)) => return Ok(Err(Rejection::Coverage(msg))),
        Err(e) => return Err(e),
    };
    if let Err(why) = filter_impaired(&reduced.flux, &opts.thresholds) {
        return Ok(Err(Rejection::Impaired(why)));
    }
    let matrix = rasterize(&bin_spectrum(&reduced.flux, opts.side)?, opts.side)?;
    Ok(Ok(SpectralImage {
        id: s.id,
        side: opts.side,
        pixels: normalize_8bit(&matrix)?,
        label: s.label,
    }))
}

/// Observed wavelength of a line emitted at `lambda_emit` by a source at redshift `z`.
pub fn doppler_shift(lambda_emit: f64, z: f64) -> f64 {
    lambda_emit * (1.0 + z)
}

/// Redshift implied by an observed/emitted wavelength pair.
pub fn redshift(lambda_obsv: f64, lambda_emit: f64) -> f64 {
    lambda_obsv / lambda_emit - 1.0
}

/// Two-column text: `loglam flux`, `#` comments.
pub fn format_spectrum(s: &Spectrum) -> String {
    let mut out = String::with_capacity(32 * s.len() + 64);
    let _ = writeln!(out, "# {} loglam flux", s.id);
    for (l, f) in s.loglam.iter().zip(&s.flux) {
        let _ = writeln!(out, "{l:.5} {f:?}");
    }
    out
}

pub fn parse_spectrum(id: ObjectId, text: &str) -> Result<Spectrum> {
    let mut loglam = Vec::new();
    let mut flux = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(idx + 1, "expected two columns: loglam flux"));
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(idx + 1, format!("`{s}` is not a number")))
        };
        loglam.push(num(a)?);
        flux.push(num(b)?);
    }
    Spectrum::new(id, loglam, flux)
}

pub fn spectrum_path(dir: &Path, id: ObjectId) -> std::path::PathBuf {
    dir.join(format!("{}.txt", id.file_stem()))
}

pub fn write_spectrum(dir: &Path, s: &Spectrum) -> Result<()> {
    let path = spectrum_path(dir, s.id);
    fs::write(&path, format_spectrum(s)).map_err(|e| Error::io(path, e))
}

pub fn read_spectrum(dir: &Path, id: ObjectId) -> Result<Spectrum> {
    let path = spectrum_path(dir, id);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_spectrum(id, &text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id() -> ObjectId {
        ObjectId::new(5374, 55947, 860)
    }

    fn native(lo_k: i64, hi_k: i64, f: impl Fn(usize) -> f64) -> Spectrum {
        let loglam: Vec<f64> = (lo_k..=hi_k).map(|k| k as f64 / 1e4).collect();
        let flux = (0..loglam.len()).map(f).collect();
        Spectrum::new(id(), loglam, flux).unwrap()
    }

    #[test]
    fn reduction_to_default_window() {
        let s = native(35_500, 40_100, |i| 1.0 + i as f64);
        let r = reduce_spectrum(&s, WINDOW_LO, WINDOW_HI).unwrap();
        assert_eq!(r.len(), REDUCED_LEN);
        assert_eq!(r.loglam[0], 3.6);
        assert_eq!(*r.loglam.last().unwrap(), 3.96);
        // 3.6 sits 500 samples into the native grid.
        assert_eq!(r.flux[0], 501.0);
        assert_eq!(r.flux[3600], 4101.0);
    }

    #[test]
    fn window_endpoints_in_angstrom() {
        assert!((10f64.powf(WINDOW_LO) - 3981.0).abs() < 1.0);
        assert!((10f64.powf(WINDOW_HI) - 9120.0).abs() < 1.0);
    }

    #[test]
    fn on_grid_spectrum_is_unchanged() {
        let s = native(36_000, 39_600, |i| (i as f64 * 0.1).sin());
        let r = reduce_spectrum(&s, WINDOW_LO, WINDOW_HI).unwrap();
        assert_eq!(r.flux, s.flux);
        assert_eq!(r.loglam, s.loglam);
    }

    #[test]
    fn reduction_rejects_gaps_and_short_coverage() {
        let mut s = native(35_900, 39_700, |_| 1.0);
        s.loglam.drain(1000..1012);
        s.flux.drain(1000..1012);
        assert!(matches!(reduce_spectrum(&s, WINDOW_LO, WINDOW_HI), Err(Error::ImpairedSpectrum(_))));
        let short = native(36_100, 39_700, |_| 1.0);
        assert!(matches!(reduce_spectrum(&short, WINDOW_LO, WINDOW_HI), Err(Error::ImpairedSpectrum(_))));
        // A gap of exactly ten steps is tolerated.
        let mut ok = native(35_900, 39_700, |_| 1.0);
        ok.loglam.drain(1000..1009);
        ok.flux.drain(1000..1009);
        assert!(reduce_spectrum(&ok, WINDOW_LO, WINDOW_HI).is_ok());
    }

    #[test]
    fn impairment_filter() {
        let t = FilterThresholds::default();
        let good: Vec<f64> = (0..3601).map(|i| 1.0 + i as f64).collect();
        assert_eq!(filter_impaired(&good, &t), Ok(()));
        let mut nan = good.clone();
        nan[17] = f64::NAN;
        assert_eq!(filter_impaired(&nan, &t), Err(Impairment::NonFinite));
        let mut run = good.clone();
        run[1000..1300].iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(filter_impaired(&run, &t), Err(Impairment::ZeroRun));
        let mut sparse = good.clone();
        sparse.iter_mut().step_by(4).for_each(|v| *v = 0.0);
        assert_eq!(filter_impaired(&sparse, &t), Err(Impairment::TooManyZeros));
    }

    #[test]
    fn binning_examples() {
        let v: Vec<f64> = (0..3601).map(|i| i as f64).collect();
        let b = bin_spectrum(&v, 60).unwrap();
        assert_eq!(b.len(), 3600);
        assert_eq!(b[0], 0.5);
        assert_eq!(&b[1..], &v[2..]);
        assert_eq!(bin_spectrum(&[1., 1., 2., 2., 3., 3., 4., 4.], 2).unwrap(), vec![1., 2., 3., 4.]);
        assert_eq!(bin_spectrum(&[5., 6., 7., 8.], 2).unwrap(), vec![5., 6., 7., 8.]);
        assert!(bin_spectrum(&[1.0, 2.0, 3.0], 2).is_err());
        assert_eq!(bin_spectrum(&v, 28).unwrap().len(), 784);
    }

    #[test]
    fn raster_examples() {
        let m = rasterize(&[1., 2., 3., 4.], 2).unwrap();
        let rows: Vec<Vec<f64>> = m.rows().map(|r| r.to_vec()).collect();
        assert_eq!(rows, vec![vec![1., 2.], vec![3., 4.]]);
        assert_eq!(rasterize(&[7.0], 1).unwrap().get(0, 0), 7.0);
        assert!(rasterize(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn normalization_examples() {
        let m = rasterize(&[0., 5., 10., 5.], 2).unwrap();
        assert_eq!(normalize_8bit(&m).unwrap(), vec![0, 128, 255, 128]);
        let c = rasterize(&[3.0; 9], 3).unwrap();
        assert_eq!(normalize_8bit(&c).unwrap(), vec![0; 9]);
        let bad = rasterize(&[0.0, f64::INFINITY, 1.0, 2.0], 2).unwrap();
        assert!(normalize_8bit(&bad).is_err());
    }

    #[test]
    fn doppler_examples() {
        assert_eq!(doppler_shift(6563.0, 0.0), 6563.0);
        assert!((doppler_shift(1216.0, 2.5) - 4256.0).abs() < 1e-9);
        let lam = doppler_shift(1549.0, 1.7);
        assert!((redshift(lam, 1549.0) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn spectrum_text_round_trip() {
        let s = native(36_000, 36_010, |i| i as f64 * 0.37 - 1.0);
        let back = parse_spectrum(s.id, &format_spectrum(&s)).unwrap();
        assert_eq!(back, s);
        assert!(parse_spectrum(id(), "3.6 1.0 2.0\n").is_err());
    }

    proptest! {
        #[test]
        fn grid_length_formula(lo_k in 35_000i64..38_000, len in 1i64..3000) {
            let lo = lo_k as f64 / 1e4;
            let hi = (lo_k + len) as f64 / 1e4;
            prop_assert_eq!(window_grid(lo, hi).len(), ((hi - lo) / NATIVE_STEP).round() as usize + 1);
        }

        #[test]
        fn raster_flatten_identity(side in 1usize..12, seed in any::<u64>()) {
            let v: Vec<f64> = (0..side * side).map(|i| crate::seed::splitmix64(seed ^ i as u64) as f64).collect();
            prop_assert_eq!(rasterize(&v, side).unwrap().flatten(), v);
        }

        #[test]
        fn normalization_is_monotone(v in prop::collection::vec(-1e3f64..1e3, 4..=4)) {
            let p = normalize_8bit(&rasterize(&v, 2).unwrap()).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    if v[i] <= v[j] {
                        prop_assert!(p[i] <= p[j]);
                    }
                }
            }
            if v.iter().any(|&x| x != v[0]) {
                prop_assert_eq!(*p.iter().min().unwrap(), 0);
                prop_assert_eq!(*p.iter().max().unwrap(), 255);
            }
        }

        #[test]
        fn positive_scaling_leaves_pixels_unchanged(
            v in prop::collection::vec(-50f64..500.0, 64..=64),
            c in 1e-3f64..1e3,
        ) {
            let image = |x: &[f64]| normalize_8bit(&rasterize(&bin_spectrum(x, 4).unwrap(), 4).unwrap()).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            prop_assert_eq!(image(&v), image(&scaled));
        }

        #[test]
        fn pgm_round_trip(side in 1usize..20, seed in any::<u64>()) {
            let pixels: Vec<u8> = (0..side * side).map(|i| crate::seed::splitmix64(seed ^ i as u64) as u8).collect();
            let (w, h, back) = pgm::decode(&pgm::encode(side, &pixels)).unwrap();
            prop_assert_eq!((w, h), (side, side));
            prop_assert_eq!(back, pixels);
        }
    }
}
