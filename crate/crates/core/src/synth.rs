//! Labeled synthetic spectra.
//!
//! All line lists below are synthetic constants. They borrow a few familiar
//! rest wavelengths but are chosen so that the three class signatures never
//! share a line and every class keeps several lines inside the observed
//! window for redshifts up to about 1.5.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::catalog::{write_catalog, CatalogRecord, ObjectClass, ObjectId};
use crate::error::{Error, Result};
use crate::preprocess::{window_grid, write_spectrum, Spectrum, NATIVE_STEP, WINDOW_HI, WINDOW_LO};
use crate::sampler::{write_set_list, SetEntry, Split};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Continuum {
    /// `(lambda / 5000)^-slope`
    PowerLaw { slope: f64 },
    /// Planck-like hump, peak-normalized.
    Blackbody { temperature: f64 },
    /// Flat-to-declining shape with a step of `ratio` below `break_at`.
    Composite { break_at: f64, ratio: f64, slope: f64 },
}

impl Continuum {
    /// Value at rest-frame wavelength `lambda` (Angstrom).
    pub fn eval(&self, lambda: f64) -> f64 {
        match *self {
            Continuum::PowerLaw { slope } => (lambda / 5000.0).powf(-slope),
            Continuum::Blackbody { temperature } => {
                // hc/k in Angstrom * K
                const C2: f64 = 1.438_777e8;
                let peak = 2.897_771_955e7 / temperature;
                let planck = |l: f64| l.powi(-5) / ((C2 / (l * temperature)).exp() - 1.0);
                planck(lambda) / planck(peak)
            }
            Continuum::Composite { break_at, ratio, slope } => {
                // Smooth step of width ~50 Angstrom.
                let step = 0.5 * (1.0 + ((lambda - break_at) / 50.0).tanh());
                (ratio + (1.0 - ratio) * step) * (lambda / 5000.0).powf(-slope)
            }
        }
    }
}

/// Gaussian line: `amplitude` is relative to the local continuum (positive
/// for emission, negative for absorption); `width` is the rest-frame sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub rest: f64,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSpec {
    pub class: ObjectClass,
    pub continuum: Continuum,
    pub lines: Vec<Line>,
}

const QSO_LINES: [f64; 6] = [1549.0, 1909.0, 2798.0, 4340.0, 4861.0, 6563.0];
const STAR_LINES: [f64; 11] = [
    1855.0, 2382.0, 2600.0, 2852.0, 3096.0, 3934.0, 3969.0, 4102.0, 5175.0, 5893.0, 8542.0,
];
const GALAXY_EMISSION: [f64; 8] = [2326.0, 2470.0, 3727.0, 3869.0, 4959.0, 5007.0, 6583.0, 6716.0];
const GALAXY_ABSORPTION: [f64; 2] = [4304.0, 5270.0];

/// The reference template of each class.
pub fn template(class: ObjectClass) -> TemplateSpec {
    let lines = |rest: &[f64], amplitude: f64, width: f64| -> Vec<Line> {
        rest.iter().map(|&rest| Line { rest, amplitude, width }).collect()
    };
    match class {
        ObjectClass::Quasar => TemplateSpec {
            class,
            continuum: Continuum::PowerLaw { slope: 1.5 },
            lines: lines(&QSO_LINES, 1.5, 30.0),
        },
        ObjectClass::Star => TemplateSpec {
            class,
            continuum: Continuum::Blackbody { temperature: 6000.0 },
            lines: lines(&STAR_LINES, -0.5, 4.0),
        },
        ObjectClass::Galaxy => {
            let mut l = lines(&GALAXY_EMISSION, 1.0, 3.0);
            l.extend(lines(&GALAXY_ABSORPTION, -0.3, 5.0));
            TemplateSpec {
                class,
                continuum: Continuum::Composite {
                    break_at: 4000.0,
                    ratio: 0.5,
                    slope: -0.5,
                },
                lines: l,
            }
        }
    }
}

/// A randomized member of the class: continuum parameters and line
/// amplitudes jittered around the reference template.
pub fn jittered_template(class: ObjectClass, rng: &mut ChaCha8Rng) -> TemplateSpec {
    let mut t = template(class);
    t.continuum = match t.continuum {
        Continuum::PowerLaw { slope } => Continuum::PowerLaw {
            slope: slope + rng.random_range(-0.5..0.5),
        },
        Continuum::Blackbody { temperature } => Continuum::Blackbody {
            temperature: temperature * rng.random_range(0.6..1.6),
        },
        Continuum::Composite { break_at, ratio, slope } => Continuum::Composite {
            break_at,
            ratio: (ratio + rng.random_range(-0.2..0.2)).clamp(0.1, 1.0),
            slope: slope + rng.random_range(-0.5..0.5),
        },
    };
    for line in &mut t.lines {
        line.amplitude *= rng.random_range(0.6..1.4);
    }
    t
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn add_noise(flux: &mut [f64], continuum: &[f64], noise_sigma: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    if noise_sigma > 0.0 {
        let sd = noise_sigma * median(continuum).abs();
        let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        flux.iter_mut().for_each(|f| *f += normal.sample(rng));
    }
    Ok(())
}

fn check_args(z: f64, noise_sigma: f64) -> Result<()> {
    if !(z >= 0.0 && z.is_finite()) || !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "synthetic spectrum needs z >= 0 and noise >= 0, got {z} / {noise_sigma}"
        )));
    }
    Ok(())
}

/// Evaluates `t` at redshift `z` on the reduced window grid and adds
/// Gaussian noise of `noise_sigma` times the continuum median.
pub fn synth_spectrum(id: ObjectId, t: &TemplateSpec, z: f64, noise_sigma: f64, seed: u64) -> Result<Spectrum> {
    check_args(z, noise_sigma)?;
    let loglam = window_grid(WINDOW_LO, WINDOW_HI);
    let shift = 1.0 + z;
    let continuum: Vec<f64> = loglam
        .iter()
        .map(|&l| t.continuum.eval(10f64.powf(l) / shift))
        .collect();
    let mut flux = continuum.clone();
    for (k, &l) in loglam.iter().enumerate() {
        let lambda = 10f64.powf(l);
        let mut extra = 0.0;
        for line in &t.lines {
            let center = line.rest * shift;
            let width = line.width * shift;
            let d = (lambda - center) / width;
            if d.abs() < 8.0 {
                extra += line.amplitude * (-0.5 * d * d).exp();
            }
        }
        flux[k] *= 1.0 + extra;
    }
    add_noise(&mut flux, &continuum, noise_sigma, &mut seed::rng(seed, &[]))?;
    Ok(Spectrum::new(id, loglam, flux)?.with_label(t.class, z))
}

/// `Lines` mode places features at `FEATURE_FIRST * FEATURE_RATIO^k` (rest
/// frame), `k < FEATURE_COUNT`.
const FEATURE_RATIO: f64 = 1.12;
const FEATURE_FIRST: f64 = 1400.0;
const FEATURE_COUNT: usize = 18;
/// Component offsets (in native log-wavelength steps) of one feature.
fn fine_structure(class: ObjectClass) -> &'static [f64] {
    match class {
        ObjectClass::Galaxy => &[0.0],
        ObjectClass::Quasar => &[-1.6, 1.6],
        ObjectClass::Star => &[-2.6, 0.0, 2.6],
    }
}

/// A spectrum whose class shows only in the fine structure of its lines:
/// the continuum is a power law with a random slope shared by all classes,
/// and every class places emission features of the same integrated flux at
/// the same redshifted positions. Galaxies carry singlets, quasars close
/// doublets and stars close triplets.
pub fn synth_line_spectrum(id: ObjectId, class: ObjectClass, z: f64, noise_sigma: f64, seed: u64) -> Result<Spectrum> {
    check_args(z, noise_sigma)?;
    let mut rng = seed::rng(seed, &[]);
    let slope = rng.random_range(-1.5..1.5);
    let amplitude = rng.random_range(1.5..2.5);
    let sigma = 0.7 * NATIVE_STEP;
    let loglam = window_grid(WINDOW_LO, WINDOW_HI);
    let offsets = fine_structure(class);
    let share = amplitude / offsets.len() as f64;
    let centers: Vec<f64> = (0..FEATURE_COUNT)
        .map(|k| (FEATURE_FIRST * FEATURE_RATIO.powi(k as i32) * (1.0 + z)).log10())
        .collect();
    let continuum: Vec<f64> = loglam
        .iter()
        .map(|&l| (10f64.powf(l) / (5000.0 * (1.0 + z))).powf(-slope))
        .collect();
    let mut flux = continuum.clone();
    for (k, &l) in loglam.iter().enumerate() {
        let mut extra = 0.0;
        for &c in &centers {
            for &o in offsets {
                let d = (l - c - o * NATIVE_STEP) / sigma;
                if d.abs() < 8.0 {
                    extra += share * (-0.5 * d * d).exp();
                }
            }
        }
        flux[k] *= 1.0 + extra;
    }
    add_noise(&mut flux, &continuum, noise_sigma, &mut rng)?;
    Ok(Spectrum::new(id, loglam, flux)?.with_label(class, z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthStyle {
    Templates,
    Lines,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// Spectra per class for train, valid and test.
    pub counts: [usize; 3],
    /// Redshift range per class (galaxy, qso, star).
    pub z_ranges: [(f64, f64); 3],
    pub noise_sigma: f64,
    pub style: SynthStyle,
    pub seed: u64,
}

/// Synthetic identifier: plate `7000 + 10 split + class`, consecutive
/// fibers 1..=1000 per MJD starting at 55000.
pub fn synthetic_id(split: Split, class: ObjectClass, k: usize) -> ObjectId {
    ObjectId::new(
        7000 + 10 * split as u32 + class.index() as u32,
        55000 + (k / 1000) as u32,
        (k % 1000) as u32 + 1,
    )
}

/// Redshift of the `k`-th of `n` spectra: one draw per equal-width
/// interval, so the per-class histogram is as flat as `n` allows.
fn stratified_z(k: usize, n: usize, (lo, hi): (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    if hi <= lo {
        return lo;
    }
    let u: f64 = rng.random();
    lo + (hi - lo) * (k as f64 + u) / n as f64
}

/// One labeled spectrum of the dataset, reproducible on its own.
pub fn synth_member(opts: &SynthOptions, split: Split, class: ObjectClass, k: usize) -> Result<Spectrum> {
    let n = opts.counts[split as usize];
    let mut rng = seed::rng(opts.seed, &[seed::labels::SYNTH, split as u64, class.index() as u64, k as u64]);
    let z = stratified_z(k, n, opts.z_ranges[class.index()], &mut rng);
    let id = synthetic_id(split, class, k);
    let spectrum_seed: u64 = rng.random();
    match opts.style {
        SynthStyle::Templates => {
            let t = jittered_template(class, &mut rng);
            synth_spectrum(id, &t, z, opts.noise_sigma, spectrum_seed)
        }
        SynthStyle::Lines => synth_line_spectrum(id, class, z, opts.noise_sigma, spectrum_seed),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthDataset {
    pub train: Vec<Spectrum>,
    pub valid: Vec<Spectrum>,
    pub test: Vec<Spectrum>,
}

impl SynthDataset {
    pub fn get(&self, split: Split) -> &[Spectrum] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn catalog(&self) -> Vec<CatalogRecord> {
        Split::ALL
            .iter()
            .flat_map(|&s| self.get(s))
            .map(|s| CatalogRecord {
                id: s.id,
                specboss: 1,
                zwarning: 0,
                class: s.label.expect("synthetic spectra are labeled"),
                z: s.z.expect("synthetic spectra carry z"),
            })
            .collect()
    }

    pub fn set_entries(&self, split: Split) -> Vec<SetEntry> {
        self.get(split)
            .iter()
            .map(|s| SetEntry {
                id: s.id,
                class: s.label.expect("labeled"),
                z: s.z.expect("z"),
            })
            .collect()
    }

    /// Spectrum text files under `spectra`, the catalog at `catalog`, and
    /// `train.txt` / `valid.txt` / `test.txt` set lists under `sets`.
    pub fn write(&self, spectra: &Path, catalog: &Path, sets: &Path) -> Result<()> {
        for dir in [Some(spectra), catalog.parent(), Some(sets)].into_iter().flatten() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        for s in Split::ALL.iter().flat_map(|&sp| self.get(sp)) {
            write_spectrum(spectra, s)?;
        }
        write_catalog(catalog, &self.catalog())?;
        for split in Split::ALL {
            write_set_list(&sets.join(format!("{}.txt", split.name())), &self.set_entries(split))?;
        }
        Ok(())
    }
}

/// Class-balanced, redshift-stratified train/valid/test spectra.
pub fn synth_dataset(opts: &SynthOptions) -> Result<SynthDataset> {
    let build = |split: Split| -> Result<Vec<Spectrum>> {
        let mut out = Vec::with_capacity(3 * opts.counts[split as usize]);
        for class in ObjectClass::ALL {
            for k in 0..opts.counts[split as usize] {
                out.push(synth_member(opts, split, class, k)?);
            }
        }
        Ok(out)
    };
    Ok(SynthDataset {
        train: build(Split::Train)?,
        valid: build(Split::Valid)?,
        test: build(Split::Test)?,
    })
}
