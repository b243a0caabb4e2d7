//! The `spectral-cnn` command line: one subcommand per pipeline stage.
//!
//! On-disk layout under the configured root:
//!
//! ```text
//! catalog/catalog.txt          catalog (synth writes it, sample reads it)
//! spectra/<stem>.txt           spectra, two columns loglam flux
//! sets/<split>.txt             dataset lists, plus hist_* and cdf_* data
//! imgs/<split>/<class>/*.pgm   preprocessed images
//! imgs/<split>.txt             lists of images that passed preprocessing
//! imgs/blacklist.txt           rejected spectra with the reason
//! class/net/epoch_XXX.ckpt     checkpoints
//! class/train_report.json      training report, curve_*.txt
//! class/classify_*.txt         classification listings
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::arch::{build_network, ExperimentConfig, RawConfig, SynthMode};
use crate::catalog::{filter_good, read_catalog, CatalogRecord, ObjectClass};
use crate::error::{Error, Result};
use crate::harness::{self, image_path, load_split, TrainOptions, TrainReport};
use crate::nn::checkpoint;
use crate::preprocess::{read_spectrum, spectrum_to_image, PreprocessOptions};
use crate::sampler::{
    build_splits, format_cdf, format_histogram, histogram, read_set_list, write_set_list, EmpiricalCdf, SetEntry,
    Split,
};
use crate::synth::{synth_dataset, SynthOptions, SynthStyle};

#[derive(Debug, Parser)]
#[command(name = "spectral-cnn", version, about = "Spectral classification with convolutional networks")]
pub struct Cli {
    /// key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the `root` key; all default paths live under it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// KEY=VALUE override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build redshift-stratified train/valid/test lists from the catalog.
    Sample,
    /// Turn listed spectra into PGM images.
    Preprocess,
    /// Generate a synthetic catalog, spectra and dataset lists.
    Synth,
    /// Train the configured network on the preprocessed images.
    Train,
    /// Classify one split and write match/mismatch listings.
    Classify {
        /// Checkpoint to use; defaults to the best epoch of the report.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "test", value_parser = parse_split)]
        split: Split,
    },
    /// Print a training report as a table.
    Report {
        /// Defaults to `<work>/train_report.json`.
        path: Option<PathBuf>,
    },
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    Split::ALL
        .into_iter()
        .find(|sp| sp.name() == s)
        .ok_or_else(|| format!("unknown split `{s}` (train | valid | test)"))
}

/// Config file, then `--out`, then `--set` pairs, then `--seed`.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let raw = RawConfig::parse(&text)?;
            if raw.get("arch").is_none() {
                return Err(Error::Config(format!("{}: missing required key `arch`", path.display())));
            }
            raw
        }
        None => RawConfig::default(),
    };
    if let Some(out) = &cli.out {
        raw.set("root", &out.to_string_lossy());
    }
    for pair in &cli.overrides {
        raw.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string());
    }
    ExperimentConfig::from_raw(&raw)
}

/// Runs one subcommand and returns the text to print.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Sample => sample(&cfg),
        Command::Preprocess => preprocess(&cfg),
        Command::Synth => synth(&cfg),
        Command::Train => train(&cfg),
        Command::Classify { checkpoint, split } => classify(&cfg, checkpoint.as_deref(), *split),
        Command::Report { path } => {
            let path = path.clone().unwrap_or_else(|| report_path(&cfg));
            Ok(harness::render_report(&TrainReport::read(&path)?))
        }
    }
}

/// Parses `args` (program name first), runs and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn set_list_path(dir: &str, split: Split) -> PathBuf {
    Path::new(dir).join(format!("{}.txt", split.name()))
}

fn report_path(cfg: &ExperimentConfig) -> PathBuf {
    Path::new(&cfg.work).join("train_report.json")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn sample(cfg: &ExperimentConfig) -> Result<String> {
    let catalog = read_catalog(Path::new(&cfg.catalog))?;
    let good = filter_good(&catalog);
    let mut pools: BTreeMap<ObjectClass, Vec<CatalogRecord>> = BTreeMap::new();
    for r in &good {
        pools.entry(r.class).or_default().push(*r);
    }
    let splits = build_splits(&pools, &cfg.targets, cfg.intervals, cfg.train.seed)?;
    let mut out = format!("{} of {} catalog records are science-grade\n", good.len(), catalog.len());
    let sets = Path::new(&cfg.sets);
    for split in Split::ALL {
        let records = splits.get(split);
        let entries: Vec<SetEntry> = records
            .iter()
            .map(|r| SetEntry {
                id: r.id,
                class: r.class,
                z: r.z,
            })
            .collect();
        let path = set_list_path(&cfg.sets, split);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_set_list(&path, &entries)?;
        let _ = writeln!(out, "{}: {} spectra -> {}", split.name(), entries.len(), path.display());
        for class in ObjectClass::ALL {
            let zs: Vec<f64> = records.iter().filter(|r| r.class == class).map(|r| r.z).collect();
            if zs.is_empty() {
                continue;
            }
            let (lo, hi) = zs.iter().fold((f64::MAX, f64::MIN), |(a, b), &z| (a.min(z), b.max(z)));
            let width = if hi > lo { (hi - lo) / cfg.intervals as f64 } else { 0.1 };
            let stem = format!("{}_{}", split.name(), class.name());
            write_text(&sets.join(format!("hist_{stem}.txt")), &format_histogram(&histogram(&zs, width)?))?;
            write_text(&sets.join(format!("cdf_{stem}.txt")), &format_cdf(&EmpiricalCdf::new(&zs)?))?;
        }
    }
    for s in &splits.shortfalls {
        log::warn!("{} {}: {} of {} requested", s.split.name(), s.class, s.selected, s.target);
        let _ = writeln!(out, "shortfall: {} {} selected {} of {}", s.split.name(), s.class, s.selected, s.target);
    }
    Ok(out)
}

pub fn preprocess(cfg: &ExperimentConfig) -> Result<String> {
    let opts = PreprocessOptions {
        side: cfg.input,
        ..PreprocessOptions::default()
    };
    let imgs = Path::new(&cfg.imgs);
    let spectra = Path::new(&cfg.spectra);
    let mut out = String::new();
    let mut blacklist = String::from("#PLATE MJD FIBERID REASON\n");
    for split in Split::ALL {
        let list = set_list_path(&cfg.sets, split);
        if !list.exists() {
            let _ = writeln!(out, "{}: no list at {}, skipped", split.name(), list.display());
            continue;
        }
        let entries = read_set_list(&list)?;
        let results: Vec<Result<std::result::Result<SetEntry, String>>> = entries
            .par_iter()
            .map(|e| {
                let s = read_spectrum(spectra, e.id)?.with_label(e.class, e.z);
                match spectrum_to_image(&s, &opts)? {
                    Ok(img) => {
                        img.write(&image_path(imgs, split, e.class, e.id))?;
                        Ok(Ok(*e))
                    }
                    Err(why) => Ok(Err(why.to_string())),
                }
            })
            .collect();
        let mut kept = Vec::new();
        for (e, r) in entries.iter().zip(results) {
            match r? {
                Ok(e) => kept.push(e),
                Err(why) => {
                    let _ = writeln!(blacklist, "{} {} {} {why}", e.id.plate, e.id.mjd, e.id.fiberid);
                }
            }
        }
        let path = imgs.join(format!("{}.txt", split.name()));
        write_text(&path, &crate::sampler::format_set_list(&kept))?;
        let _ = writeln!(
            out,
            "{}: {} of {} spectra -> {}x{} images",
            split.name(),
            kept.len(),
            entries.len(),
            cfg.input,
            cfg.input
        );
    }
    write_text(&imgs.join("blacklist.txt"), &blacklist)?;
    Ok(out)
}

pub fn synth_options(cfg: &ExperimentConfig) -> SynthOptions {
    SynthOptions {
        counts: cfg.synth_counts,
        z_ranges: [cfg.synth_z; 3],
        noise_sigma: cfg.synth_noise,
        style: match cfg.synth_mode {
            SynthMode::Templates => SynthStyle::Templates,
            SynthMode::Lines => SynthStyle::Lines,
        },
        seed: cfg.train.seed,
    }
}

pub fn synth(cfg: &ExperimentConfig) -> Result<String> {
    let ds = synth_dataset(&synth_options(cfg))?;
    ds.write(Path::new(&cfg.spectra), Path::new(&cfg.catalog), Path::new(&cfg.sets))?;
    Ok(format!(
        "{} / {} / {} synthetic spectra -> {}, catalog {}\n",
        ds.train.len(),
        ds.valid.len(),
        ds.test.len(),
        cfg.spectra,
        cfg.catalog
    ))
}

pub fn train(cfg: &ExperimentConfig) -> Result<String> {
    let imgs = Path::new(&cfg.imgs);
    let train_set = load_split(imgs, Split::Train)?;
    let valid_set = load_split(imgs, Split::Valid)?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no training or validation images under {}; run `preprocess` first",
            imgs.display()
        )));
    }
    let mut net = build_network(&cfg.network()?, cfg.train.seed)?;
    let work = Path::new(&cfg.work);
    let opts = TrainOptions {
        checkpoint_dir: Some(work.join("net")),
        report_path: Some(report_path(cfg)),
    };
    let report = harness::train(&mut net, &cfg.train, &train_set, &valid_set, &opts)?;
    let (rate, loss) = harness::emit_curves(&report, work)?;
    write_text(&work.join("config.txt"), &cfg.serialize())?;
    let mut out = harness::render_report(&report);
    let _ = writeln!(out, "curves: {} {}", rate.display(), loss.display());
    Ok(out)
}

pub fn classify(cfg: &ExperimentConfig, ckpt: Option<&Path>, split: Split) -> Result<String> {
    let ckpt = match ckpt {
        Some(p) => p.to_path_buf(),
        None => {
            let report = TrainReport::read(&report_path(cfg))?;
            report
                .best_row()
                .and_then(|r| r.checkpoint.clone())
                .ok_or_else(|| Error::Checkpoint("report names no checkpoint for its best epoch".into()))?
        }
    };
    let mut net = build_network(&cfg.network()?, cfg.train.seed)?;
    checkpoint::load_into(&ckpt, &mut net)?;
    let samples = load_split(Path::new(&cfg.imgs), split)?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no {} images under {}; run `preprocess` first",
            split.name(),
            cfg.imgs
        )));
    }
    let c = harness::classify(&net, &samples)?;
    c.write(Path::new(&cfg.work))?;
    Ok(format!(
        "{}: {}\nlistings in {}\n",
        split.name(),
        harness::summary_line(&c.confusion),
        cfg.work
    ))
}
