//! Training loop, evaluation and the classification listings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{ObjectClass, ObjectId};
use crate::error::{Error, Result};
use crate::nn::{argmax, checkpoint, one_hot, sgd_step, FeatureStack, GradientBuffers, Network, TrainConfig};
use crate::preprocess::SpectralImage;
use crate::sampler::Split;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub id: ObjectId,
    pub class: ObjectClass,
    pub input: FeatureStack,
}

impl LabeledSample {
    pub fn from_image(image: &SpectralImage) -> Result<Self> {
        let class = image
            .label
            .ok_or_else(|| Error::InvalidArgument(format!("image {} has no catalog class", image.id)))?;
        Ok(Self {
            id: image.id,
            class,
            input: FeatureStack::from_pixels(image.side, &image.pixels)?,
        })
    }

    pub fn target(&self) -> Vec<f64> {
        one_hot(self.class.index(), ObjectClass::COUNT)
    }
}

/// `<dir>/<split>/<class>/<plate>-<mjd>-<fiber>.pgm`
pub fn image_path(dir: &Path, split: Split, class: ObjectClass, id: ObjectId) -> PathBuf {
    dir.join(split.name())
        .join(class.name())
        .join(format!("{}.pgm", id.file_stem()))
}

/// Reads every image of one split, labeled by its class folder and sorted
/// by identifier.
pub fn load_split(dir: &Path, split: Split) -> Result<Vec<LabeledSample>> {
    let mut out = Vec::new();
    for class in ObjectClass::ALL {
        let folder = dir.join(split.name()).join(class.name());
        if !folder.is_dir() {
            continue;
        }
        let entries = fs::read_dir(&folder).map_err(|e| Error::io(&folder, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(&folder, e))?.path();
            if path.extension().is_some_and(|x| x == "pgm") {
                out.push(LabeledSample::from_image(&SpectralImage::read(&path, Some(class))?)?);
            }
        }
    }
    out.sort_by_key(|s| s.id);
    Ok(out)
}

/// Rows are catalog classes, columns predicted classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, actual: ObjectClass, predicted: ObjectClass) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..3).map(|k| self.counts[k][k]).sum()
    }

    pub fn row_sum(&self, class: ObjectClass) -> usize {
        self.counts[class.index()].iter().sum()
    }

    /// Correct / total; 0 for an empty matrix.
    pub fn overall_rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }

    /// Per-class success rate; `None` for classes absent from the data.
    pub fn class_rates(&self) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for class in ObjectClass::ALL {
            let n = self.row_sum(class);
            if n > 0 {
                out[class.index()] = Some(self.counts[class.index()][class.index()] as f64 / n as f64);
            }
        }
        out
    }
}

pub fn predict(net: &Network, input: &FeatureStack) -> Result<ObjectClass> {
    let y = net.forward(input)?;
    Ok(ObjectClass::ALL[argmax(&y)])
}

/// Predictions in sample order, computed in parallel.
pub fn predict_all(net: &Network, samples: &[LabeledSample]) -> Result<Vec<ObjectClass>> {
    samples.par_iter().map(|s| predict(net, &s.input)).collect()
}

pub fn confusion(samples: &[LabeledSample], predicted: &[ObjectClass]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for (s, &p) in samples.iter().zip(predicted) {
        m.add(s.class, p);
    }
    m
}

pub fn evaluate(net: &Network, samples: &[LabeledSample]) -> Result<ConfusionMatrix> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty dataset".into()));
    }
    Ok(confusion(samples, &predict_all(net, samples)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRow {
    /// 0 is the untrained baseline.
    pub epoch: usize,
    /// Summed squared error over the epoch's training patterns.
    pub train_loss: Option<f64>,
    pub valid_rate: f64,
    pub class_rates: [Option<f64>; 3],
    pub learning_rate: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub rows: Vec<EpochRow>,
    pub best_epoch: usize,
}

impl TrainReport {
    /// Highest validation rate, earliest epoch on ties.
    pub fn best_row(&self) -> Option<&EpochRow> {
        self.rows.iter().find(|r| r.epoch == self.best_epoch)
    }

    pub fn final_row(&self) -> Option<&EpochRow> {
        self.rows.last()
    }

    pub fn valid_rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.valid_rate).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    fn update_best(&mut self) {
        let mut best: Option<&EpochRow> = None;
        for r in &self.rows {
            if best.is_none_or(|b| r.valid_rate > b.valid_rate) {
                best = Some(r);
            }
        }
        self.best_epoch = best.map_or(0, |r| r.epoch);
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// `epoch_XXX.ckpt` files are written here after every epoch.
    pub checkpoint_dir: Option<PathBuf>,
    /// The report is rewritten here after every epoch.
    pub report_path: Option<PathBuf>,
}

pub fn checkpoint_path(dir: &Path, epoch: usize) -> PathBuf {
    dir.join(format!("epoch_{epoch:03}.ckpt"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_inputs(net: &Network, samples: &[LabeledSample], what: &str) -> Result<()> {
    if let Some(s) = samples.iter().find(|s| s.input.shape() != net.input_shape()) {
        return Err(Error::Shape(format!(
            "{what} sample {} is {}, network expects {}",
            s.id,
            s.input.shape(),
            net.input_shape()
        )));
    }
    Ok(())
}

/// Per-pattern SGD over `cfg.epochs` epochs with a seeded shuffle each
/// epoch, evaluating on `valid` after every epoch (and once before the
/// first).
pub fn train(
    net: &mut Network,
    cfg: &TrainConfig,
    train: &[LabeledSample],
    valid: &[LabeledSample],
    opts: &TrainOptions,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() || valid.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be non-empty".into()));
    }
    check_inputs(net, train, "training")?;
    check_inputs(net, valid, "validation")?;

    let mut report = TrainReport {
        config: *cfg,
        rows: Vec::with_capacity(cfg.epochs + 1),
        best_epoch: 0,
    };
    let record = |net: &Network, report: &mut TrainReport, epoch: usize, loss: Option<f64>, lr: Option<f64>| -> Result<()> {
        let m = evaluate(net, valid)?;
        let checkpoint = match &opts.checkpoint_dir {
            Some(dir) => {
                let p = checkpoint_path(dir, epoch);
                checkpoint::save(net, &p)?;
                Some(p)
            }
            None => None,
        };
        let row = EpochRow {
            epoch,
            train_loss: loss,
            valid_rate: m.overall_rate(),
            class_rates: m.class_rates(),
            learning_rate: lr,
            confusion: m,
            checkpoint,
        };
        log::info!(
            "epoch {epoch}: loss {} valid {:.4} lr {}",
            loss.map_or("-".into(), |l| format!("{l:.4}")),
            row.valid_rate,
            lr.map_or("-".into(), |l| format!("{l:.6}"))
        );
        report.rows.push(row);
        report.update_best();
        if let Some(p) = &opts.report_path {
            report.write(p)?;
        }
        Ok(())
    };

    record(net, &mut report, 0, None, None)?;
    let targets: Vec<Vec<f64>> = train.iter().map(LabeledSample::target).collect();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grads = GradientBuffers::zeros_like(net);
    for epoch in 1..=cfg.epochs {
        let lr = cfg.learning_rate(epoch - 1);
        order.sort_unstable();
        order.shuffle(&mut seed::rng(cfg.seed, &[seed::labels::SHUFFLE, epoch as u64]));
        let mut loss = 0.0;
        for &k in &order {
            let trace = net.forward_trace(&train[k].input)?;
            grads.clear();
            loss += net.backward_into(&trace, &targets[k], &mut grads)?;
            sgd_step(net, &grads, lr)?;
        }
        if !net.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "parameters diverged to non-finite values in epoch {epoch}; lower the learning rate"
            )));
        }
        record(net, &mut report, epoch, Some(loss), Some(lr))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub matches: Vec<(ObjectId, ObjectClass)>,
    /// (id, catalog class, predicted class)
    pub mismatches: Vec<(ObjectId, ObjectClass, ObjectClass)>,
    pub confusion: ConfusionMatrix,
}

pub fn classify(net: &Network, samples: &[LabeledSample]) -> Result<Classification> {
    let predicted = predict_all(net, samples)?;
    Ok(classification(samples, &predicted))
}

/// Splits samples by agreement between catalog and predicted class.
pub fn classification(samples: &[LabeledSample], predicted: &[ObjectClass]) -> Classification {
    let mut out = Classification {
        matches: Vec::new(),
        mismatches: Vec::new(),
        confusion: confusion(samples, predicted),
    };
    for (s, &p) in samples.iter().zip(predicted) {
        if p == s.class {
            out.matches.push((s.id, s.class));
        } else {
            out.mismatches.push((s.id, s.class, p));
        }
    }
    out
}

pub const LISTING_HEADER: &str = "#PLATE\tMJD\t\tFIBERID";

pub fn format_match_list(rows: &[(ObjectId, ObjectClass)]) -> String {
    let mut out = format!("{LISTING_HEADER}\n");
    for (id, c) in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t\tcatalog: {}", id.plate, id.mjd, id.fiberid, c.name());
    }
    out
}

pub fn format_mismatch_list(rows: &[(ObjectId, ObjectClass, ObjectClass)]) -> String {
    let mut out = format!("{LISTING_HEADER}\n");
    for (id, c, p) in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t\tcatalog: {}\t\tconvnet: {}",
            id.plate,
            id.mjd,
            id.fiberid,
            c.name(),
            p.name()
        );
    }
    out
}

fn rate_text(rate: Option<f64>) -> String {
    rate.map_or("n/a".into(), |r| format!("{:.2}%", 100.0 * r))
}

/// One line: overall rate followed by the per-class rates.
pub fn summary_line(m: &ConfusionMatrix) -> String {
    let rates = m.class_rates();
    format!(
        "overall success rate: {} ({} of {}); galaxy {}; qso {}; star {}",
        rate_text((m.total() > 0).then(|| m.overall_rate())),
        m.trace(),
        m.total(),
        rate_text(rates[0]),
        rate_text(rates[1]),
        rate_text(rates[2])
    )
}

impl Classification {
    /// `classify_match.txt`, `classify_mismatch.txt` and `classify_summary.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("classify_match.txt"), &format_match_list(&self.matches))?;
        write_file(&dir.join("classify_mismatch.txt"), &format_mismatch_list(&self.mismatches))?;
        write_file(&dir.join("classify_summary.txt"), &format!("{}\n", summary_line(&self.confusion)))
    }
}

fn format_curve(header: &str, rows: impl Iterator<Item = (usize, f64)>) -> String {
    let mut out = format!("# epoch {header}\n");
    for (e, v) in rows {
        let _ = writeln!(out, "{e} {v}");
    }
    out
}

/// Validation rate and training loss per trained epoch.
pub fn curve_series(report: &TrainReport) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let trained = report.rows.iter().filter(|r| r.epoch > 0);
    let rate = trained.clone().map(|r| (r.epoch, r.valid_rate)).collect();
    let loss = trained.filter_map(|r| r.train_loss.map(|l| (r.epoch, l))).collect();
    (rate, loss)
}

/// Writes `curve_rate.txt` and `curve_loss.txt` (two columns, one row per
/// trained epoch) into `dir` and returns their paths.
pub fn emit_curves(report: &TrainReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let (rate, loss) = curve_series(report);
    let rate_path = dir.join("curve_rate.txt");
    let loss_path = dir.join("curve_loss.txt");
    write_file(&rate_path, &format_curve("valid_rate", rate.into_iter()))?;
    write_file(&loss_path, &format_curve("train_loss", loss.into_iter()))?;
    Ok((rate_path, loss_path))
}

pub fn parse_curve(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::parse(n + 1, format!("expected `epoch value`, got `{line}`"));
        let (e, v) = line.split_once(' ').ok_or_else(bad)?;
        out.push((e.parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?));
    }
    Ok(out)
}

/// Human-readable table of a training report.
pub fn render_report(report: &TrainReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "eta0 {} decay {} epochs {} seed {}",
        c.eta0, c.decay, c.epochs, c.seed
    );
    let _ = writeln!(out, "{:>5} {:>12} {:>8} {:>8} {:>8} {:>8} {:>10}", "epoch", "loss", "valid", "galaxy", "qso", "star", "eta");
    for r in &report.rows {
        let rate = |k: usize| r.class_rates[k].map_or("-".into(), |v| format!("{:.2}%", 100.0 * v));
        let _ = writeln!(
            out,
            "{:>5} {:>12} {:>7.2}% {:>8} {:>8} {:>8} {:>10}",
            r.epoch,
            r.train_loss.map_or("-".into(), |l| format!("{l:.4}")),
            100.0 * r.valid_rate,
            rate(0),
            rate(1),
            rate(2),
            r.learning_rate.map_or("-".into(), |l| format!("{l:.6}"))
        );
    }
    if let (Some(best), Some(last)) = (report.best_row(), report.final_row()) {
        let _ = writeln!(
            out,
            "best: epoch {} at {:.2}%; final: epoch {} at {:.2}%",
            best.epoch,
            100.0 * best.valid_rate,
            last.epoch,
            100.0 * last.valid_rate
        );
    }
    out
}
