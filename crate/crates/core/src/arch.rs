//! Network topologies and the key = value experiment configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    Activation, ConnectionTable, Conv, DivisiveNorm, FullLayer, GaussianWindow, Layer, LpPool, Network,
    Nonlinearity, NonlinearityKind, PNorm, PoolingKind, Shape, Subsampling, SubtractiveNorm, TrainConfig,
    DEFAULT_EPSILON,
};
use crate::sampler::SplitTargets;
use crate::seed;

/// Number of output classes (galaxy, quasar, star).
pub const CLASSES: usize = 3;

/// LeNet-5 on 60x60 input with subs pooling, tanh and full tables:
/// C1 156 + S2 12 + C3 880 + S4 32 + C5 324600 + F6 363.
pub const LENET5_60_SUBS_PARAMS: usize = 326_043;
/// LeNet-5 on 28x28 input with subs pooling: C5 has 5x5 kernels.
pub const LENET5_28_SUBS_PARAMS: usize = 156 + 12 + 880 + 32 + (16 * 25 * 120 + 120) + 363;
/// LeNet-7 on 60x60 input with subs pooling.
pub const LENET7_60_SUBS_PARAMS: usize =
    (8 * 25 + 8) + 16 + (8 * 24 * 25 + 24) + 48 + (24 * 100 * 25 + 100) + (100 * 3 + 3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    Full,
    /// The classic sparse 6 -> 16 table.
    Lenet5,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Full => "full",
            TableKind::Lenet5 => "lenet5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv { maps: usize, kernel: usize, table: TableKind },
    Nonlin(NonlinearityKind),
    SubNorm { window: usize },
    DivNorm { window: usize },
    Pool { kind: PoolingKind, size: usize },
    Full { outputs: usize, activation: Activation },
}

impl LayerSpec {
    fn name(&self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::Nonlin(_) => "nonlinearity",
            LayerSpec::SubNorm { .. } => "subtractive-norm",
            LayerSpec::DivNorm { .. } => "divisive-norm",
            LayerSpec::Pool { .. } => "pool",
            LayerSpec::Full { .. } => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_side: usize,
    pub layers: Vec<LayerSpec>,
    pub classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchName {
    Lenet5,
    Lenet7,
}

impl ArchName {
    pub fn name(self) -> &'static str {
        match self {
            ArchName::Lenet5 => "lenet5",
            ArchName::Lenet7 => "lenet7",
        }
    }
}

impl std::str::FromStr for ArchName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lenet5" => Ok(ArchName::Lenet5),
            "lenet7" => Ok(ArchName::Lenet7),
            other => Err(Error::Config(format!("unknown arch `{other}` (lenet5 | lenet7)"))),
        }
    }
}

/// Knobs shared by the built-in topologies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyOptions {
    pub pooling: PoolingKind,
    pub nonlin: NonlinearityKind,
    pub c3_table: TableKind,
    pub norm_window: usize,
    pub beta: f64,
}

impl Default for BodyOptions {
    fn default() -> Self {
        Self {
            pooling: PoolingKind::Subs,
            nonlin: NonlinearityKind::Tanh,
            c3_table: TableKind::Full,
            norm_window: 5,
            beta: 1.0,
        }
    }
}

fn stage(out: &mut Vec<LayerSpec>, maps: usize, kernel: usize, table: TableKind, pool: usize, o: &BodyOptions) {
    out.push(LayerSpec::Conv { maps, kernel, table });
    out.push(LayerSpec::Nonlin(o.nonlin));
    if o.norm_window > 0 {
        out.push(LayerSpec::SubNorm { window: o.norm_window });
        out.push(LayerSpec::DivNorm { window: o.norm_window });
    }
    out.push(LayerSpec::Pool { kind: o.pooling, size: pool });
}

fn head(out: &mut Vec<LayerSpec>, maps: usize, kernel: usize, o: &BodyOptions) {
    out.push(LayerSpec::Conv { maps, kernel, table: TableKind::Full });
    out.push(LayerSpec::Nonlin(NonlinearityKind::Tanh));
    out.push(LayerSpec::Full {
        outputs: CLASSES,
        activation: Activation::Sigmoid { beta: o.beta },
    });
}

/// 60: 60 -C5-> 56 -/2-> 28 -C3-> 26 -/2-> 13 -C13-> 1;
/// 28: 28 -C5-> 24 -/2-> 12 -C3-> 10 -/2-> 5 -C5-> 1.
pub fn build_lenet5(n: usize, opts: &BodyOptions) -> Result<NetworkConfig> {
    let last = match n {
        60 => 13,
        28 => 5,
        other => return Err(Error::Config(format!("LeNet-5 supports input 60 or 28, got {other}"))),
    };
    let mut layers = Vec::new();
    stage(&mut layers, 6, 5, TableKind::Full, 2, opts);
    stage(&mut layers, 16, 3, opts.c3_table, 2, opts);
    head(&mut layers, 120, last, opts);
    Ok(NetworkConfig {
        input_side: n,
        layers,
        classes: CLASSES,
    })
}

/// 60 -C5-> 56 -/4-> 14 -C5-> 10 -/2-> 5 -C5-> 1.
pub fn build_lenet7(n: usize, opts: &BodyOptions) -> Result<NetworkConfig> {
    if n != 60 {
        return Err(Error::Config(format!("LeNet-7 supports input 60, got {n}")));
    }
    let mut layers = Vec::new();
    stage(&mut layers, 8, 5, TableKind::Full, 4, opts);
    stage(&mut layers, 24, 5, TableKind::Full, 2, opts);
    head(&mut layers, 100, 5, opts);
    Ok(NetworkConfig {
        input_side: n,
        layers,
        classes: CLASSES,
    })
}

pub fn build_arch(arch: ArchName, n: usize, opts: &BodyOptions) -> Result<NetworkConfig> {
    match arch {
        ArchName::Lenet5 => build_lenet5(n, opts),
        ArchName::Lenet7 => build_lenet7(n, opts),
    }
}

/// First inconsistency found while walking a dimension chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDiagnostic {
    /// Index into `NetworkConfig::layers`.
    pub layer: usize,
    pub kind: &'static str,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for ChainDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "layer {} ({}): expected {}, found {}",
            self.layer, self.kind, self.expected, self.actual
        )
    }
}

/// Walks the chain and returns the side after every layer (the input side
/// first), or the first layer whose dimensions do not work out.
pub fn validate_chain(cfg: &NetworkConfig) -> std::result::Result<Vec<usize>, ChainDiagnostic> {
    let diag = |layer: usize, kind: &'static str, expected: String, actual: String| ChainDiagnostic {
        layer,
        kind,
        expected,
        actual,
    };
    let (mut maps, mut side) = (1usize, cfg.input_side);
    let mut sides = vec![side];
    let mut classifier_seen = false;
    for (k, spec) in cfg.layers.iter().enumerate() {
        if classifier_seen {
            return Err(diag(k, spec.name(), "no layer after the classifier".into(), spec.name().into()));
        }
        match *spec {
            LayerSpec::Conv { maps: out, kernel, table } => {
                if kernel == 0 || kernel > side {
                    return Err(diag(k, "conv", format!("kernel <= {side}"), format!("kernel {kernel}")));
                }
                if table == TableKind::Lenet5 && (maps != 6 || out != 16) {
                    return Err(diag(k, "conv", "6 -> 16 maps for the lenet5 table".into(), format!("{maps} -> {out}")));
                }
                maps = out;
                side = side - kernel + 1;
            }
            LayerSpec::Nonlin(_) => {}
            LayerSpec::SubNorm { window } | LayerSpec::DivNorm { window } => {
                if window % 2 == 0 {
                    return Err(diag(k, spec.name(), "odd window side".into(), format!("{window}")));
                }
            }
            LayerSpec::Pool { size, .. } => {
                if size == 0 || side % size != 0 {
                    return Err(diag(
                        k,
                        "pool",
                        format!("side divisible by {size}"),
                        format!("side {side}"),
                    ));
                }
                side /= size;
            }
            LayerSpec::Full { outputs, .. } => {
                if side != 1 {
                    return Err(diag(
                        k,
                        "classifier boundary",
                        "1x1 maps before the fully connected classifier".into(),
                        format!("{side}x{side} maps"),
                    ));
                }
                if outputs != cfg.classes {
                    return Err(diag(k, "full", format!("{} outputs", cfg.classes), format!("{outputs}")));
                }
                classifier_seen = true;
                maps = outputs;
            }
        }
        sides.push(side);
    }
    if !classifier_seen {
        return Err(diag(
            cfg.layers.len(),
            "classifier boundary",
            "a final fully connected classifier".into(),
            "none".into(),
        ));
    }
    Ok(sides)
}

/// Instantiates the layers and draws initial weights from `seed`.
pub fn build_network(cfg: &NetworkConfig, seed: u64) -> Result<Network> {
    validate_chain(cfg).map_err(|d| Error::Config(d.to_string()))?;
    let mut maps = 1;
    let mut side = cfg.input_side;
    let mut layers = Vec::with_capacity(cfg.layers.len());
    for spec in &cfg.layers {
        let layer = match *spec {
            LayerSpec::Conv { maps: out, kernel, table } => {
                let table = match table {
                    TableKind::Full => ConnectionTable::full(maps, out),
                    TableKind::Lenet5 => ConnectionTable::lenet5_c3(),
                };
                maps = out;
                side = side - kernel + 1;
                Layer::Conv(Conv::new(table, kernel, kernel))
            }
            LayerSpec::Nonlin(NonlinearityKind::Tanh) => Layer::Nonlin(Nonlinearity::Tanh),
            LayerSpec::Nonlin(NonlinearityKind::RectifiedSigmoid) => Layer::Nonlin(Nonlinearity::rectified(maps)),
            LayerSpec::SubNorm { window } => Layer::SubNorm(SubtractiveNorm {
                window: norm_window(window)?,
            }),
            LayerSpec::DivNorm { window } => Layer::DivNorm(DivisiveNorm {
                window: norm_window(window)?,
                epsilon: DEFAULT_EPSILON,
            }),
            LayerSpec::Pool { kind, size } => {
                side /= size;
                match kind {
                    PoolingKind::Subs => Layer::Subs(Subsampling::new(maps, size)),
                    PoolingKind::L2Pool => Layer::LpPool(LpPool::new(size, size, PNorm::Finite(2.0))),
                }
            }
            LayerSpec::Full { outputs, activation } => {
                let layer = Layer::Full(FullLayer::new(maps * side * side, outputs, activation));
                maps = outputs;
                side = 1;
                layer
            }
        };
        layers.push(layer);
    }
    let mut net = Network::new(Shape::new(1, cfg.input_side, cfg.input_side), layers)?;
    net.initialize(&mut seed::rng(seed, &[seed::labels::INIT]));
    Ok(net)
}

/// Gaussian with sigma = side / 4.
fn norm_window(side: usize) -> Result<GaussianWindow> {
    GaussianWindow::new(side, side as f64 / 4.0)
}

/// How the `synth` stage shapes its spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthMode {
    /// Class-specific continua and line lists.
    Templates,
    /// Shared random continua; classes differ only in fine line structure.
    Lines,
}

impl SynthMode {
    pub fn name(self) -> &'static str {
        match self {
            SynthMode::Templates => "templates",
            SynthMode::Lines => "lines",
        }
    }
}

impl std::str::FromStr for SynthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "templates" => Ok(SynthMode::Templates),
            "lines" => Ok(SynthMode::Lines),
            other => Err(Error::Config(format!("unknown synth mode `{other}` (templates | lines)"))),
        }
    }
}

/// Everything one pipeline run needs: topology, optimizer, data sizes and
/// on-disk locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub root: String,
    pub arch: ArchName,
    pub input: usize,
    pub body: BodyOptions,
    pub train: TrainConfig,
    pub catalog: String,
    pub sets: String,
    pub spectra: String,
    pub imgs: String,
    pub work: String,
    pub intervals: usize,
    pub targets: SplitTargets,
    /// Per-class spectra generated for each split.
    pub synth_counts: [usize; 3],
    pub synth_noise: f64,
    pub synth_z: (f64, f64),
    pub synth_mode: SynthMode,
}

const KEYS: &[&str] = &[
    "name",
    "root",
    "arch",
    "input",
    "pooling",
    "nonlin",
    "c3_table",
    "norm_window",
    "beta",
    "eta",
    "decay",
    "epochs",
    "seed",
    "catalog",
    "sets",
    "spectra",
    "imgs",
    "work",
    "intervals",
    "train_targets",
    "valid_targets",
    "test_targets",
    "synth_train",
    "synth_valid",
    "synth_test",
    "synth_noise",
    "synth_z_min",
    "synth_z_max",
    "synth_mode",
];

/// Raw `key = value` entries before substitution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    /// Lines of `key = value`; `#` starts a comment line; blank lines skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: key `{k}` given twice", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.trim().to_string(), value.trim().to_string());
    }

    /// Applies a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{pair}` is not KEY=VALUE")))?;
        self.set(k, v);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Expands every `${var}` reference; `defaults` supplies values for
    /// variables the file does not define.
    pub fn resolve(&self, defaults: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
        let mut done = BTreeMap::new();
        for key in self.entries.keys() {
            let mut stack = Vec::new();
            self.expand_key(key, defaults, &mut done, &mut stack)?;
        }
        Ok(done)
    }

    fn expand_key(
        &self,
        key: &str,
        defaults: &BTreeMap<String, String>,
        done: &mut BTreeMap<String, String>,
        stack: &mut Vec<String>,
    ) -> Result<String> {
        if let Some(v) = done.get(key) {
            return Ok(v.clone());
        }
        if stack.iter().any(|k| k == key) {
            stack.push(key.to_string());
            return Err(Error::Config(format!("circular substitution: {}", stack.join(" -> "))));
        }
        let raw = match (self.entries.get(key), defaults.get(key)) {
            (Some(v), _) | (None, Some(v)) => v.clone(),
            (None, None) => return Err(Error::Config(format!("undefined variable `${{{key}}}`"))),
        };
        stack.push(key.to_string());
        let mut out = String::new();
        let mut rest = raw.as_str();
        while let Some(start) = rest.find("${") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let end = after
                .find('}')
                .ok_or_else(|| Error::Config(format!("unterminated `${{` in `{key}`")))?;
            out.push_str(&self.expand_key(&after[..end], defaults, done, stack)?);
            rest = &after[end + 1..];
        }
        out.push_str(rest);
        stack.pop();
        done.insert(key.to_string(), out.clone());
        Ok(out)
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
}

fn parse_triple(key: &str, v: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "`{key}` needs three comma-separated counts (galaxy,qso,star), got `{v}`"
        )));
    }
    Ok([
        parse_value(key, parts[0])?,
        parse_value(key, parts[1])?,
        parse_value(key, parts[2])?,
    ])
}

fn triple(v: [usize; 3]) -> String {
    format!("{},{},{}", v[0], v[1], v[2])
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::with_root(".")
    }
}

impl ExperimentConfig {
    fn with_root(root: &str) -> Self {
        Self {
            name: "spectra".into(),
            root: root.into(),
            arch: ArchName::Lenet5,
            input: 60,
            body: BodyOptions::default(),
            train: TrainConfig {
                eta0: 0.01,
                decay: 0.05,
                epochs: 20,
                seed: 1,
            },
            catalog: format!("{root}/catalog/catalog.txt"),
            sets: format!("{root}/sets"),
            spectra: format!("{root}/spectra"),
            imgs: format!("{root}/imgs"),
            work: format!("{root}/class"),
            intervals: crate::sampler::DEFAULT_INTERVALS,
            targets: SplitTargets::FULL_SURVEY,
            synth_counts: [200, 20, 40],
            synth_noise: 0.05,
            synth_z: (0.0, 1.5),
            synth_mode: SynthMode::Templates,
        }
    }

    /// Parses a config file; `arch` is required.
    pub fn parse(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        if raw.get("arch").is_none() {
            return Err(Error::Config("missing required key `arch`".into()));
        }
        Self::from_raw(&raw)
    }

    /// Builds a config from raw entries; absent keys take defaults, path
    /// keys default to folders under `root`.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut defaults = BTreeMap::new();
        defaults.insert("root".to_string(), ".".to_string());
        let values = raw.resolve(&defaults)?;
        if let Some(k) = values.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let root = values.get("root").cloned().unwrap_or_else(|| ".".into());
        let mut cfg = Self::with_root(&root);
        let mut z = cfg.synth_z;
        for (k, v) in &values {
            let k = k.as_str();
            match k {
                "name" => cfg.name = v.clone(),
                "root" => {}
                "arch" => cfg.arch = v.parse()?,
                "input" => cfg.input = parse_value(k, v)?,
                "pooling" => cfg.body.pooling = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                "nonlin" => {
                    cfg.body.nonlin = match v.as_str() {
                        "tanh" => NonlinearityKind::Tanh,
                        "rect" | "rectified" => NonlinearityKind::RectifiedSigmoid,
                        _ => return Err(Error::Config(format!("invalid value `{v}` for `nonlin` (tanh | rect)"))),
                    }
                }
                "c3_table" => {
                    cfg.body.c3_table = match v.as_str() {
                        "full" => TableKind::Full,
                        "lenet5" => TableKind::Lenet5,
                        _ => return Err(Error::Config(format!("invalid value `{v}` for `c3_table` (full | lenet5)"))),
                    }
                }
                "norm_window" => cfg.body.norm_window = parse_value(k, v)?,
                "beta" => cfg.body.beta = parse_value(k, v)?,
                "eta" => cfg.train.eta0 = parse_value(k, v)?,
                "decay" => cfg.train.decay = parse_value(k, v)?,
                "epochs" => cfg.train.epochs = parse_value(k, v)?,
                "seed" => cfg.train.seed = parse_value(k, v)?,
                "catalog" => cfg.catalog = v.clone(),
                "sets" => cfg.sets = v.clone(),
                "spectra" => cfg.spectra = v.clone(),
                "imgs" => cfg.imgs = v.clone(),
                "work" => cfg.work = v.clone(),
                "intervals" => cfg.intervals = parse_value(k, v)?,
                "train_targets" => cfg.targets.train = parse_triple(k, v)?,
                "valid_targets" => cfg.targets.valid = parse_triple(k, v)?,
                "test_targets" => cfg.targets.test = parse_triple(k, v)?,
                "synth_train" => cfg.synth_counts[0] = parse_value(k, v)?,
                "synth_valid" => cfg.synth_counts[1] = parse_value(k, v)?,
                "synth_test" => cfg.synth_counts[2] = parse_value(k, v)?,
                "synth_noise" => cfg.synth_noise = parse_value(k, v)?,
                "synth_z_min" => z.0 = parse_value(k, v)?,
                "synth_z_max" => z.1 = parse_value(k, v)?,
                "synth_mode" => cfg.synth_mode = v.parse()?,
                _ => unreachable!("keys checked above"),
            }
        }
        cfg.synth_z = z;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if !(self.synth_noise >= 0.0) || !(self.synth_z.0 >= 0.0 && self.synth_z.1 >= self.synth_z.0) {
            return Err(Error::Config(format!(
                "synth noise must be >= 0 and 0 <= z_min <= z_max, got {} / {:?}",
                self.synth_noise, self.synth_z
            )));
        }
        if self.intervals == 0 {
            return Err(Error::Config("intervals must be positive".into()));
        }
        if !(self.body.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.body.beta)));
        }
        self.network()?;
        Ok(())
    }

    pub fn network(&self) -> Result<NetworkConfig> {
        build_arch(self.arch, self.input, &self.body)
    }

    /// Every key with its resolved value, one per line.
    pub fn serialize(&self) -> String {
        let b = &self.body;
        let nonlin = match b.nonlin {
            NonlinearityKind::Tanh => "tanh",
            NonlinearityKind::RectifiedSigmoid => "rect",
        };
        let rows: Vec<(&str, String)> = vec![
            ("name", self.name.clone()),
            ("root", self.root.clone()),
            ("arch", self.arch.name().into()),
            ("input", self.input.to_string()),
            ("pooling", b.pooling.name().into()),
            ("nonlin", nonlin.into()),
            ("c3_table", b.c3_table.name().into()),
            ("norm_window", b.norm_window.to_string()),
            ("beta", b.beta.to_string()),
            ("eta", self.train.eta0.to_string()),
            ("decay", self.train.decay.to_string()),
            ("epochs", self.train.epochs.to_string()),
            ("seed", self.train.seed.to_string()),
            ("catalog", self.catalog.clone()),
            ("sets", self.sets.clone()),
            ("spectra", self.spectra.clone()),
            ("imgs", self.imgs.clone()),
            ("work", self.work.clone()),
            ("intervals", self.intervals.to_string()),
            ("train_targets", triple(self.targets.train)),
            ("valid_targets", triple(self.targets.valid)),
            ("test_targets", triple(self.targets.test)),
            ("synth_train", self.synth_counts[0].to_string()),
            ("synth_valid", self.synth_counts[1].to_string()),
            ("synth_test", self.synth_counts[2].to_string()),
            ("synth_noise", self.synth_noise.to_string()),
            ("synth_z_min", self.synth_z.0.to_string()),
            ("synth_z_max", self.synth_z.1.to_string()),
            ("synth_mode", self.synth_mode.name().into()),
        ];
        rows.iter().map(|(k, v)| format!("{k:<14} = {v}\n")).collect()
    }
}

/// Keys that name filesystem locations.
pub fn path_keys() -> BTreeSet<&'static str> {
    ["root", "catalog", "sets", "spectra", "imgs", "work"].into_iter().collect()
}
