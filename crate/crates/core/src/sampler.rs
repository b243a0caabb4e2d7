//! Redshift-stratified dataset construction.
//!
//! A class's redshift range is cut into equidistant intervals, each interval
//! receives a quota (largest-remainder share of the requested total), and the
//! quota is drawn from the interval's members with a seeded shuffle. Intervals
//! that hold fewer records than their quota contribute everything they have;
//! the shortfall is not moved to other intervals.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogRecord, ObjectClass, ObjectId};
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_INTERVALS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratifiedPlan {
    pub n_intervals: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub target_total: usize,
    pub seed: u64,
}

impl StratifiedPlan {
    pub fn new(n_intervals: usize, z_min: f64, z_max: f64, target_total: usize, seed: u64) -> Result<Self> {
        let plan = Self {
            n_intervals,
            z_min,
            z_max,
            target_total,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan spanning the observed redshift range of `records`.
    pub fn covering(records: &[CatalogRecord], n_intervals: usize, target_total: usize, seed: u64) -> Result<Self> {
        let (lo, hi) = z_range(records).ok_or_else(|| Error::InvalidArgument("empty record list".into()))?;
        // A single-valued pool still needs a non-empty range.
        let hi = if hi > lo { hi } else { lo + 1e-9_f64.max(lo.abs() * 1e-12) };
        Self::new(n_intervals, lo, hi, target_total, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n_intervals == 0 {
            return Err(Error::InvalidArgument("n_intervals must be positive".into()));
        }
        if !(self.z_min.is_finite() && self.z_max.is_finite() && self.z_min < self.z_max) {
            return Err(Error::InvalidArgument(format!(
                "redshift range [{}, {}] is empty",
                self.z_min, self.z_max
            )));
        }
        if self.target_total == 0 {
            return Err(Error::InvalidArgument("target_total must be positive".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.z_max - self.z_min) / self.n_intervals as f64
    }

    /// Interval holding `z`; `z_max` itself falls in the last interval.
    pub fn interval_of(&self, z: f64) -> usize {
        let k = ((z - self.z_min) / self.width()).floor();
        (k.max(0.0) as usize).min(self.n_intervals - 1)
    }

    /// Largest-remainder apportionment of `target_total`; the first
    /// `target_total % n_intervals` intervals carry the extra unit.
    pub fn quotas(&self) -> Vec<usize> {
        apportion(self.target_total, self.n_intervals)
    }
}

pub(crate) fn apportion(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let rem = total % parts;
    (0..parts).map(|k| base + usize::from(k < rem)).collect()
}

fn z_range(records: &[CatalogRecord]) -> Option<(f64, f64)> {
    records.iter().fold(None, |acc, r| match acc {
        None => Some((r.z, r.z)),
        Some((lo, hi)) => Some((lo.min(r.z), hi.max(r.z))),
    })
}

fn sort_key(a: &CatalogRecord, b: &CatalogRecord) -> std::cmp::Ordering {
    a.z.total_cmp(&b.z).then(a.id.cmp(&b.id))
}

pub fn stratified_select(records: &[CatalogRecord], plan: &StratifiedPlan) -> Result<Vec<CatalogRecord>> {
    plan.validate()?;
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty record list".into()))?;
    if let Some(r) = records.iter().find(|r| r.class != first.class) {
        return Err(Error::InvalidArgument(format!(
            "stratified selection needs a single class, found {} and {}",
            first.class, r.class
        )));
    }
    if let Some(r) = records.iter().find(|r| !(plan.z_min..=plan.z_max).contains(&r.z)) {
        return Err(Error::InvalidArgument(format!(
            "record {} has z = {} outside [{}, {}]",
            r.id, r.z, plan.z_min, plan.z_max
        )));
    }

    let mut buckets: Vec<Vec<CatalogRecord>> = vec![Vec::new(); plan.n_intervals];
    for r in records {
        buckets[plan.interval_of(r.z)].push(*r);
    }

    let mut selected = Vec::with_capacity(plan.target_total);
    for (k, (mut bucket, quota)) in buckets.into_iter().zip(plan.quotas()).enumerate() {
        if bucket.len() > quota {
            bucket.sort_by(sort_key);
            bucket.shuffle(&mut seed::rng(plan.seed, &[k as u64]));
            bucket.truncate(quota);
        }
        selected.extend(bucket);
    }
    selected.sort_by(sort_key);
    Ok(selected)
}

/// Per-interval counts of `records` under `plan`.
pub fn interval_counts(records: &[CatalogRecord], plan: &StratifiedPlan) -> Vec<usize> {
    let mut counts = vec![0; plan.n_intervals];
    for r in records {
        counts[plan.interval_of(r.z)] += 1;
    }
    counts
}

/// Histogram with bin edges at integer multiples of `bin_width`, covering
/// the occupied range contiguously (empty inner bins are listed with 0).
pub fn histogram(zs: &[f64], bin_width: f64) -> Result<Vec<(f64, usize)>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width must be positive, got {bin_width}")));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &z in zs {
        *counts.entry((z / bin_width).floor() as i64).or_default() += 1;
    }
    let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Ok(Vec::new());
    };
    Ok((lo..=hi)
        .map(|k| (k as f64 * bin_width, counts.get(&k).copied().unwrap_or(0)))
        .collect())
}

/// Right-continuous empirical CDF stored at its jump points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<(f64, f64)>,
    n: usize,
}

impl EmpiricalCdf {
    pub fn new(zs: &[f64]) -> Result<Self> {
        if zs.is_empty() {
            return Err(Error::InvalidArgument("empirical CDF of an empty sample".into()));
        }
        if zs.iter().any(|z| z.is_nan()) {
            return Err(Error::InvalidArgument("NaN in CDF sample".into()));
        }
        let mut sorted = zs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, &z) in sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n as f64;
            match points.last_mut() {
                Some(last) if last.0 == z => last.1 = frac,
                _ => points.push((z, frac)),
            }
        }
        Ok(Self { points, n })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.0 <= x);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
    pub fn ks_distance(&self, other: &EmpiricalCdf) -> f64 {
        // Both step functions only change at their jump points.
        self.points
            .iter()
            .chain(other.points.iter())
            .map(|&(x, _)| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    /// KS distance to a continuous reference CDF.
    pub fn ks_distance_to(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let mut prev = 0.0;
        let mut d: f64 = 0.0;
        for &(x, frac) in &self.points {
            let f = reference(x);
            d = d.max((frac - f).abs()).max((f - prev).abs());
            prev = frac;
        }
        d
    }
}

/// CDF of the uniform distribution on `[lo, hi]`.
pub fn uniform_cdf(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Requested size per split and class (`[galaxy, qso, star]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTargets {
    pub train: [usize; 3],
    pub valid: [usize; 3],
    pub test: [usize; 3],
}

impl SplitTargets {
    /// Roughly 1:1:1 class ratio with split totals 31 775 / 3 103 / 60 329.
    pub const FULL_SURVEY: SplitTargets = SplitTargets {
        train: [10_592, 10_592, 10_591],
        valid: [1_035, 1_034, 1_034],
        test: [20_110, 20_110, 20_109],
    };

    pub fn uniform(train: usize, valid: usize, test: usize) -> Self {
        Self {
            train: [train; 3],
            valid: [valid; 3],
            test: [test; 3],
        }
    }

    pub fn get(&self, split: Split) -> [usize; 3] {
        match split {
            Split::Train => self.train,
            Split::Valid => self.valid,
            Split::Test => self.test,
        }
    }

    pub fn total(&self, split: Split) -> usize {
        self.get(split).iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shortfall {
    pub split: Split,
    pub class: ObjectClass,
    pub target: usize,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub train: Vec<CatalogRecord>,
    pub valid: Vec<CatalogRecord>,
    pub test: Vec<CatalogRecord>,
    pub shortfalls: Vec<Shortfall>,
}

impl DatasetSplit {
    pub fn get(&self, split: Split) -> &[CatalogRecord] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    fn get_mut(&mut self, split: Split) -> &mut Vec<CatalogRecord> {
        match split {
            Split::Train => &mut self.train,
            Split::Valid => &mut self.valid,
            Split::Test => &mut self.test,
        }
    }
}

/// Builds train, valid and test sets in that order. Each class pool keeps
/// one interval grid (its observed redshift range) for all three splits,
/// and every selection is removed from the pool before the next split.
pub fn build_splits(
    pools: &BTreeMap<ObjectClass, Vec<CatalogRecord>>,
    targets: &SplitTargets,
    n_intervals: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    let mut out = DatasetSplit::default();
    for (&class, records) in pools {
        if let Some(r) = records.iter().find(|r| r.class != class) {
            return Err(Error::InvalidArgument(format!("record {} of class {} in the {class} pool", r.id, r.class)));
        }
        let grid = match StratifiedPlan::covering(records, n_intervals, 1, seed) {
            Ok(plan) => Some(plan),
            Err(_) if records.is_empty() => None,
            Err(e) => return Err(e),
        };
        let mut remaining = records.clone();
        for split in Split::ALL {
            let target = targets.get(split)[class.index()];
            if target == 0 {
                continue;
            }
            let picked = match (&grid, remaining.is_empty()) {
                (Some(grid), false) => {
                    let plan = StratifiedPlan {
                        target_total: target,
                        seed: seed::derive(seed, &[class.code() as u64, split as u64]),
                        ..*grid
                    };
                    stratified_select(&remaining, &plan)?
                }
                _ => Vec::new(),
            };
            if picked.len() < target {
                out.shortfalls.push(Shortfall {
                    split,
                    class,
                    target,
                    selected: picked.len(),
                });
            }
            let taken: HashSet<ObjectId> = picked.iter().map(|r| r.id).collect();
            remaining.retain(|r| !taken.contains(&r.id));
            out.get_mut(split).extend(picked);
        }
    }
    for split in Split::ALL {
        out.get_mut(split).sort_by(|a, b| a.class.cmp(&b.class).then(sort_key(a, b)));
    }
    Ok(out)
}

/// One row of a dataset list: identity, catalog class, redshift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetEntry {
    pub id: ObjectId,
    pub class: ObjectClass,
    pub z: f64,
}

impl From<&CatalogRecord> for SetEntry {
    fn from(r: &CatalogRecord) -> Self {
        SetEntry {
            id: r.id,
            class: r.class,
            z: r.z,
        }
    }
}

pub const SET_LIST_HEADER: &str = "#PLATE MJD FIBERID CLASS REDSHIFT";

/// Dataset list text: header, then `PLATE MJD FIBERID CLASS REDSHIFT` rows
/// separated by tabs with the redshift at 10 decimals.
pub fn format_set_list(entries: &[SetEntry]) -> String {
    let mut out = String::with_capacity(40 * (entries.len() + 1));
    out.push_str(SET_LIST_HEADER);
    out.push('\n');
    for e in entries {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.10}",
            e.id.plate,
            e.id.mjd,
            e.id.fiberid,
            e.class.code(),
            e.z
        );
    }
    out
}

pub fn parse_set_list(text: &str) -> Result<Vec<SetEntry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::parse(idx + 1, format!("expected 5 columns, found {}", f.len())));
        }
        let num = |i: usize| {
            f[i].parse::<u32>()
                .map_err(|_| Error::parse(idx + 1, format!("`{}` is not an integer", f[i])))
        };
        let class = ObjectClass::from_code(num(3)?.min(255) as u8)
            .ok_or_else(|| Error::parse(idx + 1, format!("CLASS code {} outside {{0,1,2}}", f[3])))?;
        let z = f[4]
            .parse::<f64>()
            .map_err(|_| Error::parse(idx + 1, format!("`{}` is not a number", f[4])))?;
        out.push(SetEntry {
            id: ObjectId::new(num(0)?, num(1)?, num(2)?),
            class,
            z,
        });
    }
    Ok(out)
}

pub fn write_set_list(path: &Path, entries: &[SetEntry]) -> Result<()> {
    fs::write(path, format_set_list(entries)).map_err(|e| Error::io(path, e))
}

pub fn read_set_list(path: &Path) -> Result<Vec<SetEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_set_list(&text)
}

/// Two-column whitespace-separated data for external plotting.
pub fn format_columns<A: std::fmt::Display, B: std::fmt::Display>(header: &str, rows: impl IntoIterator<Item = (A, B)>) -> String {
    let mut out = format!("# {header}\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

pub fn format_histogram(hist: &[(f64, usize)]) -> String {
    format_columns("z_lower count", hist.iter().map(|&(z, c)| (format!("{z:.6}"), c)))
}

pub fn format_cdf(cdf: &EmpiricalCdf) -> String {
    format_columns("z cumulative_fraction", cdf.points().iter().map(|&(z, f)| (format!("{z:.10}"), format!("{f:.10}"))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs_at(class: ObjectClass, zs: &[f64]) -> Vec<CatalogRecord> {
        zs.iter()
            .enumerate()
            .map(|(i, &z)| CatalogRecord {
                id: ObjectId::new(1000 + (i / 1000) as u32, 55000, (i % 1000) as u32 + 1),
                specboss: 1,
                zwarning: 0,
                class,
                z,
            })
            .collect()
    }

    fn uniform_pool(n: usize, hi: f64) -> Vec<CatalogRecord> {
        let zs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * hi / n as f64).collect();
        recs_at(ObjectClass::Quasar, &zs)
    }

    #[test]
    fn symmetric_case_takes_equal_share() {
        let pool = uniform_pool(400, 4.0);
        let plan = StratifiedPlan::new(4, 0.0, 4.0, 100, 1).unwrap();
        let sel = stratified_select(&pool, &plan).unwrap();
        assert_eq!(sel.len(), 100);
        assert_eq!(interval_counts(&sel, &plan), vec![25; 4]);
        assert!(sel.windows(2).all(|w| w[0].z <= w[1].z));
    }

    #[test]
    fn sparse_top_interval_keeps_everything_it_has() {
        let mut zs: Vec<f64> = (0..300).map(|i| i as f64 / 100.0).collect();
        zs.extend([3.2, 3.5, 3.9]);
        let pool = recs_at(ObjectClass::Quasar, &zs);
        let plan = StratifiedPlan::new(4, 0.0, 4.0, 100, 9).unwrap();
        let sel = stratified_select(&pool, &plan).unwrap();
        assert_eq!(interval_counts(&sel, &plan), vec![25, 25, 25, 3]);
    }

    #[test]
    fn selection_is_deterministic_and_seed_dependent() {
        let pool = uniform_pool(1000, 2.0);
        let plan = StratifiedPlan::new(10, 0.0, 2.0, 50, 42).unwrap();
        let a = stratified_select(&pool, &plan).unwrap();
        let b = stratified_select(&pool, &plan).unwrap();
        assert_eq!(a, b);
        let other = StratifiedPlan { seed: 43, ..plan };
        assert_ne!(a, stratified_select(&pool, &other).unwrap());
    }

    #[test]
    fn selection_errors() {
        let plan = StratifiedPlan {
            n_intervals: 2,
            z_min: 0.0,
            z_max: 1.0,
            target_total: 0,
            seed: 0,
        };
        assert!(stratified_select(&uniform_pool(10, 1.0), &plan).is_err());
        let plan = StratifiedPlan { target_total: 3, ..plan };
        assert!(stratified_select(&[], &plan).is_err());
        let mut mixed = uniform_pool(4, 1.0);
        mixed[0].class = ObjectClass::Star;
        assert!(stratified_select(&mixed, &plan).is_err());
        assert!(stratified_select(&uniform_pool(4, 2.0), &plan).is_err());
    }

    #[test]
    fn quotas_differ_by_at_most_one() {
        let plan = StratifiedPlan::new(7, 0.0, 1.0, 100, 0).unwrap();
        let q = plan.quotas();
        assert_eq!(q.iter().sum::<usize>(), 100);
        assert_eq!(q.iter().max().unwrap() - q.iter().min().unwrap(), 1);
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&[0.1, 0.1, 0.9], 0.5).unwrap(), vec![(0.0, 2), (0.5, 1)]);
        assert!(histogram(&[], 0.5).unwrap().is_empty());
        assert_eq!(histogram(&[2.3], 0.5).unwrap(), vec![(2.0, 1)]);
        assert_eq!(histogram(&[0.1, 1.1], 0.5).unwrap(), vec![(0.0, 1), (0.5, 0), (1.0, 1)]);
        assert!(histogram(&[1.0], 0.0).is_err());
    }

    #[test]
    fn cdf_steps() {
        let cdf = EmpiricalCdf::new(&[4.0, 2.0, 3.0, 1.0]).unwrap();
        assert_eq!(cdf.points(), &[(1.0, 0.25), (2.0, 0.5), (3.0, 0.75), (4.0, 1.0)]);
        assert_eq!(cdf.eval(0.5), 0.0);
        assert_eq!(cdf.eval(2.5), 0.5);
        assert_eq!(cdf.ks_distance(&cdf.clone()), 0.0);
        let tied = EmpiricalCdf::new(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(tied.points().len(), 2);
        assert!(EmpiricalCdf::new(&[]).is_err());
    }

    /// Brute-force KS oracle: evaluate both step functions on a dense grid
    /// that includes every sample point and its immediate neighbours.
    fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
        let frac = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let mut xs: Vec<f64> = a.iter().chain(b).flat_map(|&v| [v - 1e-9, v, v + 1e-9]).collect();
        xs.extend((0..=2000).map(|i| i as f64 / 400.0 - 0.5));
        xs.iter().map(|&x| (frac(a, x) - frac(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_brute_force() {
        let mut rng = seed::rng(3, &[]);
        use rand::Rng;
        for _ in 0..20 {
            let a: Vec<f64> = (0..rng.random_range(1..60)).map(|_| (rng.random::<f64>() * 40.0).round() / 10.0).collect();
            let b: Vec<f64> = (0..rng.random_range(1..60)).map(|_| rng.random::<f64>().powi(3) * 4.0).collect();
            let d = EmpiricalCdf::new(&a).unwrap().ks_distance(&EmpiricalCdf::new(&b).unwrap());
            assert!((d - brute_ks(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_to_continuous_reference() {
        // Brute force: sup over a grid that straddles each jump.
        let zs = [0.1, 0.15, 0.7, 0.9];
        let cdf = EmpiricalCdf::new(&zs).unwrap();
        let f = uniform_cdf(0.0, 1.0);
        let brute = zs
            .iter()
            .flat_map(|&v| [v - 1e-12, v])
            .chain((0..=1000).map(|i| i as f64 / 1000.0))
            .map(|x| (cdf.eval(x) - f(x)).abs())
            .fold(0.0, f64::max);
        assert!((cdf.ks_distance_to(&f) - brute).abs() < 1e-9);
    }

    #[test]
    fn stratified_selection_is_closer_to_uniform_than_a_skewed_pool() {
        // Pool heavily skewed toward low redshift: z = 4 u^3.
        let mut rng = seed::rng(11, &[]);
        use rand::Rng;
        let zs: Vec<f64> = (0..5000).map(|_| 4.0 * rng.random::<f64>().powi(3)).collect();
        let pool = recs_at(ObjectClass::Quasar, &zs);
        let plan = StratifiedPlan::covering(&pool, 20, 600, 5).unwrap();
        let sel = stratified_select(&pool, &plan).unwrap();
        let uni = uniform_cdf(plan.z_min, plan.z_max);
        let raw_d = EmpiricalCdf::new(&zs).unwrap().ks_distance_to(&uni);
        let sel_zs: Vec<f64> = sel.iter().map(|r| r.z).collect();
        let sel_d = EmpiricalCdf::new(&sel_zs).unwrap().ks_distance_to(&uni);
        assert!(sel_d < raw_d, "selection {sel_d} vs raw {raw_d}");
    }

    #[test]
    fn splits_are_disjoint_and_sized() {
        let mut pools = BTreeMap::new();
        for (k, class) in ObjectClass::ALL.into_iter().enumerate() {
            let zs: Vec<f64> = (0..300).map(|i| i as f64 / 300.0 * (k + 1) as f64).collect();
            let mut recs = recs_at(class, &zs);
            for r in &mut recs {
                r.id.plate += 10 * k as u32;
            }
            pools.insert(class, recs);
        }
        let split = build_splits(&pools, &SplitTargets::uniform(100, 10, 50), 10, 77).unwrap();
        assert_eq!((split.train.len(), split.valid.len(), split.test.len()), (300, 30, 150));
        assert!(split.shortfalls.is_empty());
        let mut ids = HashSet::new();
        for s in Split::ALL {
            for r in split.get(s) {
                assert!(ids.insert(r.id), "{} appears twice", r.id);
            }
        }

        let empty = build_splits(&pools, &SplitTargets::uniform(0, 0, 0), 10, 77).unwrap();
        assert!(empty.train.is_empty() && empty.valid.is_empty() && empty.test.is_empty());
    }

    #[test]
    fn oversubscribed_targets_report_shortfall() {
        let mut pools = BTreeMap::new();
        pools.insert(ObjectClass::Star, recs_at(ObjectClass::Star, &[0.0, 0.001, 0.002]));
        let split = build_splits(&pools, &SplitTargets::uniform(2, 2, 2), 1, 0).unwrap();
        let total: usize = Split::ALL.iter().map(|&s| split.get(s).len()).sum();
        assert_eq!(total, 3);
        assert!(!split.shortfalls.is_empty());
        assert!(split.shortfalls.iter().all(|s| s.selected < s.target));
    }

    #[test]
    fn full_survey_targets_have_expected_totals() {
        let t = SplitTargets::FULL_SURVEY;
        assert_eq!(
            (t.total(Split::Train), t.total(Split::Valid), t.total(Split::Test)),
            (31_775, 3_103, 60_329)
        );
    }

    #[test]
    fn set_list_format() {
        let entries = [SetEntry {
            id: ObjectId::new(5169, 56045, 524),
            class: ObjectClass::Quasar,
            z: 3.59926,
        }];
        let text = format_set_list(&entries);
        assert_eq!(text, "#PLATE MJD FIBERID CLASS REDSHIFT\n5169\t56045\t524\t1\t3.5992600000\n");
        assert_eq!(parse_set_list(&text).unwrap(), entries);
    }
}
