//! Survey catalog records and quality flags.
//!
//! The catalog is a whitespace-separated text table with the fixed column
//! order `PLATE MJD FIBERID SPECBOSS ZWARNING CLASS Z`. Lines starting with
//! `#` are comments.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectroscopic object class. The integer codes are the catalog encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    Galaxy,
    Quasar,
    Star,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 3] = [ObjectClass::Galaxy, ObjectClass::Quasar, ObjectClass::Star];
    pub const COUNT: usize = 3;

    pub fn code(self) -> u8 {
        match self {
            ObjectClass::Galaxy => 0,
            ObjectClass::Quasar => 1,
            ObjectClass::Star => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ObjectClass::Galaxy),
            1 => Some(ObjectClass::Quasar),
            2 => Some(ObjectClass::Star),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.code() as usize
    }

    /// Lower-case name used in listings and directory names.
    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Galaxy => "galaxy",
            ObjectClass::Quasar => "qso",
            ObjectClass::Star => "star",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galaxy" => Ok(ObjectClass::Galaxy),
            "qso" | "quasar" => Ok(ObjectClass::Quasar),
            "star" => Ok(ObjectClass::Star),
            other => Err(Error::InvalidArgument(format!("unknown class `{other}`"))),
        }
    }
}

/// (plate, mjd, fiberid): unique identity of one observed spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectId {
    pub plate: u32,
    pub mjd: u32,
    pub fiberid: u32,
}

impl ObjectId {
    pub fn new(plate: u32, mjd: u32, fiberid: u32) -> Self {
        Self { plate, mjd, fiberid }
    }

    /// `PLATE-MJD-FIBERID` with the archive's zero padding, e.g. `5374-55947-0860`.
    pub fn file_stem(&self) -> String {
        format!("{:04}-{:05}-{:04}", self.plate, self.mjd, self.fiberid)
    }

    pub fn parse_stem(stem: &str) -> Option<Self> {
        let mut it = stem.split('-').map(|p| p.parse::<u32>().ok());
        let id = ObjectId::new(it.next()??, it.next()??, it.next()??);
        it.next().is_none().then_some(id)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.file_stem())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub id: ObjectId,
    pub specboss: u8,
    pub zwarning: u32,
    pub class: ObjectClass,
    pub z: f64,
}

impl CatalogRecord {
    pub fn is_good(&self) -> bool {
        self.specboss == 1 && self.zwarning == 0
    }
}

/// Pipeline warning bits of the ZWARNING mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZWarningFlag {
    Sky,
    LittleCoverage,
    SmallDeltaChi2,
    NegativeModel,
    ManyOutliers,
    ZFitLimit,
    NegativeEmission,
    Unplugged,
}

impl ZWarningFlag {
    pub const ALL: [ZWarningFlag; 8] = [
        ZWarningFlag::Sky,
        ZWarningFlag::LittleCoverage,
        ZWarningFlag::SmallDeltaChi2,
        ZWarningFlag::NegativeModel,
        ZWarningFlag::ManyOutliers,
        ZWarningFlag::ZFitLimit,
        ZWarningFlag::NegativeEmission,
        ZWarningFlag::Unplugged,
    ];

    pub fn bit(self) -> u32 {
        self as u32
    }

    pub fn name(self) -> &'static str {
        match self {
            ZWarningFlag::Sky => "SKY",
            ZWarningFlag::LittleCoverage => "LITTLE_COVERAGE",
            ZWarningFlag::SmallDeltaChi2 => "SMALL_DELTA_CHI2",
            ZWarningFlag::NegativeModel => "NEGATIVE_MODEL",
            ZWarningFlag::ManyOutliers => "MANY_OUTLIERS",
            ZWarningFlag::ZFitLimit => "Z_FITLIMIT",
            ZWarningFlag::NegativeEmission => "NEGATIVE_EMISSION",
            ZWarningFlag::Unplugged => "UNPLUGGED",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ZWarningFlag::Sky => "sky fiber",
            ZWarningFlag::LittleCoverage => "insufficient wavelength coverage",
            ZWarningFlag::SmallDeltaChi2 => "chi-squared gap between best and second-best fit below 0.01",
            ZWarningFlag::NegativeModel => "synthetic spectrum negative",
            ZWarningFlag::ManyOutliers => "more than 5% of points above 5 sigma from the model",
            ZWarningFlag::ZFitLimit => "chi-squared minimum at the edge of the redshift range",
            ZWarningFlag::NegativeEmission => "negative emission in a quasar line above 3 sigma",
            ZWarningFlag::Unplugged => "broken or unplugged fiber",
        }
    }
}

impl fmt::Display for ZWarningFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Flags set in `mask`, in ascending bit order.
pub fn decode_zwarning(mask: u32) -> Result<Vec<ZWarningFlag>> {
    if mask >= 1 << 8 {
        return Err(Error::UnknownFlagBits(mask));
    }
    Ok(ZWarningFlag::ALL
        .into_iter()
        .filter(|f| mask & (1 << f.bit()) != 0)
        .collect())
}

/// Records with `SPECBOSS = 1` and `ZWARNING = 0`, order preserved.
pub fn filter_good(records: &[CatalogRecord]) -> Vec<CatalogRecord> {
    records.iter().filter(|r| r.is_good()).copied().collect()
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record = parse_line(line, line_no)?;
        if !seen.insert(record.id) {
            return Err(Error::DuplicateRecord {
                line: line_no,
                plate: record.id.plate,
                mjd: record.id.mjd,
                fiberid: record.id.fiberid,
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_line(line: &str, line_no: usize) -> Result<CatalogRecord> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 7 {
        return Err(Error::parse(
            line_no,
            format!("expected 7 columns (PLATE MJD FIBERID SPECBOSS ZWARNING CLASS Z), found {}", fields.len()),
        ));
    }
    let int = |i: usize, name: &str| -> Result<u32> {
        fields[i]
            .parse::<u32>()
            .map_err(|_| Error::parse(line_no, format!("{name}: `{}` is not a non-negative integer", fields[i])))
    };
    let plate = int(0, "PLATE")?;
    let mjd = int(1, "MJD")?;
    let fiberid = int(2, "FIBERID")?;
    let specboss = int(3, "SPECBOSS")?;
    if specboss > 1 {
        return Err(Error::parse(line_no, format!("SPECBOSS must be 0 or 1, found {specboss}")));
    }
    let zwarning = int(4, "ZWARNING")?;
    let code = int(5, "CLASS")?;
    let class = u8::try_from(code)
        .ok()
        .and_then(ObjectClass::from_code)
        .ok_or_else(|| Error::parse(line_no, format!("CLASS code {code} outside {{0,1,2}}")))?;
    let z: f64 = fields[6]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("Z: `{}` is not a number", fields[6])))?;
    if !z.is_finite() || z <= -1.0 {
        return Err(Error::parse(line_no, format!("Z must be finite and > -1, found {z}")));
    }
    Ok(CatalogRecord {
        id: ObjectId::new(plate, mjd, fiberid),
        specboss: specboss as u8,
        zwarning,
        class,
        z,
    })
}

/// Writes records in the catalog text format. `parse_catalog` inverts it
/// exactly: redshifts are printed with the shortest round-trip form.
pub fn serialize_catalog(records: &[CatalogRecord]) -> String {
    let mut out = String::from("#PLATE MJD FIBERID SPECBOSS ZWARNING CLASS Z\n");
    for r in records {
        out.push_str(&format!(
            "{} {} {} {} {} {} {:?}\n",
            r.id.plate,
            r.id.mjd,
            r.id.fiberid,
            r.specboss,
            r.zwarning,
            r.class.code(),
            r.z
        ));
    }
    out
}

pub fn read_catalog(path: &Path) -> Result<Vec<CatalogRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(&text)
}

pub fn write_catalog(path: &Path, records: &[CatalogRecord]) -> Result<()> {
    fs::write(path, serialize_catalog(records)).map_err(|e| Error::io(path, e))
}
