//! NACE Rev. 2 codes, technology-sector flags, and employee size classes.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("malformed NACE code {raw:?}")]
    MalformedNace { raw: String },
    #[error("sector rules line {line}: {message}")]
    Rules { line: u64, message: String },
    #[error("unknown sector {0:?} (expected all, htm, mhtm, kis or htkis)")]
    UnknownSector(String),
}

/// A NACE code normalised to its 2- or 3-digit analysis form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NaceCode {
    code: String,
    raw: String,
}

impl NaceCode {
    pub fn as_str(&self) -> &str {
        &self.code
    }

    /// The input as it appeared before normalisation.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Two-digit division prefix.
    pub fn division(&self) -> &str {
        &self.code[..2]
    }

    /// The three-digit group, if the code is that specific.
    pub fn group(&self) -> Option<&str> {
        (self.code.len() == 3).then_some(self.code.as_str())
    }
}

impl fmt::Display for NaceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

/// Strips dots and truncates to at most three digits: `"30.3"` → `303`,
/// `"6201"` → `620`, `"21"` → `21`.
pub fn normalize_nace(raw: &str) -> Result<NaceCode, TaxonomyError> {
    let malformed = || TaxonomyError::MalformedNace { raw: raw.to_owned() };
    let digits: String = raw.trim().chars().filter(|&c| c != '.').collect();
    if digits.len() < 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let code = digits[..digits.len().min(3)].to_owned();
    Ok(NaceCode {
        code,
        raw: raw.to_owned(),
    })
}

/// High-/medium-high-tech manufacturing and knowledge-intensive service flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorFlags {
    pub htm: bool,
    pub mhtm: bool,
    pub kis: bool,
    pub htkis: bool,
}

impl SectorFlags {
    pub const NONE: SectorFlags = SectorFlags {
        htm: false,
        mhtm: false,
        kis: false,
        htkis: false,
    };
    const HTM: SectorFlags = SectorFlags {
        htm: true,
        ..Self::NONE
    };
    const MHTM: SectorFlags = SectorFlags {
        mhtm: true,
        ..Self::NONE
    };
    const KIS: SectorFlags = SectorFlags {
        kis: true,
        ..Self::NONE
    };
    const HTKIS: SectorFlags = SectorFlags {
        kis: true,
        htkis: true,
        ..Self::NONE
    };

    /// `htkis ⇒ kis` and not both manufacturing tiers.
    pub fn is_consistent(&self) -> bool {
        (!self.htkis || self.kis) && !(self.htm && self.mhtm)
    }

    pub fn is_none(&self) -> bool {
        *self == Self::NONE
    }
}

impl fmt::Display for SectorFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.htm, "htm"),
            (self.mhtm, "mhtm"),
            (self.kis, "kis"),
            (self.htkis, "htkis"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("+"))
        }
    }
}

/// Sector subset selector used by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorFilter {
    All,
    Htm,
    Mhtm,
    Kis,
    Htkis,
}

impl SectorFilter {
    pub const ALL: [SectorFilter; 5] = [
        SectorFilter::All,
        SectorFilter::Htm,
        SectorFilter::Mhtm,
        SectorFilter::Kis,
        SectorFilter::Htkis,
    ];

    pub fn matches(self, flags: SectorFlags) -> bool {
        match self {
            SectorFilter::All => true,
            SectorFilter::Htm => flags.htm,
            SectorFilter::Mhtm => flags.mhtm,
            SectorFilter::Kis => flags.kis,
            SectorFilter::Htkis => flags.htkis,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SectorFilter::All => "all",
            SectorFilter::Htm => "htm",
            SectorFilter::Mhtm => "mhtm",
            SectorFilter::Kis => "kis",
            SectorFilter::Htkis => "htkis",
        }
    }
}

impl fmt::Display for SectorFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SectorFilter {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SectorFilter::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TaxonomyError::UnknownSector(s.to_owned()))
    }
}

/// Code → flags rule table. A 3-digit entry overrides its 2-digit division;
/// codes matching neither classify as no sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorRules {
    rules: HashMap<String, SectorFlags>,
}

impl SectorRules {
    /// The built-in Eurostat/OECD high-tech and knowledge-intensive mapping.
    pub fn builtin() -> &'static SectorRules {
        static RULES: OnceLock<SectorRules> = OnceLock::new();
        RULES.get_or_init(|| {
            let mut rules = HashMap::new();
            let mut set = |code: String, flags| {
                rules.insert(code, flags);
            };
            for division in [21, 26] {
                set(division.to_string(), SectorFlags::HTM);
            }
            for division in [20, 27, 28, 29, 30] {
                set(division.to_string(), SectorFlags::MHTM);
            }
            // explicit groups inside divisions that are otherwise unflagged or MHTM
            set("254".into(), SectorFlags::MHTM);
            set("325".into(), SectorFlags::MHTM);
            set("301".into(), SectorFlags::NONE);
            set("303".into(), SectorFlags::HTM);

            let kis = [50, 51]
                .into_iter()
                .chain(58..=66)
                .chain(69..=75)
                .chain([78, 80])
                .chain(84..=93);
            for division in kis {
                let high_tech = (59..=63).contains(&division) || division == 72;
                let flags = if high_tech { SectorFlags::HTKIS } else { SectorFlags::KIS };
                set(division.to_string(), flags);
            }
            SectorRules { rules }
        })
    }

    /// Reads a replacement rule table from CSV with header `code,flags`,
    /// where `flags` is a `+`-separated subset of `htm`, `mhtm`, `kis`,
    /// `htkis`, or empty / `none`.
    pub fn from_csv<R: Read>(reader: R) -> Result<SectorRules, TaxonomyError> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rules_err = |line: u64, message: String| TaxonomyError::Rules { line, message };
        let headers = csv.headers().map_err(|e| rules_err(1, e.to_string()))?.clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| rules_err(1, format!("missing column {name:?}")))
        };
        let (code_col, flags_col) = (column("code")?, column("flags")?);

        let mut rules = HashMap::new();
        for row in csv.records() {
            let row = row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                rules_err(line, e.to_string())
            })?;
            let line = row.position().map_or(0, |p| p.line());
            let code = normalize_nace(row.get(code_col).unwrap_or(""))
                .map_err(|e| rules_err(line, e.to_string()))?;
            let mut flags = SectorFlags::NONE;
            for token in row.get(flags_col).unwrap_or("").split('+') {
                match token.trim().to_ascii_lowercase().as_str() {
                    "" | "none" => {}
                    "htm" => flags.htm = true,
                    "mhtm" => flags.mhtm = true,
                    "kis" => flags.kis = true,
                    "htkis" => flags.htkis = true,
                    other => return Err(rules_err(line, format!("unknown flag {other:?}"))),
                }
            }
            if !flags.is_consistent() {
                return Err(rules_err(
                    line,
                    format!("inconsistent flags {flags} for code {code}"),
                ));
            }
            rules.insert(code.as_str().to_owned(), flags);
        }
        Ok(SectorRules { rules })
    }

    pub fn classify(&self, code: &NaceCode) -> SectorFlags {
        code.group()
            .and_then(|g| self.rules.get(g))
            .or_else(|| self.rules.get(code.division()))
            .copied()
            .unwrap_or(SectorFlags::NONE)
    }
}

/// Classifies with the built-in rules.
pub fn classify_sector(code: &NaceCode) -> SectorFlags {
    SectorRules::builtin().classify(code)
}

const SIZE_BOUNDS: [(u64, Option<u64>, &str); 11] = [
    (0, Some(1), "0 or 1"),
    (2, Some(4), "2-4"),
    (5, Some(9), "5-9"),
    (10, Some(19), "10-19"),
    (20, Some(49), "20-49"),
    (50, Some(99), "50-99"),
    (100, Some(199), "100-199"),
    (200, Some(499), "200-499"),
    (500, Some(749), "500-749"),
    (750, Some(999), "750-999"),
    (1000, None, "> 1,000"),
];

/// One of eleven employee-count bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SizeClass(u8);

impl SizeClass {
    pub const COUNT: usize = SIZE_BOUNDS.len();

    pub fn all() -> impl Iterator<Item = SizeClass> {
        (0..Self::COUNT as u8).map(SizeClass)
    }

    pub fn from_index(index: usize) -> Option<SizeClass> {
        (index < Self::COUNT).then_some(SizeClass(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Inclusive lower bound.
    pub fn lower(self) -> u64 {
        SIZE_BOUNDS[self.index()].0
    }

    /// Inclusive upper bound; `None` for the open-ended top class.
    pub fn upper(self) -> Option<u64> {
        SIZE_BOUNDS[self.index()].1
    }

    pub fn label(self) -> &'static str {
        SIZE_BOUNDS[self.index()].2
    }

    pub fn contains(self, employees: u64) -> bool {
        employees >= self.lower() && self.upper().is_none_or(|u| employees <= u)
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn size_class(employees: u64) -> SizeClass {
    let index = SIZE_BOUNDS
        .iter()
        .rposition(|&(lower, _, _)| employees >= lower)
        .expect("first class starts at zero");
    SizeClass(index as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(code: &str) -> SectorFlags {
        classify_sector(&normalize_nace(code).unwrap())
    }

    #[test]
    fn normalisation() {
        assert_eq!(normalize_nace("30.3").unwrap().as_str(), "303");
        assert_eq!(normalize_nace("21").unwrap().as_str(), "21");
        assert_eq!(normalize_nace("6201").unwrap().as_str(), "620");
        assert_eq!(normalize_nace(" 62.01 ").unwrap().as_str(), "620");
        assert_eq!(normalize_nace("30.3").unwrap().raw(), "30.3");
    }

    #[test]
    fn malformed_codes() {
        for raw in ["", "7", "A1", "2x1", "..", "-21"] {
            assert!(
                matches!(normalize_nace(raw), Err(TaxonomyError::MalformedNace { .. })),
                "{raw:?}"
            );
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(flags("21"), SectorFlags::HTM);
        assert_eq!(flags("301"), SectorFlags::NONE);
        assert_eq!(flags("62"), SectorFlags::HTKIS);
        assert_eq!(flags("30"), SectorFlags::MHTM);
        assert_eq!(flags("302"), SectorFlags::MHTM);
        assert_eq!(flags("25"), SectorFlags::NONE);
        assert_eq!(flags("251"), SectorFlags::NONE);
        assert_eq!(flags("32"), SectorFlags::NONE);
        assert_eq!(flags("999"), SectorFlags::NONE);
    }

    #[test]
    fn size_class_examples() {
        assert_eq!(size_class(3).label(), "2-4");
        assert_eq!(size_class(0).label(), "0 or 1");
        assert_eq!(size_class(1000).label(), "> 1,000");
        assert_eq!(size_class(999).label(), "750-999");
        assert_eq!(size_class(u64::MAX).index(), 10);
    }

    #[test]
    fn sector_filter_parsing() {
        assert_eq!("HTKIS".parse::<SectorFilter>().unwrap(), SectorFilter::Htkis);
        assert!("biotech".parse::<SectorFilter>().is_err());
    }

    #[test]
    fn rules_file_replaces_builtin() {
        let csv = "code,flags\n30,mhtm\n30.1,mhtm\n62,kis+htkis\n21,\n";
        let rules = SectorRules::from_csv(csv.as_bytes()).unwrap();
        let code = |c: &str| normalize_nace(c).unwrap();
        assert_eq!(rules.classify(&code("301")), SectorFlags::MHTM);
        assert_eq!(rules.classify(&code("303")), SectorFlags::MHTM);
        assert_eq!(rules.classify(&code("620")), SectorFlags::HTKIS);
        assert_eq!(rules.classify(&code("21")), SectorFlags::NONE);
        assert_eq!(rules.classify(&code("26")), SectorFlags::NONE);
    }

    #[test]
    fn rules_file_rejects_inconsistent_flags() {
        let err = SectorRules::from_csv("code,flags\n62,htkis\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Rules { line: 2, .. }), "{err}");
        let err = SectorRules::from_csv("code,flags\n21,htm+mhtm\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Rules { .. }));
        let err = SectorRules::from_csv("code\n21\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Rules { line: 1, .. }));
    }
}
