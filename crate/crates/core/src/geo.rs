//! ZIP codes and the ZIP5 → state / CBSA / CSA concordance.
//!
//! Concordance CSV (header required):
//!
//! ```text
//! zip5,state,cbsa_code,cbsa_name,cbsa_type,csa_code,csa_name
//! 94043,CA,41940,"San Jose-Sunnyvale-Santa Clara, CA",metro,488,"San Jose-San Francisco-Oakland, CA"
//! ```
//!
//! `cbsa_type` is `metro` or `micro`; absent CBSA/CSA fields are empty.
//! An optional alias CSV `old_cbsa_code,new_cbsa_code` renames CBSA codes at
//! load time, for merging superseded delineations.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeoError {
    #[error("malformed ZIP code {0:?}")]
    MalformedZip(String),
    #[error("{file} line {line}: {message}")]
    Parse {
        file: &'static str,
        line: u64,
        message: String,
    },
    #[error("{file}: missing column {column:?}")]
    MissingColumn { file: &'static str, column: String },
    #[error("no state for ZIP {zip:?}: not in the concordance and the record has no valid state")]
    Unresolvable { zip: String },
}

/// First three digits of a ZIP code, leading zeros kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Zip3(String);

impl Zip3 {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn parse(s: &str) -> Result<Zip3, GeoError> {
        if s.len() == 3 && s.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Zip3(s.to_owned()))
        } else {
            Err(GeoError::MalformedZip(s.to_owned()))
        }
    }
}

impl fmt::Display for Zip3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical 5-digit form: drops a `-dddd` suffix and left-pads short
/// numeric ZIPs (`"501"` → `"00501"`).
pub fn canonical_zip5(raw: &str) -> Result<String, GeoError> {
    let malformed = || GeoError::MalformedZip(raw.to_owned());
    let trimmed = raw.trim();
    let base = match trimmed.split_once('-') {
        Some((base, plus4)) => {
            if plus4.len() != 4 || !plus4.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            base
        }
        None => trimmed,
    };
    if base.is_empty() || base.len() > 5 || !base.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    Ok(format!("{base:0>5}"))
}

pub fn zip3_of(raw: &str) -> Result<Zip3, GeoError> {
    let zip5 = canonical_zip5(raw)?;
    Ok(Zip3(zip5[..3].to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CbsaKind {
    Metro,
    Micro,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cbsa {
    pub code: String,
    pub name: String,
    pub kind: CbsaKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Csa {
    pub code: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceEntry {
    pub state: String,
    pub cbsa: Option<Cbsa>,
    pub csa: Option<Csa>,
}

/// Immutable ZIP5 lookup.
#[derive(Debug, Clone, Default)]
pub struct ConcordanceTable {
    entries: HashMap<String, ConcordanceEntry>,
}

impl ConcordanceTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, zip5: &str) -> Option<&ConcordanceEntry> {
        self.entries.get(zip5)
    }
}

/// What happened while loading a concordance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConcordanceReport {
    pub rows: u64,
    pub duplicates: u64,
    pub conflicts: u64,
    /// CBSA codes that carried no name anywhere; their rows lose CBSA and CSA.
    pub unnamed_cbsa_rows: u64,
    pub warnings: Vec<String>,
}

/// Old → new CBSA code renames.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CbsaAliases(HashMap<String, String>);

impl CbsaAliases {
    pub fn resolve<'a>(&'a self, code: &'a str) -> &'a str {
        self.0.get(code).map_or(code, String::as_str)
    }
}

struct Columns {
    file: &'static str,
    headers: csv::StringRecord,
}

impl Columns {
    fn find(&self, name: &str) -> Result<usize, GeoError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GeoError::MissingColumn {
                file: self.file,
                column: name.to_owned(),
            })
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn csv_error(file: &'static str, e: csv::Error) -> GeoError {
    GeoError::Parse {
        file,
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

pub fn load_aliases<R: Read>(reader: R) -> Result<CbsaAliases, GeoError> {
    const FILE: &str = "alias file";
    let mut csv = csv_reader(reader);
    let cols = Columns {
        file: FILE,
        headers: csv.headers().map_err(|e| csv_error(FILE, e))?.clone(),
    };
    let (old, new) = (cols.find("old_cbsa_code")?, cols.find("new_cbsa_code")?);
    let mut aliases = HashMap::new();
    for row in csv.records() {
        let row = row.map_err(|e| csv_error(FILE, e))?;
        let (from, to) = (&row[old], &row[new]);
        if from.is_empty() || to.is_empty() {
            return Err(GeoError::Parse {
                file: FILE,
                line: row.position().map_or(0, |p| p.line()),
                message: "empty CBSA code".into(),
            });
        }
        aliases.insert(from.to_owned(), to.to_owned());
    }
    Ok(CbsaAliases(aliases))
}

fn normalize_state(raw: &str) -> Option<String> {
    let s = raw.trim();
    (s.len() == 2 && s.bytes().all(|b| b.is_ascii_alphabetic())).then(|| s.to_ascii_uppercase())
}

struct PendingRow {
    zip5: String,
    line: u64,
    state: String,
    cbsa: Option<(String, String, CbsaKind)>,
    csa: Option<Csa>,
}

/// Loads a concordance. Duplicate ZIP5 rows resolve to the last occurrence;
/// a duplicate whose content differs is counted as a conflict and warned
/// about. CBSA codes without a name take the name from another row with the
/// same (aliased) code, or else are dropped together with their CSA.
pub fn load_concordance<R: Read>(
    reader: R,
    aliases: Option<&CbsaAliases>,
) -> Result<(ConcordanceTable, ConcordanceReport), GeoError> {
    const FILE: &str = "concordance";
    let parse_err = |line: u64, message: String| GeoError::Parse {
        file: FILE,
        line,
        message,
    };
    let mut csv = csv_reader(reader);
    let cols = Columns {
        file: FILE,
        headers: csv.headers().map_err(|e| csv_error(FILE, e))?.clone(),
    };
    let zip_col = cols.find("zip5")?;
    let state_col = cols.find("state")?;
    let cbsa_code_col = cols.find("cbsa_code")?;
    let cbsa_name_col = cols.find("cbsa_name")?;
    let cbsa_type_col = cols.find("cbsa_type")?;
    let csa_code_col = cols.find("csa_code")?;
    let csa_name_col = cols.find("csa_name")?;

    let mut report = ConcordanceReport::default();
    let mut pending = Vec::new();
    let mut cbsa_names: HashMap<String, String> = HashMap::new();

    for row in csv.records() {
        let row = row.map_err(|e| csv_error(FILE, e))?;
        let line = row.position().map_or(0, |p| p.line());
        report.rows += 1;

        let zip5 = &row[zip_col];
        if zip5.len() != 5 || !zip5.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_err(line, format!("zip5 {zip5:?} is not 5 digits")));
        }
        let state = normalize_state(&row[state_col])
            .ok_or_else(|| parse_err(line, format!("invalid state {:?}", &row[state_col])))?;

        let cbsa_code = &row[cbsa_code_col];
        let cbsa = if cbsa_code.is_empty() {
            None
        } else {
            let kind = match row[cbsa_type_col].to_ascii_lowercase().as_str() {
                "metro" => CbsaKind::Metro,
                "micro" => CbsaKind::Micro,
                other => return Err(parse_err(line, format!("cbsa_type {other:?} is not metro/micro"))),
            };
            let code = aliases.map_or(cbsa_code, |a| a.resolve(cbsa_code)).to_owned();
            let name = row[cbsa_name_col].to_owned();
            if !name.is_empty() {
                cbsa_names.entry(code.clone()).or_insert_with(|| name.clone());
            }
            Some((code, name, kind))
        };

        let csa = match (&row[csa_code_col], &row[csa_name_col]) {
            ("", "") => None,
            ("", name) => return Err(parse_err(line, format!("CSA name {name:?} without code"))),
            (code, name) => {
                if cbsa.is_none() {
                    return Err(parse_err(line, format!("CSA {code} without a CBSA")));
                }
                Some(Csa {
                    code: code.to_owned(),
                    name: name.to_owned(),
                })
            }
        };

        pending.push(PendingRow {
            zip5: zip5.to_owned(),
            line,
            state,
            cbsa,
            csa,
        });
    }

    let mut entries: HashMap<String, ConcordanceEntry> = HashMap::new();
    for row in pending {
        let (cbsa, csa) = match row.cbsa {
            None => (None, None),
            Some((code, name, kind)) => {
                let name = if name.is_empty() { cbsa_names.get(&code).cloned() } else { Some(name) };
                match name {
                    Some(name) => (Some(Cbsa { code, name, kind }), row.csa),
                    None => {
                        report.unnamed_cbsa_rows += 1;
                        report.warnings.push(format!(
                            "line {}: CBSA {code} has no name; ZIP {} kept at state level only",
                            row.line, row.zip5
                        ));
                        (None, None)
                    }
                }
            }
        };
        let entry = ConcordanceEntry {
            state: row.state,
            cbsa,
            csa,
        };
        if let Some(previous) = entries.insert(row.zip5.clone(), entry) {
            report.duplicates += 1;
            if previous != entries[&row.zip5] {
                report.conflicts += 1;
                report.warnings.push(format!(
                    "line {}: ZIP {} redefined with different geography; last row wins",
                    row.line, row.zip5
                ));
            }
        }
    }
    for warning in &report.warnings {
        log::warn!("{warning}");
    }
    Ok((ConcordanceTable { entries }, report))
}

/// Geography of one company at every scale it can be resolved to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoAssignment {
    pub zip3: Zip3,
    pub state: String,
    pub cbsa: Option<Cbsa>,
    pub csa: Option<Csa>,
}

/// Resolves a ZIP against the concordance, falling back to the record's own
/// state when the ZIP5 is not listed. The fallback never yields CBSA or CSA.
pub fn resolve_geo(
    zip_raw: &str,
    record_state: Option<&str>,
    table: &ConcordanceTable,
) -> Result<GeoAssignment, GeoError> {
    let zip5 = canonical_zip5(zip_raw)?;
    let zip3 = Zip3(zip5[..3].to_owned());
    if let Some(entry) = table.get(&zip5) {
        return Ok(GeoAssignment {
            zip3,
            state: entry.state.clone(),
            cbsa: entry.cbsa.clone(),
            csa: entry.csa.clone(),
        });
    }
    match record_state.and_then(normalize_state) {
        Some(state) => Ok(GeoAssignment {
            zip3,
            state,
            cbsa: None,
            csa: None,
        }),
        None => Err(GeoError::Unresolvable { zip: zip5 }),
    }
}
