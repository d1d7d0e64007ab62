//! Company CSV parsing, cleaning, and the cleaned-sample file.
//!
//! Company CSV (header required): `id,zip,nace,employees,state,year,city`.
//! `id`, `zip`, `nace` and `employees` columns must exist; `state`, `year`
//! and `city` may be missing or empty.
//!
//! Cleaned-sample CSV:
//! `id,zip3,state,cbsa_code,csa_code,nace3,size_class,htm,mhtm,kis,htkis`
//! where `size_class` is the bin index 0..=10 and the flags are `0`/`1`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{resolve_geo, zip3_of, ConcordanceTable, Zip3};
use crate::record::{CompanyRecord, SampleRecord};
use crate::taxonomy::{normalize_nace, size_class, SectorFlags, SectorRules, SizeClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("empty-file: {0} has no header row")]
    EmptyFile(&'static str),
    #[error("{file}: missing required column {column:?}")]
    MissingColumn { file: &'static str, column: String },
    #[error("{file} line {line}: {message}")]
    Malformed {
        file: &'static str,
        line: u64,
        message: String,
    },
    #[error("{file}: I/O error: {message}")]
    Io { file: &'static str, message: String },
}

const COMPANIES: &str = "companies file";
const SAMPLE: &str = "sample file";

fn io_or_malformed(file: &'static str, e: csv::Error) -> IngestError {
    if let csv::ErrorKind::Io(io) = e.kind() {
        return IngestError::Io {
            file,
            message: io.to_string(),
        };
    }
    IngestError::Malformed {
        file,
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// A company row as read, before cleaning. Empty fields are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCompanyRow {
    pub line: u64,
    pub id: String,
    pub zip: Option<String>,
    pub nace: Option<String>,
    pub employees: Option<u64>,
    pub state: Option<String>,
    pub year: Option<i32>,
    pub city: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub line: u64,
    pub message: String,
}

/// Outcome of reading one data row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOutcome {
    Row(RawCompanyRow),
    Skipped(ParseDiagnostic),
}

struct CompanyColumns {
    id: usize,
    zip: usize,
    nace: usize,
    employees: usize,
    state: Option<usize>,
    year: Option<usize>,
    city: Option<usize>,
}

/// Streaming company CSV reader. Malformed rows come back as
/// [`RowOutcome::Skipped`]; only I/O failures end the stream with an error.
pub struct CompanyReader<R> {
    csv: csv::Reader<R>,
    cols: CompanyColumns,
    record: csv::StringRecord,
}

impl<R: Read> CompanyReader<R> {
    pub fn new(reader: R) -> Result<Self, IngestError> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv.headers().map_err(|e| io_or_malformed(COMPANIES, e))?.clone();
        if headers.iter().all(str::is_empty) {
            return Err(IngestError::EmptyFile(COMPANIES));
        }
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let require = |name: &str| {
            find(name).ok_or_else(|| IngestError::MissingColumn {
                file: COMPANIES,
                column: name.to_owned(),
            })
        };
        let cols = CompanyColumns {
            id: require("id")?,
            zip: require("zip")?,
            nace: require("nace")?,
            employees: require("employees")?,
            state: find("state"),
            year: find("year"),
            city: find("city"),
        };
        Ok(Self {
            csv,
            cols,
            record: csv::StringRecord::new(),
        })
    }

    fn parse_row(&self) -> RowOutcome {
        let record = &self.record;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).filter(|s| !s.is_empty());
        let opt = |i: Option<usize>| i.and_then(field).map(str::to_owned);
        let skipped = |message: String| RowOutcome::Skipped(ParseDiagnostic { line, message });

        let employees = match field(self.cols.employees) {
            None => None,
            Some(s) => match s.parse::<u64>() {
                Ok(n) => Some(n),
                Err(_) => return skipped(format!("employees {s:?} is not a nonnegative integer")),
            },
        };
        let year = match self.cols.year.and_then(field) {
            None => None,
            Some(s) => match s.parse::<i32>() {
                Ok(y) => Some(y),
                Err(_) => return skipped(format!("year {s:?} is not an integer")),
            },
        };
        RowOutcome::Row(RawCompanyRow {
            line,
            id: record.get(self.cols.id).unwrap_or_default().to_owned(),
            zip: field(self.cols.zip).map(str::to_owned),
            nace: field(self.cols.nace).map(str::to_owned),
            employees,
            state: opt(self.cols.state),
            year,
            city: opt(self.cols.city),
        })
    }
}

impl<R: Read> Iterator for CompanyReader<R> {
    type Item = Result<RowOutcome, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.csv.read_record(&mut self.record) {
            Ok(false) => None,
            Ok(true) => Some(Ok(self.parse_row())),
            Err(e) => match io_or_malformed(COMPANIES, e) {
                IngestError::Malformed { line, message, .. } => {
                    Some(Ok(RowOutcome::Skipped(ParseDiagnostic { line, message })))
                }
                fatal => Some(Err(fatal)),
            },
        }
    }
}

/// All rows of a company file plus diagnostics for the skipped ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedCompanies {
    pub rows: Vec<RawCompanyRow>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

pub fn parse_companies<R: Read>(reader: R) -> Result<ParsedCompanies, IngestError> {
    let mut parsed = ParsedCompanies::default();
    for outcome in CompanyReader::new(reader)? {
        match outcome? {
            RowOutcome::Row(row) => parsed.rows.push(row),
            RowOutcome::Skipped(diag) => parsed.diagnostics.push(diag),
        }
    }
    Ok(parsed)
}

/// Audit counters shaped after the per-scale sample-size table.
///
/// `downloaded = parse_skipped + dropped_* + usable_state`, and
/// `usable_state ≥ usable_cbsa ≥ usable_csa`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningStats {
    pub downloaded: u64,
    pub parse_skipped: u64,
    pub dropped_missing_zip_or_nace: u64,
    pub dropped_missing_employees: u64,
    pub dropped_unresolved_geography: u64,
    pub dropped_by_filter: u64,
    pub usable_state: u64,
    pub usable_cbsa: u64,
    pub usable_csa: u64,
    /// Rows per year among parsed rows; `"unknown"` for missing years.
    pub years: BTreeMap<String, u64>,
}

impl CleaningStats {
    pub fn dropped(&self) -> u64 {
        self.dropped_missing_zip_or_nace
            + self.dropped_missing_employees
            + self.dropped_unresolved_geography
            + self.dropped_by_filter
    }

    pub fn is_conserved(&self) -> bool {
        self.downloaded == self.parse_skipped + self.dropped() + self.usable_state
            && self.usable_state >= self.usable_cbsa
            && self.usable_cbsa >= self.usable_csa
    }

    /// Adds another shard's counters into this one.
    pub fn merge(&mut self, other: &CleaningStats) {
        self.downloaded += other.downloaded;
        self.parse_skipped += other.parse_skipped;
        self.dropped_missing_zip_or_nace += other.dropped_missing_zip_or_nace;
        self.dropped_missing_employees += other.dropped_missing_employees;
        self.dropped_unresolved_geography += other.dropped_unresolved_geography;
        self.dropped_by_filter += other.dropped_by_filter;
        self.usable_state += other.usable_state;
        self.usable_cbsa += other.usable_cbsa;
        self.usable_csa += other.usable_csa;
        for (year, n) in &other.years {
            *self.years.entry(year.clone()).or_insert(0) += n;
        }
    }
}

/// Optional sensitivity filters applied after the mandatory cleaning rules.
#[derive(Debug, Clone, Default)]
pub struct CleanOptions {
    /// Drop rows whose known year is earlier than this.
    pub year_min: Option<i32>,
    /// Drop rows whose NACE code starts with any of these prefixes.
    pub exclude_nace: Vec<String>,
    /// Replacement sector rules; the built-in table when `None`.
    pub sector_rules: Option<SectorRules>,
}

/// Row-at-a-time cleaner accumulating [`CleaningStats`].
pub struct Cleaner<'a> {
    concordance: &'a ConcordanceTable,
    options: &'a CleanOptions,
    stats: CleaningStats,
}

impl<'a> Cleaner<'a> {
    pub fn new(concordance: &'a ConcordanceTable, options: &'a CleanOptions) -> Self {
        Self {
            concordance,
            options,
            stats: CleaningStats::default(),
        }
    }

    /// Counts a row the parser rejected.
    pub fn skip_malformed(&mut self) {
        self.stats.downloaded += 1;
        self.stats.parse_skipped += 1;
    }

    pub fn clean(&mut self, row: RawCompanyRow) -> Option<CompanyRecord> {
        let stats = &mut self.stats;
        stats.downloaded += 1;
        let year_key = row.year.map_or_else(|| "unknown".to_owned(), |y| y.to_string());
        *stats.years.entry(year_key).or_insert(0) += 1;

        let coded = (|| {
            let zip = row.zip.as_deref()?;
            zip3_of(zip).ok()?;
            let nace = normalize_nace(row.nace.as_deref()?).ok()?;
            Some((zip, nace))
        })();
        let Some((zip, nace)) = coded else {
            stats.dropped_missing_zip_or_nace += 1;
            return None;
        };
        let Some(employees) = row.employees else {
            stats.dropped_missing_employees += 1;
            return None;
        };
        // the ZIP already parsed, so the only failure left is an unknown state
        let geo = match resolve_geo(zip, row.state.as_deref(), self.concordance) {
            Ok(geo) => geo,
            Err(_) => {
                stats.dropped_unresolved_geography += 1;
                return None;
            }
        };
        let excluded_year = matches!((self.options.year_min, row.year), (Some(min), Some(y)) if y < min);
        let excluded_nace = self
            .options
            .exclude_nace
            .iter()
            .any(|prefix| nace.as_str().starts_with(prefix.as_str()));
        if excluded_year || excluded_nace {
            stats.dropped_by_filter += 1;
            return None;
        }

        let sectors = match &self.options.sector_rules {
            Some(rules) => rules.classify(&nace),
            None => crate::taxonomy::classify_sector(&nace),
        };
        stats.usable_state += 1;
        if geo.cbsa.is_some() {
            stats.usable_cbsa += 1;
        }
        if geo.csa.is_some() {
            stats.usable_csa += 1;
        }
        Some(CompanyRecord {
            id: row.id,
            zip3: geo.zip3,
            state: geo.state,
            cbsa: geo.cbsa,
            csa: geo.csa,
            nace,
            sectors,
            size: size_class(employees),
            employees,
            year: row.year,
            city: row.city,
        })
    }

    pub fn stats(&self) -> &CleaningStats {
        &self.stats
    }

    pub fn finish(self) -> CleaningStats {
        self.stats
    }
}

/// Cleans parsed rows, preserving input order. Rows lacking a usable ZIP or
/// NACE code are dropped first, then rows lacking employees, then rows whose
/// state cannot be determined, then rows removed by `options`.
pub fn clean_sample(
    parsed: ParsedCompanies,
    concordance: &ConcordanceTable,
    options: &CleanOptions,
) -> (Vec<CompanyRecord>, CleaningStats) {
    let mut cleaner = Cleaner::new(concordance, options);
    for _ in &parsed.diagnostics {
        cleaner.skip_malformed();
    }
    let records = parsed
        .rows
        .into_iter()
        .filter_map(|row| cleaner.clean(row))
        .collect();
    (records, cleaner.finish())
}

pub const SAMPLE_HEADER: [&str; 11] = [
    "id",
    "zip3",
    "state",
    "cbsa_code",
    "csa_code",
    "nace3",
    "size_class",
    "htm",
    "mhtm",
    "kis",
    "htkis",
];

/// Writes records in the cleaned-sample format.
pub struct SampleWriter<W: Write> {
    csv: csv::Writer<W>,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(writer: W) -> Result<Self, IngestError> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(SAMPLE_HEADER)
            .map_err(|e| io_or_malformed(SAMPLE, e))?;
        Ok(Self { csv })
    }

    pub fn write(&mut self, r: &SampleRecord) -> Result<(), IngestError> {
        let flag = |b: bool| if b { "1" } else { "0" };
        let size = r.size_class.index().to_string();
        self.csv
            .write_record([
                r.id.as_str(),
                r.zip3.as_str(),
                r.state.as_str(),
                r.cbsa_code.as_deref().unwrap_or(""),
                r.csa_code.as_deref().unwrap_or(""),
                r.nace3.as_str(),
                size.as_str(),
                flag(r.sectors.htm),
                flag(r.sectors.mhtm),
                flag(r.sectors.kis),
                flag(r.sectors.htkis),
            ])
            .map_err(|e| io_or_malformed(SAMPLE, e))
    }

    pub fn finish(mut self) -> Result<W, IngestError> {
        self.csv.flush().map_err(|e| IngestError::Io {
            file: SAMPLE,
            message: e.to_string(),
        })?;
        self.csv.into_inner().map_err(|e| IngestError::Io {
            file: SAMPLE,
            message: e.to_string(),
        })
    }
}

pub fn write_sample<'r, W, I>(writer: W, records: I) -> Result<W, IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'r SampleRecord>,
{
    let mut out = SampleWriter::new(writer)?;
    for record in records {
        out.write(record)?;
    }
    out.finish()
}

/// Streaming reader for the cleaned-sample format. Any malformed row is an
/// error, since the file is produced by [`SampleWriter`].
pub struct SampleReader<R> {
    csv: csv::Reader<R>,
    cols: [usize; 11],
    record: csv::StringRecord,
}

impl<R: Read> SampleReader<R> {
    pub fn new(reader: R) -> Result<Self, IngestError> {
        let mut csv = csv::Reader::from_reader(reader);
        let headers = csv.headers().map_err(|e| io_or_malformed(SAMPLE, e))?.clone();
        if headers.iter().all(str::is_empty) {
            return Err(IngestError::EmptyFile(SAMPLE));
        }
        let mut cols = [0; 11];
        for (slot, name) in cols.iter_mut().zip(SAMPLE_HEADER) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn {
                    file: SAMPLE,
                    column: name.to_owned(),
                })?;
        }
        Ok(Self {
            csv,
            cols,
            record: csv::StringRecord::new(),
        })
    }

    fn parse(&self) -> Result<SampleRecord, IngestError> {
        let line = self.record.position().map_or(0, |p| p.line());
        let bad = |message: String| IngestError::Malformed {
            file: SAMPLE,
            line,
            message,
        };
        let get = |i: usize| self.record.get(self.cols[i]).unwrap_or("");
        let optional = |i: usize| Some(get(i)).filter(|s| !s.is_empty()).map(str::to_owned);
        let flag = |i: usize| match get(i) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(bad(format!("{} must be 0 or 1, got {other:?}", SAMPLE_HEADER[i]))),
        };
        let zip3 = Zip3::parse(get(1)).map_err(|e| bad(e.to_string()))?;
        let nace = normalize_nace(get(5)).map_err(|e| bad(e.to_string()))?;
        if nace.as_str() != get(5) {
            return Err(bad(format!("nace3 {:?} is not normalised", get(5))));
        }
        let size_class = get(6)
            .parse::<usize>()
            .ok()
            .and_then(SizeClass::from_index)
            .ok_or_else(|| bad(format!("size_class {:?} is not in 0..=10", get(6))))?;
        let sectors = SectorFlags {
            htm: flag(7)?,
            mhtm: flag(8)?,
            kis: flag(9)?,
            htkis: flag(10)?,
        };
        let state = get(2);
        if state.is_empty() {
            return Err(bad("empty state".into()));
        }
        let cbsa_code = optional(3);
        let csa_code = optional(4);
        if csa_code.is_some() && cbsa_code.is_none() {
            return Err(bad("csa_code without cbsa_code".into()));
        }
        Ok(SampleRecord {
            id: get(0).to_owned(),
            zip3,
            state: state.to_owned(),
            cbsa_code,
            csa_code,
            nace3: nace.as_str().to_owned(),
            size_class,
            sectors,
        })
    }
}

impl<R: Read> Iterator for SampleReader<R> {
    type Item = Result<SampleRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.csv.read_record(&mut self.record) {
            Ok(false) => None,
            Ok(true) => Some(self.parse()),
            Err(e) => Some(Err(io_or_malformed(SAMPLE, e))),
        }
    }
}

pub fn read_sample<R: Read>(reader: R) -> Result<Vec<SampleRecord>, IngestError> {
    SampleReader::new(reader)?.collect()
}
