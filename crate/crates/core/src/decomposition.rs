//! Within/between-group decomposition of synergy and entropy.
//!
//! For a partition of N records into groups of size `n_G`,
//!
//! ```text
//! T = T0 + Σ_G (n_G / N) · T_G        H = H0 + Σ_G (n_G / N) · H_G
//! ```
//!
//! where `T_G` / `H_G` are computed on each group's own table and the
//! between-group terms `T0` / `H0` are the residuals. Every table is over
//! `(ZIP3, NACE group, size class)`; groups are states, CBSAs, CSAs, ZIP3s,
//! size classes, or any caller-supplied labelling.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::EntropyError;
use crate::fsum::exact_sum;
use crate::record::AnalysisRecord;
use crate::table::{CellCounts, Dim};
use crate::taxonomy::{SectorFilter, SectorFlags};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("empty sample: no records resolvable at scale {0}")]
    EmptySample(String),
    #[error("no records carry the {0} sector flag")]
    EmptySector(SectorFilter),
    #[error("percent shares are undefined for {0}: total synergy is zero")]
    UndefinedPercent(String),
    #[error("correlation needs at least 3 groups, got {0}")]
    TooFewGroups(usize),
    #[error("vector {label:?} has {got} entries, expected {expected}")]
    LengthMismatch {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("vector {0:?} is constant; correlation is undefined")]
    DegenerateVariance(String),
    #[error("unknown scale {0:?} (expected state, cbsa, csa, zip3 or size)")]
    UnknownScale(String),
}

impl From<EntropyError> for DecompositionError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::EmptySample => DecompositionError::EmptySample("(unknown)".into()),
        }
    }
}

/// Grouping level of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    State,
    Cbsa,
    Csa,
    Zip3,
    #[serde(rename = "size")]
    SizeClass,
}

impl Scale {
    pub const ALL: [Scale; 5] = [Scale::State, Scale::Cbsa, Scale::Csa, Scale::Zip3, Scale::SizeClass];

    pub fn name(self) -> &'static str {
        match self {
            Scale::State => "state",
            Scale::Cbsa => "cbsa",
            Scale::Csa => "csa",
            Scale::Zip3 => "zip3",
            Scale::SizeClass => "size",
        }
    }

    /// Group key of `record` at this scale; `None` when it is not resolvable
    /// (no CBSA or no CSA).
    pub fn key_of<'r, R: AnalysisRecord>(self, record: &'r R) -> Option<Cow<'r, str>> {
        match self {
            Scale::State => Some(Cow::Borrowed(record.state())),
            Scale::Cbsa => record.cbsa_code().map(Cow::Borrowed),
            Scale::Csa => record.csa_code().map(Cow::Borrowed),
            Scale::Zip3 => Some(Cow::Borrowed(record.zip3())),
            Scale::SizeClass => Some(Cow::Borrowed(record.size_class().label())),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = DecompositionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scale::ALL
            .into_iter()
            .find(|scale| scale.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| DecompositionError::UnknownScale(s.to_owned()))
    }
}

/// One group's term of the synergy decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupResult {
    pub key: String,
    pub n: u64,
    pub t_bits: f64,
    /// `(n / N) · t_bits`.
    pub weighted_bits: f64,
    /// `100 · weighted / t_total`; `None` when `t_total` is zero.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub scale: String,
    pub n: u64,
    pub t_total_bits: f64,
    /// Groups by descending percent (key order when percents are undefined).
    pub groups: Vec<GroupResult>,
    /// Between-group synergy `t_total - Σ weighted`.
    pub t0_bits: f64,
    pub percent_t0: Option<f64>,
    /// Records left out because they have no key at this scale.
    pub excluded: u64,
    pub warnings: Vec<String>,
}

impl DecompositionResult {
    pub fn weighted_sum(&self) -> f64 {
        exact_sum(&self.groups.iter().map(|g| g.weighted_bits).collect::<Vec<_>>())
    }

    /// `percent_t0 + Σ percents`, when defined.
    pub fn percent_closure(&self) -> Option<f64> {
        let mut terms = vec![self.percent_t0?];
        for g in &self.groups {
            terms.push(g.percent?);
        }
        Some(exact_sum(&terms))
    }

    pub fn group(&self, key: &str) -> Option<&GroupResult> {
        self.groups.iter().find(|g| g.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyGroup {
    pub key: String,
    pub n: u64,
    pub h_bits: f64,
    pub weighted_bits: f64,
}

/// `H = H0 + Σ (n_G / N) H_G` for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDecomposition {
    pub scale: String,
    pub dim: Dim,
    pub n: u64,
    pub h_total_bits: f64,
    /// Between-group entropy; never negative.
    pub h0_bits: f64,
    pub groups: Vec<EntropyGroup>,
}

/// Residuals this close below zero are rounding, not information.
const H0_ROUNDING: f64 = 1e-12;

#[derive(Default)]
struct Interner(HashMap<String, u32>);

impl Interner {
    fn id(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.0.get(label) {
            return id;
        }
        let id = self.0.len() as u32;
        self.0.insert(label.to_owned(), id);
        id
    }
}

/// Streaming accumulator of one global table plus one table per group.
///
/// Memory is proportional to the number of distinct `(group, cell)` pairs,
/// not to the number of records pushed.
pub struct GroupAccumulator {
    scale: String,
    labels: [Interner; 3],
    group_index: HashMap<String, usize>,
    groups: Vec<(String, CellCounts)>,
    global: CellCounts,
    excluded: u64,
}

impl GroupAccumulator {
    pub fn new(scale: impl Into<String>) -> Self {
        Self {
            scale: scale.into(),
            labels: Default::default(),
            group_index: HashMap::new(),
            groups: Vec::new(),
            global: CellCounts::new(),
            excluded: 0,
        }
    }

    /// Adds one `(g, t, o)` observation to `group`.
    pub fn push_labels(&mut self, group: &str, labels: [&str; 3]) {
        let key = [
            self.labels[0].id(labels[0]),
            self.labels[1].id(labels[1]),
            self.labels[2].id(labels[2]),
        ];
        let slot = match self.group_index.get(group) {
            Some(&i) => i,
            None => {
                self.groups.push((group.to_owned(), CellCounts::new()));
                self.group_index.insert(group.to_owned(), self.groups.len() - 1);
                self.groups.len() - 1
            }
        };
        self.groups[slot].1.add(key, 1);
        self.global.add(key, 1);
    }

    /// Adds a record under its key at `scale`, or counts it as excluded.
    pub fn push_record<R: AnalysisRecord>(&mut self, scale: Scale, record: &R) {
        match scale.key_of(record) {
            Some(key) => self.push_labels(
                &key,
                [record.zip3(), record.nace3(), record.size_class().label()],
            ),
            None => self.excluded += 1,
        }
    }

    pub fn n(&self) -> u64 {
        self.global.total()
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    /// Distinct cells held across the global and per-group tables.
    pub fn stored_cells(&self) -> usize {
        self.global.len() + self.groups.iter().map(|(_, c)| c.len()).sum::<usize>()
    }

    fn sorted_groups(&self) -> Vec<&(String, CellCounts)> {
        let mut groups: Vec<_> = self.groups.iter().collect();
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        groups
    }

    pub fn synergy_decomposition(&self) -> Result<DecompositionResult, DecompositionError> {
        let n = self.global.total();
        if n == 0 {
            return Err(DecompositionError::EmptySample(self.scale.clone()));
        }
        let t_total = self.global.synergy()?.bits;
        let mut warnings = Vec::new();
        let mut groups = Vec::with_capacity(self.groups.len());
        for (key, counts) in self.sorted_groups() {
            let n_g = counts.total();
            let t_g = counts.synergy()?.bits;
            if counts.distinct(Dim::Geography) == 1 {
                warnings.push(format!(
                    "group {key}: single ZIP3, so geography carries no entropy and its synergy is 0"
                ));
            }
            groups.push(GroupResult {
                key: key.clone(),
                n: n_g,
                t_bits: t_g,
                weighted_bits: (n_g as f64 / n as f64) * t_g,
                percent: None,
            });
        }
        let weighted: Vec<f64> = groups.iter().map(|g| g.weighted_bits).collect();
        let t0 = t_total - exact_sum(&weighted);

        let percent_t0 = if t_total != 0.0 {
            for g in &mut groups {
                g.percent = Some(100.0 * g.weighted_bits / t_total);
            }
            groups.sort_by(|a, b| {
                b.percent
                    .partial_cmp(&a.percent)
                    .expect("finite percents")
                    .then_with(|| a.key.cmp(&b.key))
            });
            Some(100.0 * t0 / t_total)
        } else {
            warnings.push(format!(
                "total synergy at scale {} is zero; percent shares are undefined",
                self.scale
            ));
            None
        };
        for w in &warnings {
            log::warn!("{w}");
        }

        Ok(DecompositionResult {
            scale: self.scale.clone(),
            n,
            t_total_bits: t_total,
            groups,
            t0_bits: t0,
            percent_t0,
            excluded: self.excluded,
            warnings,
        })
    }

    pub fn entropy_decomposition(&self, dim: Dim) -> Result<EntropyDecomposition, DecompositionError> {
        let n = self.global.total();
        if n == 0 {
            return Err(DecompositionError::EmptySample(self.scale.clone()));
        }
        let h_total = self.global.marginal_entropy(dim)?;
        let mut groups = Vec::with_capacity(self.groups.len());
        for (key, counts) in self.sorted_groups() {
            let h = counts.marginal_entropy(dim)?;
            groups.push(EntropyGroup {
                key: key.clone(),
                n: counts.total(),
                h_bits: h,
                weighted_bits: (counts.total() as f64 / n as f64) * h,
            });
        }
        let weighted: Vec<f64> = groups.iter().map(|g| g.weighted_bits).collect();
        let mut h0 = h_total - exact_sum(&weighted);
        if h0 < 0.0 && h0 > -H0_ROUNDING {
            h0 = 0.0;
        }
        Ok(EntropyDecomposition {
            scale: self.scale.clone(),
            dim,
            n,
            h_total_bits: h_total,
            h0_bits: h0,
            groups,
        })
    }
}

/// Synergy decomposition of `records` grouped at `scale`. Records without a
/// key at that scale are excluded before anything is computed.
pub fn decompose<I>(records: I, scale: Scale) -> Result<DecompositionResult, DecompositionError>
where
    I: IntoIterator,
    I::Item: AnalysisRecord,
{
    let mut acc = GroupAccumulator::new(scale.name());
    for record in records {
        acc.push_record(scale, &record);
    }
    acc.synergy_decomposition()
}

/// Entropy decomposition of one dimension at `scale`.
pub fn decompose_entropy<I>(records: I, scale: Scale, dim: Dim) -> Result<EntropyDecomposition, DecompositionError>
where
    I: IntoIterator,
    I::Item: AnalysisRecord,
{
    let mut acc = GroupAccumulator::new(scale.name());
    for record in records {
        acc.push_record(scale, &record);
    }
    acc.entropy_decomposition(dim)
}

/// A sector-restricted decomposition and its weight in the all-sector total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSummary {
    pub sector: SectorFilter,
    pub decomposition: DecompositionResult,
    pub n_all: u64,
    pub t_all_bits: f64,
    /// `100 · (n_sector / n_all) · t_sector / t_all`; `None` when `t_all` is 0.
    pub national_share: Option<f64>,
}

pub fn sector_summary<R: AnalysisRecord>(
    records: &[R],
    sector: SectorFilter,
    scale: Scale,
) -> Result<SectorSummary, DecompositionError> {
    let mut all = GroupAccumulator::new(scale.name());
    let mut subset = GroupAccumulator::new(scale.name());
    for record in records {
        all.push_record(scale, record);
        if sector.matches(record.sectors()) {
            subset.push_record(scale, record);
        }
    }
    if subset.n() == 0 {
        return Err(DecompositionError::EmptySector(sector));
    }
    let overall = all.synergy_decomposition()?;
    let decomposition = subset.synergy_decomposition()?;
    let national_share = (overall.t_total_bits != 0.0).then(|| {
        100.0 * (decomposition.n as f64 / overall.n as f64) * decomposition.t_total_bits / overall.t_total_bits
    });
    Ok(SectorSummary {
        sector,
        decomposition,
        n_all: overall.n,
        t_all_bits: overall.t_total_bits,
        national_share,
    })
}

/// One group's sector share against its all-sector share, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecializationRow {
    pub key: String,
    pub sector: SectorFilter,
    pub sector_share: f64,
    pub all_share: f64,
    /// `sector_share - all_share`, percentage points.
    pub delta: f64,
}

/// Specialisation deltas per group and sector. Groups missing from a sector
/// decomposition get a sector share of 0. Rows follow `all`'s group order,
/// then any keys only the sector has, sector by sector.
pub fn specialization_index(
    all: &DecompositionResult,
    sectors: &[(SectorFilter, &DecompositionResult)],
) -> Result<Vec<SpecializationRow>, DecompositionError> {
    let all_shares = percent_map(all, "all")?;
    let mut rows = Vec::new();
    for &(sector, result) in sectors {
        let sector_shares = percent_map(result, sector.name())?;
        let mut keys: Vec<&str> = all.groups.iter().map(|g| g.key.as_str()).collect();
        keys.extend(
            result
                .groups
                .iter()
                .map(|g| g.key.as_str())
                .filter(|k| !all_shares.contains_key(k)),
        );
        for key in keys {
            let sector_share = sector_shares.get(key).copied().unwrap_or(0.0);
            let all_share = all_shares.get(key).copied().unwrap_or(0.0);
            rows.push(SpecializationRow {
                key: key.to_owned(),
                sector,
                sector_share,
                all_share,
                delta: sector_share - all_share,
            });
        }
    }
    Ok(rows)
}

fn percent_map<'a>(
    result: &'a DecompositionResult,
    what: &str,
) -> Result<HashMap<&'a str, f64>, DecompositionError> {
    result
        .groups
        .iter()
        .map(|g| {
            g.percent
                .map(|p| (g.key.as_str(), p))
                .ok_or_else(|| DecompositionError::UndefinedPercent(format!("{what} at {}", result.scale)))
        })
        .collect()
}

/// Aligns group percents of several decompositions on the group keys of the
/// first one (plus keys only later ones have, sorted). Missing groups are 0.
pub fn percent_vectors(
    results: &[(&str, &DecompositionResult)],
) -> Result<(Vec<String>, Vec<(String, Vec<f64>)>), DecompositionError> {
    let mut keys: Vec<String> = Vec::new();
    if let Some((_, first)) = results.first() {
        keys.extend(first.groups.iter().map(|g| g.key.clone()));
    }
    let mut extra: Vec<String> = results
        .iter()
        .skip(1)
        .flat_map(|(_, r)| r.groups.iter().map(|g| g.key.clone()))
        .filter(|k| !keys.contains(k))
        .collect();
    extra.sort();
    extra.dedup();
    keys.extend(extra);

    let mut vectors = Vec::with_capacity(results.len());
    for &(label, result) in results {
        let shares = percent_map(result, label)?;
        let v = keys.iter().map(|k| shares.get(k.as_str()).copied().unwrap_or(0.0)).collect();
        vectors.push((label.to_owned(), v));
    }
    Ok((keys, vectors))
}

/// Company counts per sector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorCounts {
    pub all: u64,
    pub htm: u64,
    pub mhtm: u64,
    pub kis: u64,
    pub htkis: u64,
}

impl SectorCounts {
    fn add(&mut self, flags: SectorFlags) {
        self.all += 1;
        self.htm += u64::from(flags.htm);
        self.mhtm += u64::from(flags.mhtm);
        self.kis += u64::from(flags.kis);
        self.htkis += u64::from(flags.htkis);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyRow {
    pub key: String,
    pub counts: SectorCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorTally {
    /// Rows in key order.
    pub rows: Vec<TallyRow>,
    /// Sum over rows.
    pub total: SectorCounts,
}

/// Counts companies per group and sector. Sector columns overlap (HTKIS is
/// inside KIS) and exclude unclassified codes, so they need not sum to `all`.
pub fn tally_sector_counts<I>(records: I, scale: Scale) -> SectorTally
where
    I: IntoIterator,
    I::Item: AnalysisRecord,
{
    let mut rows: BTreeMap<String, SectorCounts> = BTreeMap::new();
    let mut total = SectorCounts::default();
    for record in records {
        let Some(key) = scale.key_of(&record) else {
            continue;
        };
        let flags = record.sectors();
        match rows.get_mut(key.as_ref()) {
            Some(counts) => counts.add(flags),
            None => rows.entry(key.into_owned()).or_default().add(flags),
        }
        total.add(flags);
    }
    SectorTally {
        rows: rows
            .into_iter()
            .map(|(key, counts)| TallyRow { key, counts })
            .collect(),
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Zip3;
    use crate::record::SampleRecord;
    use crate::taxonomy::SizeClass;

    fn rec(state: &str, cbsa: Option<&str>, zip3: &str, nace: &str, size: usize, flags: SectorFlags) -> SampleRecord {
        SampleRecord {
            id: String::new(),
            zip3: Zip3::parse(zip3).unwrap(),
            state: state.into(),
            cbsa_code: cbsa.map(Into::into),
            csa_code: None,
            nace3: nace.into(),
            size_class: SizeClass::from_index(size).unwrap(),
            sectors: flags,
        }
    }

    fn xor_group(state: &str) -> Vec<SampleRecord> {
        [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
            .into_iter()
            .map(|(g, t, o)| {
                rec(state, None, ["100", "101"][g], ["620", "721"][t], o, SectorFlags::NONE)
            })
            .collect()
    }

    fn copy_group(state: &str) -> Vec<SampleRecord> {
        [0, 1, 0, 1]
            .into_iter()
            .map(|v| rec(state, None, ["100", "101"][v], ["620", "721"][v], v, SectorFlags::NONE))
            .collect()
    }

    #[test]
    fn self_decomposition() {
        let records = xor_group("AA");
        let result = decompose(&records, Scale::State).unwrap();
        assert_eq!(result.t_total_bits, -1.0);
        assert_eq!(result.t0_bits, 0.0);
        assert_eq!(result.groups.len(), 1);
        assert_eq!(result.groups[0].percent, Some(100.0));
        assert_eq!(result.percent_t0, Some(0.0));
    }

    #[test]
    fn xor_and_copy_groups_cancel() {
        let mut records = xor_group("AA");
        records.extend(copy_group("BB"));
        let result = decompose(&records, Scale::State).unwrap();
        assert_eq!(result.group("AA").unwrap().t_bits, -1.0);
        assert_eq!(result.group("BB").unwrap().t_bits, 1.0);
        assert_eq!(result.weighted_sum(), 0.0);
        assert_eq!(result.t0_bits, result.t_total_bits);
        // pooled value from an independent evaluation of the 8-record table
        assert!((result.t_total_bits - -0.278_195_311_147_832_6).abs() < 1e-12);
        // the XOR group overshoots 100%
        assert_eq!(result.groups[0].key, "AA");
        assert!(result.groups[0].percent.unwrap() > 100.0);
        assert!((result.percent_closure().unwrap() - 100.0).abs() < 1e-6);
    }

    #[test]
    fn unresolvable_records_are_excluded() {
        let mut records = xor_group("AA");
        for r in records.iter_mut().take(2) {
            r.cbsa_code = Some("41940".into());
        }
        let result = decompose(&records, Scale::Cbsa).unwrap();
        assert_eq!((result.n, result.excluded), (2, 2));
        assert!(matches!(
            decompose(&records, Scale::Csa),
            Err(DecompositionError::EmptySample(_))
        ));
    }

    #[test]
    fn constant_geography_group_warns_and_is_zero() {
        let records: Vec<_> = (0..6)
            .map(|i| rec("AA", None, "100", ["620", "721", "211"][i % 3], i % 2, SectorFlags::NONE))
            .collect();
        let result = decompose(&records, Scale::State).unwrap();
        assert_eq!(result.groups[0].t_bits, 0.0);
        assert!(result.percent_t0.is_none());
        assert_eq!(result.warnings.len(), 2);
    }

    #[test]
    fn entropy_decomposition_cases() {
        let records = xor_group("AA");
        let one = decompose_entropy(&records, Scale::State, Dim::Technology).unwrap();
        assert_eq!(one.h0_bits, 0.0);

        // each state holds a single NACE code: group entropies vanish
        let records = vec![
            rec("AA", None, "100", "620", 0, SectorFlags::NONE),
            rec("AA", None, "101", "620", 1, SectorFlags::NONE),
            rec("BB", None, "100", "211", 0, SectorFlags::NONE),
        ];
        let split = decompose_entropy(&records, Scale::State, Dim::Technology).unwrap();
        assert!(split.groups.iter().all(|g| g.h_bits == 0.0));
        assert_eq!(split.h0_bits, split.h_total_bits);
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("CBSA".parse::<Scale>().unwrap(), Scale::Cbsa);
        assert_eq!("size".parse::<Scale>().unwrap(), Scale::SizeClass);
        assert!("county".parse::<Scale>().is_err());
    }

    #[test]
    fn tally_counts_overlapping_sectors() {
        let kis = SectorFlags { kis: true, ..SectorFlags::NONE };
        let htkis = SectorFlags { kis: true, htkis: true, ..SectorFlags::NONE };
        let htm = SectorFlags { htm: true, ..SectorFlags::NONE };
        let records = vec![
            rec("CA", None, "940", "620", 1, htkis),
            rec("CA", None, "940", "211", 1, htm),
            rec("NY", None, "100", "691", 1, kis),
            rec("NY", None, "100", "101", 1, SectorFlags::NONE),
        ];
        let tally = tally_sector_counts(&records, Scale::State);
        assert_eq!(tally.rows.len(), 2);
        assert_eq!(tally.rows[0].key, "CA");
        assert_eq!(
            tally.rows[0].counts,
            SectorCounts { all: 2, htm: 1, mhtm: 0, kis: 1, htkis: 1 }
        );
        assert_eq!(tally.total.all, 4);
        assert_eq!(tally.total.kis, 2);
        assert!(tally_sector_counts(Vec::<SampleRecord>::new(), Scale::State).rows.is_empty());
    }

    #[test]
    fn sector_summary_all_matches_plain_decomposition() {
        let mut records = xor_group("AA");
        records.extend(copy_group("BB"));
        let summary = sector_summary(&records, SectorFilter::All, Scale::State).unwrap();
        assert_eq!(summary.decomposition, decompose(&records, Scale::State).unwrap());
        assert_eq!(summary.national_share, Some(100.0));
        assert!(matches!(
            sector_summary(&records, SectorFilter::Htm, Scale::State),
            Err(DecompositionError::EmptySector(SectorFilter::Htm))
        ));
    }

    fn synthetic_result(groups: &[(&str, f64)], t_total: f64) -> DecompositionResult {
        DecompositionResult {
            scale: "state".into(),
            n: 100,
            t_total_bits: t_total,
            groups: groups
                .iter()
                .map(|&(key, pct)| GroupResult {
                    key: key.into(),
                    n: 10,
                    t_bits: 0.0,
                    weighted_bits: pct * t_total / 100.0,
                    percent: Some(pct),
                })
                .collect(),
            t0_bits: 0.0,
            percent_t0: Some(100.0 - groups.iter().map(|g| g.1).sum::<f64>()),
            excluded: 0,
            warnings: vec![],
        }
    }

    #[test]
    fn specialization_deltas() {
        let all = synthetic_result(&[("CA", 40.0), ("NY", 35.0), ("TX", 20.0)], -1.0);
        let same = specialization_index(&all, &[(SectorFilter::Kis, &all)]).unwrap();
        assert!(same.iter().all(|r| r.delta == 0.0));

        let htm = synthetic_result(&[("CA", 100.0)], -0.2);
        let rows = specialization_index(&all, &[(SectorFilter::Htm, &htm)]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].key, "CA");
        assert_eq!(rows[0].delta, 100.0 - 40.0);
        assert_eq!(rows[1].sector_share, 0.0);
        assert_eq!(rows[1].delta, -35.0);
    }

    #[test]
    fn percent_vectors_align_on_keys() {
        let all = synthetic_result(&[("CA", 40.0), ("NY", 35.0), ("TX", 20.0)], -1.0);
        let htm = synthetic_result(&[("TX", 70.0), ("CA", 30.0), ("WA", 5.0)], -0.2);
        let (keys, vectors) = percent_vectors(&[("all", &all), ("htm", &htm)]).unwrap();
        assert_eq!(keys, ["CA", "NY", "TX", "WA"]);
        assert_eq!(vectors[0].1, [40.0, 35.0, 20.0, 0.0]);
        assert_eq!(vectors[1].1, [30.0, 0.0, 70.0, 5.0]);
    }
}
