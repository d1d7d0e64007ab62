use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use log::{info, warn};
use serde::Serialize;

use synergy_core::decomposition::{
    percent_vectors, sector_summary, specialization_index, tally_sector_counts, DecompositionResult,
};
use synergy_core::correlation::contribution_correlations;
use synergy_core::geo::{load_aliases, load_concordance, ConcordanceReport};
use synergy_core::ingest::{
    read_sample, CleanOptions, CleaningStats, Cleaner, CompanyReader, ParseDiagnostic, RowOutcome, SampleWriter,
};
use synergy_core::oracle::brute_force_t3;
use synergy_core::synth::{fixture_population, generate, population_from_tuples, Population, SynthSpec};
use synergy_core::taxonomy::SectorRules;
use synergy_core::{decompose, AnalysisRecord, SampleRecord, Scale, SectorFilter};

use crate::error::CliError;
use crate::output::{digest_file, write_atomic, write_manifest, RunManifest, Sink};
use crate::report::{
    fixed, to_json, ComputeReport, CorrelationReport, Format, NationalShare, OracleReport, OracleRow,
    SpecializationReport, TallyReport,
};
use crate::{ComputeArgs, IngestArgs, OracleArgs, SampleArgs, SectorsArgs, SynthArgs};

const MAX_DIAGNOSTICS: usize = 100;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn nace_prefixes(raw: &[String]) -> Result<Vec<String>, CliError> {
    raw.iter()
        .map(|p| {
            let cleaned: String = p.trim().chars().filter(|&c| c != '.').collect();
            if cleaned.is_empty() || !cleaned.bytes().all(|b| b.is_ascii_digit()) {
                return Err(CliError::input(format!("--exclude-nace {p:?} is not a NACE code prefix")));
            }
            Ok(cleaned)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ConcordanceSummary {
    rows: u64,
    duplicates: u64,
    conflicts: u64,
    unnamed_cbsa_rows: u64,
}

impl From<&ConcordanceReport> for ConcordanceSummary {
    fn from(r: &ConcordanceReport) -> Self {
        Self {
            rows: r.rows,
            duplicates: r.duplicates,
            conflicts: r.conflicts,
            unnamed_cbsa_rows: r.unnamed_cbsa_rows,
        }
    }
}

#[derive(Debug, Serialize)]
struct IngestStats {
    #[serde(flatten)]
    cleaning: CleaningStats,
    concordance: ConcordanceSummary,
    parse_diagnostics: Vec<ParseDiagnostic>,
    parse_diagnostics_truncated: bool,
}

impl IngestStats {
    fn to_csv(&self) -> String {
        let s = &self.cleaning;
        let mut rows: Vec<(String, u64)> = vec![
            ("downloaded".into(), s.downloaded),
            ("parse_skipped".into(), s.parse_skipped),
            ("dropped_missing_zip_or_nace".into(), s.dropped_missing_zip_or_nace),
            ("dropped_missing_employees".into(), s.dropped_missing_employees),
            ("dropped_unresolved_geography".into(), s.dropped_unresolved_geography),
            ("dropped_by_filter".into(), s.dropped_by_filter),
            ("usable_state".into(), s.usable_state),
            ("usable_cbsa".into(), s.usable_cbsa),
            ("usable_csa".into(), s.usable_csa),
        ];
        rows.extend(s.years.iter().map(|(y, n)| (format!("year_{y}"), *n)));
        let mut out = String::from("field,count\n");
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

pub fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let aliases = args
        .aliases
        .as_deref()
        .map(|p| open(p).and_then(|r| load_aliases(r).map_err(CliError::from)))
        .transpose()?;
    let (table, report) = load_concordance(open(&args.concordance)?, aliases.as_ref())?;
    for w in &report.warnings {
        warn!("concordance: {w}");
    }
    let sector_rules = args
        .sector_rules
        .as_deref()
        .map(|p| open(p).and_then(|r| SectorRules::from_csv(r).map_err(CliError::from)))
        .transpose()?;
    let options = CleanOptions {
        year_min: args.year_min,
        exclude_nace: nace_prefixes(&args.exclude_nace)?,
        sector_rules,
    };

    let reader = CompanyReader::new(open(&args.companies)?)?;
    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => ".".into(),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", args.out.display())))?;
    let mut writer = SampleWriter::new(BufWriter::new(tmp))?;
    let mut cleaner = Cleaner::new(&table, &options);
    let mut diagnostics = Vec::new();
    let mut truncated = false;
    for outcome in reader {
        match outcome? {
            RowOutcome::Row(row) => {
                if let Some(record) = cleaner.clean(row) {
                    writer.write(&SampleRecord::from(&record))?;
                }
            }
            RowOutcome::Skipped(diag) => {
                cleaner.skip_malformed();
                log::debug!("companies line {}: {}", diag.line, diag.message);
                if diagnostics.len() < MAX_DIAGNOSTICS {
                    diagnostics.push(diag);
                } else {
                    truncated = true;
                }
            }
        }
    }
    let tmp = writer
        .finish()?
        .into_inner()
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", args.out.display())))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", args.out.display())))?;
    tmp.persist(&args.out)
        .map_err(|e| CliError::input(format!("cannot write {}: {}", args.out.display(), e.error)))?;

    let cleaning = cleaner.finish();
    debug_assert!(cleaning.is_conserved());
    info!(
        "{} rows read, {} usable at state scale, {} dropped",
        cleaning.downloaded,
        cleaning.usable_state,
        cleaning.dropped()
    );
    let stats = IngestStats {
        concordance: ConcordanceSummary::from(&report),
        parse_diagnostics: diagnostics,
        parse_diagnostics_truncated: truncated,
        cleaning,
    };
    let stats_bytes = match args.format {
        Format::Json => to_json(&stats),
        Format::Csv => stats.to_csv().into_bytes(),
    };
    write_atomic(&args.stats, &stats_bytes)?;

    let mut inputs = vec![args.companies.as_path(), args.concordance.as_path()];
    inputs.extend(args.aliases.as_deref());
    inputs.extend(args.sector_rules.as_deref());
    let mut manifest = RunManifest::new(&inputs)?;
    manifest.outputs.push(digest_file(&args.out)?);
    manifest.outputs.push(digest_file(&args.stats)?);
    let c = &stats.cleaning;
    manifest.n_by_scale = BTreeMap::from([
        ("state".to_owned(), c.usable_state),
        ("cbsa".to_owned(), c.usable_cbsa),
        ("csa".to_owned(), c.usable_csa),
    ]);
    write_manifest(&args.out, &manifest)
}

struct LoadedSample {
    records: Vec<SampleRecord>,
    manifest: RunManifest,
}

fn load_sample(path: &Path, exclude_nace: &[String]) -> Result<LoadedSample, CliError> {
    let prefixes = nace_prefixes(exclude_nace)?;
    let mut records = read_sample(open(path)?)?;
    if !prefixes.is_empty() {
        let before = records.len();
        records.retain(|r| !prefixes.iter().any(|p| r.nace3.starts_with(p.as_str())));
        info!("--exclude-nace removed {} records", before - records.len());
    }
    let mut manifest = RunManifest::new(&[path])?;
    for scale in Scale::ALL {
        let n = records.iter().filter(|r| scale.key_of(*r).is_some()).count() as u64;
        manifest.n_by_scale.insert(scale.name().to_owned(), n);
    }
    Ok(LoadedSample { records, manifest })
}

fn sector_records(records: &[SampleRecord], sector: SectorFilter) -> Vec<&SampleRecord> {
    records.iter().filter(|r| sector.matches(r.sectors())).collect()
}

pub fn compute(args: ComputeArgs) -> Result<(), CliError> {
    let sample = &args.sample;
    let loaded = load_sample(&sample.sample, &sample.exclude_nace)?;
    let (result, national) = if args.sector == SectorFilter::All {
        (decompose(&loaded.records, sample.level)?, None)
    } else {
        let summary = sector_summary(&loaded.records, args.sector, sample.level)?;
        let national = NationalShare {
            n_all: summary.n_all,
            t_all_bits: summary.t_all_bits,
            share: summary.national_share,
        };
        (summary.decomposition, Some(national))
    };
    let report = ComputeReport::new(result, args.sector, national, args.top);
    Sink::new(sample.out.clone()).emit(&report.render(sample.format), loaded.manifest)
}

/// The all-sector decomposition followed by one per requested sector that
/// has records at this scale.
fn sector_runs(
    records: &[SampleRecord],
    level: Scale,
    sectors: &[SectorFilter],
) -> Result<(DecompositionResult, Vec<(SectorFilter, DecompositionResult)>), CliError> {
    let all = decompose(records, level)?;
    let mut runs = Vec::new();
    for &sector in sectors.iter().filter(|&&s| s != SectorFilter::All) {
        match decompose(sector_records(records, sector), level) {
            Ok(result) => {
                            runs.push((sector, result));
            }
            Err(e) => warn!("skipping {}: {e}", sector.name()),
        }
    }
    if runs.is_empty() {
        return Err(CliError::EmptySample(format!(
            "none of the requested sectors has records at scale {}",
            level.name()
        )));
    }
    Ok((all, runs))
}

pub fn specialize(args: SectorsArgs) -> Result<(), CliError> {
    let sample = &args.sample;
    let loaded = load_sample(&sample.sample, &sample.exclude_nace)?;
    let (all, runs) = sector_runs(&loaded.records, sample.level, &args.sectors)?;
    let pairs: Vec<(SectorFilter, &DecompositionResult)> = runs.iter().map(|(s, r)| (*s, r)).collect();
    let report = SpecializationReport {
        level: sample.level.name().to_owned(),
        rows: specialization_index(&all, &pairs)?,
    };
    Sink::new(sample.out.clone()).emit(&report.render(sample.format), loaded.manifest)
}

pub fn correlate(args: SectorsArgs) -> Result<(), CliError> {
    let sample = &args.sample;
    let loaded = load_sample(&sample.sample, &sample.exclude_nace)?;
    let (all, runs) = sector_runs(&loaded.records, sample.level, &args.sectors)?;
    let mut labelled: Vec<(&str, &DecompositionResult)> = vec![("all", &all)];
    labelled.extend(runs.iter().map(|(s, r)| (s.name(), r)));
    let (keys, vectors) = percent_vectors(&labelled)?;
    let report = CorrelationReport {
        level: sample.level.name().to_owned(),
        keys,
        matrix: contribution_correlations(&vectors)?,
    };
    Sink::new(sample.out.clone()).emit(&report.render(sample.format), loaded.manifest)
}

pub fn tally(args: SampleArgs) -> Result<(), CliError> {
    let loaded = load_sample(&args.sample, &args.exclude_nace)?;
    let tally = tally_sector_counts(&loaded.records, args.level);
    if tally.total.all == 0 {
        return Err(CliError::EmptySample(format!(
            "no records resolvable at scale {}",
            args.level.name()
        )));
    }
    let report = TallyReport {
        level: args.level.name().to_owned(),
        tally,
    };
    Sink::new(args.out.clone()).emit(&report.render(args.format), loaded.manifest)
}

fn parse_group(raw: &str, index: usize, args: &SynthArgs) -> Result<(String, SynthSpec), CliError> {
    let bad = || CliError::input(format!("--group {raw:?}: expected KEY=STRUCTURE:N"));
    let (key, rest) = raw.split_once('=').ok_or_else(bad)?;
    let (structure, n) = rest.split_once(':').ok_or_else(bad)?;
    let n = n.trim().parse().map_err(|_| bad())?;
    let cards = [args.cards[0], args.cards[1], args.cards[2]];
    let seed = args.seed.wrapping_add(index as u64);
    Ok((key.trim().to_owned(), SynthSpec::new(structure.parse()?, n, cards, seed)))
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    #[serde(flatten)]
    run: RunManifest,
    population: &'a synergy_core::synth::PopulationManifest,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<SynthSpec>,
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let (population, spec): (Population, Option<SynthSpec>) = if args.fixture {
        (fixture_population(args.seed), None)
    } else {
        let spec = if args.group.is_empty() {
            SynthSpec::new(args.structure, args.n, [args.cards[0], args.cards[1], args.cards[2]], args.seed)
        } else {
            let groups = args
                .group
                .iter()
                .enumerate()
                .map(|(i, g)| parse_group(g, i, &args))
                .collect::<Result<Vec<_>, _>>()?;
            SynthSpec::mixture(groups)
        };
        let tuples = generate(&spec)?;
        (population_from_tuples(&tuples, args.seed)?, Some(spec))
    };

    let mut companies = Vec::new();
    population.write_companies(&mut companies)?;
    let mut concordance = Vec::new();
    population.write_concordance(&mut concordance)?;
    write_atomic(&args.companies, &companies)?;
    write_atomic(&args.concordance, &concordance)?;

    let mut run = RunManifest::new(&[])?;
    run.outputs.push(crate::output::digest_bytes(&args.companies, &companies));
    run.outputs.push(crate::output::digest_bytes(&args.concordance, &concordance));
    let manifest = SynthManifest {
        run,
        population: &population.manifest,
        spec,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).map_err(CliError::input)?;
    json.push(b'\n');
    write_atomic(&crate::output::manifest_path(&args.companies), &json)?;
    info!(
        "wrote {} companies and {} concordance rows",
        population.companies.len(),
        population.concordance.len()
    );
    Ok(())
}

fn dense_t3<R: AnalysisRecord>(records: &[R]) -> Result<f64, CliError> {
    let cells: Vec<[&str; 3]> = records
        .iter()
        .map(|r| [r.zip3(), r.nace3(), r.size_class().label()])
        .collect();
    Ok(brute_force_t3(&cells)?)
}

pub fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let loaded = load_sample(&args.sample, &args.exclude_nace)?;
    let records = &loaded.records;
    let row = |key: &str, n: u64, sparse: f64, dense: f64| OracleRow {
        key: key.to_owned(),
        n,
        t_sparse_bits: sparse,
        t_dense_bits: dense,
        abs_diff: (sparse - dense).abs(),
    };

    let mut rows = Vec::new();
    match args.level {
        None => {
            let table = synergy_core::build_table(
                records
                    .iter()
                    .map(|r| [r.zip3.as_str(), r.nace3.as_str(), r.size_class.label()]),
            );
            let sparse = synergy_core::mutual_info3(&table)
                .map_err(|e| CliError::EmptySample(e.to_string()))?
                .bits;
            rows.push(row("ALL", table.total(), sparse, dense_t3(records)?));
        }
        Some(level) => {
            let result = decompose(records, level)?;
            let mut by_group: BTreeMap<String, Vec<&SampleRecord>> = BTreeMap::new();
            let mut covered = Vec::new();
            for r in records {
                if let Some(key) = level.key_of(r) {
                    by_group.entry(key.into_owned()).or_default().push(r);
                    covered.push(r);
                }
            }
            rows.push(row("ALL", result.n, result.t_total_bits, dense_t3(&covered)?));
            for g in &result.groups {
                rows.push(row(&g.key, g.n, g.t_bits, dense_t3(&by_group[&g.key])?));
            }
        }
    }
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let report = OracleReport {
        level: args.level.map(|l| l.name().to_owned()),
        max_abs_diff,
        rows,
    };
    Sink::new(args.out.clone()).emit(&report.render(args.format), loaded.manifest)?;
    if max_abs_diff > args.tolerance {
        return Err(CliError::input(format!(
            "oracle disagreement {} bits exceeds tolerance {}",
            fixed(max_abs_diff, 15),
            args.tolerance
        )));
    }
    Ok(())
}
