//! Report rendering. CSV rounds for display (millibits to 1 decimal,
//! percents to 2); JSON keeps full precision.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;

use synergy_core::correlation::CorrelationMatrix;
use synergy_core::decomposition::{DecompositionResult, GroupResult, SectorTally, SpecializationRow};
use synergy_core::SectorFilter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Fixed-point rendering with `-0.0` folded to `0.0`.
pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_owned(),
        _ => s,
    }
}

pub fn mbits(bits: f64) -> String {
    fixed(bits * 1000.0, 1)
}

pub fn percent(p: Option<f64>) -> String {
    p.map_or_else(String::new, |p| fixed(p, 2))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialise");
    out.push(b'\n');
    out
}

/// Groups beyond the first `top`, folded together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtherGroups {
    pub groups: usize,
    pub n: u64,
    pub weighted_bits: f64,
    pub percent: Option<f64>,
}

fn split_top(groups: &[GroupResult], top: Option<usize>) -> (&[GroupResult], Option<OtherGroups>) {
    let k = top.unwrap_or(groups.len()).min(groups.len());
    let (shown, rest) = groups.split_at(k);
    if rest.is_empty() {
        return (shown, None);
    }
    let percent = rest.iter().map(|g| g.percent).sum::<Option<f64>>();
    let other = OtherGroups {
        groups: rest.len(),
        n: rest.iter().map(|g| g.n).sum(),
        weighted_bits: rest.iter().map(|g| g.weighted_bits).sum(),
        percent,
    };
    (shown, Some(other))
}

/// The sector run measured against the all-sector sample at the same scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NationalShare {
    pub n_all: u64,
    pub t_all_bits: f64,
    pub share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeReport {
    pub level: String,
    pub sector: SectorFilter,
    pub n: u64,
    pub excluded: u64,
    pub t_total_bits: f64,
    pub t0_bits: f64,
    pub percent_t0: Option<f64>,
    pub groups: Vec<GroupResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<OtherGroups>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub national: Option<NationalShare>,
    pub warnings: Vec<String>,
}

impl ComputeReport {
    pub fn new(
        result: DecompositionResult,
        sector: SectorFilter,
        national: Option<NationalShare>,
        top: Option<usize>,
    ) -> Self {
        let (shown, other) = split_top(&result.groups, top);
        Self {
            level: result.scale.clone(),
            sector,
            n: result.n,
            excluded: result.excluded,
            t_total_bits: result.t_total_bits,
            t0_bits: result.t0_bits,
            percent_t0: result.percent_t0,
            groups: shown.to_vec(),
            other,
            national,
            warnings: result.warnings,
        }
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => self.to_csv().into_bytes(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("key,n,t_mbits,percent\n");
        for g in &self.groups {
            let _ = writeln!(out, "{},{},{},{}", csv_field(&g.key), g.n, mbits(g.t_bits), percent(g.percent));
        }
        if let Some(o) = &self.other {
            let _ = writeln!(out, "OTHER,{},,{}", o.n, percent(o.percent));
        }
        let _ = writeln!(out, "T0,,{},{}", mbits(self.t0_bits), percent(self.percent_t0));
        let total_pct = self.percent_t0.map(|_| 100.0);
        let _ = writeln!(out, "TOTAL,{},{},{}", self.n, mbits(self.t_total_bits), percent(total_pct));
        if let Some(nat) = &self.national {
            let _ = writeln!(out, "NATIONAL_SHARE,{},{},{}", nat.n_all, mbits(nat.t_all_bits), percent(nat.share));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecializationReport {
    pub level: String,
    pub rows: Vec<SpecializationRow>,
}

impl SpecializationReport {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut out = String::from("key,sector,sector_share,all_share,delta\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        csv_field(&r.key),
                        r.sector.name(),
                        fixed(r.sector_share, 2),
                        fixed(r.all_share, 2),
                        fixed(r.delta, 2)
                    );
                }
                out.into_bytes()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub level: String,
    /// Group keys the percent vectors are aligned on.
    pub keys: Vec<String>,
    pub matrix: CorrelationMatrix,
}

impl CorrelationReport {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let m = &self.matrix;
                let mut out = format!("method,vector,{}\n", m.labels.join(","));
                for (method, rows) in [("pearson", &m.pearson), ("spearman", &m.spearman)] {
                    for (label, row) in m.labels.iter().zip(rows) {
                        let cells: Vec<String> = row.iter().map(|&r| fixed(r, 3)).collect();
                        let _ = writeln!(out, "{method},{label},{}", cells.join(","));
                    }
                }
                out.into_bytes()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TallyReport {
    pub level: String,
    pub tally: SectorTally,
}

impl TallyReport {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut out = String::from("key,all,htm,mhtm,kis,htkis\n");
                let rows = self.tally.rows.iter().map(|r| (csv_field(&r.key), &r.counts));
                for (key, c) in rows.chain([("TOTAL".to_owned(), &self.tally.total)]) {
                    let _ = writeln!(out, "{key},{},{},{},{},{}", c.all, c.htm, c.mhtm, c.kis, c.htkis);
                }
                out.into_bytes()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub key: String,
    pub n: u64,
    pub t_sparse_bits: f64,
    pub t_dense_bits: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub level: Option<String>,
    pub max_abs_diff: f64,
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let mut out = String::from("key,n,t_sparse_bits,t_dense_bits,abs_diff\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{:e},{:e},{:e}",
                        csv_field(&r.key),
                        r.n,
                        r.t_sparse_bits,
                        r.t_dense_bits,
                        r.abs_diff
                    );
                }
                out.into_bytes()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_folded() {
        assert_eq!(fixed(-0.0, 1), "0.0");
        assert_eq!(fixed(-0.04, 1), "0.0");
        assert_eq!(fixed(-0.05001, 1), "-0.1");
        assert_eq!(fixed(7.524, 2), "7.52");
        assert_eq!(mbits(-0.2803), "-280.3");
        assert_eq!(percent(None), "");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("41940"), "41940");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    fn group(key: &str, n: u64, percent: f64) -> GroupResult {
        GroupResult {
            key: key.into(),
            n,
            t_bits: -0.1,
            weighted_bits: percent / 100.0,
            percent: Some(percent),
        }
    }

    #[test]
    fn top_folds_the_tail() {
        let groups = [group("a", 5, 50.0), group("b", 3, 30.0), group("c", 2, 5.0)];
        let (shown, other) = split_top(&groups, Some(1));
        assert_eq!(shown.len(), 1);
        let other = other.unwrap();
        assert_eq!((other.groups, other.n, other.percent), (2, 5, Some(35.0)));
        assert!(split_top(&groups, Some(10)).1.is_none());
        assert!(split_top(&groups, None).1.is_none());
    }
}
