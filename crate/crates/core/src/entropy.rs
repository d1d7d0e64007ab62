//! Plug-in Shannon entropies (bits) and two-/three-way mutual information.
//!
//! All quantities come from exact integer counts with `p = count / N` and
//! `0 · log 0 = 0`. Each entropy sums its terms over the marginal counts in
//! ascending order, and the alternating sums use a correctly rounded
//! summation. Results therefore depend only on the multisets of counts: they
//! are bit-identical under record reordering, sharded merging, relabelling,
//! and permutation of the three dimension roles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsum::exact_sum;
use crate::table::{CellCounts, ContingencyTable3, Dim};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyError {
    #[error("empty sample: entropy is undefined for N = 0")]
    EmptySample,
}

/// The seven entropies of a `(G, T, O)` table, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub h_g: f64,
    pub h_t: f64,
    pub h_o: f64,
    pub h_gt: f64,
    pub h_go: f64,
    pub h_to: f64,
    pub h_gto: f64,
}

/// An unordered pair of dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DimPair {
    GeoTech,
    GeoOrg,
    TechOrg,
}

impl DimPair {
    pub const ALL: [DimPair; 3] = [DimPair::GeoTech, DimPair::GeoOrg, DimPair::TechOrg];

    pub fn dims(self) -> (Dim, Dim) {
        match self {
            DimPair::GeoTech => (Dim::Geography, Dim::Technology),
            DimPair::GeoOrg => (Dim::Geography, Dim::Organization),
            DimPair::TechOrg => (Dim::Technology, Dim::Organization),
        }
    }
}

impl EntropyProfile {
    pub fn marginal(&self, dim: Dim) -> f64 {
        match dim {
            Dim::Geography => self.h_g,
            Dim::Technology => self.h_t,
            Dim::Organization => self.h_o,
        }
    }

    pub fn joint(&self, pair: DimPair) -> f64 {
        match pair {
            DimPair::GeoTech => self.h_gt,
            DimPair::GeoOrg => self.h_go,
            DimPair::TechOrg => self.h_to,
        }
    }

    /// `H_a + H_b - H_ab`.
    pub fn mutual_info(&self, pair: DimPair) -> f64 {
        let (a, b) = pair.dims();
        exact_sum(&[self.marginal(a), self.marginal(b), -self.joint(pair)])
    }

    /// `H_g + H_t + H_o - H_gt - H_go - H_to + H_gto`, signed.
    pub fn synergy_bits(&self) -> f64 {
        exact_sum(&[
            self.h_g,
            self.h_t,
            self.h_o,
            -self.h_gt,
            -self.h_go,
            -self.h_to,
            self.h_gto,
        ])
    }
}

/// Signed three-way mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynergyValue {
    pub bits: f64,
    pub millibits: f64,
    pub n: u64,
}

impl SynergyValue {
    pub fn from_bits(bits: f64, n: u64) -> Self {
        Self {
            bits,
            millibits: bits * 1000.0,
            n,
        }
    }
}

/// `-Σ p log2 p` over ascending counts.
pub(crate) fn entropy_of_counts(sorted_counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    let mut h = 0.0;
    for &c in sorted_counts {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    // a single category gives -0.0; report +0.0
    h + 0.0
}

impl CellCounts {
    pub fn entropy_profile(&self) -> Result<EntropyProfile, EntropyError> {
        let total = self.total();
        if total == 0 {
            return Err(EntropyError::EmptySample);
        }
        let h = |keep: [bool; 3]| entropy_of_counts(&self.marginal_counts(keep), total);
        Ok(EntropyProfile {
            h_g: h([true, false, false]),
            h_t: h([false, true, false]),
            h_o: h([false, false, true]),
            h_gt: h([true, true, false]),
            h_go: h([true, false, true]),
            h_to: h([false, true, true]),
            h_gto: h([true, true, true]),
        })
    }

    /// Entropy of a single dimension's marginal.
    pub fn marginal_entropy(&self, dim: Dim) -> Result<f64, EntropyError> {
        let total = self.total();
        if total == 0 {
            return Err(EntropyError::EmptySample);
        }
        let mut keep = [false; 3];
        keep[dim.index()] = true;
        Ok(entropy_of_counts(&self.marginal_counts(keep), total))
    }

    pub fn synergy(&self) -> Result<SynergyValue, EntropyError> {
        let profile = self.entropy_profile()?;
        Ok(SynergyValue::from_bits(profile.synergy_bits(), self.total()))
    }
}

pub fn entropy_profile(table: &ContingencyTable3) -> Result<EntropyProfile, EntropyError> {
    table.counts().entropy_profile()
}

/// Two-way mutual information for the selected pair, in bits.
pub fn mutual_info2(table: &ContingencyTable3, pair: DimPair) -> Result<f64, EntropyError> {
    Ok(entropy_profile(table)?.mutual_info(pair))
}

/// Signed three-way mutual information (synergy when negative).
pub fn mutual_info3(table: &ContingencyTable3) -> Result<SynergyValue, EntropyError> {
    table.counts().synergy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::build_table;

    fn xor() -> ContingencyTable3 {
        build_table([["0", "0", "0"], ["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]])
    }

    fn uniform_cube() -> ContingencyTable3 {
        let mut rows = Vec::new();
        for g in ["0", "1"] {
            for t in ["0", "1"] {
                for o in ["0", "1"] {
                    rows.push([g, t, o]);
                }
            }
        }
        build_table(rows)
    }

    #[test]
    fn empty_table_is_an_error() {
        let table = ContingencyTable3::new();
        assert_eq!(entropy_profile(&table), Err(EntropyError::EmptySample));
        assert_eq!(mutual_info2(&table, DimPair::GeoTech), Err(EntropyError::EmptySample));
        assert_eq!(mutual_info3(&table), Err(EntropyError::EmptySample));
    }

    #[test]
    fn single_record_has_zero_profile() {
        let p = entropy_profile(&build_table([["a", "b", "c"]])).unwrap();
        for h in [p.h_g, p.h_t, p.h_o, p.h_gt, p.h_go, p.h_to, p.h_gto] {
            assert_eq!(h.to_bits(), 0.0f64.to_bits());
        }
    }

    #[test]
    fn uniform_cube_profile() {
        let p = entropy_profile(&uniform_cube()).unwrap();
        assert_eq!((p.h_g, p.h_t, p.h_o), (1.0, 1.0, 1.0));
        assert_eq!((p.h_gt, p.h_go, p.h_to), (2.0, 2.0, 2.0));
        assert_eq!(p.h_gto, 3.0);
        assert_eq!(mutual_info3(&uniform_cube()).unwrap().bits, 0.0);
    }

    #[test]
    fn three_to_one_marginal() {
        let table = build_table([["a", "x", "1"], ["a", "x", "1"], ["a", "x", "1"], ["b", "x", "1"]]);
        let h = entropy_profile(&table).unwrap().h_g;
        // -(0.75 log2 0.75 + 0.25 log2 0.25)
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn pairwise_information() {
        let independent = uniform_cube();
        for pair in DimPair::ALL {
            assert_eq!(mutual_info2(&independent, pair).unwrap(), 0.0);
            assert_eq!(mutual_info2(&xor(), pair).unwrap(), 0.0);
        }
        let correlated = build_table([["0", "0", "z"], ["1", "1", "z"]]);
        assert_eq!(mutual_info2(&correlated, DimPair::GeoTech).unwrap(), 1.0);
    }

    #[test]
    fn xor_and_copy_are_exact() {
        let t = mutual_info3(&xor()).unwrap();
        assert_eq!(t.bits, -1.0);
        assert_eq!(t.millibits, -1000.0);
        assert_eq!(t.n, 4);

        let copy = build_table([["0", "0", "0"], ["1", "1", "1"]]);
        assert_eq!(mutual_info3(&copy).unwrap().bits, 1.0);
    }

    #[test]
    fn entropy_of_counts_ignores_label_order() {
        let a = entropy_of_counts(&[1, 2, 7], 10);
        let b = entropy_of_counts(&[1, 2, 7], 10);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(entropy_of_counts(&[5], 5).to_bits(), 0.0f64.to_bits());
    }
}
