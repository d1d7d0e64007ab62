//! Sparse three-dimensional contingency tables over `(G, T, O)` labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// One of the three helix dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dim {
    /// Geography (ZIP3 in the company model).
    Geography,
    /// Technology (NACE group).
    Technology,
    /// Organization (size class).
    Organization,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::Geography, Dim::Technology, Dim::Organization];

    pub fn index(self) -> usize {
        match self {
            Dim::Geography => 0,
            Dim::Technology => 1,
            Dim::Organization => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Dim::Geography => 'G',
            Dim::Technology => 'T',
            Dim::Organization => 'O',
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Dense indexing of the distinct labels seen along one dimension.
#[derive(Debug, Clone)]
pub struct DimensionRegistry {
    dim: Dim,
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl DimensionRegistry {
    pub fn new(dim: Dim) -> Self {
        Self {
            dim,
            labels: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Returns the index of `label`, assigning the next free one if unseen.
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = u32::try_from(self.labels.len()).expect("more than u32::MAX labels");
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn lookup(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label_at(&self, index: u32) -> Option<&str> {
        self.labels.get(index as usize).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Integer cell counts keyed by dense index triples, without label bookkeeping.
///
/// Every stored count is at least one and `total` is their sum. This is what
/// the entropy routines consume; [`ContingencyTable3`] wraps it with labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellCounts {
    cells: HashMap<[u32; 3], u64>,
    total: u64,
}

impl CellCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: [u32; 3], count: u64) {
        if count == 0 {
            return;
        }
        *self.cells.entry(key).or_insert(0) += count;
        self.total += count;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of occupied cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, key: [u32; 3]) -> u64 {
        self.cells.get(&key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ([u32; 3], u64)> + '_ {
        self.cells.iter().map(|(&k, &c)| (k, c))
    }

    /// Adds every cell of `other` into `self`. Both sides must share indexing.
    pub fn absorb(&mut self, other: &CellCounts) {
        for (key, count) in other.iter() {
            self.add(key, count);
        }
    }

    /// Number of distinct categories observed along `dim`.
    pub fn distinct(&self, dim: Dim) -> usize {
        let mut seen: Vec<u32> = self.cells.keys().map(|k| k[dim.index()]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Counts of the marginal distribution over the dimensions flagged in
    /// `keep`, sorted ascending. The sort makes every downstream sum depend
    /// only on the multiset of counts, not on label order.
    pub fn marginal_counts(&self, keep: [bool; 3]) -> Vec<u64> {
        let mut counts: Vec<u64> = if keep == [true; 3] {
            self.cells.values().copied().collect()
        } else {
            let mut acc: HashMap<[u32; 3], u64> = HashMap::new();
            for (key, &count) in &self.cells {
                let projected = [
                    if keep[0] { key[0] } else { 0 },
                    if keep[1] { key[1] } else { 0 },
                    if keep[2] { key[2] } else { 0 },
                ];
                *acc.entry(projected).or_insert(0) += count;
            }
            acc.into_values().collect()
        };
        counts.sort_unstable();
        counts
    }
}

/// Sparse `(G, T, O)` table: three label registries plus integer cell counts.
#[derive(Debug, Clone)]
pub struct ContingencyTable3 {
    registries: [DimensionRegistry; 3],
    counts: CellCounts,
}

impl Default for ContingencyTable3 {
    fn default() -> Self {
        Self::new()
    }
}

impl ContingencyTable3 {
    pub fn new() -> Self {
        Self {
            registries: Dim::ALL.map(DimensionRegistry::new),
            counts: CellCounts::new(),
        }
    }

    pub fn insert(&mut self, labels: [&str; 3]) {
        self.insert_n(labels, 1);
    }

    pub fn insert_n(&mut self, labels: [&str; 3], count: u64) {
        if count == 0 {
            return;
        }
        let key = [
            self.registries[0].intern(labels[0]),
            self.registries[1].intern(labels[1]),
            self.registries[2].intern(labels[2]),
        ];
        self.counts.add(key, count);
    }

    /// Sample size N.
    pub fn total(&self) -> u64 {
        self.counts.total()
    }

    pub fn counts(&self) -> &CellCounts {
        &self.counts
    }

    pub fn registry(&self, dim: Dim) -> &DimensionRegistry {
        &self.registries[dim.index()]
    }

    pub fn count(&self, labels: [&str; 3]) -> u64 {
        let key = (|| {
            Some([
                self.registries[0].lookup(labels[0])?,
                self.registries[1].lookup(labels[1])?,
                self.registries[2].lookup(labels[2])?,
            ])
        })();
        key.map_or(0, |k| self.counts.get(k))
    }

    /// Cells keyed by label triple, in label order.
    pub fn labelled_cells(&self) -> BTreeMap<[&str; 3], u64> {
        self.counts
            .iter()
            .map(|(key, count)| {
                let labels = [0, 1, 2].map(|d| {
                    self.registries[d]
                        .label_at(key[d])
                        .expect("cell index outside registry")
                });
                (labels, count)
            })
            .collect()
    }

    /// Same table with dimension roles reordered: output dimension `i` is
    /// input dimension `order[i]`.
    pub fn permuted(&self, order: [Dim; 3]) -> Self {
        let mut out = Self::new();
        for (labels, count) in self.labelled_cells() {
            out.insert_n(order.map(|d| labels[d.index()]), count);
        }
        out
    }
}

/// Label-based equality: same label triples with the same counts.
impl PartialEq for ContingencyTable3 {
    fn eq(&self, other: &Self) -> bool {
        self.total() == other.total() && self.labelled_cells() == other.labelled_cells()
    }
}

/// Builds a table from `(g, t, o)` label tuples. Empty input gives N = 0.
pub fn build_table<I, S>(records: I) -> ContingencyTable3
where
    I: IntoIterator<Item = [S; 3]>,
    S: AsRef<str>,
{
    let mut table = ContingencyTable3::new();
    for [g, t, o] in records {
        table.insert([g.as_ref(), t.as_ref(), o.as_ref()]);
    }
    table
}

/// Cell-wise sum of two tables; registries are unioned by label.
pub fn merge_tables(a: &ContingencyTable3, b: &ContingencyTable3) -> ContingencyTable3 {
    let mut merged = a.clone();
    for (labels, count) in b.labelled_cells() {
        merged.insert_n(labels, count);
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_empty_table() {
        let table = build_table(Vec::<[&str; 3]>::new());
        assert_eq!(table.total(), 0);
        assert!(table.counts().is_empty());
    }

    #[test]
    fn identical_tuples_accumulate() {
        let table = build_table([["a", "b", "c"], ["a", "b", "c"]]);
        assert_eq!(table.total(), 2);
        assert_eq!(table.counts().len(), 1);
        assert_eq!(table.count(["a", "b", "c"]), 2);
    }

    #[test]
    fn xor_tuples_fill_four_cells() {
        let table = build_table([["0", "0", "0"], ["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]]);
        assert_eq!(table.total(), 4);
        assert_eq!(table.counts().len(), 4);
        assert!(table.counts().iter().all(|(_, c)| c == 1));
        for dim in Dim::ALL {
            assert_eq!(table.registry(dim).len(), 2);
        }
    }

    #[test]
    fn registry_round_trips() {
        let mut reg = DimensionRegistry::new(Dim::Technology);
        for label in ["620", "211", "620", "303"] {
            reg.intern(label);
        }
        assert_eq!(reg.len(), 3);
        for (i, label) in reg.labels().iter().enumerate() {
            assert_eq!(reg.lookup(label), Some(i as u32));
            assert_eq!(reg.label_at(i as u32), Some(label.as_str()));
        }
        assert_eq!(reg.lookup("999"), None);
    }

    #[test]
    fn merge_identity_and_doubling() {
        let x = build_table([["a", "b", "c"], ["a", "x", "c"], ["q", "b", "c"]]);
        let empty = ContingencyTable3::new();
        assert_eq!(merge_tables(&empty, &x), x);
        assert_eq!(merge_tables(&x, &empty), x);

        let doubled = merge_tables(&x, &x);
        assert_eq!(doubled.total(), 2 * x.total());
        for (labels, count) in x.labelled_cells() {
            assert_eq!(doubled.count(labels), 2 * count);
        }
    }

    #[test]
    fn merge_unions_registries_by_label() {
        let a = build_table([["a", "b", "c"]]);
        let b = build_table([["z", "b", "c"], ["a", "b", "c"]]);
        let m = merge_tables(&a, &b);
        assert_eq!(m.count(["a", "b", "c"]), 2);
        assert_eq!(m.count(["z", "b", "c"]), 1);
        assert_eq!(m.registry(Dim::Geography).len(), 2);
        assert_eq!(m.registry(Dim::Technology).len(), 1);
    }

    #[test]
    fn marginal_counts_are_sorted_multisets() {
        let table = build_table([["a", "x", "1"], ["a", "y", "1"], ["a", "x", "2"], ["b", "x", "1"]]);
        assert_eq!(table.counts().marginal_counts([true, false, false]), vec![1, 3]);
        assert_eq!(table.counts().marginal_counts([false, true, false]), vec![1, 3]);
        assert_eq!(table.counts().marginal_counts([true, true, false]), vec![1, 1, 2]);
        assert_eq!(table.counts().marginal_counts([true; 3]), vec![1, 1, 1, 1]);
        assert_eq!(table.counts().distinct(Dim::Organization), 2);
    }
}
