//! Seeded synthetic populations with planted dependence structure.
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood 2014) with
//! bounded draws by 128-bit multiply-high, so every output is reproducible
//! from the seed in any language.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::taxonomy::SizeClass;

pub const GENERATOR: &str = "SplitMix64 (0x9E3779B97F4A7C15 increment); bounded draws floor(x * k / 2^64)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error("I/O error: {0}")]
    Io(String),
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec(msg.into())
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Draw in `0..bound`; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }

    /// Index drawn with probability proportional to `weights`.
    fn weighted(&mut self, weights: &[u64]) -> usize {
        let mut x = self.below(weights.iter().sum());
        for (i, &w) in weights.iter().enumerate() {
            if x < w {
                return i;
            }
            x -= w;
        }
        unreachable!("draw below total weight")
    }

    /// Fisher–Yates, from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// I.i.d. uniform per dimension.
    Independent,
    /// The four parity cells `(a, b, a ^ b)` in rotation.
    Xor,
    /// Diagonal cells `(i, i, i)` in rotation over the smallest cardinality.
    Copy,
    /// Concatenation of per-group specs.
    Mixture,
}

impl FromStr for Structure {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" => Ok(Structure::Independent),
            "xor" => Ok(Structure::Xor),
            "copy" => Ok(Structure::Copy),
            "mixture" => Ok(Structure::Mixture),
            other => Err(invalid(format!("unknown structure {other:?}"))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Independent => "independent",
            Structure::Xor => "xor",
            Structure::Copy => "copy",
            Structure::Mixture => "mixture",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthSpec {
    pub structure: Structure,
    pub n: usize,
    /// Categories per dimension `(G, T, O)`.
    pub cards: [u32; 3],
    pub seed: u64,
    /// Keyed sub-specs; only for [`Structure::Mixture`].
    pub groups: Vec<(String, SynthSpec)>,
}

impl SynthSpec {
    pub fn new(structure: Structure, n: usize, cards: [u32; 3], seed: u64) -> Self {
        Self {
            structure,
            n,
            cards,
            seed,
            groups: Vec::new(),
        }
    }

    pub fn mixture(groups: Vec<(String, SynthSpec)>) -> Self {
        let n = groups.iter().map(|(_, s)| s.n).sum();
        let mut cards = [1; 3];
        for (_, s) in &groups {
            for d in 0..3 {
                cards[d] = cards[d].max(s.cards[d]);
            }
        }
        Self {
            structure: Structure::Mixture,
            n,
            cards,
            seed: 0,
            groups,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.structure == Structure::Mixture {
            if self.groups.is_empty() {
                return Err(invalid("mixture needs at least one group"));
            }
            let mut keys = HashSet::new();
            for (key, spec) in &self.groups {
                if !keys.insert(key.as_str()) {
                    return Err(invalid(format!("duplicate group key {key:?}")));
                }
                if spec.structure == Structure::Mixture {
                    return Err(invalid("nested mixtures are not supported"));
                }
                spec.validate()?;
            }
            if self.n != self.groups.iter().map(|(_, s)| s.n).sum::<usize>() {
                return Err(invalid("mixture n must equal the sum of group sizes"));
            }
            return Ok(());
        }
        if !self.groups.is_empty() {
            return Err(invalid("only mixtures take groups"));
        }
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.cards.contains(&0) {
            return Err(invalid("cardinalities must be at least 1"));
        }
        if self.structure == Structure::Xor && self.cards.iter().any(|&k| k < 2) {
            return Err(invalid("xor needs at least 2 categories per dimension"));
        }
        Ok(())
    }
}

/// One generated observation and the group it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynthTuple {
    pub group: String,
    pub cell: [u32; 3],
}

fn generate_plain(spec: &SynthSpec, group: &str, out: &mut Vec<SynthTuple>) {
    let push = |out: &mut Vec<SynthTuple>, cell| {
        out.push(SynthTuple {
            group: group.to_owned(),
            cell,
        })
    };
    match spec.structure {
        Structure::Independent => {
            let mut rng = SplitMix64::new(spec.seed);
            for _ in 0..spec.n {
                let cell = spec.cards.map(|k| rng.below(u64::from(k)) as u32);
                push(out, cell);
            }
        }
        Structure::Xor => {
            const PARITY: [[u32; 3]; 4] = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]];
            for i in 0..spec.n {
                push(out, PARITY[i % 4]);
            }
        }
        Structure::Copy => {
            let k = *spec.cards.iter().min().expect("three cards") as usize;
            for i in 0..spec.n {
                let v = (i % k) as u32;
                push(out, [v, v, v]);
            }
        }
        Structure::Mixture => unreachable!("handled by generate"),
    }
}

/// Generates tuples for `spec`. Plain specs use group key `"all"`.
pub fn generate(spec: &SynthSpec) -> Result<Vec<SynthTuple>, SynthError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.n);
    if spec.structure == Structure::Mixture {
        for (key, sub) in &spec.groups {
            generate_plain(sub, key, &mut out);
        }
    } else {
        generate_plain(spec, "all", &mut out);
    }
    Ok(out)
}

/// A company row as it would appear in an input file. Fields are raw text,
/// so malformed values can be planted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanyRow {
    pub id: String,
    pub zip: String,
    pub nace: String,
    pub employees: String,
    pub state: String,
    pub year: String,
    pub city: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcordanceRow {
    pub zip5: String,
    pub state: String,
    pub cbsa_code: String,
    pub cbsa_name: String,
    pub cbsa_type: String,
    pub csa_code: String,
    pub csa_name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PopulationManifest {
    pub generator: String,
    pub seed: u64,
    pub description: String,
    pub companies: usize,
    pub concordance_rows: usize,
}

/// Company and concordance rows ready to be written as input files.
#[derive(Debug, Clone, Default)]
pub struct Population {
    pub companies: Vec<CompanyRow>,
    pub concordance: Vec<ConcordanceRow>,
    pub manifest: PopulationManifest,
}

fn io(e: impl fmt::Display) -> SynthError {
    SynthError::Io(e.to_string())
}

impl Population {
    pub fn write_companies<W: Write>(&self, writer: W) -> Result<(), SynthError> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["id", "zip", "nace", "employees", "state", "year", "city"])
            .map_err(io)?;
        for c in &self.companies {
            csv.write_record([&c.id, &c.zip, &c.nace, &c.employees, &c.state, &c.year, &c.city])
                .map_err(io)?;
        }
        csv.flush().map_err(io)
    }

    pub fn write_concordance<W: Write>(&self, writer: W) -> Result<(), SynthError> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([
            "zip5",
            "state",
            "cbsa_code",
            "cbsa_name",
            "cbsa_type",
            "csa_code",
            "csa_name",
        ])
        .map_err(io)?;
        for r in &self.concordance {
            csv.write_record([
                &r.zip5,
                &r.state,
                &r.cbsa_code,
                &r.cbsa_name,
                &r.cbsa_type,
                &r.csa_code,
                &r.csa_name,
            ])
            .map_err(io)?;
        }
        csv.flush().map_err(io)
    }
}

/// Deterministic 3-digit NACE code for technology index `t`: 0 → `"100"`,
/// 1 → `"101"`, ...
pub fn synthetic_nace(t: u32) -> String {
    format!("{:03}", 100 + t)
}

fn state_code(i: usize) -> String {
    let letters = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    format!("{}{}", letters[i / 26 % 26] as char, letters[i % 26] as char)
}

/// Wraps generated tuples as companies: each group becomes a state with one
/// metro CBSA and one CSA covering all its ZIPs; `g` becomes a ZIP3 unique to
/// the group, `t` a NACE code via [`synthetic_nace`], and `o` an employee
/// count at the lower bound of size class `o`.
pub fn population_from_tuples(tuples: &[SynthTuple], seed: u64) -> Result<Population, SynthError> {
    let mut groups: Vec<&str> = Vec::new();
    let mut max_card = [0u32; 3];
    for t in tuples {
        if !groups.contains(&t.group.as_str()) {
            groups.push(&t.group);
        }
        for d in 0..3 {
            max_card[d] = max_card[d].max(t.cell[d] + 1);
        }
    }
    if max_card[2] as usize > SizeClass::COUNT {
        return Err(invalid("organization cardinality above 11 size classes"));
    }
    if max_card[1] > 900 {
        return Err(invalid("technology cardinality above 900"));
    }
    let zip_span = max_card[0] as usize;
    if 100 + groups.len() * zip_span > 1000 {
        return Err(invalid("too many groups x geography categories for 3-digit ZIPs"));
    }
    let zip3 = |gi: usize, g: u32| format!("{:03}", 100 + gi * zip_span + g as usize);

    let mut concordance = Vec::new();
    for (gi, _) in groups.iter().enumerate() {
        let state = state_code(gi);
        for g in 0..max_card[0] {
            concordance.push(ConcordanceRow {
                zip5: format!("{}01", zip3(gi, g)),
                state: state.clone(),
                cbsa_code: format!("{}", 10000 + gi * 10),
                cbsa_name: format!("Synthetic Area {gi}, {state}"),
                cbsa_type: "metro".into(),
                csa_code: format!("{}", 100 + gi),
                csa_name: format!("Synthetic Region {gi}, {state}"),
            });
        }
    }
    let companies = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let gi = groups.iter().position(|g| *g == t.group).expect("group seen");
            CompanyRow {
                id: format!("S{:07}", i + 1),
                zip: format!("{}01", zip3(gi, t.cell[0])),
                nace: synthetic_nace(t.cell[1]),
                employees: SizeClass::from_index(t.cell[2] as usize)
                    .expect("checked above")
                    .lower()
                    .to_string(),
                state: state_code(gi),
                year: String::new(),
                city: String::new(),
            }
        })
        .collect::<Vec<_>>();
    Ok(Population {
        manifest: PopulationManifest {
            generator: GENERATOR.into(),
            seed,
            description: format!("{} tuples in {} groups", tuples.len(), groups.len()),
            companies: companies.len(),
            concordance_rows: concordance.len(),
        },
        companies,
        concordance,
    })
}

struct Area {
    state: &'static str,
    cbsa: Option<(&'static str, &'static str, &'static str)>,
    csa: Option<(&'static str, &'static str)>,
    zip3s: &'static [&'static str],
}

const AREAS: [Area; 9] = [
    Area {
        state: "CA",
        cbsa: Some(("41940", "Synthetic Valley, CA", "metro")),
        csa: Some(("488", "Synthetic Bay, CA")),
        zip3s: &["940", "950", "951"],
    },
    Area {
        state: "CA",
        cbsa: Some(("31080", "Synthetic Basin, CA", "metro")),
        csa: Some(("348", "Synthetic Coast, CA")),
        zip3s: &["900", "902", "917"],
    },
    Area {
        state: "MA",
        cbsa: Some(("14460", "Synthetic Harbor, MA", "metro")),
        csa: Some(("148", "Synthetic New England, MA")),
        zip3s: &["021", "024"],
    },
    Area {
        state: "MA",
        cbsa: Some(("49340", "Synthetic Hills, MA", "metro")),
        csa: Some(("148", "Synthetic New England, MA")),
        zip3s: &["016"],
    },
    Area {
        state: "TX",
        cbsa: Some(("12420", "Synthetic Capital, TX", "metro")),
        csa: None,
        zip3s: &["786", "787"],
    },
    Area {
        state: "TX",
        cbsa: Some(("33260", "Synthetic Plains, TX", "micro")),
        csa: None,
        zip3s: &["795", "797"],
    },
    Area {
        state: "CA",
        cbsa: None,
        csa: None,
        zip3s: &["961"],
    },
    Area {
        state: "MA",
        cbsa: None,
        csa: None,
        zip3s: &["012"],
    },
    Area {
        state: "TX",
        cbsa: None,
        csa: None,
        zip3s: &["790"],
    },
];

/// Unclassified NACE groups used for background populations.
const BASE_NACE: [&str; 10] = ["101", "107", "412", "433", "471", "477", "561", "681", "812", "960"];
const SIZE_WEIGHTS: [u64; 11] = [2, 40, 3, 20, 12, 9, 5, 4, 2, 2, 1];

/// Sector-specific structure planted inside one area.
struct Plant {
    area: usize,
    structure: Structure,
    n: usize,
    zip3s: [&'static str; 2],
    naces: [&'static str; 2],
    sizes: [usize; 2],
}

const PLANTS: [Plant; 9] = [
    // HTM copy and HTKIS xor in the valley
    Plant { area: 0, structure: Structure::Copy, n: 300, zip3s: ["940", "950"], naces: ["261", "303"], sizes: [3, 6] },
    Plant { area: 0, structure: Structure::Xor, n: 400, zip3s: ["950", "951"], naces: ["620", "631"], sizes: [1, 4] },
    // MHTM xor and independent HTKIS in the basin
    Plant { area: 1, structure: Structure::Xor, n: 400, zip3s: ["900", "902"], naces: ["254", "325"], sizes: [3, 5] },
    Plant { area: 1, structure: Structure::Independent, n: 200, zip3s: ["900", "917"], naces: ["591", "620"], sizes: [1, 2] },
    // KIS copy and independent HTM in the harbor
    Plant { area: 2, structure: Structure::Copy, n: 300, zip3s: ["021", "024"], naces: ["642", "691"], sizes: [1, 7] },
    Plant { area: 2, structure: Structure::Independent, n: 150, zip3s: ["021", "024"], naces: ["211", "265"], sizes: [2, 6] },
    // single-ZIP3 CBSA: knowledge-intensive mix with no geographic variety
    Plant { area: 3, structure: Structure::Independent, n: 200, zip3s: ["016", "016"], naces: ["721", "862"], sizes: [1, 3] },
    // HTM xor in the capital, MHTM copy in the micro area
    Plant { area: 4, structure: Structure::Xor, n: 400, zip3s: ["786", "787"], naces: ["211", "261"], sizes: [4, 7] },
    Plant { area: 5, structure: Structure::Copy, n: 200, zip3s: ["795", "797"], naces: ["281", "292"], sizes: [2, 5] },
];

fn employees_in(rng: &mut SplitMix64, class: usize) -> u64 {
    let class = SizeClass::from_index(class).expect("size class index");
    let upper = class.upper().unwrap_or(class.lower() + 4999);
    class.lower() + rng.below(upper - class.lower() + 1)
}

/// Raw spellings that normalise to the same ZIP / NACE as the canonical ones.
fn spell_zip(rng: &mut SplitMix64, zip5: &str) -> String {
    match rng.below(20) {
        0 => format!("{zip5}-{:04}", rng.below(10_000)),
        1 if zip5.starts_with('0') => zip5.trim_start_matches('0').to_owned(),
        _ => zip5.to_owned(),
    }
}

fn spell_nace(rng: &mut SplitMix64, nace3: &str) -> String {
    match rng.below(6) {
        0 => format!("{}.{}", &nace3[..2], &nace3[2..]),
        1 => format!("{nace3}{}", rng.below(10)),
        _ => nace3.to_owned(),
    }
}

fn pick_year(rng: &mut SplitMix64) -> String {
    const YEARS: [&str; 5] = ["2014", "2015", "2016", "2017", ""];
    YEARS[rng.weighted(&[5, 15, 75, 1, 4])].to_owned()
}

/// The bundled ~10,700-row fixture: three states, six CBSAs (one micro),
/// three CSAs, rural ZIPs without CBSA, planted sector structures, and a
/// sprinkling of rows each cleaning rule must drop.
pub fn fixture_population(seed: u64) -> Population {
    let mut rng = SplitMix64::new(seed);
    let mut concordance = Vec::new();
    for area in &AREAS {
        for zip3 in area.zip3s {
            for suffix in ["01", "02"] {
                let (cbsa_code, cbsa_name, cbsa_type) = area.cbsa.unwrap_or(("", "", ""));
                let (csa_code, csa_name) = area.csa.unwrap_or(("", ""));
                concordance.push(ConcordanceRow {
                    zip5: format!("{zip3}{suffix}"),
                    state: area.state.into(),
                    cbsa_code: cbsa_code.into(),
                    cbsa_name: cbsa_name.into(),
                    cbsa_type: cbsa_type.into(),
                    csa_code: csa_code.into(),
                    csa_name: csa_name.into(),
                });
            }
        }
    }

    let mut rows: Vec<CompanyRow> = Vec::new();
    let mut push = |rng: &mut SplitMix64, zip3: &str, nace3: &str, class: usize, state: &str| {
        let zip5 = format!("{zip3}0{}", 1 + rng.below(2));
        let employees = employees_in(rng, class).to_string();
        rows.push(CompanyRow {
            id: String::new(),
            zip: spell_zip(rng, &zip5),
            nace: spell_nace(rng, nace3),
            employees,
            state: if rng.below(3) == 0 { String::new() } else { state.to_owned() },
            year: pick_year(rng),
            city: format!("City {zip3}"),
        });
    };

    for area in &AREAS {
        let n = if area.cbsa.is_some() { 1200 } else { 300 };
        for _ in 0..n {
            let zip3 = *rng.pick(area.zip3s);
            let nace = *rng.pick(&BASE_NACE);
            let class = rng.weighted(&SIZE_WEIGHTS);
            push(&mut rng, zip3, nace, class, area.state);
        }
    }
    for plant in &PLANTS {
        let state = AREAS[plant.area].state;
        let spec = SynthSpec::new(plant.structure, plant.n, [2, 2, 2], rng.next_u64());
        for tuple in generate(&spec).expect("static plant specs are valid") {
            let [g, t, o] = tuple.cell.map(|v| v as usize);
            push(&mut rng, plant.zip3s[g], plant.naces[t], plant.sizes[o], state);
        }
    }

    // rows for each cleaning rule
    let valid_zip = |rng: &mut SplitMix64| rng.pick(&concordance).zip5.clone();
    let mut messy = |zip: String, nace: &str, employees: &str, state: &str, rng: &mut SplitMix64| {
        rows.push(CompanyRow {
            id: String::new(),
            zip,
            nace: nace.to_owned(),
            employees: employees.to_owned(),
            state: state.to_owned(),
            year: pick_year(rng),
            city: String::new(),
        });
    };
    for _ in 0..40 {
        let zip = valid_zip(&mut rng);
        messy(zip, "", "12", "", &mut rng);
    }
    for _ in 0..15 {
        messy(String::new(), "471", "3", "CA", &mut rng);
    }
    for _ in 0..5 {
        messy("9A043".into(), "471", "3", "CA", &mut rng);
    }
    for _ in 0..12 {
        let zip = valid_zip(&mut rng);
        messy(zip, "561", "", "", &mut rng);
    }
    for _ in 0..4 {
        let zip = valid_zip(&mut rng);
        messy(zip, "561", "n/a", "", &mut rng);
    }
    for _ in 0..10 {
        let nace = *rng.pick(&BASE_NACE);
        let employees = employees_in(&mut rng, 1).to_string();
        messy("99901".into(), nace, &employees, "TX", &mut rng);
    }
    for _ in 0..3 {
        messy("99902".into(), "471", "3", "", &mut rng);
    }

    rng.shuffle(&mut rows);
    for (i, row) in rows.iter_mut().enumerate() {
        row.id = format!("F{:05}", i + 1);
    }
    Population {
        manifest: PopulationManifest {
            generator: GENERATOR.into(),
            seed,
            description: "three states, six CBSAs, three CSAs; planted sector structures; \
                          rows exercising every cleaning rule"
                .into(),
            companies: rows.len(),
            concordance_rows: concordance.len(),
        },
        companies: rows,
        concordance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 1234567, from the reference C implementation
        let mut rng = SplitMix64::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
        assert_eq!(rng.next_u64(), 9817491932198370423);
    }

    #[test]
    fn bounded_draws_stay_in_range() {
        let mut rng = SplitMix64::new(7);
        assert!((0..10_000).all(|_| rng.below(11) < 11));
        assert_eq!(rng.below(1), 0);
    }

    #[test]
    fn xor_n4_is_the_parity_cells() {
        let cells: Vec<[u32; 3]> = generate(&SynthSpec::new(Structure::Xor, 4, [2, 2, 2], 0))
            .unwrap()
            .into_iter()
            .map(|t| t.cell)
            .collect();
        assert_eq!(cells, [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]);
    }

    #[test]
    fn copy_uses_smallest_cardinality() {
        let cells: Vec<[u32; 3]> = generate(&SynthSpec::new(Structure::Copy, 5, [3, 4, 3], 0))
            .unwrap()
            .into_iter()
            .map(|t| t.cell)
            .collect();
        assert_eq!(cells, [[0, 0, 0], [1, 1, 1], [2, 2, 2], [0, 0, 0], [1, 1, 1]]);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            SynthSpec::new(Structure::Independent, 0, [2, 2, 2], 0),
            SynthSpec::new(Structure::Independent, 5, [2, 0, 2], 0),
            SynthSpec::new(Structure::Xor, 4, [1, 2, 2], 0),
            SynthSpec::mixture(vec![]),
            SynthSpec::mixture(vec![
                ("a".into(), SynthSpec::new(Structure::Xor, 4, [2, 2, 2], 0)),
                ("a".into(), SynthSpec::new(Structure::Copy, 4, [2, 2, 2], 0)),
            ]),
            SynthSpec::mixture(vec![(
                "a".into(),
                SynthSpec::mixture(vec![("b".into(), SynthSpec::new(Structure::Copy, 2, [2, 2, 2], 0))]),
            )]),
        ];
        for spec in bad {
            assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn mixture_concatenates_keyed_groups() {
        let spec = SynthSpec::mixture(vec![
            ("x".into(), SynthSpec::new(Structure::Xor, 4, [2, 2, 2], 0)),
            ("c".into(), SynthSpec::new(Structure::Copy, 4, [2, 2, 2], 0)),
        ]);
        let tuples = generate(&spec).unwrap();
        assert_eq!(tuples.len(), 8);
        assert!(tuples[..4].iter().all(|t| t.group == "x"));
        assert!(tuples[4..].iter().all(|t| t.group == "c"));
    }

    #[test]
    fn population_wrapping_is_consistent() {
        let spec = SynthSpec::mixture(vec![
            ("x".into(), SynthSpec::new(Structure::Xor, 8, [2, 2, 2], 0)),
            ("i".into(), SynthSpec::new(Structure::Independent, 30, [3, 5, 11], 9)),
        ]);
        let pop = population_from_tuples(&generate(&spec).unwrap(), 9).unwrap();
        assert_eq!(pop.companies.len(), 38);
        assert_eq!(pop.concordance.len(), 2 * 3);
        let zips: HashSet<&str> = pop.concordance.iter().map(|r| r.zip5.as_str()).collect();
        assert!(pop.companies.iter().all(|c| zips.contains(c.zip.as_str())));
        assert_eq!(pop.companies[0].state, "AA");
        assert_eq!(pop.companies[37].state, "AB");
    }

    #[test]
    fn fixture_is_seed_deterministic() {
        let a = fixture_population(42);
        let b = fixture_population(42);
        assert_eq!(a.companies, b.companies);
        assert_eq!(a.concordance, b.concordance);
        assert_ne!(a.companies, fixture_population(43).companies);
        assert!((10_000..11_000).contains(&a.companies.len()));
    }
}
