//! Browser bindings: three small operations over the synergy library, each
//! taking plain strings or numbers and returning a JSON string. Failures come
//! back as `{"error": "..."}` so the page never has to catch exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use synergy_core::decomposition::{DecompositionResult, GroupAccumulator};
use synergy_core::entropy::{entropy_profile, DimPair, EntropyProfile};
use synergy_core::synth::{generate, Structure, SynthSpec};
use synergy_core::table::ContingencyTable3;
use synergy_core::taxonomy::{normalize_nace, size_class, SectorRules};

#[derive(Debug, Serialize)]
pub struct CellsReport {
    pub n: u64,
    pub distinct_cells: usize,
    pub profile: EntropyProfile,
    pub mi_gt: f64,
    pub mi_go: f64,
    pub mi_to: f64,
    pub t_bits: f64,
    pub t_mbits: f64,
}

/// Parses one `g,t,o` row per line (optionally `g,t,o,count`); blank lines
/// and lines starting with `#` are skipped.
pub fn cells_report(text: &str) -> Result<CellsReport, String> {
    let mut table = ContingencyTable3::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let count = match fields.len() {
            3 => 1,
            4 => fields[3]
                .parse()
                .map_err(|_| format!("line {}: count {:?} is not a whole number", i + 1, fields[3]))?,
            k => return Err(format!("line {}: expected 3 or 4 fields, got {k}", i + 1)),
        };
        table.insert_n([fields[0], fields[1], fields[2]], count);
    }
    let profile = entropy_profile(&table).map_err(|e| e.to_string())?;
    let t_bits = profile.synergy_bits();
    Ok(CellsReport {
        n: table.total(),
        distinct_cells: table.counts().len(),
        mi_gt: profile.mutual_info(DimPair::GeoTech),
        mi_go: profile.mutual_info(DimPair::GeoOrg),
        mi_to: profile.mutual_info(DimPair::TechOrg),
        profile,
        t_bits,
        t_mbits: t_bits * 1000.0,
    })
}

/// Pools an XOR group, a copy group and an independent group (any may be
/// empty) and decomposes the pooled synergy over the three groups.
pub fn mixture_report(xor_n: u32, copy_n: u32, independent_n: u32, seed: u64) -> Result<DecompositionResult, String> {
    let mut acc = GroupAccumulator::new("group");
    for (key, structure, n) in [
        ("xor", Structure::Xor, xor_n),
        ("copy", Structure::Copy, copy_n),
        ("independent", Structure::Independent, independent_n),
    ] {
        if n == 0 {
            continue;
        }
        let spec = SynthSpec::new(structure, n as usize, [2, 2, 2], seed);
        for tuple in generate(&spec).map_err(|e| e.to_string())? {
            // each group gets its own geography labels
            let g = format!("{key}-{}", tuple.cell[0]);
            let [t, o] = [tuple.cell[1], tuple.cell[2]].map(|v| v.to_string());
            acc.push_labels(key, [&g, &t, &o]);
        }
    }
    acc.synergy_decomposition().map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Classification {
    pub nace3: String,
    pub sectors: String,
    pub htm: bool,
    pub mhtm: bool,
    pub kis: bool,
    pub htkis: bool,
    pub size_class: usize,
    pub size_label: &'static str,
}

pub fn classification(nace: &str, employees: u64) -> Result<Classification, String> {
    let code = normalize_nace(nace).map_err(|e| e.to_string())?;
    let flags = SectorRules::builtin().classify(&code);
    let size = size_class(employees);
    Ok(Classification {
        nace3: code.as_str().to_owned(),
        sectors: flags.to_string(),
        htm: flags.htm,
        mhtm: flags.mhtm,
        kis: flags.kis,
        htkis: flags.htkis,
        size_class: size.index(),
        size_label: size.label(),
    })
}

fn json<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

#[wasm_bindgen]
pub fn synergy_of_cells(text: &str) -> String {
    json(cells_report(text))
}

#[wasm_bindgen]
pub fn decompose_mixture(xor_n: u32, copy_n: u32, independent_n: u32, seed: u32) -> String {
    json(mixture_report(xor_n, copy_n, independent_n, u64::from(seed)))
}

#[wasm_bindgen]
pub fn classify(nace: &str, employees: u32) -> String {
    json(classification(nace, u64::from(employees)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_cells() {
        let r = cells_report("# parity\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n").unwrap();
        assert_eq!((r.n, r.t_bits), (4, -1.0));
        let weighted = cells_report("a,a,a,3\nb,b,b,3").unwrap();
        assert_eq!(weighted.t_bits, 1.0);
    }

    #[test]
    fn bad_cells() {
        assert!(cells_report("a,b").unwrap_err().contains("line 1"));
        assert!(cells_report("a,b,c,x").is_err());
        assert!(cells_report("").is_err());
        assert!(synergy_of_cells("").starts_with("{\"error\""));
    }

    #[test]
    fn mixture_overshoots() {
        let d = mixture_report(4, 4, 0, 0).unwrap();
        assert_eq!(d.t_total_bits, -0.31127812445913294);
        let xor = d.group("xor").unwrap();
        assert!(xor.percent.unwrap() > 100.0);
        assert!((d.percent_closure().unwrap() - 100.0).abs() < 1e-9);
        assert!(mixture_report(0, 0, 0, 0).is_err());
    }

    #[test]
    fn classifier() {
        let c = classification("30.3", 1000).unwrap();
        assert_eq!((c.nace3.as_str(), c.sectors.as_str(), c.size_label), ("303", "htm", "> 1,000"));
        let c = classification("62", 3).unwrap();
        assert!(c.kis && c.htkis && !c.htm);
        assert!(classify("x", 1).contains("error"));
    }
}
