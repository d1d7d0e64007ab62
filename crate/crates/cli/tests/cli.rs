use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn synergy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synergy"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1704067200")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/synthetic")
        .join(name)
        .display()
        .to_string()
}

fn sample() -> String {
    fixture("golden/sample.csv")
}

fn path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_concordance_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = synergy(&[
        "ingest",
        "--companies",
        &fixture("companies.csv"),
        "--concordance",
        path(&dir, "nope.csv").to_str().unwrap(),
        "--out",
        path(&dir, "s.csv").to_str().unwrap(),
        "--stats",
        path(&dir, "st.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!path(&dir, "s.csv").exists());
}

#[test]
fn empty_companies_file_reports_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = path(&dir, "empty.csv");
    fs::write(&empty, "").unwrap();
    let out = synergy(&[
        "ingest",
        "--companies",
        empty.to_str().unwrap(),
        "--concordance",
        &fixture("concordance.csv"),
        "--out",
        path(&dir, "s.csv").to_str().unwrap(),
        "--stats",
        path(&dir, "st.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty-file"), "{}", stderr(&out));
}

#[test]
fn csa_level_without_csa_assignments_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let no_csa = path(&dir, "sample.csv");
    let text = fs::read_to_string(sample()).unwrap();
    let mut rows = text.lines();
    let mut stripped = format!("{}\n", rows.next().unwrap());
    for row in rows {
        let mut fields: Vec<&str> = row.split(',').collect();
        fields[4] = "";
        stripped.push_str(&fields.join(","));
        stripped.push('\n');
    }
    fs::write(&no_csa, stripped).unwrap();
    let out = synergy(&["compute", "--sample", no_csa.to_str().unwrap(), "--level", "csa"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let ok = synergy(&["compute", "--sample", no_csa.to_str().unwrap(), "--level", "cbsa"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn bad_flags_exit_2() {
    for args in [
        vec!["compute", "--sample", "x.csv", "--level", "county"],
        vec!["compute", "--sample", "x.csv", "--sector", "biotech"],
        vec!["compute", "--sample", "x.csv", "--format", "xml"],
        vec!["tally"],
    ] {
        assert_eq!(synergy(&args).status.code(), Some(2), "{args:?}");
    }
    let out = synergy(&["compute", "--sample", &sample(), "--exclude-nace", "6x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_and_carry_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(&dir, "a.csv");
    let b = path(&dir, "b.csv");
    for target in [&a, &b] {
        let out = synergy(&["compute", "--sample", &sample(), "--level", "cbsa", "--out", target.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(path(&dir, "a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["timestamp"], "2024-01-01T00:00:00Z");
    assert_eq!(manifest["n_by_scale"]["state"], 10660);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"][0]["bytes"], fs::metadata(&a).unwrap().len());

    let stdout = synergy(&["compute", "--sample", &sample(), "--level", "cbsa"]);
    assert_eq!(stdout.stdout, fs::read(&a).unwrap());
}

fn unsigned_zero(s: String) -> String {
    match s.strip_prefix('-') {
        Some(rest) if rest.parse::<f64>() == Ok(0.0) => rest.to_owned(),
        _ => s,
    }
}

#[test]
fn csv_is_the_rounded_json() {
    for args in [vec!["--level", "state"], vec!["--level", "cbsa", "--sector", "htkis"]] {
        let mut csv_args = vec!["compute", "--sample"];
        let s = sample();
        csv_args.push(&s);
        csv_args.extend(&args);
        let csv = String::from_utf8(synergy(&csv_args).stdout).unwrap();
        csv_args.extend(["--format", "json"]);
        let json: serde_json::Value = serde_json::from_slice(&synergy(&csv_args).stdout).unwrap();

        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let groups = json["groups"].as_array().unwrap();
        for (row, g) in rows.iter().zip(groups) {
            assert_eq!(row[0], g["key"].as_str().unwrap());
            assert_eq!(row[2], unsigned_zero(format!("{:.1}", g["t_bits"].as_f64().unwrap() * 1000.0)));
            assert_eq!(row[3], unsigned_zero(format!("{:.2}", g["percent"].as_f64().unwrap())));
        }
        let t0 = rows.iter().find(|r| r[0] == "T0").unwrap();
        assert_eq!(t0[3], format!("{:.2}", json["percent_t0"].as_f64().unwrap()));
        let total = rows.iter().find(|r| r[0] == "TOTAL").unwrap();
        assert_eq!(total[1], json["n"].to_string());
    }
}

#[test]
fn top_folds_remaining_groups() {
    let out = synergy(&["compute", "--sample", &sample(), "--level", "cbsa", "--top", "2"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(keys.len(), 5, "{csv}");
    assert_eq!(&keys[2..], ["OTHER", "T0", "TOTAL"]);
}

#[test]
fn sector_report_has_national_share() {
    let out = synergy(&["compute", "--sample", &sample(), "--level", "state", "--sector", "htm"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("NATIONAL_SHARE,10660,"), "{csv}");
}

#[test]
fn self_correlation_diagonal_is_one() {
    let out = synergy(&["correlate", "--sample", &sample(), "--level", "cbsa", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for method in ["pearson", "spearman"] {
        let m = json["matrix"][method].as_array().unwrap();
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row[i].as_f64(), Some(1.0));
        }
    }
}

#[test]
fn tally_totals_match_stats() {
    let out = synergy(&["tally", "--sample", &sample(), "--level", "state"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().last().unwrap().split(',').nth(1), Some("10660"));
    let stats: serde_json::Value =
        serde_json::from_slice(&fs::read(fixture("golden/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["usable_state"], 10660);
    let dropped: u64 = [
        "parse_skipped",
        "dropped_missing_zip_or_nace",
        "dropped_missing_employees",
        "dropped_unresolved_geography",
        "dropped_by_filter",
    ]
    .iter()
    .map(|k| stats[k].as_u64().unwrap())
    .sum();
    assert_eq!(stats["downloaded"].as_u64().unwrap(), dropped + 10660);
}

#[test]
fn ingest_filters_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = path(&dir, "sample.csv");
    let stats_path = path(&dir, "stats.csv");
    let out = synergy(&[
        "ingest",
        "--companies",
        &fixture("companies.csv"),
        "--concordance",
        &fixture("concordance.csv"),
        "--out",
        out_path.to_str().unwrap(),
        "--stats",
        stats_path.to_str().unwrap(),
        "--year-min",
        "2016",
        "--exclude-nace",
        "4,9",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stats = fs::read_to_string(&stats_path).unwrap();
    let filtered: u64 = stats
        .lines()
        .find_map(|l| l.strip_prefix("dropped_by_filter,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(filtered > 1000, "{stats}");
    let sample = fs::read_to_string(&out_path).unwrap();
    assert!(sample.lines().skip(1).all(|l| {
        let nace = l.split(',').nth(5).unwrap();
        !nace.starts_with('4') && !nace.starts_with('9')
    }));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(path(&dir, "sample.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn sector_rules_override_changes_flags() {
    let dir = tempfile::tempdir().unwrap();
    let rules = path(&dir, "rules.csv");
    fs::write(&rules, "code,flags\n47,kis\n").unwrap();
    let out_path = path(&dir, "sample.csv");
    let out = synergy(&[
        "ingest",
        "--companies",
        &fixture("companies.csv"),
        "--concordance",
        &fixture("concordance.csv"),
        "--sector-rules",
        rules.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--stats",
        path(&dir, "stats.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let sample = fs::read_to_string(&out_path).unwrap();
    let mut seen = 0;
    for l in sample.lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        let kis = f[9] == "1";
        assert_eq!(kis, f[5].starts_with("47"), "{l}");
        seen += usize::from(kis);
    }
    assert!(seen > 0);
}

#[test]
fn synth_mixture_and_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let companies = path(&dir, "c.csv");
    let concordance = path(&dir, "z.csv");
    let out = synergy(&[
        "synth",
        "--group",
        "x=xor:8",
        "--group",
        "c=copy:8",
        "--companies",
        companies.to_str().unwrap(),
        "--concordance",
        concordance.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(path(&dir, "c.csv.manifest.json")).unwrap()).unwrap();
    assert!(manifest["population"]["generator"].as_str().unwrap().starts_with("SplitMix64"));

    let sample = path(&dir, "s.csv");
    let out = synergy(&[
        "ingest",
        "--companies",
        companies.to_str().unwrap(),
        "--concordance",
        concordance.to_str().unwrap(),
        "--out",
        sample.to_str().unwrap(),
        "--stats",
        path(&dir, "st.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = synergy(&["compute", "--sample", sample.to_str().unwrap(), "--level", "state"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("AA,8,-1000.0,"), "{csv}");
    assert!(csv.contains("AB,8,1000.0,"), "{csv}");

    let out = synergy(&["oracle", "--sample", sample.to_str().unwrap(), "--level", "state", "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["max_abs_diff"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn synth_rejects_invalid_specs() {
    let dir = tempfile::tempdir().unwrap();
    let c = path(&dir, "c.csv");
    let z = path(&dir, "z.csv");
    for extra in [vec!["--structure", "xor", "--cards", "1,2,2"], vec!["--n", "0"], vec!["--group", "bad"]] {
        let mut args = vec!["synth", "--companies", c.to_str().unwrap(), "--concordance", z.to_str().unwrap()];
        args.extend(extra.iter());
        assert_eq!(synergy(&args).status.code(), Some(2), "{extra:?}");
    }
}
