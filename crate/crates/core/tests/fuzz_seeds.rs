//! Runs the checked-in fuzz corpus seeds through the same entry points as
//! the fuzz targets, so regressions show up without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use sgdg::experiments::config::parse_config;
use sgdg::experiments::table::{profile_from_csv, table_from_csv, table_from_json, table_to_csv, table_to_json};
use sgdg::experiments::RunConfig;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let bytes = fs::read(&path).unwrap();
            (name, String::from_utf8(bytes).expect("seeds are UTF-8"))
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    for (name, text) in seeds("fuzz_config") {
        let parsed = parse_config(&text);
        let cfg = RunConfig::from_config_str(&text, Some("advection"));
        match name.as_str() {
            "seed_invalid" => assert!(cfg.is_err(), "{name}"),
            _ => {
                assert!(parsed.is_ok(), "{name}");
                cfg.unwrap_or_else(|e| panic!("{name}: {e}")).validate().unwrap();
            }
        }
    }
}

#[test]
fn table_csv_seeds() {
    for (name, text) in seeds("fuzz_table_csv") {
        let rows = table_from_csv(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let back = table_from_csv(&table_to_csv(&rows).unwrap()).unwrap();
        assert_eq!(back, rows, "{name}");
        if name == "seed_two_levels" {
            assert_eq!(rows.len(), 2);
            assert!(rows[1].eoc_error.is_some());
        }
    }
}

#[test]
fn table_json_seeds() {
    for (name, text) in seeds("fuzz_table_json") {
        let rows = table_from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(table_from_json(&table_to_json(&rows).unwrap()).unwrap(), rows, "{name}");
    }
}

#[test]
fn profile_seeds() {
    for (name, text) in seeds("fuzz_profile_csv") {
        let profile = profile_from_csv(&text);
        match name.as_str() {
            "seed_bad_header" => assert!(profile.is_err(), "{name}"),
            "seed_header_only" => assert!(profile.unwrap().x.is_empty()),
            _ => assert!(!profile.unwrap_or_else(|e| panic!("{name}: {e}")).x.is_empty(), "{name}"),
        }
    }
}

#[test]
fn garbage_is_rejected_without_panicking() {
    for text in ["", "\u{0}\u{1}", "level,M\n1", "[{\"level\": -1}]", "x,mode0,R_st_density,R_stoch_density\n1,2,3\n"] {
        let _ = parse_config(text);
        let _ = table_from_csv(text);
        let _ = table_from_json(text);
        let _ = profile_from_csv(text);
    }
}
