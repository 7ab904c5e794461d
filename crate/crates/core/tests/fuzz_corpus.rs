//! Replays the checked-in fuzz corpus through the parsers with the same
//! invariants the fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use hris_core::config::{parse_methods, parse_values};
use hris_core::{parse_config, SweepVariable};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| {
            fs::read(&p)
                .ok()
                .and_then(|b| String::from_utf8(b).ok())
                .map(|s| (p, s))
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("config") {
        if let Ok(bundle) = parse_config(&text) {
            bundle.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            accepted += 1;
        }
    }
    assert!(accepted >= 1);
}

#[test]
fn values_seeds() {
    for (_, text) in seeds("values") {
        if let Ok(values) = parse_values(&text) {
            assert_eq!(values.len(), text.split(',').count());
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }
}

#[test]
fn methods_seeds() {
    for (_, text) in seeds("methods") {
        if let Ok(methods) = parse_methods(&text) {
            let joined: Vec<&str> = methods.iter().map(|m| m.name()).collect();
            assert_eq!(parse_methods(&joined.join(",")).unwrap(), methods);
        }
    }
}

#[test]
fn sweep_variable_seeds() {
    for (_, text) in seeds("sweep_variable") {
        if let Ok(v) = text.parse::<SweepVariable>() {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
        }
    }
}
