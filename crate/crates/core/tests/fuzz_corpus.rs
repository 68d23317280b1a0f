//! Replays the checked-in fuzz seeds through every parser on stable.

use std::fs;
use std::path::PathBuf;

use cfran::association::EduAssociation;
use cfran::deployment::Partition;
use cfran::scenario::{validate_config, ScenarioConfig};
use cfran::transceiver::{QuantizerBits, Scheme};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.display().to_string(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("config_toml") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        if let Ok(cfg) = ScenarioConfig::from_toml_str(text) {
            let _ = validate_config(&cfg);
            let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(again.to_toml_string(), cfg.to_toml_string(), "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn partition_json_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("partition_json") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        if let Ok(p) = Partition::from_json(text) {
            assert_eq!(Partition::from_json(&p.to_json()).unwrap(), p, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn partition_csv_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("partition_csv") {
        if let Ok(p) = Partition::from_csv(data.as_slice()) {
            assert_eq!(Partition::from_csv(p.to_csv().as_bytes()).unwrap(), p, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn association_csv_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("association_csv") {
        let Some((&shape, body)) = data.split_first() else { continue };
        let num_ue = usize::from(shape & 0x0f) + 1;
        let num_edu = usize::from(shape >> 4) + 1;
        if let Ok(a) = EduAssociation::from_csv(body, num_ue, num_edu) {
            let again = EduAssociation::from_csv(a.to_csv().as_bytes(), num_ue, num_edu).unwrap();
            assert_eq!(again, a, "{name}");
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn scheme_and_bits_seeds() {
    for (name, data) in seeds("scheme_list") {
        let text = String::from_utf8_lossy(&data);
        if let Ok(list) = Scheme::parse_list(&text) {
            let tags: Vec<&str> = list.iter().map(|s| s.tag()).collect();
            assert_eq!(Scheme::parse_list(&tags.join(",")).unwrap(), list, "{name}");
        }
    }
    let accepted = seeds("quant_bits")
        .into_iter()
        .filter(|(_, d)| String::from_utf8_lossy(d).parse::<QuantizerBits>().is_ok())
        .count();
    assert!(accepted >= 2);
}
