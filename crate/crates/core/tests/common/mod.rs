#![allow(dead_code)]

use std::path::PathBuf;

use ffexpand::experiment::{ExperimentConfig, Kind};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn load_config(rel: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(repo_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
    ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn smoke_configs() -> Vec<(Kind, PathBuf)> {
    Kind::ALL
        .iter()
        .map(|&k| (k, repo_path(&format!("configs/smoke/{}.json", k.name()))))
        .collect()
}
