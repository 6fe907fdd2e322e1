mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ffexpand::experiment::report_from_json;

fn ffexpand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffexpand"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn files_in(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn run_smoke(kind: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![kind, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = ffexpand(&args);
    assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn reruns_are_byte_identical() {
    for (kind, config) in common::smoke_configs() {
        // the report echoes the output directory, so both runs use the same one
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        run_smoke(kind.name(), &config, &out, &["--format", "both"]);
        let fa = files_in(&out);
        fs::remove_dir_all(&out).unwrap();
        run_smoke(kind.name(), &config, &out, &["--format", "both"]);
        let fb = files_in(&out);
        assert!(fa.len() >= 2, "{}", kind.name());
        assert_eq!(fa, fb, "{}", kind.name());
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let config = common::repo_path("configs/smoke/expander.json");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_smoke("expander", &config, &out, &["--format", "both"]);
    let first = files_in(&out);
    fs::remove_dir_all(&out).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ffexpand"))
        .args(["expander", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--format", "both"])
        .env("FFEXPAND_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(first, files_in(&out));
}

#[test]
fn csv_headers_match_golden() {
    let out = tempfile::tempdir().unwrap();
    for (kind, config) in common::smoke_configs() {
        run_smoke(kind.name(), &config, out.path(), &["--format", "csv"]);
    }
    let mut lines: Vec<String> = files_in(out.path())
        .into_iter()
        .map(|(name, bytes)| {
            let text = String::from_utf8(bytes).unwrap();
            assert!(!text.contains('\r'), "{name} has CR line endings");
            let header = text.lines().next().unwrap().to_string();
            format!("{}: {header}", name.trim_end_matches(".csv"))
        })
        .collect();
    lines.sort();
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/csv_headers.txt")).unwrap();
    assert_eq!(lines.join("\n") + "\n", golden);
}

#[test]
fn seed_flag_overrides_config() {
    let config = common::repo_path("configs/smoke/expander.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_smoke("expander", &config, a.path(), &[]);
    run_smoke("expander", &config, b.path(), &["--seed", "99"]);
    let name = "expander_samples.csv";
    assert_ne!(files_in(a.path())[name], files_in(b.path())[name]);
}

#[test]
fn json_to_stdout_decodes() {
    let o = ffexpand(&["multtable", "--out", "-"]);
    assert!(o.status.success());
    let rep = report_from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(rep.section("table").unwrap().rows.len(), 64);
    assert!(o.stderr.is_empty(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let empty = write("empty.json", r#"{"kind": "weil", "primes": []}"#);
    let o = ffexpand(&["weil", "--config", &empty]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("primes"));

    let unknown = write("unknown.json", r#"{"kind": "weil", "primes": [11], "extra": true}"#);
    assert_eq!(ffexpand(&["weil", "--config", &unknown]).status.code(), Some(2));

    let wrong_kind = write("kind.json", r#"{"kind": "weil", "primes": [11]}"#);
    assert_eq!(ffexpand(&["sarkozy", "--config", &wrong_kind]).status.code(), Some(2));

    assert_eq!(ffexpand(&["weil", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));

    let huge = write(
        "huge.json",
        r#"{"kind": "extractor", "primes": [10007], "alphas": [1.0]}"#,
    );
    let out = dir.path().join("out");
    let o = ffexpand(&["extractor", "--config", &huge, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}
