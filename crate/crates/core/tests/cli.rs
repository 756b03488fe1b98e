mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{corpus_dir, write_config};

fn gen_outage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gen-outage"))
        .args(args)
        .env_remove(gen_outage::pipeline::TOKEN_ENV)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn config_arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn stages_run_one_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &corpus_dir().join("cache"));
    for stage in ["fetch", "ingest", "fleet", "model", "simulate", "stats"] {
        let out = gen_outage(&[stage, "--config", config_arg(&cfg), "--zone", "GB"]);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = gen_outage(&["plot-data", "--config", config_arg(&cfg), "--zone", "GB", "--kind", "histogram"]);
    assert!(out.status.success());
    assert!(dir.path().join("out/plots/GB_histogram.csv").is_file());
    let stats = std::fs::read_to_string(dir.path().join("out/stats.csv")).unwrap();
    assert!(stats.starts_with("zone,channel,mean_mw,iqr_mw,recon_error,acf_1,acf_6,acf_24,acf_168\nGB,forced,"));
}

#[test]
fn run_reports_artifact_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &corpus_dir().join("cache"));
    let out = gen_outage(&["run", "--config", config_arg(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("25 artifacts"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &corpus_dir().join("cache"));

    let out = gen_outage(&["plot-data", "--config", config_arg(&cfg), "--kind", "pie"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pie"));

    let out = gen_outage(&["stats", "--config", config_arg(&cfg), "--season", "16-17"]);
    assert_eq!(out.status.code(), Some(2));

    let out = gen_outage(&["stats", "--config", config_arg(&cfg), "--zone", "ZZ"]);
    assert_eq!(out.status.code(), Some(2));

    let out = gen_outage(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // later stage before its inputs exist
    let out = gen_outage(&["stats", "--config", config_arg(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run the earlier stages first"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "zones = [\n").unwrap();
    let out = gen_outage(&["ingest", "--config", config_arg(&bad)]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn cold_cache_without_token_fails_with_auth_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &dir.path().join("empty-cache"));
    let out = gen_outage(&["fetch", "--config", config_arg(&cfg), "--zone", "GB"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(gen_outage::pipeline::TOKEN_ENV), "{err}");
}

#[test]
fn corrupt_cache_entry_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    copy_dir(&corpus_dir().join("cache"), &cache);
    let victim = cache.join("GB/A80/2021-02-03.xml");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes.extend_from_slice(b"<!-- tampered -->");
    std::fs::write(&victim, bytes).unwrap();
    let cfg = write_config(dir.path(), &cache);
    let out = gen_outage(&["fetch", "--config", config_arg(&cfg), "--zone", "GB"]);
    assert_eq!(out.status.code(), Some(7), "{}", String::from_utf8_lossy(&out.stderr));
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let target = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &target);
        } else {
            std::fs::copy(&p, &target).unwrap();
        }
    }
}
