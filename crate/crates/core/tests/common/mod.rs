#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gen_outage::pipeline::{HttpResponse, PipelineConfig, Transport};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/corpus")
}

/// The bundled corpus configuration, writing into `out`.
pub fn corpus_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&corpus_dir().join("config.toml")).expect("corpus config");
    cfg.output_dir = out.to_path_buf();
    cfg
}

/// Writes a copy of the corpus configuration with absolute paths into `dir`,
/// reading from `cache` and writing to `dir/out`.
pub fn write_config(dir: &Path, cache: &Path) -> PathBuf {
    let corpus = corpus_dir();
    let text = std::fs::read_to_string(corpus.join("config.toml")).unwrap();
    let abs = |name: &str| format!("{:?}", corpus.join(name).to_str().unwrap());
    let text = text
        .replace("\"cache\"", &format!("{:?}", cache.to_str().unwrap()))
        .replace("\"out\"", &format!("{:?}", dir.join("out").to_str().unwrap()))
        .replace("\"unit_sizes.csv\"", &abs("unit_sizes.csv"))
        .replace("\"installed_capacity.csv\"", &abs("installed_capacity.csv"))
        .replace("\"nominal_registry.csv\"", &abs("nominal_registry.csv"));
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Fails every request; the corpus cache is complete so none should be made.
pub struct Offline;

impl Transport for Offline {
    fn get(&self, url: &str, _query: &[(&str, String)]) -> Result<HttpResponse, String> {
        Err(format!("unexpected request to {url}"))
    }
}

/// Every file under `root` with its bytes, sorted by relative path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
