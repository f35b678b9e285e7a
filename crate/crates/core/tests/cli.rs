use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kgatnet(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kgatnet"));
    cmd.args(args).env("RUST_LOG", "warn");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn fixture_dir() -> (tempfile::TempDir, PathBuf) {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let dir = tempfile::tempdir().unwrap();
    for f in ["corpus.csv", "labels.csv", "triples.nt", "gazetteer.txt", "config.toml"] {
        fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    let config = dir.path().join("config.toml");
    (dir, config)
}

#[test]
fn missing_or_invalid_config_exits_2() {
    assert_eq!(kgatnet(&["preprocess"], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "corpus = \"c.csv\"\ntriple_source = \"dump:t.nt\"\nheads = 0\n").unwrap();
    assert_eq!(kgatnet(&["preprocess"], Some(&bad)).status.code(), Some(2));
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(kgatnet(&["preprocess"], Some(&bad)).status.code(), Some(2));
}

#[test]
fn stage_without_its_inputs_exits_3() {
    let (_dir, config) = fixture_dir();
    let out = kgatnet(&["train"], Some(&config));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing stage input"));
    assert_eq!(kgatnet(&["build"], Some(&config)).status.code(), Some(3));
}

#[test]
fn unreachable_endpoint_exits_4() {
    let (_dir, config) = fixture_dir();
    let text = fs::read_to_string(&config).unwrap().replace(
        "triple_source = \"dump:triples.nt\"",
        "triple_source = \"endpoint:http://127.0.0.1:9/sparql\"\nendpoint_retries = 0\nendpoint_timeout_secs = 2",
    );
    fs::write(&config, text).unwrap();
    assert_eq!(kgatnet(&["preprocess"], Some(&config)).status.code(), Some(0));
    assert_eq!(kgatnet(&["build"], Some(&config)).status.code(), Some(4));
}

#[test]
fn stages_chain_and_preprocess_rerun_is_a_no_op() {
    let (dir, config) = fixture_dir();
    assert!(kgatnet(&["preprocess"], Some(&config)).status.success());
    let concepts = dir.path().join("out/preprocess/doc01.concepts");
    let before = fs::metadata(&concepts).unwrap().modified().unwrap();
    let text = fs::read_to_string(&concepts).unwrap();
    assert!(!text.trim().is_empty());

    assert!(kgatnet(&["preprocess"], Some(&config)).status.success());
    assert_eq!(fs::metadata(&concepts).unwrap().modified().unwrap(), before);
    assert!(kgatnet(&["preprocess", "--force"], Some(&config)).status.success());
    assert_eq!(fs::read_to_string(&concepts).unwrap(), text);

    assert!(kgatnet(&["build"], Some(&config)).status.success());
    assert!(kgatnet(&["aggregate"], Some(&config)).status.success());
    let graph = fs::read_to_string(dir.path().join("out/aggregate/graph.txt")).unwrap();
    assert!(graph.contains("doc30"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "kgatnet");
}
