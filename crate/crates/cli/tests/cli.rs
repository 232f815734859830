use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limitlab"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Subcommand words for each demo config.
const DEMOS: &[(&str, &[&str])] = &[
    ("group", &["group"]),
    ("limitset", &["limitset"]),
    ("delta", &["delta"]),
    ("delta_torus", &["delta"]),
    ("psmeasure", &["psmeasure"]),
    ("kms", &["kms"]),
    ("cantor", &["kcycle", "cantor"]),
    ("circle", &["kcycle", "circle"]),
    ("sphere", &["kcycle", "sphere"]),
    ("summability", &["summability"]),
    ("summability_constant", &["summability"]),
    ("conjugacy", &["conjugacy"]),
];

fn run_demo(name: &str, sub: &[&str], out: &Path, extra: &[&str]) -> Vec<(String, Vec<u8>)> {
    let cfg = configs().join(format!("{name}.json"));
    let mut args: Vec<&str> = sub.to_vec();
    let cfg_s = cfg.to_str().unwrap();
    let out_s = out.to_str().unwrap();
    args.extend(["--config", cfg_s, "--out", out_s]);
    args.extend(extra);
    let o = run(&args);
    assert!(o.status.success(), "{name}: {}", stderr(&o));
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bare_invocation_prints_usage() {
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(2));
    let text = stderr(&o) + &String::from_utf8_lossy(&o.stdout);
    for sub in ["group", "limitset", "delta", "psmeasure", "kms", "kcycle", "summability", "conjugacy"] {
        assert!(text.contains(sub), "usage lacks {sub}: {text}");
    }
}

#[test]
fn unknown_subcommand_is_named() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"));
    let o = run(&["kcycle", "torus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("torus"));
}

#[test]
fn version_is_semver() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    let v = String::from_utf8_lossy(&o.stdout);
    let ver = v.trim().rsplit(' ').next().unwrap();
    let parts: Vec<&str> = ver.split('.').collect();
    assert_eq!(parts.len(), 3, "{v}");
    assert!(parts.iter().all(|p| p.parse::<u64>().is_ok()), "{v}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{\"experiment\": \"x\",\n\"params\": {\"cutof\": 8}}");
    let o = run(&["kcycle", "circle", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("cutof") && e.contains("line 2"), "{e}");
}

#[test]
fn random_sampling_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("kms.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("seed");
    let cfg = write_config(dir.path(), "c.json", &v.to_string());
    let o = run(&["kms", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn divergent_exponent_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("psmeasure.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["params"]["epsilon"] = serde_json::json!(-0.1);
    let cfg = write_config(dir.path(), "c.json", &v.to_string());
    let o = run(&["psmeasure", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("delta_hat"));
}

#[test]
fn constant_symbol_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_demo("summability_constant", &["summability"], dir.path(), &[]);
    let json = &files.iter().find(|(n, _)| n == "summability.json").unwrap().1;
    let v: serde_json::Value = serde_json::from_slice(json).unwrap();
    let flags = v["report"]["flags"].as_array().unwrap();
    assert!(flags.iter().any(|f| f == "commutator ≡ 0"));
    assert_eq!(v["report"]["p_schatten"].as_f64(), Some(0.0));
    let csv = String::from_utf8_lossy(&files.iter().find(|(n, _)| n == "summability.csv").unwrap().1).into_owned();
    assert!(csv.lines().any(|l| l == "N,p,schatten_norm,jw_integral,flags"));
}

#[test]
fn limitset_writes_cloud_and_raster() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_demo("limitset", &["limitset"], dir.path(), &[]);
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"limitset.csv") && names.contains(&"limitset.pgm"));
    let pgm = &files.iter().find(|(n, _)| n == "limitset.pgm").unwrap().1;
    assert!(pgm.starts_with(b"P5\n# tool: limitlab "));
    let text = String::from_utf8_lossy(pgm);
    let dims = text.lines().find(|l| !l.starts_with('#') && *l != "P5").unwrap();
    assert_eq!(dims, "256 256");
    assert!(pgm.ends_with(&[255]) || pgm.len() > 256 * 256);
    for (name, bytes) in &files {
        if name.ends_with(".json") {
            let v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
            assert!(v["metadata"]["tool"].as_str().unwrap().starts_with("limitlab 0.1.0"), "{name} lacks metadata");
            assert!(v["metadata"]["config_sha256"].is_string(), "{name} lacks metadata");
        } else {
            let head = String::from_utf8_lossy(&bytes[..bytes.len().min(400)]).into_owned();
            assert!(head.contains("limitlab 0.1.0") && head.contains("config_sha256"), "{name} lacks metadata");
        }
    }
}

#[test]
fn demo_reruns_are_byte_identical() {
    for (name, sub) in DEMOS {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_demo(name, sub, a.path(), &[]);
        let second = run_demo(name, sub, b.path(), &["--workers", "2"]);
        assert!(!first.is_empty());
        assert_eq!(first.len(), second.len(), "{name}");
        for ((na, ba), (nb, bb)) in first.iter().zip(&second) {
            assert_eq!(na, nb);
            assert!(ba == bb, "{name}/{na} differs between runs");
        }
    }
}
