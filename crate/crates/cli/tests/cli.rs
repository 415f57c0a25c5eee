use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use vidsource::synth::{class_recipes, generate, SyntheticSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vidsource"));
    c.env_remove("VIDSOURCE_MODEL");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let o = run(args, dir);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn synth(dir: &Path, classes: usize, samples: usize, extra: &[&str]) -> PathBuf {
    let c = classes.to_string();
    let s = samples.to_string();
    let mut args = vec!["synth", "--out", "corpus", "--classes", &c, "--samples", &s];
    args.extend_from_slice(extra);
    ok(&args, dir);
    dir.join("corpus/manifest.jsonl")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/h264").join(name)
}

#[test]
fn synth_writes_parseable_corpus() {
    let d = TempDir::new().unwrap();
    let m = synth(d.path(), 3, 10, &[]);
    let lines = fs::read_to_string(&m).unwrap();
    assert_eq!(lines.lines().count(), 30);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let p = d.path().join("corpus").join(v["path"].as_str().unwrap());
        ok(&["inspect", "--tree", p.to_str().unwrap()], d.path());
    }
}

#[test]
fn synth_and_train_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        synth(d.path(), 4, 6, &["--seed", "9"]);
        ok(&["train", "corpus/manifest.jsonl", "--model", "m.json"], d.path());
    }
    let f = "corpus/BrandA_M01/BrandA_M01_003.mp4";
    assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    assert_eq!(fs::read(a.path().join("m.json")).unwrap(), fs::read(b.path().join("m.json")).unwrap());
}

#[test]
fn flat_representation_trains_flat_model() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 3, 5, &[]);
    let out = ok(&["train", "corpus/manifest.jsonl", "--model", "m.json", "--representation", "flat"], d.path());
    assert!(out.contains("trained flat model"));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(m["representation"], "Flat");
    assert!(m["model"]["Flat"].is_object());
}

/// First file of each class with its structure hash.
fn class_hashes(dir: &Path) -> Vec<(String, String, String)> {
    let manifest = fs::read_to_string(dir.join("corpus/manifest.jsonl")).unwrap();
    let mut out: Vec<(String, String, String)> = Vec::new();
    for line in manifest.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let label = v["label"].as_str().unwrap().to_owned();
        if out.iter().any(|(l, _, _)| *l == label) {
            continue;
        }
        let path = format!("corpus/{}", v["path"].as_str().unwrap());
        let sig = ok(&["inspect", "--signature", "--json", &path], dir);
        let sig: serde_json::Value = serde_json::from_str(&sig).unwrap();
        out.push((label, path, sig["signature"]["hash"].as_str().unwrap().to_owned()));
    }
    out
}

#[test]
fn predict_routes_and_reports_errors() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 12, 4, &[]);
    let hashes = class_hashes(d.path());
    let (held_out, unseen, _) = hashes
        .iter()
        .find(|(_, _, h)| hashes.iter().filter(|(_, _, o)| o == h).count() == 1)
        .expect("a class with a unique topology")
        .clone();
    let all = fs::read_to_string(d.path().join("corpus/manifest.jsonl")).unwrap();
    let keep: String =
        all.lines().filter(|l| !l.contains(&format!("\"{held_out}\""))).map(|l| format!("{l}\n")).collect();
    fs::write(d.path().join("corpus/part.jsonl"), keep).unwrap();
    ok(&["train", "corpus/part.jsonl", "--model", "m.json"], d.path());

    let (seen_label, seen, _) = hashes.iter().find(|(l, _, _)| *l != held_out).unwrap();
    let out = bin().args(["predict", seen]).env("VIDSOURCE_MODEL", "m.json").current_dir(d.path()).output().unwrap();
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let cols: Vec<&str> = line.trim().split('\t').collect();
    assert_eq!(cols[1], seen_label);
    assert_eq!(cols[3], "false");

    let out = ok(&["predict", "--model", "m.json", &unseen], d.path());
    let cols: Vec<&str> = out.trim().split('\t').collect();
    assert_eq!(cols[2], "unknown", "{out}");
    assert_eq!(cols[3], "true");

    fs::write(d.path().join("broken.mp4"), b"\0\0\0\x08junk").unwrap();
    let o = run(&["predict", "--model", "m.json", seen, "broken.mp4"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1);
    assert!(String::from_utf8(o.stderr).unwrap().contains("broken.mp4"));
}

#[test]
fn same_metaclass_different_class() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 12, 4, &[]);
    ok(&["train", "corpus/manifest.jsonl", "--model", "m.json"], d.path());
    let hashes = class_hashes(d.path());
    let (a, b) = hashes
        .iter()
        .enumerate()
        .find_map(|(i, x)| hashes[i + 1..].iter().find(|y| y.2 == x.2).map(|y| (x, y)))
        .expect("two classes sharing a topology");
    let out = ok(&["predict", "--model", "m.json", &a.1, &b.1], d.path());
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0][2], rows[1][2]);
    assert_eq!((rows[0][1], rows[1][1]), (a.0.as_str(), b.0.as_str()));
}

#[test]
fn exclusion_mismatch_exits_3() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 3, 4, &[]);
    ok(&["train", "corpus/manifest.jsonl", "--model", "m.json"], d.path());
    let f = "corpus/BrandA_M00/BrandA_M00_000.mp4";
    let o = run(&["predict", "--model", "m.json", "--exclusion-profile", "none", f], d.path());
    assert_eq!(o.status.code(), Some(3));
    fs::write(d.path().join("junk.json"), "{}").unwrap();
    assert_eq!(run(&["predict", "--model", "junk.json", f], d.path()).status.code(), Some(3));
}

#[test]
fn usage_and_input_exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(run(&["bogus"], d.path()).status.code(), Some(1));
    assert_eq!(run(&["evaluate"], d.path()).status.code(), Some(1));
    assert_eq!(run(&["--representation", "nope", "evaluate", "x"], d.path()).status.code(), Some(1));
    fs::write(d.path().join("a.txt"), "RIFF0000AVI LIST").unwrap();
    let o = run(&["inspect", "a.txt"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("not an ISO base media file"));
    assert_eq!(run(&["train", "missing.jsonl", "--model", "m.json"], d.path()).status.code(), Some(2));
    assert_eq!(run(&["--help"], d.path()).status.code(), Some(0));
}

#[test]
fn inspect_views() {
    let d = TempDir::new().unwrap();
    let f = fixture("baseline_720p.mp4");
    let f = f.to_str().unwrap();
    let boxes = ok(&["inspect", f], d.path());
    let top: Vec<&str> = boxes.lines().filter(|l| !l.starts_with(' ')).collect();
    assert!(top.len() >= 3 && top[0].starts_with("ftyp"), "{boxes}");
    let params = ok(&["inspect", "--params", f], d.path());
    assert!(params.contains("pic_width_in_mbs_minus1                  79"));
    let json = ok(&["inspect", "--json", "--tree", "--signature", f], d.path());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["signature"]["hash"].as_str().unwrap().len(), 64);
    assert!(v["tree"]["root"].is_object());

    let spec = SyntheticSpec { classes: 12, samples_per_class: 1, seed: 0, clone_pairs: 0 };
    let no_vui = class_recipes(&spec).iter().position(|r| !r.codec.vui).expect("a recipe without VUI");
    let file = generate(&spec).into_iter().find(|f| f.class == no_vui).unwrap();
    fs::write(d.path().join("novui.mp4"), &file.bytes).unwrap();
    let params = ok(&["inspect", "--params", "novui.mp4"], d.path());
    let vui: Vec<&str> = params.lines().skip_while(|l| *l != "VUI").skip(1).take_while(|l| l.starts_with(' ')).collect();
    assert_eq!(vui.len(), 32);
    assert!(vui.iter().all(|l| l.ends_with("absent")));
}

#[test]
fn evaluate_exports_confusion() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 6, 5, &["--clone-pairs", "1"]);
    let out = ok(
        &["evaluate", "corpus/manifest.jsonl", "--runs", "2", "--confusion", "c.csv", "--report", "r.json", "--seed", "4"],
        d.path(),
    );
    assert!(out.contains("mean balanced accuracy 0.8333"), "{out}");
    let csv = fs::read_to_string(d.path().join("c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("true\\predicted,BrandA_M00"));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["per_run"].as_array().unwrap().len(), 2);
    let again = ok(&["evaluate", "corpus/manifest.jsonl", "--runs", "2", "--seed", "4"], d.path());
    assert_eq!(out, again);
}

#[test]
fn core_params_round_trip() {
    let d = TempDir::new().unwrap();
    synth(d.path(), 6, 5, &[]);
    let out = ok(&["core-params", "extract", "corpus/manifest.jsonl", "-o", "v.csv"], d.path());
    assert!(out.contains("30 vectors"));
    let model_level = ok(&["core-params", "evaluate", "v.csv", "--runs", "2"], d.path());
    assert!(model_level.contains("6 classes") && model_level.contains("mean balanced accuracy 1.0000"), "{model_level}");
    let brand = ok(&["core-params", "evaluate", "v.csv", "--runs", "2", "--brand"], d.path());
    assert!(brand.contains("2 classes (brand level)"), "{brand}");
    let reduced = ok(&["core-params", "evaluate", "v.csv", "--runs", "1", "--drop-user-adjustable"], d.path());
    assert!(reduced.contains("7 columns"));

    ok(&["core-params", "train", "v.csv", "--model", "cp.json"], d.path());
    let pred = ok(&["core-params", "predict", "v.csv", "--model", "cp.json"], d.path());
    assert!(pred.lines().all(|l| {
        let c: Vec<&str> = l.split('\t').collect();
        c[1] == c[2]
    }));

    let text = fs::read_to_string(d.path().join("v.csv")).unwrap();
    fs::write(d.path().join("bad.csv"), format!("{}x,1,2\n", text.lines().next().unwrap().to_owned() + "\n")).unwrap();
    let o = run(&["core-params", "evaluate", "bad.csv"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 2"));
}

#[test]
fn core_vector_from_hex() {
    let d = TempDir::new().unwrap();
    let tree = vidsource::bmff::parse_file(fixture("baseline_720p.mp4")).unwrap();
    let cfg = vidsource::bmff::extract_parameter_set_blobs(&tree).unwrap().remove(0);
    let sps = hex::encode(&cfg.sps[0]);
    let pps = hex::encode(&cfg.pps[0]);
    let out = ok(&["core-params", "vector", "--sps", &sps, "--pps", &pps], d.path());
    assert!(out.contains("pic_width_in_mbs_minus1\t79"));
    assert!(out.ends_with("height\t720\n"));
    let o = run(&["core-params", "vector", "--sps", "zz", "--pps", &pps], d.path());
    assert_eq!(o.status.code(), Some(2));
}
