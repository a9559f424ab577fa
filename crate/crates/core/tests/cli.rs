use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pcbfeat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcbfeat"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn synth_extract_rank_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"width": 60, "height": 60, "components": 3, "min_size": 10, "max_size": 20}"#;
    fs::write(dir.path().join("spec.json"), spec).unwrap();
    let o = pcbfeat(&["synth", "--out", "data", "--count", "2", "--spec", "spec.json", "--seed", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let run = ["--dataset", "data/dataset.json", "--out", "out", "--ksizes", "10,20", "--seed", "3", "--jobs", "2"];
    let o = pcbfeat(&[&["extract"][..], &run].concat(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/features/board_01_20.csv").exists());

    let o = pcbfeat(&[&["rank"][..], &run].concat(), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("Top 5 features"), "{stdout}");

    let o = pcbfeat(&["report", "--out", "out"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout), stdout);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcbfeat(&["synth", "--out", "data", "--count", "1"], dir.path());
    assert_eq!(code(&o), 0);
    let cfg = r#"{"dataset": "data/dataset.json", "output_dir": "out", "ksizes": [5], "families": ["shape"]}"#;
    fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = pcbfeat(&["extract", "--config", "cfg.json", "--ksizes", "25", "--families", "color,texture"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/features/board_00_25.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("RGB_0_mean,"));
    assert!(header.contains("lbp_entropy"));
    assert!(!header.contains("corner_count"));
    assert!(!dir.path().join("out/features/board_00_5.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // missing dataset: configuration error
    assert_eq!(code(&pcbfeat(&["extract", "--dataset", "nope.json"], dir.path())), 2);
    // invalid family name
    assert_eq!(code(&pcbfeat(&["extract", "--families", "smell"], dir.path())), 2);
    // empty manifest
    fs::write(dir.path().join("empty.json"), r#"{"images": []}"#).unwrap();
    let o = pcbfeat(&["extract", "--dataset", "empty.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no images"));
    // one unreadable image among good ones: partial success
    pcbfeat(&["synth", "--out", "data", "--count", "1"], dir.path());
    fs::write(dir.path().join("data/bad.png"), b"junk").unwrap();
    let manifest = r#"{"images": [
        {"id": "good", "image_path": "board_00.png", "mask_path": "board_00_mask.png"},
        {"id": "bad", "image_path": "bad.png", "mask_path": "board_00_mask.png"}]}"#;
    fs::write(dir.path().join("data/mixed.json"), manifest).unwrap();
    let o = pcbfeat(
        &["extract", "--dataset", "data/mixed.json", "--out", "out", "--ksizes", "25", "--families", "color"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad failed"));
    // report before any rank run
    assert_eq!(code(&pcbfeat(&["report", "--out", "elsewhere"], dir.path())), 2);
}
