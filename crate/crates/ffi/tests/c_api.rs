use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pcbfeat_ffi::*;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/pcbfeat.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 20, "{exports:?}");
    for name in exports {
        let declared = [" ", "*"].iter().any(|p| header.contains(&format!("{p}{name}(")));
        assert!(declared, "{name} missing from header");
    }
    for opaque in ["PcbConfig", "PcbImage", "PcbMask", "PcbFeatureMatrix"] {
        assert!(header.contains(&format!("typedef struct {opaque} {opaque};")));
    }
    assert!(header.contains("PCB_STATUS_PARTIAL = 1"));
}

fn c(s: &Path) -> CString {
    CString::new(s.to_str().unwrap()).unwrap()
}

#[test]
fn pipeline_through_the_c_api() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    unsafe {
        assert_eq!(pcb_synth(c(&data).as_ptr(), 2, 5), PcbStatus::Ok);
        let mut cfg = ptr::null_mut();
        let json = CString::new(r#"{"families": ["color"], "forest": {"n_trees": 10}}"#).unwrap();
        assert_eq!(pcb_config_from_json(json.as_ptr(), &mut cfg), PcbStatus::Ok);
        assert_eq!(pcb_config_set_dataset(cfg, c(&data.join("dataset.json")).as_ptr()), PcbStatus::Ok);
        assert_eq!(pcb_config_set_output_dir(cfg, c(&out).as_ptr()), PcbStatus::Ok);
        assert_eq!(pcb_config_set_ksizes(cfg, [20usize, 25].as_ptr(), 2), PcbStatus::Ok);
        assert_eq!(pcb_config_set_seed(cfg, 9), PcbStatus::Ok);
        assert_eq!(pcb_config_set_jobs(cfg, 2), PcbStatus::Ok);

        let mut failed = usize::MAX;
        assert_eq!(pcb_extract(cfg, &mut failed), PcbStatus::Ok);
        assert_eq!(failed, 0);
        assert_eq!(pcb_rank(cfg, &mut failed), PcbStatus::Ok);
        assert!(out.join("top_features.json").exists());

        let mut report = ptr::null_mut();
        assert_eq!(pcb_report(c(&out).as_ptr(), &mut report), PcbStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_string();
        pcb_string_free(report);
        assert!(text.starts_with("Top 5 features"));

        let mut img = ptr::null_mut();
        assert_eq!(pcb_image_load(c(&data.join("board_00.png")).as_ptr(), &mut img), PcbStatus::Ok);
        let mut msk = ptr::null_mut();
        assert_eq!(pcb_mask_load(c(&data.join("board_00_mask.png")).as_ptr(), &mut msk), PcbStatus::Ok);
        let mut m = ptr::null_mut();
        assert_eq!(pcb_features_extract(cfg, img, msk, 25, &mut m), PcbStatus::Ok);
        assert_eq!(pcb_features_rows(m), 64);
        pcb_features_free(m);
        pcb_mask_free(msk);
        pcb_image_free(img);

        let missing = dir.path().join("none.json");
        assert_eq!(pcb_config_set_dataset(cfg, c(&missing).as_ptr()), PcbStatus::Ok);
        assert_ne!(pcb_extract(cfg, ptr::null_mut()), PcbStatus::Ok);
        assert!(!pcb_last_error().is_null());
        pcb_config_free(cfg);
    }
}

/// Compiles the C example against the static library when a C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libpcbfeat_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no static library at {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(crate_dir().join("examples/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rows 9 cols 125"), "{stdout}");
}
