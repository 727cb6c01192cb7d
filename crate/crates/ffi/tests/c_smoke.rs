//! Compiles `smoke.c` against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn static_library() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    let mut candidates: Vec<PathBuf> = std::fs::read_dir(deps)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().unwrap_or_default().to_string_lossy();
            name.starts_with("libgsm_threshold_ffi") && name.ends_with(".a")
        })
        .collect();
    candidates.push(deps.parent()?.join("libgsm_threshold_ffi.a"));
    candidates
        .into_iter()
        .filter(|p| p.exists())
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gsm_threshold.h"),
    )
    .unwrap();
    for symbol in [
        "gsm_last_error_message",
        "gsm_bsm_probs",
        "gsm_efficiency",
        "gsm_graphs_new",
        "gsm_graphs_free",
        "gsm_run_batch",
        "typedef struct GsmGraphs GsmGraphs;",
        "#define GSM_ERR_NULL_POINTER 4",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let lib = static_library().expect("static library next to the test binary");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "compile failed");
    let run = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {stdout}",
        run.status.code()
    );
    assert!(stdout.contains("efficiency 0.7247"), "{stdout}");
}
