use std::path::PathBuf;

use ofdm_cvqkd::output::emit_to_files;
use ofdm_cvqkd::pipeline::run_study;
use ofdm_cvqkd::SweepSpec;

fn preset_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

#[test]
fn every_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(preset_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    assert_eq!(paths.len(), 11);
    for p in paths {
        let mut spec = SweepSpec::from_path(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        assert!(spec.output.path.is_some(), "{name} has no output path");
        let out = dir.path().join(format!("{name}.csv"));
        spec.output.path = Some(out.clone());
        let study = run_study(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!study.is_empty(), "{name}");
        let (data, manifest) = emit_to_files("sweep", &spec, &study, &out).unwrap();
        assert!(std::fs::metadata(data).unwrap().len() > 0);
        assert!(std::fs::metadata(manifest).unwrap().len() > 0);
    }
}
