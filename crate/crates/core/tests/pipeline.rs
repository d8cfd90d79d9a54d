use std::path::{Path, PathBuf};

use discspace_core::fixture::sample_panel;
use discspace_core::panel::{read_csv, write_csv};
use discspace_core::pipeline::{compute_outputs, run_pipeline, Manifest, RunConfig, MANIFEST_FILE};
use discspace_core::{ColumnMap, Error};

fn sample_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample.csv")
}

const EXPECTED_FILES: [&str; 14] = [
    "density.csv",
    "figure3.csv",
    "growth.csv",
    "kde.csv",
    "marginal_effects.csv",
    "panel_filtered.csv",
    "projections.csv",
    "proximity.csv",
    "rca.csv",
    "summary.csv",
    "table_4a.csv",
    "table_4b.csv",
    "table_6.csv",
    "table_7.csv",
];

#[test]
fn bundled_fixture_matches_generator() {
    let mut buf = Vec::new();
    write_csv(&sample_panel(), &mut buf).unwrap();
    assert_eq!(std::fs::read(sample_path()).unwrap(), buf);
    let back = read_csv(buf.as_slice(), &ColumnMap::default()).unwrap();
    assert_eq!(back, sample_panel());
}

#[test]
fn run_writes_fourteen_files_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run_pipeline(&RunConfig::new(sample_path(), a.path())).unwrap();
    let mb = run_pipeline(&RunConfig::new(sample_path(), b.path())).unwrap();
    assert_eq!(ma, mb);
    let names: Vec<&str> = ma.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, EXPECTED_FILES);
    for f in &ma.files {
        assert_eq!(std::fs::read(a.path().join(&f.path)).unwrap(), std::fs::read(b.path().join(&f.path)).unwrap());
    }
    let on_disk: Manifest = serde_json::from_slice(&std::fs::read(a.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, ma);
}

#[test]
fn deleting_outputs_and_rerunning_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(sample_path(), dir.path());
    let first = run_pipeline(&cfg).unwrap();
    for f in &first.files {
        std::fs::remove_file(dir.path().join(&f.path)).unwrap();
    }
    std::fs::remove_file(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(run_pipeline(&cfg).unwrap(), first);
}

#[test]
fn renaming_a_discipline_only_touches_discipline_keyed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let renamed = dir.path().join("renamed.csv");
    let text = std::fs::read_to_string(sample_path()).unwrap();
    // D3 -> D3x keeps the catalog order
    std::fs::write(&renamed, text.replace(",D3,", ",D3x,")).unwrap();

    let base = compute_outputs(&RunConfig::new(sample_path(), dir.path())).unwrap();
    let other = compute_outputs(&RunConfig::new(&renamed, dir.path())).unwrap();
    assert_eq!(base.keys().collect::<Vec<_>>(), other.keys().collect::<Vec<_>>());
    for (name, bytes) in &base {
        let text = String::from_utf8(bytes.clone()).unwrap();
        let relabeled = rename_field(&text, "D3", "D3x");
        let keyed = relabeled != text;
        assert_eq!(bytes != &other[name], keyed, "{name}");
        assert_eq!(relabeled.as_bytes(), &other[name][..], "{name}");
    }
}

fn rename_field(text: &str, from: &str, to: &str) -> String {
    text.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').map(|f| if f == from { to } else { f }).collect();
            fields.join(",") + "\n"
        })
        .collect()
}

#[test]
fn year_outside_range_fails_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cfg = RunConfig::new(sample_path(), &out);
    cfg.reference_year = 2030;
    match run_pipeline(&cfg) {
        Err(Error::Stage { stage, source }) => {
            assert_eq!(stage, "validate");
            assert!(matches!(*source, Error::YearOutOfRange { year: 2030, .. }));
        }
        other => panic!("{other:?}"),
    }
    assert!(!out.exists());
}

#[test]
fn stage_errors_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "country,discipline,year,documents,citations\nA,x,2019,10,1\nA,x,2019,11,2\n").unwrap();
    let err = run_pipeline(&RunConfig::new(&bad, dir.path().join("out"))).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "ingest", .. }));
    assert!(err.to_string().contains("rows 2 and 3"), "{err}");
}

#[test]
fn failed_write_leaves_no_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    // a directory squatting on a late output name makes that write fail
    std::fs::create_dir(out.join("table_7.csv")).unwrap();
    assert!(run_pipeline(&RunConfig::new(sample_path(), &out)).is_err());
    let left: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("table_7.csv")]);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = RunConfig::new(sample_path(), "out");
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
    assert!(serde_json::from_str::<RunConfig>(r#"{"input_path":"x","bogus":1}"#).is_err());
}
