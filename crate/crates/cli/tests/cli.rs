use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/dataset")
}

fn urbanlens(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urbanlens"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn report_succeeds_and_writes_manifest() {
    let out = tempfile::tempdir().unwrap();
    let o = urbanlens(&["report", fixture().to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.path().join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() > 10);
    for f in files {
        assert!(out.path().join(f["path"].as_str().unwrap()).is_file());
    }
    assert!(stdout(&o).contains("KS (photos)"));
}

#[test]
fn same_seed_gives_identical_manifests() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let root = fixture();
    let args = ["report", root.to_str().unwrap(), "--seed", "7"];
    assert_eq!(urbanlens(&args, a.path()).status.code(), Some(0));
    assert_eq!(urbanlens(&args, b.path()).status.code(), Some(0));
    assert_eq!(
        fs::read(a.path().join("manifest.json")).unwrap(),
        fs::read(b.path().join("manifest.json")).unwrap()
    );
}

#[test]
fn every_subcommand_runs_on_the_fixture() {
    let root = fixture();
    let r = root.to_str().unwrap();
    let photo = root.join("bund/photos/p1.png");
    let reviews = root.join("yuyuan/reviews.jsonl");
    let cases: Vec<Vec<&str>> = vec![
        vec!["palette", photo.to_str().unwrap(), "--k", "3"],
        vec!["histogram", photo.to_str().unwrap()],
        vec!["ks-matrix", r],
        vec!["segstats", r],
        vec!["facade-compare", r],
        vec!["sentiment", reviews.to_str().unwrap()],
    ];
    for args in cases {
        let out = tempfile::tempdir().unwrap();
        let o = urbanlens(&args, out.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.path().join("manifest.json").is_file(), "{args:?}");
    }
}

#[test]
fn palette_prints_one_line_per_image() {
    let out = tempfile::tempdir().unwrap();
    let root = fixture();
    let p1 = root.join("bund/photos/p1.png");
    let p2 = root.join("bund/photos/p2.png");
    let o = urbanlens(
        &["palette", p1.to_str().unwrap(), p2.to_str().unwrap(), "--k", "2"],
        out.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("p1.png: #")));
    assert!(text.lines().any(|l| l.starts_with("p2.png: #")));
}

#[test]
fn skipped_inputs_exit_with_two() {
    let data = tempfile::tempdir().unwrap();
    copy_dir(&fixture(), data.path());
    fs::write(data.path().join("bund/photos/readme.txt"), "not an image").unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = urbanlens(&["report", data.path().to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let warnings = fs::read_to_string(out.path().join("warnings.json")).unwrap();
    assert!(warnings.contains("readme.txt"));
}

#[test]
fn missing_root_exits_with_one() {
    let out = tempfile::tempdir().unwrap();
    let o = urbanlens(&["report", "/nonexistent/dataset"], out.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"k": 5, "colour_space": "lab"}"#).unwrap();
    let o = urbanlens(
        &["report", fixture().to_str().unwrap(), "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(1));

    let o = urbanlens(
        &["report", fixture().to_str().unwrap(), "--config", "/nonexistent.json"],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_selects_analyses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"analyses": {"palette": true, "histogram": false, "ks": false, "segstat": false, "facade": false, "sentiment": false}, "k": 2}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = urbanlens(
        &["report", fixture().to_str().unwrap(), "--config", cfg.to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("palettes.csv").is_file());
    assert!(!out.join("ks_matrix.json").exists());
    assert!(!out.join("sentiment_scores.csv").exists());
}
