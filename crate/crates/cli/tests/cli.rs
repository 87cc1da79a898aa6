use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dvlab_cli::{ExperimentConfig, Summary};
use dvlab_core::DirichletSeries;

fn dvlab(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvlab")).args(args).env("DVLAB_CACHE_DIR", cache).output().expect("binary runs")
}

fn read_summary(dir: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn preset_writes_summary_and_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = dvlab(&["exp-compactness", "--out", out.to_str().unwrap()], &tmp.path().join("cache"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS tail_small_e2")), "{stdout}");

    let s = read_summary(&out);
    assert_eq!(s.preset, "exp-compactness");
    assert!(s.passed);
    assert_eq!(s.files, ["compactness_e2.csv", "compactness_mixed.csv"]);
    assert_eq!(s.parameters["N"], 2048);
    assert!(s.assertions.iter().all(|a| a.passed && !a.claim.is_empty()));
    for f in &s.files {
        assert_eq!(header(&out.join(f)), "cut,tail_norm,relative");
    }
    let second = fs::read_to_string(out.join("compactness_e2.csv")).unwrap();
    assert!(second.lines().nth(1).unwrap().starts_with("0,"));
}

#[test]
fn config_file_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let out = tmp.path().join("weights");
    let cfg = serde_json::json!({
        "name": "exp-weights",
        "measure": { "family": "mu_alpha", "alpha": 1.0 },
        "N": 64,
        "seed": 5,
        "output_dir": out,
        "params": { "supermultiplicative_range": 30 }
    });
    let path = tmp.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = dvlab(&["exp-weights", "--config", path.to_str().unwrap()], &cache);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let s = read_summary(&out);
    assert_eq!(s.parameters["N"], 64);
    assert_eq!(s.parameters["supermultiplicative_range"], 30);
    assert_eq!(header(&out.join("weights.csv")), "n,w_n,closed_form");
    assert_eq!(fs::read_to_string(out.join("weights.csv")).unwrap().lines().count(), 65);
    assert_eq!(header(&out.join("dyadic.csv")), "k,w_2^k,w_2^k_power");
    // the weight table is cached under DVLAB_CACHE_DIR
    assert!(fs::read_dir(&cache).unwrap().count() >= 1);
}

#[test]
fn unknown_preset_and_bad_config_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let o = dvlab(&["exp-nothing"], &cache);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));

    let path = tmp.path().join("cfg.json");
    fs::write(&path, r#"{"name": "exp-weights", "bogus": 1}"#).unwrap();
    assert_eq!(dvlab(&["exp-weights", "--config", path.to_str().unwrap()], &cache).status.code(), Some(2));

    fs::write(&path, r#"{"name": "exp-lacunary"}"#).unwrap();
    assert_eq!(dvlab(&["exp-weights", "--config", path.to_str().unwrap()], &cache).status.code(), Some(2));

    fs::write(&path, r#"{"name": "exp-weights", "N": 1}"#).unwrap();
    assert_eq!(dvlab(&["exp-weights", "--config", path.to_str().unwrap()], &cache).status.code(), Some(2));
}

#[test]
fn custom_series_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let series = tmp.path().join("f.csv");
    let f = DirichletSeries::from_real(&[0.0, 1.0, 0.5, -0.25, 0.0, 0.125]);
    f.write_csv(fs::File::create(&series).unwrap()).unwrap();
    let cfg = serde_json::json!({ "name": "custom", "params": { "series_csv": series } });
    let path = tmp.path().join("cfg.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = tmp.path().join("custom");
    let o = dvlab(&["custom", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()], &tmp.path().join("cache"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read_summary(&out).passed);

    // no series given is a configuration error
    assert_eq!(dvlab(&["custom"], &tmp.path().join("cache")).status.code(), Some(2));
}

#[test]
fn config_round_trips_through_json() {
    let text = r#"{"name":"exp-lp-identity","measure":{"family":"nu_gamma","gamma":2.0},"truncation":500,"seed":9,"params":{"pairs":3}}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(cfg.truncation, Some(500));
    assert_eq!(cfg.param_u64("pairs", 20).unwrap(), 3);
    assert_eq!(cfg.param_u64("dim", 2).unwrap(), 2);
    let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert!(ExperimentConfig::from_json(r#"{"name":"exp-weights","measure":{"family":"mu_alpha","alpha":-1.0}}"#).is_err());
}
