use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sectorcoint_core::cointegration::GhModel;
use sectorcoint_core::montecarlo::{generate, DgpSpec};
use sectorcoint_cli::config::{Overrides, PipelineConfig};
use sectorcoint_cli::demo::{write_demo, DEMO_SEED};
use sectorcoint_cli::stages::{run_pipeline, run_stage, Stage};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sectorcoint"))
}

fn demo() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    write_demo(dir.path(), DEMO_SEED).unwrap();
    let cfg = dir.path().join("pipeline.toml");
    (dir, cfg)
}

fn load(cfg: &Path, out: &Path, with_output: bool) -> PipelineConfig {
    PipelineConfig::load(
        cfg,
        &Overrides {
            out: Some(out.to_path_buf()),
            with_output,
            ..Overrides::default()
        },
    )
    .unwrap()
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn help_and_usage_exit_codes() {
    let help = bin().args(["pipeline", "--help"]).output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for flag in ["--config", "--out", "--seed", "--with-output", "--trim"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    assert_eq!(bin().args(["pipeline", "--nope"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["pipeline", "--trim", "0.9,0.1"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().arg("ucsv").status().unwrap().code(), Some(2));
}

#[test]
fn stage_failure_exits_one_and_names_the_stage() {
    let (dir, cfg) = demo();
    let out = dir.path().join("empty");
    let o = bin()
        .args(["ecm", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage `ecm` failed"));
}

#[test]
fn pipeline_is_deterministic_and_composable() {
    let (dir, cfg) = demo();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let staged = dir.path().join("staged");
    run_pipeline(&load(&cfg, &a, false)).unwrap();
    run_pipeline(&load(&cfg, &b, false)).unwrap();
    let first = listing(&a);
    assert_eq!(first, listing(&b));
    assert!(first.iter().any(|(n, _)| n == "summary.md"));
    let c = load(&cfg, &staged, false);
    for stage in Stage::PIPELINE {
        run_stage(&c, stage).unwrap();
    }
    assert_eq!(first, listing(&staged));
    assert!(!dir.path().join(".a.partial").exists());
    for (name, bytes) in &first {
        let text = String::from_utf8_lossy(bytes);
        assert!(text.starts_with("# sectorcoint "), "{name}");
        assert!(text.lines().next().unwrap().contains("config_hash="), "{name}");
    }
}

#[test]
fn mixed_configurations_are_refused() {
    let (dir, cfg) = demo();
    let out = dir.path().join("mixed");
    run_stage(&load(&cfg, &out, false), Stage::Fetch).unwrap();
    let other = PipelineConfig::load(
        &cfg,
        &Overrides {
            out: Some(out.clone()),
            seed: Some(99),
            ..Overrides::default()
        },
    )
    .unwrap();
    let err = run_stage(&other, Stage::Ucsv).unwrap_err();
    assert_eq!(err.stage, Stage::Ucsv);
    assert!(err.to_string().contains("refusing"), "{err}");
    assert!(!out.join("ucsv.csv").exists());
}

#[test]
fn failed_pipeline_leaves_no_partial_outputs() {
    let (dir, cfg) = demo();
    fs::write(dir.path().join("DJUSBM.csv"), "date,value\n2002-07,1\n2002-09,2\n").unwrap();
    let out = dir.path().join("broken");
    let err = run_pipeline(&load(&cfg, &out, false)).unwrap_err();
    assert_eq!(err.stage, Stage::Fetch);
    assert!(!out.exists());
    assert!(!dir.path().join(".broken.partial").exists());
}

#[test]
fn output_toggle_adds_ip_and_renumbers_tables() {
    let (dir, cfg) = demo();
    let plain = dir.path().join("plain");
    let ip = dir.path().join("ip");
    run_pipeline(&load(&cfg, &plain, false)).unwrap();
    run_pipeline(&load(&cfg, &ip, true)).unwrap();
    let names = |d: &Path| listing(d).into_iter().map(|(n, _)| n).collect::<Vec<_>>();
    let renamed: Vec<String> = names(&plain)
        .into_iter()
        .map(|n| {
            n.replace("table2", "table5")
                .replace("table3", "table6")
                .replace("table4", "table7")
        })
        .collect();
    let mut renamed_sorted = renamed.clone();
    renamed_sorted.sort();
    assert_eq!(renamed_sorted, names(&ip));
    let t1 = fs::read_to_string(ip.join("table1_unitroot.csv")).unwrap();
    assert!(t1.lines().any(|l| l.starts_with("IP,")));
    let t1_plain = fs::read_to_string(plain.join("table1_unitroot.csv")).unwrap();
    assert_eq!(t1.lines().count(), t1_plain.lines().count() + 1);
    let longrun = fs::read_to_string(ip.join("table6_longrun.csv")).unwrap();
    assert!(longrun.lines().any(|l| l.contains(",IP,")));
    let ecm = fs::read_to_string(ip.join("table7_ecm.csv")).unwrap();
    assert!(ecm.lines().any(|l| l.contains(",D(IP),")));
    let gh_cols = |p: &Path| fs::read_to_string(p).unwrap().lines().nth(1).unwrap().to_string();
    assert_eq!(gh_cols(&plain.join("table2_gh.csv")), gh_cols(&ip.join("table5_gh.csv")));
}

#[test]
fn unitroot_single_file_gives_one_row() {
    let (dir, _) = demo();
    let o = bin()
        .args(["unitroot", "--transform", "yoy", "--input"])
        .arg(dir.path().join("CPI.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("variable,adf_level"));
    assert!(lines[1].starts_with("CPI,"));
}

#[test]
fn gh_on_generated_cointegrated_pair_rejects() {
    // y = 1 + 2 D + (1 + 1.5 D) x + AR(1) noise, break at mid-sample
    let spec = DgpSpec::cointegrated_with_break(GhModel::RS, 1, 160, 0.5, vec![1.0, 2.0, 1.0, 1.5], 77);
    let set = generate(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.csv");
    let mut text = String::from("date,y,x1\n");
    for i in 0..set[0].len() {
        text.push_str(&format!(
            "{},{},{}\n",
            set[0].date_at(i).iso(),
            set[0].values()[i],
            set[1].values()[i]
        ));
    }
    fs::write(&path, text).unwrap();
    let o = bin().args(["gh", "--model", "RS", "--input"]).arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("y,GH-RS,"));
    assert!(row.ends_with(",true"), "{row}");
    let zt_stars = row.split(',').nth(7).unwrap();
    assert!(!zt_stars.is_empty(), "{row}");
}

#[test]
fn simulate_cv_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cv.csv");
    let status = bin()
        .args(["simulate-cv", "--model", "LS", "--m", "1", "--n", "60", "--reps", "1000", "--seed", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let v: Vec<f64> = r.split(',').skip(1).take(3).map(|c| c.parse().unwrap()).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "{r}");
    }
}

#[test]
fn shipped_fred_manifest_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fred/manifest.toml");
    let m = sectorcoint_core::ingest::DatasetManifest::load(&path).unwrap();
    assert_eq!(m.entry("I").unwrap().code.as_deref(), Some("CPIAUCSL"));
    assert_eq!(m.entry("IP").unwrap().code.as_deref(), Some("INDPRO"));
}
