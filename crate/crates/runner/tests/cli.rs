use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

fn csoc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_csoc"));
    c.env_remove("CSOC_OUT_DIR");
    c
}

/// Every file below `dir` except the manifest, keyed by relative path.
fn result_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let key = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(key, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn run_all_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let st = csoc()
            .args(["run", "all", "--seed", "7", "--jobs", jobs, "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(st.status.code(), Some(0));
    }
    let (fa, fb) = (result_files(a.path()), result_files(b.path()));
    assert!(fa.len() > 20, "{:?}", fa.keys());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(v == &fb[k], "{k} differs");
    }

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["rng_algorithm"], csoc_core::wiener::RNG_ALGORITHM);
    assert_eq!(manifest["version"], csoc_core::VERSION);
    assert!(manifest["created"].is_string());

    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("moments/report.json")).unwrap()).unwrap();
    let keys: Vec<_> = report.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        ["scenario", "verifies", "passed", "seed", "checks", "details"]
    );
    let csv = fs::read_to_string(a.path().join("sde-demo/trajectories.csv")).unwrap();
    assert!(csv.starts_with("path,step,tau,x0,x1,x2,x3,y0,y1,y2,y3\n"));
}

#[test]
fn clifford_passes() {
    let dir = tempfile::tempdir().unwrap();
    let st = csoc()
        .args(["run", "clifford", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let gammas: Vec<Vec<Vec<[f64; 2]>>> =
        serde_json::from_slice(&fs::read(dir.path().join("clifford/gammas.json")).unwrap())
            .unwrap();
    assert_eq!(gammas.len(), 4);
    assert!(gammas
        .iter()
        .all(|m| m.len() == 4 && m.iter().all(|r| r.len() == 4)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[metric]\nepsilon = 3\n").unwrap();
    let st = csoc()
        .args(["run", "clifford", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));

    fs::write(&cfg, "[hjb]\npotential = \"linear-electric(0.5)\"\n").unwrap();
    let st = csoc()
        .args(["run", "hjb-residual", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(3));

    // a coarse stencil breaks the Hopf-Cole tolerance
    fs::write(&cfg, "[dirac]\nh = 0.05\n").unwrap();
    let out = csoc()
        .args(["run", "hopf-cole", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hopf-cole"));
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let st = csoc()
        .env("CSOC_OUT_DIR", dir.path())
        .args(["run", "clifford"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(dir.path().join("clifford/report.json").exists());
}

#[test]
fn default_config_round_trips() {
    let out = csoc().arg("config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let cfg = csoc_runner::ScenarioConfig::from_toml(&text).unwrap();
    assert_eq!(cfg, csoc_runner::ScenarioConfig::default());
}
