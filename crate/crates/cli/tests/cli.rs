use std::path::Path;
use std::process::{Command, Output};

const BUNDLED: &str = include_str!("../../core/data/h2o.model");

fn rovib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rovib")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = rovib(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// Rows of a CSV as field vectors, header dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn model_validate_reports_constants() {
    let text = ok(&["model-validate"]);
    assert!(text.contains("9.4947 27.2432 14.5740"), "{text}");
    assert!(text.trim_end().ends_with("ok"));
}

#[test]
fn broken_model_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.model");
    std::fs::write(&path, BUNDLED.replace("omega_cm1 = [3830.87", "omega_cm1 = [-3830.87")).unwrap();
    assert_eq!(rovib(&["model-validate", "--model", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, "not a model").unwrap();
    assert_eq!(rovib(&["spectrum", "--model", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rovib(&["spectrum", "--groups", "NOPE"]).status.code(), Some(2));
}

#[test]
fn harmonic_ground_level_and_coriolis_shift() {
    let ho = rows(&ok(&["spectrum", "--groups", "HO", "--n-lowest", "1"]));
    assert_eq!(ho[0][1], "4710.5350");
    let delta = |groups: &str| -> f64 {
        let r = rows(&ok(&["spectrum", "--groups", groups, "--n-lowest", "8"]));
        let e = |label: &str| r.iter().find(|f| f[4] == label).unwrap()[1].parse::<f64>().unwrap();
        e("001") - e("000")
    };
    assert!((delta("RR+HO+ANHARM") - 3782.6).abs() < 0.2);
    assert!((delta("FULL") - 3797.0).abs() < 0.2);
}

#[test]
fn pauli_counts_and_cutoff() {
    assert!(ok(&["pauli", "--vmax", "3"]).contains("L_q=773 "));
    let cut = ok(&["pauli", "--vmax", "3", "--lambda", "110"]);
    assert!(cut.contains("non_identity=40") && cut.contains("by_weight=1/11/17/10/2/0/0"), "{cut}");
    assert!(ok(&["pauli", "--lambda", "inf"]).contains("L_q=0 "));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.pauli");
    ok(&["pauli", "--vmax", "1", "--out", file.to_str().unwrap()]);
    let text = read(&file);
    assert!(text.starts_with("# N_q=3 vmax=1 J=0"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn qsci_run_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(&["qsci", "--out-dir", first.to_str().unwrap(), "--max-steps", "2"]);
    let manifest = first.join("manifest.toml");
    ok(&["qsci", "--config", manifest.to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
    for f in ["results.csv", "omega_big.csv", "distributions/point01_020.txt"] {
        assert_eq!(read(&first.join(f)), read(&second.join(f)), "{f}");
    }
    let m = read(&manifest);
    assert!(m.contains("model_sha256") && m.contains("order = \"lexicographic\"") && m.contains("n_rotations = 40"));

    let results = rows(&read(&first.join("results.csv")));
    assert_eq!(results.len(), 15);
    for r in results.iter().filter(|r| r[0] == "0") {
        assert_eq!(r[4], "1", "bare reference basis at N_ST = 0");
    }
    let bands: Vec<&str> = results.iter().filter(|r| r[0] == "0").map(|r| r[7].as_str()).collect();
    assert_eq!(bands, ["22.5056", "1680.2419", "3241.1718", "4188.6007", "4210.6483"]);
}

#[test]
fn shot_mode_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&["qsci", "--out-dir", out.to_str().unwrap(), "--max-steps", "2", "--n-shot", "1000", "--seed", seed]);
        read(&out.join("results.csv"))
    };
    assert_eq!(run("a", "5"), run("b", "5"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "vmax = 1\nreferences = [\"000\", \"010\"]\n[schedule]\nsteps = [0, 1]\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    ok(&["qsci", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--j", "1"]);
    let m = read(&out.join("manifest.toml"));
    assert!(m.contains("vmax = 1") && m.contains("j = 1") && m.contains("seed = 3"), "{m}");
    assert_eq!(rows(&read(&out.join("results.csv"))).len(), 2 * 2 * 3);

    std::fs::write(&config, "vmax = 2\nbogus = 1\n").unwrap();
    assert_eq!(rovib(&["qsci", "--config", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn replay_refuses_a_different_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("h2o.model");
    std::fs::write(&model, BUNDLED).unwrap();
    let out = dir.path().join("run");
    ok(&["qsci", "--model", model.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--max-steps", "0"]);
    std::fs::write(&model, format!("{BUNDLED}\n# edited\n")).unwrap();
    let manifest = out.join("manifest.toml");
    let again = dir.path().join("again");
    let status = rovib(&["qsci", "--config", manifest.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn baselines_emit_reports() {
    let pt2 = rows(&ok(&["baseline", "--method", "pt2", "--vmax", "7"]));
    let e: Vec<f64> = pt2.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!((e[0] - 4628.7).abs() < 0.1);
    for (got, want) in e[1..].iter().map(|x| x - e[0]).zip([1596.6, 3153.4, 3630.2, 3732.3]) {
        assert!((got - want).abs() < 0.1, "{got} vs {want}");
    }
    let random = |seed: &str| ok(&["baseline", "--method", "random", "--trials", "20", "--seed", seed]);
    assert_eq!(random("1"), random("1"));
    assert!(rows(&random("1")).iter().all(|r| r[0] == "random" && r[2] == "20" && !r[5].is_empty()));

    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let greedy = rows(&ok(&["baseline", "--method", "greedy", "--size", "1", "--curve", curve.to_str().unwrap()]));
    let bare_references = [22.5, 1680.2, 3241.2, 4188.6, 4210.6];
    for (r, want) in greedy.iter().zip(bare_references) {
        assert!((r[4].parse::<f64>().unwrap() - want).abs() < 0.1);
    }
    assert_eq!(rows(&read(&curve)).len(), 5);
    assert_eq!(rovib(&["baseline", "--method", "optimal"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // 2 * omega_2 tuned onto omega_1 makes the 100/020 pair resonant.
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("fermi.model");
    std::fs::write(&model, BUNDLED.replace("omega_cm1 = [3830.87, 1649.74", "omega_cm1 = [3299.48, 1649.74")).unwrap();
    let out = rovib(&["baseline", "--method", "pt2", "--model", model.to_str().unwrap(), "--references", "100"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
