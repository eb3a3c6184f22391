use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wetlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wetlab"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("WETLAB_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

fn manifest(dir: &Path) -> Vec<(String, String, String)> {
    fs::read_to_string(dir.join("manifest.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut p = l.splitn(3, ',');
            (p.next().unwrap().into(), p.next().unwrap().into(), p.next().unwrap().into())
        })
        .collect()
}

#[test]
fn formula_on_flat_sixty_degrees() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wetlab(&["formula", "--set", "chemistry.theta=60"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("formula.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let theta: f64 = column(&text, "theta_a_deg")[0].parse().unwrap();
    let cos: f64 = column(&text, "cos_theta_a")[0].parse().unwrap();
    assert!((theta - 60.0).abs() < 1e-10);
    assert!((cos - 0.5).abs() < 1e-12);
    let m = manifest(tmp.path());
    assert_eq!(m[0].0, "config");
    assert_eq!(m[0].2.len(), 64);
    assert!(m.iter().any(|r| r.0 == "artifact" && r.1 == "formula.csv"));
    assert!(m.iter().any(|r| r.1 == "scenario" && r.2 == "formula"));
}

#[test]
fn config_file_and_run_dispatch() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("wave.toml");
    fs::write(
        &cfg,
        "scenario = \"formula\"\n\n[surface]\ngeometry = \"wave_y\"\namplitude = 0.1\n\n[chemistry]\ntheta = 60.0\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = wetlab(&["run", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("formula.csv")).unwrap();
    let theta: f64 = column(&text, "theta_a_deg")[0].parse().unwrap();
    assert!((theta - 56.8939).abs() < 1e-3);
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    for (set, key) in [
        ("surface.roughness=1", "roughness"),
        ("surface.amplitude=0.3", "surface.amplitude"),
        ("chemistry.theta=0", "chemistry.theta"),
        ("surface.eps=0.01", "surface.eps"),
        ("surface.geometry=sawtooth", "surface.geometry"),
    ] {
        let o = wetlab(&["formula", "--set", set], tmp.path());
        assert_eq!(o.status.code(), Some(1), "{set}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{set}: {err}");
    }
    let o = wetlab(&["run"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario"));
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wetlab"))
        .args(["formula"])
        .env("WETLAB_OUTPUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("formula.csv").exists());
}

#[test]
fn hysteresis_outputs_are_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "hysteresis",
        "--set",
        "surface.geometry=wave_z",
        "--set",
        "chemistry.theta=90",
        "--set",
        "surface.eps=0.25",
        "--set",
        "hysteresis.pillar_fraction=0.25",
    ];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(wetlab(&args, &a).status.success());
    assert!(wetlab(&args, &b).status.success());
    for name in ["table.csv", "range.csv", "pillar.csv", "config.toml"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let strip = |d: &Path| manifest(d).into_iter().filter(|r| r.1 != "timestamp").collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    let range = fs::read_to_string(a.join("range.csv")).unwrap();
    let adv: f64 = column(&range, "advancing_deg")[0].parse().unwrap();
    let rec: f64 = column(&range, "receding_deg")[0].parse().unwrap();
    assert!((adv - 122.14).abs() < 0.2 && (rec - 57.86).abs() < 0.2);
    let pillar: f64 = column(&fs::read_to_string(a.join("pillar.csv")).unwrap(), "theta_deg")[0].parse().unwrap();
    assert!((pillar - (-0.75f64).acos().to_degrees()).abs() < 1e-9);
}

#[test]
fn sweep_reports_slopes_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = wetlab(
        &[
            "sweep",
            "--set",
            "surface.geometry=wave_y",
            "--set",
            "chemistry.theta=60",
            "--set",
            "sweep.eps=[0.5, 0.25, 0.125]",
            "--set",
            "solver.nodes_x=33",
            "--set",
            "solver.nodes_y=16",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(column(&text, "eps"), ["0.5", "0.25", "0.125"]);
    assert!(column(&text, "theta_meas_deg").iter().all(|t| (t.parse::<f64>().unwrap() - 56.89).abs() < 1.0));
    assert_eq!(fs::read_to_string(tmp.path().join("sweep_plot.csv")).unwrap().lines().count(), 4);
    let m = manifest(tmp.path());
    let slope = m.iter().find(|r| r.1 == "slope_est1").unwrap();
    assert!(slope.2.parse::<f64>().unwrap().is_finite());
}

#[test]
fn solve_writes_tables_and_failure_keeps_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let small = ["--set", "solver.nodes_x=33", "--set", "solver.nodes_y=16"];
    let mut args = vec!["solve", "--set", "chemistry.theta=120"];
    args.extend(small);
    let o = wetlab(&args, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["interface.csv", "line.csv", "profile.csv", "solve.csv"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    let row = fs::read_to_string(tmp.path().join("solve.csv")).unwrap();
    let theta: f64 = column(&row, "theta_meas_deg")[0].parse().unwrap();
    assert!((theta - 120.0).abs() < 0.2);

    let failed = tmp.path().join("failed");
    let mut args = vec!["solve", "--set", "chemistry.theta=17.19", "--set", "solver.strip_half_height=1.0"];
    args.extend(small);
    let o = wetlab(&args, &failed);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(failed.join("config.toml").exists());
    assert!(manifest(&failed).iter().any(|r| r.1 == "outcome" && r.2.starts_with("failed")));
}
