use std::fs::File;

use wetlab_core::homogenize::convergence_study;
use wetlab_core::*;

fn small() -> SolverConfig {
    SolverConfig { nodes_x: 33, nodes_y: 16, ..Default::default() }
}

fn rows(path: &std::path::Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    (header, r.records().map(|x| x.unwrap()).collect())
}

#[test]
fn solution_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = SurfaceSpec::catalog(Geometry::WaveY { amplitude: 0.1 }, Chemistry::Uniform { theta: 1.1 }, 0.125).unwrap();
    let sol = solve_free(&s, 0.0, &small()).unwrap();
    let (pi, pl) = (dir.path().join("interface.csv"), dir.path().join("line.csv"));
    sol.write_csv(File::create(&pi).unwrap(), File::create(&pl).unwrap()).unwrap();
    let (h, nodes) = rows(&pi);
    assert_eq!(h.iter().collect::<Vec<_>>(), ["i", "j", "xh", "x", "y", "u"]);
    assert_eq!(nodes.len(), 33 * 16);
    let text = std::fs::read_to_string(&pi).unwrap();
    assert!(text.starts_with("# nx=32\n# ny=16\n"));
    let (h, line) = rows(&pl);
    assert_eq!(&h[0], "y");
    assert!(h.iter().any(|c| c == "theta_g_deg"));
    assert_eq!(line.len(), 16);
    let psi: Vec<f64> = line.iter().map(|r| r[2].parse().unwrap()).collect();
    for (a, b) in psi.iter().zip(sol.contact_line.psi()) {
        assert_eq!(a, b);
    }
}

#[test]
fn sweep_and_table_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let family = |eps: f64| SurfaceSpec::catalog(Geometry::WaveY { amplitude: 0.1 }, Chemistry::Uniform { theta: 1.0 }, eps);
    let mut texts = Vec::new();
    for k in 0..2 {
        let report = convergence_study(&family, &[0.25, 0.125, 0.0625], &small(), 0.0).unwrap();
        let p = dir.path().join(format!("sweep{k}.csv"));
        report.write_csv(File::create(&p).unwrap()).unwrap();
        texts.push(std::fs::read_to_string(&p).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let (h, r) = rows(&dir.path().join("sweep0.csv"));
    assert!(h.iter().any(|c| c == "theta_meas_deg") && h.iter().any(|c| c == "cos_theta_meas"));
    assert_eq!(r.len(), 3);

    let s = SurfaceSpec::catalog(Geometry::WaveZ { amplitude: 0.1 }, Chemistry::Uniform { theta: 1.5 }, 0.1).unwrap();
    let p = dir.path().join("table.csv");
    angle_vs_offset(&s, 16).unwrap().write_csv(File::create(&p).unwrap()).unwrap();
    let (h, r) = rows(&p);
    assert_eq!(h.iter().collect::<Vec<_>>(), ["offset", "theta_a_deg", "cos_theta_a", "nu", "valid", "lambda"]);
    assert_eq!(r.len(), 16);
}

#[test]
fn strip_exhaustion_and_bad_seeds() {
    let s = SurfaceSpec::catalog(Geometry::Flat, Chemistry::Uniform { theta: 0.3 }, 0.25).unwrap();
    let cfg = SolverConfig { strip_half_height: 1.0, ..small() };
    assert!(matches!(solve_free(&s, 0.0, &cfg), Err(Error::StripExhausted { .. })));
    assert!(solve_free(&s, 1.5, &cfg).is_err());
}
