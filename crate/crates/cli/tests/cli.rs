use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wentzell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wentzell")).args(args).output().expect("binary runs")
}

fn run(cmd: &str, out: &Path, sets: &[&str]) -> Output {
    let mut args = vec![cmd.to_string(), "--out".into(), out.display().to_string()];
    for s in sets {
        args.push("--set".into());
        args.push(s.to_string());
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    wentzell(&refs)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Rows after the comment header and the column line.
fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| if v.is_empty() { f64::NAN } else { v.parse().unwrap() }).collect())
        .collect()
}

fn report_value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no key {key} in report"))
}

#[test]
fn mesh_rectangle_and_lshape() {
    let dir = TempDir::new().unwrap();
    let o = run("mesh", &dir.path().join("r"), &["resolution=4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read(dir.path().join("r/mesh_report.txt"));
    assert_eq!(report_value(&report, "vertices"), "25");
    assert!(read(dir.path().join("r/mesh.wmesh")).contains("wmesh 1"));

    let o = run("mesh", &dir.path().join("l"), &["domain=lshape", "resolution=2"]);
    assert_eq!(code(&o), 0);
    let report = read(dir.path().join("l/mesh_report.txt"));
    assert_eq!(report_value(&report, "area").parse::<f64>().unwrap(), 0.75);
}

#[test]
fn written_mesh_can_be_loaded_back() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("mesh", &dir.path().join("a"), &["domain=lshape", "resolution=3"])), 0);
    let file = dir.path().join("a/mesh.wmesh");
    let o = run("mesh", &dir.path().join("b"), &[&format!("domain={}", file.display())]);
    assert_eq!(code(&o), 0);
    let (a, b) = (read(dir.path().join("a/mesh_report.txt")), read(dir.path().join("b/mesh_report.txt")));
    for key in ["vertices", "triangles", "area", "perimeter"] {
        assert_eq!(report_value(&a, key), report_value(&b, key));
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run("mesh", dir.path(), &["domain=/no/such/file.wmesh"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run("mesh", dir.path(), &["resolution=0"])), 2);
    assert_eq!(code(&run("mesh", dir.path(), &["no_such_key=1"])), 2);
    assert_eq!(code(&wentzell(&["mesh", "--config", "/no/such/config"])), 2);
    assert_eq!(code(&wentzell(&["frobnicate"])), 2);
    assert_eq!(code(&run("evolve", dir.path(), &["dt=0"])), 2);
    assert_eq!(code(&run("evolve", dir.path(), &["beta.arc9=1"])), 2);
    assert_eq!(code(&run("solve", dir.path(), &["f=x + zz"])), 2);
}

#[test]
fn solve_constant_case() {
    let dir = TempDir::new().unwrap();
    let o = run("solve", dir.path(), &["resolution=6", "beta=0.5+1i", "lambda=2", "f=lambda", "g=lambda+beta_re", "g_im=beta_im"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&read(dir.path().join("solution.csv")));
    assert_eq!(rows.len(), 49);
    for r in rows {
        assert!((r[3] - 1.0).abs() < 1e-12 && r[4].abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn solve_convergence_table() {
    let dir = TempDir::new().unwrap();
    let o = run(
        "solve",
        dir.path(),
        &[
            "resolution=8",
            "refinements=2",
            "beta=1+1i",
            "f=lambda*(x^2+y^2)-4",
            "g=2*(x*nx+y*ny)+(lambda+beta_re)*(x^2+y^2)",
            "g_im=beta_im*(x^2+y^2)",
            "exact=x^2+y^2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&read(dir.path().join("convergence.csv")));
    assert_eq!(rows.len(), 3);
    assert!(rows[0][4].is_nan());
    for r in &rows[1..] {
        assert!((r[4] - 2.0).abs() < 0.1, "l2 order {}", r[4]);
        assert!((r[5] - 1.0).abs() < 0.1, "h1 order {}", r[5]);
    }
}

#[test]
fn solve_rejects_lambda_below_omega0() {
    let dir = TempDir::new().unwrap();
    let o = run("solve", dir.path(), &["beta=-2", "lambda=1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega0"));
}

#[test]
fn evolve_conserves_mass_for_zero_beta() {
    let dir = TempDir::new().unwrap();
    let o = run("evolve", dir.path(), &["resolution=8", "beta=0", "dt=0.02", "t_final=0.5", "scheme=crank-nicolson"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&read(dir.path().join("trajectory.csv")));
    assert_eq!(rows.len(), 26);
    let (m_re, m_im) = (rows[0][1], rows[0][2]);
    for r in &rows {
        assert!((r[1] - m_re).abs() <= 1e-12 && (r[2] - m_im).abs() <= 1e-12);
        assert_eq!(r.len(), 7);
    }
    assert!((rows.last().unwrap()[0] - 0.5).abs() < 1e-15);
}

#[test]
fn evolve_constant_is_fixed_point() {
    let dir = TempDir::new().unwrap();
    let o = run("evolve", dir.path(), &["resolution=6", "beta=0", "initial=1", "t_final=0.3", "dt=0.1", "snapshot_every=1"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&read(dir.path().join("snapshot_00003.csv")));
    assert!(rows.iter().all(|r| (r[3] - 1.0).abs() < 1e-12 && r[4].abs() < 1e-12));
}

#[test]
fn evolve_zero_steps_writes_initial_frame_only() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("evolve", dir.path(), &["resolution=4", "t_final=0"])), 0);
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["frame_00000.ppm", "snapshot_00000.csv", "trajectory.csv"]);
    assert_eq!(data_rows(&read(dir.path().join("trajectory.csv"))).len(), 1);
}

#[test]
fn heatmap_is_binary_ppm_with_header() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("solve", dir.path(), &["resolution=4", "f=1"])), 0);
    let bytes = std::fs::read(dir.path().join("solution.ppm")).unwrap();
    assert!(bytes.starts_with(b"P6\n# wentzell "));
    let marker = b"\n512 512\n255\n";
    let pos = bytes.windows(marker.len()).position(|w| w == marker).unwrap();
    assert_eq!(bytes.len() - pos - marker.len(), 3 * 512 * 512);
    let head = String::from_utf8_lossy(&bytes[..pos]);
    assert!(head.lines().skip(1).all(|l| l.starts_with("# ")));
    assert!(head.contains("# f = 1"));
}

#[test]
fn every_output_carries_the_resolved_config() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("evolve", dir.path(), &["resolution=4", "t_final=0.02", "dt=0.01", "lumping=consistent"])), 0);
    for name in ["trajectory.csv", "snapshot_00000.csv", "snapshot_00002.csv"] {
        let text = read(dir.path().join(name));
        let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        assert!(header[0].starts_with("# wentzell ") && header[0].ends_with(" evolve"));
        for line in ["# lumping = consistent", "# dt = 0.01", "# seed = 0", "# scheme = implicit-euler", "# beta_im = "] {
            assert!(header.contains(&line), "{name} lacks '{line}'");
        }
    }
}

#[test]
fn config_file_then_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# experiment\nresolution = 3\nresolution = 5\nseed = 4\n").unwrap();
    let out = dir.path().join("o");
    let o = wentzell(&["mesh", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report = read(out.join("mesh_report.txt"));
    assert_eq!(report_value(&report, "vertices"), "36");
    assert!(report.contains("# seed = 4"));

    let o = wentzell(&[
        "mesh", "--config", cfg.to_str().unwrap(), "--set", "resolution=2", "--seed", "9", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let report = read(out.join("mesh_report.txt"));
    assert_eq!(report_value(&report, "vertices"), "9");
    assert!(report.contains("# seed = 9"));
}

#[test]
fn identical_config_and_seed_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let sets = ["resolution=6", "beta=1+2i", "t_final=0.05", "dt=0.01", "snapshot_every=5"];
    // `out` is part of the config, so both runs write to the same place
    let names = ["trajectory.csv", "snapshot_00005.csv", "frame_00005.ppm"];
    assert_eq!(code(&run("evolve", &dir.path().join("a"), &sets)), 0);
    let first: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.path().join("a").join(n)).unwrap()).collect();
    assert_eq!(code(&run("evolve", &dir.path().join("a"), &sets)), 0);
    for (name, bytes) in names.iter().zip(&first) {
        assert!(std::fs::read(dir.path().join("a").join(name)).unwrap() == *bytes, "{name} differs between runs");
    }
    let mut other = sets.to_vec();
    other.push("seed=1");
    assert_eq!(code(&run("evolve", &dir.path().join("c"), &other)), 0);
    let a = data_rows(&read(dir.path().join("a/snapshot_00000.csv")));
    let c = data_rows(&read(dir.path().join("c/snapshot_00000.csv")));
    assert_ne!(a, c);
}

#[test]
fn verify_neumann_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = run("verify", dir.path(), &["resolution=16", "suite=neumann"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read(dir.path().join("verify_report.txt"));
    assert_eq!(report_value(&report, "neumann.status"), "pass");
    assert_eq!(report_value(&report, "failed"), "0");
}

#[test]
fn verify_contractivity_on_obtuse_mesh_is_not_applicable() {
    let dir = TempDir::new().unwrap();
    let mesh = dir.path().join("obtuse.wmesh");
    // two triangles sharing the long edge; the apex angles are about 147 degrees
    std::fs::write(&mesh, "wmesh 1\nv 0 0\nv 2 0\nv 1 0.3\nv 1 -0.3\nt 0 1 2\nt 0 3 1\n").unwrap();
    let o = run("verify", &dir.path().join("o"), &[&format!("domain={}", mesh.display()), "suite=contractivity", "beta=1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read(dir.path().join("o/verify_report.txt"));
    assert_eq!(report_value(&report, "contractivity.status"), "not-applicable");
    assert!(report_value(&report, "contractivity.summary").contains("defect"));
}

#[test]
fn verify_finding_exits_1() {
    let dir = TempDir::new().unwrap();
    // no shift at all against a strongly negative beta: the form leaves the half-plane
    let o = run("verify", dir.path(), &["resolution=8", "suite=sector", "beta=-1000", "omega0=0", "samples=50"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report_value(&read(dir.path().join("verify_report.txt")), "sector.status"), "FAIL");
}

#[test]
fn verify_unknown_suite_exits_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run("verify", dir.path(), &["suite=neumann,bogus"])), 2);
}
