use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rotstar::continuation::FAMILY_HEADER;
use rotstar::gravity::read_grid_dump;

fn rotstar(sub: &str, config: &str, out: &Path) -> Output {
    let cfg = out.join("run.conf");
    fs::create_dir_all(out).unwrap();
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_rotstar"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn lane_emden_reports_radius_and_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = rotstar("lane-emden", "gamma = 2\ncentral_value = 1\n", dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let value = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    let exact = std::f64::consts::PI.sqrt() / 2.0;
    assert!((value("R") - exact).abs() < 1e-9);
    assert!((value("M") - exact).abs() < 1e-9);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("xi,u,rho\n"));
}

#[test]
fn lane_emden_without_radius_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = rotstar("lane-emden", "gamma = 1.1666666666666667\n", dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn maclaurin_table_and_bad_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = rotstar(
        "maclaurin",
        "maclaurin.e_min = 1\nmaclaurin.e_max = 5\nmaclaurin.n = 9\n",
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("maclaurin.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "e,a,c,omega2,boundary_residual");
    assert_eq!(lines.len(), 10);
    let o = rotstar("maclaurin", "maclaurin.e_min = 0.5\n", dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_static_gamma2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "gamma = 2\ncentral_value = 1\nkappa = 0\ngrid.nr = 40\ngrid.nz = 40\ngrid.rmax = 1.1078\ngrid.zmax = 1.1078\n";
    let o = rotstar("solve", cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("family.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], FAMILY_HEADER);
    assert_eq!(lines.len(), 2);
    let alpha: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((alpha + 1.0).abs() < 2e-2, "{alpha}");
    let (rho, pot) = read_grid_dump(&dir.path().join("grid.dat")).unwrap();
    assert_eq!(rho.grid.nr, 40);
    assert!(pot.values.iter().all(|u| *u > 0.0));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("gamma = 2\nscf.relx = 0.5\n", "scf.relx"),
        ("gamma = 2\ngrid.nr 32\n", "grid.nr 32"),
        ("gamma = 2\nscf.max_iter = -3\n", "scf.max_iter"),
    ] {
        let o = rotstar("solve", text, dir.path());
        assert_eq!(code(&o), 2);
        assert!(String::from_utf8_lossy(&o.stderr).contains(key), "{key}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_rotstar"))
        .args(["solve", "--config", "/nonexistent/run.conf"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn validity_violation_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "gamma = 2\nkappa = 4\ngrid.nr = 24\ngrid.nz = 24\ngrid.rmax = 1.1078\n";
    assert_eq!(code(&rotstar("solve", cfg, dir.path())), 5);
}

#[test]
fn iteration_cap_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "gamma = 2\nscf.max_iter = 2\ngrid.nr = 24\ngrid.nz = 24\ngrid.rmax = 1.1078\n";
    assert_eq!(code(&rotstar("solve", cfg, dir.path())), 4);
}

#[test]
fn continue_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "gamma = 1.5\ngrid.nr = 24\ngrid.nz = 24\ngrid.rmax = 3.7\n\
               continuation.kappa_max = 0.2\ncontinuation.step0 = 0.01\ncontinuation.snapshot_every = 5\n";
    let o = rotstar("continue", cfg, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("family.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21 + 2);
    assert!(csv.ends_with("# termination=MaxKappaReached\n"));
    let mut snaps: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("snapshot_"))
        .collect();
    snaps.sort();
    assert_eq!(
        snaps,
        [
            "snapshot_0005.dat",
            "snapshot_0010.dat",
            "snapshot_0015.dat",
            "snapshot_0020.dat"
        ]
    );
}
