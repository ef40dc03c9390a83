//! End-to-end checks of the command-line binary: exit codes, error wording,
//! output structure, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vibrex"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should launch")
}

fn write_cfg(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn analytic_reruns_are_byte_identical() {
    // The header echoes the configuration, out_dir included, so a faithful
    // rerun must target the same directory; snapshot the first pass before
    // overwriting.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let names = ["analytic_optimum.csv", "analytic_interference.csv"];
    let first = run(&["analytic", "--out-dir", out]);
    assert_eq!(
        code(&first),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    let snapshot: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(dir.path().join(n)).unwrap())
        .collect();
    let second = run(&["analytic", "--out-dir", out]);
    assert_eq!(code(&second), 0);
    for (n, before) in names.iter().zip(&snapshot) {
        let after = fs::read(dir.path().join(n)).unwrap();
        assert_eq!(before, &after, "{n} differs between reruns");
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["propagate", "--help"])), 0);
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn rejected_lattice_length_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phi = 7.8\nL = 11\n");
    let out = run(&["spectrum", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lattice"), "stderr: {err}");
}

#[test]
fn unknown_key_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "# comment\nbogus = 1\n");
    let out = run(&["spectrum", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus") && err.contains("line 2"), "stderr: {err}");
}

#[test]
fn malformed_line_and_missing_file_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "no equals sign here\n");
    assert_eq!(code(&run(&["analytic", "--config", &cfg])), 1);
    let gone = dir.path().join("absent.cfg");
    let out = run(&["analytic", "--config", gone.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_engine_flag_exits_one() {
    let out = run(&["propagate", "--engine", "warp"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("engine"));
}

#[test]
fn unattainable_optimum_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "temp_list = 2500\n");
    let out = run(&[
        "analytic",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        2,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn failed_validation_exits_three() {
    // Pin the phonon cutoff so the lowest mode lands exactly on the wave
    // spacing of a short lattice; the dressing checks must then report the
    // resonance instead of quietly producing numbers.
    let dir = tempfile::tempdir().unwrap();
    let delta_omega = 2.0 * 7.8 * (std::f64::consts::PI / 4.0).sin();
    let omega_c = delta_omega / (std::f64::consts::PI / 8.0).sin();
    let cfg = write_cfg(
        dir.path(),
        &format!("L = 4\ntemperature_K = 50\nomega_c = {omega_c:.12e}\n"),
    );
    let out = run(&[
        "validate",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        3,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "stdout: {stdout}");
}

#[test]
fn propagate_writes_a_stable_well_formed_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "engine = three-path\nt_max_phi = 100\nn_points = 101\n",
    );
    let out_flag = dir.path().to_str().unwrap();
    let out = run(&["propagate", "--config", &cfg, "--out-dir", out_flag]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let path = dir.path().join("propagate_three-path.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# vibrex "));
    let mut header = 1;
    let mut rest = Vec::new();
    for line in lines {
        if line.starts_with('#') {
            header += 1;
        } else {
            rest.push(line);
        }
    }
    assert!(header >= 3, "expected a commented header block");
    assert_eq!(rest[0], "t_phi,re_G,im_G,abs_G");
    assert_eq!(rest.len() - 1, 101, "one row per grid point");

    let first: Vec<&str> = rest[1].split(',').collect();
    assert_eq!(first[0], "0.00000000000e0");
    assert_eq!(first[3], "0.00000000000e0", "no amplitude before evolution");
    for row in &rest[1..] {
        assert_eq!(row.split(',').count(), 4);
    }

    let snapshot = fs::read(&path).unwrap();
    let out2 = run(&["propagate", "--config", &cfg, "--out-dir", out_flag]);
    assert_eq!(code(&out2), 0);
    assert_eq!(snapshot, fs::read(&path).unwrap(), "rerun changed bytes");
}

#[test]
fn shifts_table_lists_every_exciton_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "eps_grid = 0.00:0.02:0.01\n");
    let out = run(&[
        "shifts",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("shifts.csv")).unwrap();
    let data: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect();
    // Column row, then 3 anchorings x 11 exciton states on the ten-bond
    // reference lattice.
    assert_eq!(data.len() - 1, 3 * 11, "rows: {}", data.len() - 1);
    for label in ["+", "o", "-", "k1", "k9"] {
        assert!(
            data.iter().any(|r| r.split(',').nth(1) == Some(label)),
            "missing state {label}"
        );
    }
}
