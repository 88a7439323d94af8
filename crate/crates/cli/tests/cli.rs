use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-qed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SPHERE: &str = "[geometry.spherical]\nradius_nm = 140\nshell = \"gold\"\n[grid]\nwindow_ev = [6.5, 7.5]\npoints_per_mev = 2\n[matter]\npreset = \"benzene\"\ndipole = 1.0\n[tune]\ntarget_ev = 6.808\nbracket_nm = [10, 20]\n";

#[test]
fn modes_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SPHERE);
    let out_dir = dir.path().join("results");
    let o = run(&[
        "modes",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("peak 7.11"), "{stdout}");
    for f in ["modes.csv", "peaks.csv", "modeset.csv", "modes.gp"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
}

#[test]
fn no_timestamp_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SPHERE);
    let read = |sub: &str, stamp: bool| {
        let out = dir.path().join(sub);
        let mut args = vec!["spectrum", "-c", &cfg, "--out", out.to_str().unwrap()];
        if !stamp {
            args.push("--no-timestamp");
        }
        assert!(run(&args).status.success());
        std::fs::read_to_string(out.join("spectrum.csv")).unwrap()
    };
    assert_eq!(read("a", false), read("b", false));
    assert!(read("c", true).contains("generated_unix"));
}

#[test]
fn density_flag_overrides_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SPHERE);
    let out = dir.path().join("o");
    let o = run(&[
        "modes",
        "-c",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--density",
        "1",
        "--no-timestamp",
    ]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(out.join("modes.csv")).unwrap();
    assert!(table.contains("# points_per_mev = 1\n"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1001);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    let typo = write(
        dir.path(),
        "typo.toml",
        &SPHERE.replace("radius_nm", "radius"),
    );
    let o = run(&["modes", "-c", &typo, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));

    let o = run(&["modes", "-c", "does-not-exist.toml"]);
    assert_eq!(o.status.code(), Some(2));

    let planar_only = write(
        dir.path(),
        "p.toml",
        "[geometry.planar]\nmirror = { ideal = 0.9 }\n",
    );
    assert_eq!(
        run(&["modes", "-c", &planar_only, "--out", out])
            .status
            .code(),
        Some(2)
    );

    let bad_bracket = write(
        dir.path(),
        "b.toml",
        &SPHERE.replace("[10, 20]", "[100, 100.5]"),
    );
    let o = run(&["tune-radius", "-c", &bad_bracket, "--out", out]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let o = run(&["spectrum", "-c", &cfg_dense(dir.path()), "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hint"));
}

fn cfg_dense(dir: &Path) -> String {
    write(
        dir,
        "dense.toml",
        &SPHERE.replace("points_per_mev = 2", "points_per_mev = 50"),
    )
}

#[test]
fn planar_and_geff_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let planar = write(
        dir.path(),
        "planar.toml",
        "[geometry.planar]\nmirror = { ideal = 0.95 }\nenergy_ev = 2.0\nsweep = { start = 0.3, stop = 0.6, steps = 4 }\n",
    );
    let o = run(&[
        "purcell-planar",
        "-c",
        &planar,
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("purcell_planar.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let family = write(
        dir.path(),
        "family.toml",
        "[geometry.spherical]\n[family]\nbase_energy_ev = 6.808\nenergy_step_ev = -0.4\nbase_dipole = 2.0\ndipole_step = 0.5\nrings = [1, 2]\nbracket_nm = [10, 40]\n",
    );
    let o = run(&["geff", "-c", &family, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("rings 2"));
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("sphere_modes.toml", "modes"),
        ("benzene_spectrum.toml", "spectrum"),
        ("planar_sweep.toml", "purcell-planar"),
        ("acene_geff.toml", "geff"),
    ];
    for (file, command) in cases {
        let dir = tempfile::tempdir().unwrap();
        let cfg = root.join(file);
        let o = run(&[
            command,
            "-c",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--no-timestamp",
        ]);
        assert!(
            o.status.success(),
            "{file}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}
