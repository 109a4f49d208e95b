use std::path::Path;
use std::process::{Command, Output};

use mimo_aging_experiments::parse_config;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-aging"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn list_presets_prints_seven_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("fig2: K=10, M=128, p_u=10 dB, fD Ts sweep"));
}

#[test]
fn smoke_run_writes_csv_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(
        dir.path(),
        &["preset", "fig1", "--trials", "1", "--threads", "2", "--out", "r.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sweep_value,curve_id,value,std_err"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4, "{line}");
        for c in [cols[0], cols[2], cols[3]] {
            assert!(c.parse::<f64>().unwrap().is_finite());
        }
        rows += 1;
    }
    assert_eq!(rows, 7 * 12);
    assert!(!csv.contains('\r'));
    assert!(dir.path().join("fig1_drop.csv").exists());

    let meta = std::fs::read_to_string(dir.path().join("r.csv.meta")).unwrap();
    let config = parse_config(&meta).unwrap();
    assert_eq!((config.trials, config.seed, config.name.as_str()), (1, 1, "fig1"));
}

#[test]
fn config_file_with_overrides_and_meta_rerun() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.cfg"),
        "[scenario]\npreset = fig3\nvalues = 64, 256\n[uplink]\npred_orders = 1\n",
    )
    .unwrap();
    let out = cli(
        dir.path(),
        &["run", "--config", "s.cfg", "--seed", "9", "--set", "uplink.K=4"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(dir.path().join("fig3.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.contains(",asymptote_pred1,"));
    assert!(!text.contains("pred2"));

    let rerun = cli(dir.path(), &["run", "--config", "fig3.csv.meta", "--out", "again.csv"]);
    assert!(rerun.status.success());
    assert_eq!(std::fs::read(dir.path().join("again.csv")).unwrap(), first);
}

#[test]
fn invalid_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "[uplink]\nK = 20\nM = 10\n").unwrap();
    let out = cli(dir.path(), &["run", "--config", "bad.cfg"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("uplink.M") && err.contains("uplink.K"), "{err}");

    std::fs::write(dir.path().join("dup.cfg"), "[uplink]\nM = 64\nM = 32\n").unwrap();
    let err = String::from_utf8(cli(dir.path(), &["run", "--config", "dup.cfg"]).stderr).unwrap();
    assert!(
        err.contains("duplicate key `uplink.M`") && err.contains("line 3"),
        "{err}"
    );

    let err = String::from_utf8(cli(dir.path(), &["preset", "fig8"]).stderr).unwrap();
    assert!(err.contains("fig8"), "{err}");
}
