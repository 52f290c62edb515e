mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use mscheme::cli::Table;
use mscheme::solver::steady_state_for;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mscheme"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sweep_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let o = run(&["sweep", "--set", "preset=fig1a", "--output", name], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn preset_sweep_reproduces_library_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--set", "preset=fig1a"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = Table::read(&dir.path().join("fig1a_sweep.csv")).unwrap();
    assert_eq!(table.rows.len(), 161);
    assert_eq!(
        table.header.join(","),
        "axis,rho11,rho22,rho33,rho44,rho55,p0,p1,p2,p3,p4,eps0,eps1,eps2,eps3,eps4,residual,gap,dominant_pair"
    );
    let axis = table.real_column("axis").unwrap();
    let i = axis.iter().position(|&x| x == 20.0).unwrap();
    let pops = steady_state_for(&baseline(20.0)).unwrap().state.populations();
    for (k, want) in pops.iter().enumerate() {
        let got = table.real_column(&format!("rho{0}{0}", k + 1)).unwrap()[i];
        assert_eq!(got, *want);
    }
}

#[test]
fn list_presets_shows_baseline_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--list-presets"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in [
        "[fig1a]",
        "[fig1b]",
        "[fig2]",
        "[fig3a]",
        "omega3 = 0.01",
        "gamma_d = 0.01",
        "delta1 = 0",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn unknown_key_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"params": {"gamma52": 1}}"#).unwrap();
    let o = run(&["steady", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("params.gamma52"));
}

#[test]
fn negative_rate_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["steady", "--set", "preset=fig1a", "--set", "gamma25=-1"], dir.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("gamma25"));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let cases: [(&[&str], i32); 5] = [
        (&["steady", "--config", "bad.json"], 3),
        (&["steady", "--set", "gamma12=1"], 7),
        (&["steady", "--config", "missing.json"], 11),
        (
            &["sweep", "--set", "preset=fig1a", "--output", "no/such/dir/out.csv"],
            11,
        ),
        (&["frobnicate"], 2),
    ];
    for (args, code) in cases {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn dressed_without_fields_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "dressed",
            "--set",
            "delta1=3",
            "--set",
            "delta2=1",
            "--set",
            "delta3=4",
            "--set",
            "delta4=-2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&dir.path().join("mscheme_dressed.csv")).unwrap();
    // θ = (0, 3, 2, 6, 8): ε0 = 0 is |1⟩, then ascending.
    let eps = t.real_column("eps").unwrap();
    assert_eq!(eps, vec![0.0, 2.0, 3.0, 6.0, 8.0]);
    let bare_of_label = [1, 3, 2, 4, 5];
    for (row, level) in bare_of_label.iter().enumerate() {
        for k in 1..=5 {
            let re = t.real_column(&format!("u{k}_re")).unwrap()[row];
            let im = t.real_column(&format!("u{k}_im")).unwrap()[row];
            assert_eq!((re, im), (if k == *level { 1.0 } else { 0.0 }, 0.0));
        }
    }
}

#[test]
fn evolve_and_ramp_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "evolve",
            "--set",
            "preset=fig1a",
            "--set",
            "time.t_end=50",
            "--set",
            "time.samples=6",
            "--output",
            "e.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&dir.path().join("e.csv")).unwrap();
    assert_eq!(
        t.header.join(","),
        "t,rho11,rho22,rho33,rho44,rho55,coh12_abs,coh13_abs"
    );
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.real_column("rho11").unwrap()[0], 1.0);

    let o = run(
        &[
            "ramp",
            "--set",
            "preset=fig1a",
            "--set",
            "ramp.duration=20",
            "--set",
            "ramp.samples=3",
            "--output",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&dir.path().join("r.csv")).unwrap();
    assert_eq!(t.header.last().map(String::as_str), Some("tracking_error"));
    assert_eq!(t.real_column("t").unwrap(), vec![0.0, 10.0, 20.0]);
    assert!(t.real_column("tracking_error").unwrap()[0] < 1e-12);
}

#[test]
fn command_may_come_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"preset": "fig1a", "command": "steady", "output": "s.csv"}"#,
    )
    .unwrap();
    let o = run(&["--config", "c.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(Table::read(&dir.path().join("s.csv")).unwrap().rows.len(), 25);
    assert_eq!(run(&[], dir.path()).status.code(), Some(2));
}
