//! End-to-end checks of the `hcsc` binary: exit codes, schema, bit-exact
//! round-trips and run-to-run determinism.

use std::process::{Command, Output};

use hirzebruch_csc::csc_profile::solve_closed_form;
use hirzebruch_csc::{MetricProfile, SolverParams};

fn hcsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcsc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn solve_writes_schema_and_round_trips() {
    let out = hcsc(&["solve", "--m", "1", "--scalar-curvature", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let parsed: MetricProfile = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.m, 1);
    assert_eq!(parsed.samples.len(), 512);

    // Field names of the schema, including the serde renames.
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let obj = value.as_object().unwrap();
    for key in [
        "m",
        "scalar_curvature",
        "beta",
        "k",
        "K",
        "T",
        "f_max",
        "generator",
        "samples",
    ] {
        assert!(obj.contains_key(key), "missing key {key}");
    }
    assert_eq!(obj.len(), 9, "unexpected extra fields: {:?}", obj.keys());
    assert_eq!(obj["generator"], "closed_form");

    // Bit-exact agreement with the library and through the round trip.
    let reference = solve_closed_form(&SolverParams::new(1, 8.0).unwrap(), 512).unwrap();
    assert_eq!(
        parsed.consts.t_half.to_bits(),
        reference.consts.t_half.to_bits()
    );
    for (a, b) in parsed.samples.iter().zip(&reference.samples) {
        assert_eq!(a.f.to_bits(), b.f.to_bits());
        assert_eq!(a.fp.to_bits(), b.fp.to_bits());
    }
    let reserialized = serde_json::to_string_pretty(&parsed);
    assert_eq!(format!("{}\n", reserialized.unwrap()), text);
}

#[test]
fn solve_t_is_grid_independent_and_correct() {
    let a = stdout(&hcsc(&["solve", "--m", "1", "--scalar-curvature", "8", "--grid", "64"]));
    let b = stdout(&hcsc(&["solve", "--m", "1", "--scalar-curvature", "8", "--grid", "512"]));
    let ta: MetricProfile = serde_json::from_str(&a).unwrap();
    let tb: MetricProfile = serde_json::from_str(&b).unwrap();
    assert!((ta.consts.t_half - tb.consts.t_half).abs() < 1e-12);
    assert!((ta.consts.t_half - 1.559_084_749_755_411_2).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    // Bad arguments: 2.
    assert_eq!(
        hcsc(&["solve", "--m", "0", "--scalar-curvature", "8"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hcsc(&["solve", "--m", "1", "--scalar-curvature", "8", "--grid", "32"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hcsc(&[
            "solve",
            "--m",
            "1",
            "--scalar-curvature",
            "8",
            "--generator",
            "ivp",
            "--tolerance",
            "1e-3",
        ])
        .status
        .code(),
        Some(2)
    );
    // Success: 0.
    assert_eq!(
        hcsc(&["solve", "--m", "2", "--scalar-curvature", "0"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn curvature_point_conformally_flat() {
    let out = hcsc(&["curvature", "--m", "1", "--scalar-curvature", "8", "--point", "1.0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| -> f64 {
        let i = header.iter().position(|h| *h == name).unwrap();
        row[i].parse().unwrap()
    };
    assert_eq!(col("R"), 6.0);
    for name in ["b1", "b3", "b4", "b1_rho_c", "b3_rho_c", "b4_rho_c", "w_sq"] {
        assert!(col(name).abs() < 1e-12, "{name} = {}", col(name));
    }
}

#[test]
fn curvature_rows_have_constant_r() {
    let out = hcsc(&["curvature", "--m", "1", "--scalar-curvature", "8", "--grid", "64"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let r_idx = header.iter().position(|h| *h == "R").unwrap();
    let route_idx = header.iter().position(|h| *h == "route").unwrap();
    let mut saw_regular = false;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let r: f64 = cells[r_idx].parse().unwrap();
        assert!((r - 8.0).abs() < 1e-10, "row R = {r}");
        if cells[route_idx] == "csc_regular" {
            saw_regular = true;
        }
    }
    assert!(saw_regular, "boundary rows should use the regular route");
}

#[test]
fn report_fields_and_stability_tag() {
    let out = hcsc(&["report", "--m", "1", "--scalar-curvature", "8"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["yamabe"].as_f64().unwrap() - 52.975_162_180_008_93).abs() < 1e-9);
    assert!((v["volume"].as_f64().unwrap() - 43.849_496_999_972_63).abs() < 1e-9);
    assert_eq!(v["stability"], "bound_inconclusive");

    let out = hcsc(&["report", "--m", "1", "--scalar-curvature", "25"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["stability"], "unstable_R_gt_24");
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_hcsc"))
            .args(["sweep", "--m", "1,2", "--scalar-curvature", "0,8", "--t-coefficient", "0,1"])
            .env("HCSC_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("1");
    let b = run("4");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn bachflat_shot_and_grid_search() {
    let out = hcsc(&[
        "bachflat", "--y0", "0.5833333333333334", "--yp0", "-2", "--constant", "paper",
        "--x-max", "0.3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("x,y,yp,termination\n"));
    assert!(text.lines().count() > 2);

    let out = hcsc(&["bachflat", "--grid-search", "--x-max", "1.0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("y0,yp0,termination,min_y,x_at_termination\n"));
    assert_eq!(text.lines().count(), 1 + 8 * 9);

    // y0 = 0 violates the shoot precondition: exit 2.
    assert_eq!(hcsc(&["bachflat", "--y0", "0"]).status.code(), Some(2));
}

#[test]
fn check_passes() {
    let out = hcsc(&["check"]);
    let text = stdout(&out);
    assert!(out.status.success(), "check output:\n{text}");
    assert!(text.contains("PASS duffing_bvp"));
    assert!(text.contains("NOTE erratum_rho_constant"));
    assert!(!text.contains("FAIL"));
}
