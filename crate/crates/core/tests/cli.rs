use std::path::PathBuf;
use std::process::Command;

use wigner_check::cli::{run, CheckOutput, ExploreOutput, RatzDemo, RecoverOutput};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn wigner(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["wigner".to_string()];
    argv.extend(args.iter().map(|a| {
        if a.ends_with(".json") {
            fixture(a)
        } else {
            a.to_string()
        }
    }));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Verdict column of the table rows, keyed by condition name.
fn table_verdicts(table: &str) -> Vec<(String, bool)> {
    table
        .lines()
        .filter_map(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            match cols.last() {
                Some(&"pass") if cols.len() == 4 => Some((cols[0].to_string(), true)),
                Some(&"FAIL") if cols.len() == 4 => Some((cols[0].to_string(), false)),
                _ => None,
            }
        })
        .collect()
}

const CHECK_CORPUS: [(&str, i32); 7] = [
    ("linear_isometry.json", 0),
    ("phase_isometry.json", 1),
    ("scaled.json", 1),
    ("perturbed.json", 1),
    ("ratz.json", 1),
    ("abs_one_dim.json", 1),
    ("tabulated_phase.json", 1),
];

#[test]
fn check_exit_codes_and_formats_agree() {
    for (map, expected) in CHECK_CORPUS {
        let (code, json, _) = wigner(&["check", "--map", map, "--plan", "gaussian_plan.json"]);
        assert_eq!(code, expected, "{map}");
        let parsed: CheckOutput = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.pass, code == 0);
        let again: CheckOutput = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
        assert_eq!(again, parsed);

        let (tcode, table, _) = wigner(&["--output", "table", "check", "--map", map, "--plan", "gaussian_plan.json"]);
        assert_eq!(tcode, code);
        let rows = table_verdicts(&table);
        assert_eq!(rows.len(), parsed.reports.len(), "{map}");
        for (r, (name, pass)) in parsed.reports.iter().zip(&rows) {
            assert_eq!(&r.condition.to_string(), name);
            assert_eq!(r.pass, *pass, "{map} {name}");
        }
        assert!(table.contains(if parsed.pass { "overall: pass" } else { "overall: FAIL" }));
    }
}

#[test]
fn phase_isometry_passes_equation_one() {
    let (code, json, _) = wigner(&[
        "check", "--map", "phase_isometry.json", "--plan", "grid_plan.json", "--conditions", "T2_I,T2_II,T2_III,T2_IV,EQ22_2",
    ]);
    assert_eq!(code, 0);
    let parsed: CheckOutput = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed.reports.len(), 5);
    assert_eq!(parsed.samples, 125);
}

#[test]
fn eq22_on_real_maps_is_a_usage_error() {
    let (code, _, err) =
        wigner(&["check", "--map", "linear_isometry.json", "--plan", "gaussian_plan.json", "--conditions", "EQ22_3"]);
    assert_eq!(code, 2);
    assert!(err.contains("complex"));
    let (code, _, _) =
        wigner(&["check", "--map", "linear_isometry.json", "--plan", "gaussian_plan.json", "--conditions", "T9"]);
    assert_eq!(code, 2);
}

#[test]
fn recover_exit_codes() {
    let cases: [(&[&str], i32); 6] = [
        (&["--map", "tabulated_phase.json"], 0),
        (&["--map", "phase_isometry.json", "--plan", "gaussian_plan.json"], 0),
        (&["--map", "abs_one_dim.json", "--plan", "gaussian_plan.json", "--rule", "local"], 0),
        (&["--map", "abs_one_dim.json", "--plan", "gaussian_plan.json"], 0),
        (&["--map", "perturbed.json", "--plan", "gaussian_plan.json"], 1),
        (&["--map", "ratz.json"], 2),
    ];
    for (args, expected) in cases {
        let mut argv = vec!["recover"];
        argv.extend_from_slice(args);
        let (code, json, _) = wigner(&argv);
        assert_eq!(code, expected, "{args:?}");
        if code == 2 {
            continue;
        }
        let parsed: RecoverOutput = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.certified, code == 0);
        argv.splice(0..0, ["--output", "table"]);
        let (tcode, table, _) = wigner(&argv);
        assert_eq!(tcode, code);
        assert!(table.contains(&format!("certified: {}", parsed.certified)));
    }
}

#[test]
fn perturbed_recovery_reports_why() {
    let (_, json, _) = wigner(&["recover", "--map", "perturbed.json", "--plan", "gaussian_plan.json"]);
    let parsed: RecoverOutput = serde_json::from_str(&json).unwrap();
    let failed_fit = parsed.result.as_ref().is_some_and(|r| r.fit_residual > parsed.tol);
    assert!(parsed.error.is_some() || failed_fit);
}

#[test]
fn demo_ratz_round_trips() {
    let (code, json, _) = wigner(&["demo-ratz"]);
    assert_eq!(code, 0);
    let d: RatzDemo = serde_json::from_str(&json).unwrap();
    assert_eq!(d.witness.real_coords(), &[0.0, 0.0, 1.0, 0.0]);
    assert!((d.complex_linear.max_residual - 2.0).abs() <= 1e-12);
    let again: RatzDemo = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(again, d);
}

#[test]
fn explore_configs() {
    for cfg in ["explore_p1.json", "explore_p2.json"] {
        let (code, json, _) = wigner(&["explore", "--config", cfg]);
        assert_eq!(code, 0, "{cfg}");
        let o: ExploreOutput = serde_json::from_str(&json).unwrap();
        assert!(o.controls_pass);
        assert!(o.report.evidence.starts_with("empirical at"));
        let (_, table, _) = wigner(&["--output", "table", "explore", "--config", cfg]);
        for c in &o.report.candidates {
            assert!(table.contains(&c.label));
        }
    }
    let (_, a, _) = wigner(&["--seed", "3", "explore", "--config", "explore_p2.json"]);
    let (_, b, _) = wigner(&["explore", "--config", "explore_p2.json"]);
    let a: ExploreOutput = serde_json::from_str(&a).unwrap();
    let b: ExploreOutput = serde_json::from_str(&b).unwrap();
    assert_eq!(a.report.config.seed, 3);
    assert_ne!(a.report.candidates[0].max_residual, b.report.candidates[0].max_residual);
}

#[test]
fn schema_errors_exit_two_with_line_numbers() {
    let (code, out, err) = wigner(&["check", "--map", "bad_schema.json", "--plan", "gaussian_plan.json"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("line 7"), "{err}");
    let (code, _, err) = wigner(&["check", "--map", "bad_version.json", "--plan", "gaussian_plan.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("schema_version"));
    let (code, _, err) = wigner(&["check", "--map", "gaussian_plan.json", "--plan", "gaussian_plan.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    assert_eq!(wigner(&["recover"]).0, 2);
    assert_eq!(wigner(&["--output", "xml", "demo-ratz"]).0, 2);
}

#[test]
fn tolerance_environment_variable() {
    let bin = env!("CARGO_BIN_EXE_wigner");
    let args = ["check", "--map", &fixture("scaled.json"), "--plan", &fixture("gaussian_plan.json")];
    let status = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(bin);
        c.args(args).args(extra).env_remove("WIGNER_TOL");
        if let Some(v) = env {
            c.env("WIGNER_TOL", v);
        }
        c.output().unwrap().status.code().unwrap()
    };
    assert_eq!(status(None, &[]), 1);
    assert_eq!(status(Some("100"), &[]), 0);
    assert_eq!(status(Some("100"), &["--tol", "1e-9"]), 1);
    assert_eq!(status(Some("tight"), &[]), 2);
}
