use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loctraj_cli::format::{load_system_file, parse_system, to_toml, SystemFile};
use loctraj_core::dynamics::RawSystem;
use loctraj_core::fixtures;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn tl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tl"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("tl runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = tl(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Compares against `tests/golden/<name>`; `BLESS=1` rewrites the file.
fn golden(name: &str, args: &[&str]) {
    let out = tl(args);
    assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let want = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden {name}; run with BLESS=1"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&want), "{name}");
}

fn fixture_paths() -> Vec<(String, PathBuf)> {
    let mut paths: Vec<(String, PathBuf)> = std::fs::read_dir(root().join("fixtures"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), p))
        .collect();
    paths.sort();
    paths
}

fn assert_same_raw(name: &str, a: &RawSystem, b: &RawSystem) {
    assert_eq!(a.cayley, b.cayley, "{name}");
    assert_eq!(a.sigma, b.sigma, "{name}");
    assert_eq!(a.points, b.points, "{name}");
    assert_eq!(a.fiber_dim, b.fiber_dim, "{name}");
    assert_eq!(a.tolerances, b.tolerances, "{name}");
    let blocks = |r: &RawSystem| {
        r.z_partition.clone().unwrap_or_else(|| (0..r.points).map(|x| vec![x]).collect())
    };
    assert_eq!(blocks(a), blocks(b), "{name}");
    let n = a.fiber_dim;
    let cocycle = |r: &RawSystem, g: usize, x: usize| match &r.cocycle {
        Some(table) => table[g][x].clone(),
        None => loctraj_core::CMatrix::identity(n),
    };
    for g in 0..a.cayley.len() {
        for x in 0..a.points {
            assert!(cocycle(a, g, x).max_abs_diff(&cocycle(b, g, x)) < 1e-15, "{name}: V_{g}({x})");
        }
    }
}

#[test]
fn fixture_files_round_trip() {
    let core: Vec<(&str, RawSystem)> = vec![
        ("s1", fixtures::s1_raw()),
        ("s2", fixtures::s2_raw()),
        ("s3", fixtures::s3_raw()),
        ("s3_twisted", fixtures::s3_twisted_raw()),
        ("s4", fixtures::s4_raw()),
        ("s5", fixtures::s5_raw()),
    ];
    let files = fixture_paths();
    assert_eq!(files.len(), core.len());
    for ((name, path), (core_name, core_raw)) in files.iter().zip(&core) {
        assert_eq!(name, core_name);
        let file = load_system_file(path).unwrap();
        let reparsed = parse_system(&to_toml(&file)).unwrap();
        assert_eq!(reparsed, file, "{name}");
        let raw = file.to_raw().unwrap();
        assert_same_raw(name, &raw, core_raw);
        // The canonical form lowers to the same system.
        let canonical = parse_system(&to_toml(&SystemFile::canonical(&raw))).unwrap();
        assert_same_raw(name, &canonical.to_raw().unwrap(), core_raw);
    }
}

#[test]
fn golden_reports() {
    golden("isom_s3.json", &["isom", "fixtures/s3", "--json"]);
    golden(
        "invert_s1_t_minus_2.json",
        &["invert", "fixtures/s1", "--element", "fixtures/elements/s1_t_minus_2", "--json"],
    );
    golden("validate_s4.txt", &["validate", "fixtures/s4"]);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["conditions", "fixtures/s3", "--seed", "7", "--json"][..],
        &["family", "fixtures/s5", "--seed", "3"],
        &["witness", "fixtures/s3_twisted"],
    ] {
        let (a, b) = (tl(args), tl(args));
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    // A different seed changes the samples but not the verdicts.
    let a = json(&["conditions", "fixtures/s1", "--seed", "1"]);
    let b = json(&["conditions", "fixtures/s1", "--seed", "2"]);
    assert_eq!(a["b1"]["holds"], b["b1"]["holds"]);
}

#[test]
fn input_errors_exit_with_two() {
    let out = tl(&["isom", "fixtures/missing"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));

    let out = tl(&["validate", "crates/cli/tests/data/corrupted_cayley.toml", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["invariants"]["group"], "failed");
    assert_eq!(report["error"]["invariant"], "group");
    assert!(report["error"]["witness"].is_object());

    let out = tl(&["validate", "crates/cli/tests/data/non_invariant_partition.toml", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["error"]["invariant"], "partition");
    assert_eq!(report["error"]["witness"]["g"], 1);
    assert_eq!(report["invariants"]["action"], "ok");

    let out = tl(&["conditions", "crates/cli/tests/data/non_invariant_partition.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("partition"));

    let out = tl(&["isom", "crates/cli/tests/data/bad_syntax.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));

    let out = tl(&["invert", "fixtures/s3", "--element", "crates/cli/tests/data/bad_element.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("term[0].g"));

    let out = tl(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn valid_systems_validate() {
    for (name, _) in fixture_paths() {
        let path = format!("fixtures/{name}");
        let report = json(&["validate", &path]);
        assert_eq!(report["valid"], true, "{name}");
        assert!(report["invariants"].as_object().unwrap().values().all(|v| v == "ok"));
        assert!(report["system"]["digest"].as_str().unwrap().starts_with("sha256:"));
    }
    let text = tl(&["validate", "fixtures/s1"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("valid: true"));
}

#[test]
fn conditions_examples() {
    let s1 = json(&["conditions", "fixtures/s1"]);
    assert_eq!(s1["a3"]["holds"], true);
    assert_eq!(s1["b1"]["all_sampled_hold"], true);
    assert_eq!(s1["b2"]["holds"], true);

    let s3 = json(&["conditions", "fixtures/s3"]);
    assert_eq!(s3["a3"]["holds"], false);
    assert_eq!(s3["a3"]["witness"]["g"], 1);
    assert_eq!(s3["a3"]["witness"]["fixed_blocks"], serde_json::json!([2]));
    assert_eq!(s3["b2"]["holds"], false);
    let failing: Vec<&Value> = s3["b2"]["sweep"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|entry| entry["holds"] == false)
        .collect();
    assert!(failing.iter().any(|entry| entry["v"] == serde_json::json!([2])));
    let failure = &failing[0]["failure"];
    assert!(failure["check"]["lhs"].as_f64().unwrap() < 1e-10);
    assert!((failure["check"]["rhs"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let s4 = json(&["conditions", "fixtures/s4"]);
    assert_eq!(s4["a3"]["holds"], false);
    assert_eq!(s4["b2"]["holds"], true);
    assert_eq!(s4["b2"]["sweep"][0]["v"], serde_json::json!([0]));
    assert_eq!(s4["b1"]["holds"], true);
}

#[test]
fn isom_examples() {
    for (name, rank, dim) in [("s1", 9, 9), ("s2", 1, 2), ("s3", 5, 6), ("s4", 4, 4), ("s5", 64, 64)] {
        let r = json(&["isom", &format!("fixtures/{name}")]);
        assert_eq!(r["phi"]["achieved_rank"], rank, "{name}");
        assert_eq!(r["phi"]["expected_dim"], dim, "{name}");
        assert_eq!(r["phi"]["iso"], rank == dim, "{name}");
        assert_eq!(r["pi_side"]["iso"], true, "{name}");
        if rank < dim {
            let w = &r["phi"]["witness"];
            assert!(w["image_norm"].as_f64().unwrap() <= 1e-10);
            assert!((w["identity_coefficient_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn invert_examples() {
    let r = json(&["invert", "fixtures/s1", "--element", "fixtures/elements/s1_t_minus_2"]);
    assert_eq!(r["trajectories"]["invertible"], true);
    assert!((r["direct"]["min_singular"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(r["agreement"]["direct"], true);

    let r = json(&["invert", "fixtures/s1", "--element", "fixtures/elements/s1_t_minus_1"]);
    assert_eq!(r["trajectories"]["invertible"], false);
    assert_eq!(r["regular"]["invertible"], false);
    assert!(r["direct"]["min_singular"].as_f64().unwrap() < 1e-8);

    // On a non-injective Φ the direct test is not meaningful.
    let r = json(&["invert", "fixtures/s2", "--element", "fixtures/elements/s2_difference"]);
    assert_eq!(r["trajectories"]["invertible"], false);
    assert_eq!(r["agreement"]["direct_meaningful"], false);
    assert_eq!(r["agreement"]["regular"], true);
    assert!(r["notes"].as_array().is_some_and(|n| !n.is_empty()));

    let r = json(&["invert", "fixtures/s5", "--element", "fixtures/elements/s5_mixed"]);
    assert_eq!(r["agreement"]["direct"], true);
    assert_eq!(r["agreement"]["regular"], true);
}

#[test]
fn norms_report_the_attaining_orbit() {
    let r = json(&["norms", "fixtures/s5", "--element", "fixtures/elements/s5_mixed"]);
    let n = &r["norms"];
    let universal = n["universal"].as_f64().unwrap();
    let best = n["max_orbit"].as_f64().unwrap();
    assert!((universal - best).abs() <= 1e-8 * universal);
    assert!(n["attained_by_orbit"].is_u64());
    assert!(n["identity_coefficient"].as_f64().unwrap() <= n["phi"].as_f64().unwrap() + 1e-10);
    assert_eq!(r["verdicts"]["trajectories_attain_universal"], true);
}

#[test]
fn family_examples() {
    let r = json(&["family", "fixtures/s1"]);
    for target in ["crossed_product", "concrete"] {
        let t = &r["targets"][target];
        for verdict in ["faithful", "strictly_norming", "exhaustive", "sufficient"] {
            assert_eq!(t[verdict], true, "{target} {verdict}");
        }
    }
    assert_eq!(r["targets"]["concrete"]["blocks"].as_array().unwrap().len(), 1);
    assert_eq!(r["targets"]["concrete"]["blocks"][0]["dim"], 3);

    let r = json(&["family", "fixtures/s3"]);
    let t = &r["targets"]["crossed_product"];
    assert!(["faithful", "strictly_norming", "exhaustive", "sufficient"].iter().all(|v| t[*v] == true));
    assert!(r["targets"]["concrete"].is_null());

    let r = json(&["family", "fixtures/s3", "--orbits", "0"]);
    let t = &r["targets"]["crossed_product"];
    assert_eq!(t["exhaustive"], false);
    let block = t["witnesses"]["exhaustive_block"].as_u64().unwrap() as usize;
    let dims = t["blocks"].as_array().unwrap();
    assert_eq!(dims.iter().find(|b| b["block"] == block).unwrap()["dim"], 1);
}

#[test]
fn witness_lists_every_failure() {
    let r = json(&["witness", "fixtures/s3"]);
    assert!(!r["b0"].is_null());
    assert!(!r["a3"].as_array().unwrap().is_empty());
    assert!(!r["zero_product"].is_null());
    let r = json(&["witness", "fixtures/s1"]);
    assert!(r["b0"].is_null());
    assert!(r["a3"].as_array().unwrap().is_empty());
}
