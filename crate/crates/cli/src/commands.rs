use std::path::Path;

use loctraj_core::algebra::{phi, regular_rep, universal_norm, CPElement};
use loctraj_core::dynamics::{check_a3, fixed_blocks, orbits, validate, DynSystem};
use loctraj_core::linalg::{is_invertible, min_singular, operator_norm};
use loctraj_core::random;
use loctraj_core::repr::{
    family_verdicts, karideals_check, trajectory_family, FamilyVerdict, LinearRep, NormingWitness,
    TargetAlgebra,
};
use loctraj_core::trajectories::{
    check_b1, check_b2, check_pi_side_iso, invertibility_by_trajectories, nontrivial_mult_probe,
    orbit_reps, phi_iso_check, pi_norm_identity, pi_omega, IsoReport, LocalCheck,
    MAX_INDICATOR_BLOCKS,
};
use loctraj_core::ValidationError;
use serde_json::{json, Value};

use crate::format::{load_element, load_system, load_system_file};
use crate::report::{self, num, Report};
use crate::CliError;

pub const DEFAULT_SAMPLES: usize = 16;
pub const PROBE_TRIALS: usize = 32;

const A3_NOTE: &str = "the block space is finite and discrete, so topological freeness of the \
                       induced action reduces to freeness: no non-identity element fixes a block";
const INDICATOR_NOTE: &str = "localized checks search indicator functions of nonempty block \
                              subsets only; a failure means no indicator candidate works";

fn path_arg(path: &Path) -> Value {
    json!(path.display().to_string())
}

/// Name of the failing invariant group for a validation error.
fn invariant_of(err: &ValidationError) -> &'static str {
    match err {
        ValidationError::Tolerances(_) => "tolerances",
        ValidationError::Shape(_) => "shape",
        ValidationError::CayleyRange { .. }
        | ValidationError::NoIdentity
        | ValidationError::NoInverse { .. }
        | ValidationError::Associativity { .. } => "group",
        ValidationError::NotPermutation { .. }
        | ValidationError::ActionIdentity { .. }
        | ValidationError::ActionComposition { .. } => "action",
        ValidationError::NotUnitary { .. }
        | ValidationError::CocycleIdentity { .. }
        | ValidationError::Cocycle { .. } => "cocycle",
        ValidationError::PartitionCover { .. } | ValidationError::PartitionNotInvariant { .. } => {
            "partition"
        }
    }
}

fn witness_of(err: &ValidationError) -> Value {
    match *err {
        ValidationError::CayleyRange { g, h, value, .. } => json!({"g": g, "h": h, "value": value}),
        ValidationError::NoInverse { g } => json!({"g": g}),
        ValidationError::Associativity { g, h, k } => json!({"g": g, "h": h, "k": k}),
        ValidationError::NotPermutation { g } => json!({"g": g}),
        ValidationError::ActionIdentity { x } => json!({"x": x}),
        ValidationError::ActionComposition { g, h, x } => json!({"g": g, "h": h, "x": x}),
        ValidationError::NotUnitary { g, x } => json!({"g": g, "x": x}),
        ValidationError::CocycleIdentity { x } => json!({"x": x}),
        ValidationError::Cocycle { g, h, x } => json!({"g": g, "h": h, "x": x}),
        ValidationError::PartitionCover { x } => json!({"x": x}),
        ValidationError::PartitionNotInvariant { g, block } => json!({"g": g, "block": block}),
        _ => Value::Null,
    }
}

const INVARIANTS: [&str; 6] = ["tolerances", "shape", "group", "action", "cocycle", "partition"];

/// Parses and validates, reporting each invariant group as `ok`, `failed`
/// or `not_checked`. The second value is false when validation failed.
pub fn validate_cmd(path: &Path) -> Result<(Report, bool), CliError> {
    let file = load_system_file(path)?;
    let mut r = Report::new("validate", json!({"file": path_arg(path)}));
    // Group tables and field shapes are checked while lowering the file.
    let result = match file.to_raw() {
        Ok(raw) => validate(raw).map_err(|err| failure(&err)),
        Err(CliError::Invalid(err)) => Err(failure(&err)),
        Err(CliError::Field { field, message }) => Err(json!({
            "invariant": "shape",
            "message": format!("invalid field `{field}`: {message}"),
            "witness": {"field": field},
        })),
        Err(other) => return Err(other),
    };
    let failed = result.as_ref().err().map(|e| e["invariant"].as_str().unwrap_or("").to_string());
    let mut status = serde_json::Map::new();
    let mut reached = true;
    for name in INVARIANTS {
        let s = if failed.as_deref() == Some(name) {
            reached = false;
            "failed"
        } else if reached {
            "ok"
        } else {
            "not_checked"
        };
        status.insert(name.into(), json!(s));
    }
    r.set("invariants", Value::Object(status));
    match result {
        Ok(sys) => {
            r.set("valid", json!(true));
            r.set("system", report::system_summary(&sys));
            r.set("commutative", json!(sys.is_commutative()));
            Ok((r, true))
        }
        Err(error) => {
            r.set("valid", json!(false));
            r.set("error", error);
            Ok((r, false))
        }
    }
}

fn failure(err: &ValidationError) -> Value {
    json!({"invariant": invariant_of(err), "message": err.to_string(), "witness": witness_of(err)})
}

fn local_check(c: &LocalCheck) -> Value {
    json!({
        "holds": c.holds,
        "candidates": c.candidates,
        "indicator": c.witness,
        "best_indicator": c.best,
        "lhs": num(c.lhs),
        "rhs": num(c.rhs),
    })
}

fn nonempty_subsets(v: &[usize]) -> Vec<Vec<usize>> {
    (1usize..1 << v.len())
        .map(|mask| (0..v.len()).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect())
        .collect()
}

fn restrict(system: &DynSystem, f: &CPElement, d: &[usize]) -> CPElement {
    let mut out = CPElement::zero(system);
    for &g in d {
        out.set_coeff(g, f.coeff(g).clone());
    }
    out
}

/// Kernel witnesses of `Φ`, the deterministic candidates added to every sweep.
fn kernel_candidates(system: &DynSystem) -> Result<Vec<CPElement>, CliError> {
    let iso = phi_iso_check(system)?;
    Ok(iso.witness.into_iter().collect())
}

pub fn conditions(path: &Path, seed: u64, samples: usize) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let grp = sys.group();
    let n_m = sys.blocks().len();
    let mut r = Report::new(
        "conditions",
        json!({"file": path_arg(path), "seed": seed, "samples": samples}),
    );
    r.set("system", report::system_summary(&sys));
    r.set("seed", json!(seed));

    let a3 = check_a3(&sys);
    let a3_witness = grp
        .elements()
        .filter(|&g| g != grp.identity())
        .map(|g| (g, fixed_blocks(&sys, g)))
        .find(|(_, fixed)| !fixed.is_empty())
        .map(|(g, fixed)| json!({"g": g, "fixed_blocks": fixed}));
    r.set("a3", json!({"holds": a3, "witness": a3_witness}));
    r.note(A3_NOTE);
    r.note(INDICATOR_NOTE);

    let kernel = kernel_candidates(&sys)?;
    let mut rng = random::rng(seed);

    // B2 over every block set fixed pointwise by a non-identity element.
    let mut b2_entries = Vec::new();
    let mut b2_holds = true;
    let blocks: Vec<usize> = (0..n_m).collect();
    if n_m > MAX_INDICATOR_BLOCKS {
        return Err(CliError::Core(loctraj_core::Error::Unsupported(format!(
            "{n_m} blocks exceed the indicator search limit of {MAX_INDICATOR_BLOCKS}"
        ))));
    }
    for v in nonempty_subsets(&blocks) {
        let d: Vec<usize> = grp
            .elements()
            .filter(|&g| v.iter().all(|&m| sys.beta(g, m) == m))
            .collect();
        if d.len() < 2 {
            continue;
        }
        let mut candidates: Vec<(String, CPElement)> = kernel
            .iter()
            .enumerate()
            .filter(|(_, w)| w.support().iter().all(|g| d.contains(g)))
            .map(|(i, w)| (format!("kernel_witness_{i}"), w.clone()))
            .collect();
        for i in 0..samples {
            let f = random::cp_element(&mut rng, &sys);
            candidates.push((format!("sample_{i}"), restrict(&sys, &f, &d)));
        }
        let mut failure = Value::Null;
        let checked = candidates.len();
        for (label, f) in candidates {
            let c = check_b2(&sys, &d, &v, &f)?;
            if !c.holds {
                failure = json!({"candidate": label, "check": local_check(&c), "element": report::cp_element(&f)});
                break;
            }
        }
        let holds = failure.is_null();
        b2_holds &= holds;
        b2_entries.push(json!({"v": v, "d": d, "holds": holds, "checked": checked, "failure": failure}));
    }
    let b2_note = if b2_entries.is_empty() {
        Some("no block is fixed by a non-identity element, so every admissible D is {e} and B2 holds trivially")
    } else {
        None
    };
    r.set("b2", json!({"holds": b2_holds, "sweep": b2_entries, "note": b2_note}));

    // B1 on sampled elements at every singleton block set.
    let mut b1_candidates: Vec<(String, CPElement)> = kernel
        .iter()
        .enumerate()
        .map(|(i, w)| (format!("kernel_witness_{i}"), w.clone()))
        .collect();
    for i in 0..samples {
        b1_candidates.push((format!("sample_{i}"), random::cp_element(&mut rng, &sys)));
    }
    let mut b1_failures = Vec::new();
    let mut b1_checked = 0;
    for (label, f) in &b1_candidates {
        for m in 0..n_m {
            let c = check_b1(&sys, f, &[m])?;
            b1_checked += 1;
            if !c.holds {
                b1_failures.push(json!({"candidate": label, "v": [m], "check": local_check(&c)}));
            }
        }
    }
    let sampled_failures = b1_failures
        .iter()
        .filter(|f| f["candidate"].as_str().is_some_and(|s| s.starts_with("sample_")))
        .count();
    r.set(
        "b1",
        json!({
            "holds": b1_failures.is_empty(),
            "all_sampled_hold": sampled_failures == 0,
            "checked": b1_checked,
            "failures": b1_failures,
        }),
    );
    Ok(r)
}

fn iso_value(system: &DynSystem, report: &IsoReport, image: impl Fn(&CPElement) -> f64) -> Value {
    let e = system.group().identity();
    let witness = report.witness.as_ref().map(|w| {
        json!({
            "element": report::cp_element(w),
            "image_norm": num(image(w)),
            "identity_coefficient_norm": num(w.coeff(e).norm()),
        })
    });
    json!({
        "expected_dim": report.expected_dim,
        "achieved_rank": report.achieved_rank,
        "iso": report.iso,
        "kernel": report.kernel.iter().map(report::cp_element).collect::<Vec<_>>(),
        "witness": witness,
    })
}

pub fn isom(path: &Path) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let mut r = Report::new("isom", json!({"file": path_arg(path)}));
    r.set("system", report::system_summary(&sys));
    let phi_report = phi_iso_check(&sys)?;
    let pi_report = check_pi_side_iso(&sys)?;
    let reps = orbit_reps(&sys);
    r.set("phi", iso_value(&sys, &phi_report, |w| operator_norm(&phi(&sys, w))));
    r.set(
        "pi_side",
        iso_value(&sys, &pi_report, |w| {
            reps.iter().map(|rep| operator_norm(&pi_omega(&sys, rep, w))).fold(0.0, f64::max)
        }),
    );
    if !phi_report.iso {
        r.note("Φ has a kernel, so ‖f(e)‖ ≤ ‖Φ(f)‖ fails on the reported witness");
    }
    Ok(r)
}

pub fn invert(path: &Path, element: &Path) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let f = load_element(element, &sys)?;
    let tol = sys.tol();
    let mut r = Report::new(
        "invert",
        json!({"file": path_arg(path), "element": path_arg(element)}),
    );
    r.set("system", report::system_summary(&sys));
    r.set("element", report::cp_element(&f));

    let verdict = invertibility_by_trajectories(&sys, &f)?;
    let reps = orbit_reps(&sys);
    let orbit_values: Vec<Value> = verdict
        .orbits
        .iter()
        .map(|o| {
            json!({
                "orbit": o.orbit,
                "blocks": reps[o.orbit].orbit,
                "norm": num(o.norm),
                "min_singular": num(o.min_singular),
                "invertible": o.invertible,
                "inverse_norm": o.inverse_norm.map(num),
            })
        })
        .collect();
    r.set(
        "trajectories",
        json!({
            "orbits": orbit_values,
            "invertible": verdict.invertible,
            "max_inverse_norm": verdict.max_inverse_norm.map(num),
        }),
    );

    let b = phi(&sys, &f);
    let direct = is_invertible(&b, tol)?;
    r.set(
        "direct",
        json!({"norm": num(operator_norm(&b)), "min_singular": num(min_singular(&b)?), "invertible": direct}),
    );
    let lambda = regular_rep(&sys, &f);
    let regular = is_invertible(&lambda, tol)?;
    r.set(
        "regular",
        json!({"min_singular": num(min_singular(&lambda)?), "invertible": regular}),
    );
    let phi_iso = phi_iso_check(&sys)?.iso;
    r.set(
        "agreement",
        json!({
            "direct": direct == verdict.invertible,
            "direct_meaningful": phi_iso,
            "regular": regular == verdict.invertible,
        }),
    );
    if !phi_iso {
        r.note(
            "Φ is not injective here, so the matrix Φ(f) does not determine invertibility of f in \
             the crossed product; compare with the regular representation instead",
        );
    }
    Ok(r)
}

pub fn norms(path: &Path, element: &Path) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let f = load_element(element, &sys)?;
    let tol = sys.tol();
    let mut r = Report::new(
        "norms",
        json!({"file": path_arg(path), "element": path_arg(element)}),
    );
    r.set("system", report::system_summary(&sys));
    r.set("element", report::cp_element(&f));

    let universal = universal_norm(&sys, &f);
    let phi_norm = operator_norm(&phi(&sys, &f));
    let e = sys.group().identity();
    let a_e = f.coeff(e);
    let reps = orbit_reps(&sys);
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut per_orbit = Vec::new();
    for rep in &reps {
        let n = operator_norm(&pi_omega(&sys, rep, &f));
        if n > best.1 {
            best = (rep.index, n);
        }
        let (lhs, rhs) = pi_norm_identity(&sys, rep, a_e);
        per_orbit.push(json!({
            "orbit": rep.index,
            "blocks": rep.orbit,
            "norm": num(n),
            "identity_coefficient": {"norm": num(lhs), "translate_max": num(rhs)},
        }));
    }
    r.set(
        "norms",
        json!({
            "universal": num(universal),
            "phi": num(phi_norm),
            "identity_coefficient": num(a_e.norm()),
            "orbits": per_orbit,
            "max_orbit": num(best.1),
            "attained_by_orbit": best.0,
        }),
    );
    r.set(
        "verdicts",
        json!({
            "b0_inequality": a_e.norm() <= phi_norm + tol.norm_tol * universal.max(1.0),
            "trajectories_attain_universal": (best.1 - universal).abs() <= 1e-8 * universal.max(1.0),
        }),
    );
    Ok(r)
}

fn norming_witness(w: &Option<(NormingWitness, f64, f64)>) -> Value {
    match w {
        None => Value::Null,
        Some((label, family, target)) => {
            let label = match label {
                NormingWitness::BasisElement(k) => format!("basis_{k}"),
                NormingWitness::Sample(i) => format!("sample_{i}"),
            };
            json!({"element": label, "family_max": num(*family), "target": num(*target)})
        }
    }
}

fn verdict_value(target: &TargetAlgebra, v: &FamilyVerdict) -> Value {
    let w = &target.wedderburn;
    let table: Vec<Value> = (0..w.len())
        .map(|i| json!({"block": i, "dim": w.block_dims[i], "multiplicity": w.multiplicities[i]}))
        .collect();
    json!({
        "rank": target.span.rank(),
        "center_dim": w.center_dim,
        "wedderburn_attempts": w.attempts,
        "blocks": table,
        "faithful": v.faithful,
        "strictly_norming": v.strictly_norming,
        "exhaustive": v.exhaustive,
        "sufficient": v.sufficient,
        "sufficient_sampled": v.sufficient_sampled,
        "transfer_samples": v.transfer_samples,
        "witnesses": {
            "faithful": v.faithful_witness.as_ref().map(report::cp_element),
            "strictly_norming": norming_witness(&v.norming_witness),
            "exhaustive_block": v.exhaustive_witness,
            "sufficient": v.sufficient_witness.as_ref().map(report::cp_element),
        },
    })
}

pub fn family(path: &Path, orbit_filter: Option<&[usize]>, seed: u64) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let mut r = Report::new(
        "family",
        json!({"file": path_arg(path), "orbits": orbit_filter, "seed": seed}),
    );
    r.set("system", report::system_summary(&sys));
    r.set("seed", json!(seed));
    let all = trajectory_family(&sys);
    let members: Vec<LinearRep> = match orbit_filter {
        None => all,
        Some(keep) => {
            if let Some(&bad) = keep.iter().find(|&&i| i >= all.len()) {
                return Err(CliError::Field {
                    field: "--orbits".into(),
                    message: format!("orbit {bad} out of range (the system has {} orbits)", all.len()),
                });
            }
            all.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, m)| m).collect()
        }
    };
    if members.is_empty() {
        return Err(CliError::Field {
            field: "--orbits".into(),
            message: "the family must keep at least one orbit".into(),
        });
    }
    r.set("members", json!(members.iter().map(|m| m.name.clone()).collect::<Vec<_>>()));

    let crossed = TargetAlgebra::crossed_product(&sys)?;
    let v = family_verdicts(&sys, &members, &crossed, seed)?;
    let mut targets = serde_json::Map::new();
    targets.insert("crossed_product".into(), verdict_value(&crossed, &v));
    if phi_iso_check(&sys)?.iso {
        let concrete = TargetAlgebra::concrete(&sys)?;
        let v = family_verdicts(&sys, &members, &concrete, seed)?;
        targets.insert("concrete".into(), verdict_value(&concrete, &v));
    } else {
        r.note("Φ is not injective, so the concrete algebra is not a copy of the crossed product and is skipped");
    }
    r.set("targets", Value::Object(targets));

    let kar: Vec<Value> = orbit_reps(&sys)
        .iter()
        .map(|rep| {
            let k = karideals_check(&sys, rep);
            json!({"orbit": rep.index, "holds": k.holds, "note": k.note})
        })
        .collect();
    r.set("orbit_ideals", json!(kar));
    r.note(
        "sufficient combines the exact exhaustive criterion with a sampled invertibility \
         transfer; sufficient_sampled alone is a heuristic",
    );
    Ok(r)
}

pub fn witness(path: &Path, seed: u64) -> Result<Report, CliError> {
    let sys = load_system(path)?;
    let grp = sys.group();
    let mut r = Report::new("witness", json!({"file": path_arg(path), "seed": seed}));
    r.set("system", report::system_summary(&sys));
    r.set("seed", json!(seed));

    let iso = phi_iso_check(&sys)?;
    let e = grp.identity();
    r.set(
        "b0",
        match &iso.witness {
            None => json!(null),
            Some(w) => json!({
                "element": report::cp_element(w),
                "phi_norm": num(operator_norm(&phi(&sys, w))),
                "identity_coefficient_norm": num(w.coeff(e).norm()),
            }),
        },
    );

    let fixing: Vec<Value> = grp
        .elements()
        .filter(|&g| g != e)
        .filter_map(|g| {
            let fixed = fixed_blocks(&sys, g);
            (!fixed.is_empty()).then(|| json!({"g": g, "fixed_blocks": fixed}))
        })
        .collect();
    r.set("a3", json!(fixing));

    // The B0 witness tested at each block its support fixes.
    let mut b2 = Vec::new();
    if let Some(w) = &iso.witness {
        let d = w.support();
        for m in 0..sys.blocks().len() {
            if d.iter().all(|&g| sys.beta(g, m) == m) {
                let c = check_b2(&sys, &d, &[m], w)?;
                if !c.holds {
                    b2.push(json!({"v": [m], "d": d, "check": local_check(&c)}));
                }
            }
        }
    }
    r.set("b2", json!(b2));

    if sys.is_commutative() {
        let probe = nontrivial_mult_probe(&sys, PROBE_TRIALS, seed)?;
        let cex = probe.counterexample.as_ref().map(|c| {
            json!({
                "a": report::a_element(&c.a),
                "coefficients": c.coefficients.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "b": report::matrix(&c.b),
            })
        });
        r.set(
            "zero_product",
            json!({
                "counterexample": cex,
                "points_checked": probe.points_checked,
                "random_trials": probe.random_trials,
            }),
        );
    } else {
        r.set("zero_product", Value::Null);
        r.note("the zero-product probe needs scalar fibers and singleton blocks; skipped");
    }
    let orbit_count = orbits(&sys).len();
    r.set("orbit_count", json!(orbit_count));
    Ok(r)
}
