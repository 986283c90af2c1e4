//! Acceptance battery. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};

use loctraj_core::algebra::{alpha, phi, universal_norm, AElement, CPElement};
use loctraj_core::dynamics::DynSystem;
use loctraj_core::linalg::{min_singular, operator_norm, span_basis, CMatrix, C64};
use loctraj_core::repr::{family_verdicts, trajectory_family, LinearRep, TargetAlgebra, WedderburnData};
use loctraj_core::trajectories::{
    b0_witness, check_b1, check_b2, check_b2prev, check_pi_side_iso, invertibility_by_trajectories,
    orbit_reps, phi_iso_check, pi_omega, pi_prime,
};
use loctraj_core::{fixtures, random};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn nonempty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (1usize..1 << items.len())
        .map(|mask| (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect())
        .collect()
}

fn a_norm(sys: &DynSystem, a: &AElement) -> f64 {
    (0..sys.points()).map(|x| operator_norm(a.block(x))).fold(0.0, f64::max)
}

fn restrict(sys: &DynSystem, f: &CPElement, d: &[usize]) -> CPElement {
    let mut out = CPElement::zero(sys);
    for &g in d {
        out.set_coeff(g, f.coeff(g).clone());
    }
    out
}

fn stabilizer(sys: &DynSystem, v: &[usize]) -> Vec<usize> {
    sys.group().elements().filter(|&g| v.iter().all(|&m| sys.beta(g, m) == m)).collect()
}

fn faithfulness_over_a() -> Outcome {
    let mut worst = 0.0f64;
    for (name, sys) in fixtures::all() {
        let reps = orbit_reps(&sys);
        let e = sys.group().identity();
        let mut rng = random::rng(101);
        for i in 0..100 {
            let a = random::a_element(&mut rng, &sys);
            let f = CPElement::delta(&sys, e, a.clone());
            let norms: Vec<f64> = reps.iter().map(|r| operator_norm(&pi_omega(&sys, r, &f))).collect();
            let (arg, best) = norms
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &n)| if n > acc.1 { (k, n) } else { acc });
            let direct = a_norm(&sys, &a);
            let err = rel(best, direct);
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("{name} sample {i}: {best} vs {direct}"))?;
            // The attaining orbit must carry a fiber block where ‖a‖ is reached.
            let on_orbit = reps[arg]
                .orbit
                .iter()
                .flat_map(|&m| sys.blocks()[m].iter())
                .map(|&x| operator_norm(a.block(x)))
                .fold(0.0, f64::max);
            ensure(rel(on_orbit, direct) <= 1e-10, || format!("{name} sample {i}: orbit {arg} does not attain"))?;
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn norm_lemma() -> Outcome {
    let mut worst = 0.0f64;
    for (name, sys) in fixtures::all() {
        let grp = sys.group();
        let e = grp.identity();
        let mut rng = random::rng(102);
        for rep in orbit_reps(&sys) {
            for i in 0..100 {
                let a = random::a_element(&mut rng, &sys);
                let lhs = operator_norm(&pi_omega(&sys, &rep, &CPElement::delta(&sys, e, a.clone())));
                let rhs = grp
                    .elements()
                    .map(|g| operator_norm(&pi_prime(&rep, &alpha(&sys, grp.inv(g), &a))))
                    .fold(0.0, f64::max);
                let err = rel(lhs, rhs);
                worst = worst.max(err);
                ensure(err <= 1e-10, || format!("{name} orbit {} sample {i}: {lhs} vs {rhs}", rep.index))?;
            }
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn faithfulness_on_crossed_product() -> Outcome {
    let mut worst = 0.0f64;
    for (name, sys) in fixtures::all() {
        let reps = orbit_reps(&sys);
        let mut rng = random::rng(103);
        for i in 0..100 {
            let f = random::cp_element(&mut rng, &sys);
            let best = reps.iter().map(|r| operator_norm(&pi_omega(&sys, r, &f))).fold(0.0, f64::max);
            let universal = universal_norm(&sys, &f);
            let err = rel(best, universal);
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("{name} sample {i}: {best} vs {universal}"))?;
        }
        let iso = check_pi_side_iso(&sys).map_err(|e| format!("{name}: {e}"))?;
        ensure(iso.iso, || format!("{name}: trajectory side has a kernel"))?;
    }
    Ok(format!("max relative error {worst:.2e}, trajectory side iso on every fixture"))
}

fn isomorphism_decision() -> Outcome {
    let expected = [
        ("s1", 9, 9),
        ("s2", 1, 2),
        ("s3", 5, 6),
        ("s3_twisted", 5, 6),
        ("s4", 4, 4),
        ("s5", 64, 64),
    ];
    let mut summary = Vec::new();
    for ((name, sys), (want, rank, dim)) in fixtures::all().into_iter().zip(expected) {
        ensure(name == want, || format!("fixture order changed: {name}"))?;
        let r = phi_iso_check(&sys).map_err(|e| format!("{name}: {e}"))?;
        ensure((r.achieved_rank, r.expected_dim) == (rank, dim), || {
            format!("{name}: rank {}/{} expected {rank}/{dim}", r.achieved_rank, r.expected_dim)
        })?;
        ensure(r.iso == (rank == dim), || format!("{name}: iso verdict {}", r.iso))?;
        if !r.iso {
            let w = r.witness.as_ref().ok_or_else(|| format!("{name}: no witness"))?;
            let image = operator_norm(&phi(&sys, w));
            let unit = w.coeff(sys.group().identity()).norm();
            ensure(image <= 1e-10, || format!("{name}: ‖Φ(w)‖ = {image}"))?;
            ensure((unit - 1.0).abs() <= 1e-10, || format!("{name}: ‖w(e)‖ = {unit}"))?;
        }
        summary.push(format!("{name} {rank}/{dim}"));
    }
    Ok(summary.join(", "))
}

fn equivalence_battery() -> Outcome {
    let mut checks = 0usize;
    for (name, sys) in fixtures::all() {
        if !phi_iso_check(&sys).map_err(|e| e.to_string())?.iso {
            continue;
        }
        let blocks: Vec<usize> = (0..sys.blocks().len()).collect();
        let all_v = nonempty_subsets(&blocks);
        let e = sys.group().identity();
        let mut rng = random::rng(105);
        for i in 0..50 {
            let f = random::cp_element(&mut rng, &sys);
            for v in &all_v {
                let b1 = check_b1(&sys, &f, v).map_err(|e| e.to_string())?;
                ensure(b1.holds, || format!("{name} sample {i}: B1 fails at {v:?}"))?;
                checks += 1;
                let others: Vec<usize> = stabilizer(&sys, v).into_iter().filter(|&g| g != e).collect();
                for extra in std::iter::once(Vec::new()).chain(nonempty_subsets(&others)) {
                    let mut d = vec![e];
                    d.extend(extra);
                    let b2 = check_b2(&sys, &d, v, &restrict(&sys, &f, &d)).map_err(|e| e.to_string())?;
                    ensure(b2.holds, || format!("{name} sample {i}: B2 fails at V={v:?} D={d:?}"))?;
                    checks += 1;
                }
            }
        }
    }
    for (name, sys) in [("s3", fixtures::s3()), ("s3_twisted", fixtures::s3_twisted())] {
        let e = sys.group().identity();
        let ind = AElement::point_indicator(&sys, &[2]);
        let twist = sys.cocycle(1, 2)[(0, 0)];
        let cancel = CPElement::delta(&sys, e, ind.clone()).sub(&CPElement::delta(&sys, 1, ind.scale(twist)));
        ensure(operator_norm(&phi(&sys, &cancel)) <= 1e-10, || format!("{name}: cancellation not in kernel"))?;
        let b2 = check_b2(&sys, &[e, 1], &[2], &cancel).map_err(|e| e.to_string())?;
        ensure(!b2.holds, || format!("{name}: B2 search succeeded on the cancellation element"))?;
        let b1 = check_b1(&sys, &cancel, &[2]).map_err(|e| e.to_string())?;
        ensure(!b1.holds, || format!("{name}: B1 search succeeded on the cancellation element"))?;
        // The kernel witness produced by the solver fails the same way.
        let w = b0_witness(&sys, &cancel).map_err(|e| e.to_string())?;
        ensure(!check_b2(&sys, &[e, 1], &[2], &w).map_err(|e| e.to_string())?.holds, || {
            format!("{name}: B2 search succeeded on the normalized witness")
        })?;
    }
    Ok(format!("{checks} localized checks on iso fixtures, search fails at V={{2}} on s3"))
}

fn invertibility_criterion() -> Outcome {
    let mut singular = 0usize;
    for (name, sys) in [("s1", fixtures::s1()), ("s4", fixtures::s4()), ("s5", fixtures::s5())] {
        let e = sys.group().identity();
        let mut rng = random::rng(106);
        for i in 0..200 {
            let mut f = random::cp_element(&mut rng, &sys);
            if rng.random_bool(0.25) {
                f = f.sub(&CPElement::delta(&sys, e, f.coeff(e).clone()));
            }
            let verdict = invertibility_by_trajectories(&sys, &f).map_err(|e| e.to_string())?;
            let b = phi(&sys, &f);
            let oracle = min_singular(&b).map_err(|e| e.to_string())? > 1e-8 * operator_norm(&b);
            ensure(verdict.invertible == oracle, || format!("{name} sample {i}: verdict {}", verdict.invertible))?;
            singular += usize::from(!oracle);
        }
    }
    let sys = fixtures::s1();
    let e = sys.group().identity();
    let member = |t: f64| {
        CPElement::delta(&sys, e, AElement::identity(&sys))
            .add(&CPElement::delta(&sys, 1, AElement::identity(&sys).scale(C64::new(t, 0.0))))
    };
    let smallest = |t: f64| -> Result<(f64, bool), String> {
        let f = member(t);
        let v = invertibility_by_trajectories(&sys, &f).map_err(|e| e.to_string())?;
        let direct = min_singular(&phi(&sys, &f)).map_err(|e| e.to_string())?;
        let traj = v.orbits.iter().map(|o| o.min_singular).fold(f64::INFINITY, f64::min);
        ensure(rel(direct.max(1e-300), traj.max(1e-300)) < 1e-6 || (direct < 1e-12 && traj < 1e-12), || {
            format!("t={t}: trajectory {traj} vs direct {direct}")
        })?;
        Ok((direct, v.invertible))
    };
    let (at_minus_one, inv1) = smallest(-1.0)?;
    ensure(at_minus_one < 1e-8 && !inv1, || format!("t=-1: min singular {at_minus_one}"))?;
    let (at_minus_two, inv2) = smallest(-2.0)?;
    ensure(at_minus_two > 1e-3 && inv2, || format!("t=-2: min singular {at_minus_two}"))?;
    for k in 0..=40 {
        let t = -3.0 + 0.1 * k as f64;
        if (t + 1.0).abs() < 1e-9 {
            continue;
        }
        let (s, inv) = smallest(t)?;
        ensure(s > 1e-3 && inv, || format!("t={t}: unexpected singularity {s}"))?;
    }
    Ok(format!("600 samples ({singular} singular), family singular only at t=-1"))
}

fn b2prev_inequality() -> Outcome {
    let mut worst = f64::INFINITY;
    for (name, sys) in fixtures::all() {
        let blocks: Vec<usize> = (0..sys.blocks().len()).collect();
        let all_v = nonempty_subsets(&blocks);
        let mut rng = random::rng(107);
        for i in 0..100 {
            let f = random::cp_element(&mut rng, &sys);
            let v = &all_v[rng.random_range(0..all_v.len())];
            let c = check_b2prev(&sys, &f, v).map_err(|e| e.to_string())?;
            worst = worst.min(c.lhs - c.rhs);
            ensure(c.lhs >= c.rhs - 1e-10, || format!("{name} sample {i}: {} < {}", c.lhs, c.rhs))?;
        }
    }
    Ok(format!("smallest margin {worst:.2e}"))
}

fn family_equivalences() -> Outcome {
    for (name, sys) in fixtures::all() {
        let target = TargetAlgebra::crossed_product(&sys).map_err(|e| e.to_string())?;
        let v = family_verdicts(&sys, &trajectory_family(&sys), &target, 108).map_err(|e| e.to_string())?;
        let all = [v.faithful, v.strictly_norming, v.exhaustive, v.sufficient];
        ensure(all.iter().all(|&b| b == all[0]), || format!("{name}: verdicts disagree {all:?}"))?;
        ensure(all[0], || format!("{name}: trajectory family rejected"))?;
    }
    for (name, sys) in [("s3", fixtures::s3()), ("s3_twisted", fixtures::s3_twisted())] {
        let target = TargetAlgebra::crossed_product(&sys).map_err(|e| e.to_string())?;
        let partial: Vec<LinearRep> = trajectory_family(&sys).into_iter().take(1).collect();
        let v = family_verdicts(&sys, &partial, &target, 108).map_err(|e| e.to_string())?;
        ensure(!v.exhaustive, || format!("{name}: partial family still exhaustive"))?;
        let all = [v.faithful, v.strictly_norming, v.exhaustive, v.sufficient];
        ensure(all.iter().all(|&b| !b), || format!("{name}: partial verdicts disagree {all:?}"))?;
        let block = v.exhaustive_witness.ok_or_else(|| format!("{name}: no block witness"))?;
        // The witness block is annihilated by every member.
        let e_i = &target.wedderburn.projections[block];
        let f = realize_projection(&sys, &target, e_i)?;
        ensure(operator_norm(&partial[0].apply(&f)) < 1e-8, || format!("{name}: member sees block {block}"))?;
    }
    Ok("all verdicts true on every fixture; dropping the fixed orbit on s3 gives a block witness".into())
}

/// Pulls a matrix of the target span back to the crossed product.
fn realize_projection(sys: &DynSystem, target: &TargetAlgebra, m: &CMatrix) -> Result<CPElement, String> {
    let span = span_basis(target.realization.images(), sys.tol()).map_err(|e| e.to_string())?;
    let x = span.generator_weights(m).ok_or("span has no generator map")?;
    let f = CPElement::from_coordinates(sys, &x).map_err(|e| e.to_string())?;
    ensure(target.realization.apply(&f).max_abs_diff(m) < 1e-8, || "projection outside the span".into())?;
    Ok(f)
}

fn check_wedderburn(name: &str, basis: &[CMatrix], w: &WedderburnData, seed: u64) -> Result<(), String> {
    let size = basis[0].rows();
    let dims_squared: usize = w.block_dims.iter().map(|d| d * d).sum();
    ensure(dims_squared == basis.len(), || format!("{name}: Σd² = {dims_squared}, rank {}", basis.len()))?;
    let mut sum = CMatrix::zeros(size, size);
    for e in &w.projections {
        sum = &sum + e;
    }
    let gap = sum.max_abs_diff(&CMatrix::identity(size));
    ensure(gap < 1e-10, || format!("{name}: Σe_i differs from I by {gap:.2e}"))?;
    let mut rng = random::rng(seed);
    for i in 0..100 {
        let mut b = CMatrix::zeros(size, size);
        for m in basis {
            b = &b + &m.scale(random::complex(&mut rng));
        }
        let best = w.block_norms(&b).into_iter().fold(0.0, f64::max);
        let err = rel(best, operator_norm(&b));
        ensure(err < 1e-10, || format!("{name} sample {i}: reconstruction error {err:.2e}"))?;
    }
    Ok(())
}

fn wedderburn_sanity() -> Outcome {
    let mut spans = 0;
    for (name, sys) in fixtures::all() {
        for (label, target) in [
            ("A⋊G", TargetAlgebra::crossed_product(&sys)),
            ("B", TargetAlgebra::concrete(&sys)),
        ] {
            let t = target.map_err(|e| format!("{name} {label}: {e}"))?;
            check_wedderburn(&format!("{name} {label}"), t.span.basis(), &t.wedderburn, 109)?;
            spans += 1;
        }
    }
    Ok(format!("{spans} spans decomposed"))
}

fn determinism() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_tl"))
            .current_dir(&root)
            .args(["conditions", "fixtures/s3", "--seed", "7", "--json"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (first, second) = (run()?, run()?);
    ensure(first.status.success(), || format!("exit status {}", first.status))?;
    ensure(first.stdout == second.stdout, || "outputs differ".into())?;
    Ok(format!("{} identical bytes", first.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("faithfulness over A", faithfulness_over_a),
        ("norm lemma", norm_lemma),
        ("faithfulness on the crossed product", faithfulness_on_crossed_product),
        ("isomorphism decision", isomorphism_decision),
        ("equivalence battery", equivalence_battery),
        ("invertibility criterion", invertibility_criterion),
        ("B2prev inequality", b2prev_inequality),
        ("family equivalences", family_equivalences),
        ("Wedderburn sanity", wedderburn_sanity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (label, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:2} {label}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:2} {label}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
