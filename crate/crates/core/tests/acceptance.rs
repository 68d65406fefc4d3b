//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::process::Command;
use std::time::{Duration, Instant};

use hopfcycle::expr::{counit, multiply, normalize_chain, RuleSet, ScalarKind};
use hopfcycle::form_lie::{identity_specialization, so_e_basis, total_pairing, verify_selfdual_equivalence, Direction};
use hopfcycle::hochschild::{
    boundary, displayed_residual, generic_residual, hh0_commutator_check, pairing_symbolic, verify_cycle, CycleMode,
};
use hopfcycle::numeric::{
    cyclic_point, evaluate_chain, numeric_zero_check, random_group_point, NumericBindings, NumericOptions, RepPoint,
};
use hopfcycle::sample::{random_chain, random_expr, TermShape};
use hopfcycle::{QMatrix, Status};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CYCLE_LIMIT: Duration = Duration::from_secs(5);
const PAIRING_LIMIT: Duration = Duration::from_secs(30);
const WITNESS_THRESHOLD: f64 = 1e-3;
const EVAL_TOL: f64 = 1e-9;

/// Canonical rendering of `Σ 1 ⊗ v[i,j] ⊗ (E v E⁻¹ − Eᵀ v E⁻ᵀ)[i,j]`.
const GOLDEN_RESIDUAL: &str = "sum{#0,#1,#2,#3} 1 * E[#0,#2] Einv[#3,#1] 1 | v[#0,#1] | v[#2,#3]\n\
sum{#0,#1,#2,#3} -1 * E[#2,#0] Einv[#1,#3] 1 | v[#0,#1] | v[#2,#3]";

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn fail_unless(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn symbolic_cycle() -> Outcome {
    let start = Instant::now();
    let generic = verify_cycle(CycleMode::GenericSign).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let signs = [1, -1]
        .iter()
        .map(|&s| verify_cycle(CycleMode::Sign(s)).map(|r| r.status))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    fail_unless(
        generic.status == Status::ProvedZero && signs.iter().all(|s| *s == Status::ProvedZero) && elapsed < CYCLE_LIMIT,
        format!(
            "epsilon generic -> {:?}, +1/-1 -> {:?}, {:.1} ms",
            generic.status,
            signs,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn generic_e_residual() -> Outcome {
    let g = generic_residual().map_err(|e| e.to_string())?;
    let reduced = g.full.drop_degenerate();
    let golden = reduced.to_string() == GOLDEN_RESIDUAL && reduced == displayed_residual();
    let e = QMatrix::from_i64(&[&[1, 1], &[0, 1]]);
    let opts = NumericOptions {
        samples: 100,
        expect_zero: false,
        ..Default::default()
    };
    let full = numeric_zero_check(&g.full, &e, &opts).map_err(|e| e.to_string())?;
    let shown = numeric_zero_check(&displayed_residual(), &e, &opts).map_err(|e| e.to_string())?;
    let witness = |r: &hopfcycle::VerificationReport| r.witnesses.first().map_or(0.0, |w| w.value);
    fail_unless(
        golden && witness(&full) > WITNESS_THRESHOLD && witness(&shown) > WITNESS_THRESHOLD,
        format!(
            "golden match (modulo degenerate chains): {golden}; max |component| full {:.3e}, displayed {:.3e}; full residual has {} terms",
            witness(&full),
            witness(&shown),
            g.full.len()
        ),
    )
}

fn so_element(rng: &mut ChaCha8Rng, e: &QMatrix) -> QMatrix {
    let n = e.rows();
    let mut f = QMatrix::zeros(n, n);
    for b in so_e_basis(e).unwrap().elements() {
        f = &f + &b.scale(&q(rng.random_range(-5..=5), rng.random_range(1..=4)));
    }
    f
}

fn cap_pairing() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    let mut forms_seen = std::collections::BTreeSet::new();
    for k in 0..100 {
        let n = 2 + k % 4;
        let e = if (k / 4) % 2 == 1 && n % 2 == 0 {
            QMatrix::symplectic(n).unwrap()
        } else {
            QMatrix::identity(n)
        };
        forms_seen.insert((n, e == QMatrix::identity(n)));
        let fs: Vec<QMatrix> = (0..3).map(|_| so_element(&mut rng, &e)).collect();
        let got = pairing_symbolic([&fs[0], &fs[1], &fs[2]], &e).map_err(|e| e.to_string())?;
        if got != -(&(&fs[0] * &fs[1]) * &fs[2]).trace() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    fail_unless(
        mismatches == 0 && elapsed < PAIRING_LIMIT,
        format!(
            "100 triples over {} (N, form) pairs, {mismatches} mismatches, {:.2} s",
            forms_seen.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn casimir_values() -> Outcome {
    // −½ dim g: so(N) has dimension N(N−1)/2, sp(2) has dimension 3
    let cases = [
        ("I3", QMatrix::identity(3), q(-3, 2)),
        ("I4", QMatrix::identity(4), q(-3, 1)),
        ("J2", QMatrix::symplectic(2).unwrap(), q(-3, 2)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, e, want) in cases {
        let (tp, _) = total_pairing(&e).map_err(|e| e.to_string())?;
        ok &= tp.symbolic == want && tp.expected == want;
        parts.push(format!("{name} -> {} (-1/2 tr Omega = {})", tp.symbolic, tp.expected));
    }
    fail_unless(ok, parts.join(", "))
}

fn hypothesis_failure() -> Outcome {
    let lib = total_pairing(&QMatrix::identity(2))
        .map(|_| ())
        .map_err(|e| e.to_string());
    let out = Command::new(env!("CARGO_BIN_EXE_hopfcycle"))
        .args(["casimir-pairing", "--E", "identity", "--N", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let msg = "not semisimple: [g,g] ≠ g";
    let code = out.status.code();
    fail_unless(
        lib == Err(msg.to_string()) && code.is_some_and(|c| c != 0) && stdout.contains(msg),
        format!("library error {lib:?}, CLI exit {code:?}"),
    )
}

fn property_suites() -> Outcome {
    let mut counts = Vec::new();
    let mut failures = 0usize;

    // b∘b = 0 in degrees 2..4
    let shape = TermShape::letters_only(0, 2, 3);
    for k in 0..240u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let c = random_chain(&mut rng, 2 + (k % 3) as usize, 3, &shape);
        let bb = boundary(&boundary(&c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        failures += usize::from(!bb.is_zero());
    }
    counts.push("b∘b 240");

    // idempotence
    let atoms = [ScalarKind::Delta, ScalarKind::FormE, ScalarKind::FormEInv];
    let rich = TermShape::letters_only(0, 3, 3).with_scalars(&atoms, 3);
    let rule_sets = [
        RuleSet::CONTRACT,
        RuleSet::SUBST,
        RuleSet::SUBST_SYM,
        RuleSet::SUBST.with_colin(),
    ];
    for k in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + k);
        let c = random_chain(&mut rng, (k % 3) as usize, 3, &rich);
        let rules = rule_sets[(k % 4) as usize];
        let once = normalize_chain(&c, &rules).map_err(|e| e.to_string())?;
        failures += usize::from(normalize_chain(&once, &rules).map_err(|e| e.to_string())? != once);
    }
    counts.push("idempotence 1000");

    // evaluate ∘ normalize = evaluate, classical and cyclic points
    let skew = QMatrix::from_i64(&[&[1, 1], &[0, 1]]);
    for k in 0..120u64 {
        let (e, rules, cyclic) = match k % 4 {
            0 => (QMatrix::identity(3), RuleSet::SUBST_SYM.with_eps(1), false),
            1 => (QMatrix::symplectic(2).unwrap(), RuleSet::SUBST_SYM.with_eps(-1), false),
            2 => (skew.clone(), RuleSet::SUBST.with_colin(), true),
            _ => (QMatrix::identity(2), RuleSet::SUBST_SYM, true),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + k);
        let shape = TermShape::letters_only(0, 2, e.rows() as u32).with_scalars(&atoms, 2);
        let degree = (k % 3) as usize;
        let c = random_chain(&mut rng, degree, 2, &shape);
        let points: Vec<RepPoint> = (0..=degree as u64)
            .map(|p| {
                if cyclic {
                    cyclic_point(&e, k * 7 + p)
                } else {
                    random_group_point(&e, k * 7 + p).and_then(|g| RepPoint::classical(&g))
                }
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let refs: Vec<&RepPoint> = points.iter().collect();
        let b = NumericBindings::new(&e).map_err(|e| e.to_string())?;
        let before = evaluate_chain(&c, &refs, &b).map_err(|e| e.to_string())?;
        let after = evaluate_chain(&normalize_chain(&c, &rules).map_err(|e| e.to_string())?, &refs, &b)
            .map_err(|e| e.to_string())?;
        let diff = (before - after).iter().map(|z| z.norm()).fold(0.0, f64::max);
        failures += usize::from(diff >= EVAL_TOL);
    }
    counts.push("evaluate∘normalize 120");

    // counit on commutators, plus multiplicativity
    let r = hh0_commutator_check(100, 3, 7).map_err(|e| e.to_string())?;
    failures += usize::from(!r.passed);
    let word_shape = TermShape::letters_only(1, 3, 3).with_scalars(&atoms, 1);
    for k in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(30_000 + k);
        let (x, y) = (
            random_expr(&mut rng, 2, &word_shape),
            random_expr(&mut rng, 2, &word_shape),
        );
        let lhs = counit(&multiply(&x, &y).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let rhs = multiply(
            &counit(&x).map_err(|e| e.to_string())?,
            &counit(&y).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        failures += usize::from(lhs != rhs);
    }
    counts.push("counit(commutator) 100");

    // trace antisymmetry and Casimir centrality on so(E)
    let mut rng = ChaCha8Rng::seed_from_u64(40_000);
    for k in 0..100usize {
        let n = 2 + k % 4;
        let e = if (k / 4) % 2 == 1 && n % 2 == 0 {
            QMatrix::symplectic(n).unwrap()
        } else {
            QMatrix::identity(n)
        };
        let (a, b, c) = (
            so_element(&mut rng, &e),
            so_element(&mut rng, &e),
            so_element(&mut rng, &e),
        );
        let s = (&(&a * &b) * &c).trace() + (&(&a * &c) * &b).trace();
        failures += usize::from(!s.is_zero());
        let omega = so_e_basis(&e).unwrap().casimir_on_v().map_err(|e| e.to_string())?;
        failures += usize::from(!omega.commutator(&a).is_zero());
    }
    counts.push("tr antisymmetry 100");
    counts.push("[Omega,F] 100");

    fail_unless(failures == 0, format!("{}; {failures} failures", counts.join(", ")))
}

fn selfdual() -> Outcome {
    let fwd = verify_selfdual_equivalence(Direction::Forward).map_err(|e| e.to_string())?;
    let bwd = verify_selfdual_equivalence(Direction::Backward).map_err(|e| e.to_string())?;
    let id = identity_specialization().map_err(|e| e.to_string())?;
    fail_unless(
        fwd.passed && bwd.passed && id.passed,
        format!(
            "forward -> {}, backward -> {}, {}",
            fwd.value.unwrap_or_default(),
            bwd.value.unwrap_or_default(),
            id.value.unwrap_or_default()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("symbolic cycle check", symbolic_cycle),
        ("generic-E residual", generic_e_residual),
        ("cap pairing", cap_pairing),
        ("Casimir pairing values", casimir_values),
        ("hypothesis-failure path", hypothesis_failure),
        ("property suites", property_suites),
        ("self-duality replay", selfdual),
    ];
    let mut passed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("PASS [{}] {name}: {detail} ({ms:.0} ms)", k + 1);
            }
            Err(detail) => println!("FAIL [{}] {name}: {detail} ({ms:.0} ms)", k + 1),
        }
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
