use hopfcycle::expr::{counit, multiply, normalize, normalize_chain, Expr, RuleSet, ScalarKind};
use hopfcycle::form_lie::{so_e_basis, LieBasis};
use hopfcycle::hochschild::{boundary, derivation_apply, hh0_commutator_check, pairing_symbolic};
use hopfcycle::numeric::{cyclic_point, evaluate_chain, random_group_point, NumericBindings, RepPoint};
use hopfcycle::sample::{random_chain, random_expr, TermShape};
use hopfcycle::QMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FORM_ATOMS: [ScalarKind; 3] = [ScalarKind::Delta, ScalarKind::FormE, ScalarKind::FormEInv];

fn skew_form() -> QMatrix {
    QMatrix::from_i64(&[&[1, 1], &[0, 1]])
}

/// A form together with the rule sets that are sound for it and a point sampler.
struct Setting {
    e: QMatrix,
    rules: Vec<RuleSet>,
    cyclic: bool,
}

fn setting(k: u64) -> Setting {
    let all = RuleSet::SUBST.with_colin();
    match k % 5 {
        0 => Setting {
            e: QMatrix::identity(2),
            rules: vec![RuleSet::SUBST_SYM.with_eps(1), RuleSet::SUBST_SYM, all],
            cyclic: false,
        },
        1 => Setting {
            e: QMatrix::identity(3),
            rules: vec![RuleSet::SUBST_SYM.with_eps(1), all],
            cyclic: false,
        },
        2 => Setting {
            e: QMatrix::symplectic(2).unwrap(),
            rules: vec![RuleSet::SUBST_SYM.with_eps(-1), RuleSet::SUBST_SYM, all],
            cyclic: false,
        },
        3 => Setting {
            e: skew_form(),
            rules: vec![RuleSet::SUBST, all],
            cyclic: true,
        },
        _ => Setting {
            e: QMatrix::identity(2),
            rules: vec![RuleSet::SUBST_SYM.with_eps(1), all],
            cyclic: true,
        },
    }
}

fn point(s: &Setting, seed: u64) -> RepPoint {
    if s.cyclic {
        cyclic_point(&s.e, seed).unwrap()
    } else {
        RepPoint::classical(&random_group_point(&s.e, seed).unwrap()).unwrap()
    }
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn so_element(rng: &mut ChaCha8Rng, basis: &LieBasis) -> QMatrix {
    let n = basis.form().dim();
    let mut f = QMatrix::zeros(n, n);
    for b in basis.elements() {
        let c = BigRational::new(rng.random_range(-4..=4i64).into(), rng.random_range(1..=3i64).into());
        f = &f + &b.scale(&c);
    }
    f
}

fn random_form(rng: &mut ChaCha8Rng) -> QMatrix {
    let n = rng.random_range(2..=5usize);
    if rng.random_bool(0.5) && n % 2 == 0 {
        QMatrix::symplectic(n).unwrap()
    } else {
        QMatrix::identity(n)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_squares_to_zero(seed in any::<u64>(), degree in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(0, 2, 3);
        let c = random_chain(&mut rng, degree, 3, &shape);
        let bb = boundary(&boundary(&c).unwrap()).unwrap();
        prop_assert!(bb.is_zero(), "b(b(c)) = {bb}");
    }

    #[test]
    fn boundary_is_linear(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(0, 2, 3);
        let x = random_chain(&mut rng, 2, 2, &shape);
        let y = random_chain(&mut rng, 2, 2, &shape);
        let lhs = boundary(&x.add(&y).unwrap()).unwrap();
        let rhs = normalize_chain(&boundary(&x).unwrap().add(&boundary(&y).unwrap()).unwrap(), &RuleSet::CONTRACT).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivation_is_leibniz(seed in any::<u64>(), slot in 1u8..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(1, 3, 3).with_scalars(&FORM_ATOMS, 1);
        let x = random_expr(&mut rng, 2, &shape);
        let y = random_expr(&mut rng, 2, &shape);
        let lhs = derivation_apply(slot, &multiply(&x, &y).unwrap()).unwrap();
        let rhs = multiply(&x, &derivation_apply(slot, &y).unwrap())
            .unwrap()
            .add(&multiply(&derivation_apply(slot, &x).unwrap(), &y).unwrap());
        prop_assert_eq!(lhs, normalize(&rhs, &RuleSet::CONTRACT).unwrap());
    }

    #[test]
    fn counit_is_multiplicative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(1, 3, 3).with_scalars(&FORM_ATOMS, 1);
        let x = random_expr(&mut rng, 2, &shape);
        let y = random_expr(&mut rng, 2, &shape);
        let lhs = counit(&multiply(&x, &y).unwrap()).unwrap();
        let rhs = multiply(&counit(&x).unwrap(), &counit(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn counit_kills_commutators(seed in any::<u64>()) {
        let r = hh0_commutator_check(1, 3, seed).unwrap();
        prop_assert!(r.passed, "{:?}", r.notes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), k in 0u64..5, degree in 0usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(0, 3, 3).with_scalars(&FORM_ATOMS, 3);
        let c = random_chain(&mut rng, degree, 3, &shape);
        let mut rule_sets = vec![RuleSet::CONTRACT];
        rule_sets.extend(setting(k).rules);
        for rules in rule_sets {
            let once = normalize_chain(&c, &rules).unwrap();
            let twice = normalize_chain(&once, &rules).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn normalization_preserves_values(seed in any::<u64>(), k in 0u64..5, degree in 0usize..=2) {
        let s = setting(k);
        let n = s.e.rows() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(0, 2, n).with_scalars(&FORM_ATOMS, 2);
        let c = random_chain(&mut rng, degree, 2, &shape);
        let points: Vec<RepPoint> = (0..=degree as u64).map(|p| point(&s, seed.wrapping_add(p))).collect();
        let refs: Vec<&RepPoint> = points.iter().collect();
        let b = NumericBindings::new(&s.e).unwrap();
        let raw = evaluate_chain(&c, &refs, &b).unwrap();
        let mut rule_sets = vec![RuleSet::CONTRACT];
        rule_sets.extend(s.rules);
        for rules in rule_sets {
            let got = evaluate_chain(&normalize_chain(&c, &rules).unwrap(), &refs, &b).unwrap();
            prop_assert!(max_diff(&raw, &got) < 1e-9, "{rules:?}: {}", max_diff(&raw, &got));
        }
    }

    #[test]
    fn evaluation_is_multiplicative(seed in any::<u64>(), k in 0u64..5) {
        let s = setting(k);
        let n = s.e.rows() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TermShape::letters_only(1, 2, n).with_scalars(&FORM_ATOMS, 1);
        let x = random_expr(&mut rng, 2, &shape);
        let y = random_expr(&mut rng, 2, &shape);
        let p = point(&s, seed);
        let b = NumericBindings::new(&s.e).unwrap();
        let lhs = evaluate_chain(multiply(&x, &y).unwrap().chain(), &[&p], &b).unwrap();
        let rhs = evaluate_chain(x.chain(), &[&p], &b).unwrap() * evaluate_chain(y.chain(), &[&p], &b).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pairing_is_minus_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_form(&mut rng);
        let basis = so_e_basis(&e).unwrap();
        let fs: Vec<QMatrix> = (0..3).map(|_| so_element(&mut rng, &basis)).collect();
        let got = pairing_symbolic([&fs[0], &fs[1], &fs[2]], &e).unwrap();
        prop_assert_eq!(got, -(&(&fs[0] * &fs[1]) * &fs[2]).trace());
    }

    #[test]
    fn trace_of_triple_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_form(&mut rng);
        let basis = so_e_basis(&e).unwrap();
        let (a, b, c) = (so_element(&mut rng, &basis), so_element(&mut rng, &basis), so_element(&mut rng, &basis));
        let s = (&(&a * &b) * &c).trace() + (&(&a * &c) * &b).trace();
        prop_assert!(s.is_zero());
    }

    #[test]
    fn bracket_closes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_form(&mut rng);
        let basis = so_e_basis(&e).unwrap();
        let (a, b) = (so_element(&mut rng, &basis), so_element(&mut rng, &basis));
        let c = a.commutator(&b);
        prop_assert!((&(&e * &c) + &(&c.transpose() * &e)).is_zero());
        prop_assert!(basis.coordinates(&c).is_some());
    }

    #[test]
    fn casimir_is_central(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_form(&mut rng);
        let basis = so_e_basis(&e).unwrap();
        let omega = match basis.casimir_on_v() {
            Ok(o) => o,
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let f = so_element(&mut rng, &basis);
        prop_assert!(omega.commutator(&f).is_zero());
        prop_assert_eq!(omega.trace(), BigRational::from_integer(basis.len().into()));
    }
}

#[test]
fn duality_jacobi_and_decomposition() {
    for e in [
        QMatrix::identity(3),
        QMatrix::identity(4),
        QMatrix::identity(5),
        QMatrix::symplectic(2).unwrap(),
        QMatrix::symplectic(4).unwrap(),
    ] {
        let basis = so_e_basis(&e).unwrap();
        let duals = basis.trace_dual_basis().unwrap();
        for (a, fa) in basis.elements().iter().enumerate() {
            for (b, fb) in duals.iter().enumerate() {
                let t = (fa * fb).trace();
                assert_eq!(t, BigRational::from_integer(i64::from(a == b).into()));
            }
        }
        assert!(hopfcycle::form_lie::jacobi_holds(&basis.structure_constants().unwrap()));
        let dec = basis.bracket_decompose().unwrap();
        assert_eq!(dec.reconstruct(e.rows()), dec.omega);
    }
}

#[test]
fn group_points_are_seed_deterministic() {
    let e = QMatrix::identity(4);
    assert_eq!(
        random_group_point(&e, 11).unwrap().g,
        random_group_point(&e, 11).unwrap().g
    );
    let a = cyclic_point(&skew_form(), 4).unwrap();
    let b = cyclic_point(&skew_form(), 4).unwrap();
    assert_eq!(a.v(1, 0), b.v(1, 0));
}

#[test]
fn inverse_relation_numerically() {
    // Σ_k v[i,k] u[k,j] − δ[i,j], closed against E[j,i]
    let one = |c: char| hopfcycle::expr::Index::named(c);
    let vu = Expr::word(
        hopfcycle::Coeff::one(),
        vec![hopfcycle::expr::ScalarAtom::new(ScalarKind::FormE, one('j'), one('i'))],
        vec![
            hopfcycle::expr::Letter::v(one('i'), one('k')),
            hopfcycle::expr::Letter::u(one('k'), one('j')),
        ],
    )
    .unwrap();
    let trace_e = Expr::word(
        hopfcycle::Coeff::one(),
        vec![
            hopfcycle::expr::ScalarAtom::new(ScalarKind::FormE, one('j'), one('i')),
            hopfcycle::expr::ScalarAtom::new(ScalarKind::Delta, one('i'), one('j')),
        ],
        vec![],
    )
    .unwrap();
    let x = vu.sub(&trace_e);
    let e = skew_form();
    let b = NumericBindings::new(&e).unwrap();
    for seed in 0..10 {
        let p = cyclic_point(&e, seed).unwrap();
        let v = evaluate_chain(x.chain(), &[&p], &b).unwrap();
        assert!(v.iter().all(|z| z.norm() < 1e-12));
    }
}
