//! Bilinear forms, their isometry Lie algebras `so(E)`, trace-form duals,
//! the Casimir operator on `V` and its expression through brackets.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coeff::format_rational;
use crate::expr::{
    evaluate_scalar_network, normalize, specialize_identity_form, Expr, Index, Letter, RuleSet, ScalarAtom,
    ScalarBindings, ScalarKind,
};
use crate::hochschild::{is_compatible, symbolic_pairing_network};
use crate::matrix::QMatrix;
use crate::report::{Status, VerificationReport};
use crate::{Coeff, Error};

/// A non-degenerate bilinear form `<e_i, e_j> = E[i,j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    e: QMatrix,
    inv: QMatrix,
    eps: Option<i8>,
}

impl BilinearForm {
    pub fn new(e: QMatrix) -> Result<Self, Error> {
        if !e.is_square() {
            return Err(Error::DimensionMismatch(format!("E is {}x{}", e.rows(), e.cols())));
        }
        let inv = e.inverse().ok_or(Error::SingularForm)?;
        let t = e.transpose();
        let eps = if t == e {
            Some(1)
        } else if t == -&e {
            Some(-1)
        } else {
            None
        };
        Ok(BilinearForm { e, inv, eps })
    }

    pub fn identity(n: usize) -> Self {
        BilinearForm::new(QMatrix::identity(n)).unwrap()
    }

    pub fn symplectic(n: usize) -> Result<Self, Error> {
        BilinearForm::new(QMatrix::symplectic(n)?)
    }

    pub fn dim(&self) -> usize {
        self.e.rows()
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.e
    }

    pub fn inverse(&self) -> &QMatrix {
        &self.inv
    }

    /// `Some(e)` when `Eᵀ = e E`.
    pub fn eps(&self) -> Option<i8> {
        self.eps
    }

    pub fn preserves(&self, f: &QMatrix) -> bool {
        f.rows() == self.dim() && f.cols() == self.dim() && is_compatible(f, &self.e)
    }
}

/// A basis of a Lie subalgebra of `so(E)`.
#[derive(Clone, Debug)]
pub struct LieBasis {
    form: BilinearForm,
    basis: Vec<QMatrix>,
}

/// `Ω_V = Σ_m F_m1 [F_m2, F_m3]`.
#[derive(Clone, Debug)]
pub struct CasimirDecomposition {
    pub triples: Vec<[QMatrix; 3]>,
    pub omega: QMatrix,
}

/// Linear span membership helper: columns are the vectorized matrices.
fn span_matrix(mats: &[QMatrix], n: usize) -> QMatrix {
    let mut m = QMatrix::zeros(n * n, mats.len());
    for (c, f) in mats.iter().enumerate() {
        for (r, x) in f.vectorize().into_iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    m
}

fn combination(mats: &[QMatrix], coeffs: &[BigRational], n: usize) -> QMatrix {
    let mut acc = QMatrix::zeros(n, n);
    for (m, c) in mats.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = &acc + &m.scale(c);
        }
    }
    acc
}

/// Basis of `{F : E F + Fᵀ E = 0}` by exact nullspace computation.
pub fn so_e_basis(e: &QMatrix) -> Result<LieBasis, Error> {
    let form = BilinearForm::new(e.clone())?;
    let n = form.dim();
    let units: Vec<QMatrix> = (0..n * n)
        .map(|k| {
            let mut u = QMatrix::zeros(n, n);
            u[(k % n, k / n)] = BigRational::one();
            u
        })
        .collect();
    let images: Vec<QMatrix> = units.iter().map(|f| &(e * f) + &(&f.transpose() * e)).collect();
    let basis = span_matrix(&images, n)
        .nullspace()
        .into_iter()
        .map(|v| QMatrix::from_vectorized(n, n, &v))
        .collect();
    Ok(LieBasis { form, basis })
}

impl LieBasis {
    /// Wraps given matrices, checking that they preserve `E` and are independent.
    pub fn from_matrices(e: &QMatrix, basis: Vec<QMatrix>) -> Result<Self, Error> {
        let form = BilinearForm::new(e.clone())?;
        for (k, f) in basis.iter().enumerate() {
            if !form.preserves(f) {
                return Err(Error::InvalidInput(format!(
                    "basis element {k} does not satisfy E·F + Fᵀ·E = 0"
                )));
            }
        }
        if span_matrix(&basis, form.dim()).rank() != basis.len() {
            return Err(Error::InvalidInput("basis elements are linearly dependent".into()));
        }
        Ok(LieBasis { form, basis })
    }

    /// Unchecked variant for families that only need the trace form.
    pub fn from_matrices_unchecked(e: &QMatrix, basis: Vec<QMatrix>) -> Result<Self, Error> {
        Ok(LieBasis {
            form: BilinearForm::new(e.clone())?,
            basis,
        })
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn elements(&self) -> &[QMatrix] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn n(&self) -> usize {
        self.form.dim()
    }

    /// Coordinates of `m` in the basis, if it lies in the span.
    pub fn coordinates(&self, m: &QMatrix) -> Option<Vec<BigRational>> {
        span_matrix(&self.basis, self.n()).solve(&m.vectorize())
    }

    /// `c[a][b][c]` with `[F_a, F_b] = Σ_c c[a][b][c] F_c`.
    pub fn structure_constants(&self) -> Result<Vec<Vec<Vec<BigRational>>>, Error> {
        let span = span_matrix(&self.basis, self.n());
        self.basis
            .iter()
            .map(|a| {
                self.basis
                    .iter()
                    .map(|b| {
                        span.solve(&a.commutator(b).vectorize())
                            .ok_or_else(|| Error::InvalidInput("basis is not closed under the bracket".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// `G[a,b] = tr(F_a F_b)`.
    pub fn gram(&self) -> QMatrix {
        let d = self.len();
        let mut g = QMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                g[(a, b)] = (&self.basis[a] * &self.basis[b]).trace();
            }
        }
        g
    }

    /// `F^a = Σ_b (G⁻¹)[b,a] F_b`, so that `tr(F_a F^b) = δ`.
    pub fn trace_dual_basis(&self) -> Result<Vec<QMatrix>, Error> {
        let ginv = self.gram().inverse().ok_or(Error::DegenerateTraceForm)?;
        let d = self.len();
        Ok((0..d)
            .map(|a| {
                let coeffs: Vec<BigRational> = (0..d).map(|b| ginv[(b, a)].clone()).collect();
                combination(&self.basis, &coeffs, self.n())
            })
            .collect())
    }

    /// `Ω_V = Σ_a F_a F^a`.
    pub fn casimir_on_v(&self) -> Result<QMatrix, Error> {
        let duals = self.trace_dual_basis()?;
        let mut omega = QMatrix::zeros(self.n(), self.n());
        for (f, g) in self.basis.iter().zip(&duals) {
            omega = &omega + &(f * g);
        }
        Ok(omega)
    }

    /// Writes every dual element as a combination of brackets `[F_b, F_c]`,
    /// `b < c`, taking the reduced-echelon solution, and collects the triples.
    pub fn bracket_decompose(&self) -> Result<CasimirDecomposition, Error> {
        let n = self.n();
        let duals = self.trace_dual_basis()?;
        let omega = self.casimir_on_v()?;
        let d = self.len();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|b| (b + 1..d).map(move |c| (b, c))).collect();
        let brackets: Vec<QMatrix> = pairs
            .iter()
            .map(|&(b, c)| self.basis[b].commutator(&self.basis[c]))
            .collect();
        let span = span_matrix(&brackets, n);
        let mut triples = Vec::new();
        for (a, dual) in duals.iter().enumerate() {
            let x = span.solve(&dual.vectorize()).ok_or(Error::NotSemisimple)?;
            for (k, coeff) in x.iter().enumerate() {
                if !coeff.is_zero() {
                    let (b, c) = pairs[k];
                    triples.push([self.basis[a].scale(coeff), self.basis[b].clone(), self.basis[c].clone()]);
                }
            }
        }
        let dec = CasimirDecomposition { triples, omega };
        if dec.reconstruct(n) != dec.omega {
            return Err(Error::InvalidInput(
                "bracket decomposition does not reproduce the Casimir".into(),
            ));
        }
        Ok(dec)
    }
}

impl CasimirDecomposition {
    /// `Σ_m F_m1 [F_m2, F_m3]`.
    pub fn reconstruct(&self, n: usize) -> QMatrix {
        let mut acc = QMatrix::zeros(n, n);
        for [a, b, c] in &self.triples {
            acc = &acc + &(a * &b.commutator(c));
        }
        acc
    }
}

/// Jacobi identity on the structure constants, checked exactly.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_holds(c: &[Vec<Vec<BigRational>>]) -> bool {
    let d = c.len();
    for a in 0..d {
        for b in 0..d {
            for e in 0..d {
                for out in 0..d {
                    let mut s = BigRational::zero();
                    for m in 0..d {
                        s += &c[b][e][m] * &c[a][m][out] + &c[e][a][m] * &c[b][m][out] + &c[a][b][m] * &c[e][m][out];
                    }
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Outcome of the total pairing.
#[derive(Clone, Debug)]
pub struct TotalPairing {
    /// `Σ_m ε(c_V ⌢ φ_m)` through the symbolic engine.
    pub symbolic: BigRational,
    /// `−½ tr(Ω_V)` by matrix arithmetic.
    pub expected: BigRational,
    pub lie_dim: usize,
    pub triples: usize,
}

/// Sums the pairing of `c_V` with the cocycles of the Casimir decomposition.
pub fn total_pairing(e: &QMatrix) -> Result<(TotalPairing, VerificationReport), Error> {
    let start = Instant::now();
    let basis = so_e_basis(e)?;
    let dec = basis.bracket_decompose()?;
    let network = symbolic_pairing_network()?;
    let base = ScalarBindings::with_form(e)?;
    let n = e.rows() as u32;
    let mut symbolic = BigRational::zero();
    for [a, b, c] in &dec.triples {
        let bindings = base.clone().derivations([a, b, c]);
        symbolic += evaluate_scalar_network(&network, &bindings, n)?;
    }
    let expected = -dec.omega.trace() / BigRational::from_integer(2.into());
    let result = TotalPairing {
        symbolic: symbolic.clone(),
        expected: expected.clone(),
        lie_dim: basis.len(),
        triples: dec.triples.len(),
    };
    let agree = symbolic == expected;
    let nonzero = !symbolic.is_zero();
    let mut report = VerificationReport::new(
        "casimir-pairing",
        format!("N={n}"),
        if agree && nonzero {
            Status::Passed
        } else {
            Status::Failed
        },
        agree && nonzero,
    )
    .value(format_rational(&symbolic))
    .note(format!(
        "dim g = {}, {} bracket triples",
        basis.len(),
        dec.triples.len()
    ))
    .note(format!("-1/2 tr(Omega_V) = {}", format_rational(&expected)));
    report = if !agree {
        report.note("mismatch between the symbolic sum and -1/2 tr(Omega_V)")
    } else if nonzero {
        report.note("HH_3 != 0 witness established")
    } else {
        report.note("pairing vanishes: no witness")
    };
    Ok((result, report.timed(start)))
}

/// Direction of the self-duality replay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// From colinearity `Σ E[i,r] v[i,j] v[r,s] = E[j,s]` to `u = E⁻¹ vᵀ E`.
    Forward,
    /// From `u = E⁻¹ vᵀ E` back to colinearity.
    Backward,
}

fn ix(c: char) -> Index {
    Index::named(c)
}

fn sc(kind: ScalarKind, a: char, b: char) -> ScalarAtom {
    ScalarAtom::new(kind, ix(a), ix(b))
}

fn word(coeff: i64, scalars: Vec<ScalarAtom>, letters: Vec<Letter>) -> Result<Expr, Error> {
    Expr::word(Coeff::from_int(coeff), scalars, letters)
}

fn v(a: char, b: char) -> Letter {
    Letter::v(ix(a), ix(b))
}

fn u(a: char, b: char) -> Letter {
    Letter::u(ix(a), ix(b))
}

struct Replay {
    steps: Vec<(String, bool)>,
    target: String,
}

fn forward_replay() -> Result<Replay, Error> {
    use ScalarKind::{FormE, FormEInv};
    let start = Expr::letter(u('l', 'k'));
    let mut steps = Vec::new();
    // insert E⁻¹E in front of u
    let padded = word(1, vec![sc(FormEInv, 'l', 'j'), sc(FormE, 'j', 's')], vec![u('s', 'k')])?;
    steps.push((
        "E^-1 E u contracts to u".into(),
        normalize(&padded, &RuleSet::CONTRACT)? == start,
    ));
    // expand E[j,s] by colinearity
    let expanded = word(
        1,
        vec![sc(FormEInv, 'l', 'j'), sc(FormE, 'i', 'r')],
        vec![v('i', 'j'), v('r', 's'), u('s', 'k')],
    )?;
    // the inserted v v pair is exactly what colinearity removes
    let core = word(
        1,
        vec![sc(FormEInv, 'l', 'j'), sc(FormE, 'i', 'r')],
        vec![v('i', 'j'), v('r', 's')],
    )?;
    let core_target = word(1, vec![sc(FormEInv, 'l', 'j'), sc(FormE, 'j', 's')], vec![])?;
    let colin = RuleSet::CONTRACT.with_colin();
    steps.push((
        "colinearity folds the expansion back".into(),
        normalize(&core, &colin)? == normalize(&core_target, &colin)?,
    ));
    let derived = normalize(&expanded, &RuleSet::CONTRACT)?;
    let target = normalize(&start, &RuleSet::SUBST)?;
    steps.push((
        "v u contracts to the substitution rule's right-hand side".into(),
        derived == target,
    ));
    let direct = word(1, vec![sc(FormEInv, 'l', 'a'), sc(FormE, 'b', 'k')], vec![v('b', 'a')])?;
    steps.push((
        "result reads u = E^-1 v^T E".into(),
        normalize(&direct, &RuleSet::CONTRACT)? == derived,
    ));
    Ok(Replay {
        steps,
        target: target.to_string(),
    })
}

fn backward_replay() -> Result<Replay, Error> {
    use ScalarKind::FormE;
    let mut steps = Vec::new();
    // Σ_m E[j,m] u[m,r] = Σ_i v[i,j] E[i,r] once u is substituted
    let fold = word(1, vec![sc(FormE, 'j', 'm')], vec![u('m', 'r')])?.sub(&word(
        1,
        vec![sc(FormE, 'i', 'r')],
        vec![v('i', 'j')],
    )?);
    steps.push((
        "E u = v^T E under substitution".into(),
        normalize(&fold, &RuleSet::SUBST)?.is_zero(),
    ));
    let colinear =
        word(1, vec![sc(FormE, 'i', 'r')], vec![v('i', 'j'), v('r', 's')])?.sub(&Expr::scalar(FormE, ix('j'), ix('s')));
    // replace Σ_i E[i,r] v[i,j] by Σ_m E[j,m] u[m,r]
    let folded =
        word(1, vec![sc(FormE, 'j', 'm')], vec![u('m', 'r'), v('r', 's')])?.sub(&Expr::scalar(FormE, ix('j'), ix('s')));
    // colinear = folded − fold·v[r,s], with the fold identity standing on the left
    let fold_times_v = word(1, vec![sc(FormE, 'j', 'm')], vec![u('m', 'r'), v('r', 's')])?.sub(&word(
        1,
        vec![sc(FormE, 'i', 'r')],
        vec![v('i', 'j'), v('r', 's')],
    )?);
    let split = colinear.sub(&folded).add(&fold_times_v);
    steps.push((
        "the fold rewrites the colinearity expression".into(),
        normalize(&split, &RuleSet::CONTRACT)?.is_zero(),
    ));
    let reduced = normalize(&folded, &RuleSet::CONTRACT)?;
    steps.push(("u v contracts and the expression vanishes".into(), reduced.is_zero()));
    Ok(Replay {
        steps,
        target: reduced.to_string(),
    })
}

/// Replays both implications between colinearity and the antipode formula.
pub fn verify_selfdual_equivalence(direction: Direction) -> Result<VerificationReport, Error> {
    let start = Instant::now();
    let replay = match direction {
        Direction::Forward => forward_replay()?,
        Direction::Backward => backward_replay()?,
    };
    let passed = replay.steps.iter().all(|(_, ok)| *ok);
    let mode = match direction {
        Direction::Forward => "forward",
        Direction::Backward => "backward",
    };
    let mut report = VerificationReport::new(
        "selfdual",
        mode,
        if passed { Status::Passed } else { Status::Failed },
        passed,
    )
    .value(replay.target);
    for (label, ok) in replay.steps {
        report = report.note(format!("{label}: {}", if ok { "ok" } else { "FAILED" }));
    }
    Ok(report.timed(start))
}

/// With `E = I` the antipode formula reads `u[l,k] = v[k,l]`.
pub fn identity_specialization() -> Result<VerificationReport, Error> {
    let start = Instant::now();
    let subst = normalize(&Expr::letter(u('l', 'k')), &RuleSet::SUBST)?;
    let special = Expr::from_chain(specialize_identity_form(subst.chain())?)?;
    let passed = special == Expr::letter(v('k', 'l'));
    let report = VerificationReport::new(
        "selfdual",
        "identity-form",
        if passed { Status::Passed } else { Status::Failed },
        passed,
    )
    .value(format!("u[l,k] = {special}"));
    Ok(report.timed(start))
}
