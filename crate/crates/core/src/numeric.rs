//! Floating-point grounding of chains. Generators are sent to matrix blocks
//! of a representation of the relation algebra, tensor factors to Kronecker
//! products, and closed chains to complex matrices whose entries are the
//! components checked against a tolerance.
//!
//! Two families of points are available: classical points of the isometry
//! group of `E` (1x1 blocks), and for 2x2 forms whose deformation parameter
//! is a root of unity, cyclic representations with noncommuting blocks.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::expr::{Chain, Expr, Index, LetterKind, ScalarKind, Term};
use crate::form_lie::so_e_basis;
use crate::matrix::QMatrix;
use crate::report::{Status, VerificationReport, Witness};
use crate::Error;

pub type CMat = DMatrix<Complex64>;

/// Largest root-of-unity order searched for cyclic representations.
pub const MAX_CYCLIC_ORDER: usize = 12;
/// Construction tolerance for points.
pub const POINT_TOL: f64 = 1e-10;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 100;

fn to_f64(m: &QMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_f64().unwrap_or(f64::NAN))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A point `g` of `{g : g E⁻¹ gᵀ = E⁻¹}`.
#[derive(Clone, Debug)]
pub struct GroupPoint {
    pub g: DMatrix<f64>,
    /// `max |g E⁻¹ gᵀ − E⁻¹|`.
    pub residual: f64,
}

/// Exponential of a random element of `so(E)`.
pub fn random_group_point(e: &QMatrix, seed: u64) -> Result<GroupPoint, Error> {
    let basis: Vec<DMatrix<f64>> = so_e_basis(e)?.elements().iter().map(to_f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    group_point_from(&basis, e, &mut rng)
}

fn group_point_from<R: Rng>(basis: &[DMatrix<f64>], e: &QMatrix, rng: &mut R) -> Result<GroupPoint, Error> {
    let n = e.rows();
    let mut f = DMatrix::<f64>::zeros(n, n);
    for b in basis {
        f += b * rng.random_range(-1.0..=1.0);
    }
    let t: f64 = rng.random_range(-1.0..=1.0);
    let g = (f * t).exp();
    let einv = to_f64(&e.inverse().ok_or(Error::SingularForm)?);
    let residual = (&g * &einv * g.transpose() - &einv).amax();
    if residual >= POINT_TOL {
        return Err(Error::InvalidInput(format!(
            "group point residual {residual:e} too large"
        )));
    }
    Ok(GroupPoint { g, residual })
}

/// Blocks `v[i,j]` and `u[i,j]` of a representation of the relation algebra.
#[derive(Clone, Debug)]
pub struct RepPoint {
    n: usize,
    block: usize,
    v: Vec<CMat>,
    u: Vec<CMat>,
    /// Largest deviation from the defining relations.
    pub residual: f64,
}

impl RepPoint {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Size of the blocks; 1 for classical points.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn v(&self, i: usize, j: usize) -> &CMat {
        &self.v[i * self.n + j]
    }

    pub fn u(&self, i: usize, j: usize) -> &CMat {
        &self.u[i * self.n + j]
    }

    pub fn classical(p: &GroupPoint) -> Result<Self, Error> {
        let n = p.g.nrows();
        let inv = p.g.clone().try_inverse().ok_or(Error::SingularForm)?;
        let one = |x: f64| CMat::from_element(1, 1, Complex64::new(x, 0.0));
        let v = (0..n * n).map(|k| one(p.g[(k / n, k % n)])).collect();
        let u = (0..n * n).map(|k| one(inv[(k / n, k % n)])).collect();
        Ok(RepPoint {
            n,
            block: 1,
            v,
            u,
            residual: p.residual,
        })
    }

    /// Checks `Σ E[i,r] v[i,j] v[r,s] = E[j,s]`, `Σ E⁻¹[k,l] v[i,k] v[m,l] = E⁻¹[i,m]` and
    /// `u = E⁻¹ vᵀ E`, returning the largest deviation.
    fn relation_residual(&self, e: &DMatrix<f64>, einv: &DMatrix<f64>) -> f64 {
        let (n, l) = (self.n, self.block);
        let id = CMat::identity(l, l);
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut colin = -id.clone() * c(e[(a, b)]);
                let mut dual = -id.clone() * c(einv[(a, b)]);
                let mut anti = self.u(a, b).clone();
                for x in 0..n {
                    for y in 0..n {
                        colin += self.v(x, a) * self.v(y, b) * c(e[(x, y)]);
                        dual += self.v(a, x) * self.v(b, y) * c(einv[(x, y)]);
                        anti -= self.v(y, x) * c(einv[(a, x)] * e[(y, b)]);
                    }
                }
                worst = worst.max(max_abs(&colin)).max(max_abs(&dual)).max(max_abs(&anti));
            }
        }
        worst
    }
}

/// Deformation parameter and isotropic frame of a 2x2 form.
struct CyclicFrame {
    q: Complex64,
    order: usize,
    p: [[Complex64; 2]; 2],
    pinv: [[Complex64; 2]; 2],
}

fn cyclic_frame(e: &DMatrix<f64>) -> Result<CyclicFrame, Error> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let s00 = e[(0, 0)];
    let s01 = (e[(0, 1)] + e[(1, 0)]) / 2.0;
    let s11 = e[(1, 1)];
    let scale = e.amax();
    let (p1, p2) = if s00.abs().max(s01.abs()).max(s11.abs()) < 1e-12 * scale {
        ([c(1.0), c(0.0)], [c(0.0), c(1.0)])
    } else {
        let disc = s01 * s01 - s00 * s11;
        if disc.abs() < 1e-12 * scale * scale {
            return Err(Error::NoRepresentation("symmetric part of E is degenerate".into()));
        }
        if s00.abs() > 1e-12 * scale {
            let root = c(disc).sqrt();
            let t1 = (-c(s01) + root) / s00;
            let t2 = (-c(s01) - root) / s00;
            ([t1, c(1.0)], [t2, c(1.0)])
        } else {
            ([c(1.0), c(0.0)], [c(-s11 / (2.0 * s01)), c(1.0)])
        }
    };
    let form = |x: &[Complex64; 2], y: &[Complex64; 2]| {
        let mut acc = Complex64::zero();
        for i in 0..2 {
            for j in 0..2 {
                acc += x[i] * c(e[(i, j)]) * y[j];
            }
        }
        acc
    };
    let (s, t) = (form(&p1, &p2), form(&p2, &p1));
    if s.norm() < 1e-12 {
        return Err(Error::NoRepresentation("isotropic frame is degenerate".into()));
    }
    let q = -t / s;
    let order = (1..=MAX_CYCLIC_ORDER)
        .find(|&k| (q.powu(k as u32) - 1.0).norm() < 1e-9)
        .ok_or_else(|| {
            Error::NoRepresentation(format!("q = {q} is not a root of unity of order <= {MAX_CYCLIC_ORDER}"))
        })?;
    let det = p1[0] * p2[1] - p2[0] * p1[1];
    let p = [[p1[0], p2[0]], [p1[1], p2[1]]];
    let pinv = [[p2[1] / det, -p2[0] / det], [-p1[1] / det, p1[0] / det]];
    Ok(CyclicFrame { q, order, p, pinv })
}

/// Whether noncommutative cyclic points exist for `e`.
pub fn cyclic_order(e: &QMatrix) -> Result<usize, Error> {
    if e.rows() != 2 || e.cols() != 2 {
        return Err(Error::NoRepresentation(
            "cyclic points are only built for 2x2 forms".into(),
        ));
    }
    Ok(cyclic_frame(&to_f64(e))?.order)
}

#[allow(clippy::needless_range_loop)]
fn cyclic_point_from<R: Rng>(e: &QMatrix, rng: &mut R) -> Result<RepPoint, Error> {
    if e.rows() != 2 || e.cols() != 2 {
        return Err(Error::NoRepresentation(
            "cyclic points are only built for 2x2 forms".into(),
        ));
    }
    let ef = to_f64(e);
    let einv = to_f64(&e.inverse().ok_or(Error::SingularForm)?);
    let frame = cyclic_frame(&ef)?;
    let l = frame.order;
    let mut draw = |lo: f64, hi: f64| {
        let r: f64 = rng.random_range(lo..hi);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, phase)
    };
    let (alpha, beta, gamma) = (draw(0.6, 1.4), draw(0.2, 1.0), draw(0.2, 1.0));
    let z = CMat::from_fn(l, l, |i, j| {
        if i == j {
            frame.q.powu(i as u32)
        } else {
            Complex64::zero()
        }
    });
    // x e_k = e_{k+1}
    let x = CMat::from_fn(l, l, |i, j| {
        if i == (j + 1) % l {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    });
    let xinv = x.transpose();
    let id = CMat::identity(l, l);
    let prime = [
        [&xinv * alpha, &z * beta],
        [&z * gamma, &x * (id + &z * &z * (frame.q * beta * gamma)) / alpha],
    ];
    let mut v = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut blk = CMat::zeros(l, l);
            for a in 0..2 {
                for b in 0..2 {
                    blk += &prime[a][b] * (frame.p[i][a] * frame.pinv[b][j]);
                }
            }
            v.push(blk);
        }
    }
    let mut u = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut blk = CMat::zeros(l, l);
            for k in 0..2 {
                for m in 0..2 {
                    blk += &v[m * 2 + k] * Complex64::new(einv[(i, k)] * ef[(m, j)], 0.0);
                }
            }
            u.push(blk);
        }
    }
    let mut point = RepPoint {
        n: 2,
        block: l,
        v,
        u,
        residual: 0.0,
    };
    point.residual = point.relation_residual(&ef, &einv);
    if point.residual >= 1e-8 {
        return Err(Error::InvalidInput(format!(
            "cyclic point residual {:e} too large",
            point.residual
        )));
    }
    Ok(point)
}

/// A cyclic representation point for a 2x2 form, deterministic in `seed`.
pub fn cyclic_point(e: &QMatrix, seed: u64) -> Result<RepPoint, Error> {
    cyclic_point_from(e, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Float values of the scalar atoms.
#[derive(Clone, Debug)]
pub struct NumericBindings {
    n: usize,
    e: DMatrix<f64>,
    einv: DMatrix<f64>,
    derivations: [Option<DMatrix<f64>>; 3],
    eps: Option<i8>,
}

impl NumericBindings {
    pub fn new(e: &QMatrix) -> Result<Self, Error> {
        let inv = e.inverse().ok_or(Error::SingularForm)?;
        let t = e.transpose();
        let eps = if t == *e {
            Some(1)
        } else if t == -e {
            Some(-1)
        } else {
            None
        };
        Ok(NumericBindings {
            n: e.rows(),
            e: to_f64(e),
            einv: to_f64(&inv),
            derivations: [None, None, None],
            eps,
        })
    }

    pub fn derivations(mut self, fs: [&QMatrix; 3]) -> Self {
        self.derivations = fs.map(|f| Some(to_f64(f)));
        self
    }

    fn atom(&self, kind: ScalarKind, r: usize, c: usize) -> Result<f64, Error> {
        Ok(match kind {
            ScalarKind::Delta => f64::from(u8::from(r == c)),
            ScalarKind::FormE => self.e[(r, c)],
            ScalarKind::FormEInv => self.einv[(r, c)],
            ScalarKind::DerMat(s) => self
                .derivations
                .get(usize::from(s).wrapping_sub(1))
                .and_then(Option::as_ref)
                .ok_or_else(|| Error::UnboundAtom(format!("F{s}")))?[(r, c)],
        })
    }
}

fn evaluate_term(t: &Term, points: &[&RepPoint], b: &NumericBindings) -> Result<CMat, Error> {
    let n = b.n;
    let coeff = t.coeff.evaluate(n as u32, b.eps)?.to_f64().unwrap_or(f64::NAN);
    let mut dummies = Vec::new();
    for ix in t.indices() {
        match ix {
            Index::Free(_) => return Err(Error::FreeIndex(ix.to_string())),
            Index::Value(v) if v == 0 || v as usize > n => {
                return Err(Error::DimensionMismatch(format!("basis value {v} outside 1..={n}")))
            }
            Index::Dummy(d) if !dummies.contains(&d) => dummies.push(d),
            _ => {}
        }
    }
    let size: usize = points.iter().map(|p| p.block).product();
    let mut total = CMat::zeros(size, size);
    let mut assign = vec![0usize; dummies.len()];
    let at = |ix: Index, assign: &[usize]| -> usize {
        match ix {
            Index::Value(v) => v as usize - 1,
            Index::Dummy(d) => assign[dummies.iter().position(|&x| x == d).unwrap()],
            Index::Free(_) => unreachable!(),
        }
    };
    loop {
        let mut s = coeff;
        for a in &t.scalars {
            s *= b.atom(a.kind, at(a.row, &assign), at(a.col, &assign))?;
            if s == 0.0 {
                break;
            }
        }
        if s != 0.0 {
            let mut prod: Option<CMat> = None;
            for (word, p) in t.factors.iter().zip(points) {
                let mut m = CMat::identity(p.block, p.block);
                for l in word {
                    let (r, c) = (at(l.row, &assign), at(l.col, &assign));
                    m = match l.kind {
                        LetterKind::V => m * p.v(r, c),
                        LetterKind::U => m * p.u(r, c),
                    };
                }
                prod = Some(match prod {
                    None => m,
                    Some(acc) => acc.kronecker(&m),
                });
            }
            total += prod.unwrap() * Complex64::new(s, 0.0);
        }
        let mut k = 0;
        while k < assign.len() && assign[k] + 1 == n {
            assign[k] = 0;
            k += 1;
        }
        if k == assign.len() {
            break;
        }
        assign[k] += 1;
    }
    Ok(total)
}

/// Evaluates a closed chain with one point per tensor factor.
pub fn evaluate_chain(c: &Chain, points: &[&RepPoint], b: &NumericBindings) -> Result<CMat, Error> {
    if points.len() != c.degree() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} points given for a chain with {} tensor factors",
            points.len(),
            c.degree() + 1
        )));
    }
    for p in points {
        if p.n != b.n {
            return Err(Error::DimensionMismatch(format!(
                "point has N={}, bindings N={}",
                p.n, b.n
            )));
        }
    }
    let size: usize = points.iter().map(|p| p.block).product();
    let mut total = CMat::zeros(size, size);
    for t in c.terms() {
        total += evaluate_term(&t, points, b)?;
    }
    Ok(total)
}

pub fn evaluate_expr(x: &Expr, p: &RepPoint, b: &NumericBindings) -> Result<CMat, Error> {
    evaluate_chain(x.chain(), &[p], b)
}

/// Which representation points to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Classical,
    Cyclic,
    /// Classical when `Eᵀ = ±E`, cyclic for other 2x2 forms.
    Auto,
}

impl PointKind {
    fn resolve(self, e: &QMatrix) -> PointKind {
        match self {
            PointKind::Auto => {
                let t = e.transpose();
                if t == *e || t == -e || e.rows() != 2 {
                    PointKind::Classical
                } else {
                    PointKind::Cyclic
                }
            }
            k => k,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NumericOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub points: PointKind,
    pub derivations: Option<[QMatrix; 3]>,
    /// Whether the check passes when all samples vanish (or when a witness is found).
    pub expect_zero: bool,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            seed: 0,
            points: PointKind::Auto,
            derivations: None,
            expect_zero: true,
        }
    }
}

/// Samples `c` at seeded points; every sample draws one point per tensor
/// factor from its own random stream.
pub fn numeric_zero_check(c: &Chain, e: &QMatrix, opts: &NumericOptions) -> Result<VerificationReport, Error> {
    let start = Instant::now();
    if opts.samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let mut bindings = NumericBindings::new(e)?;
    if let Some([f1, f2, f3]) = &opts.derivations {
        bindings = bindings.derivations([f1, f2, f3]);
    }
    let kind = opts.points.resolve(e);
    let basis: Vec<DMatrix<f64>> = match kind {
        PointKind::Classical => so_e_basis(e)?.elements().iter().map(to_f64).collect(),
        _ => Vec::new(),
    };
    if kind == PointKind::Cyclic {
        cyclic_order(e)?;
    }
    let per_sample: Vec<f64> = (0..opts.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let points = (0..=c.degree())
                .map(|_| match kind {
                    PointKind::Classical => RepPoint::classical(&group_point_from(&basis, e, &mut rng)?),
                    _ => cyclic_point_from(e, &mut rng),
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let refs: Vec<&RepPoint> = points.iter().collect();
            Ok(max_abs(&evaluate_chain(c, &refs, &bindings)?))
        })
        .collect::<Result<_, Error>>()?;
    let worst = per_sample.iter().copied().fold(0.0, f64::max);
    let zero = per_sample.iter().all(|&x| x < opts.tol);
    let status = if zero {
        Status::NumericallyZero
    } else {
        Status::NonzeroWitness
    };
    let mode = match kind {
        PointKind::Classical => "classical points",
        _ => "cyclic points",
    };
    let mut report = VerificationReport::new(
        "numeric-check",
        format!("N={}, {mode}, samples={}, tol={:e}", e.rows(), opts.samples, opts.tol),
        status,
        zero == opts.expect_zero,
    )
    .value(format!("{worst:e}"))
    .note("numerical evidence only, not a proof");
    if !zero {
        let (sample, value) = per_sample
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        report.witnesses.push(Witness {
            sample,
            value,
            detail: format!("seed {} stream {sample}, {mode}", opts.seed),
        });
    }
    report.max_residuals = per_sample;
    Ok(report.timed(start))
}
