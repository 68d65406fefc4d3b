use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Expr, Index, ScalarAtom, ScalarKind};
use crate::matrix::QMatrix;
use crate::Error;

/// Concrete matrices for the scalar atoms of a network.
#[derive(Clone, Debug, Default)]
pub struct ScalarBindings {
    pub form: Option<QMatrix>,
    pub form_inv: Option<QMatrix>,
    pub derivations: [Option<QMatrix>; 3],
    /// Value of the sign symbol, if it occurs in coefficients.
    pub eps: Option<i8>,
}

impl ScalarBindings {
    /// Binds `E` and its exact inverse, and `e` when `E` is (anti)symmetric.
    pub fn with_form(e: &QMatrix) -> Result<Self, Error> {
        let inv = e.inverse().ok_or(Error::SingularForm)?;
        let eps = if e.transpose() == *e {
            Some(1)
        } else if e.transpose() == -e {
            Some(-1)
        } else {
            None
        };
        Ok(ScalarBindings {
            form: Some(e.clone()),
            form_inv: Some(inv),
            eps,
            ..Default::default()
        })
    }

    pub fn derivations(mut self, fs: [&QMatrix; 3]) -> Self {
        self.derivations = fs.map(|f| Some(f.clone()));
        self
    }

    fn matrix(&self, kind: ScalarKind) -> Result<Option<&QMatrix>, Error> {
        let m = match kind {
            ScalarKind::Delta => return Ok(None),
            ScalarKind::FormE => self.form.as_ref(),
            ScalarKind::FormEInv => self.form_inv.as_ref(),
            ScalarKind::DerMat(s) => self.derivations.get(usize::from(s) - 1).and_then(Option::as_ref),
        };
        m.map(Some).ok_or_else(|| Error::UnboundAtom(format!("{kind:?}")))
    }

    fn check(&self, n: u32) -> Result<(), Error> {
        let n = n as usize;
        let all = [&self.form, &self.form_inv].into_iter().chain(self.derivations.iter());
        for m in all.flatten() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "bound matrix is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if let (Some(e), Some(inv)) = (&self.form, &self.form_inv) {
            if (e * inv) != QMatrix::identity(n) {
                return Err(Error::InvalidInput("Einv binding is not the inverse of E".into()));
            }
        }
        Ok(())
    }
}

/// Einstein-sums a closed network of scalar atoms exactly.
pub fn evaluate_scalar_network(x: &Expr, bindings: &ScalarBindings, n: u32) -> Result<BigRational, Error> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive".into()));
    }
    bindings.check(n)?;
    let mut total = BigRational::zero();
    for t in x.terms() {
        if t.has_letters() {
            return Err(Error::InvalidInput(format!("not a scalar network: {t}")));
        }
        let coeff = t.coeff.evaluate(n, bindings.eps)?;
        let mut dummies = Vec::new();
        for ix in t.indices() {
            match ix {
                Index::Free(_) => return Err(Error::FreeIndex(ix.to_string())),
                Index::Value(v) if v == 0 || v > n => {
                    return Err(Error::DimensionMismatch(format!("basis value {v} outside 1..={n}")))
                }
                Index::Dummy(d) if !dummies.contains(&d) => dummies.push(d),
                _ => {}
            }
        }
        let atoms: Vec<(&ScalarAtom, Option<&QMatrix>)> = t
            .scalars
            .iter()
            .map(|s| bindings.matrix(s.kind).map(|m| (s, m)))
            .collect::<Result<_, _>>()?;
        let mut assign = vec![1u32; dummies.len()];
        let value_of = |ix: Index, assign: &[u32]| -> usize {
            match ix {
                Index::Value(v) => v as usize - 1,
                Index::Dummy(d) => assign[dummies.iter().position(|&x| x == d).unwrap()] as usize - 1,
                Index::Free(_) => unreachable!(),
            }
        };
        let mut sum = BigRational::zero();
        loop {
            let mut prod = BigRational::one();
            for (s, m) in &atoms {
                let (r, c) = (value_of(s.row, &assign), value_of(s.col, &assign));
                match m {
                    None if r != c => {
                        prod = BigRational::zero();
                        break;
                    }
                    None => {}
                    Some(m) => {
                        prod *= &m[(r, c)];
                        if prod.is_zero() {
                            break;
                        }
                    }
                }
            }
            sum += prod;
            // odometer
            let mut k = 0;
            while k < assign.len() && assign[k] == n {
                assign[k] = 1;
                k += 1;
            }
            if k == assign.len() {
                break;
            }
            assign[k] += 1;
        }
        total += coeff * sum;
    }
    Ok(total)
}
