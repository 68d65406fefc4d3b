//! Seeded random generators of well-formed terms and chains, used by the
//! randomized checks and the property tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::coeff::Coeff;
use crate::expr::{Chain, Expr, Index, Letter, ScalarAtom, ScalarKind, Term};
use crate::matrix::QMatrix;

/// Shape parameters for [`random_term`].
#[derive(Clone, Debug)]
pub struct TermShape {
    pub factors: usize,
    pub max_letters: usize,
    pub scalar_kinds: Vec<ScalarKind>,
    pub max_scalars: usize,
    /// Basis values for unpaired slots are drawn from `1..=dim`.
    pub dim: u32,
}

impl TermShape {
    pub fn letters_only(factors: usize, max_letters: usize, dim: u32) -> Self {
        TermShape {
            factors,
            max_letters,
            scalar_kinds: vec![],
            max_scalars: 0,
            dim,
        }
    }

    pub fn with_scalars(mut self, kinds: &[ScalarKind], max: usize) -> Self {
        self.scalar_kinds = kinds.to_vec();
        self.max_scalars = max;
        self
    }
}

/// A closed term: slots are either paired into summation indices or carry a
/// fixed basis value. Letters are biased towards patterns the rewriter acts on.
pub fn random_term<R: Rng>(rng: &mut R, shape: &TermShape) -> Term {
    let mut factors: Vec<Vec<Letter>> = (0..shape.factors)
        .map(|_| {
            let len = rng.random_range(0..=shape.max_letters);
            (0..len)
                .map(|_| {
                    let placeholder = Index::Value(0);
                    if rng.random_bool(0.5) {
                        Letter::v(placeholder, placeholder)
                    } else {
                        Letter::u(placeholder, placeholder)
                    }
                })
                .collect()
        })
        .collect();
    let n_scalars = if shape.scalar_kinds.is_empty() {
        0
    } else {
        rng.random_range(0..=shape.max_scalars)
    };
    let mut scalars: Vec<ScalarAtom> = (0..n_scalars)
        .map(|_| {
            let kind = *shape.scalar_kinds.choose(rng).unwrap();
            ScalarAtom::new(kind, Index::Value(0), Index::Value(0))
        })
        .collect();

    // slot addresses: (is_scalar, outer, inner, is_col)
    let mut slots: Vec<(bool, usize, usize, bool)> = Vec::new();
    for k in 0..scalars.len() {
        slots.push((true, k, 0, false));
        slots.push((true, k, 0, true));
    }
    for (f, w) in factors.iter().enumerate() {
        for p in 0..w.len() {
            slots.push((false, f, p, false));
            slots.push((false, f, p, true));
        }
    }
    // pair neighbouring slots more often than random ones so that
    // contractions actually fire
    let mut order: Vec<usize> = (0..slots.len()).collect();
    if rng.random_bool(0.5) {
        order.shuffle(rng);
    } else {
        let len = order.len();
        for k in (1..len).step_by(2) {
            if rng.random_bool(0.3) {
                order.swap(k, rng.random_range(0..len));
            }
        }
        if len > 0 {
            order.rotate_left(1);
        }
    }
    let pairs = if order.len() < 2 {
        0
    } else {
        rng.random_range(0..=order.len() / 2)
    };
    let mut values = vec![Index::Value(0); slots.len()];
    for p in 0..pairs {
        values[order[2 * p]] = Index::Dummy(p as u32);
        values[order[2 * p + 1]] = Index::Dummy(p as u32);
    }
    for &k in order.iter().skip(2 * pairs) {
        values[k] = Index::Value(rng.random_range(1..=shape.dim));
    }
    for (slot, ix) in slots.into_iter().zip(values) {
        let (is_scalar, outer, inner, is_col) = slot;
        let target = if is_scalar {
            let s = &mut scalars[outer];
            if is_col {
                &mut s.col
            } else {
                &mut s.row
            }
        } else {
            let l = &mut factors[outer][inner];
            if is_col {
                &mut l.col
            } else {
                &mut l.row
            }
        };
        *target = ix;
    }
    let coeff = Coeff::from_int(rng.random_range(-3..=3i64).max(1) * if rng.random_bool(0.5) { 1 } else { -1 });
    Term::new(coeff, scalars, factors)
}

pub fn random_chain<R: Rng>(rng: &mut R, degree: usize, n_terms: usize, shape: &TermShape) -> Chain {
    let shape = TermShape {
        factors: degree + 1,
        ..shape.clone()
    };
    Chain::from_terms(degree, (0..n_terms).map(|_| random_term(rng, &shape))).expect("generated terms are well formed")
}

pub fn random_expr<R: Rng>(rng: &mut R, n_terms: usize, shape: &TermShape) -> Expr {
    Expr::from_chain(random_chain(rng, 0, n_terms, shape)).unwrap()
}

/// Random invertible integer matrix `L U` with unit diagonals.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let mut l = QMatrix::identity(n);
    let mut u = QMatrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = num_rational::BigRational::from_integer(rng.random_range(-2..=2i64).into());
            u[(j, i)] = num_rational::BigRational::from_integer(rng.random_range(-2..=2i64).into());
        }
    }
    &l * &u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_terms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = TermShape::letters_only(3, 4, 3)
            .with_scalars(&[ScalarKind::Delta, ScalarKind::FormE, ScalarKind::FormEInv], 3);
        for _ in 0..500 {
            let t = random_term(&mut rng, &shape);
            t.validate().unwrap();
            assert_eq!(t.arity(), 3);
            assert!(t.free_indices().is_empty());
        }
    }

    #[test]
    fn unimodular_is_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..5 {
            assert!(random_unimodular(&mut rng, n).inverse().is_some());
        }
    }
}
