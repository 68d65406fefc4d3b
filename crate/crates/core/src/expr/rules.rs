//! The rewrite system.
//!
//! * delta: `delta[i,#k] X[#k,..] -> X[i,..]`, closed loops `delta[#k,#k] -> N`
//! * antipode: `u[i,#k] v[#k,j] -> delta[i,j]` and `v[i,#k] u[#k,j] -> delta[i,j]`
//!   for adjacent letters of one factor
//! * inverse: `Einv[i,#k] E[#k,j] -> delta[i,j]` and `E[i,#k] Einv[#k,j] -> delta[i,j]`
//! * subst: `u[i,j] -> Einv[i,#k] v[#l,#k] E[#l,j]`
//! * flip: `E[j,i] -> e E[i,j]` (same for `Einv`), only to enable inverse or colin and
//!   during canonicalization
//! * colin: `E[#i,#r] v[#i,j] v[#r,s] -> E[j,s]` for adjacent letters
//!
//! Every application lowers the measure (u letters, letters, scalar atoms),
//! so rewriting terminates. Each term rewrites to at most one term.

use rayon::prelude::*;

use super::canon::canonicalize;
use super::{Chain, Expr, Index, Letter, LetterKind, ScalarAtom, ScalarKind, Term};
use crate::coeff::Coeff;
use crate::Error;

/// Enabled rule groups. Contraction (delta, antipode, inverse) is always on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RuleSet {
    /// Self-duality substitution.
    pub subst: bool,
    /// Flips, `E^T = e E`.
    pub sym: bool,
    /// Colinearity of the form.
    pub colin: bool,
    /// Binds `e` to +1 or -1; `None` keeps it formal.
    pub eps: Option<i8>,
}

impl RuleSet {
    pub const CONTRACT: RuleSet = RuleSet {
        subst: false,
        sym: false,
        colin: false,
        eps: None,
    };
    pub const SUBST: RuleSet = RuleSet {
        subst: true,
        sym: false,
        colin: false,
        eps: None,
    };
    pub const SUBST_SYM: RuleSet = RuleSet {
        subst: true,
        sym: true,
        colin: false,
        eps: None,
    };

    pub fn with_eps(self, sign: i8) -> Self {
        RuleSet {
            eps: Some(sign),
            ..self
        }
    }

    pub fn with_colin(self) -> Self {
        RuleSet { colin: true, ..self }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some(s) = self.eps {
            if s != 1 && s != -1 {
                return Err(Error::InvalidInput(format!("sign must be +1 or -1, got {s}")));
            }
        }
        if self.sym && !self.subst && self.eps.is_none() {
            return Err(Error::InvalidInput(
                "SYM requires SUBST or an explicit sign binding".into(),
            ));
        }
        Ok(())
    }

    fn flip(&self) -> Option<Coeff> {
        self.sym.then(|| match self.eps {
            Some(s) => Coeff::from_int(s.into()),
            None => Coeff::eps(),
        })
    }
}

/// Rule application counts of one normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    pub delta: usize,
    pub antipode: usize,
    pub form: usize,
    pub subst: usize,
    pub colin: usize,
}

impl NormalizeStats {
    pub fn steps(&self) -> usize {
        self.delta + self.antipode + self.form + self.subst + self.colin
    }

    fn merge(mut self, o: NormalizeStats) -> Self {
        self.delta += o.delta;
        self.antipode += o.antipode;
        self.form += o.form;
        self.subst += o.subst;
        self.colin += o.colin;
        self
    }
}

fn is_form(kind: ScalarKind) -> bool {
    matches!(kind, ScalarKind::FormE | ScalarKind::FormEInv)
}

/// Delta contraction. Returns `None` if the term vanished (`delta[=1,=2]`).
fn contract_delta(t: &mut Term) -> Option<bool> {
    for k in 0..t.scalars.len() {
        let s = t.scalars[k];
        if s.kind != ScalarKind::Delta {
            continue;
        }
        let (a, b) = (s.row, s.col);
        if a == b {
            t.scalars.remove(k);
            if a.is_dummy() {
                t.coeff = &t.coeff * &Coeff::dim();
            }
            return Some(true);
        }
        match (a, b) {
            (Index::Dummy(_), _) => {
                t.scalars.remove(k);
                t.substitute(a, b);
                return Some(true);
            }
            (_, Index::Dummy(_)) => {
                t.scalars.remove(k);
                t.substitute(b, a);
                return Some(true);
            }
            (Index::Value(_), Index::Value(_)) => return None,
            _ => {}
        }
    }
    Some(false)
}

/// Antipode contraction.
fn contract_antipode(t: &mut Term) -> bool {
    for w in t.factors.iter_mut() {
        for p in 0..w.len().saturating_sub(1) {
            let (x, y) = (w[p], w[p + 1]);
            if x.kind != y.kind && x.col == y.row && x.col.is_dummy() {
                w.drain(p..p + 2);
                t.scalars.push(ScalarAtom::new(ScalarKind::Delta, x.row, y.col));
                return true;
            }
        }
    }
    false
}

/// Inverse contraction, with flips when `flip` is given.
fn contract_forms(t: &mut Term, flip: Option<&Coeff>) -> bool {
    let n = t.scalars.len();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (x, y) = (t.scalars[a], t.scalars[b]);
            if !is_form(x.kind) || !is_form(y.kind) || x.kind == y.kind {
                continue;
            }
            // x[i,k] y[k,j] -> delta[i,j]
            let hit = if x.col == y.row && x.col.is_dummy() && x.row != x.col {
                Some((x.row, y.col, false))
            } else if flip.is_some() {
                if x.row == y.row && x.row.is_dummy() && x.row != x.col && a < b {
                    // x^T[i,k] y[k,j]
                    Some((x.col, y.col, true))
                } else if x.col == y.col && x.col.is_dummy() && y.row != y.col && a < b {
                    // x[i,k] y^T[k,j]
                    Some((x.row, y.row, true))
                } else {
                    None
                }
            } else {
                None
            };
            if let Some((i, j, flipped)) = hit {
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                t.scalars.remove(hi);
                t.scalars.remove(lo);
                t.scalars.push(ScalarAtom::new(ScalarKind::Delta, i, j));
                if flipped {
                    t.coeff = &t.coeff * flip.unwrap();
                }
                return true;
            }
        }
    }
    false
}

/// Colinearity, with flips when `flip` is given.
fn contract_colinear(t: &mut Term, flip: Option<&Coeff>) -> bool {
    for f in 0..t.factors.len() {
        for p in 0..t.factors[f].len().saturating_sub(1) {
            let (x, y) = (t.factors[f][p], t.factors[f][p + 1]);
            if x.kind != LetterKind::V || y.kind != LetterKind::V {
                continue;
            }
            let (i, r) = (x.row, y.row);
            if !i.is_dummy() || !r.is_dummy() || i == r {
                continue;
            }
            let found = t
                .scalars
                .iter()
                .position(|s| s.kind == ScalarKind::FormE && s.row == i && s.col == r);
            let flipped = match (found, flip) {
                (Some(k), _) => Some((k, false)),
                (None, Some(_)) => t
                    .scalars
                    .iter()
                    .position(|s| s.kind == ScalarKind::FormE && s.row == r && s.col == i)
                    .map(|k| (k, true)),
                _ => None,
            };
            if let Some((k, flipped)) = flipped {
                t.scalars.remove(k);
                t.factors[f].drain(p..p + 2);
                t.scalars.push(ScalarAtom::new(ScalarKind::FormE, x.col, y.col));
                if flipped {
                    t.coeff = &t.coeff * flip.unwrap();
                }
                return true;
            }
        }
    }
    false
}

/// Substitution on the first antipode letter.
fn substitute_antipode(t: &mut Term) -> bool {
    let next = t.next_dummy();
    let (k, l) = (Index::Dummy(next), Index::Dummy(next + 1));
    for w in t.factors.iter_mut() {
        if let Some(letter) = w.iter_mut().find(|x| x.kind == LetterKind::U) {
            let (i, j) = (letter.row, letter.col);
            *letter = Letter::v(l, k);
            t.scalars.push(ScalarAtom::new(ScalarKind::FormEInv, i, k));
            t.scalars.push(ScalarAtom::new(ScalarKind::FormE, l, j));
            return true;
        }
    }
    false
}

pub(crate) fn normalize_term(mut t: Term, rules: &RuleSet) -> (Option<Term>, NormalizeStats) {
    let mut stats = NormalizeStats::default();
    let flip = rules.flip();
    loop {
        if t.coeff.is_zero() {
            return (None, stats);
        }
        match contract_delta(&mut t) {
            None => return (None, stats),
            Some(true) => {
                stats.delta += 1;
                continue;
            }
            Some(false) => {}
        }
        if contract_antipode(&mut t) {
            stats.antipode += 1;
            continue;
        }
        if contract_forms(&mut t, flip.as_ref()) {
            stats.form += 1;
            continue;
        }
        if rules.colin && contract_colinear(&mut t, flip.as_ref()) {
            stats.colin += 1;
            continue;
        }
        if rules.subst && substitute_antipode(&mut t) {
            stats.subst += 1;
            continue;
        }
        break;
    }
    let mut t = canonicalize(t, flip.as_ref());
    if let Some(s) = rules.eps {
        t.coeff = t.coeff.bind_eps(s).expect("validated sign");
    }
    if t.coeff.is_zero() {
        return (None, stats);
    }
    (Some(t), stats)
}

/// Normalizes a chain term by term and merges like terms.
pub fn normalize_chain_with_stats(c: &Chain, rules: &RuleSet) -> Result<(Chain, NormalizeStats), Error> {
    rules.validate()?;
    c.validate()?;
    let terms: Vec<Term> = c.terms().collect();
    let results: Vec<(Option<Term>, NormalizeStats)> =
        terms.into_par_iter().map(|t| normalize_term(t, rules)).collect();
    let mut out = Chain::zero(c.degree());
    let mut stats = NormalizeStats::default();
    for (t, s) in results {
        stats = stats.merge(s);
        if let Some(t) = t {
            out.push_unchecked(t);
        }
    }
    Ok((out, stats))
}

pub fn normalize_chain(c: &Chain, rules: &RuleSet) -> Result<Chain, Error> {
    normalize_chain_with_stats(c, rules).map(|(c, _)| c)
}

pub fn normalize(x: &Expr, rules: &RuleSet) -> Result<Expr, Error> {
    Expr::from_chain(normalize_chain(x.chain(), rules)?)
}

/// Concatenates the words of two terms of equal arity, factor by factor.
pub(crate) fn concat_terms(a: &Term, b: &Term) -> Result<Term, Error> {
    let mut b = b.clone();
    b.shift_dummies(a.next_dummy());
    let mut scalars = a.scalars.clone();
    scalars.extend(b.scalars);
    let factors = a
        .factors
        .iter()
        .zip(b.factors)
        .map(|(x, y)| {
            let mut w = x.clone();
            w.extend(y);
            w
        })
        .collect();
    Term::new(&a.coeff * &b.coeff, scalars, factors).einstein()
}

/// Algebra product; free indices shared by `x` and `y` are summed. The result
/// is normalized under contraction.
pub fn multiply(x: &Expr, y: &Expr) -> Result<Expr, Error> {
    let mut raw = Chain::zero(0);
    for a in x.terms() {
        for b in y.terms() {
            raw.push(concat_terms(&a, &b)?)?;
        }
    }
    normalize(&Expr::from_chain(raw)?, &RuleSet::CONTRACT)
}

/// The counit `v[i,j], u[i,j] -> delta[i,j]`, yielding a scalar network.
pub fn counit(x: &Expr) -> Result<Expr, Error> {
    let mut raw = Chain::zero(0);
    for mut t in x.terms() {
        let letters = std::mem::take(&mut t.factors[0]);
        t.scalars.extend(
            letters
                .into_iter()
                .map(|l| ScalarAtom::new(ScalarKind::Delta, l.row, l.col)),
        );
        raw.push_unchecked(t);
    }
    normalize(&Expr::from_chain(raw)?, &RuleSet::CONTRACT)
}

/// Replaces the form and its inverse by the identity matrix (`E = I`).
pub fn specialize_identity_form(c: &Chain) -> Result<Chain, Error> {
    let raw = c.map_terms(|mut t| {
        for s in t.scalars.iter_mut() {
            if is_form(s.kind) {
                s.kind = ScalarKind::Delta;
            }
        }
        t
    });
    normalize_chain(&raw, &RuleSet::CONTRACT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Word;

    fn ix(c: char) -> Index {
        Index::named(c)
    }

    fn word(scalars: Vec<ScalarAtom>, w: Word) -> Expr {
        Expr::word(Coeff::one(), scalars, w).unwrap()
    }

    #[test]
    fn delta_contraction() {
        let x = word(
            vec![ScalarAtom::new(ScalarKind::Delta, ix('i'), ix('j'))],
            vec![Letter::v(ix('j'), ix('k'))],
        );
        assert_eq!(normalize(&x, &RuleSet::CONTRACT).unwrap(), Expr::v(ix('i'), ix('k')));
    }

    #[test]
    fn antipode_contraction_both_orders() {
        let x = word(vec![], vec![Letter::u(ix('i'), ix('k')), Letter::v(ix('k'), ix('j'))]);
        assert_eq!(
            normalize(&x, &RuleSet::CONTRACT).unwrap(),
            Expr::delta(ix('i'), ix('j'))
        );
        let y = word(vec![], vec![Letter::v(ix('i'), ix('k')), Letter::u(ix('k'), ix('j'))]);
        assert_eq!(
            normalize(&y, &RuleSet::CONTRACT).unwrap(),
            Expr::delta(ix('i'), ix('j'))
        );
    }

    #[test]
    fn closed_loop_gives_dimension() {
        let x = word(vec![], vec![Letter::u(ix('i'), ix('k')), Letter::v(ix('k'), ix('i'))]);
        let n = normalize(&x, &RuleSet::CONTRACT).unwrap();
        assert_eq!(n, Expr::constant(Coeff::dim()));
    }

    #[test]
    fn same_kind_letters_do_not_contract() {
        let x = word(vec![], vec![Letter::v(ix('i'), ix('k')), Letter::v(ix('k'), ix('j'))]);
        assert_eq!(
            normalize(&x, &RuleSet::CONTRACT).unwrap().to_string(),
            "sum{#0} 1 * v[i,#0] v[#0,j]"
        );
    }

    #[test]
    fn substitution_rule() {
        let x = Expr::u(ix('i'), ix('j'));
        let n = normalize(&x, &RuleSet::SUBST).unwrap();
        assert_eq!(n.to_string(), "sum{#0,#1} 1 * E[#0,j] Einv[i,#1] v[#0,#1]");
    }

    #[test]
    fn form_contraction() {
        let x = word(
            vec![
                ScalarAtom::new(ScalarKind::FormEInv, ix('i'), ix('k')),
                ScalarAtom::new(ScalarKind::FormE, ix('k'), ix('j')),
            ],
            vec![],
        );
        assert_eq!(
            normalize(&x, &RuleSet::CONTRACT).unwrap(),
            Expr::delta(ix('i'), ix('j'))
        );
        // E^T E^{-1} needs the symmetry rule
        let y = word(
            vec![
                ScalarAtom::new(ScalarKind::FormE, ix('k'), ix('i')),
                ScalarAtom::new(ScalarKind::FormEInv, ix('k'), ix('j')),
            ],
            vec![],
        );
        assert_eq!(normalize(&y, &RuleSet::CONTRACT).unwrap().len(), 1);
        assert!(
            normalize(&y, &RuleSet::CONTRACT)
                .unwrap()
                .chain()
                .terms()
                .next()
                .unwrap()
                .scalars
                .len()
                == 2
        );
        let n = normalize(&y, &RuleSet::SUBST_SYM).unwrap();
        assert_eq!(n, Expr::delta(ix('i'), ix('j')).scale(&Coeff::eps()));
    }

    #[test]
    fn delta_of_values() {
        let one = Index::Value(1);
        let two = Index::Value(2);
        assert!(normalize(&Expr::delta(one, two), &RuleSet::CONTRACT).unwrap().is_zero());
        assert_eq!(
            normalize(&Expr::delta(two, two), &RuleSet::CONTRACT).unwrap(),
            Expr::one()
        );
    }

    #[test]
    fn multiply_unit_and_free_product() {
        let x = Expr::v(ix('i'), ix('j'));
        assert_eq!(multiply(&Expr::one(), &x).unwrap(), x);
        assert_eq!(multiply(&x, &Expr::one()).unwrap(), x);
        let p = multiply(&x, &Expr::v(ix('k'), ix('l'))).unwrap();
        assert_eq!(p.to_string(), "1 * v[i,j] v[k,l]");
    }

    #[test]
    fn multiply_contracts_shared_index() {
        let left = Expr::v(ix('i'), ix('k'));
        let right = Expr::u(ix('k'), ix('j'));
        assert_eq!(multiply(&left, &right).unwrap(), Expr::delta(ix('i'), ix('j')));
    }

    #[test]
    fn counit_of_letters() {
        assert_eq!(
            counit(&Expr::v(ix('i'), ix('j'))).unwrap(),
            Expr::delta(ix('i'), ix('j'))
        );
        assert_eq!(
            counit(&Expr::u(ix('i'), ix('j'))).unwrap(),
            Expr::delta(ix('i'), ix('j'))
        );
        let x = word(vec![], vec![Letter::v(ix('i'), ix('k')), Letter::u(ix('k'), ix('j'))]);
        let direct = counit(&x).unwrap();
        let via_r2 = counit(&normalize(&x, &RuleSet::CONTRACT).unwrap()).unwrap();
        assert_eq!(direct, via_r2);
        assert_eq!(direct, Expr::delta(ix('i'), ix('j')));
    }

    #[test]
    fn sym_requires_subst_or_binding() {
        let bad = RuleSet {
            sym: true,
            ..RuleSet::CONTRACT
        };
        assert!(normalize(&Expr::one(), &bad).is_err());
        assert!(normalize(&Expr::one(), &bad.with_eps(-1)).is_ok());
    }

    #[test]
    fn colinearity_rule() {
        // E[#i,#r] v[#i,j] v[#r,s] -> E[j,s]
        let x = word(
            vec![ScalarAtom::new(ScalarKind::FormE, ix('a'), ix('b'))],
            vec![Letter::v(ix('a'), ix('j')), Letter::v(ix('b'), ix('s'))],
        );
        let n = normalize(&x, &RuleSet::CONTRACT.with_colin()).unwrap();
        assert_eq!(n, Expr::scalar(ScalarKind::FormE, ix('j'), ix('s')));
        assert_eq!(normalize(&x, &RuleSet::CONTRACT).unwrap().len(), 1);
    }
}
