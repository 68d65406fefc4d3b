//! Abstract-index noncommutative expressions over the matrix coefficients
//! `v[i,j]` of a comodule and their antipodes `u[i,j] = S(v[i,j])`.
//!
//! A [`Term`] is a coefficient times a commutative product of scalar atoms
//! times an ordered tensor of letter words. Indices follow the Einstein
//! convention: every [`Index::Dummy`] occurs in exactly two slots of its term
//! and is summed over `1..=N`. A [`Chain`] is a formal sum of terms with a
//! fixed number of tensor factors; an [`Expr`] is a chain with one factor.
//!
//! # Text form
//!
//! Terms render as
//!
//! ```text
//! term    := [ "sum{" dummy ("," dummy)* "} " ] coeff " * " ( scalar " " )* factors
//! factors := word ( " | " word )*
//! word    := "1" | letter ( " " letter )*
//! scalar  := ("delta" | "E" | "Einv" | "F1" | "F2" | "F3") "[" index "," index "]"
//! letter  := ("v" | "u") "[" index "," index "]"
//! index   := "#" n        (summed)
//!          | name         (free)
//!          | "=" n        (fixed basis value, 1-based)
//! ```
//!
//! and a chain renders as its canonical terms, one per line (`0` when empty).

mod canon;
mod eval;
mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use eval::{evaluate_scalar_network, ScalarBindings};
pub use rules::{
    counit, multiply, normalize, normalize_chain, normalize_chain_with_stats, specialize_identity_form, NormalizeStats,
    RuleSet,
};

use crate::coeff::Coeff;
use crate::Error;

/// An index slot value.
///
/// Variant order is the canonical ordering used when sorting atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    /// A concrete basis value in `1..=N`.
    Value(u32),
    /// An external (unsummed) index.
    Free(u32),
    /// A summation index local to its term.
    Dummy(u32),
}

impl Index {
    pub fn named(c: char) -> Index {
        Index::Free(c as u32)
    }

    pub fn is_dummy(self) -> bool {
        matches!(self, Index::Dummy(_))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Index::Value(v) => write!(f, "={v}"),
            Index::Dummy(d) => write!(f, "#{d}"),
            Index::Free(n) => match char::from_u32(n).filter(|c| c.is_ascii_alphabetic()) {
                Some(c) => write!(f, "{c}"),
                None => write!(f, "x{n}"),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScalarKind {
    Delta,
    FormE,
    FormEInv,
    /// Matrix of the primitive element in slot 1, 2 or 3.
    DerMat(u8),
}

impl ScalarKind {
    fn name(self) -> String {
        match self {
            ScalarKind::Delta => "delta".into(),
            ScalarKind::FormE => "E".into(),
            ScalarKind::FormEInv => "Einv".into(),
            ScalarKind::DerMat(m) => format!("F{m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarAtom {
    pub kind: ScalarKind,
    pub row: Index,
    pub col: Index,
}

impl ScalarAtom {
    pub fn new(kind: ScalarKind, row: Index, col: Index) -> Self {
        ScalarAtom { kind, row, col }
    }
}

impl fmt::Display for ScalarAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}]", self.kind.name(), self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LetterKind {
    V,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub kind: LetterKind,
    pub row: Index,
    pub col: Index,
}

impl Letter {
    pub fn v(row: Index, col: Index) -> Self {
        Letter {
            kind: LetterKind::V,
            row,
            col,
        }
    }

    pub fn u(row: Index, col: Index) -> Self {
        Letter {
            kind: LetterKind::U,
            row,
            col,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            LetterKind::V => "v",
            LetterKind::U => "u",
        };
        write!(f, "{name}[{},{}]", self.row, self.col)
    }
}

/// An ordered product of letters; the empty word is the unit.
pub type Word = Vec<Letter>;

/// Coefficient-free part of a term, used as the key when merging.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub scalars: Vec<ScalarAtom>,
    pub factors: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Coeff,
    pub scalars: Vec<ScalarAtom>,
    pub factors: Vec<Word>,
}

impl Term {
    pub fn new(coeff: Coeff, scalars: Vec<ScalarAtom>, factors: Vec<Word>) -> Self {
        Term {
            coeff,
            scalars,
            factors,
        }
    }

    /// The unit of `A^{⊗ arity}`.
    pub fn unit(arity: usize) -> Self {
        Term {
            coeff: Coeff::one(),
            scalars: vec![],
            factors: vec![vec![]; arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn letter_count(&self) -> usize {
        self.factors.iter().map(Vec::len).sum()
    }

    pub fn u_count(&self) -> usize {
        self.factors
            .iter()
            .flatten()
            .filter(|l| l.kind == LetterKind::U)
            .count()
    }

    pub fn has_letters(&self) -> bool {
        self.factors.iter().any(|w| !w.is_empty())
    }

    pub fn indices(&self) -> impl Iterator<Item = Index> + '_ {
        self.scalars
            .iter()
            .flat_map(|s| [s.row, s.col])
            .chain(self.factors.iter().flatten().flat_map(|l| [l.row, l.col]))
    }

    fn indices_mut(&mut self) -> impl Iterator<Item = &mut Index> + '_ {
        self.scalars
            .iter_mut()
            .flat_map(|s| [&mut s.row, &mut s.col])
            .chain(self.factors.iter_mut().flatten().flat_map(|l| [&mut l.row, &mut l.col]))
    }

    pub fn occurrences(&self) -> BTreeMap<Index, usize> {
        let mut counts = BTreeMap::new();
        for ix in self.indices() {
            *counts.entry(ix).or_insert(0) += 1;
        }
        counts
    }

    pub fn free_indices(&self) -> BTreeSet<Index> {
        self.indices().filter(|ix| matches!(ix, Index::Free(_))).collect()
    }

    pub fn dummies(&self) -> BTreeSet<Index> {
        self.indices().filter(|ix| ix.is_dummy()).collect()
    }

    pub fn next_dummy(&self) -> u32 {
        self.indices()
            .filter_map(|ix| match ix {
                Index::Dummy(d) => Some(d + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Checks the Einstein convention: dummies occur exactly twice, free
    /// indices at most once.
    pub fn validate(&self) -> Result<(), Error> {
        for (ix, n) in self.occurrences() {
            match ix {
                Index::Dummy(_) if n != 2 => {
                    return Err(Error::Structural(format!(
                        "summed index {ix} occurs {n} times in {self}"
                    )))
                }
                Index::Free(_) if n != 1 => {
                    return Err(Error::Structural(format!("free index {ix} occurs {n} times in {self}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn substitute(&mut self, from: Index, to: Index) {
        for ix in self.indices_mut() {
            if *ix == from {
                *ix = to;
            }
        }
    }

    pub(crate) fn shift_dummies(&mut self, offset: u32) {
        for ix in self.indices_mut() {
            if let Index::Dummy(d) = ix {
                *d += offset;
            }
        }
    }

    /// Turns every free index that occurs exactly twice into a summation index.
    pub fn einstein(mut self) -> Result<Self, Error> {
        let mut next = self.next_dummy();
        let mut map = HashMap::new();
        for (ix, n) in self.occurrences() {
            if let Index::Free(_) = ix {
                match n {
                    1 => {}
                    2 => {
                        map.insert(ix, Index::Dummy(next));
                        next += 1;
                    }
                    _ => return Err(Error::Structural(format!("index {ix} repeated {n} times in a product"))),
                }
            }
        }
        for ix in self.indices_mut() {
            if let Some(to) = map.get(ix) {
                *ix = *to;
            }
        }
        Ok(self)
    }

    /// Declares the given free index summed.
    pub fn sum_over(mut self, ix: Index) -> Result<Self, Error> {
        let n = self.indices().filter(|&x| x == ix).count();
        if n != 2 {
            return Err(Error::Structural(format!("cannot sum {ix}: it occurs {n} times")));
        }
        let d = Index::Dummy(self.next_dummy());
        self.substitute(ix, d);
        Ok(self)
    }

    /// Tensor product; dummies of `other` are renamed apart first.
    pub fn tensor(&self, other: &Term) -> Term {
        let mut o = other.clone();
        o.shift_dummies(self.next_dummy());
        let mut scalars = self.scalars.clone();
        scalars.extend(o.scalars);
        let mut factors = self.factors.clone();
        factors.extend(o.factors);
        Term {
            coeff: &self.coeff * &o.coeff,
            scalars,
            factors,
        }
    }

    pub fn monomial(&self) -> Monomial {
        Monomial {
            scalars: self.scalars.clone(),
            factors: self.factors.clone(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.factors.iter().skip(1).any(Vec::is_empty)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dummies = self.dummies();
        if !dummies.is_empty() {
            let list: Vec<String> = dummies.iter().map(ToString::to_string).collect();
            write!(f, "sum{{{}}} ", list.join(","))?;
        }
        write!(f, "{} *", self.coeff)?;
        for s in &self.scalars {
            write!(f, " {s}")?;
        }
        for (k, w) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, " |")?;
            }
            if w.is_empty() {
                write!(f, " 1")?;
            } else {
                for l in w {
                    write!(f, " {l}")?;
                }
            }
        }
        Ok(())
    }
}

/// Formal sum of terms sharing the same number of tensor factors.
///
/// A chain of degree `n` lives in `A^{⊗ (n+1)}`. Construction merges only
/// syntactically identical monomials; call [`normalize_chain`] for canonical
/// forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chain {
    degree: usize,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Chain {
    pub fn zero(degree: usize) -> Self {
        Chain {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = Term>) -> Result<Self, Error> {
        let mut c = Chain::zero(degree);
        for t in terms {
            c.push(t)?;
        }
        Ok(c)
    }

    /// Builds `x0 ⊗ x1 ⊗ ... ⊗ xn`; free indices shared between factors are
    /// summed.
    pub fn tensor(factors: &[Expr]) -> Result<Self, Error> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("tensor of no factors".into()));
        }
        let mut acc = vec![Term::new(Coeff::one(), vec![], vec![])];
        for x in factors {
            let mut next = Vec::new();
            for a in &acc {
                for b in x.terms() {
                    next.push(a.tensor(&b));
                }
            }
            acc = next;
        }
        let terms: Result<Vec<_>, _> = acc.into_iter().map(Term::einstein).collect();
        Chain::from_terms(factors.len() - 1, terms?)
    }

    pub fn push(&mut self, t: Term) -> Result<(), Error> {
        if t.arity() != self.degree + 1 {
            return Err(Error::WrongDegree {
                expected: format!("{} tensor factors", self.degree + 1),
                got: t.arity(),
            });
        }
        t.validate()?;
        self.push_unchecked(t);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, t: Term) {
        if t.coeff.is_zero() {
            return;
        }
        let key = Monomial {
            scalars: t.scalars,
            factors: t.factors,
        };
        let slot = self.terms.entry(key.clone()).or_insert_with(Coeff::zero);
        *slot += &t.coeff;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|(m, c)| Term {
            coeff: c.clone(),
            scalars: m.scalars.clone(),
            factors: m.factors.clone(),
        })
    }

    pub fn scale(&self, c: &Coeff) -> Chain {
        let mut out = Chain::zero(self.degree);
        for t in self.terms() {
            out.push_unchecked(Term {
                coeff: &t.coeff * c,
                ..t
            });
        }
        out
    }

    pub fn add(&self, other: &Chain) -> Result<Chain, Error> {
        if other.degree != self.degree {
            return Err(Error::WrongDegree {
                expected: self.degree.to_string(),
                got: other.degree,
            });
        }
        let mut out = self.clone();
        for t in other.terms() {
            out.push_unchecked(t);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain, Error> {
        self.add(&other.scale(&Coeff::from_int(-1)))
    }

    pub fn free_indices(&self) -> BTreeSet<Index> {
        self.terms().flat_map(|t| t.free_indices()).collect()
    }

    /// Every term obeys the Einstein convention and all terms share the same
    /// free indices.
    pub fn validate(&self) -> Result<(), Error> {
        let mut expected: Option<BTreeSet<Index>> = None;
        for t in self.terms() {
            t.validate()?;
            let free = t.free_indices();
            match &expected {
                None => expected = Some(free),
                Some(e) if *e != free => {
                    return Err(Error::Structural(format!(
                        "terms have different free indices: {e:?} vs {free:?}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Drops terms with a unit in tensor positions `1..=n`, i.e. projects to
    /// the normalized Hochschild complex `A ⊗ Ā^{⊗n}`.
    pub fn drop_degenerate(&self) -> Chain {
        let mut out = Chain::zero(self.degree);
        for t in self.terms().filter(|t| !t.is_degenerate()) {
            out.push_unchecked(t);
        }
        out
    }

    /// The terms with a unit in some position `1..=n`.
    pub fn degenerate_part(&self) -> Chain {
        let mut out = Chain::zero(self.degree);
        for t in self.terms().filter(Term::is_degenerate) {
            out.push_unchecked(t);
        }
        out
    }

    /// Number of concrete summands after expanding every summation index over
    /// `1..=n`.
    pub fn concrete_summand_count(&self, n: u32) -> u64 {
        self.terms().map(|t| (n as u64).pow(t.dummies().len() as u32)).sum()
    }

    pub fn map_terms(&self, mut f: impl FnMut(Term) -> Term) -> Chain {
        let mut out = Chain::zero(self.degree);
        for t in self.terms() {
            out.push_unchecked(f(t));
        }
        out
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// An element of `A`: a chain with a single tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr(Chain);

impl Expr {
    pub fn zero() -> Self {
        Expr(Chain::zero(0))
    }

    pub fn one() -> Self {
        Expr::from_term(Term::unit(1)).unwrap()
    }

    pub fn constant(c: Coeff) -> Self {
        Expr(Chain::zero(0)).add(&Expr::one().scale(&c))
    }

    pub fn from_term(t: Term) -> Result<Self, Error> {
        Chain::from_terms(0, [t]).map(Expr)
    }

    pub fn from_chain(c: Chain) -> Result<Self, Error> {
        if c.degree() != 0 {
            return Err(Error::WrongDegree {
                expected: "0".into(),
                got: c.degree(),
            });
        }
        Ok(Expr(c))
    }

    pub fn word(coeff: Coeff, scalars: Vec<ScalarAtom>, word: Word) -> Result<Self, Error> {
        Expr::from_term(Term::new(coeff, scalars, vec![word]).einstein()?)
    }

    pub fn letter(l: Letter) -> Self {
        Expr::word(Coeff::one(), vec![], vec![l]).expect("single letter with distinct free indices")
    }

    pub fn v(row: Index, col: Index) -> Self {
        Expr::letter(Letter::v(row, col))
    }

    pub fn u(row: Index, col: Index) -> Self {
        Expr::letter(Letter::u(row, col))
    }

    pub fn scalar(kind: ScalarKind, row: Index, col: Index) -> Self {
        Expr::word(Coeff::one(), vec![ScalarAtom::new(kind, row, col)], vec![]).expect("single scalar atom")
    }

    pub fn delta(row: Index, col: Index) -> Self {
        Expr::scalar(ScalarKind::Delta, row, col)
    }

    pub fn chain(&self) -> &Chain {
        &self.0
    }

    pub fn into_chain(self) -> Chain {
        self.0
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.0.terms()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr(self.0.add(&other.0).expect("same degree"))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr(self.0.sub(&other.0).expect("same degree"))
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        Expr(self.0.scale(c))
    }

    /// Declares a free index summed in every term.
    pub fn sum_over(&self, ix: Index) -> Result<Expr, Error> {
        let terms: Result<Vec<_>, _> = self.terms().map(|t| t.sum_over(ix)).collect();
        Chain::from_terms(0, terms?).map(Expr)
    }

    /// True when no term contains a letter.
    pub fn is_scalar_network(&self) -> bool {
        self.terms().all(|t| !t.has_letters())
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.0.validate()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
