//! Coefficient ring of the expression engine.
//!
//! Elements are polynomials in the comodule dimension `N` whose coefficients
//! lie in `Q[e]/(e^2 - 1)`, where `e` is the sign of the bilinear form
//! (`E^T = e E`). Both symbols stay formal until explicitly bound.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Mono {
    n_pow: u32,
    eps: bool,
}

/// Exact coefficient `sum_k (a_k + b_k e) N^k`.
///
/// The zero polynomial has no stored monomials, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    terms: BTreeMap<Mono, BigRational>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::from_rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut c = Coeff::zero();
        c.insert(Mono { n_pow: 0, eps: false }, q);
        c
    }

    /// The formal sign symbol `e`.
    pub fn eps() -> Self {
        let mut c = Coeff::zero();
        c.insert(Mono { n_pow: 0, eps: true }, BigRational::one());
        c
    }

    /// The formal dimension symbol `N`.
    pub fn dim() -> Self {
        let mut c = Coeff::zero();
        c.insert(Mono { n_pow: 1, eps: false }, BigRational::one());
        c
    }

    fn insert(&mut self, m: Mono, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(BigRational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Coeff::one()
    }

    /// True when neither `N` nor `e` occurs.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, q) = self.terms.iter().next().unwrap();
                (m.n_pow == 0 && !m.eps).then(|| q.clone())
            }
            _ => None,
        }
    }

    pub fn mentions_eps(&self) -> bool {
        self.terms.keys().any(|m| m.eps)
    }

    pub fn mentions_dim(&self) -> bool {
        self.terms.keys().any(|m| m.n_pow > 0)
    }

    pub fn scale(&self, q: &BigRational) -> Coeff {
        let mut out = Coeff::zero();
        for (m, c) in &self.terms {
            out.insert(*m, c * q);
        }
        out
    }

    /// Substitutes `e = sign` (`sign` must be +1 or -1).
    pub fn bind_eps(&self, sign: i8) -> Result<Coeff, Error> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput(format!("sign must be +1 or -1, got {sign}")));
        }
        let mut out = Coeff::zero();
        for (m, c) in &self.terms {
            let c = if m.eps && sign < 0 { -c.clone() } else { c.clone() };
            out.insert(
                Mono {
                    n_pow: m.n_pow,
                    eps: false,
                },
                c,
            );
        }
        Ok(out)
    }

    /// Substitutes `N = n`.
    pub fn bind_dim(&self, n: u32) -> Coeff {
        let mut out = Coeff::zero();
        let n = BigRational::from_integer(BigInt::from(n));
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for _ in 0..m.n_pow {
                v *= &n;
            }
            out.insert(Mono { n_pow: 0, eps: m.eps }, v);
        }
        out
    }

    /// Full evaluation. `eps` may be omitted only when `e` does not occur.
    pub fn evaluate(&self, n: u32, eps: Option<i8>) -> Result<BigRational, Error> {
        let c = self.bind_dim(n);
        let c = match eps {
            Some(s) => c.bind_eps(s)?,
            None => c,
        };
        c.as_rational()
            .ok_or_else(|| Error::UnboundAtom("sign symbol e".into()))
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::from_int(n)
    }
}

impl From<BigRational> for Coeff {
    fn from(q: BigRational) -> Self {
        Coeff::from_rational(q)
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(mut self, rhs: Coeff) -> Coeff {
        self += &rhs;
        self
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        for (m, c) in &rhs.terms {
            self.insert(*m, c.clone());
        }
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        self + &(-rhs)
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (ma, a) in &self.terms {
            for (mb, b) in &rhs.terms {
                // e^2 = 1
                let m = Mono {
                    n_pow: ma.n_pow + mb.n_pow,
                    eps: ma.eps ^ mb.eps,
                };
                out.insert(m, a * b);
            }
        }
        out
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `-p`, or `p/q`.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut symbols = Vec::new();
            if m.eps {
                symbols.push("e".to_string());
            }
            match m.n_pow {
                0 => {}
                1 => symbols.push("N".to_string()),
                k => symbols.push(format!("N^{k}")),
            }
            let body = if symbols.is_empty() {
                format_rational(&c.abs())
            } else if c.abs().is_one() {
                symbols.join("*")
            } else {
                format!("{}*{}", format_rational(&c.abs()), symbols.join("*"))
            };
            parts.push((c.is_negative(), body));
        }
        let mut out = String::new();
        for (k, (neg, body)) in parts.iter().enumerate() {
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(body);
        }
        if parts.len() > 1 {
            write!(f, "({out})")
        } else {
            write!(f, "{out}")
        }
    }
}
