//! Sparse multivariate polynomials over the rationals.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Symbol;

/// A power product of symbols. Exponents are strictly positive and the
/// factors are sorted by symbol.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(Symbol, u32)>,
    degree: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(s: Symbol, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial {
            factors: vec![(s, exp)],
            degree: exp,
        }
    }

    fn from_sorted(factors: Vec<(Symbol, u32)>) -> Self {
        let degree = factors.iter().map(|&(_, e)| e).sum();
        Monomial { factors, degree }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.factors
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.factors
            .iter()
            .find(|(t, _)| *t == s)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = self.factors[i];
            let (b, eb) = other.factors[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial {
            factors: out,
            degree: self.degree + other.degree,
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.degree > self.degree {
            return None;
        }
        let mut out = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for &(s, e) in &self.factors {
            if j < other.factors.len() && other.factors[j].0 == s {
                let d = other.factors[j].1;
                if d > e {
                    return None;
                }
                if e > d {
                    out.push((s, e - d));
                }
                j += 1;
            } else if j < other.factors.len() && other.factors[j].0 < s {
                return None;
            } else {
                out.push((s, e));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial::from_sorted(out))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        self.mul(other)
            .div(&self.gcd(other))
            .expect("the gcd divides the product")
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = self.factors[i];
            let (b, eb) = other.factors[j];
            match a.cmp(&b) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((a, ea.min(eb)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial::from_sorted(out)
    }

    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.factors.get(i), other.factors.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(a, ea)), Some(&(b, eb))) => {
                    if a == b {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    } else if a < b {
                        return Ordering::Greater;
                    } else {
                        return Ordering::Less;
                    }
                }
            }
        }
    }
}

/// Graded lexicographic order; symbols earlier in the symbol order rank higher.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (k, (s, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A polynomial with nonzero rational coefficients, iterated in ascending
/// graded-lex order (the leading term is the last one).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(s: Symbol) -> Self {
        Self::term(Monomial::var(s, 1), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<&BigRational> {
        match self.terms.len() {
            1 => self.terms.get(&Monomial::one()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&BigRational> {
        self.terms.get(m)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            out.extend(m.factors.iter().map(|&(s, _)| s));
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|m| m.exponent(s) > 0)
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(n, k)| (n.mul(m), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, s: Symbol) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e == 0 {
                continue;
            }
            let factors = m
                .factors
                .iter()
                .filter_map(|&(t, f)| match t == s {
                    true if f == 1 => None,
                    true => Some((t, f - 1)),
                    false => Some((t, f)),
                })
                .collect();
            out.add_term(
                Monomial::from_sorted(factors),
                c * BigRational::from_integer(BigInt::from(e)),
            );
        }
        out
    }

    /// Greatest common divisor of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Polynomial> {
        let mut terms = BTreeMap::new();
        for (n, c) in &self.terms {
            terms.insert(n.div(m)?, c.clone());
        }
        Some(Polynomial { terms })
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder.
    pub fn div_exact(&self, divisor: &Polynomial) -> Option<Polynomial> {
        let (lm, lc) = divisor.leading_term()?;
        if self.is_zero() {
            return Some(Polynomial::zero());
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if self.total_degree() < divisor.total_degree() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((rm, rc)) = rem.leading_term() {
            let m = rm.div(lm)?;
            let c = rc / lc;
            rem = &rem - &divisor.mul_term(&m, &c);
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Least common multiple of the coefficient denominators.
    pub(crate) fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Greatest common divisor of the coefficient numerators.
    pub(crate) fn numerator_gcd(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    /// Applies `f` to every coefficient, dropping terms that become zero.
    pub fn map_coefficients(&self, f: impl Fn(&BigRational) -> BigRational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// A single term with coefficient one.
    pub(crate) fn is_bare_monomial(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| c.is_one())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(c);
        }
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

pub(crate) fn fmt_rational(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Canonical, space-free rendering: terms from the leading one down.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if neg {
                f.write_str("-")?;
            } else if k > 0 {
                f.write_str("+")?;
            }
            let a = c.abs();
            if m.is_one() {
                fmt_rational(&a, f)?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                fmt_rational(&a, f)?;
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
