//! Differential forms over coordinate covectors.
//!
//! Every symbol is a coordinate, so `d` of a coefficient ranges over all
//! symbols it mentions. A `p`-form stores one coefficient per strictly
//! increasing `p`-tuple of covectors; zero coefficients are never stored.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::Signed;

use crate::algebra::{RationalExpr, Symbol};
use crate::equation::SolvedSystem;
use crate::error::Result;

#[derive(Clone, PartialEq, Eq)]
pub struct DifferentialForm {
    degree: usize,
    terms: BTreeMap<Vec<Symbol>, RationalExpr>,
}

impl DifferentialForm {
    pub fn zero(degree: usize) -> Self {
        DifferentialForm {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(f: RationalExpr) -> Self {
        let mut out = Self::zero(0);
        out.add_term(Vec::new(), f);
        out
    }

    /// The coordinate differential `ds`.
    pub fn differential(s: Symbol) -> Self {
        let mut out = Self::zero(1);
        out.add_term(vec![s], RationalExpr::one());
        out
    }

    /// `sum_k coeff_k * d(s_k)`.
    pub fn one_form<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Symbol, RationalExpr)>,
    {
        let mut out = Self::zero(1);
        for (s, c) in terms {
            out.add_term(vec![s], c);
        }
        out
    }

    /// `f * ds_1 ^ ... ^ ds_p` for arbitrary covector order.
    pub fn monomial(f: RationalExpr, covectors: &[Symbol]) -> Self {
        let mut basis = covectors.to_vec();
        let mut out = Self::zero(basis.len());
        match sort_with_sign(&mut basis) {
            Some(negative) => {
                out.add_term(basis, if negative { -f } else { f });
                out
            }
            None => out,
        }
    }

    /// `sum_k c_k * form_k`, adding each coefficient over one common
    /// denominator.
    pub fn linear_combination(parts: &[(RationalExpr, &DifferentialForm)]) -> Self {
        let degree = parts.first().map_or(1, |(_, f)| f.degree);
        let mut buckets: BTreeMap<Vec<Symbol>, Vec<RationalExpr>> = BTreeMap::new();
        for (c, f) in parts {
            if c.is_zero() {
                continue;
            }
            for (basis, coeff) in &f.terms {
                buckets.entry(basis.clone()).or_default().push(c * coeff);
            }
        }
        let mut out = Self::zero(degree);
        for (basis, cs) in buckets {
            let total = RationalExpr::sum(&cs);
            if !total.is_zero() {
                out.terms.insert(basis, total);
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Symbol], &RationalExpr)> {
        self.terms.iter().map(|(b, c)| (b.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `ds_1 ^ ... ^ ds_p` in the given covector order.
    pub fn coefficient(&self, covectors: &[Symbol]) -> RationalExpr {
        let mut basis = covectors.to_vec();
        match sort_with_sign(&mut basis) {
            Some(negative) => {
                let c = self.terms.get(&basis).cloned().unwrap_or_default();
                if negative {
                    -c
                } else {
                    c
                }
            }
            None => RationalExpr::zero(),
        }
    }

    /// Symbols whose differentials occur.
    pub fn covectors(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flatten().copied().collect()
    }

    /// Symbols occurring anywhere: in coefficients or as covectors.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = self.covectors();
        for c in self.terms.values() {
            c.collect_symbols(&mut out);
        }
        out
    }

    fn add_term(&mut self, basis: Vec<Symbol>, c: RationalExpr) {
        debug_assert_eq!(basis.len(), self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(basis) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, f: &RationalExpr) -> Self {
        let mut out = Self::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c * f);
        }
        out
    }

    pub fn try_map_coefficients<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&RationalExpr) -> Result<RationalExpr>,
    {
        let mut out = Self::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((basis, negative)) = merge_with_sign(a, b) {
                    let c = ca * cb;
                    out.add_term(basis, if negative { -c } else { c });
                }
            }
        }
        out
    }

    /// Exterior derivative; every symbol in a coefficient is a coordinate.
    pub fn exterior_derivative(&self) -> Self {
        let mut out = Self::zero(self.degree + 1);
        for (basis, c) in &self.terms {
            for s in c.symbols() {
                let Err(pos) = basis.binary_search(&s) else {
                    continue;
                };
                let dc = c.partial_derivative(s);
                if dc.is_zero() {
                    continue;
                }
                let mut b = basis.clone();
                b.insert(pos, s);
                out.add_term(b, if pos % 2 == 1 { -dc } else { dc });
            }
        }
        out
    }

    /// Pullback along the substitution `s -> rules[s]`: coefficients are
    /// substituted and each `ds` becomes `d(rules[s])`.
    pub fn pullback(&self, rules: &HashMap<Symbol, RationalExpr>) -> Result<Self> {
        let mut images: HashMap<Symbol, DifferentialForm> = HashMap::new();
        for s in self.covectors() {
            if let Some(r) = rules.get(&s) {
                images.insert(s, DifferentialForm::scalar(r.clone()).exterior_derivative());
            }
        }
        let mut out = Self::zero(self.degree);
        for (basis, c) in &self.terms {
            let coeff = c.substitute_unchecked(rules)?;
            if coeff.is_zero() {
                continue;
            }
            let mut acc = DifferentialForm::scalar(coeff);
            for s in basis {
                let image = images
                    .get(s)
                    .cloned()
                    .unwrap_or_else(|| DifferentialForm::differential(*s));
                acc = acc.wedge(&image);
                if acc.is_zero() {
                    break;
                }
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    /// Restriction to the equation manifold: each principal jet in a
    /// coefficient is replaced by its normal form, and its differential by
    /// the differential of that normal form.
    pub fn pullback_on_equation(&self, system: &SolvedSystem) -> Result<Self> {
        let mut rules = HashMap::new();
        for s in self.symbols() {
            if let Some(nf) = system.normal_form_of(s)? {
                rules.insert(s, nf);
            }
        }
        if rules.is_empty() {
            return Ok(self.clone());
        }
        self.pullback(&rules)
    }
}

/// Sorts covectors, returning whether the permutation was odd, or `None`
/// when a covector repeats.
fn sort_with_sign(basis: &mut [Symbol]) -> Option<bool> {
    let mut negative = false;
    for i in 1..basis.len() {
        let mut j = i;
        while j > 0 && basis[j - 1] > basis[j] {
            basis.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
        if j > 0 && basis[j - 1] == basis[j] {
            return None;
        }
    }
    Some(negative)
}

fn merge_with_sign(a: &[Symbol], b: &[Symbol]) -> Option<(Vec<Symbol>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            inversions += a.len() - i;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, inversions % 2 == 1))
}

/// Outcome of [`annihilation_check`].
#[derive(Clone, Debug)]
pub struct Annihilation {
    pub holds: bool,
    pub residual: DifferentialForm,
}

/// Tests `omega ^ g_1 ^ ... ^ g_m == 0`.
///
/// When the generators are pointwise linearly independent this is exactly
/// membership of `omega` in the algebraic ideal they generate, in every
/// degree. For dependent generators it is only a necessary condition.
pub fn annihilation_check(omega: &DifferentialForm, generators: &[DifferentialForm]) -> Annihilation {
    let mut acc = omega.clone();
    for g in generators {
        if acc.is_zero() {
            break;
        }
        acc = acc.wedge(g);
    }
    Annihilation {
        holds: acc.is_zero(),
        residual: acc,
    }
}

impl Add for &DifferentialForm {
    type Output = DifferentialForm;
    fn add(self, rhs: &DifferentialForm) -> DifferentialForm {
        if self.is_zero() {
            return rhs.clone();
        }
        let mut out = self.clone();
        if !rhs.is_zero() {
            assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        }
        for (b, c) in &rhs.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DifferentialForm {
    type Output = DifferentialForm;
    fn sub(self, rhs: &DifferentialForm) -> DifferentialForm {
        self + &(-rhs)
    }
}

impl Neg for &DifferentialForm {
    type Output = DifferentialForm;
    fn neg(self) -> DifferentialForm {
        DifferentialForm {
            degree: self.degree,
            terms: self.terms.iter().map(|(b, c)| (b.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (basis, c)) in self.terms.iter().enumerate() {
            let negative = c
                .numer()
                .leading_term()
                .is_some_and(|(_, lc)| lc.is_negative());
            let shown = if negative { -c } else { c.clone() };
            if negative {
                f.write_str("-")?;
            } else if k > 0 {
                f.write_str("+")?;
            }
            let body = shown.to_string();
            let wedge: Vec<String> = basis.iter().map(|s| format!("d{s}")).collect();
            let wedge = wedge.join("^");
            if basis.is_empty() {
                if negative && !shown.is_atomic_factor() {
                    write!(f, "({body})")?;
                } else {
                    f.write_str(&body)?;
                }
            } else if shown.is_one() {
                f.write_str(&wedge)?;
            } else if shown.is_atomic_factor() {
                write!(f, "{body}*{wedge}")?;
            } else {
                write!(f, "({body})*{wedge}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
