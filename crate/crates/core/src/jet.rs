//! Jet coordinates and total derivatives.
//!
//! A [`JetContext`] fixes the independent variables, the dependent variables
//! and an order budget. Every jet coordinate `u_I` with `#I <= max_order` is
//! interned up front; asking for anything beyond the budget is an error, so
//! truncation never happens silently.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{RationalExpr, Symbol};
use crate::error::{Error, Result};

/// A symmetric multi-index, stored as sorted positions of independent
/// variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(vec![i])
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn with(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        let at = v.partition_point(|&j| j <= i);
        v.insert(at, i);
        MultiIndex(v)
    }

    pub fn count(&self, i: usize) -> usize {
        self.0.iter().filter(|&&j| j == i).count()
    }

    /// Multiset difference `self - other`, if `other` is contained in `self`.
    pub fn strip(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut rest = self.0.clone();
        for i in &other.0 {
            let pos = rest.iter().position(|j| j == i)?;
            rest.remove(pos);
        }
        Some(MultiIndex(rest))
    }

    /// Removes one occurrence of the last index.
    pub fn split_last(&self) -> Option<(MultiIndex, usize)> {
        let (&last, rest) = self.0.split_last()?;
        Some((MultiIndex(rest.to_vec()), last))
    }

    /// All multi-indices over `n` variables of exactly order `k`.
    pub fn all_of_order(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, k, i, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, k, 0, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Where a jet symbol sits: dependent variable position and multi-index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetCoordinate {
    pub dependent: usize,
    pub index: MultiIndex,
}

#[derive(Debug)]
pub struct JetContext {
    independent: Vec<Symbol>,
    tags: Vec<String>,
    dependent: Vec<Symbol>,
    max_order: usize,
    coords: HashMap<(usize, MultiIndex), Symbol>,
    lookup: HashMap<Symbol, JetCoordinate>,
    positions: HashMap<Symbol, usize>,
}

impl JetContext {
    /// Builds the coordinate table for all jets up to `max_order`.
    ///
    /// Derivative subscripts list variables in declaration order. A variable
    /// with a one-character name contributes that character; longer names
    /// contribute their 1-based position, so `x1, x2` give `u_12`.
    pub fn new(independent: &[&str], dependent: &[&str], max_order: usize) -> Result<Arc<Self>> {
        if independent.is_empty() {
            return Err(Error::Invalid("at least one independent variable is required".into()));
        }
        let mut seen = BTreeSet::new();
        for name in independent.iter().chain(dependent) {
            if name.is_empty() || !seen.insert(*name) {
                return Err(Error::Invalid(format!("duplicate or empty variable name {name:?}")));
            }
        }
        let tags: Vec<String> = if independent.iter().all(|n| n.chars().count() == 1) {
            independent.iter().map(|n| n.to_string()).collect()
        } else {
            (1..=independent.len()).map(|k| k.to_string()).collect()
        };
        let mut ctx = JetContext {
            independent: independent.iter().map(|n| Symbol::new(n)).collect(),
            tags,
            dependent: dependent.iter().map(|n| Symbol::new(n)).collect(),
            max_order,
            coords: HashMap::new(),
            lookup: HashMap::new(),
            positions: HashMap::new(),
        };
        for (i, s) in ctx.independent.iter().enumerate() {
            ctx.positions.insert(*s, i);
        }
        for d in 0..ctx.dependent.len() {
            for k in 0..=max_order {
                for index in MultiIndex::all_of_order(independent.len(), k) {
                    let sym = Symbol::new(&ctx.jet_name(d, &index));
                    if ctx.positions.contains_key(&sym) || ctx.lookup.contains_key(&sym) {
                        return Err(Error::Invalid(format!("jet name {sym} collides")));
                    }
                    ctx.coords.insert((d, index.clone()), sym);
                    ctx.lookup.insert(sym, JetCoordinate { dependent: d, index });
                }
            }
        }
        Ok(Arc::new(ctx))
    }

    fn jet_name(&self, dep: usize, index: &MultiIndex) -> String {
        let base = self.dependent[dep].name();
        if index.order() == 0 {
            return base.to_string();
        }
        let subscript: String = index.indices().iter().map(|&i| self.tags[i].as_str()).collect();
        format!("{base}_{subscript}")
    }

    pub fn independent(&self) -> &[Symbol] {
        &self.independent
    }

    pub fn dependent(&self) -> &[Symbol] {
        &self.dependent
    }

    pub fn dimension(&self) -> usize {
        self.independent.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn independent_position(&self, s: Symbol) -> Option<usize> {
        self.positions.get(&s).copied()
    }

    pub fn dependent_position(&self, s: Symbol) -> Option<usize> {
        self.dependent.iter().position(|d| *d == s)
    }

    /// Parses a derivative subscript such as `"yx"` into a multi-index.
    pub fn index_from_tags(&self, subscript: &str) -> Option<MultiIndex> {
        let mut out = Vec::new();
        let mut rest = subscript;
        while !rest.is_empty() {
            let (pos, tag) = self
                .tags
                .iter()
                .enumerate()
                .filter(|(_, t)| rest.starts_with(t.as_str()))
                .max_by_key(|(_, t)| t.len())?;
            out.push(pos);
            rest = &rest[tag.len()..];
        }
        Some(MultiIndex::new(out))
    }

    pub fn coordinate(&self, s: Symbol) -> Option<&JetCoordinate> {
        self.lookup.get(&s)
    }

    /// The symbol for `dep_I`; repeated calls return the same symbol.
    pub fn jet_symbol(&self, dep: usize, index: &MultiIndex) -> Result<Symbol> {
        self.coords.get(&(dep, index.clone())).copied().ok_or_else(|| {
            if dep >= self.dependent.len() {
                Error::Invalid(format!("no dependent variable at position {dep}"))
            } else {
                Error::Truncation {
                    coordinate: self.jet_name(dep, index),
                    max_order: self.max_order,
                }
            }
        })
    }

    pub fn jet(&self, dep: usize, index: &MultiIndex) -> Result<RationalExpr> {
        self.jet_symbol(dep, index).map(RationalExpr::symbol)
    }

    /// Jet symbol by dependent name and subscript, e.g. `("u", "yx")`.
    pub fn jet_by_name(&self, dep: &str, subscript: &str) -> Result<Symbol> {
        let d = self
            .dependent_position(Symbol::new(dep))
            .ok_or_else(|| Error::Invalid(format!("{dep} is not a dependent variable")))?;
        let index = self
            .index_from_tags(subscript)
            .ok_or_else(|| Error::Invalid(format!("bad subscript {subscript:?}")))?;
        self.jet_symbol(d, &index)
    }

    /// `u_{I i}` for the jet symbol `s = u_I`, or `None` if `s` is not a jet.
    pub fn raise(&self, s: Symbol, i: usize) -> Option<Result<Symbol>> {
        let c = self.lookup.get(&s)?;
        Some(self.jet_symbol(c.dependent, &c.index.with(i)))
    }

    /// `D_i a = da/dx^i + sum_I u_{Ii} da/du_I`.
    pub fn total_derivative(&self, a: &RationalExpr, i: usize) -> Result<RationalExpr> {
        let xi = self.independent[i];
        a.derivation(|s| {
            if s == xi {
                return Ok(Some(RationalExpr::one()));
            }
            match self.raise(s, i) {
                Some(next) => next.map(|n| Some(RationalExpr::symbol(n))),
                None => Ok(None),
            }
        })
    }

    /// `D_I a = D_{i_1} ... D_{i_k} a`.
    pub fn iterated_total_derivative(&self, a: &RationalExpr, index: &MultiIndex) -> Result<RationalExpr> {
        index
            .indices()
            .iter()
            .try_fold(a.clone(), |acc, &i| self.total_derivative(&acc, i))
    }
}
