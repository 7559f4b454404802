//! Canonical-form polynomial expressions over Gaussian rationals.
//!
//! A `ScalarExpr` is a sum of monomials, each a Gaussian-rational
//! coefficient times a power product of symbols. The map representation is
//! the canonical form: two expressions are equal iff the maps are equal,
//! and zero is the empty map.

use super::symbol::{SymbolId, SymbolKind};
use crate::rational::GaussRat;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("cannot differentiate with respect to a jet symbol {0}")]
    DiffByJet(String),
    #[error("unbound symbol {0}")]
    Unbound(String),
    #[error("binding for {0} is not the conjugate of its barred partner")]
    ConjugateInconsistent(String),
}

/// A power product of symbols, sorted by symbol. Ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<(SymbolId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn symbol(s: SymbolId) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, k)| *k).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(SymbolId, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn power_of(&self, s: &SymbolId) -> u32 {
        self.0
            .iter()
            .find(|(sym, _)| sym == s)
            .map(|(_, k)| *k)
            .unwrap_or(0)
    }

    fn without(&self, s: &SymbolId) -> Monomial {
        Monomial(self.0.iter().filter(|(sym, _)| sym != s).cloned().collect())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Canonical sum of monomials with exact Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct ScalarExpr {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::default()
    }

    pub fn one() -> Self {
        ScalarExpr::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        ScalarExpr { terms }
    }

    pub fn from_int(n: i64) -> Self {
        ScalarExpr::constant(GaussRat::from_int(n))
    }

    pub fn symbol(s: SymbolId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::symbol(s), GaussRat::one());
        ScalarExpr { terms }
    }

    pub fn monomial(c: GaussRat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ScalarExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> GaussRat {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(GaussRat::zero)
    }

    /// Returns the constant value if the expression has no symbols.
    pub fn as_constant(&self) -> Option<GaussRat> {
        if self.terms.is_empty() {
            return Some(GaussRat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> ScalarExpr {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), -c.clone()))
            .collect();
        ScalarExpr { terms }
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussRat) -> ScalarExpr {
        if c.is_zero() {
            return ScalarExpr::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, cc)| (m.clone(), cc * c))
            .collect();
        ScalarExpr { terms }
    }

    pub fn pow(&self, k: u32) -> ScalarExpr {
        let mut out = ScalarExpr::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Coefficients conjugated, every symbol replaced by its barred partner.
    pub fn conjugate(&self) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            let mut syms: Vec<(SymbolId, u32)> =
                m.0.iter().map(|(s, k)| (s.bar(), *k)).collect();
            syms.sort_by(|a, b| a.0.cmp(&b.0));
            out.insert_term(Monomial(syms), c.conj());
        }
        out
    }

    /// All distinct symbols appearing in the expression.
    pub fn free_symbols(&self) -> Vec<SymbolId> {
        let mut set = std::collections::BTreeSet::new();
        for m in self.terms.keys() {
            for (s, _) in &m.0 {
                set.insert(s.clone());
            }
        }
        set.into_iter().collect()
    }

    /// Substitutes an expression for a symbol.
    pub fn substitute(&self, s: &SymbolId, value: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            let k = m.power_of(s);
            if k == 0 {
                out.insert_term(m.clone(), c.clone());
            } else {
                let rest = ScalarExpr::monomial(c.clone(), m.without(s));
                let repl = value.pow(k);
                out = out.add(&rest.mul(&repl));
            }
        }
        out
    }

    /// Formal partial derivative with respect to a coordinate or parameter
    /// symbol. Jet symbols chain: their derivative is the next-order jet
    /// when the family depends on `s`, zero otherwise.
    pub fn differentiate(&self, s: &SymbolId) -> Result<ScalarExpr, ExprError> {
        if s.kind() == SymbolKind::Jet {
            return Err(ExprError::DiffByJet(s.to_string()));
        }
        Ok(self.differentiate_inner(s, None))
    }

    /// Same as [`differentiate`](Self::differentiate) but with registered
    /// reciprocal symbols chained through the registry.
    pub fn differentiate_reg(
        &self,
        s: &SymbolId,
        reg: &InverseRegistry,
    ) -> Result<ScalarExpr, ExprError> {
        if s.kind() == SymbolKind::Jet {
            return Err(ExprError::DiffByJet(s.to_string()));
        }
        Ok(self.differentiate_inner(s, Some(reg)))
    }

    fn differentiate_inner(&self, s: &SymbolId, reg: Option<&InverseRegistry>) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (m, c) in &self.terms {
            for (idx, (sym, k)) in m.0.iter().enumerate() {
                let dsym = symbol_derivative(sym, s, reg);
                if dsym.is_zero() {
                    continue;
                }
                // c * k * sym^{k-1} * (rest of monomial) * dsym
                let mut rest: Vec<(SymbolId, u32)> = Vec::with_capacity(m.0.len());
                for (j, (sym2, k2)) in m.0.iter().enumerate() {
                    if j == idx {
                        if *k2 > 1 {
                            rest.push((sym2.clone(), k2 - 1));
                        }
                    } else {
                        rest.push((sym2.clone(), *k2));
                    }
                }
                let coeff = c * &GaussRat::from_int(*k as i64);
                let base = ScalarExpr::monomial(coeff, Monomial(rest));
                out = out.add(&base.mul(&dsym));
            }
        }
        out
    }
}

/// Derivative of a single symbol with respect to `s`.
fn symbol_derivative(sym: &SymbolId, s: &SymbolId, reg: Option<&InverseRegistry>) -> ScalarExpr {
    if sym == s {
        return ScalarExpr::one();
    }
    match sym.kind() {
        SymbolKind::Jet => {
            if super::jet_depends_on(sym, s) {
                ScalarExpr::symbol(sym.extend_jet(s))
            } else {
                ScalarExpr::zero()
            }
        }
        _ => {
            if let Some(reg) = reg {
                if let Some(def) = reg.def(sym) {
                    // sym = 1/def, so d(sym) = -sym^2 * d(def)
                    let ddef = def.differentiate_inner(s, Some(reg));
                    if ddef.is_zero() {
                        return ScalarExpr::zero();
                    }
                    let sym2 = ScalarExpr::symbol(sym.clone()).pow(2);
                    return sym2.mul(&ddef).neg();
                }
            }
            ScalarExpr::zero()
        }
    }
}

/// Registry of reciprocal symbols: each entry declares `symbol = 1 / def`,
/// where `def` is a polynomial (possibly containing earlier-registered
/// reciprocal symbols, never itself).
#[derive(Clone, Default)]
pub struct InverseRegistry {
    entries: Vec<(SymbolId, ScalarExpr)>,
}

impl InverseRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, sym: SymbolId, def: ScalarExpr) {
        assert!(
            def.free_symbols().iter().all(|s| s != &sym),
            "reciprocal definition may not mention itself"
        );
        assert!(!def.is_zero(), "reciprocal of zero");
        self.entries.push((sym, def));
    }

    pub fn def(&self, sym: &SymbolId) -> Option<&ScalarExpr> {
        self.entries
            .iter()
            .find(|(s, _)| s == sym)
            .map(|(_, d)| d)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolId> {
        self.entries.iter().map(|(s, _)| s)
    }

    /// Exact zero test for rational functions: clears each reciprocal symbol
    /// by multiplying through with its defining polynomial (legitimate since
    /// the definitions are nonzero by declaration), in reverse registration
    /// order, then checks the canonical polynomial form.
    pub fn is_zero(&self, e: &ScalarExpr) -> bool {
        let mut e = e.clone();
        for (sym, def) in self.entries.iter().rev() {
            if e.is_zero() {
                return true;
            }
            let kmax = e.terms().map(|(m, _)| m.power_of(sym)).max().unwrap_or(0);
            if kmax == 0 {
                continue;
            }
            // e = sum_a e_a * sym^a  =>  e * def^kmax = sum_a e_a * def^(kmax-a)
            let mut powers: Vec<ScalarExpr> = Vec::with_capacity(kmax as usize + 1);
            powers.push(ScalarExpr::one());
            for _ in 0..kmax {
                let next = powers.last().unwrap().mul(def);
                powers.push(next);
            }
            let mut cleared = ScalarExpr::zero();
            for (m, c) in e.terms() {
                let a = m.power_of(sym);
                let stripped = ScalarExpr::monomial(c.clone(), m.without(sym));
                cleared = cleared.add(&stripped.mul(&powers[(kmax - a) as usize]));
            }
            e = cleared;
        }
        e.is_zero()
    }

    /// Extends a binding with numeric values for every registered
    /// reciprocal symbol, in registration order.
    pub fn extend_binding(&self, b: &mut super::Binding) -> Result<(), ExprError> {
        for (sym, def) in &self.entries {
            let v = b.eval(def)?;
            b.insert_raw(sym.clone(), 1.0 / v);
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Leading terms first.
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if m.0.is_empty() {
                write!(f, "{}", c)?;
                continue;
            }
            let mut first = true;
            if !c.is_one() {
                write!(f, "{}", c)?;
                first = false;
            }
            for (s, p) in &m.0 {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", s)?;
                if *p > 1 {
                    write!(f, "^{}", p)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl ScalarExpr {
    /// Numeric evaluation; see [`Binding`](super::Binding).
    pub fn evaluate(&self, b: &super::Binding) -> Result<num_complex::Complex64, ExprError> {
        b.eval(self)
    }

    /// Total degree of the expression, `None` for the zero expression.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Evaluates an expression whose symbols are bound to exact Gaussian
    /// rationals. Oracle path for the floating evaluator.
    pub fn evaluate_exact(
        &self,
        bind: &BTreeMap<SymbolId, GaussRat>,
    ) -> Result<GaussRat, ExprError> {
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (s, k) in &m.0 {
                let x = bind
                    .get(s)
                    .ok_or_else(|| ExprError::Unbound(s.to_string()))?;
                for _ in 0..*k {
                    v *= x;
                }
            }
            acc += &v;
        }
        Ok(acc)
    }
}

// Fixed-size helper used by displays and tests.
pub fn to_f64(r: &num_rational::BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
