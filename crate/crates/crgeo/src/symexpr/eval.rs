//! Numeric evaluation of expressions. This is the one deliberately lossy
//! path in the kernel; everything else is exact.

use super::expr::{ExprError, ScalarExpr};
use super::symbol::SymbolId;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Map from symbols to complex double values.
///
/// `insert` enforces conjugate consistency: binding a symbol also binds its
/// barred partner to the complex conjugate, and a later conflicting bind is
/// an error surfaced at insertion time.
#[derive(Clone, Default, Debug)]
pub struct Binding {
    values: BTreeMap<SymbolId, Complex64>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `s` to `v` and the barred partner of `s` to `conj(v)`.
    pub fn insert(&mut self, s: SymbolId, v: Complex64) {
        let bar = s.bar();
        if bar != s {
            self.values.insert(bar, v.conj());
        }
        self.values.insert(s, v);
    }

    /// Binds exactly one symbol, without touching its conjugate partner.
    /// Used for symbols that are not part of a conjugate pair.
    pub fn insert_raw(&mut self, s: SymbolId, v: Complex64) {
        self.values.insert(s, v);
    }

    pub fn get(&self, s: &SymbolId) -> Option<Complex64> {
        self.values.get(s).copied()
    }

    /// Checks that every barred/unbarred pair present is conjugate-consistent.
    pub fn is_conjugate_consistent(&self, tol: f64) -> bool {
        for (s, v) in &self.values {
            let bar = s.bar();
            if bar == *s {
                continue;
            }
            if let Some(w) = self.values.get(&bar) {
                if (w - v.conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn eval(&self, e: &ScalarExpr) -> Result<Complex64, ExprError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in e.terms() {
            let mut v = c.to_complex64();
            for (s, k) in &m.0 {
                let x = self
                    .values
                    .get(s)
                    .ok_or_else(|| ExprError::Unbound(s.to_string()))?;
                v *= x.powu(*k);
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// Evaluates `e` under `b`; every free symbol must be bound.
pub fn evaluate(e: &ScalarExpr, b: &Binding) -> Result<Complex64, ExprError> {
    b.eval(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::symbol::Index;

    #[test]
    fn z_plus_zbar_is_twice_real_part() {
        let z = SymbolId::coordinate("z", vec![Index::greek(1)]);
        let e = ScalarExpr::symbol(z.clone()).add(&ScalarExpr::symbol(z.bar()));
        let mut b = Binding::new();
        b.insert(z, Complex64::new(2.0, 3.0));
        let v = evaluate(&e, &b).unwrap();
        assert!((v - Complex64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_evaluates_to_zero() {
        let e = ScalarExpr::zero();
        let b = Binding::new();
        assert_eq!(evaluate(&e, &b).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unbound_symbol_is_an_error() {
        let z = SymbolId::coordinate("z", vec![Index::greek(1)]);
        let e = ScalarExpr::symbol(z);
        let b = Binding::new();
        assert!(matches!(evaluate(&e, &b), Err(ExprError::Unbound(_))));
    }
}
