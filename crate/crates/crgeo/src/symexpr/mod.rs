//! Exact-arithmetic computer-algebra kernel: indexed symbols, formal jet
//! symbols, canonical polynomial normal form, differentiation, conjugation,
//! evaluation, and a text parser.
//!
//! Expressions are immutable values; all operations are pure functions, so
//! everything here is safe to share and send between threads.

mod eval;
mod expr;
mod parser;
mod symbol;

pub use eval::{evaluate, Binding};
pub use expr::{ExprError, InverseRegistry, Monomial, ScalarExpr};
pub use parser::{parse_expr, ParseContext, ParseError};
pub use symbol::{Index, IndexClass, SymbolId, SymbolKind};

/// Dependency convention for the jet families in this toolkit.
///
/// * The `F` family (entries of a system and their formal partials) depends
///   on every coordinate symbol.
/// * The `f` family (moduli functions of Legendre fibrations) is holomorphic
///   in `z` and smooth in `(P, Pb)`: the unbarred family depends on unbarred
///   `z` and on both `P` and `Pb`; the barred family on barred `z` and both
///   `P` and `Pb`.
///
/// Everything else has derivative zero against jets.
pub fn jet_depends_on(jet: &SymbolId, s: &SymbolId) -> bool {
    debug_assert_eq!(jet.kind(), SymbolKind::Jet);
    match jet.name() {
        "f" => {
            let fam_barred = jet.indices().iter().all(|ix| ix.barred);
            if s.name() == "z" {
                let s_barred = s.indices().iter().all(|ix| ix.barred);
                s_barred == fam_barred
            } else {
                s.name() == "P"
            }
        }
        _ => s.kind() == SymbolKind::Coordinate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::GaussRat;
    use num_complex::Complex64;

    fn z(k: u32) -> SymbolId {
        SymbolId::coordinate("z", vec![Index::greek(k)])
    }

    fn ctx21() -> ParseContext {
        ParseContext { n: 2, d: 1 }
    }

    #[test]
    fn differentiate_polynomial() {
        // d/dz1 of z1^2 * zb1 = 2 z1 zb1
        let e = parse_expr("z[1]^2*zb[1]", ctx21()).unwrap();
        let d = e.differentiate(&z(1)).unwrap();
        let expected = parse_expr("2*z[1]*zb[1]", ctx21()).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn differentiate_jet_extends_chain() {
        let f = SymbolId::jet("F", vec![Index::roman(1), Index::greek(1).bar()], vec![]);
        let e = ScalarExpr::symbol(f.clone());
        let d = e.differentiate(&z(2).bar()).unwrap();
        let expected = ScalarExpr::symbol(f.extend_jet(&z(2).bar()));
        assert_eq!(d, expected);
    }

    #[test]
    fn mixed_partials_commute() {
        let f = SymbolId::jet("F", vec![Index::roman(1), Index::greek(1).bar()], vec![]);
        let e = ScalarExpr::symbol(f);
        let d12 = e
            .differentiate(&z(1))
            .unwrap()
            .differentiate(&z(2))
            .unwrap();
        let d21 = e
            .differentiate(&z(2))
            .unwrap()
            .differentiate(&z(1))
            .unwrap();
        assert_eq!(d12, d21);
        assert!(!d12.is_zero());
    }

    #[test]
    fn differentiate_by_jet_is_rejected() {
        let f = SymbolId::jet("F", vec![Index::roman(1), Index::greek(1).bar()], vec![]);
        let e = ScalarExpr::symbol(z(1));
        assert!(matches!(e.differentiate(&f), Err(ExprError::DiffByJet(_))));
    }

    #[test]
    fn conjugate_examples() {
        // conj(i z1) = -i zb1
        let e = parse_expr("i*z[1]", ctx21()).unwrap();
        assert_eq!(e.conjugate(), parse_expr("-i*zb[1]", ctx21()).unwrap());
        // conj(p[1,1]) = pb[1,1]
        let p = parse_expr("p[1,1]", ctx21()).unwrap();
        assert_eq!(p.conjugate(), parse_expr("pb[1,1]", ctx21()).unwrap());
    }

    #[test]
    fn conjugation_commutes_with_differentiation_up_to_barring() {
        let e = parse_expr("z[1]^2*w[1] + i*zb[2]*z[1]", ctx21()).unwrap();
        let lhs = e.differentiate(&z(1)).unwrap().conjugate();
        let rhs = e.conjugate().differentiate(&z(1).bar()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn registry_zero_test_clears_inverses() {
        // v = 1/(a b - 1); then (a b - 1) * v - 1 == 0 as a rational function.
        let a = SymbolId::parameter("a", vec![Index::greek(1)]);
        let b = SymbolId::parameter("a", vec![Index::greek(2)]);
        let v = SymbolId::parameter("v", vec![]);
        let den = ScalarExpr::symbol(a)
            .mul(&ScalarExpr::symbol(b))
            .sub(&ScalarExpr::one());
        let mut reg = InverseRegistry::new();
        reg.register(v.clone(), den.clone());
        let e = den.mul(&ScalarExpr::symbol(v)).sub(&ScalarExpr::one());
        assert!(!e.is_zero());
        assert!(reg.is_zero(&e));
        assert!(!reg.is_zero(&e.add(&ScalarExpr::one())));
    }

    #[test]
    fn float_eval_matches_exact_eval() {
        let e = parse_expr("(1/3)*z[1]^2*zb[1] - i*z[2] + 5/7", ctx21()).unwrap();
        let mut exact = std::collections::BTreeMap::new();
        exact.insert(z(1), GaussRat::from_ratio(2, 3));
        exact.insert(z(1).bar(), GaussRat::from_ratio(2, 3));
        exact.insert(z(2), GaussRat::from_ratio(-1, 4));
        exact.insert(z(2).bar(), GaussRat::from_ratio(-1, 4));
        let want = e.evaluate_exact(&exact).unwrap().to_complex64();
        let mut b = Binding::new();
        b.insert(z(1), Complex64::new(2.0 / 3.0, 0.0));
        b.insert(z(2), Complex64::new(-0.25, 0.0));
        let got = evaluate(&e, &b).unwrap();
        assert!((want - got).norm() <= 1e-12 * want.norm().max(1.0));
    }
}
