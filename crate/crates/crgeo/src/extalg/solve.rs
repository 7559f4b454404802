//! Cartan-lemma style solves: given target 2-forms and a structure-equation
//! template that is linear in unknown 1-forms, find the least-structure
//! assignment of the unknowns and the unmatchable residual.

use super::{DiffForm, FormError};
use crate::rational::GaussRat;
use crate::symexpr::{InverseRegistry, ScalarExpr};
use std::collections::BTreeMap;

/// One pattern term: `target[eq_row] += coeff * u[unknown] ∧ θ[wedge_gen]`.
#[derive(Clone, Debug)]
pub struct PatternTerm {
    pub eq_row: usize,
    pub unknown: usize,
    pub wedge_gen: usize,
    pub coeff: GaussRat,
}

/// A structure-equation template, linear in its unknown 1-forms.
#[derive(Clone, Debug, Default)]
pub struct LinearFormPattern {
    pub unknown_names: Vec<String>,
    pub terms: Vec<PatternTerm>,
}

impl LinearFormPattern {
    pub fn add_unknown(&mut self, name: &str) -> usize {
        self.unknown_names.push(name.to_string());
        self.unknown_names.len() - 1
    }

    pub fn add_term(&mut self, eq_row: usize, unknown: usize, wedge_gen: usize, coeff: GaussRat) {
        self.terms.push(PatternTerm {
            eq_row,
            unknown,
            wedge_gen,
            coeff,
        });
    }
}

pub struct LinearFormSolution {
    /// One 1-form per unknown slot (free directions set to zero).
    pub unknowns: Vec<DiffForm>,
    /// `target - pattern(unknowns)`, one 2-form per equation row.
    pub residual: Vec<DiffForm>,
    pub residual_is_zero: bool,
}

type VarId = (usize, usize); // (unknown slot, generator index)

/// Solves the pattern for its unknown 1-forms against the target 2-forms.
///
/// The linear system has exact rational structure constants; elimination is
/// exact, with the symbolic right-hand sides carried along. Inconsistent
/// rows surface as a nonzero residual rather than an error.
pub fn solve_linear_forms(
    targets: &[DiffForm],
    pattern: &LinearFormPattern,
    reg: &InverseRegistry,
) -> Result<LinearFormSolution, FormError> {
    assert!(!targets.is_empty());
    let basis = targets[0].basis().clone();
    let ngens = basis.len();

    // Assemble equations keyed by (eq_row, i<j tuple).
    #[derive(Default)]
    struct Eq {
        coeffs: BTreeMap<VarId, GaussRat>,
        rhs: ScalarExpr,
    }
    let mut eqs: BTreeMap<(usize, u32, u32), Eq> = BTreeMap::new();

    for (row, t) in targets.iter().enumerate() {
        assert_eq!(t.degree(), 2);
        for (tuple, c) in t.terms() {
            let key = (row, tuple[0], tuple[1]);
            eqs.entry(key).or_default().rhs = c.clone();
        }
    }
    for term in &pattern.terms {
        let e = term.wedge_gen as u32;
        for alpha in 0..ngens as u32 {
            if alpha == e {
                continue;
            }
            let (i, j, sign) = if alpha < e {
                (alpha, e, 1i32)
            } else {
                (e, alpha, -1i32)
            };
            let mut c = term.coeff.clone();
            if sign < 0 {
                c = -c;
            }
            let entry = eqs.entry((term.eq_row, i, j)).or_default();
            let slot = entry
                .coeffs
                .entry((term.unknown, alpha as usize))
                .or_insert_with(GaussRat::zero);
            *slot += &c;
            if slot.is_zero() {
                entry.coeffs.remove(&(term.unknown, alpha as usize));
            }
        }
    }

    // Exact sparse Gauss-Jordan elimination over the pattern coefficients.
    let mut rows: Vec<Eq> = eqs.into_values().collect();
    let mut solved: BTreeMap<VarId, ScalarExpr> = BTreeMap::new();
    let mut pivoted: Vec<(VarId, usize)> = Vec::new(); // var, row index

    let nrows = rows.len();
    for r in 0..nrows {
        // Reduce by previously pivoted rows.
        let mut reduce_pairs: Vec<(usize, GaussRat)> = Vec::new();
        for (var, prow) in &pivoted {
            if let Some(c) = rows[r].coeffs.get(var) {
                reduce_pairs.push((*prow, c.clone()));
            }
        }
        for (prow, factor) in reduce_pairs {
            let (pc, pr) = {
                let p = &rows[prow];
                (p.coeffs.clone(), p.rhs.clone())
            };
            let row = &mut rows[r];
            for (v, c) in pc {
                let slot = row.coeffs.entry(v).or_insert_with(GaussRat::zero);
                *slot -= &(&factor * &c);
                if slot.is_zero() {
                    row.coeffs.remove(&v);
                }
            }
            row.rhs = row.rhs.sub(&pr.scale(&factor));
        }
        // Pick a pivot.
        let pivot = rows[r].coeffs.keys().next().cloned();
        if let Some(var) = pivot {
            let inv = rows[r].coeffs[&var].inv();
            let row = &mut rows[r];
            let coeffs: Vec<(VarId, GaussRat)> = row
                .coeffs
                .iter()
                .map(|(v, c)| (*v, &inv * c))
                .collect();
            row.coeffs = coeffs.into_iter().collect();
            row.rhs = row.rhs.scale(&inv);
            // Eliminate from earlier pivot rows.
            let (var_coeffs, var_rhs) = (rows[r].coeffs.clone(), rows[r].rhs.clone());
            for (_, prow) in &pivoted {
                if let Some(f) = rows[*prow].coeffs.get(&var).cloned() {
                    let row = &mut rows[*prow];
                    for (v, c) in &var_coeffs {
                        let slot = row.coeffs.entry(*v).or_insert_with(GaussRat::zero);
                        *slot -= &(&f * c);
                        if slot.is_zero() {
                            row.coeffs.remove(v);
                        }
                    }
                    row.rhs = row.rhs.sub(&var_rhs.scale(&f));
                }
            }
            pivoted.push((var, r));
        }
    }

    // Read off: pivot rows may still involve free variables; set those to
    // zero, so the pivot value is just the reduced right-hand side.
    for (var, prow) in &pivoted {
        solved.insert(*var, rows[*prow].rhs.clone());
    }

    let mut unknowns = Vec::with_capacity(pattern.unknown_names.len());
    for u in 0..pattern.unknown_names.len() {
        let comps: Vec<(usize, ScalarExpr)> = (0..ngens)
            .filter_map(|a| solved.get(&(u, a)).map(|e| (a, e.clone())))
            .collect();
        unknowns.push(DiffForm::one_form(&basis, comps));
    }

    // Residual = target - pattern(unknowns), computed directly.
    let mut residual: Vec<DiffForm> = targets.to_vec();
    for term in &pattern.terms {
        let gen = DiffForm::generator(&basis, term.wedge_gen);
        let piece = unknowns[term.unknown]
            .wedge(&gen)?
            .scale_rat(&term.coeff);
        residual[term.eq_row] = residual[term.eq_row].sub(&piece)?;
    }
    let residual_is_zero = residual.iter().all(|f| f.is_zero_mod(reg));

    Ok(LinearFormSolution {
        unknowns,
        residual,
        residual_is_zero,
    })
}
