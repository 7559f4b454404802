//! Exterior algebra of differential forms over a declared coframe.
//!
//! A [`CoframeBasis`] fixes an ordered list of generator 1-forms together
//! with a derivative rule for each (exact differential or a declared
//! 2-form) and the expansion of every base scalar's differential in the
//! generators. [`DiffForm`]s are sparse: maps from strictly increasing
//! generator tuples to [`ScalarExpr`] coefficients.

mod solve;

pub use solve::{solve_linear_forms, LinearFormPattern, LinearFormSolution, PatternTerm};

use crate::rational::GaussRat;
use crate::symexpr::{InverseRegistry, ScalarExpr, SymbolId};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormError {
    #[error("coframe basis mismatch")]
    BasisMismatch,
    #[error("generator {0} has no derivative rule")]
    MissingRule(String),
    #[error("no differential declared for symbol {0}")]
    MissingSymbolDiff(String),
    #[error("degree cap exceeded: {0} > 4")]
    DegreeCap(usize),
    #[error("matrix is not invertible under the supported block shapes")]
    NotInvertible,
}

/// Sparse 1-form data kept inside a basis (avoids self-referential forms):
/// list of (generator index, coefficient).
pub type SparseOne = Vec<(usize, ScalarExpr)>;
/// Sparse 2-form data: list of (i, j, coefficient) with i < j.
pub type SparseTwo = Vec<(usize, usize, ScalarExpr)>;

#[derive(Clone, Debug)]
pub enum DerivRule {
    /// The generator is the exact differential of a scalar; its exterior
    /// derivative vanishes.
    ExactOf(ScalarExpr),
    /// Declared value of the exterior derivative.
    Declared(SparseTwo),
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub rule: DerivRule,
}

/// Ordered coframe with derivative rules and base-symbol differentials.
pub struct CoframeBasis {
    gens: Vec<Generator>,
    /// d(symbol) expanded in the generators, for every scalar that may
    /// appear in coefficients (jet symbols chain through these).
    symbol_diffs: BTreeMap<SymbolId, SparseOne>,
}

impl CoframeBasis {
    pub fn new(gens: Vec<Generator>) -> Arc<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            assert!(seen.insert(g.name.clone()), "duplicate generator {}", g.name);
        }
        Arc::new(CoframeBasis {
            gens,
            symbol_diffs: BTreeMap::new(),
        })
    }

    pub fn with_symbol_diffs(
        gens: Vec<Generator>,
        symbol_diffs: BTreeMap<SymbolId, SparseOne>,
    ) -> Arc<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &gens {
            assert!(seen.insert(g.name.clone()), "duplicate generator {}", g.name);
        }
        Arc::new(CoframeBasis { gens, symbol_diffs })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generator(&self, idx: usize) -> &Generator {
        &self.gens[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn symbol_diff(&self, s: &SymbolId) -> Option<&SparseOne> {
        self.symbol_diffs.get(s)
    }

    pub fn diff_symbols(&self) -> impl Iterator<Item = &SymbolId> {
        self.symbol_diffs.keys()
    }

    /// d of the declared rules must itself vanish for d^2 = 0 to hold on
    /// every form. Verifies each declared rule's exterior derivative.
    pub fn verify_integrability(self: &Arc<Self>, reg: &InverseRegistry) -> Result<bool, FormError> {
        for idx in 0..self.gens.len() {
            let d_gen = DiffForm::generator_derivative(self, idx)?;
            let dd = d_gen.exterior_derivative(reg)?;
            if !dd.is_zero_mod(reg) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for CoframeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CoframeBasis[{}]",
            self.gens
                .iter()
                .map(|g| g.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

/// Merges two strictly increasing tuples, returning the merged tuple and
/// the permutation sign, or `None` when they share an index.
fn merge_tuples(a: &[u32], b: &[u32]) -> Option<(Vec<u32>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut sign = 1i32;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] jumps over the remaining a-entries
                if (a.len() - i) % 2 == 1 {
                    sign = -sign;
                }
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// Graded exterior-algebra element over a coframe basis.
#[derive(Clone)]
pub struct DiffForm {
    degree: usize,
    basis: Arc<CoframeBasis>,
    terms: BTreeMap<Vec<u32>, ScalarExpr>,
}

impl DiffForm {
    pub fn zero(basis: &Arc<CoframeBasis>, degree: usize) -> Self {
        DiffForm {
            degree,
            basis: basis.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_scalar(basis: &Arc<CoframeBasis>, s: ScalarExpr) -> Self {
        let mut terms = BTreeMap::new();
        if !s.is_zero() {
            terms.insert(Vec::new(), s);
        }
        DiffForm {
            degree: 0,
            basis: basis.clone(),
            terms,
        }
    }

    pub fn generator(basis: &Arc<CoframeBasis>, idx: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![idx as u32], ScalarExpr::one());
        DiffForm {
            degree: 1,
            basis: basis.clone(),
            terms,
        }
    }

    pub fn one_form(basis: &Arc<CoframeBasis>, comps: SparseOne) -> Self {
        let mut form = DiffForm::zero(basis, 1);
        for (idx, c) in comps {
            form.add_term(vec![idx as u32], c);
        }
        form
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &Arc<CoframeBasis> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero test modulo the registered reciprocal relations.
    pub fn is_zero_mod(&self, reg: &InverseRegistry) -> bool {
        self.terms.values().all(|c| reg.is_zero(c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, tuple: &[u32]) -> ScalarExpr {
        self.terms.get(tuple).cloned().unwrap_or_else(ScalarExpr::zero)
    }

    pub fn as_scalar(&self) -> ScalarExpr {
        assert_eq!(self.degree, 0);
        self.coefficient(&[])
    }

    fn add_term(&mut self, tuple: Vec<u32>, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(tuple.len(), self.degree);
        debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]));
        match self.terms.entry(tuple) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn same_basis(&self, other: &DiffForm) -> Result<(), FormError> {
        if Arc::ptr_eq(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(FormError::BasisMismatch)
        }
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.same_basis(other)?;
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        let terms = self
            .terms
            .iter()
            .map(|(t, c)| (t.clone(), c.neg()))
            .collect();
        DiffForm {
            degree: self.degree,
            basis: self.basis.clone(),
            terms,
        }
    }

    pub fn scale(&self, s: &ScalarExpr) -> DiffForm {
        let mut out = DiffForm::zero(&self.basis, self.degree);
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c.mul(s));
        }
        out
    }

    pub fn scale_rat(&self, c: &GaussRat) -> DiffForm {
        self.scale(&ScalarExpr::constant(c.clone()))
    }

    /// Exterior product. Bilinear, associative, graded-commutative.
    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.same_basis(other)?;
        let degree = self.degree + other.degree;
        if degree > 4 {
            return Err(FormError::DegreeCap(degree));
        }
        let mut out = DiffForm::zero(&self.basis, degree);
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                if let Some((t, sign)) = merge_tuples(t1, t2) {
                    let mut c = c1.mul(c2);
                    if sign < 0 {
                        c = c.neg();
                    }
                    out.add_term(t, c);
                }
            }
        }
        Ok(out)
    }

    /// d of a scalar coefficient, expanded in the basis generators.
    fn d_scalar(
        basis: &Arc<CoframeBasis>,
        c: &ScalarExpr,
        reg: &InverseRegistry,
    ) -> Result<DiffForm, FormError> {
        let mut out = DiffForm::zero(basis, 1);
        for s in basis.diff_symbols() {
            let dc = c
                .differentiate_reg(s, reg)
                .expect("diff symbols are never jets");
            if dc.is_zero() {
                continue;
            }
            let dsym = basis.symbol_diff(s).unwrap();
            for (idx, comp) in dsym {
                out.add_term(vec![*idx as u32], dc.mul(comp));
            }
        }
        // Catch symbols with no declared differential: any free symbol that
        // is not covered by the diff table and is not a registry symbol
        // chained through it must be flagged rather than silently dropped.
        for s in c.free_symbols() {
            if basis.symbol_diff(&s).is_none()
                && reg.def(&s).is_none()
                && s.kind() != crate::symexpr::SymbolKind::Jet
            {
                return Err(FormError::MissingSymbolDiff(s.to_string()));
            }
        }
        Ok(out)
    }

    fn generator_derivative(basis: &Arc<CoframeBasis>, idx: usize) -> Result<DiffForm, FormError> {
        match &basis.generator(idx).rule {
            DerivRule::ExactOf(_) => Ok(DiffForm::zero(basis, 2)),
            DerivRule::Declared(two) => {
                let mut out = DiffForm::zero(basis, 2);
                for (i, j, c) in two {
                    assert!(i < j);
                    out.add_term(vec![*i as u32, *j as u32], c.clone());
                }
                Ok(out)
            }
        }
    }

    /// Exterior derivative. Satisfies the Leibniz rule; d^2 = 0 whenever the
    /// declared generator rules are themselves integrable.
    pub fn exterior_derivative(&self, reg: &InverseRegistry) -> Result<DiffForm, FormError> {
        if self.degree + 1 > 4 {
            return Err(FormError::DegreeCap(self.degree + 1));
        }
        let mut out = DiffForm::zero(&self.basis, self.degree + 1);
        for (tuple, c) in &self.terms {
            // d(coefficient) ∧ e_I
            let dc = Self::d_scalar(&self.basis, c, reg)?;
            let mut e_i = DiffForm::zero(&self.basis, self.degree);
            e_i.add_term(tuple.clone(), ScalarExpr::one());
            out = out.add(&dc.wedge(&e_i)?)?;
            // c * Σ_k (-1)^k e_{i_1..} ∧ d(e_{i_k}) ∧ ..
            for (k, gen_idx) in tuple.iter().enumerate() {
                let d_gen = Self::generator_derivative(&self.basis, *gen_idx as usize)?;
                if d_gen.is_zero() {
                    continue;
                }
                let mut prefix = DiffForm::zero(&self.basis, k);
                prefix.add_term(tuple[..k].to_vec(), ScalarExpr::one());
                let mut suffix = DiffForm::zero(&self.basis, tuple.len() - k - 1);
                suffix.add_term(tuple[k + 1..].to_vec(), ScalarExpr::one());
                let mut piece = prefix.wedge(&d_gen)?.wedge(&suffix)?;
                piece = piece.scale(c);
                if k % 2 == 1 {
                    piece = piece.neg();
                }
                out = out.add(&piece)?;
            }
        }
        Ok(out)
    }

    /// Rewrites the form's coefficients in the transformed coframe
    /// `new_s = Σ_k g[s][k] old_{subset[k]}`; generators outside `subset`
    /// are unchanged. `g` must be invertible; its inverse is derived by
    /// block back-substitution (diagonal blocks inverted by adjugate, with
    /// reciprocal symbols registered as needed).
    pub fn change_coframe(
        &self,
        g: &[Vec<ScalarExpr>],
        subset: &[usize],
        reg: &mut InverseRegistry,
    ) -> Result<DiffForm, FormError> {
        let g_inv = invert_symbolic(g, reg)?;
        self.change_coframe_with_inverse(g, &g_inv, subset)
    }

    /// As [`change_coframe`](Self::change_coframe) with a caller-supplied
    /// inverse (used where closed-form inverse blocks are available).
    pub fn change_coframe_with_inverse(
        &self,
        _g: &[Vec<ScalarExpr>],
        g_inv: &[Vec<ScalarExpr>],
        subset: &[usize],
    ) -> Result<DiffForm, FormError> {
        let k = subset.len();
        assert!(g_inv.len() == k && g_inv.iter().all(|r| r.len() == k));
        let pos: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(a, b)| (*b, a)).collect();
        // old_j = Σ_s gInv[j][s] new_s   (new generators carried by the same
        // basis object, index-for-index)
        let mut out = DiffForm::zero(&self.basis, self.degree);
        for (tuple, c) in &self.terms {
            let mut pieces = DiffForm::from_scalar(&self.basis, c.clone());
            for gen in tuple {
                let gen = *gen as usize;
                let one = match pos.get(&gen) {
                    None => DiffForm::generator(&self.basis, gen),
                    Some(&j) => {
                        let comps: SparseOne = (0..k)
                            .filter(|s| !g_inv[j][*s].is_zero())
                            .map(|s| (subset[s], g_inv[j][s].clone()))
                            .collect();
                        DiffForm::one_form(&self.basis, comps)
                    }
                };
                pieces = pieces.wedge(&one)?;
            }
            out = out.add(&pieces)?;
        }
        Ok(out)
    }
}

impl fmt::Display for DiffForm {
    /// Deterministic sorted order, for golden-file tests.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (tuple, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", c)?;
            for idx in tuple {
                write!(f, "^{}", self.basis.generator(*idx as usize).name)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Determinant by Laplace expansion; fine for the block sizes in scope.
pub fn determinant(m: &[Vec<ScalarExpr>]) -> ScalarExpr {
    let n = m.len();
    if n == 0 {
        return ScalarExpr::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = ScalarExpr::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<ScalarExpr>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|c| *c != j)
                    .map(|c| m[i][c].clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul(&determinant(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term);
    }
    acc
}

fn adjugate(m: &[Vec<ScalarExpr>]) -> Vec<Vec<ScalarExpr>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![ScalarExpr::one()]];
    }
    let mut adj = vec![vec![ScalarExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<ScalarExpr>> = (0..n)
                .filter(|r| *r != i)
                .map(|r| {
                    (0..n)
                        .filter(|c| *c != j)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = determinant(&minor);
            if (i + j) % 2 == 1 {
                cof = cof.neg();
            }
            adj[j][i] = cof; // transposed cofactor
        }
    }
    adj
}

/// Inverts a matrix of expressions. Supports block-lower-triangular shapes
/// with diagonal blocks of size at most 4; each diagonal block is inverted
/// by adjugate over a registered reciprocal of its determinant (or exact
/// division when the determinant is a nonzero constant).
pub fn invert_symbolic(
    m: &[Vec<ScalarExpr>],
    reg: &mut InverseRegistry,
) -> Result<Vec<Vec<ScalarExpr>>, FormError> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n));
    // Find the block partition: greedily grow a diagonal block until the
    // rows inside it have no entries to its right.
    let mut blocks: Vec<(usize, usize)> = Vec::new(); // [start, end)
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        loop {
            let mut grew = false;
            for i in start..end {
                for j in end..n {
                    if !m[i][j].is_zero() {
                        end = end.max(j + 1);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        blocks.push((start, end));
        start = end;
    }
    for (s, e) in &blocks {
        if e - s > 4 {
            return Err(FormError::NotInvertible);
        }
    }
    // Invert diagonal blocks.
    let mut inv = vec![vec![ScalarExpr::zero(); n]; n];
    for (s, e) in &blocks {
        let k = e - s;
        let block: Vec<Vec<ScalarExpr>> = (0..k)
            .map(|i| (0..k).map(|j| m[s + i][s + j].clone()).collect())
            .collect();
        let det = determinant(&block);
        if det.is_zero() {
            return Err(FormError::NotInvertible);
        }
        let adj = adjugate(&block);
        let det_inv: ScalarExpr = match det.as_constant() {
            Some(c) => ScalarExpr::constant(c.inv()),
            None => {
                // reuse an existing registration with the same definition
                let existing = reg
                    .symbols()
                    .find(|sym| reg.def(sym).map(|d| d == &det).unwrap_or(false))
                    .cloned();
                let sym = match existing {
                    Some(s) => s,
                    None => {
                        let fresh = SymbolId::parameter(
                            &format!("inv{}", reg.symbols().count()),
                            vec![],
                        );
                        reg.register(fresh.clone(), det.clone());
                        fresh
                    }
                };
                ScalarExpr::symbol(sym)
            }
        };
        for i in 0..k {
            for j in 0..k {
                inv[s + i][s + j] = adj[i][j].mul(&det_inv);
            }
        }
    }
    // Back-substitute the sub-diagonal blocks: for block-column c and
    // block-row r > c:  inv[r][c] = -Dr^{-1} * ( Σ_{c<k<=r} m[r][k] inv[k][c] )
    for (bi, (rs, re)) in blocks.iter().enumerate() {
        for (cs, ce) in blocks.iter().take(bi) {
            // compute S = Σ m[r][k] inv[k][c] over intermediate columns
            let mut s_block = vec![vec![ScalarExpr::zero(); ce - cs]; re - rs];
            for i in 0..(re - rs) {
                for j in 0..(ce - cs) {
                    let mut acc = ScalarExpr::zero();
                    for k in *cs..*rs {
                        if !m[rs + i][k].is_zero() && !inv[k][cs + j].is_zero() {
                            acc = acc.add(&m[rs + i][k].mul(&inv[k][cs + j]));
                        }
                    }
                    s_block[i][j] = acc;
                }
            }
            for i in 0..(re - rs) {
                for j in 0..(ce - cs) {
                    let mut acc = ScalarExpr::zero();
                    for k in 0..(re - rs) {
                        if !inv[rs + i][rs + k].is_zero() && !s_block[k][j].is_zero() {
                            acc = acc.add(&inv[rs + i][rs + k].mul(&s_block[k][j]));
                        }
                    }
                    inv[rs + i][cs + j] = acc.neg();
                }
            }
        }
    }
    Ok(inv)
}
