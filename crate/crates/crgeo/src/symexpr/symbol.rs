//! Indexed symbols and formal jet symbols.
//!
//! A symbol is a base name plus a list of indices, each index belonging to
//! the roman class (ranging over `1..=d`) or the greek class (`1..=n`) and
//! carrying a bar flag. Jet symbols additionally carry a sorted derivation
//! chain of coordinate symbols, so that mixed partials are canonical.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymbolKind {
    Coordinate,
    Jet,
    Parameter,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum IndexClass {
    Roman,
    Greek,
}

/// One index slot: class, bar flag, 1-based value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Index {
    pub class: IndexClass,
    pub barred: bool,
    pub value: u32,
}

impl Index {
    pub fn roman(value: u32) -> Self {
        Index {
            class: IndexClass::Roman,
            barred: false,
            value,
        }
    }
    pub fn greek(value: u32) -> Self {
        Index {
            class: IndexClass::Greek,
            barred: false,
            value,
        }
    }
    pub fn bar(self) -> Self {
        Index {
            barred: !self.barred,
            ..self
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct SymbolData {
    kind: SymbolKind,
    name: String,
    indices: Vec<Index>,
    /// Sorted derivation chain; empty unless `kind == Jet`.
    derivs: Vec<SymbolId>,
}

/// Interned-by-Arc symbol identifier. Cheap to clone, totally ordered by
/// (kind, name, indices, derivation chain).
#[derive(Clone, Eq, Hash, Debug)]
pub struct SymbolId(Arc<SymbolData>);

impl PartialEq for SymbolId {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl PartialOrd for SymbolId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymbolId {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl SymbolId {
    pub fn coordinate(name: &str, indices: Vec<Index>) -> Self {
        SymbolId(Arc::new(SymbolData {
            kind: SymbolKind::Coordinate,
            name: name.to_string(),
            indices,
            derivs: Vec::new(),
        }))
    }

    pub fn parameter(name: &str, indices: Vec<Index>) -> Self {
        SymbolId(Arc::new(SymbolData {
            kind: SymbolKind::Parameter,
            name: name.to_string(),
            indices,
            derivs: Vec::new(),
        }))
    }

    /// A jet symbol: formal value of the named function family (with the
    /// given indices) differentiated along the chain. The chain is sorted
    /// on construction so mixed partials are canonical.
    pub fn jet(name: &str, indices: Vec<Index>, mut derivs: Vec<SymbolId>) -> Self {
        derivs.sort();
        SymbolId(Arc::new(SymbolData {
            kind: SymbolKind::Jet,
            name: name.to_string(),
            indices,
            derivs,
        }))
    }

    pub fn kind(&self) -> SymbolKind {
        self.0.kind
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn indices(&self) -> &[Index] {
        &self.0.indices
    }

    pub fn derivs(&self) -> &[SymbolId] {
        &self.0.derivs
    }

    /// Extends a jet symbol's derivation chain by one more coordinate,
    /// re-sorting so the chain stays canonical.
    pub fn extend_jet(&self, by: &SymbolId) -> SymbolId {
        debug_assert_eq!(self.kind(), SymbolKind::Jet);
        let mut derivs = self.0.derivs.clone();
        derivs.push(by.clone());
        derivs.sort();
        SymbolId(Arc::new(SymbolData {
            kind: SymbolKind::Jet,
            name: self.0.name.clone(),
            indices: self.0.indices.clone(),
            derivs,
        }))
    }

    /// The bar involution: every index flag is flipped, and for jet symbols
    /// the derivation chain is barred entrywise (and re-sorted).
    pub fn bar(&self) -> SymbolId {
        let indices = self.0.indices.iter().map(|ix| ix.bar()).collect();
        let mut derivs: Vec<SymbolId> = self.0.derivs.iter().map(|s| s.bar()).collect();
        derivs.sort();
        SymbolId(Arc::new(SymbolData {
            kind: self.0.kind,
            name: self.0.name.clone(),
            indices,
            derivs,
        }))
    }

    /// True when barring changes nothing (no indices carry bars to flip —
    /// i.e. the symbol has no indices at all).
    pub fn is_bar_fixed(&self) -> bool {
        self.0.indices.is_empty() && self.0.derivs.is_empty()
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let barred = !self.0.indices.is_empty() && self.0.indices.iter().all(|ix| ix.barred);
        let mixed = !barred && self.0.indices.iter().any(|ix| ix.barred);
        if barred {
            write!(f, "{}b", self.0.name)?;
        } else {
            write!(f, "{}", self.0.name)?;
        }
        if !self.0.indices.is_empty() {
            write!(f, "[")?;
            for (k, ix) in self.0.indices.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", ix.value)?;
                if mixed && ix.barred {
                    write!(f, "b")?;
                }
            }
            write!(f, "]")?;
        }
        if !self.0.derivs.is_empty() {
            write!(f, "{{")?;
            for (k, d) in self.0.derivs.iter().enumerate() {
                if k > 0 {
                    write!(f, ";")?;
                }
                write!(f, "d{}", d)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_is_involutive() {
        let s = SymbolId::coordinate("p", vec![Index::roman(1), Index::greek(2).bar()]);
        assert_ne!(s.bar(), s);
        assert_eq!(s.bar().bar(), s);
    }

    #[test]
    fn jet_chain_is_sorted() {
        let z1 = SymbolId::coordinate("z", vec![Index::greek(1)]);
        let z2 = SymbolId::coordinate("z", vec![Index::greek(2)]);
        let f = SymbolId::jet("F", vec![Index::roman(1), Index::greek(1).bar()], vec![]);
        let a = f.extend_jet(&z1).extend_jet(&z2);
        let b = f.extend_jet(&z2).extend_jet(&z1);
        assert_eq!(a, b);
    }
}
