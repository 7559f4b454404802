//! Moving-frames toolkit for first-order PDE systems generalizing the
//! Cauchy-Riemann equations.
//!
//! The library is organized around an exact-arithmetic symbolic kernel:
//!
//! * [`symexpr`] — indexed symbols, formal jets, canonical polynomial
//!   expressions over Gaussian rationals, differentiation, conjugation,
//!   a text parser and numeric evaluation.
//! * [`extalg`] — exterior algebra of differential forms over a declared
//!   coframe, with exterior derivative, coframe changes and Cartan-lemma
//!   style linear solves.
//! * [`grassmann`] — adapted coframes on the Grassmann bundle, the
//!   structure group and its inverse blocks, the soldering form, the
//!   torsion scalar, and symbolic verification of the structure equations
//!   and of the prolongation table.
//! * [`crtableau`] — the decision procedure: raw torsion of a system at a
//!   point, the group-absorption map, normalized invariants, the
//!   Cauchy-Riemann tableau verdict, first-order normal forms, the induced
//!   complex structure, and the classification rank computation.
//! * [`involution`] — Cartan characters, tableau prolongation, and the
//!   involutivity test, with the generality counts.
//! * [`legendre`] — generation of hypersurface equations from Legendre
//!   fibrations of the standard complex contact space.
//! * [`report`] — machine-readable reports shared by the CLI and the
//!   examples.

pub mod crtableau;
pub mod extalg;
pub mod grassmann;
pub mod involution;
pub mod legendre;
pub mod linalg;
pub mod rational;
pub mod report;
pub mod symexpr;

pub use rational::GaussRat;
pub use symexpr::{Binding, ScalarExpr, SymbolId};
