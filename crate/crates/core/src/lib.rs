//! Finite AG-groups, their parallelogram spaces and derived algebras.
//!
//! A table is loaded into a [`CayleyTable`], classified with
//! [`classify::classify`], and, when it is a quasigroup, explored with the
//! parallelogram relation in [`parallelogram`]. [`derived`] builds the
//! algebra whose elements are parallelograms, and [`enumerate`] finds all
//! small models of a class.

pub mod classify;
pub mod derived;
pub mod enumerate;
pub mod error;
pub mod identity;
pub mod parallelogram;
pub mod table;

pub use classify::{classify, StructureReport};
pub use derived::{build_derived, DerivedAlgebra};
pub use enumerate::{canonical_form, enumerate_models, naive_oracle, ModelClass, SearchSpec};
pub use error::{Error, ParseErrorKind, Result};
pub use identity::{holds, Assignment, Identity, Verdict};
pub use parallelogram::{Par, Parallelogram};
pub use table::{CayleyTable, ElementId};
