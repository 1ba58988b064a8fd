//! Deformed boson (Weyl) algebras on a truncated Fock space.
//!
//! The crate is organised bottom-up: [`deformation`] builds ladder tables,
//! [`eigenstate`] and [`aso`] implement the two bases of the deformed algebra
//! and the transforms between them, [`equivalence`] and [`hopf`] build maps
//! and coproducts on top, and [`phase_space`] / [`classical`] give the
//! phase-space realisation and the classical limit.

pub mod aso;
pub mod classical;
pub mod deformation;
pub mod eigenstate;
pub mod equivalence;
pub mod error;
pub mod exact;
pub mod hopf;
pub mod numerics;
pub mod phase_space;
pub mod verify;

pub use num_complex::Complex64;

pub use aso::{AsoElement, SigmaCoeffs};
pub use deformation::{build_ladder_table, eval_f, DeformationKind, DeformationSpec, LadderTable};
pub use eigenstate::{EigenElement, Generator, OperatorMatrix, Side, Word};
pub use equivalence::EquivalenceMap;
pub use error::{Error, Result};
