//! Exact computational algebra for refined Stark-type class number identities
//! over real quadratic fields.
//!
//! The crate is organized in layers:
//!
//! * [`exactlat`] — exact integer linear algebra (Hermite/Smith normal forms,
//!   integer solving, quotient presentations of finitely generated abelian
//!   groups). Everything above sits on this kernel.
//! * [`groupring`] — finite abelian groups, group rings, characters, norm
//!   elements, augmentation-ideal filtrations and Kolyvagin derivative
//!   operators.
//! * [`gmodlat`] — G-lattices, equivariant functionals, exterior-power
//!   evaluators, Rubin-lattice membership, higher norms and the canonical
//!   injection between fixed-part wedge lattices.
//! * [`numerics`] — arbitrary-precision real/complex arithmetic and truncated
//!   power series used by the analytic layer.
//! * [`numberfield`] — real quadratic fields: units, class groups, splitting,
//!   S-unit bases and local reciprocity values.
//! * [`cyclotomic`] — formal multiplicative elements of cyclotomic fields as
//!   exponent vectors over symbols (1 - zeta^a), with Galois action, norms,
//!   numerical embeddings, residue reductions and power testing.
//! * [`lfun`] — Dirichlet L-functions with (S,T)-modifications, vanishing
//!   orders, equivariant leading terms and analytic regulators.
//! * [`stark`] — Rubin-Stark data validation and verifiers for the norm
//!   relation, the order-lowering evaluators, the unramified case and the
//!   evaluator pairing identity.
//! * [`darmon`] — the end-to-end pipeline for the refined class number
//!   formula: theta elements, algebraic regulators, Tate families, descent
//!   and the headline identity check.
//! * [`report`] / [`cli`] — JSON reports and the command-line front end.

pub mod cli;
pub mod cyclotomic;
pub mod darmon;
pub mod error;
pub mod exactlat;
pub mod gmodlat;
pub mod groupring;
pub mod lfun;
pub mod numberfield;
pub mod numerics;
pub mod report;
pub mod stark;

pub use error::{Error, Result};
