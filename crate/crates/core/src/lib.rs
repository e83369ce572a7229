//! Exact, brute-force-checkable computation with abelian p-groups.
//!
//! The crate is organized around a handful of small exact domains:
//!
//! - [`ordinal`]: ordinals below `w^w` in Cantor normal form, plus counts
//!   extended with `w`.
//! - [`pgroup`]: finitely described abelian p-groups (finite cyclic summands
//!   plus a divisible part), their elements, and Cayley-table realizations.
//! - [`ulm`]: height filtrations, Ulm invariants, classification profiles,
//!   and a brute-force isomorphism oracle for element tables.
//! - [`logic`]: evaluators for the height/invariant formula families
//!   (`psi`, `phi`, divisible-rank sentences) on explicit groups.
//! - [`tp`]: the order-annotated relational language, its axiom checker,
//!   the group-to-structure encoder and the structure-to-group decoder.
//! - [`reduction`]: bases mod p, the star-group construction, the
//!   invariant-shifting reduction `hred`, and the two reduction maps
//!   between structures and groups.
//!
//! Every closed-form computation in the crate is paired with an independent
//! slow path (exhaustive search, repeated addition, socle counting) and the
//! [`selftest`] module wires those pairs into a deterministic ledger.

pub mod corpus;
pub mod error;
pub mod ledger;
pub mod logic;
pub mod ordinal;
pub mod pgroup;
pub mod reduction;
pub mod selftest;
pub mod table;
pub mod tp;
pub mod ulm;

pub use error::Error;
