//! Exact enumeration of king and cylindrical king permutations.
//!
//! A *king* permutation has no two adjacent entries holding consecutive
//! values; a *cylindrical king* additionally requires the first and last
//! entries to be non-consecutive. This crate counts both families, computes
//! the bond and cyclic-bond distribution polynomials, evaluates the related
//! generating functions as truncated power series, and checks the identities
//! linking them against brute-force enumeration.

pub mod oracle;
pub mod perm;
pub mod poly;
pub mod recurrences;
pub mod bijections;
pub mod marked;
pub mod series;
pub mod verify;
mod serde_dec;

pub use oracle::{Caps, CountRow, DistTable, Oracle, OracleError};
pub use perm::{perm, BondKind, BondRecord, PermError, Permutation};
pub use poly::{Binomial, IntPoly, PolyError};
