//! Isometry testing for skew-symmetric matrix spaces over GF(p), p an odd
//! prime, and the derived isomorphism test for p-groups of class 2 and
//! exponent p given by Cayley tables.
//!
//! The pipeline: a group is turned into a skew-symmetric matrix space via the
//! commutator bilinear map; the space is represented as a 3-tensor; candidate
//! individualization data pins down a semi-canonical form of the tensor; two
//! semi-canonical forms are compared by encoding each as a skew-symmetric
//! matrix tuple and deciding restricted tuple isometry. Brute-force oracles
//! certify every decision at small sizes.

pub mod error;
pub mod gf;
pub mod group;
pub mod io;
pub mod lowrank;
pub mod oracle;
pub mod reduction;
pub mod seed;
pub mod space;
pub mod tensor;
pub mod tuples;

pub use error::{Error, Result};
pub use gf::{lex_compare, FpMatrix, Prime, RowSpace, RowVector};
pub use seed::Seed;
