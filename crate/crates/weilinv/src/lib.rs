//! Dimensions and integral bases of the SL2(Z)-invariants of Weil
//! representations attached to finite quadratic modules.
//!
//! The pipeline is exact end to end: a module built from a genus symbol or
//! an even Gram matrix is analyzed over small prime fields F_l carrying a
//! root of unity of the module's level (l == 1 mod N, l >= 5), where the
//! invariant dimension agrees with the characteristic-zero one; integral
//! bases come from lifting echelonized mod-l solutions through the Chinese
//! remainder theorem and rational reconstruction.

pub mod cli;
pub mod fqm;
pub mod invariants;
pub mod tables;
pub mod weil;
pub mod zfield;
