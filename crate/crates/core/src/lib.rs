//! Public-key encryption over free subgroups of `SL2(Z)`, a group-ring
//! variant, and a kernel-based attack on the homomorphic ring scheme.

pub mod arith;
pub mod cli;
pub mod fixtures;
pub mod group;
pub mod hom_eval;
pub mod rep_solver;
pub mod ring;
pub mod ring_scheme;
pub mod scheme;
pub mod word;
