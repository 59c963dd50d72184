//! Kubo-Ando matrix means, generalized quantum Hellinger divergences
//! `φ(A, B) = Tr((1−c)A + cB − A σ B)` and their weighted barycenters on the
//! cone of positive definite matrices.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod campaign;
pub mod channel;
pub mod counterexample;
pub mod divergence;
pub mod error;
pub mod fixed_point;
pub mod generator;
pub mod matrix;
pub mod measure;
pub mod quadrature;
pub mod random;

pub use error::{Error, Result};
