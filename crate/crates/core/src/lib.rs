//! Exterior calculus on small manifold models, contact pairs, their linear
//! deformations, and the Jacobi structures they induce.

pub mod exterior;
pub mod expr;
pub mod linalg;
pub mod manifold;
pub mod verdict;
pub mod contact;
pub mod deformation;
pub mod catalog;
pub mod jacobi;
