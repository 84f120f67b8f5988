//! Dense `f64` tensors and a reverse-mode tape.
//!
//! [`Graph`] records every operation applied to its [`Var`]s; calling
//! [`Graph::backward`] on a scalar walks the record in reverse creation
//! order, which is a topological order, visiting each node once.

mod gradcheck;
mod graph;
mod kernels;
mod tensor;

pub use gradcheck::{grad_check, grad_check_many};
pub use graph::{Gradients, Graph, Var};
pub use tensor::Tensor;

pub(crate) use graph::log_sum_exp;
pub(crate) use kernels::matmul_nn;
