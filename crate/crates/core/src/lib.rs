//! Symbolic calculus of variations on jets of submanifolds.
//!
//! The crate is layered bottom-up:
//!
//! - [`expr`]: exact expressions in canonical rational-function form;
//! - [`jet`]: contexts, total derivatives and evolutionary fields;
//! - [`forms`]: exterior calculus in the raw and contact bases;
//! - [`variational`]: Euler–Lagrange operator, adjoints, Helmholtz test;
//! - [`riemann`]: fundamental forms and minimal submanifolds;
//! - [`relativity`]: the relativistic particle Lagrangian.

// Index loops mirror the tensor notation they implement.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod linalg;
pub mod multi_index;
pub mod relativity;
pub mod render;
pub mod riemann;
pub mod variational;

pub use error::{Error, Result};
pub use expr::{parse, Atom, Expr};
pub use jet::{EvolutionaryField, JetContext};
pub use multi_index::MultiIndex;
pub use render::Format;
