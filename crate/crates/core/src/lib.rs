//! Layer-wise geometrically nonlinear finite elements for laminated glass plates.
//!
//! Each ply is a Reissner–Mindlin plate with von Kármán membrane strains;
//! plies are glued node by node through Lagrange multipliers and the
//! resulting saddle-point problem is solved by Newton's method.

pub mod config;
pub mod constraints;
pub mod element;
pub mod error;
pub mod jobs;
pub mod material;
pub mod model;
pub mod postprocess;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
