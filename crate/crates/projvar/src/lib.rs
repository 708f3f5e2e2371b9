//! Recovery of projective varieties from two unknown linear projections.
//!
//! The library provides the algebraic machinery for two-view geometry in
//! arbitrary projective dimension: a graded exterior algebra over complex
//! scalars, lifted projection operators, the family of fundamental matrices,
//! generalized Kruppa constraints with a solver and dimension diagnostics,
//! and cone-intersection reconstruction with ghost-component counting, all
//! over synthetic seeded scenes.

pub mod commands;
pub mod config;
pub mod epipolar;
pub mod error;
pub mod exterior;
pub mod kruppa;
pub mod numeric;
pub mod poly;
pub mod projection;
pub mod reconstruction;
pub mod recovery;
pub mod report;
pub mod scene;
pub mod varieties;

pub use error::{ProjvarError, Result};
