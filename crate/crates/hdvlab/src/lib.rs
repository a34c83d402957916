//! Workbench for Henselian discrete valued fields of residual
//! characteristic p: exact residue arithmetic, valued-field models with
//! tracked precision, p-th power diagnostics, normality classification of
//! degree-p Kummer generators, bounded extension towers, and cyclic-algebra
//! certification.

pub mod cyclotomic;
pub mod error;
pub mod extension;
pub mod hensel;
pub mod local;
pub mod normality;
pub mod power;
pub mod residue;
pub mod roots;
pub mod valued;

pub use error::{CResult, Error};
