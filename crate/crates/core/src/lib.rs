//! Numerical toolkit for weighted composition operators on spaces of analytic
//! functions on the unit disk.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod axioms;
pub mod characterization;
pub mod cli;
pub mod error;
pub mod operators;
pub mod quadrature;
pub mod spaces;

pub use analytic::{AnalyticExpr, Complex, Jet2, MoebiusMap};
pub use axioms::{run_all, AxiomReport};
pub use characterization::{
    check_invertible, check_isometry, count_zeros, detect_automorphism, multiplier_test, InvertibilityReport,
    IsometryReport, Verdict,
};
pub use cli::parse_expression;
pub use error::{Result, WcoError};
pub use operators::{apply, finite_section, isometry_defect, WcoSymbols};
pub use quadrature::GridConfig;
pub use spaces::{norm, pointeval_bound, seminorm, NormBreakdown, SpaceSpec};
