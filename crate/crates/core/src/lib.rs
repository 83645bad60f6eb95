// `!(x < y)` comparisons are deliberate: they route NaN to the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod cli_io;
pub mod error;
pub mod escaping;
pub mod field_oracle;
pub mod forms;
pub mod grid;
pub mod harmonic;
pub mod linalg;
pub mod nonescaping;
pub mod potential;
pub mod spectral;
