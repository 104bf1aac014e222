// `!(x > 0.0)` rejects NaN; index loops mirror the lattice sums.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod collision;
pub mod diagnostics;
pub mod dispersion_validation;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod lattice;
pub mod quadrature;
pub mod spin;
