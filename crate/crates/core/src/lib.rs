// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detect;
pub mod error;
pub mod hydro;
pub mod io;
pub mod linalg;
pub mod linmodel;
pub mod mooring;
pub mod plant;
pub mod sysid;

pub use error::{Error, Result};
