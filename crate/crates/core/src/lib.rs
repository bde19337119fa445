//! Coal production, transport and consumption network model.
//!
//! The crate builds an installation-level network of mines, transport links,
//! plants and provincial demand centres, formulates the annual cost-minimising
//! flow problem as a linear program, solves it, and runs demand sweeps and
//! infrastructure counterfactuals on top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demand;
pub mod fixtures;
pub mod io;
pub mod network;
pub mod optimizer;
pub mod report;
pub mod scenarios;
pub mod supply;
pub mod years;

pub use years::{Year, YearSeries};
