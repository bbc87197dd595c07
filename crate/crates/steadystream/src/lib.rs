//! File formats, synthetic data and the command-line front end for
//! `steadystream-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod formats;
pub mod sim;
pub mod synth;

pub use steadystream_core as core;
