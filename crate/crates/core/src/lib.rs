#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dtp;
pub mod dynamics;
pub mod intersection;
pub mod oracle;
pub mod schedparams;
pub mod verifier;
pub mod supervisor;
pub mod simharness;
pub mod scenarios;
pub mod cli;
