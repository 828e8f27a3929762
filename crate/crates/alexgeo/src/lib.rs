//! Command-line front end, file formats and the acceptance suite for
//! `alexgeo-core`.

pub mod angle;
pub mod cli;
pub mod input;
pub mod output;
pub mod suite;
