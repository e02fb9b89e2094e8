//! Experiment runner for the Peterlin solver: convergence studies written as
//! CSV, console tables and log-log plots, plus the property-check suites.

pub mod bands;
pub mod config;
pub mod plot;
pub mod report;
