//! Dataset loading, experiment orchestration and reporting for the
//! `graphdrift` command-line tool.

pub mod config;
pub mod experiment;
pub mod gxl;
pub mod report;
pub mod synthetic;
pub mod validate;
