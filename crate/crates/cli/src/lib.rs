//! Experiment runner around the core-set consensus library: configuration,
//! synthetic data generation, run orchestration, and artifact I/O. The
//! binary (`ccsim`) is a thin argument-parsing layer over this crate.

pub mod config;
pub mod datagen;
pub mod experiment;
