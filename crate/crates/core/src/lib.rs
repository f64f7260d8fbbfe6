//! Fixed-time cooperative tracking for double-integrator networks.
//!
//! Gains are shaped by time-based generators: a smooth ramp `xi(t)` from 0
//! to 1 over a prescribed duration turns into a gain `h(t)` that forces
//! convergence by that duration regardless of initial conditions. The crate
//! provides the generators, a sliding-mode controller for a single plant,
//! distributed observers for leader tracking (undirected and directed
//! graphs) and for average tracking, and a fixed-step engine that runs
//! them together.

pub mod builtin;
pub mod config;
pub mod engine;
pub mod generator;
pub mod observers;
pub mod report;
pub mod scenarios;
pub mod signal;
pub mod smc;
pub mod sweep;
pub mod topology;
