//! Simulation and certification toolkit for degenerate non-divergent
//! diffusion: explicit PDE solver, random-walk particle model, Barenblatt
//! and heat-kernel oracles, and a De Giorgi energy-decay check for
//! finite-speed localization.

pub mod config;
pub mod degiorgi;
pub mod error;
pub mod field;
pub mod io;
pub mod oracle;
pub mod params;
pub mod solver;
pub mod stats;
pub mod rng;
pub mod run;
pub mod walkers;
