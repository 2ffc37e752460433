//! Simulation and verification of erosion-based leader election for
//! amoebot systems on the triangular and face-centred cubic lattices.

pub mod engine;
pub mod files;
pub mod generate;
pub mod geometry;
pub mod oracles;
pub mod replay;
pub mod scheduler;
pub mod stats;
pub mod topology;
