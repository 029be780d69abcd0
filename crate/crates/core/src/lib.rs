//! Simulation library for wirelessly powered communication links.
//!
//! The crate models the physical layer of systems that deliver power and
//! information over the same radio infrastructure:
//!
//! - [`signal`]: sampled waveforms, multisine synthesis, PAPR, the uniform
//!   ADC model with SQNR measurement, and seeded random sources.
//! - [`channel`]: free-space propagation over explicit 3D geometry, Rayleigh
//!   fading, and composite (dyadic) backscatter channels.
//! - [`rectenna`]: the polynomial diode harvester and multisine waveform
//!   design that exploits its fourth-order term.
//! - [`decoupler`]: the analog receiver that separates a strong power-bearing
//!   signal from a weak data signal before quantization, using phase
//!   compensation and a truncated Hadamard combiner.
//! - [`backscatter`]: duty-cycle and constellation energy-rate tradeoffs of
//!   passive reflectors, plus retrodirective beamforming.
//! - [`ua`]: very large distributed ("ubiquitous") arrays: energy hotspot
//!   formation, field decay laws, and blind localization from channel
//!   observation profiles.
//! - [`stats`]: small generic helpers (KS distances, rank correlation, line
//!   fits) shared by experiments and tests.
//!
//! All operations are pure functions of their inputs; randomness enters only
//! through [`signal::RandomSource`], which is deterministic per (seed,
//! stream) so every experiment is exactly reproducible.

pub mod backscatter;
pub mod channel;
pub mod decoupler;
pub mod error;
pub mod rectenna;
pub mod signal;
pub mod stats;
pub mod ua;

pub use error::{Error, Result};
