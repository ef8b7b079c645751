//! Simulation of two adiabatic-passage schemes that entangle three traveling
//! atoms into a W state via an optical cavity and a laser beam.
//!
//! The system is modeled in the single-excitation subspace of the
//! atoms-cavity Hilbert space. [`model`] builds the effective (2N+1)-dim
//! Hamiltonian and its full-space validation counterpart, [`pulses`] maps the
//! geometric arrangement of the beams onto time-dependent Rabi frequencies,
//! [`dynamics`] integrates the Schrödinger equation with an exactly unitary
//! stepper, [`spectral`] provides dark-state and gap diagnostics, and
//! [`sweep`] scans the geometry plane for the f-STIRAP working point.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod output;
pub mod pulses;
pub mod spectral;
pub mod sweep;

pub use error::SimError;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SimError>;
