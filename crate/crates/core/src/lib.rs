//! Layout-to-Hamiltonian engine for surface-code transmon lattices.
//!
//! The pipeline runs from a chip description ([`device`]) through the full
//! bosonic circuit Hamiltonian ([`hilbert`]), coupler elimination and
//! Pauli-string extraction ([`effective`]), with a diagrammatic perturbation
//! engine ([`perturbation`]) as an independent cross-check. On top of that sit
//! coupler calibration ([`calibration`]), iSWAP gate simulation ([`gatesim`])
//! and the scan/report drivers used by the CLI ([`analysis`]).
//!
//! Units: frequencies and couplings are linear frequencies in MHz, times are
//! in ns. Angular factors of 2π appear only where phases are accumulated.

pub mod analysis;
pub mod calibration;
pub mod device;
pub mod effective;
pub mod error;
pub mod gatesim;
pub mod hilbert;
pub mod perturbation;
pub mod report;

pub use error::{Error, Result};
