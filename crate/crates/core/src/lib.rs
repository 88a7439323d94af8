//! Light-matter coupling of molecular emitters in dispersive nanocavities.
//!
//! The cavity enters only through the imaginary part of its dyadic Green's
//! function at the emitter position. That spectral density is mapped onto a
//! discrete set of bright photon modes, which are coupled to the molecular
//! transitions and diagonalised to obtain polariton energies and spectra.
//!
//! All quantities are in Hartree atomic units unless a name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod emitter_modes;
pub mod error;
pub mod materials;
pub mod matter;
pub mod oracle;
pub mod output;
pub mod photon_grid;
pub mod planar;
pub mod polariton;
pub mod quadrature;
pub mod spherical;
pub mod units;

pub use config::RunConfig;
pub use error::{Error, ErrorClass, Result};
pub use materials::DielectricModel;
pub use spherical::{ResonancePeak, SamplingDensity, SphericalCavity};
