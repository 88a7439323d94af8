//! Hartree atomic units (hbar = e = m_e = 1, 4 pi eps0 = 1) and conversions from
//! the user-facing units used in configuration files and tables.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Conversion constants between user units and atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// eV per Hartree.
    pub hartree_in_ev: f64,
    /// nm per bohr.
    pub bohr_in_nm: f64,
    /// Speed of light in atomic units.
    pub inverse_fine_structure: f64,
    /// Seconds per atomic unit of time.
    pub atomic_time_in_s: f64,
}

impl UnitSystem {
    pub const ATOMIC: UnitSystem = UnitSystem {
        hartree_in_ev: 27.211386,
        bohr_in_nm: 0.05291772,
        inverse_fine_structure: 137.035999,
        atomic_time_in_s: 2.4188843265857e-17,
    };

    pub fn to_internal(&self, value: f64, unit: Unit) -> f64 {
        match unit {
            Unit::ElectronVolt => value / self.hartree_in_ev,
            Unit::Nanometer => value / self.bohr_in_nm,
            // angular frequency in s^-1
            Unit::PerSecond => value * self.atomic_time_in_s,
            Unit::Dimensionless => value,
        }
    }

    pub fn from_internal(&self, value: f64, unit: Unit) -> f64 {
        match unit {
            Unit::ElectronVolt => value * self.hartree_in_ev,
            Unit::Nanometer => value * self.bohr_in_nm,
            Unit::PerSecond => value / self.atomic_time_in_s,
            Unit::Dimensionless => value,
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::ATOMIC
    }
}

/// Speed of light in atomic units.
pub const C: f64 = UnitSystem::ATOMIC.inverse_fine_structure;
pub const HARTREE_EV: f64 = UnitSystem::ATOMIC.hartree_in_ev;
pub const BOHR_NM: f64 = UnitSystem::ATOMIC.bohr_in_nm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    ElectronVolt,
    Nanometer,
    PerSecond,
    Dimensionless,
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        match tag.trim() {
            "eV" | "ev" => Ok(Unit::ElectronVolt),
            "nm" => Ok(Unit::Nanometer),
            "s^-1" | "1/s" | "s-1" => Ok(Unit::PerSecond),
            "" | "1" | "dimensionless" => Ok(Unit::Dimensionless),
            other => Err(Error::Config(format!("unknown unit tag '{other}'"))),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::ElectronVolt => "eV",
            Unit::Nanometer => "nm",
            Unit::PerSecond => "s^-1",
            Unit::Dimensionless => "1",
        })
    }
}

/// Convert a tagged quantity (e.g. `"6.808", "eV"`) to atomic units.
pub fn to_internal(value: f64, unit_tag: &str) -> Result<f64> {
    let unit: Unit = unit_tag.parse()?;
    Ok(UnitSystem::ATOMIC.to_internal(value, unit))
}

pub fn from_internal(value: f64, unit_tag: &str) -> Result<f64> {
    let unit: Unit = unit_tag.parse()?;
    Ok(UnitSystem::ATOMIC.from_internal(value, unit))
}

#[inline]
pub fn ev(value: f64) -> f64 {
    value / HARTREE_EV
}

#[inline]
pub fn to_ev(hartree: f64) -> f64 {
    hartree * HARTREE_EV
}

#[inline]
pub fn nm(value: f64) -> f64 {
    value / BOHR_NM
}

#[inline]
pub fn to_nm(bohr: f64) -> f64 {
    bohr * BOHR_NM
}

/// Vacuum wavelength (bohr) of light with angular frequency `omega` (Ha).
pub fn vacuum_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / omega
}
