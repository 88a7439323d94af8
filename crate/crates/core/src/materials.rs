//! Frequency-dependent dielectric models for cavity regions.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Drude plasma frequency of gold, eV.
pub const GOLD_PLASMA_EV: f64 = 8.5;
/// Representative Drude damping of gold, eV.
pub const GOLD_DAMPING_EV: f64 = 0.048;
/// Damping fractions of `GOLD_DAMPING_EV` used in the loss sweeps.
pub const GOLD_DAMPING_FRACTIONS: [f64; 4] = [1.0, 0.25, 0.10, 0.05];

/// Complex relative permittivity model. All frequencies are in Hartree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DielectricModel {
    Vacuum,
    Constant(f64),
    Drude { plasma: f64, damping: f64 },
    Tabulated(Tabulated),
}

/// Sampled permittivity with linear interpolation in both parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    omega: Vec<f64>,
    epsilon: Vec<Complex64>,
}

impl Tabulated {
    pub fn new(points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation(
                "tabulated permittivity needs at least 2 points".into(),
            ));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Validation(format!(
                    "tabulated frequencies must be strictly ascending ({} after {})",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some((w, e)) = points.iter().find(|(_, e)| e.im < 0.0) {
            return Err(Error::Passivity(format!("Im eps = {} < 0 at {w} Ha", e.im)));
        }
        let (omega, epsilon) = points.into_iter().unzip();
        Ok(Self { omega, epsilon })
    }

    /// Read `omega(eV), Re eps[, Im eps]` rows; `#` starts a comment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            if fields.len() != 2 && fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected 2 or 3 columns, found {}",
                    fields.len()
                )));
            }
            let mut nums = [0.0; 3];
            for (slot, field) in nums.iter_mut().zip(&fields) {
                *slot = field
                    .parse()
                    .map_err(|_| parse_err(format!("not a number: '{field}'")))?;
            }
            points.push((units::ev(nums[0]), Complex64::new(nums[1], nums[2])));
        }
        Self::new(points)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    fn interpolate(&self, omega: f64) -> Result<Complex64> {
        let (min, max) = self.range();
        if !(min..=max).contains(&omega) {
            return Err(Error::OutOfRange {
                value: omega,
                min,
                max,
            });
        }
        let hi = self.omega.partition_point(|&w| w < omega).max(1);
        let lo = hi - 1;
        let t = (omega - self.omega[lo]) / (self.omega[hi] - self.omega[lo]);
        Ok(self.epsilon[lo] * (1.0 - t) + self.epsilon[hi] * t)
    }
}

impl DielectricModel {
    pub fn drude(plasma: f64, damping: f64) -> Result<Self> {
        if !(plasma > 0.0) || !(damping >= 0.0) {
            return Err(Error::Validation(format!(
                "Drude model needs plasma > 0 and damping >= 0 (got {plasma}, {damping})"
            )));
        }
        Ok(Self::Drude { plasma, damping })
    }

    pub fn constant(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 1.0) {
            return Err(Error::Validation(format!(
                "constant permittivity must be real and >= 1 (got {epsilon})"
            )));
        }
        Ok(Self::Constant(epsilon))
    }

    /// Drude gold with the nominal damping.
    pub fn gold() -> Self {
        Self::gold_with_damping_fraction(1.0)
    }

    /// Drude gold with `fraction` of the nominal damping.
    pub fn gold_with_damping_fraction(fraction: f64) -> Self {
        Self::Drude {
            plasma: units::ev(GOLD_PLASMA_EV),
            damping: units::ev(GOLD_DAMPING_EV * fraction),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Self::Vacuum)
    }

    /// Relative permittivity at angular frequency `omega` (Ha).
    pub fn permittivity(&self, omega: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return Err(Error::Validation(format!(
                "frequency must be positive (got {omega})"
            )));
        }
        match self {
            Self::Vacuum => Ok(Complex64::new(1.0, 0.0)),
            Self::Constant(eps) => Ok(Complex64::new(*eps, 0.0)),
            Self::Drude { plasma, damping } => {
                let denom = Complex64::new(omega * omega, damping * omega);
                Ok(1.0 - plasma * plasma / denom)
            }
            Self::Tabulated(table) => table.interpolate(omega),
        }
    }

    /// Complex refractive index on the branch with Im n >= 0.
    pub fn refractive_index(&self, omega: f64) -> Result<Complex64> {
        Ok(passive_sqrt(self.permittivity(omega)?))
    }
}

/// Square root on the branch with non-negative imaginary part.
pub(crate) fn passive_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}
