//! Discretisation of the continuous coupling strength onto a uniform frequency grid.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::emitter_modes::{BrightModeBasis, CouplingSource, EmitterConfig};
use crate::error::{Error, Result};
use crate::spherical::SamplingDensity;
use crate::units;

/// One discrete photon mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMode {
    pub omega: f64,
    /// `sqrt(delta_omega) * lambda(omega)`.
    pub coupling: Vector3<f64>,
}

/// Photon modes on the midpoints of a uniform grid, `orientations` modes per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonModeSet {
    modes: Vec<PhotonMode>,
    spacing: f64,
    window: (f64, f64),
    per_point: usize,
}

impl PhotonModeSet {
    /// Sample a continuous coupling provider. `lambda(omega)` returns one vector per orientation.
    pub fn from_fn<F>(lambda: F, window: (f64, f64), density: SamplingDensity) -> Result<Self>
    where
        F: Fn(f64) -> Result<Vec<Vector3<f64>>> + Sync,
    {
        let (lo, hi) = window;
        if !(lo > 0.0) || !(hi > lo) {
            return Err(Error::Validation(format!(
                "mode window must satisfy 0 < min < max (got {lo}, {hi})"
            )));
        }
        let points = ((hi - lo) * density.points_per_hartree()).round().max(1.0) as usize;
        let spacing = (hi - lo) / points as f64;
        let root = spacing.sqrt();
        let per_point: Vec<Vec<PhotonMode>> = (0..points)
            .into_par_iter()
            .map(|k| {
                let omega = lo + (k as f64 + 0.5) * spacing;
                Ok(lambda(omega)?
                    .into_iter()
                    .map(|l| PhotonMode {
                        omega,
                        coupling: l * root,
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let count = per_point.first().map_or(0, Vec::len);
        if per_point.iter().any(|p| p.len() != count) {
            return Err(Error::Validation(
                "coupling provider returned a varying number of orientations".into(),
            ));
        }
        Ok(Self {
            modes: per_point.into_iter().flatten().collect(),
            spacing,
            window,
            per_point: count,
        })
    }

    /// Bright modes of `source` as seen by `emitter`.
    pub fn discretize(
        source: &dyn CouplingSource,
        emitter: &EmitterConfig,
        window: (f64, f64),
        density: SamplingDensity,
    ) -> Result<Self> {
        Self::from_fn(
            |omega| Ok(BrightModeBasis::at(source, emitter, omega)?.couplings),
            window,
            density,
        )
    }

    /// Modes from explicit frequencies and coupling vectors (used for few-mode models).
    pub fn from_modes(modes: Vec<PhotonMode>) -> Result<Self> {
        if let Some(m) = modes.iter().find(|m| !(m.omega > 0.0)) {
            return Err(Error::Validation(format!(
                "photon frequencies must be positive (got {})",
                m.omega
            )));
        }
        let lo = modes.iter().map(|m| m.omega).fold(f64::INFINITY, f64::min);
        let hi = modes.iter().map(|m| m.omega).fold(0.0, f64::max);
        Ok(Self {
            modes,
            spacing: 0.0,
            window: (lo, hi),
            per_point: 1,
        })
    }

    pub fn modes(&self) -> &[PhotonMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Grid spacing; zero for sets built from explicit modes.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn modes_per_point(&self) -> usize {
        self.per_point
    }

    /// Grid frequencies, one per point.
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes
            .chunks(self.per_point.max(1))
            .map(|c| c[0].omega)
            .collect()
    }

    /// Sum of |lambda_k|^2 over all modes.
    pub fn spectral_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.coupling.norm_squared()).sum()
    }

    /// Rows of `omega (eV), lambda_x, lambda_y, lambda_z`, summing the orientations of each point.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        self.modes
            .chunks(self.per_point.max(1))
            .map(|chunk| {
                // orientation-resolved vectors are orthogonal; report magnitudes per axis
                let mut axes = [0.0; 3];
                for m in chunk {
                    for (a, c) in axes.iter_mut().zip(m.coupling.iter()) {
                        *a += c * c;
                    }
                }
                [
                    units::to_ev(chunk[0].omega),
                    axes[0].sqrt(),
                    axes[1].sqrt(),
                    axes[2].sqrt(),
                ]
            })
            .collect()
    }
}

/// An observable and the change it shows when the sampling density is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged {
    pub value: f64,
    pub error: f64,
}

/// Evaluate `observable` at `base` and twice `base`; the difference is the error estimate.
pub fn convergence_check<F>(base: SamplingDensity, mut observable: F) -> Result<Converged>
where
    F: FnMut(SamplingDensity) -> Result<f64>,
{
    let coarse = observable(base)?;
    let fine = observable(base.scaled(2.0))?;
    Ok(Converged {
        value: fine,
        error: (fine - coarse).abs(),
    })
}
