//! Observables derived from cavity resonances and polariton spectra.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::emitter_modes::CouplingSource;
use crate::error::{Error, Result};
use crate::polariton::Spectrum;
use crate::quadrature::{self, Tolerance};
use crate::spherical::{prominence, ResonancePeak};
use crate::units::{self, C};

/// Minimum peak prominence, relative to the tallest bin, for a spectral peak to count.
pub const DEFAULT_PROMINENCE: f64 = 0.10;

/// Coupling summary for one emitter-cavity pair. Frequencies in Ha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    pub omega_c: f64,
    /// `sqrt(integral of |lambda_d|^2)` over the peak support.
    pub lambda_c: f64,
    /// `sqrt(omega_c) lambda_c |d|`.
    pub g_eff: f64,
    pub rabi_splitting: Option<f64>,
    pub purcell: f64,
    /// Integration interval used for `lambda_c`.
    pub support: (f64, f64),
}

impl CouplingReport {
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "omega_c_ev = {:.6}", units::to_ev(self.omega_c));
        let _ = writeln!(out, "lambda_c = {:.6e}", self.lambda_c);
        let _ = writeln!(out, "g_eff = {:.6e}", self.g_eff);
        match self.rabi_splitting {
            Some(r) => {
                let _ = writeln!(out, "rabi_splitting_mev = {:.4}", 1e3 * units::to_ev(r));
            }
            None => out.push_str("rabi_splitting_mev = none\n"),
        }
        let _ = writeln!(out, "purcell = {:.6}", self.purcell);
        let _ = writeln!(
            out,
            "support_ev = [{:.6}, {:.6}]",
            units::to_ev(self.support.0),
            units::to_ev(self.support.1)
        );
        out
    }

    /// `omega_c (eV), lambda_c, g_eff, purcell`.
    pub fn row(&self) -> [f64; 4] {
        [
            units::to_ev(self.omega_c),
            self.lambda_c,
            self.g_eff,
            self.purcell,
        ]
    }
}

/// Peak-integrated coupling of `source` along `dipole` and the resulting `g_eff`.
///
/// Uses `sum_i (lambda_i . n)^2 = (8 omega / c^2) n.ImG.n` for the coupling seen
/// along the unit vector `n` of the dipole.
pub fn effective_coupling(
    source: &dyn CouplingSource,
    peak: &ResonancePeak,
    dipole: Vector3<f64>,
) -> Result<CouplingReport> {
    if !(peak.fwhm > 0.0) {
        return Err(Error::Validation(format!(
            "peak at {} Ha has no width",
            peak.center
        )));
    }
    let magnitude = dipole.norm();
    if !(magnitude > 0.0) {
        return Err(Error::Validation("dipole must be non-zero".into()));
    }
    let n = dipole / magnitude;
    let (lo, hi) = peak.support;
    let integral = quadrature::integrate(
        |w| {
            let g = source.im_green_tensor(w)?;
            Ok((8.0 * w / (C * C) * n.dot(&(g * n))).max(0.0))
        },
        lo,
        hi,
        Tolerance::relative(1e-8),
    )?;
    let lambda_c = integral.value.sqrt();
    Ok(CouplingReport {
        omega_c: peak.center,
        lambda_c,
        g_eff: peak.center.sqrt() * lambda_c * magnitude,
        rabi_splitting: None,
        purcell: peak.peak_purcell,
        support: peak.support,
    })
}

/// A peak of a binned spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub bin: usize,
    /// Strength-weighted centre of the peak bin and its two neighbours, Ha.
    pub center: f64,
    pub height: f64,
}

/// Peaks whose prominence is at least `relative_prominence` times the tallest bin.
pub fn spectral_peaks(spectrum: &Spectrum, relative_prominence: f64) -> Vec<SpectralPeak> {
    let w = &spectrum.weights;
    let max = w.iter().copied().fold(0.0, f64::max);
    if w.is_empty() || max <= 0.0 {
        return Vec::new();
    }
    // pad with zeros so edge bins can be peaks
    let mut padded = Vec::with_capacity(w.len() + 2);
    padded.push(0.0);
    padded.extend_from_slice(w);
    padded.push(0.0);
    (1..padded.len() - 1)
        .filter(|&k| padded[k] > padded[k - 1] && padded[k] >= padded[k + 1])
        .filter(|&k| prominence(&padded, k) >= relative_prominence * max)
        .map(|k| {
            let bin = k - 1;
            let range = bin.saturating_sub(1)..(bin + 2).min(w.len());
            let (mut sum, mut moment) = (0.0, 0.0);
            for j in range {
                sum += w[j];
                moment += w[j] * spectrum.center(j);
            }
            SpectralPeak {
                bin,
                center: moment / sum,
                height: w[bin],
            }
        })
        .collect()
}

/// Distance between the two dominant peaks, if the spectrum has at least two.
pub fn extract_rabi_splitting(spectrum: &Spectrum) -> Option<f64> {
    extract_rabi_splitting_with(spectrum, DEFAULT_PROMINENCE)
}

pub fn extract_rabi_splitting_with(spectrum: &Spectrum, relative_prominence: f64) -> Option<f64> {
    let mut peaks = spectral_peaks(spectrum, relative_prominence);
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    Some((peaks[0].center - peaks[1].center).abs())
}

/// Full width at half maximum of a single-peaked spectrum, from linear
/// interpolation of the half-maximum crossings.
pub fn spectral_fwhm(spectrum: &Spectrum) -> Result<f64> {
    let peaks = spectral_peaks(spectrum, DEFAULT_PROMINENCE);
    if peaks.len() != 1 {
        return Err(Error::Validation(format!(
            "expected a single peak, found {}; use the Rabi-splitting extraction for multiplets",
            peaks.len()
        )));
    }
    let w = &spectrum.weights;
    let k = peaks[0].bin;
    let half = 0.5 * w[k];
    let crossing = |inner: usize, outer: usize| {
        let t = (w[inner] - half) / (w[inner] - w[outer]);
        spectrum.center(inner) + t * (spectrum.center(outer) - spectrum.center(inner))
    };
    let mut left = k;
    while left > 0 && w[left - 1] > half {
        left -= 1;
    }
    let lo = if left == 0 {
        spectrum.start
    } else {
        crossing(left, left - 1)
    };
    let mut right = k;
    while right + 1 < w.len() && w[right + 1] > half {
        right += 1;
    }
    let hi = if right + 1 == w.len() {
        spectrum.start + w.len() as f64 * spectrum.bin_width
    } else {
        crossing(right, right + 1)
    };
    Ok(hi - lo)
}

/// Linewidth enhancement of a cavity run over a reference run.
pub fn extract_purcell_from_spectrum(cavity: &Spectrum, reference: &Spectrum) -> Result<f64> {
    Ok(spectral_fwhm(cavity)? / spectral_fwhm(reference)?)
}
