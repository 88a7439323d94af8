//! Fabry-Perot cavity: two planar mirrors around a homogeneous cavity layer.
//!
//! The Green's function at the emitter is written as an angular-spectrum
//! integral over the in-plane wavenumber `q`. At coincident points it is
//! diagonal, with one horizontal (`xx = yy`) and one vertical (`zz`) element.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorClass, Result};
use crate::materials::{passive_sqrt, DielectricModel};
use crate::quadrature::{self, Estimate, Tolerance};
use crate::units::{self, C};

/// Largest intensity reflectivity accepted for an ideal mirror; unit reflectivity has real poles.
pub const MAX_IDEAL_REFLECTIVITY: f64 = 1.0 - 1e-6;
const POLE_TOLERANCE: f64 = 1e-14;
/// Evanescent integrand envelope below which the tail is dropped.
const EVANESCENT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Te,
    Tm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MirrorModel {
    Material(DielectricModel),
    /// Frequency- and angle-independent intensity reflectivity with the phase of a
    /// perfect conductor: r_TE = -sqrt(R), r_TM = +sqrt(R).
    IdealConstant(f64),
}

impl MirrorModel {
    pub fn ideal(reflectivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(Error::Validation(format!(
                "mirror reflectivity must lie in [0, 1] (got {reflectivity})"
            )));
        }
        Ok(Self::IdealConstant(
            reflectivity.min(MAX_IDEAL_REFLECTIVITY),
        ))
    }

    /// A mirror that reflects nothing.
    pub fn absent() -> Self {
        Self::IdealConstant(0.0)
    }
}

/// Mirror response frozen at one frequency.
#[derive(Debug, Clone, Copy)]
enum Interface {
    Material(Complex64),
    Ideal(f64),
}

/// Fresnel amplitude coefficient for light incident from medium `a` onto medium `b`.
pub fn fresnel(
    polarization: Polarization,
    medium_a: &DielectricModel,
    medium_b: &DielectricModel,
    omega: f64,
    q: f64,
) -> Result<Complex64> {
    if !(q >= 0.0) {
        return Err(Error::Validation(format!(
            "in-plane wavenumber must be non-negative (got {q})"
        )));
    }
    let eps_a = medium_a.permittivity(omega)?;
    let eps_b = medium_b.permittivity(omega)?;
    let k0 = omega / C;
    let kz_a = passive_sqrt(eps_a * k0 * k0 - q * q);
    Ok(fresnel_kz(polarization, eps_a, kz_a, eps_b, k0, q))
}

fn fresnel_kz(
    polarization: Polarization,
    eps_a: Complex64,
    kz_a: Complex64,
    eps_b: Complex64,
    k0: f64,
    q: f64,
) -> Complex64 {
    let kz_b = passive_sqrt(eps_b * k0 * k0 - q * q);
    let (num, den) = match polarization {
        Polarization::Te => (kz_a - kz_b, kz_a + kz_b),
        Polarization::Tm => (eps_b * kz_a - eps_a * kz_b, eps_b * kz_a + eps_a * kz_b),
    };
    if den.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        num / den
    }
}

/// The three reflection functions at one (omega, q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFunctions {
    pub perp_tm: Complex64,
    pub par_te: Complex64,
    pub par_tm: Complex64,
}

/// Im of the diagonal Green's function elements at the emitter, with quadrature error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenDiagonal {
    pub xx: Estimate,
    pub zz: Estimate,
}

/// Purcell factors for both orientations with their quadrature error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPurcell {
    pub horizontal: f64,
    pub vertical: f64,
    pub horizontal_error: f64,
    pub vertical_error: f64,
}

impl PlanarPurcell {
    pub fn get(&self, orientation: Orientation) -> f64 {
        match orientation {
            Orientation::Horizontal => self.horizontal,
            Orientation::Vertical => self.vertical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCavity {
    cavity_medium: DielectricModel,
    top_mirror: MirrorModel,
    bottom_mirror: MirrorModel,
    t: f64,
    b: f64,
}

impl PlanarCavity {
    /// Emitter at distance `t` (bohr) below the top mirror and `b` above the bottom mirror.
    pub fn new(
        top_mirror: MirrorModel,
        bottom_mirror: MirrorModel,
        t: f64,
        b: f64,
    ) -> Result<Self> {
        Self::with_medium(DielectricModel::Vacuum, top_mirror, bottom_mirror, t, b)
    }

    pub fn with_medium(
        cavity_medium: DielectricModel,
        top_mirror: MirrorModel,
        bottom_mirror: MirrorModel,
        t: f64,
        b: f64,
    ) -> Result<Self> {
        if !(t > 0.0 && b > 0.0) {
            return Err(Error::Validation(format!(
                "mirror distances must be positive (got t = {t}, b = {b})"
            )));
        }
        for mirror in [&top_mirror, &bottom_mirror] {
            if let MirrorModel::IdealConstant(r) = mirror {
                if !(0.0..=1.0).contains(r) {
                    return Err(Error::Validation(format!(
                        "mirror reflectivity must lie in [0, 1] (got {r})"
                    )));
                }
            }
        }
        Ok(Self {
            cavity_medium,
            top_mirror,
            bottom_mirror,
            t,
            b,
        })
    }

    /// Symmetric cavity of spacing `d` with the emitter in the middle.
    pub fn centered(mirror: MirrorModel, d: f64) -> Result<Self> {
        Self::new(mirror.clone(), mirror, 0.5 * d, 0.5 * d)
    }

    pub fn spacing(&self) -> f64 {
        self.t + self.b
    }

    pub fn distances(&self) -> (f64, f64) {
        (self.t, self.b)
    }

    /// The same cavity viewed upside down.
    pub fn flipped(&self) -> Self {
        Self {
            cavity_medium: self.cavity_medium.clone(),
            top_mirror: self.bottom_mirror.clone(),
            bottom_mirror: self.top_mirror.clone(),
            t: self.b,
            b: self.t,
        }
    }

    fn cavity_permittivity(&self, omega: f64) -> Result<f64> {
        let eps = self.cavity_medium.permittivity(omega)?;
        if eps.im != 0.0 || !(eps.re > 0.0) {
            return Err(Error::Validation(format!(
                "cavity medium must be lossless with positive permittivity (got {eps} at {omega} Ha)"
            )));
        }
        Ok(eps.re)
    }

    fn interface(&self, mirror: &MirrorModel, omega: f64) -> Result<Interface> {
        Ok(match mirror {
            MirrorModel::Material(m) => Interface::Material(m.permittivity(omega)?),
            MirrorModel::IdealConstant(r) => Interface::Ideal(r.min(MAX_IDEAL_REFLECTIVITY).sqrt()),
        })
    }

    /// Reflection functions at in-plane wavenumber `q`.
    pub fn reflection_functions(&self, omega: f64, q: f64) -> Result<ReflectionFunctions> {
        if !(omega > 0.0) || !(q >= 0.0) {
            return Err(Error::Validation(format!(
                "need omega > 0 and q >= 0 (got {omega}, {q})"
            )));
        }
        let frozen = Frozen::new(self, omega)?;
        let kz = passive_sqrt(Complex64::from(frozen.k * frozen.k - q * q));
        frozen.reflection(q, kz)
    }

    /// Im G_xx and Im G_zz at the emitter.
    pub fn dgf_diagonal(&self, omega: f64, tol: Tolerance) -> Result<GreenDiagonal> {
        let frozen = Frozen::new(self, omega)?;
        let k = frozen.k;
        let vacuum = k / (6.0 * PI);
        let tol = Tolerance {
            absolute: tol.absolute.max(0.1 * tol.relative * vacuum),
            ..tol
        };

        // propagating sector, q = k sin(theta)
        let prop = |theta: f64| -> Result<(Complex64, ReflectionFunctions)> {
            let (sin, cos) = theta.sin_cos();
            let kz = Complex64::new(k * cos, 0.0);
            Ok((Complex64::new(sin, 0.0), frozen.reflection(k * sin, kz)?))
        };
        let xx_prop = quadrature::integrate(
            |theta| {
                let (sin, r) = prop(theta)?;
                let cos2 = 1.0 - sin.re * sin.re;
                Ok(k * sin.re * (r.par_te.re + cos2 * r.par_tm.re) / (8.0 * PI))
            },
            0.0,
            FRAC_PI_2,
            tol,
        )?;
        let zz_prop = quadrature::integrate(
            |theta| {
                let (sin, r) = prop(theta)?;
                Ok(2.0 * k * sin.re.powi(3) * r.perp_tm.re / (8.0 * PI))
            },
            0.0,
            FRAC_PI_2,
            tol,
        )?;

        // evanescent sector, q = k cosh(u), k_z = i k sinh(u)
        let (xx_ev, zz_ev) = if frozen.has_evanescent_response() {
            let u_max = frozen.evanescent_cutoff();
            let ev = |u: f64| -> Result<(f64, f64, ReflectionFunctions)> {
                let (sinh, cosh) = (u.sinh(), u.cosh());
                let kz = Complex64::new(0.0, k * sinh);
                Ok((sinh, cosh, frozen.reflection(k * cosh, kz)?))
            };
            let xx = quadrature::integrate(
                |u| {
                    let (sinh, cosh, r) = ev(u)?;
                    Ok(k * cosh * (r.par_te.im - sinh * sinh * r.par_tm.im) / (8.0 * PI))
                },
                0.0,
                u_max,
                tol,
            )?;
            let zz = quadrature::integrate(
                |u| {
                    let (_, cosh, r) = ev(u)?;
                    Ok(2.0 * k * cosh.powi(3) * r.perp_tm.im / (8.0 * PI))
                },
                0.0,
                u_max,
                tol,
            )?;
            (xx, zz)
        } else {
            let zero = Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            };
            (zero, zero)
        };

        Ok(GreenDiagonal {
            xx: xx_prop + xx_ev,
            zz: zz_prop + zz_ev,
        })
    }

    /// Im G tensor at the emitter; off-diagonal elements vanish identically.
    pub fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>> {
        let g = self.dgf_diagonal(omega, Tolerance::default())?;
        Ok(Matrix3::from_diagonal(&nalgebra::Vector3::new(
            g.xx.value, g.xx.value, g.zz.value,
        )))
    }

    /// Purcell factors for both orientations.
    pub fn purcell(&self, omega: f64, tol: Tolerance) -> Result<PlanarPurcell> {
        let vacuum = self.cavity_permittivity(omega)?.sqrt() * omega / C / (6.0 * PI);
        let g = self.dgf_diagonal(omega, tol)?;
        Ok(PlanarPurcell {
            horizontal: g.xx.value / vacuum,
            vertical: g.zz.value / vacuum,
            horizontal_error: g.xx.error / vacuum,
            vertical_error: g.zz.error / vacuum,
        })
    }

    pub fn purcell_planar(&self, omega: f64, orientation: Orientation) -> Result<f64> {
        Ok(self.purcell(omega, Tolerance::default())?.get(orientation))
    }
}

/// Cavity quantities that do not depend on q, evaluated once per frequency.
struct Frozen {
    k: f64,
    k0: f64,
    eps_c: f64,
    top: Interface,
    bottom: Interface,
    t: f64,
    b: f64,
}

impl Frozen {
    fn new(cavity: &PlanarCavity, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Validation(format!(
                "frequency must be positive (got {omega})"
            )));
        }
        let eps_c = cavity.cavity_permittivity(omega)?;
        let k0 = omega / C;
        Ok(Self {
            k: eps_c.sqrt() * k0,
            k0,
            eps_c,
            top: cavity.interface(&cavity.top_mirror, omega)?,
            bottom: cavity.interface(&cavity.bottom_mirror, omega)?,
            t: cavity.t,
            b: cavity.b,
        })
    }

    fn coefficient(
        &self,
        side: Interface,
        polarization: Polarization,
        q: f64,
        kz: Complex64,
    ) -> Complex64 {
        match side {
            Interface::Ideal(amplitude) => match polarization {
                Polarization::Te => Complex64::new(-amplitude, 0.0),
                Polarization::Tm => Complex64::new(amplitude, 0.0),
            },
            Interface::Material(eps_m) => fresnel_kz(
                polarization,
                Complex64::from(self.eps_c),
                kz,
                eps_m,
                self.k0,
                q,
            ),
        }
    }

    fn reflection(&self, q: f64, kz: Complex64) -> Result<ReflectionFunctions> {
        let i = Complex64::i();
        let phase_b = (2.0 * i * kz * self.b).exp();
        let phase_t = (2.0 * i * kz * self.t).exp();
        let phase_d = phase_b * phase_t;
        let functions = |pol: Polarization, sign: f64| -> Result<Complex64> {
            let rb = self.coefficient(self.bottom, pol, q, kz);
            let rt = self.coefficient(self.top, pol, q, kz);
            let den = 1.0 - rb * rt * phase_d;
            if den.norm() < POLE_TOLERANCE {
                return Err(Error::Pole(den.norm()));
            }
            Ok((1.0 + sign * rb * phase_b) * (1.0 + sign * rt * phase_t) / den)
        };
        Ok(ReflectionFunctions {
            perp_tm: functions(Polarization::Tm, 1.0)?,
            par_te: functions(Polarization::Te, 1.0)?,
            par_tm: functions(Polarization::Tm, -1.0)?,
        })
    }

    /// Ideal and absent mirrors give real reflection functions for evanescent waves.
    fn has_evanescent_response(&self) -> bool {
        matches!(self.top, Interface::Material(_)) || matches!(self.bottom, Interface::Material(_))
    }

    /// Upper limit of u where e^{-2 k sinh(u) m} cosh^3(u) drops below the cutoff.
    fn evanescent_cutoff(&self) -> f64 {
        let m = self.t.min(self.b);
        let envelope = |u: f64| (-2.0 * self.k * u.sinh() * m).exp() * u.cosh().powi(3);
        let mut u = (EVANESCENT_CUTOFF.ln().abs() / (2.0 * self.k * m)).asinh();
        while envelope(u) > EVANESCENT_CUTOFF {
            u += 0.25;
        }
        u
    }
}

/// One point of a mirror-spacing sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub d_over_lambda: f64,
    pub purcell: PlanarPurcell,
}

/// Purcell factors of a symmetric cavity with the emitter at its centre, for each `d / lambda0`.
pub fn sweep_spacing(
    mirror: &MirrorModel,
    omega: f64,
    d_over_lambda: &[f64],
    tol: Tolerance,
) -> Result<Vec<SweepPoint>> {
    let lambda0 = units::vacuum_wavelength(omega);
    d_over_lambda
        .par_iter()
        .map(|&x| {
            let cavity = PlanarCavity::centered(mirror.clone(), x * lambda0)?;
            let purcell = cavity.purcell(omega, tol).map_err(|e| match e.class() {
                ErrorClass::Numerical => Error::Numerical(format!("at d/lambda0 = {x}: {e}")),
                _ => e,
            })?;
            Ok(SweepPoint {
                d_over_lambda: x,
                purcell,
            })
        })
        .collect()
}
