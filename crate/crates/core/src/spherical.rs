//! Three-layer spherical microcavity with the emitter at its centre.
//!
//! At the centre only the lowest-order (n = 1) channel of the reflected Green's
//! function survives, so the field there is isotropic and fully described by the
//! scalar reflection coefficient `r_1(omega)`. The shell is treated as infinitely
//! thick, so the outer medium does not enter any formula.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::materials::DielectricModel;
use crate::quadrature::{self, Tolerance};
use crate::units::{self, C};

/// Below this |n - 1| the shell is treated as vacuum and the reflection vanishes.
const VACUUM_INDEX_TOLERANCE: f64 = 1e-9;
/// Largest tolerated negative value of `1 + Re r` before it counts as a passivity violation.
const PASSIVITY_SLACK: f64 = 1e-9;

/// Uniform sampling density of a frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingDensity(f64);

impl SamplingDensity {
    pub fn per_hartree(points: f64) -> Result<Self> {
        if !(points > 0.0) || !points.is_finite() {
            return Err(Error::Validation(format!(
                "sampling density must be positive (got {points})"
            )));
        }
        Ok(Self(points))
    }

    pub fn per_mev(points: f64) -> Result<Self> {
        Self::per_hartree(points * 1e3 * units::HARTREE_EV)
    }

    pub fn points_per_hartree(self) -> f64 {
        self.0
    }

    pub fn points_per_mev(self) -> f64 {
        self.0 / (1e3 * units::HARTREE_EV)
    }

    /// Grid spacing in Hartree.
    pub fn spacing(self) -> f64 {
        1.0 / self.0
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self(self.0 * factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCavity {
    inner_radius: f64,
    inner_medium: DielectricModel,
    shell_medium: DielectricModel,
    outer_medium: DielectricModel,
}

impl SphericalCavity {
    /// Vacuum core of radius `inner_radius` (bohr) inside a thick `shell`.
    pub fn new(inner_radius: f64, shell: DielectricModel) -> Result<Self> {
        Self::with_media(
            inner_radius,
            DielectricModel::Vacuum,
            shell,
            DielectricModel::Vacuum,
        )
    }

    pub fn with_media(
        inner_radius: f64,
        inner_medium: DielectricModel,
        shell_medium: DielectricModel,
        outer_medium: DielectricModel,
    ) -> Result<Self> {
        if !(inner_radius > 0.0) {
            return Err(Error::Validation(format!(
                "cavity radius must be positive (got {inner_radius})"
            )));
        }
        if !inner_medium.is_vacuum() {
            return Err(Error::Validation(
                "centre-of-cavity formulas require a vacuum core".into(),
            ));
        }
        Ok(Self {
            inner_radius,
            inner_medium,
            shell_medium,
            outer_medium,
        })
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn shell(&self) -> &DielectricModel {
        &self.shell_medium
    }

    pub fn outer(&self) -> &DielectricModel {
        &self.outer_medium
    }

    pub fn with_radius(&self, inner_radius: f64) -> Result<Self> {
        Self::with_media(
            inner_radius,
            self.inner_medium.clone(),
            self.shell_medium.clone(),
            self.outer_medium.clone(),
        )
    }

    /// Reflection coefficient of the lowest-order channel, thick-shell closed form.
    pub fn reflection_coefficient_n1(&self, omega: f64) -> Result<Complex64> {
        let n = self.shell_medium.refractive_index(omega)?;
        if (n - 1.0).norm() < VACUUM_INDEX_TOLERANCE {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let i = Complex64::i();
        let rho = self.inner_radius * omega / C;
        let (sin, cos) = rho.sin_cos();
        let n2 = n * n;
        let numerator = (i + rho * (n + 1.0) - i * rho * rho * n - rho.powi(3) * n2 / (n + 1.0))
            * Complex64::from_polar(1.0, rho);
        let denominator = sin - rho * (cos + i * n * sin) + i * rho * rho * n * cos
            - rho.powi(3) * (cos - i * n * sin) * n2 / (n2 - 1.0);
        let r = numerator / denominator;
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::Numerical(format!(
                "reflection coefficient not finite at omega = {omega} Ha (rho = {rho}, n = {n})"
            )));
        }
        Ok(r)
    }

    /// `1 + Re r_1`, the ratio of the centre LDOS to its free-space value.
    pub fn purcell_center(&self, omega: f64) -> Result<f64> {
        Ok(1.0 + self.reflection_coefficient_n1(omega)?.re)
    }

    /// Diagonal element of Im G(0, 0, omega).
    pub fn im_dgf_center(&self, omega: f64) -> Result<f64> {
        Ok(omega / (6.0 * PI * C) * self.purcell_center(omega)?)
    }

    /// Full Im G tensor at the centre (isotropic).
    pub fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>> {
        Ok(Matrix3::identity() * self.im_dgf_center(omega)?)
    }

    /// Per-orientation coupling strength lambda(omega) in atomic units.
    pub fn coupling_strength(&self, omega: f64) -> Result<f64> {
        let purcell = self.purcell_center(omega)?;
        if purcell < -PASSIVITY_SLACK {
            return Err(Error::Passivity(format!(
                "1 + Re r = {purcell:e} at omega = {omega} Ha"
            )));
        }
        Ok(vacuum_coupling_strength(omega) * purcell.max(0.0).sqrt())
    }

    /// Purcell factor sampled on a uniform grid spanning `window` (both ends included).
    pub fn scan(&self, window: (f64, f64), density: SamplingDensity) -> Result<ModeScan> {
        let (lo, hi) = window;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Validation(format!(
                "scan window must satisfy 0 < min < max (got {lo}, {hi})"
            )));
        }
        let intervals = ((hi - lo) * density.points_per_hartree()).ceil().max(2.0) as usize;
        let step = (hi - lo) / intervals as f64;
        let omega: Vec<f64> = (0..=intervals).map(|k| lo + k as f64 * step).collect();
        let purcell = omega
            .par_iter()
            .map(|&w| self.purcell_center(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeScan { omega, purcell })
    }

    /// Resonances of the centre LDOS inside `window`.
    pub fn find_resonances(
        &self,
        window: (f64, f64),
        density: SamplingDensity,
    ) -> Result<Vec<ResonancePeak>> {
        let scan = self.scan(window, density)?;
        scan.local_peaks()
            .into_iter()
            .map(|k| self.characterise_peak(&scan, k))
            .collect()
    }

    fn characterise_peak(&self, scan: &ModeScan, k: usize) -> Result<ResonancePeak> {
        let w = &scan.omega;
        let p = &scan.purcell;
        let step = w[1] - w[0];

        // parabolic estimate, then polish on the closed form
        let curvature = p[k - 1] - 2.0 * p[k] + p[k + 1];
        let offset = if curvature < 0.0 {
            (0.5 * (p[k - 1] - p[k + 1]) / curvature).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let guess = w[k] + offset * step;
        let (center, height) = golden_max(
            |x| self.purcell_center(x),
            (guess - step).max(w[k - 1]),
            (guess + step).min(w[k + 1]),
        )?;
        let half = 0.5 * height;

        let mut left = k;
        while left > 0 && p[left] > half {
            left -= 1;
        }
        let left_edge = if p[left] <= half {
            bisect_level(
                |x| self.purcell_center(x),
                w[left],
                w[left + 1].min(center),
                half,
            )?
        } else {
            w[0]
        };
        let mut right = k;
        while right + 1 < w.len() && p[right] > half {
            right += 1;
        }
        let right_edge = if p[right] <= half {
            bisect_level(
                |x| self.purcell_center(x),
                w[right],
                w[right - 1].max(center),
                half,
            )?
        } else {
            w[w.len() - 1]
        };
        let fwhm = right_edge - left_edge;
        if !(fwhm > 0.0) {
            return Err(Error::Numerical(format!(
                "peak at {center} Ha has non-positive width"
            )));
        }
        let support = ((left_edge - fwhm).max(0.5 * left_edge), right_edge + fwhm);
        let weight = quadrature::integrate(
            |x| Ok(3.0 * self.coupling_strength(x)?.powi(2)),
            support.0,
            support.1,
            Tolerance::relative(1e-9),
        )?;
        Ok(ResonancePeak {
            center,
            fwhm,
            peak_purcell: height,
            integrated_weight: weight.value,
            support,
        })
    }

    /// Centre of the resonance nearest to `target` within `target +- span`.
    pub fn nearest_resonance(
        &self,
        target: f64,
        span: f64,
        density: SamplingDensity,
    ) -> Result<Option<ResonancePeak>> {
        let window = ((target - span).max(0.05 * target), target + span);
        let peaks = self.find_resonances(window, density)?;
        Ok(peaks.into_iter().min_by(|a, b| {
            (a.center - target)
                .abs()
                .total_cmp(&(b.center - target).abs())
        }))
    }
}

/// lambda(omega) of the bare vacuum: (2 omega / c) sqrt(1 / (3 pi c)).
pub fn vacuum_coupling_strength(omega: f64) -> f64 {
    2.0 * omega / C * (1.0 / (3.0 * PI * C)).sqrt()
}

/// Purcell factor sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeScan {
    pub omega: Vec<f64>,
    pub purcell: Vec<f64>,
}

impl ModeScan {
    /// Indices of interior local maxima whose prominence is at least twice the scan median.
    pub fn local_peaks(&self) -> Vec<usize> {
        let p = &self.purcell;
        if p.len() < 3 {
            return Vec::new();
        }
        let threshold = 2.0 * median(p);
        (1..p.len() - 1)
            .filter(|&k| p[k] > p[k - 1] && p[k] >= p[k + 1])
            .filter(|&k| prominence(p, k) >= threshold)
            .collect()
    }

    /// `omega (eV), purcell, lambda (a.u.)` rows.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.omega
            .iter()
            .zip(&self.purcell)
            .map(|(&w, &p)| {
                [
                    units::to_ev(w),
                    p,
                    vacuum_coupling_strength(w) * p.max(0.0).sqrt(),
                ]
            })
            .collect()
    }
}

/// A resonance of the centre LDOS. Frequencies in Hartree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePeak {
    pub center: f64,
    pub fwhm: f64,
    pub peak_purcell: f64,
    /// Integral of |lambda|^2 summed over the three orientations across `support`.
    pub integrated_weight: f64,
    /// FWHM interval extended by one FWHM on either side.
    pub support: (f64, f64),
}

/// Options for [`tune_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOptions {
    /// Half-width of the frequency window searched around the target (Ha).
    pub span: f64,
    pub density: SamplingDensity,
    /// Number of coarse radius steps used to isolate a crossing.
    pub coarse_steps: usize,
    /// Required agreement between peak centre and target (Ha).
    pub tolerance: f64,
}

impl Default for TuneOptions {
    fn default() -> Self {
        Self {
            span: units::ev(0.5),
            density: SamplingDensity::per_mev(10.0).expect("positive"),
            coarse_steps: 40,
            tolerance: units::ev(1e-3),
        }
    }
}

/// Radius whose resonance nearest to `target` sits exactly on `target`.
pub fn tune_radius(
    shell: &DielectricModel,
    target: f64,
    bracket: (f64, f64),
    options: TuneOptions,
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Validation(format!(
            "radius bracket must satisfy 0 < lo < hi (got {lo}, {hi})"
        )));
    }
    let offset = |radius: f64| -> Result<Option<f64>> {
        let cavity = SphericalCavity::new(radius, shell.clone())?;
        Ok(cavity
            .nearest_resonance(target, options.span, options.density)?
            .map(|p| p.center - target))
    };

    let steps = options.coarse_steps.max(1);
    let radii: Vec<f64> = (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .collect();
    let offsets = radii
        .par_iter()
        .map(|&r| offset(r))
        .collect::<Result<Vec<_>>>()?;

    for k in 0..steps {
        let (Some(f_lo), Some(f_hi)) = (offsets[k], offsets[k + 1]) else {
            continue;
        };
        if f_lo == 0.0 {
            return Ok(radii[k]);
        }
        if f_lo.signum() == f_hi.signum() {
            continue;
        }
        let (mut a, mut b, mut fa) = (radii[k], radii[k + 1], f_lo);
        let mut best = (a, f_lo.abs());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let Some(fm) = offset(mid)? else { break };
            if fm.abs() < best.1 {
                best = (mid, fm.abs());
            }
            if fm.abs() < 1e-3 * options.tolerance || (b - a) < 1e-12 * mid {
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        if best.1 <= options.tolerance {
            return Ok(best.0);
        }
        // the sign change was a jump between two modes; keep looking
    }

    let describe = |o: Option<f64>| match o {
        Some(d) => format!("{:.4} eV", units::to_ev(target + d)),
        None => "none".to_string(),
    };
    Err(Error::Bracketing(format!(
        "target {:.4} eV; nearest peak at R = {:.3} nm: {}; at R = {:.3} nm: {}",
        units::to_ev(target),
        units::to_nm(lo),
        describe(offsets[0]),
        units::to_nm(hi),
        describe(offsets[steps]),
    )))
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Topographic prominence of sample `k`.
pub(crate) fn prominence(values: &[f64], k: usize) -> f64 {
    let height = values[k];
    let mut left_min = height;
    for &v in values[..k].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &values[k + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

fn golden_max<F>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if (b - a) <= 1e-14 * b.abs() {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Point between `below` (f <= level) and `above` (f > level) where f crosses `level`.
fn bisect_level<F>(f: F, mut below: f64, mut above: f64, level: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..80 {
        let mid = 0.5 * (below + above);
        if f(mid)? > level {
            above = mid;
        } else {
            below = mid;
        }
        if (above - below).abs() <= 1e-14 * mid.abs() {
            break;
        }
    }
    Ok(0.5 * (below + above))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(radius_nm: f64) -> SphericalCavity {
        SphericalCavity::new(units::nm(radius_nm), DielectricModel::gold()).unwrap()
    }

    #[test]
    fn vacuum_shell_is_reflectionless() {
        let cavity = SphericalCavity::new(units::nm(50.0), DielectricModel::Vacuum).unwrap();
        for e in [1.0, 4.0, 12.0] {
            let w = units::ev(e);
            assert_eq!(
                cavity.reflection_coefficient_n1(w).unwrap(),
                Complex64::new(0.0, 0.0)
            );
            assert_eq!(cavity.purcell_center(w).unwrap(), 1.0);
            assert_eq!(cavity.im_dgf_center(w).unwrap(), w / (6.0 * PI * C));
            let expect = (2.0 * w / C) * (1.0 / (3.0 * PI * C)).sqrt();
            assert!((cavity.coupling_strength(w).unwrap() - expect).abs() < 1e-15 * expect);
        }
    }

    #[test]
    fn rejects_invalid_geometry() {
        assert!(SphericalCavity::new(0.0, DielectricModel::gold()).is_err());
        assert!(SphericalCavity::with_media(
            1.0,
            DielectricModel::Constant(2.0),
            DielectricModel::gold(),
            DielectricModel::Vacuum
        )
        .is_err());
    }

    /// Lowest positive root of tan(rho) = rho / (1 - rho^2), by bisection.
    fn perfect_mirror_root() -> f64 {
        let g = |x: f64| x * x.cos() - (1.0 - x * x) * x.sin();
        let (mut a, mut b) = (2.0, 3.0);
        assert!(g(a) * g(b) < 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a) * g(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn perfect_mirror_limit() {
        let root = perfect_mirror_root();
        assert!((root - 2.744).abs() < 1e-3);
        let mirror = DielectricModel::Constant(1e8);
        let radius = units::nm(100.0);
        let cavity = SphericalCavity::new(radius, mirror).unwrap();
        let omega_at = |rho: f64| rho * C / radius;
        // off resonance the centre LDOS is suppressed
        for rho in [1.0, 2.0, 3.5, 4.0] {
            let p = cavity.purcell_center(omega_at(rho)).unwrap();
            assert!((0.0..0.01).contains(&p), "rho {rho}: {p}");
        }
        // |r| blows up at the resonance
        let near = cavity
            .reflection_coefficient_n1(omega_at(root))
            .unwrap()
            .norm();
        let off = cavity
            .reflection_coefficient_n1(omega_at(2.0))
            .unwrap()
            .norm();
        assert!(near > 1e3 * off, "{near} vs {off}");
    }

    #[test]
    fn coupling_squared_tracks_purcell() {
        let cavity = gold(140.0);
        for e in [5.0, 6.5, 7.11, 8.0, 10.0] {
            let w = units::ev(e);
            let ratio =
                (cavity.coupling_strength(w).unwrap() / vacuum_coupling_strength(w)).powi(2);
            let p = cavity.purcell_center(w).unwrap();
            assert!((ratio - p).abs() <= 1e-12 * p, "{e}: {ratio} vs {p}");
        }
    }

    #[test]
    fn passive_shells_stay_nonnegative() {
        for fraction in [1.0, 0.25, 0.05] {
            let cavity = SphericalCavity::new(
                units::nm(140.0),
                DielectricModel::gold_with_damping_fraction(fraction),
            )
            .unwrap();
            let scan = cavity
                .scan(
                    (units::ev(1.0), units::ev(12.0)),
                    SamplingDensity::per_mev(1.0).unwrap(),
                )
                .unwrap();
            assert!(scan.purcell.iter().all(|&p| p >= -PASSIVITY_SLACK));
        }
    }

    #[test]
    fn continuity_under_refinement() {
        let cavity = gold(140.0);
        let coarse = cavity
            .scan(
                (units::ev(6.9), units::ev(7.3)),
                SamplingDensity::per_mev(1.0).unwrap(),
            )
            .unwrap();
        let fine = cavity
            .scan(
                (units::ev(6.9), units::ev(7.3)),
                SamplingDensity::per_mev(4.0).unwrap(),
            )
            .unwrap();
        // fine grid nests the coarse one; its largest jump is smaller than the coarse one's
        let max_jump = |s: &ModeScan| {
            s.purcell
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max)
        };
        assert!(max_jump(&fine) < max_jump(&coarse));
        for (k, &w) in coarse.omega.iter().enumerate() {
            let j = 4 * k;
            assert!((fine.omega[j] - w).abs() < 1e-12);
            assert!(
                (fine.purcell[j] - coarse.purcell[k]).abs()
                    < 1e-9 * coarse.purcell[k].abs().max(1.0)
            );
        }
    }

    #[test]
    fn resonance_near_7_1_ev() {
        let peaks = gold(140.0)
            .find_resonances(
                (units::ev(5.0), units::ev(9.0)),
                SamplingDensity::per_mev(10.0).unwrap(),
            )
            .unwrap();
        let peak = peaks
            .iter()
            .min_by(|a, b| {
                (a.center - units::ev(7.1))
                    .abs()
                    .total_cmp(&(b.center - units::ev(7.1)).abs())
            })
            .expect("a resonance");
        assert!((units::to_ev(peak.center) - 7.1).abs() < 0.2);
        assert!(peak.fwhm > 0.0 && peak.integrated_weight > 0.0);
        assert!(peak.support.0 < peak.center && peak.center < peak.support.1);
    }

    #[test]
    fn continuum_above_plasma_frequency() {
        let peaks = gold(140.0)
            .find_resonances(
                (units::ev(9.0), units::ev(12.0)),
                SamplingDensity::per_mev(10.0).unwrap(),
            )
            .unwrap();
        assert!(peaks.is_empty(), "{peaks:?}");
    }

    #[test]
    fn vacuum_shell_cannot_be_tuned() {
        let r = tune_radius(
            &DielectricModel::Vacuum,
            units::ev(6.808),
            (units::nm(10.0), units::nm(20.0)),
            TuneOptions::default(),
        );
        assert!(matches!(r, Err(Error::Bracketing(_))));
    }

    #[test]
    fn tuning_in_an_optical_bracket_is_self_consistent() {
        let target = units::ev(6.808);
        let shell = DielectricModel::gold();
        let radius = tune_radius(
            &shell,
            target,
            (units::nm(100.0), units::nm(200.0)),
            TuneOptions::default(),
        )
        .unwrap();
        let cavity = SphericalCavity::new(radius, shell).unwrap();
        let peak = cavity
            .nearest_resonance(
                target,
                units::ev(0.5),
                SamplingDensity::per_mev(10.0).unwrap(),
            )
            .unwrap()
            .unwrap();
        assert!((peak.center - target).abs() <= units::ev(1e-3));
    }

    #[test]
    fn prominence_of_simple_profiles() {
        let v = [0.0, 1.0, 0.5, 3.0, 0.2];
        assert!((prominence(&v, 3) - 2.8).abs() < 1e-15);
        assert_eq!(prominence(&v, 1), 0.5);
    }
}
