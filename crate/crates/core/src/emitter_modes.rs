//! Emitter-centred bright modes: for each frequency, the combinations of the
//! medium-assisted field that couple to a dipole at the emitter position along
//! each of its orientations, made orthonormal by a symmetric (Loewdin) transform.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::planar::PlanarCavity;
use crate::quadrature::Tolerance;
use crate::spherical::SphericalCavity;
use crate::units::C;

const PASSIVITY_SLACK: f64 = 1e-9;
const RANK_TOLERANCE: f64 = 1e-12;
const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Anything that can report Im G(r0, r0, omega) at the emitter position.
pub trait CouplingSource: Sync {
    fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>>;
}

impl CouplingSource for SphericalCavity {
    fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>> {
        SphericalCavity::im_green_tensor(self, omega)
    }
}

impl CouplingSource for PlanarCavity {
    fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>> {
        let g = self.dgf_diagonal(omega, Tolerance::default())?;
        Ok(Matrix3::from_diagonal(&Vector3::new(
            g.xx.value, g.xx.value, g.zz.value,
        )))
    }
}

/// Homogeneous vacuum.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeSpace;

impl CouplingSource for FreeSpace {
    fn im_green_tensor(&self, omega: f64) -> Result<Matrix3<f64>> {
        Ok(Matrix3::identity() * omega / (6.0 * PI * C))
    }
}

/// Dipole orientations of the emitter; all sit at the same position.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterConfig {
    orientations: Vec<Vector3<f64>>,
}

impl EmitterConfig {
    pub fn new(orientations: Vec<Vector3<f64>>) -> Result<Self> {
        if orientations.is_empty() || orientations.len() > 3 {
            return Err(Error::Validation(format!(
                "need between 1 and 3 orientations (got {})",
                orientations.len()
            )));
        }
        if let Some(n) = orientations
            .iter()
            .find(|n| (n.norm() - 1.0).abs() > UNIT_NORM_TOLERANCE)
        {
            return Err(Error::Validation(format!(
                "orientation {n:?} is not a unit vector"
            )));
        }
        Ok(Self { orientations })
    }

    /// The x, y and z axes.
    pub fn cartesian() -> Self {
        Self {
            orientations: vec![Vector3::x(), Vector3::y(), Vector3::z()],
        }
    }

    pub fn orientations(&self) -> &[Vector3<f64>] {
        &self.orientations
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }
}

/// `G_j = sqrt((4 omega^2 / c^2) n.ImG.n)` for one orientation-projected Im G.
pub fn spectral_density(im_g: f64, omega: f64) -> Result<f64> {
    if im_g < -PASSIVITY_SLACK {
        return Err(Error::Passivity(format!(
            "projected Im G = {im_g:e} at omega = {omega} Ha"
        )));
    }
    Ok((4.0 * omega * omega / (C * C) * im_g.max(0.0)).sqrt())
}

/// Normalised overlap of the orientation-resolved modes from projected Im G.
///
/// Orientations without spectral weight are dark and get a unit diagonal.
pub fn overlap_matrix(projected: &DMatrix<f64>, omega: f64) -> Result<DMatrix<f64>> {
    let n = projected.nrows();
    if projected.ncols() != n {
        return Err(Error::Validation("projected Im G must be square".into()));
    }
    let densities = (0..n)
        .map(|i| spectral_density(projected[(i, i)], omega))
        .collect::<Result<Vec<_>>>()?;
    let scale = 4.0 * omega * omega / (C * C);
    let mut s = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let off = 0.5 * (projected[(i, j)] + projected[(j, i)]);
            if densities[i] == 0.0 || densities[j] == 0.0 {
                if off.abs() > PASSIVITY_SLACK {
                    return Err(Error::DegenerateBasis(if densities[i] == 0.0 {
                        i
                    } else {
                        j
                    }));
                }
                continue;
            }
            s[(i, j)] = scale * off / (densities[i] * densities[j]);
        }
    }
    Ok(s)
}

/// Symmetric Loewdin orthogonaliser `V = S^{-1/2}`, so that `V S V^T = I`.
pub fn orthogonalizer(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eigen = s.clone().symmetric_eigen();
    let min = eigen.eigenvalues.min();
    if min < RANK_TOLERANCE {
        return Err(Error::RankDeficient {
            min_eigenvalue: min,
        });
    }
    let inv_sqrt = eigen.eigenvalues.map(|e| e.sqrt().recip());
    let u = &eigen.eigenvectors;
    let v = u * DMatrix::from_diagonal(&inv_sqrt) * u.transpose();
    // symmetrise away rounding
    Ok((&v + v.transpose()) * 0.5)
}

/// Bright-mode data at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightModeBasis {
    pub omega: f64,
    pub densities: Vec<f64>,
    pub overlap: DMatrix<f64>,
    pub orthogonalizer: DMatrix<f64>,
    /// Coupling vector lambda_i(omega) of each orthonormal bright mode.
    pub couplings: Vec<Vector3<f64>>,
}

impl BrightModeBasis {
    pub fn at(source: &dyn CouplingSource, emitter: &EmitterConfig, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Validation(format!(
                "frequency must be positive (got {omega})"
            )));
        }
        Self::from_tensor(&source.im_green_tensor(omega)?, emitter, omega)
    }

    pub fn from_tensor(im_g: &Matrix3<f64>, emitter: &EmitterConfig, omega: f64) -> Result<Self> {
        let dirs = emitter.orientations();
        let n = dirs.len();
        let projected = DMatrix::from_fn(n, n, |i, j| dirs[i].dot(&(im_g * dirs[j])));
        let densities = (0..n)
            .map(|i| spectral_density(projected[(i, i)], omega))
            .collect::<Result<Vec<_>>>()?;
        let overlap = overlap_matrix(&projected, omega)?;
        let orthogonalizer = orthogonalizer(&overlap)?;

        let scale = 4.0 * omega * omega / (C * C);
        let fields: Vec<Vector3<f64>> = (0..n)
            .map(|j| {
                if densities[j] == 0.0 {
                    Vector3::zeros()
                } else {
                    im_g * dirs[j] * (scale / densities[j])
                }
            })
            .collect();
        let prefactor = (2.0 / omega).sqrt();
        let couplings = (0..n)
            .map(|i| {
                (0..n).fold(Vector3::zeros(), |acc, j| {
                    acc + fields[j] * orthogonalizer[(i, j)]
                }) * prefactor
            })
            .collect();
        Ok(Self {
            omega,
            densities,
            overlap,
            orthogonalizer,
            couplings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::DielectricModel;
    use crate::planar::MirrorModel;
    use crate::units;
    use proptest::prelude::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn spectral_density_limits() {
        let w = 0.25;
        assert_eq!(spectral_density(0.0, w).unwrap(), 0.0);
        let vac = w / (6.0 * PI * C);
        let g = spectral_density(vac, w).unwrap();
        assert!((spectral_density(4.0 * vac, w).unwrap() - 2.0 * g).abs() < 1e-15);
        assert!(spectral_density(-1e-12, w).unwrap() == 0.0);
        assert!(matches!(
            spectral_density(-1e-6, w),
            Err(Error::Passivity(_))
        ));
    }

    #[test]
    fn isotropic_overlap_is_identity() {
        let cavity = SphericalCavity::new(units::nm(140.0), DielectricModel::gold()).unwrap();
        let b = BrightModeBasis::at(&cavity, &EmitterConfig::cartesian(), units::ev(7.0)).unwrap();
        assert!(close(&b.overlap, &DMatrix::identity(3, 3), 0.0));
        assert!(close(&b.orthogonalizer, &DMatrix::identity(3, 3), 1e-14));
    }

    #[test]
    fn pipeline_reproduces_spherical_coupling() {
        let cavity = SphericalCavity::new(units::nm(14.0), DielectricModel::gold()).unwrap();
        for e in [5.0, 6.8, 7.5] {
            let w = units::ev(e);
            let b = BrightModeBasis::at(&cavity, &EmitterConfig::cartesian(), w).unwrap();
            let lambda = cavity.coupling_strength(w).unwrap();
            for (i, c) in b.couplings.iter().enumerate() {
                let mut expect = Vector3::zeros();
                expect[i] = lambda;
                assert!(
                    (c - expect).norm() <= 1e-12 * lambda,
                    "{e} eV, mode {i}: {c:?}"
                );
            }
        }
    }

    #[test]
    fn planar_overlap_is_identity() {
        let cavity = PlanarCavity::centered(MirrorModel::ideal(0.95).unwrap(), 500.0).unwrap();
        let b = BrightModeBasis::at(&cavity, &EmitterConfig::cartesian(), units::ev(3.0)).unwrap();
        assert!(close(&b.overlap, &DMatrix::identity(3, 3), 0.0));
        assert!(b.couplings[0][1] == 0.0 && b.couplings[2][0] == 0.0);
    }

    #[test]
    fn single_orientation() {
        let e = EmitterConfig::new(vec![Vector3::new(1.0, 1.0, 0.0).normalize()]).unwrap();
        let b = BrightModeBasis::at(&FreeSpace, &e, 0.3).unwrap();
        assert_eq!(b.overlap, DMatrix::identity(1, 1));
        assert!(EmitterConfig::new(vec![Vector3::new(1.0, 1.0, 0.0)]).is_err());
        assert!(EmitterConfig::new(vec![]).is_err());
    }

    #[test]
    fn two_by_two_loewdin() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let v = orthogonalizer(&s).unwrap();
        assert!(close(
            &(&v * &s * v.transpose()),
            &DMatrix::identity(2, 2),
            1e-12
        ));
        // eigenvalues 1.5 and 0.5 along (1, 1) and (1, -1)
        let a = 0.5 * (1.5f64.powf(-0.5) + 0.5f64.powf(-0.5));
        let b = 0.5 * (1.5f64.powf(-0.5) - 0.5f64.powf(-0.5));
        assert!(close(
            &v,
            &DMatrix::from_row_slice(2, 2, &[a, b, b, a]),
            1e-12
        ));
    }

    #[test]
    fn singular_overlap_is_rejected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            orthogonalizer(&s),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn dark_orientation_with_cross_terms_is_degenerate() {
        let p = DMatrix::from_row_slice(2, 2, &[1e-3, 1e-3, 1e-3, 0.0]);
        assert!(matches!(
            overlap_matrix(&p, 0.3),
            Err(Error::DegenerateBasis(1))
        ));
    }

    fn spd3() -> impl Strategy<Value = Matrix3<f64>> {
        proptest::collection::vec(-1.0f64..1.0, 9).prop_map(|v| {
            let a = Matrix3::from_row_slice(&v);
            a * a.transpose() + Matrix3::identity() * 0.05
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn loewdin_properties(m in spd3()) {
            let d = m.diagonal().map(|x| x.sqrt().recip());
            let s3 = Matrix3::from_diagonal(&d) * m * Matrix3::from_diagonal(&d);
            let s = DMatrix::from_iterator(3, 3, s3.iter().copied());
            let v = orthogonalizer(&s).unwrap();
            prop_assert!(close(&(&v * &s * v.transpose()), &DMatrix::identity(3, 3), 1e-10));
            prop_assert!(close(&v, &v.transpose(), 1e-12));
            prop_assert!(close(&(&v * &s), &(&s * &v), 1e-10));
        }

        #[test]
        fn couplings_resolve_im_g(m in spd3(), w in 0.05f64..0.5) {
            let im_g = m * 1e-4;
            let b = BrightModeBasis::from_tensor(&im_g, &EmitterConfig::cartesian(), w).unwrap();
            let sum = b.couplings.iter().fold(Matrix3::zeros(), |acc, c| acc + c * c.transpose());
            let expect = im_g * (8.0 * w / (C * C));
            prop_assert!((sum - expect).amax() <= 1e-10 * expect.amax());
        }
    }
}
