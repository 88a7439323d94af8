//! Independent reference solutions for small systems.
//!
//! * Bogoliubov diagonalisation of the bosonised Hamiltonian in the ladder-operator
//!   representation (Colpa's Cholesky method), using its own Cholesky and Jacobi routines.
//! * The closed-form 2 x 2 single-transition, single-mode result.
//! * Exact diagonalisation of two-level emitters coupled to truncated Fock spaces.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const MAX_BOGOLIUBOV_DIMENSION: usize = 500;
pub const DEFAULT_FOCK_CAPACITY: usize = 5_000;

/// Harmonic matter modes coupled to photon modes through `g[a][s] = lambda_a . d_s`,
/// with the dipole self-energy always included.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBosonProblem {
    pub matter: Vec<f64>,
    pub photons: Vec<f64>,
    /// `couplings[a][s]`.
    pub couplings: Vec<Vec<f64>>,
}

impl QuadraticBosonProblem {
    pub fn new(matter: Vec<f64>, photons: Vec<f64>, couplings: Vec<Vec<f64>>) -> Result<Self> {
        if matter.iter().chain(&photons).any(|&e| !(e > 0.0)) {
            return Err(Error::Validation(
                "all mode energies must be positive".into(),
            ));
        }
        if couplings.len() != photons.len() || couplings.iter().any(|row| row.len() != matter.len())
        {
            return Err(Error::Validation(
                "couplings must have one row per photon and one column per transition".into(),
            ));
        }
        let n = matter.len() + photons.len();
        if 2 * n > MAX_BOGOLIUBOV_DIMENSION {
            return Err(Error::Capacity(format!(
                "Bogoliubov oracle limited to {MAX_BOGOLIUBOV_DIMENSION} (got {})",
                2 * n
            )));
        }
        Ok(Self {
            matter,
            photons,
            couplings,
        })
    }

    /// Symmetric `W` with `H = sum w c^+ c + 1/2 sum W_ij (c_i + c_i^+)(c_j + c_j^+)`.
    fn interaction(&self) -> Vec<Vec<f64>> {
        let (m, p) = (self.matter.len(), self.photons.len());
        let n = m + p;
        let mut w = vec![vec![0.0; n]; n];
        for s in 0..m {
            for t in 0..m {
                w[s][t] = (0..p)
                    .map(|a| self.couplings[a][s] * self.couplings[a][t])
                    .sum();
            }
            for a in 0..p {
                let v = (0.5 * self.photons[a]).sqrt() * self.couplings[a][s];
                w[s][m + a] = v;
                w[m + a][s] = v;
            }
        }
        w
    }
}

/// Positive normal-mode frequencies, ascending.
pub fn bogoliubov_spectrum(problem: &QuadraticBosonProblem) -> Result<Vec<f64>> {
    let energies: Vec<f64> = problem
        .matter
        .iter()
        .chain(&problem.photons)
        .copied()
        .collect();
    let n = energies.len();
    let w = problem.interaction();

    // dynamical matrix [[A, B], [B, A]] with A = diag + W, B = W
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let a = w[i][j] + if i == j { energies[i] } else { 0.0 };
            m[i][j] = a;
            m[n + i][n + j] = a;
            m[i][n + j] = w[i][j];
            m[n + i][j] = w[i][j];
        }
    }
    let k = cholesky(&m).map_err(|pivot| Error::Instability {
        eigenvalue: pivot,
        tolerance: 0.0,
    })?;

    // K^T eta K has eigenvalues +-omega
    let mut h = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..2 * n {
        for j in 0..=i {
            let v: f64 = (0..2 * n)
                .map(|r| {
                    let sign = if r < n { 1.0 } else { -1.0 };
                    k[r][i] * sign * k[r][j]
                })
                .sum();
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    let mut values = jacobi_eigenvalues(h);
    values.sort_by(f64::total_cmp);
    Ok(values.split_off(n))
}

/// Lower-triangular `L` with `L L^T = m`; fails with the offending pivot if `m` is not positive definite.
fn cholesky(m: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, f64> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - dot;
                if !(d > 0.0) {
                    return Err(d);
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - dot) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Polariton frequencies of one transition `eps` coupled to one mode `omega` with `g = lambda . d`.
pub fn analytic_two_by_two(eps: f64, omega: f64, g: f64) -> (f64, f64) {
    let a = eps * eps + 2.0 * eps * g * g;
    let d = omega * omega;
    let b = (2.0 * eps).sqrt() * omega * g;
    let trace = a + d;
    let upper = 0.5 * (trace + ((a - d).powi(2) + 4.0 * b * b).sqrt());
    // the determinant is eps^2 omega^2; dividing avoids cancellation in the lower root
    let lower = eps * eps * omega * omega / upper;
    (lower.sqrt(), upper.sqrt())
}

/// Dimensionless coupling `g_J / sqrt(eps omega)` with `g_J = (lambda . d) sqrt(omega / 2)`.
pub fn dimensionless_coupling(eps: f64, omega: f64, g: f64) -> f64 {
    g * (0.5 * omega).sqrt() / (eps * omega).sqrt()
}

/// Inverse of [`dimensionless_coupling`].
pub fn coupling_for(eps: f64, omega: f64, eta: f64) -> f64 {
    eta * (eps * omega).sqrt() / (0.5 * omega).sqrt()
}

/// Low-lying excitation energies of a truncated Fock calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpectrum {
    /// Excitation energies above the ground state, ascending.
    pub excitations: Vec<f64>,
    /// Largest change of the reported excitations when one fewer photon is allowed.
    pub truncation_shift: f64,
}

/// Exact diagonalisation of two-level emitters (`energies[j]`) coupled to
/// `modes[a]` through `couplings[a][j] = lambda_a . d_j`, in the space with at
/// most `n_max` photons in total. Reports the `count` lowest excitations.
pub fn fock_ed_spectrum(
    energies: &[f64],
    modes: &[f64],
    couplings: &[Vec<f64>],
    n_max: usize,
    count: usize,
) -> Result<FockSpectrum> {
    fock_ed_spectrum_with_capacity(
        energies,
        modes,
        couplings,
        n_max,
        count,
        DEFAULT_FOCK_CAPACITY,
    )
}

pub fn fock_ed_spectrum_with_capacity(
    energies: &[f64],
    modes: &[f64],
    couplings: &[Vec<f64>],
    n_max: usize,
    count: usize,
    capacity: usize,
) -> Result<FockSpectrum> {
    if energies.is_empty() || modes.is_empty() || n_max == 0 {
        return Err(Error::Validation(
            "need at least one emitter, one mode and n_max >= 1".into(),
        ));
    }
    if couplings.len() != modes.len() || couplings.iter().any(|r| r.len() != energies.len()) {
        return Err(Error::Validation(
            "couplings must have one row per mode and one column per emitter".into(),
        ));
    }
    let full = fock_levels(energies, modes, couplings, n_max, capacity)?;
    let reduced = fock_levels(energies, modes, couplings, n_max - 1, capacity)?;
    let take = count.min(full.len() - 1).min(reduced.len() - 1);
    let excitations: Vec<f64> = full[1..=take].iter().map(|e| e - full[0]).collect();
    let truncation_shift = (1..=take)
        .map(|k| ((full[k] - full[0]) - (reduced[k] - reduced[0])).abs())
        .fold(0.0, f64::max);
    Ok(FockSpectrum {
        excitations,
        truncation_shift,
    })
}

fn fock_levels(
    energies: &[f64],
    modes: &[f64],
    couplings: &[Vec<f64>],
    n_max: usize,
    capacity: usize,
) -> Result<Vec<f64>> {
    let photon_states = occupations(modes.len(), n_max);
    let emitters = energies.len();
    let spins = 1usize << emitters;
    let dim = spins * photon_states.len();
    if dim > capacity {
        return Err(Error::Capacity(format!(
            "Fock space dimension {dim} exceeds the limit of {capacity}"
        )));
    }
    let index: std::collections::HashMap<&[usize], usize> = photon_states
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_slice(), k))
        .collect();
    let at = |spin: usize, photon: usize| spin * photon_states.len() + photon;

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for spin in 0..spins {
        // sigma_x flips bit j
        for (p, occ) in photon_states.iter().enumerate() {
            let row = at(spin, p);
            let matter: f64 = (0..emitters)
                .filter(|&j| spin >> j & 1 == 1)
                .map(|j| energies[j])
                .sum();
            let field: f64 = occ.iter().zip(modes).map(|(&n, &w)| n as f64 * w).sum();
            h[(row, row)] += matter + field;

            // dipole self-energy: 1/2 sum_a (sum_j g_aj sx_j)^2
            for a in 0..modes.len() {
                for j in 0..emitters {
                    for k in 0..emitters {
                        let g2 = 0.5 * couplings[a][j] * couplings[a][k];
                        let target = spin ^ (1 << j) ^ (1 << k);
                        h[(at(target, p), row)] += g2;
                    }
                }
            }

            // sqrt(omega_a / 2) g_aj sx_j (a + a^+)
            for a in 0..modes.len() {
                let n = occ[a];
                let mut shifted = occ.clone();
                for (new_n, amp) in [
                    (n + 1, ((n + 1) as f64).sqrt()),
                    (n.wrapping_sub(1), (n as f64).sqrt()),
                ] {
                    if new_n == usize::MAX || amp == 0.0 {
                        continue;
                    }
                    shifted[a] = new_n;
                    let Some(&q) = index.get(shifted.as_slice()) else {
                        continue;
                    };
                    for j in 0..emitters {
                        let v = (0.5 * modes[a]).sqrt() * couplings[a][j] * amp;
                        h[(at(spin ^ (1 << j), q), row)] += v;
                    }
                }
            }
        }
    }
    let mut levels: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

/// All photon occupation vectors over `modes` modes with total at most `n_max`.
fn occupations(modes: usize, n_max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..modes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                let used: usize = prefix.iter().sum();
                (0..=n_max - used).map(move |n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    out
}
