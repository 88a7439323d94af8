//! Squared-frequency (Casida/Hopfield) eigenproblem of molecular transitions
//! coupled to discrete photon modes, with the dipole self-energy included.
//!
//! The matrix factorises as `K = L L^T` with `L = [[E, C], [0, W]]`, where
//! `E = diag(eps_S)`, `W = diag(omega_a)` and `C_Sa = sqrt(2 eps_S) (lambda_a . d_S)`.
//! Its eigenvalues are the squared polariton frequencies.

mod secular;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::matter::MatterSystem;
use crate::photon_grid::PhotonModeSet;
use crate::units;

pub const DEFAULT_MAX_DIMENSION: usize = 20_000;
/// Negative eigenvalues below `-INSTABILITY_TOLERANCE * |K|` are rejected.
const INSTABILITY_TOLERANCE: f64 = 1e-10;
/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldMatrix {
    energies: Vec<f64>,
    dipoles: Vec<Vector3<f64>>,
    frequencies: Vec<f64>,
    coupling: DMatrix<f64>,
}

impl HopfieldMatrix {
    pub fn build(matter: &MatterSystem, photons: &PhotonModeSet) -> Result<Self> {
        Self::build_with_capacity(matter, photons, DEFAULT_MAX_DIMENSION)
    }

    pub fn build_with_capacity(
        matter: &MatterSystem,
        photons: &PhotonModeSet,
        max_dimension: usize,
    ) -> Result<Self> {
        let dimension = matter.len() + photons.len();
        if dimension > max_dimension {
            return Err(Error::Capacity(format!(
                "{} transitions + {} photon modes = {dimension} exceeds the limit of {max_dimension}; \
                 narrow the window or lower the sampling density",
                matter.len(),
                photons.len()
            )));
        }
        let energies: Vec<f64> = matter.transitions().iter().map(|t| t.energy).collect();
        let dipoles: Vec<Vector3<f64>> = matter.transitions().iter().map(|t| t.dipole).collect();
        let modes = photons.modes();
        let coupling = DMatrix::from_fn(matter.len(), modes.len(), |s, a| {
            (2.0 * energies[s]).sqrt() * modes[a].coupling.dot(&dipoles[s])
        });
        Ok(Self {
            energies,
            dipoles,
            frequencies: modes.iter().map(|m| m.omega).collect(),
            coupling,
        })
    }

    pub fn matter_count(&self) -> usize {
        self.energies.len()
    }

    pub fn photon_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn dimension(&self) -> usize {
        self.matter_count() + self.photon_count()
    }

    /// The `C` block, `sqrt(2 eps_S) (lambda_a . d_S)`.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// The full matrix, `[[E^2 + C C^T, C W], [W C^T, W^2]]`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (m, p) = (self.matter_count(), self.photon_count());
        let mut k = DMatrix::zeros(m + p, m + p);
        let cct = &self.coupling * self.coupling.transpose();
        for s in 0..m {
            for t in 0..m {
                k[(s, t)] = cct[(s, t)];
            }
            k[(s, s)] += self.energies[s] * self.energies[s];
            for a in 0..p {
                let v = self.coupling[(s, a)] * self.frequencies[a];
                k[(s, m + a)] = v;
                k[(m + a, s)] = v;
            }
        }
        for a in 0..p {
            k[(m + a, m + a)] = self.frequencies[a] * self.frequencies[a];
        }
        k
    }

    /// Upper bound on the spectral radius, used to scale tolerances.
    fn norm_bound(&self) -> f64 {
        let matter = (0..self.matter_count())
            .map(|s| self.energies[s].powi(2) + self.coupling.row(s).norm_squared())
            .fold(0.0, f64::max);
        let photon = self.frequencies.iter().map(|w| w * w).fold(0.0, f64::max);
        let cross = self.coupling.norm() * self.frequencies.iter().copied().fold(0.0, f64::max);
        matter + photon + cross
    }

    /// `(2/3) |sum_S sqrt(eps_S) d_S F_S|^2`.
    fn oscillator_strength(&self, matter_amplitudes: impl Iterator<Item = f64>) -> f64 {
        let mu = matter_amplitudes
            .enumerate()
            .fold(Vector3::zeros(), |acc, (s, f)| {
                acc + self.dipoles[s] * (self.energies[s].sqrt() * f)
            });
        2.0 / 3.0 * mu.norm_squared()
    }

    /// Dense reference diagonalisation, including eigenvectors.
    pub fn solve_dense(&self) -> Result<PolaritonSolution> {
        let m = self.matter_count();
        let eigen = SymmetricEigen::try_new(self.to_dense(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        let scale = self.norm_bound();
        let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));

        let n = self.dimension();
        let mut vectors = DMatrix::zeros(n, n);
        let mut excitations = Vec::with_capacity(n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eigen.eigenvectors.column(k).into_owned();
            if let Some(first) = v.iter().find(|x| **x != 0.0) {
                if *first < 0.0 {
                    v.neg_mut();
                }
            }
            let frequency = checked_sqrt(eigen.eigenvalues[k], scale)?;
            let matter: f64 = v.rows(0, m).norm_squared();
            excitations.push(Excitation {
                frequency,
                oscillator_strength: self.oscillator_strength(v.rows(0, m).iter().copied()),
                photonic_fraction: (1.0 - matter).max(0.0),
            });
            vectors.set_column(col, &v);
        }
        Ok(PolaritonSolution {
            excitations,
            eigenvectors: Some(vectors),
            matter_count: m,
        })
    }

    /// Diagonalise by removing decoupled combinations first. A single bright
    /// matter state is handled through its secular equation; otherwise the
    /// reduced problem is diagonalised densely.
    pub fn solve(&self) -> Result<PolaritonSolution> {
        let scale = self.norm_bound();
        let mut excitations = Vec::with_capacity(self.dimension());

        let bright_photons = self.reduce_photons(&mut excitations);
        let (bright_matter, reduced) = self.reduce_matter(&bright_photons, &mut excitations)?;

        match bright_matter.len() {
            0 => excitations.extend(bright_photons.iter().map(|p| Excitation::photon(p.omega))),
            1 => self.solve_secular(
                &bright_matter[0],
                &bright_photons,
                &reduced,
                &mut excitations,
                scale,
            )?,
            _ => self.solve_reduced(
                &bright_matter,
                &bright_photons,
                &reduced,
                &mut excitations,
                scale,
            )?,
        }

        excitations.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        Ok(PolaritonSolution {
            excitations,
            eigenvectors: None,
            matter_count: self.matter_count(),
        })
    }

    /// Rotate modes of equal frequency so that at most `matter_count` of them couple.
    fn reduce_photons(&self, out: &mut Vec<Excitation>) -> Vec<BrightPhoton> {
        let mut order: Vec<usize> = (0..self.photon_count()).collect();
        order.sort_by(|&a, &b| self.frequencies[a].total_cmp(&self.frequencies[b]));

        let mut bright = Vec::new();
        let mut start = 0;
        while start < order.len() {
            let omega = self.frequencies[order[start]];
            let mut end = start + 1;
            while end < order.len() && self.frequencies[order[end]] == omega {
                end += 1;
            }
            let group = &order[start..end];
            let columns: Vec<DVector<f64>> = group
                .iter()
                .map(|&a| self.coupling.column(a).into_owned())
                .collect();
            let directions = significant_span(&columns);
            for coupling in &directions {
                bright.push(BrightPhoton {
                    omega,
                    coupling: coupling.clone(),
                });
            }
            for _ in directions.len()..group.len() {
                out.push(Excitation::photon(omega));
            }
            start = end;
        }
        bright
    }

    /// Rotate transitions of equal energy so that only combinations seen by the
    /// bright photons remain. Returns the bright matter states and their
    /// couplings to each bright photon (rows of the reduced `C`).
    fn reduce_matter(
        &self,
        photons: &[BrightPhoton],
        out: &mut Vec<Excitation>,
    ) -> Result<(Vec<BrightMatter>, DMatrix<f64>)> {
        let m = self.matter_count();
        let c = DMatrix::from_fn(m, photons.len(), |s, b| photons[b].coupling[s]);

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        let mut bright = Vec::new();
        let mut rows: Vec<DVector<f64>> = Vec::new();
        let mut start = 0;
        while start < m {
            let energy = self.energies[order[start]];
            let mut end = start + 1;
            while end < m && self.energies[order[end]] == energy {
                end += 1;
            }
            let group = &order[start..end];
            let block = DMatrix::from_fn(group.len(), photons.len(), |i, b| c[(group[i], b)]);
            let gram = &block * block.transpose();
            let eigen = gram.symmetric_eigen();
            let largest = eigen.eigenvalues.iter().copied().fold(0.0, f64::max);
            for k in 0..group.len() {
                let mut direction = DVector::zeros(m);
                for (i, &s) in group.iter().enumerate() {
                    direction[s] = eigen.eigenvectors[(i, k)];
                }
                let sigma2 = eigen.eigenvalues[k];
                if sigma2 > 0.0 && sigma2 > RANK_TOLERANCE * RANK_TOLERANCE * largest {
                    rows.push(c.transpose() * &direction);
                    bright.push(BrightMatter { energy, direction });
                } else {
                    out.push(Excitation {
                        frequency: energy,
                        oscillator_strength: self.oscillator_strength(direction.iter().copied()),
                        photonic_fraction: 0.0,
                    });
                }
            }
            start = end;
        }
        let reduced = DMatrix::from_fn(bright.len(), photons.len(), |i, b| rows[i][b]);
        Ok((bright, reduced))
    }

    fn solve_secular(
        &self,
        matter: &BrightMatter,
        photons: &[BrightPhoton],
        reduced: &DMatrix<f64>,
        out: &mut Vec<Excitation>,
        scale: f64,
    ) -> Result<()> {
        let f_bright = self.oscillator_strength(matter.direction.iter().copied());

        // merge equal frequencies; the orthogonal complement is decoupled
        let mut entries: Vec<(f64, f64)> = Vec::with_capacity(photons.len());
        for (b, p) in photons.iter().enumerate() {
            let c = reduced[(0, b)];
            match entries.last_mut() {
                Some(last) if last.0 == p.omega => {
                    last.1 = last.1.hypot(c);
                    out.push(Excitation::photon(p.omega));
                }
                _ => entries.push((p.omega, c)),
            }
        }

        // deflate couplings too weak to move their pole
        let norm = (matter.energy.powi(2) + entries.iter().map(|e| e.1 * e.1).sum::<f64>()).sqrt();
        let max_omega = entries.iter().map(|e| e.0).fold(0.0, f64::max);
        let threshold = 8.0 * f64::EPSILON * norm.max(max_omega);
        let mut poles = vec![0.0];
        let mut weights = vec![matter.energy.powi(2)];
        for &(omega, c) in &entries {
            if c.abs() <= threshold {
                let matter_weight = c * c / (omega * omega + c * c);
                out.push(Excitation {
                    frequency: omega,
                    oscillator_strength: matter_weight * f_bright,
                    photonic_fraction: 1.0 - matter_weight,
                });
            } else {
                poles.push(omega * omega);
                weights.push(c * c);
            }
        }

        for root in secular::roots(&poles, &weights) {
            let mu = root.value(&poles);
            let frequency = checked_sqrt(mu, scale)?;
            // |P|^2 / |F|^2 = sum_a omega_a^2 c_a^2 / (omega_a^2 - mu)^2
            let ratio: f64 = (1..poles.len())
                .map(|j| {
                    let gap = root.gap(&poles, j);
                    poles[j] * weights[j] / (gap * gap)
                })
                .sum();
            let matter_weight = 1.0 / (1.0 + ratio);
            out.push(Excitation {
                frequency,
                oscillator_strength: matter_weight * f_bright,
                photonic_fraction: ratio / (1.0 + ratio),
            });
        }
        Ok(())
    }

    fn solve_reduced(
        &self,
        matter: &[BrightMatter],
        photons: &[BrightPhoton],
        reduced: &DMatrix<f64>,
        out: &mut Vec<Excitation>,
        scale: f64,
    ) -> Result<()> {
        let (m, p) = (matter.len(), photons.len());
        let mut l = DMatrix::zeros(m + p, m + p);
        for (i, state) in matter.iter().enumerate() {
            l[(i, i)] = state.energy;
            for b in 0..p {
                l[(i, m + b)] = reduced[(i, b)];
            }
        }
        for (b, photon) in photons.iter().enumerate() {
            l[(m + b, m + b)] = photon.omega;
        }
        let k = &l * l.transpose();
        let eigen = SymmetricEigen::try_new(k, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        for (idx, &mu) in eigen.eigenvalues.iter().enumerate() {
            let v = eigen.eigenvectors.column(idx);
            let mut amplitudes = DVector::zeros(self.matter_count());
            for (i, state) in matter.iter().enumerate() {
                amplitudes += &state.direction * v[i];
            }
            let matter_weight = v.rows(0, m).norm_squared();
            out.push(Excitation {
                frequency: checked_sqrt(mu, scale)?,
                oscillator_strength: self.oscillator_strength(amplitudes.iter().copied()),
                photonic_fraction: (1.0 - matter_weight).max(0.0),
            });
        }
        Ok(())
    }
}

struct BrightPhoton {
    omega: f64,
    /// Coupling column over the original transitions.
    coupling: DVector<f64>,
}

struct BrightMatter {
    energy: f64,
    /// Unit combination of the original transitions.
    direction: DVector<f64>,
}

/// Orthogonal basis (scaled by singular values) of the span of `columns`.
fn significant_span(columns: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if columns.len() == 1 {
        return if columns[0].norm_squared() > 0.0 {
            vec![columns[0].clone()]
        } else {
            Vec::new()
        };
    }
    let n = columns[0].len();
    let mut gram = DMatrix::zeros(n, n);
    for c in columns {
        gram += c * c.transpose();
    }
    let eigen = gram.symmetric_eigen();
    let largest = eigen.eigenvalues.iter().copied().fold(0.0, f64::max);
    (0..n)
        .filter(|&k| {
            let s = eigen.eigenvalues[k];
            s > 0.0 && s > RANK_TOLERANCE * RANK_TOLERANCE * largest
        })
        .map(|k| eigen.eigenvectors.column(k) * eigen.eigenvalues[k].sqrt())
        .collect()
}

fn checked_sqrt(mu: f64, scale: f64) -> Result<f64> {
    let tolerance = INSTABILITY_TOLERANCE * scale;
    if mu < -tolerance {
        return Err(Error::Instability {
            eigenvalue: mu,
            tolerance,
        });
    }
    Ok(mu.max(0.0).sqrt())
}

/// One eigenmode of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excitation {
    /// Polariton frequency, Ha.
    pub frequency: f64,
    pub oscillator_strength: f64,
    /// Squared norm of the photon part of the eigenvector.
    pub photonic_fraction: f64,
}

impl Excitation {
    fn photon(frequency: f64) -> Self {
        Self {
            frequency,
            oscillator_strength: 0.0,
            photonic_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonSolution {
    excitations: Vec<Excitation>,
    eigenvectors: Option<DMatrix<f64>>,
    matter_count: usize,
}

impl PolaritonSolution {
    /// Excitations in ascending frequency.
    pub fn excitations(&self) -> &[Excitation] {
        &self.excitations
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.excitations.iter().map(|e| e.frequency).collect()
    }

    pub fn oscillator_strengths(&self) -> Vec<f64> {
        self.excitations
            .iter()
            .map(|e| e.oscillator_strength)
            .collect()
    }

    pub fn total_oscillator_strength(&self) -> f64 {
        self.excitations.iter().map(|e| e.oscillator_strength).sum()
    }

    pub fn photonic_fraction(&self, index: usize) -> Result<f64> {
        self.excitations
            .get(index)
            .map(|e| e.photonic_fraction)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "excitation index {index} out of range (have {})",
                    self.excitations.len()
                ))
            })
    }

    /// Eigenvectors as columns (matter rows first), available from the dense solver.
    pub fn eigenvectors(&self) -> Option<&DMatrix<f64>> {
        self.eigenvectors.as_ref()
    }

    pub fn matter_count(&self) -> usize {
        self.matter_count
    }

    /// Unbroadened strength function: oscillator strengths summed into bins of
    /// `bin_width` starting at `window.0`.
    pub fn strength_function(&self, window: (f64, f64), bin_width: f64) -> Result<Spectrum> {
        let (lo, hi) = window;
        if !(bin_width > 0.0) || !(hi > lo) {
            return Err(Error::Validation(format!(
                "need bin width > 0 and a non-empty window (got {bin_width}, [{lo}, {hi}])"
            )));
        }
        let bins = ((hi - lo) / bin_width).ceil() as usize;
        let mut weights = vec![0.0; bins];
        let mut outside = 0.0;
        for e in &self.excitations {
            let x = (e.frequency - lo) / bin_width;
            if x >= 0.0 && (x as usize) < bins {
                weights[x as usize] += e.oscillator_strength;
            } else {
                outside += e.oscillator_strength;
            }
        }
        Ok(Spectrum {
            start: lo,
            bin_width,
            weights,
            outside,
        })
    }

    /// Rows of `Omega (eV), f, photonic fraction`.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.excitations
            .iter()
            .map(|e| {
                [
                    units::to_ev(e.frequency),
                    e.oscillator_strength,
                    e.photonic_fraction,
                ]
            })
            .collect()
    }
}

/// Oscillator strength binned on a uniform frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub start: f64,
    pub bin_width: f64,
    pub weights: Vec<f64>,
    /// Strength of excitations that fell outside the window.
    pub outside: f64,
}

impl Spectrum {
    pub fn center(&self, bin: usize) -> f64 {
        self.start + (bin as f64 + 0.5) * self.bin_width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.weights.len()).map(|k| self.center(k)).collect()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Rows of `bin centre (eV), S`.
    pub fn rows(&self) -> Vec<[f64; 2]> {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, &w)| [units::to_ev(self.center(k)), w])
            .collect()
    }
}
