//! Eigenvalues of a diagonal-plus-rank-one matrix `D + z z^T`.
//!
//! Each root is located relative to its nearest pole so that the differences
//! `d_j - mu` are formed without cancellation, then refined with a two-pole
//! rational model of the secular function safeguarded by bisection.

use rayon::prelude::*;

/// Eigenvalue `mu = poles[origin] + tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub origin: usize,
    pub tau: f64,
}

impl Root {
    /// `d_j - mu`, accurate for all j.
    #[inline]
    pub fn gap(&self, poles: &[f64], j: usize) -> f64 {
        (poles[j] - poles[self.origin]) - self.tau
    }

    pub fn value(&self, poles: &[f64]) -> f64 {
        poles[self.origin] + self.tau
    }
}

/// All roots of `1 + sum_j w_j / (d_j - mu) = 0` for strictly increasing `poles`
/// and strictly positive `weights` (the squares of z).
pub(crate) fn roots(poles: &[f64], weights: &[f64]) -> Vec<Root> {
    debug_assert_eq!(poles.len(), weights.len());
    debug_assert!(poles.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(weights.iter().all(|&w| w > 0.0));
    (0..poles.len())
        .into_par_iter()
        .map(|i| root(poles, weights, i))
        .collect()
}

/// Secular function split into the sums over poles left and right of the root interval.
struct Parts {
    psi: f64,
    dpsi: f64,
    phi: f64,
    dphi: f64,
}

fn parts(poles: &[f64], weights: &[f64], origin: usize, split: usize, tau: f64) -> Parts {
    let base = poles[origin];
    let mut p = Parts {
        psi: 0.0,
        dpsi: 0.0,
        phi: 0.0,
        dphi: 0.0,
    };
    for (j, (&d, &w)) in poles.iter().zip(weights).enumerate() {
        let delta = (d - base) - tau;
        let t = w / delta;
        if j <= split {
            p.psi += t;
            p.dpsi += t / delta;
        } else {
            p.phi += t;
            p.dphi += t / delta;
        }
    }
    p
}

fn root(poles: &[f64], weights: &[f64], i: usize) -> Root {
    let n = poles.len();
    let eps = f64::EPSILON;
    let last = i + 1 == n;

    // pick the closer pole as origin; the secular function increases between poles
    let (origin, mut lo, mut hi) = if last {
        (i, 0.0, weights.iter().sum::<f64>())
    } else {
        let half = 0.5 * (poles[i + 1] - poles[i]);
        let p = parts(poles, weights, i, i, half);
        if 1.0 + p.psi + p.phi >= 0.0 {
            (i, 0.0, half)
        } else {
            (i + 1, -half, 0.0)
        }
    };
    let left = poles[i] - poles[origin];
    let right = if last {
        f64::INFINITY
    } else {
        poles[i + 1] - poles[origin]
    };

    let mut tau = 0.5 * (lo + hi);
    for _ in 0..200 {
        let p = parts(poles, weights, origin, i, tau);
        let f = 1.0 + p.psi + p.phi;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let tolerance = eps * (8.0 + (n as f64).sqrt()) * (1.0 + p.psi.abs() + p.phi.abs());
        if f.abs() <= tolerance || hi - lo <= 2.0 * eps * lo.abs().max(hi.abs()) {
            break;
        }

        // two-pole rational model matching f and f' at tau, solved for the step eta
        let pl = left - tau;
        let s = p.dpsi * pl * pl;
        let a = p.psi - s / pl;
        let step = if last {
            let c = 1.0 + a;
            if c > 0.0 {
                pl + s / c
            } else {
                f64::NAN
            }
        } else {
            let pr = right - tau;
            let big_s = p.dphi * pr * pr;
            let b = p.phi - big_s / pr;
            let c = 1.0 + a + b;
            let bb = c * (pl + pr) + s + big_s;
            let c0 = pl * pr * f;
            if c.abs() <= eps * bb.abs() {
                c0 / bb
            } else {
                let disc = bb * bb - 4.0 * c * c0;
                if disc < 0.0 {
                    -f / (p.dpsi + p.dphi)
                } else {
                    2.0 * c0 / (bb + bb.signum() * disc.sqrt())
                }
            }
        };
        let next = tau + step;
        tau = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Root { origin, tau }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn dense(poles: &[f64], weights: &[f64]) -> Vec<f64> {
        let z = DVector::from_iterator(weights.len(), weights.iter().map(|w| w.sqrt()));
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(poles)) + &z * z.transpose();
        let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn single_pole() {
        let r = roots(&[0.0], &[0.3]);
        assert!((r[0].value(&[0.0]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_by_two() {
        let (d, w) = ([0.0, 1.0], [0.25, 0.04]);
        let r = roots(&d, &w);
        let e = dense(&d, &w);
        for (root, exact) in r.iter().zip(e) {
            assert!((root.value(&d) - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn tightly_clustered_poles() {
        let d: Vec<f64> = (0..400).map(|k| 0.2 + 1e-7 * k as f64).collect();
        let w: Vec<f64> = (0..400)
            .map(|k| 1e-12 * (1.0 + (k as f64 * 0.37).sin().powi(2)))
            .collect();
        let r = roots(&d, &w);
        for (k, root) in r.iter().enumerate() {
            let mu = root.value(&d);
            assert!(mu > d[k]);
            if k + 1 < d.len() {
                assert!(mu < d[k + 1]);
            }
            // secular residual relative to its scale
            let (mut f, mut scale) = (1.0, 1.0);
            for j in 0..d.len() {
                let t = w[j] / root.gap(&d, j);
                f += t;
                scale += t.abs();
            }
            assert!(f.abs() <= 1e-12 * scale, "root {k}: {f} vs {scale}");
        }
    }

    proptest! {
        #[test]
        fn matches_dense(
            raw in proptest::collection::vec((0.01f64..1.0, 1e-6f64..1.0), 1..40)
        ) {
            let mut d: Vec<f64> = Vec::new();
            let mut acc = 0.0;
            for (gap, _) in &raw {
                d.push(acc);
                acc += gap;
            }
            let w: Vec<f64> = raw.iter().map(|r| r.1).collect();
            let r = roots(&d, &w);
            let e = dense(&d, &w);
            let scale = e.last().unwrap().abs().max(1.0);
            for (root, exact) in r.iter().zip(e) {
                prop_assert!((root.value(&d) - exact).abs() <= 1e-12 * scale);
            }
        }
    }
}
