//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-6,
            absolute: 0.0,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self {
            relative,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            intervals: self.intervals + rhs.intervals,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Ok(Segment {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).abs(),
    })
}

/// Integrate `f` over `[a, b]` until the summed error estimate is within tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod(&mut f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::from([first]);
    loop {
        let target = tol.absolute.max(tol.relative * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the incremental updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate {
        value,
        error,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| Ok(x.powi(5) - 3.0 * x * x),
            0.0,
            2.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let r = integrate(
            |x| Ok((40.0 * x).cos()),
            0.0,
            PI,
            Tolerance::relative(1e-10),
        );
        let r = r.unwrap();
        assert!((r.value - (40.0 * PI).sin() / 40.0).abs() < 1e-10);

        let w = 1e-4;
        let lorentz = |x: f64| Ok(w / ((x - 0.3).powi(2) + w * w));
        let r = integrate(lorentz, -1.0, 1.0, Tolerance::relative(1e-9)).unwrap();
        let exact = (0.7f64 / w).atan() + (1.3f64 / w).atan();
        assert!((r.value - exact).abs() / exact < 1e-8);
        assert!((r.value - exact).abs() <= r.error.max(1e-12));
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance {
            relative: 1e-14,
            absolute: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| Ok(x.abs().sqrt().recip()), 1e-12, 1.0, tol);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
