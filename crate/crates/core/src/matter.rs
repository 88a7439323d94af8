//! Few-level matter systems described by excitation energies and transition dipoles.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::units;

/// Benzene's lowest bright transition, eV.
pub const BENZENE_EXCITATION_EV: f64 = 6.808;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub label: String,
    /// Excitation energy, Ha.
    pub energy: f64,
    /// Transition dipole, e bohr.
    pub dipole: Vector3<f64>,
}

impl Transition {
    pub fn new(label: impl Into<String>, energy: f64, dipole: Vector3<f64>) -> Result<Self> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::Validation(format!(
                "excitation energy must be positive (got {energy})"
            )));
        }
        if !dipole.iter().all(|d| d.is_finite()) {
            return Err(Error::Validation("transition dipole must be finite".into()));
        }
        Ok(Self {
            label: label.into(),
            energy,
            dipole,
        })
    }

    /// `(2/3) eps |d|^2`.
    pub fn oscillator_strength(&self) -> f64 {
        2.0 / 3.0 * self.energy * self.dipole.norm_squared()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatterSystem {
    transitions: Vec<Transition>,
}

impl MatterSystem {
    pub fn new(transitions: Vec<Transition>) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::Validation("matter system has no transitions".into()));
        }
        Ok(Self { transitions })
    }

    /// Single benzene-like transition with a user-supplied dipole.
    pub fn benzene(dipole: Vector3<f64>) -> Result<Self> {
        Self::new(vec![Transition::new(
            "benzene",
            units::ev(BENZENE_EXCITATION_EV),
            dipole,
        )?])
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// `copies` identical molecules at the same position.
    pub fn replicate(&self, copies: usize) -> Result<Self> {
        if copies < 1 {
            return Err(Error::Validation(
                "replication count must be at least 1".into(),
            ));
        }
        if copies == 1 {
            return Ok(self.clone());
        }
        let transitions = (1..=copies)
            .flat_map(|k| {
                self.transitions.iter().map(move |t| Transition {
                    label: format!("{}#{k}", t.label),
                    ..t.clone()
                })
            })
            .collect();
        Ok(Self { transitions })
    }

    pub fn bare_oscillator_strengths(&self) -> Vec<f64> {
        self.transitions
            .iter()
            .map(Transition::oscillator_strength)
            .collect()
    }

    pub fn total_oscillator_strength(&self) -> f64 {
        self.bare_oscillator_strengths().iter().sum()
    }

    /// Read `label, energy (eV), d_x, d_y, d_z` rows; `#` starts a comment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut transitions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(parse_err(format!(
                    "expected 5 comma-separated fields, found {}",
                    fields.len()
                )));
            }
            let mut nums = [0.0; 4];
            for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
                *slot = field
                    .parse()
                    .map_err(|_| parse_err(format!("not a number: '{field}'")))?;
            }
            let transition = Transition::new(
                fields[0],
                units::ev(nums[0]),
                Vector3::new(nums[1], nums[2], nums[3]),
            )
            .map_err(|e| parse_err(e.to_string()))?;
            transitions.push(transition);
        }
        Self::new(transitions)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# label, energy (eV), d_x, d_y, d_z (e bohr)\n");
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "{}, {:e}, {:e}, {:e}, {:e}",
                t.label,
                units::to_ev(t.energy),
                t.dipole.x,
                t.dipole.y,
                t.dipole.z
            );
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Linear model of an acene series: each added ring lowers the excitation energy
/// and lengthens the transition dipole by a fixed amount.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AceneFamily {
    /// Excitation energy of the one-ring member, eV.
    pub base_energy_ev: f64,
    /// Change of excitation energy per added ring, eV.
    pub energy_step_ev: f64,
    /// Dipole magnitude of the one-ring member, e bohr.
    pub base_dipole: f64,
    /// Change of dipole magnitude per added ring, e bohr.
    pub dipole_step: f64,
}

impl AceneFamily {
    pub fn energy(&self, rings: usize) -> f64 {
        units::ev(self.base_energy_ev + self.energy_step_ev * (rings as f64 - 1.0))
    }

    pub fn dipole_magnitude(&self, rings: usize) -> f64 {
        self.base_dipole + self.dipole_step * (rings as f64 - 1.0)
    }

    /// Member with `rings` rings and its dipole along `axis`.
    pub fn member(&self, rings: usize, axis: Vector3<f64>) -> Result<MatterSystem> {
        if rings < 1 {
            return Err(Error::Validation("ring count must be at least 1".into()));
        }
        let d = self.dipole_magnitude(rings);
        if d < 0.0 {
            return Err(Error::Validation(format!(
                "family gives a negative dipole ({d}) for {rings} rings"
            )));
        }
        MatterSystem::new(vec![Transition::new(
            format!("acene-{rings}"),
            self.energy(rings),
            axis.normalize() * d,
        )?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> &'static Path {
        Path::new("<test>")
    }

    #[test]
    fn parses_rows_in_order() {
        let m = MatterSystem::parse(
            "# label, eV, dx, dy, dz\npi-pistar, 6.808, 0.0, 1.8, 0.0\nsecond, 7.0, 1, 0, 0 # trailing\n",
            origin(),
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.transitions()[0].label, "pi-pistar");
        assert!((m.transitions()[0].energy - 0.25019).abs() < 5e-6);
        assert_eq!(m.transitions()[1].label, "second");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            MatterSystem::parse("# nothing\n", origin()),
            Err(Error::Validation(_))
        ));
        match MatterSystem::parse("a, 1, 0, 0, 0\nb, x, 0, 0, 0\n", origin()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match MatterSystem::parse("a, -1, 0, 0, 0\n", origin()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oscillator_strength_formula() {
        let t = Transition::new("t", 0.25, Vector3::x()).unwrap();
        assert!((t.oscillator_strength() - 1.0 / 6.0).abs() < 1e-16);
        let dark = Transition::new("t", 0.25, Vector3::zeros()).unwrap();
        assert_eq!(dark.oscillator_strength(), 0.0);
    }

    #[test]
    fn replication() {
        let m = MatterSystem::benzene(Vector3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(m.replicate(1).unwrap(), m);
        let three = m.replicate(3).unwrap();
        assert_eq!(three.len(), 3);
        assert!(
            (three.total_oscillator_strength() - 3.0 * m.total_oscillator_strength()).abs() < 1e-15
        );
        assert!(m.replicate(0).is_err());
    }

    #[test]
    fn acene_family_trends() {
        let family = AceneFamily {
            base_energy_ev: 6.808,
            energy_step_ev: -0.4,
            base_dipole: 2.0,
            dipole_step: 0.5,
        };
        let e: Vec<f64> = (1..=5).map(|n| family.energy(n)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        let m = family.member(3, Vector3::z()).unwrap();
        assert!((m.transitions()[0].dipole.z - 3.0).abs() < 1e-15);
        assert!(family.member(0, Vector3::z()).is_err());
    }

    fn transition() -> impl Strategy<Value = Transition> {
        (
            "[a-z]{1,8}",
            0.01f64..20.0,
            proptest::array::uniform3(-5.0f64..5.0),
        )
            .prop_map(|(label, e, d)| {
                Transition::new(label, units::ev(e), Vector3::from(d)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn save_load_round_trip(ts in proptest::collection::vec(transition(), 1..6)) {
            let m = MatterSystem::new(ts).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.csv");
            m.save(&path).unwrap();
            let back = MatterSystem::load(&path).unwrap();
            prop_assert_eq!(back.len(), m.len());
            for (a, b) in m.transitions().iter().zip(back.transitions()) {
                prop_assert_eq!(&a.label, &b.label);
                prop_assert!((a.energy - b.energy).abs() <= 1e-12 * a.energy);
                prop_assert!((a.dipole - b.dipole).norm() <= 1e-12 * a.dipole.norm().max(1.0));
            }
        }

        #[test]
        fn replication_commutes_with_strengths(ts in proptest::collection::vec(transition(), 1..4), n in 1usize..5) {
            let m = MatterSystem::new(ts).unwrap();
            let mut a: Vec<f64> = m.replicate(n).unwrap().bare_oscillator_strengths();
            let mut b: Vec<f64> = m.bare_oscillator_strengths().iter().flat_map(|&f| std::iter::repeat_n(f, n)).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
