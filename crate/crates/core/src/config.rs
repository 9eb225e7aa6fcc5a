//! JSON run configuration.
//!
//! ```json
//! {"crystal": {"R_m": 0.33, "N": 2, "d_angstrom": 3.136, "a_angstrom": 0.78},
//!  "beam": {"phi0": 2.89e-8}}
//! ```
//!
//! The beam may instead give `U0_eV`, `E_GeV`, `pc_GeV` and `charge_sign`.

use serde::{Deserialize, Serialize};

use crate::crystal::{scale, BeamSpec, RingPotentialSpec, ScaledGeometry, ANGSTROM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    #[serde(rename = "R_m")]
    pub radius_m: f64,
    #[serde(rename = "N")]
    pub plane_count: usize,
    pub d_angstrom: f64,
    pub a_angstrom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BeamConfig {
    Direct {
        phi0: f64,
    },
    Kinematic {
        #[serde(rename = "U0_eV")]
        u0_ev: f64,
        #[serde(rename = "E_GeV")]
        energy_gev: f64,
        #[serde(rename = "pc_GeV")]
        momentum_gev: f64,
        charge_sign: i8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub beam: BeamConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidCrystal(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Physical crystal and beam described by this configuration.
    pub fn specs(&self) -> Result<(RingPotentialSpec, BeamSpec)> {
        let c = self.crystal;
        let u0 = match self.beam {
            BeamConfig::Kinematic { u0_ev, .. } => u0_ev,
            BeamConfig::Direct { .. } => 0.0,
        };
        let crystal = RingPotentialSpec::new(
            c.radius_m,
            c.plane_count,
            c.d_angstrom * ANGSTROM,
            c.a_angstrom * ANGSTROM,
            u0,
        )?;
        let beam = match self.beam {
            BeamConfig::Direct { phi0 } => BeamSpec::with_phi0(phi0)?,
            BeamConfig::Kinematic {
                energy_gev,
                momentum_gev,
                charge_sign,
                ..
            } => BeamSpec::new(energy_gev, momentum_gev, charge_sign)?,
        };
        Ok((crystal, beam))
    }

    pub fn geometry(&self) -> Result<ScaledGeometry> {
        let (crystal, beam) = self.specs()?;
        scale(&crystal, &beam)
    }

    /// Forces the sign of the projectile charge: the magnitude of a direct
    /// `phi0` is kept and given the requested sign.
    pub fn with_charge_sign(mut self, sign: i8) -> Self {
        match &mut self.beam {
            BeamConfig::Direct { phi0 } => *phi0 = phi0.abs() * f64::from(sign),
            BeamConfig::Kinematic { charge_sign, .. } => *charge_sign = sign,
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_direct_beam() {
        let cfg = RunConfig::from_json(
            r#"{"crystal": {"R_m": 0.33, "N": 2, "d_angstrom": 3.136, "a_angstrom": 0.78},
                "beam": {"phi0": 2.89e-8}}"#,
        )
        .unwrap();
        let g = cfg.geometry().unwrap();
        assert_eq!(g.phi0(), 2.89e-8);
        assert!((g.d_hat() - 3.136e-10 / 0.33).abs() < 1e-24);
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn parses_kinematic_beam() {
        let cfg = RunConfig::from_json(
            r#"{"crystal": {"R_m": 1.0, "N": 1, "d_angstrom": 2.0, "a_angstrom": 0.5},
                "beam": {"U0_eV": 20.0, "E_GeV": 400.0, "pc_GeV": 400.0, "charge_sign": -1}}"#,
        )
        .unwrap();
        assert!((cfg.geometry().unwrap().phi0() + 1e-10).abs() < 1e-24);
        assert!(cfg.with_charge_sign(1).geometry().unwrap().phi0() > 0.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(RunConfig::from_json("{}").is_err());
        assert!(RunConfig::from_json(
            r#"{"crystal": {"R_m": 1.0, "N": 1, "d_angstrom": 2.0, "a_angstrom": 0.5, "x": 1},
                "beam": {"phi0": 1e-8}}"#
        )
        .is_err());
        let bad = RunConfig::from_json(
            r#"{"crystal": {"R_m": 1.0, "N": 1, "d_angstrom": 2.0, "a_angstrom": 3.0},
                "beam": {"phi0": 1e-8}}"#,
        )
        .unwrap();
        assert!(bad.geometry().is_err());
    }

    #[test]
    fn charge_override_on_direct_phi0() {
        let cfg = RunConfig {
            crystal: CrystalConfig {
                radius_m: 1.0,
                plane_count: 1,
                d_angstrom: 2.0,
                a_angstrom: 0.5,
            },
            beam: BeamConfig::Direct { phi0: 1e-8 },
        };
        assert_eq!(cfg.with_charge_sign(-1).geometry().unwrap().phi0(), -1e-8);
    }
}
