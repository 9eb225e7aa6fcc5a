use std::path::PathBuf;

use bentring_core::config::{BeamConfig, CrystalConfig, RunConfig};
use bentring_core::ScaledGeometry;
use clap::{Args, ValueEnum};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Charge {
    #[value(name = "+")]
    Positive,
    #[value(name = "-")]
    Negative,
}

impl Charge {
    fn sign(self) -> i8 {
        match self {
            Charge::Positive => 1,
            Charge::Negative => -1,
        }
    }
}

/// Crystal and beam, either from a JSON file or from inline flags.
#[derive(Debug, Clone, Args)]
pub struct Input {
    /// JSON run configuration
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Bending radius in metres
    #[arg(long, value_name = "M")]
    pub radius_m: Option<f64>,
    /// Number of planes
    #[arg(long, value_name = "N")]
    pub planes: Option<usize>,
    /// Interplanar period in angstroms
    #[arg(long, value_name = "A")]
    pub d_angstrom: Option<f64>,
    /// Plane thickness in angstroms
    #[arg(long, value_name = "A")]
    pub a_angstrom: Option<f64>,
    /// Dimensionless potential strength
    #[arg(long, allow_negative_numbers = true)]
    pub phi0: Option<f64>,
    /// Potential height in eV
    #[arg(long, value_name = "EV", allow_negative_numbers = true)]
    pub u0_ev: Option<f64>,
    /// Total beam energy in GeV
    #[arg(long, value_name = "GEV")]
    pub energy_gev: Option<f64>,
    /// Beam momentum times c in GeV
    #[arg(long, value_name = "GEV")]
    pub pc_gev: Option<f64>,

    /// Projectile charge sign; overrides the configured one
    #[arg(long, value_enum)]
    pub charge: Option<Charge>,
}

impl Input {
    fn has_inline(&self) -> bool {
        self.radius_m.is_some()
            || self.planes.is_some()
            || self.d_angstrom.is_some()
            || self.a_angstrom.is_some()
            || self.phi0.is_some()
            || self.u0_ev.is_some()
            || self.energy_gev.is_some()
            || self.pc_gev.is_some()
    }

    pub fn run_config(&self) -> Result<RunConfig, Failure> {
        let config = match (&self.config, self.has_inline()) {
            (Some(_), true) => {
                return Err(Failure::Invalid(
                    "give either --config or inline crystal/beam flags, not both".into(),
                ))
            }
            (None, false) => {
                return Err(Failure::Invalid(
                    "no input: give --config PATH or inline crystal/beam flags".into(),
                ))
            }
            (Some(path), false) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text).map_err(Failure::from)?
            }
            (None, true) => self.inline()?,
        };
        Ok(match self.charge {
            Some(c) => config.with_charge_sign(c.sign()),
            None => config,
        })
    }

    fn inline(&self) -> Result<RunConfig, Failure> {
        let need = |value: Option<f64>, flag: &str| {
            value.ok_or_else(|| Failure::Invalid(format!("missing --{flag}")))
        };
        let crystal = CrystalConfig {
            radius_m: need(self.radius_m, "radius-m")?,
            plane_count: self
                .planes
                .ok_or_else(|| Failure::Invalid("missing --planes".into()))?,
            d_angstrom: need(self.d_angstrom, "d-angstrom")?,
            a_angstrom: need(self.a_angstrom, "a-angstrom")?,
        };
        let kinematic = self.u0_ev.is_some() || self.energy_gev.is_some() || self.pc_gev.is_some();
        let beam = match (self.phi0, kinematic) {
            (Some(_), true) => {
                return Err(Failure::Invalid(
                    "give either --phi0 or --u0-ev/--energy-gev/--pc-gev, not both".into(),
                ))
            }
            (Some(phi0), false) => BeamConfig::Direct { phi0 },
            (None, _) => BeamConfig::Kinematic {
                u0_ev: need(self.u0_ev, "u0-ev")?,
                energy_gev: need(self.energy_gev, "energy-gev")?,
                momentum_gev: need(self.pc_gev, "pc-gev")?,
                charge_sign: 1,
            },
        };
        Ok(RunConfig { crystal, beam })
    }

    pub fn geometry(&self) -> Result<ScaledGeometry, Failure> {
        self.run_config()?.geometry().map_err(Failure::from)
    }
}
