//! Physical crystal and beam descriptions, their dimensionless reduction, and
//! the rectangular ring potential built from them.
//!
//! Every evaluator downstream works on [`ScaledGeometry`] alone: lengths are
//! measured in units of the bending radius and the potential enters only
//! through the signed strength `phi0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One angstrom in meters.
pub const ANGSTROM: f64 = 1e-10;

/// Smallest plane thickness (in units of the bending radius) accepted by the
/// evaluators whose closed forms divide by `sqrt(a_hat)`.
pub const MIN_A_HAT: f64 = 1e-15;

/// Bent crystal made of `plane_count` concentric rectangular rings.
///
/// Ring `i` occupies `R - i d - a < r < R - i d`, so the outermost plane sits
/// at the bending radius and the rings repeat inward with period `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingPotentialSpec {
    /// Bending radius in meters.
    pub bend_radius: f64,
    pub plane_count: usize,
    /// Interplanar period in meters.
    pub period: f64,
    /// Plane thickness in meters.
    pub plane_thickness: f64,
    /// Potential height in eV as seen by a unit positive charge.
    pub potential_height_ev: f64,
}

impl RingPotentialSpec {
    pub fn new(
        bend_radius: f64,
        plane_count: usize,
        period: f64,
        plane_thickness: f64,
        potential_height_ev: f64,
    ) -> Result<Self> {
        let spec = Self {
            bend_radius,
            plane_count,
            period,
            plane_thickness,
            potential_height_ev,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Crystal with thicknesses given in angstroms, as they are usually quoted.
    pub fn from_angstroms(
        bend_radius: f64,
        plane_count: usize,
        period_angstrom: f64,
        thickness_angstrom: f64,
    ) -> Result<Self> {
        Self::new(
            bend_radius,
            plane_count,
            period_angstrom * ANGSTROM,
            thickness_angstrom * ANGSTROM,
            0.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.bend_radius,
            self.period,
            self.plane_thickness,
            self.potential_height_ev,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidCrystal("non-finite parameter".into()));
        }
        if self.bend_radius <= 0.0 {
            return Err(Error::InvalidCrystal(
                "bending radius must be positive".into(),
            ));
        }
        if self.plane_count == 0 {
            return Err(Error::InvalidCrystal(
                "at least one plane is required".into(),
            ));
        }
        if !(self.plane_thickness > 0.0 && self.plane_thickness < self.period) {
            return Err(Error::InvalidCrystal(format!(
                "need 0 < a < d, got a = {:e} m, d = {:e} m",
                self.plane_thickness, self.period
            )));
        }
        if self.plane_count as f64 * self.period >= self.bend_radius {
            return Err(Error::InvalidCrystal(format!(
                "crystal thickness N*d = {:e} m must stay below R = {:e} m",
                self.plane_count as f64 * self.period,
                self.bend_radius
            )));
        }
        Ok(())
    }
}

/// Projectile description. `phi0` is normally quoted directly as the signed
/// square of the Lindhard angle; the energy/momentum route is kept for
/// configurations that specify a potential height instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// Total energy in GeV.
    pub total_energy: f64,
    /// Momentum times c in GeV.
    pub momentum: f64,
    /// +1 or -1.
    pub charge_sign: i8,
    /// Signed potential strength used verbatim when present.
    pub direct_phi0: Option<f64>,
}

impl BeamSpec {
    pub fn new(total_energy: f64, momentum: f64, charge_sign: i8) -> Result<Self> {
        let beam = Self {
            total_energy,
            momentum,
            charge_sign,
            direct_phi0: None,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// Beam described only by its signed potential strength.
    pub fn with_phi0(phi0: f64) -> Result<Self> {
        let beam = Self {
            total_energy: 1.0,
            momentum: 1.0,
            charge_sign: if phi0 < 0.0 { -1 } else { 1 },
            direct_phi0: Some(phi0),
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.charge_sign != 1 && self.charge_sign != -1 {
            return Err(Error::InvalidBeam(format!(
                "charge sign must be +1 or -1, got {}",
                self.charge_sign
            )));
        }
        if let Some(phi0) = self.direct_phi0 {
            if !phi0.is_finite() || phi0.abs() >= 1.0 {
                return Err(Error::InvalidBeam(format!(
                    "|phi0| must be below 1, got {phi0:e}"
                )));
            }
            return Ok(());
        }
        if !(self.momentum > 0.0 && self.total_energy >= self.momentum) {
            return Err(Error::InvalidBeam(format!(
                "need E >= pc > 0, got E = {} GeV, pc = {} GeV",
                self.total_energy, self.momentum
            )));
        }
        Ok(())
    }
}

/// Dimensionless crystal: `a_hat = a/R`, `d_hat = d/R`, signed `phi0` and
/// `big_phi = 1 - phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledGeometry {
    a_hat: f64,
    d_hat: f64,
    plane_count: usize,
    phi0: f64,
    big_phi: f64,
}

impl ScaledGeometry {
    pub fn new(a_hat: f64, d_hat: f64, plane_count: usize, phi0: f64) -> Result<Self> {
        if !(a_hat.is_finite() && d_hat.is_finite() && phi0.is_finite()) {
            return Err(Error::InvalidCrystal("non-finite scaled parameter".into()));
        }
        if plane_count == 0 {
            return Err(Error::InvalidCrystal(
                "at least one plane is required".into(),
            ));
        }
        if !(a_hat > 0.0 && a_hat < d_hat) {
            return Err(Error::InvalidCrystal(format!(
                "need 0 < a_hat < d_hat, got a_hat = {a_hat:e}, d_hat = {d_hat:e}"
            )));
        }
        if plane_count as f64 * d_hat >= 1.0 {
            return Err(Error::InvalidCrystal(format!(
                "N*d_hat = {:e} must be below 1",
                plane_count as f64 * d_hat
            )));
        }
        if phi0.abs() >= 1.0 {
            return Err(Error::InvalidBeam(format!(
                "|phi0| must be below 1, got {phi0:e}"
            )));
        }
        Ok(Self {
            a_hat,
            d_hat,
            plane_count,
            phi0,
            big_phi: 1.0 - phi0,
        })
    }

    pub fn a_hat(&self) -> f64 {
        self.a_hat
    }

    pub fn d_hat(&self) -> f64 {
        self.d_hat
    }

    pub fn plane_count(&self) -> usize {
        self.plane_count
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `1 - phi0`, the squared refractive index inside a plane.
    pub fn big_phi(&self) -> f64 {
        self.big_phi
    }

    /// Same crystal with a different potential strength.
    pub fn with_phi0(&self, phi0: f64) -> Result<Self> {
        Self::new(self.a_hat, self.d_hat, self.plane_count, phi0)
    }

    /// Same potential on a crystal with a different number of planes.
    pub fn with_plane_count(&self, plane_count: usize) -> Result<Self> {
        Self::new(self.a_hat, self.d_hat, plane_count, self.phi0)
    }

    /// Outer wall `1 - i d_hat` of ring `i`.
    pub fn outer_wall(&self, ring: usize) -> f64 {
        1.0 - ring as f64 * self.d_hat
    }

    /// Inner wall `1 - i d_hat - a_hat` of ring `i`.
    pub fn inner_wall(&self, ring: usize) -> f64 {
        1.0 - ring as f64 * self.d_hat - self.a_hat
    }

    /// Radius below which the potential vanishes.
    pub fn core_radius(&self) -> f64 {
        self.inner_wall(self.plane_count - 1)
    }

    /// Impact parameters where some radical of the deflection function
    /// vanishes or the turning point jumps from one wall to another.
    /// Sorted ascending, restricted to `(0, inf)`.
    pub fn critical_impact_parameters(&self) -> Vec<f64> {
        let root = self.big_phi.sqrt();
        let mut points: Vec<f64> = (0..self.plane_count)
            .flat_map(|i| {
                let (outer, inner) = (self.outer_wall(i), self.inner_wall(i));
                [outer, inner, root * outer, root * inner]
            })
            .filter(|b| *b > 0.0)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// Reduces a physical crystal and beam to dimensionless form.
pub fn scale(crystal: &RingPotentialSpec, beam: &BeamSpec) -> Result<ScaledGeometry> {
    crystal.validate()?;
    beam.validate()?;
    let phi0 = match beam.direct_phi0 {
        Some(phi0) => phi0,
        None => {
            let u0_gev = crystal.potential_height_ev * 1e-9;
            f64::from(beam.charge_sign) * 2.0 * u0_gev * beam.total_energy
                / (beam.momentum * beam.momentum)
        }
    };
    ScaledGeometry::new(
        crystal.plane_thickness / crystal.bend_radius,
        crystal.period / crystal.bend_radius,
        crystal.plane_count,
        phi0,
    )
}

/// Ring-scaled impact parameters `(b/(1 - i d_hat), b/(1 - a_hat - i d_hat))`.
pub fn scaled_impact(geom: &ScaledGeometry, b_hat: f64, ring: usize) -> Result<(f64, f64)> {
    if ring >= geom.plane_count {
        return Err(Error::RingIndex {
            index: ring,
            count: geom.plane_count,
        });
    }
    Ok((b_hat / geom.outer_wall(ring), b_hat / geom.inner_wall(ring)))
}

/// Rectangular ring potential in units of the kinetic scale: `phi0` inside a
/// plane, zero elsewhere. Planes are the half-open intervals
/// `[1 - i d_hat - a_hat, 1 - i d_hat)`.
pub fn potential_at(geom: &ScaledGeometry, r_hat: f64) -> f64 {
    if r_hat.is_nan() || r_hat >= 1.0 || r_hat < geom.core_radius() {
        return 0.0;
    }
    // Candidate ring is the one whose outer wall sits just above r_hat.
    let i = ((1.0 - r_hat) / geom.d_hat).floor() as usize;
    for ring in [i.saturating_sub(1), i, i + 1] {
        if ring < geom.plane_count
            && r_hat >= geom.inner_wall(ring)
            && r_hat < geom.outer_wall(ring)
        {
            return geom.phi0;
        }
    }
    0.0
}

/// True when `phi0 > 2 d_hat`: the positive-charge refraction windows close
/// and the ring region reflects everywhere.
pub fn reflection_condition(geom: &ScaledGeometry) -> bool {
    geom.phi0 > 2.0 * geom.d_hat
}

/// Monotonicity test of `u(r) = r sqrt(1 - phi(r))` for the rectangular model.
///
/// Within a shell `u` grows linearly, so the only failures come from the
/// jumps at the walls. For repulsive planes the drop sits on the inner wall
/// and is tolerated while the top of each plane stays above the vacuum just
/// beneath it, `sqrt(Phi) (1 - i d) >= 1 - i d - a`. For attractive planes
/// the drop sits on the outer wall and the mirrored requirement is
/// `1 - i d >= sqrt(Phi) (1 - i d - a)`. `samples` points per period are also
/// checked inside every shell.
pub fn orbiting_check(geom: &ScaledGeometry, samples: usize) -> Result<bool> {
    if samples < 2 {
        return Err(Error::Precondition(format!(
            "orbiting check needs at least 2 samples per period, got {samples}"
        )));
    }
    if geom.phi0 == 0.0 {
        return Ok(true);
    }
    let root = geom.big_phi.sqrt();
    let u = |r: f64| r * (1.0 - potential_at(geom, r)).sqrt();
    for ring in 0..geom.plane_count {
        let (outer, inner) = (geom.outer_wall(ring), geom.inner_wall(ring));
        let walls_ok = if geom.phi0 > 0.0 {
            root * outer >= inner
        } else {
            outer >= root * inner
        };
        if !walls_ok {
            return Ok(false);
        }
        // interior of the plane and of the gap beneath it
        let gap_bottom = if ring + 1 < geom.plane_count {
            geom.outer_wall(ring + 1)
        } else {
            inner - (geom.d_hat - geom.a_hat)
        };
        for (lo, hi) in [(inner, outer), (gap_bottom, inner)] {
            let step = (hi - lo) / (samples + 1) as f64;
            let values: Vec<f64> = (1..=samples).map(|k| u(lo + k as f64 * step)).collect();
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(a: f64, d: f64, n: usize, phi0: f64) -> ScaledGeometry {
        ScaledGeometry::new(a, d, n, phi0).unwrap()
    }

    #[test]
    fn scale_divides_lengths_by_radius() {
        let crystal = RingPotentialSpec::new(1.0, 1, 0.1, 0.05, 0.0).unwrap();
        let g = scale(&crystal, &BeamSpec::with_phi0(0.0).unwrap()).unwrap();
        assert_eq!(g.d_hat(), 0.1);
        assert_eq!(g.a_hat(), 0.05);
        assert_eq!(g.big_phi(), 1.0);
    }

    #[test]
    fn scale_one_gev_case() {
        let crystal = RingPotentialSpec::from_angstroms(0.33, 2, 3.136, 0.78).unwrap();
        let g = scale(&crystal, &BeamSpec::with_phi0(0.289e-7).unwrap()).unwrap();
        assert!((g.d_hat() - 9.503e-10).abs() < 1e-13);
        assert!((g.a_hat() - 2.364e-10).abs() < 1e-13);
        assert_eq!(g.big_phi(), 1.0 - 2.89e-8);
        assert!((g.big_phi() + g.phi0() - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn scale_from_potential_height() {
        // 2 * 20 eV * 400 GeV / (400 GeV)^2 = 1e-10
        let crystal = RingPotentialSpec::new(1.0, 1, 1e-3, 2e-4, 20.0).unwrap();
        let beam = BeamSpec::new(400.0, 400.0, 1).unwrap();
        let g = scale(&crystal, &beam).unwrap();
        assert!((g.phi0() - 1e-10).abs() < 1e-24);
        let negative = BeamSpec::new(400.0, 400.0, -1).unwrap();
        assert!((scale(&crystal, &negative).unwrap().phi0() + 1e-10).abs() < 1e-24);
    }

    #[test]
    fn scale_rejects_bad_input() {
        assert!(RingPotentialSpec::new(1.0, 20, 0.1, 0.05, 0.0).is_err());
        assert!(RingPotentialSpec::new(1.0, 1, 0.1, 0.2, 0.0).is_err());
        assert!(RingPotentialSpec::new(1.0, 0, 0.1, 0.05, 0.0).is_err());
        assert!(BeamSpec::with_phi0(1.0).is_err());
        assert!(BeamSpec::new(1.0, 2.0, 1).is_err());
        assert!(BeamSpec::new(2.0, 1.0, 0).is_err());
        let crystal = RingPotentialSpec::new(1.0, 1, 0.1, 0.05, 1e9).unwrap();
        let beam = BeamSpec::new(1.0, 1.0, 1).unwrap();
        assert!(matches!(scale(&crystal, &beam), Err(Error::InvalidBeam(_))));
    }

    #[test]
    fn scaled_impact_values() {
        let g = geom(0.1, 0.2, 3, 0.01);
        let (bi, bia) = scaled_impact(&g, 0.5, 0).unwrap();
        assert!((bi - 0.5).abs() < 1e-15 && (bia - 0.5 / 0.9).abs() < 1e-15);
        let (bi, bia) = scaled_impact(&g, 0.5, 1).unwrap();
        assert!((bi - 0.625).abs() < 1e-15 && (bia - 0.5 / 0.7).abs() < 1e-15);
        assert_eq!(scaled_impact(&g, 0.0, 2).unwrap(), (0.0, 0.0));
        assert_eq!(
            scaled_impact(&g, 0.5, 3),
            Err(Error::RingIndex { index: 3, count: 3 })
        );
    }

    #[test]
    fn potential_branches() {
        let g = geom(0.01, 0.04, 3, 0.02);
        assert_eq!(potential_at(&g, 1.5), 0.0);
        assert_eq!(potential_at(&g, 1.0 - 0.005), 0.02);
        assert_eq!(potential_at(&g, 1.0 - 0.01 - 0.01), 0.0);
        assert_eq!(potential_at(&g, 1.0 - 0.04 - 0.005), 0.02);
        assert_eq!(potential_at(&g, 0.5), 0.0);
        // half-open walls
        assert_eq!(potential_at(&g, 1.0), 0.0);
        assert_eq!(potential_at(&g, g.inner_wall(0)), 0.02);
    }

    #[test]
    fn potential_integrates_to_total_plane_width() {
        let g = geom(0.01, 0.04, 3, 0.02);
        let lo = 1.0 - 3.0 * g.d_hat();
        let n = 300_000;
        let h = (1.0 - lo) / n as f64;
        let integral: f64 = (0..n)
            .map(|k| {
                let r = lo + k as f64 * h;
                0.5 * h * (potential_at(&g, r) + potential_at(&g, r + h))
            })
            .sum();
        let expected = 3.0 * g.a_hat() * g.phi0();
        assert!(
            (integral - expected).abs() < 4.0 * h * g.phi0(),
            "{integral} vs {expected}"
        );
    }

    #[test]
    fn reflection_condition_examples() {
        assert!(reflection_condition(&geom(
            2.364e-10, 9.503e-10, 2, 2.89e-8
        )));
        assert!(!reflection_condition(&geom(2.364e-10, 9.503e-10, 2, 0.0)));
        assert!(!reflection_condition(&geom(0.5e-9, 1e-9, 2, 1e-9)));
    }

    #[test]
    fn orbiting_check_examples() {
        assert!(orbiting_check(&geom(0.01, 0.04, 3, 0.0), 4).unwrap());
        assert!(!orbiting_check(&geom(2.364e-10, 9.503e-10, 1, 2.89e-8), 4).unwrap());
        assert!(orbiting_check(&geom(1e-3, 4e-3, 1, 1e-12), 4).unwrap());
        // mirrored rule for attractive planes
        assert!(orbiting_check(&geom(1e-3, 4e-3, 2, -1e-5), 4).unwrap());
        assert!(!orbiting_check(&geom(1e-3, 4e-3, 2, -1e-2), 4).unwrap());
        assert!(orbiting_check(&geom(1e-3, 4e-3, 1, 1e-12), 1).is_err());
    }
}
