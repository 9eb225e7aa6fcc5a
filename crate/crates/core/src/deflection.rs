//! Closed-form deflection function of the ring crystal.
//!
//! Each ring contributes the difference of two wall terms. A wall term pairs
//! the vacuum side of a wall, `arccos(x)`, with its plane side,
//! `arccos(x / sqrt(Phi))`, where `x = b / r_wall`. A side contributes only
//! when the trajectory actually visits it: walls below the turning point drop
//! out, and a wall where the ray turns keeps only the side it approached from.
//! When both sides are visited the pair collapses to the single arcsine of the
//! ring formula
//!
//! ```text
//! arcsin( x (sqrt(1 - x^2) - sqrt(Phi - x^2)) / sqrt(Phi) )
//! ```
//!
//! and every radical with a negative argument is discarded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{ScaledGeometry, MIN_A_HAT};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Which evaluation chain to use for the wall terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Arcsine form, exact for the rectangular model.
    Exact,
    /// Arcsines replaced by their arguments and `sqrt(Phi) -> 1` in the
    /// denominators.
    SmallAngle,
    /// Small-angle form with the `b_i ~ 1` prefactors also dropped; valid in
    /// the ring region and the form the one-ring piecewise branches take.
    Reduced,
}

/// One point of the deflection function. `alpha` is the half deflection and
/// `chi = 2 alpha`; positive `chi` is reflection (away from the centre).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeflectionSample {
    pub b_hat: f64,
    pub alpha: f64,
    pub chi: f64,
}

impl DeflectionSample {
    pub fn new(b_hat: f64, alpha: f64) -> Self {
        Self {
            b_hat,
            alpha,
            chi: 2.0 * alpha,
        }
    }
}

/// Samples of the deflection function on an increasing impact-parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflectionCurve {
    pub geometry: ScaledGeometry,
    pub mode: Mode,
    pub samples: Vec<DeflectionSample>,
}

/// Extreme half-deflections of a single ring for either charge sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub alpha_max_plus: f64,
    pub alpha_min_plus: f64,
    pub alpha_max_minus: f64,
    pub alpha_min_minus: f64,
}

/// Square root with negative arguments mapped to zero.
pub fn sqrt_clamped(x: f64) -> f64 {
    if x > 0.0 {
        x.sqrt()
    } else {
        0.0
    }
}

/// Which sides of the two walls of one ring the trajectory visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RingReach {
    pub outer_vacuum: bool,
    pub outer_plane: bool,
    pub inner_plane: bool,
    pub inner_vacuum: bool,
}

/// Walks an incoming ray of impact parameter `b_hat` down through the rings
/// and records which wall sides it reaches before turning.
///
/// A ray enters a medium across a wall only while its transmitted sine
/// `b / (n r)` stays below one; at equality it is counted as turning.
pub fn ring_reach(geom: &ScaledGeometry, b_hat: f64) -> Vec<RingReach> {
    let root = geom.big_phi().sqrt();
    let mut descending = true;
    (0..geom.plane_count())
        .map(|ring| {
            let (outer, inner) = (geom.outer_wall(ring), geom.inner_wall(ring));
            let outer_vacuum = descending && b_hat < outer;
            let outer_plane = outer_vacuum && b_hat < root * outer;
            let inner_plane = outer_plane && b_hat < root * inner;
            let inner_vacuum = inner_plane && b_hat < inner;
            descending = inner_vacuum;
            RingReach {
                outer_vacuum,
                outer_plane,
                inner_plane,
                inner_vacuum,
            }
        })
        .collect()
}

/// `sqrt(q) - sqrt(q - phi0)` for `q = 1 - x^2`, without cancellation when
/// both radicands are non-negative.
fn radical_difference(q: f64, phi0: f64) -> f64 {
    let (s1, s2) = (sqrt_clamped(q), sqrt_clamped(q - phi0));
    if q >= 0.0 && q - phi0 >= 0.0 {
        if s1 + s2 > 0.0 {
            phi0 / (s1 + s2)
        } else {
            0.0
        }
    } else {
        s1 - s2
    }
}

fn one_minus_square(x: f64) -> f64 {
    (1.0 - x) * (1.0 + x)
}

/// Wall term at `x = b / r` given which sides of the wall are visited.
fn wall_term(geom: &ScaledGeometry, x: f64, vacuum: bool, plane: bool, mode: Mode) -> f64 {
    let phi0 = geom.phi0();
    let q = one_minus_square(x);
    match mode {
        Mode::Exact => match (vacuum, plane) {
            (true, true) => {
                let arg = x * radical_difference(q, phi0) / geom.big_phi().sqrt();
                arg.clamp(-1.0, 1.0).asin()
            }
            (true, false) => sqrt_clamped(q).atan2(x),
            (false, true) => -sqrt_clamped(q - phi0).atan2(x),
            (false, false) => 0.0,
        },
        Mode::SmallAngle | Mode::Reduced => {
            let diff = match (vacuum, plane) {
                (true, true) => radical_difference(q, phi0),
                (true, false) => sqrt_clamped(q),
                (false, true) => -sqrt_clamped(q - phi0),
                (false, false) => 0.0,
            };
            if mode == Mode::SmallAngle {
                x * diff
            } else {
                diff
            }
        }
    }
}

fn ring_alpha(geom: &ScaledGeometry, b_hat: f64, ring: usize, reach: RingReach, mode: Mode) -> f64 {
    let x_outer = b_hat / geom.outer_wall(ring);
    let x_inner = b_hat / geom.inner_wall(ring);
    wall_term(geom, x_outer, reach.outer_vacuum, reach.outer_plane, mode)
        - wall_term(geom, x_inner, reach.inner_vacuum, reach.inner_plane, mode)
}

fn check_ring(geom: &ScaledGeometry, ring: usize) -> Result<()> {
    if ring >= geom.plane_count() {
        return Err(Error::RingIndex {
            index: ring,
            count: geom.plane_count(),
        });
    }
    Ok(())
}

/// Half-deflection contributed by ring `ring`, exact form.
pub fn alpha_ring_exact(geom: &ScaledGeometry, b_hat: f64, ring: usize) -> Result<f64> {
    alpha_ring(geom, b_hat, ring, Mode::Exact)
}

/// Half-deflection contributed by ring `ring`, small-angle form.
pub fn alpha_ring_small(geom: &ScaledGeometry, b_hat: f64, ring: usize) -> Result<f64> {
    alpha_ring(geom, b_hat, ring, Mode::SmallAngle)
}

pub fn alpha_ring(geom: &ScaledGeometry, b_hat: f64, ring: usize, mode: Mode) -> Result<f64> {
    check_ring(geom, ring)?;
    let reach = ring_reach(geom, b_hat)[ring];
    Ok(ring_alpha(geom, b_hat, ring, reach, mode))
}

/// Total deflection `chi = 2 sum_i alpha_i` of the crystal.
pub fn chi_crystal(geom: &ScaledGeometry, b_hat: f64, mode: Mode) -> DeflectionSample {
    let alpha = ring_reach(geom, b_hat)
        .into_iter()
        .enumerate()
        .take_while(|(_, reach)| reach.outer_vacuum)
        .map(|(ring, reach)| ring_alpha(geom, b_hat, ring, reach, mode))
        .fold(0.0, |acc, x| acc + x);
    DeflectionSample::new(b_hat, alpha)
}

/// One-ring deflection of a positive particle, branch by branch on the
/// critical sequence `sqrt(Phi)(1 - a) < sqrt(Phi) < 1`.
pub fn alpha_one_ring_piecewise_positive(geom: &ScaledGeometry, b_hat: f64) -> Result<f64> {
    let phi0 = geom.phi0();
    if phi0 <= 0.0 {
        return Err(Error::Regime(format!(
            "positive-charge branches need phi0 > 0, got {phi0:e}"
        )));
    }
    let root = geom.big_phi().sqrt();
    let a = geom.a_hat();
    let diff = |x: f64| radical_difference(one_minus_square(x), phi0);
    let b_a = b_hat / (1.0 - a);
    Ok(if b_hat >= 1.0 {
        0.0
    } else if b_hat > root {
        sqrt_clamped(one_minus_square(b_hat))
    } else if b_hat > root * (1.0 - a) {
        diff(b_hat)
    } else {
        diff(b_hat) - diff(b_a)
    })
}

/// One-ring deflection of a negative particle, branch by branch on the
/// critical sequence `(1 - a) < (1 - a) sqrt(Phi) < 1`.
pub fn alpha_one_ring_piecewise_negative(geom: &ScaledGeometry, b_hat: f64) -> Result<f64> {
    let phi0 = geom.phi0();
    if phi0 >= 0.0 {
        return Err(Error::Regime(format!(
            "negative-charge branches need phi0 < 0, got {phi0:e}"
        )));
    }
    let root = geom.big_phi().sqrt();
    let a = geom.a_hat();
    let diff = |x: f64| radical_difference(one_minus_square(x), phi0);
    let b_a = b_hat / (1.0 - a);
    Ok(if b_hat >= 1.0 {
        0.0
    } else if b_hat < 1.0 - a {
        diff(b_hat) - diff(b_a)
    } else if b_hat < (1.0 - a) * root {
        diff(b_hat) + sqrt_clamped(one_minus_square(b_a) - phi0)
    } else {
        diff(b_hat)
    })
}

/// Extreme one-ring half-deflections:
/// `alpha_max+ = sqrt|phi0|`, `alpha_min+ = |phi0| / (2 sqrt(2a)) - sqrt|phi0|`,
/// and their mirror images for negative charge.
pub fn extrema(geom: &ScaledGeometry) -> Result<Extrema> {
    let a = geom.a_hat();
    if a < MIN_A_HAT {
        return Err(Error::Precondition(format!(
            "plane thickness a_hat = {a:e} too small for the extrema formula"
        )));
    }
    let strength = geom.phi0().abs();
    let alpha_max_plus = strength.sqrt();
    let alpha_min_plus = strength / (2.0 * (2.0 * a).sqrt()) - strength.sqrt();
    Ok(Extrema {
        alpha_max_plus,
        alpha_min_plus,
        alpha_max_minus: -alpha_min_plus,
        alpha_min_minus: -alpha_max_plus,
    })
}

fn require_positive_phi0(geom: &ScaledGeometry) -> Result<()> {
    if geom.phi0() <= 0.0 {
        return Err(Error::Regime(format!(
            "average reflection angle needs phi0 > 0, got {:e}",
            geom.phi0()
        )));
    }
    Ok(())
}

/// Average reflection angle `chi = 4 sqrt(phi0) / 3` from the outermost ring.
pub fn mean_reflection_rough(geom: &ScaledGeometry) -> Result<f64> {
    require_positive_phi0(geom)?;
    Ok(4.0 * geom.phi0().sqrt() / 3.0)
}

fn pow_three_halves(x: f64) -> f64 {
    let s = sqrt_clamped(x);
    s * s * s
}

/// Average reflection angle over the second period from the edge, expanded
/// to leading order in `a_hat`, `d_hat` and `phi0`. Returns the full angle
/// `chi = 2 alpha`.
pub fn mean_reflection_refined(geom: &ScaledGeometry) -> Result<f64> {
    require_positive_phi0(geom)?;
    let (a, d, phi0) = (geom.a_hat(), geom.d_hat(), geom.phi0());
    if !(d > a && a > 0.0) {
        return Err(Error::Precondition(format!(
            "need d_hat > a_hat > 0, got a_hat = {a:e}, d_hat = {d:e}"
        )));
    }
    let sum = pow_three_halves(phi0)
        + pow_three_halves(2.0 * d + phi0)
        + pow_three_halves(2.0 * d - 2.0 * a)
        - pow_three_halves(2.0 * d)
        - pow_three_halves(2.0 * d - 2.0 * a + phi0)
        - pow_three_halves(2.0 * a - 2.0 * d + phi0);
    Ok(2.0 * sum / (3.0 * d))
}

/// `1 - y^2` and `Phi - y^2` for `y = sqrt(Phi) (1 - s) / (1 - c)`, written so
/// that neither loses digits when `y` is within `phi0` of one.
fn shifted_radicands(phi0: f64, s: f64, c: f64) -> (f64, f64) {
    let big_phi = 1.0 - phi0;
    let scale = (1.0 - c) * (1.0 - c);
    let geometric = (s - c) * (2.0 - c - s);
    (
        (geometric + phi0 * (1.0 - s) * (1.0 - s)) / scale,
        big_phi * geometric / scale,
    )
}

/// Average reflection angle over the second period from the edge by adaptive
/// quadrature of the two averaging integrals, returned as the full angle.
///
/// The integrals run over `(1 - d) sqrt(Phi) < b < (1 - a) sqrt(Phi)` and
/// `(1 - a) sqrt(Phi) < b < sqrt(Phi)`; with `b = sqrt(Phi) (1 - s)` they
/// become a single integral over `0 < s < d`.
pub fn mean_reflection_numeric(geom: &ScaledGeometry) -> Result<f64> {
    require_positive_phi0(geom)?;
    let (a, d, phi0) = (geom.a_hat(), geom.d_hat(), geom.phi0());
    if !(d > a && a > 0.0) {
        return Err(Error::Precondition(format!(
            "need d_hat > a_hat > 0, got a_hat = {a:e}, d_hat = {d:e}"
        )));
    }
    let pair = |c: f64, s: f64| {
        let (one, big) = shifted_radicands(phi0, s, c);
        radical_difference(one, one - big)
    };
    let outer_edge = |s: f64| pair(0.0, s);
    // I2 integrand
    let inner_period = |s: f64| outer_edge(s);
    // I1 integrand: both walls of ring 0 plus the vacuum side of ring 1
    let second_period = |s: f64| {
        let (one_1, _) = shifted_radicands(phi0, s, d);
        outer_edge(s) - pair(a, s) + sqrt_clamped(one_1)
    };
    // integrals scale as sqrt(phi0) * d
    let opts = QuadOptions {
        abs_tol: 1e-12 * phi0.sqrt() * d,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    // s values where a radical changes regime
    let breaks: Vec<f64> = [
        a,
        d,
        1.0 - (1.0 - a) / geom.big_phi().sqrt(),
        1.0 - (1.0 - d) / geom.big_phi().sqrt(),
    ]
    .into_iter()
    .filter(|s| s.is_finite())
    .collect();
    let i2 = quadrature::integrate(inner_period, 0.0, a, &breaks, opts)?;
    let i1 = quadrature::integrate(second_period, a, d, &breaks, opts)?;
    // db = sqrt(Phi) ds cancels the sqrt(Phi) of the normalisation
    Ok(2.0 * (i1.value + i2.value) / d)
}

fn validate_range(b_min: f64, b_max: f64, count: usize) -> Result<()> {
    if !(b_min.is_finite() && b_max.is_finite()) || b_min < 0.0 || b_min >= b_max {
        return Err(Error::InvalidRange(format!(
            "need 0 <= b_min < b_max, got [{b_min}, {b_max}]"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidRange(format!(
            "need at least 2 samples, got {count}"
        )));
    }
    Ok(())
}

fn evaluate_grid(geom: &ScaledGeometry, grid: Vec<f64>, mode: Mode) -> Result<DeflectionCurve> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRange(
            "grid spacing below floating-point resolution".into(),
        ));
    }
    let samples = grid
        .into_par_iter()
        .map(|b| chi_crystal(geom, b, mode))
        .collect();
    Ok(DeflectionCurve {
        geometry: *geom,
        mode,
        samples,
    })
}

/// Deflection function on a uniform grid of `count` points over
/// `[b_min, b_max]`.
pub fn sweep(
    geom: &ScaledGeometry,
    b_min: f64,
    b_max: f64,
    count: usize,
    mode: Mode,
) -> Result<DeflectionCurve> {
    validate_range(b_min, b_max, count)?;
    let step = (b_max - b_min) / (count - 1) as f64;
    let grid = (0..count)
        .map(|k| {
            if k + 1 == count {
                b_max
            } else {
                b_min + k as f64 * step
            }
        })
        .collect();
    evaluate_grid(geom, grid, mode)
}

/// Uniform sweep with the critical impact parameters inside the range
/// merged into the grid.
pub fn sweep_refined(
    geom: &ScaledGeometry,
    b_min: f64,
    b_max: f64,
    count: usize,
    mode: Mode,
) -> Result<DeflectionCurve> {
    validate_range(b_min, b_max, count)?;
    let step = (b_max - b_min) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count)
        .map(|k| {
            if k + 1 == count {
                b_max
            } else {
                b_min + k as f64 * step
            }
        })
        .chain(
            geom.critical_impact_parameters()
                .into_iter()
                .filter(|b| *b > b_min && *b < b_max),
        )
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    evaluate_grid(geom, grid, mode)
}
