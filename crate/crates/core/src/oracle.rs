//! Independent evaluations of the deflection function.
//!
//! None of these routines use the closed-form ring terms of
//! [`crate::deflection`]:
//!
//! * [`ray_trace`] follows the trajectory through the concentric shells in
//!   Cartesian coordinates. Inside a shell of constant potential the path is
//!   a straight chord; at every wall the direction is refracted with the
//!   index `n = sqrt(1 - phi)` or totally reflected.
//! * [`quad_deflection`] integrates the subtracted deflection integral for
//!   trajectories whose turning point lies in the empty core.
//! * [`ode_deflection`] integrates the equations of motion in a smoothed
//!   version of the ring potential.

use serde::{Deserialize, Serialize};

use crate::crystal::ScaledGeometry;
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Launch and exit radius of traced trajectories.
pub const LAUNCH_RADIUS: f64 = 2.0;

/// A transmitted squared normal direction cosine at or below this is treated
/// as turning.
pub const TANGENT_TOLERANCE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub radius: f64,
    /// Angle between the velocity and the outward radius vector on arrival.
    pub incidence: f64,
    /// Same angle after the wall; equals `pi - incidence` on reflection.
    pub transmitted: f64,
    pub reflected: bool,
    /// Index of the wall, counted from the outermost one.
    pub interface: usize,
    pub index_before: f64,
    pub index_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub b_hat: f64,
    pub crossings: Vec<Crossing>,
    /// Closest approach to the centre, or `None` when the ray passes through
    /// the field-free core.
    pub turning_radius: Option<f64>,
    pub chi: f64,
    /// Final position (on the launch circle) and direction.
    pub exit_point: [f64; 2],
    pub exit_direction: [f64; 2],
}

/// Wall radii from the outside in, and `n^2 - 1` of the region below each
/// wall. Region 0 is outside the crystal.
struct Shells {
    walls: Vec<f64>,
    excess: Vec<f64>,
}

impl Shells {
    fn new(geom: &ScaledGeometry) -> Self {
        let mut walls = Vec::with_capacity(2 * geom.plane_count());
        let mut excess = vec![0.0];
        for i in 0..geom.plane_count() {
            // written out independently of the geometry helpers
            let outer = 1.0 - i as f64 * geom.d_hat();
            let inner = 1.0 - i as f64 * geom.d_hat() - geom.a_hat();
            walls.push(outer);
            excess.push(-geom.phi0());
            walls.push(inner);
            excess.push(0.0);
        }
        Self { walls, excess }
    }

    fn index(&self, region: usize) -> f64 {
        (1.0 + self.excess[region]).sqrt()
    }
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn cross(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

/// Moves `t` along the ray and lands on the circle of `radius`. The landing
/// correction is taken along the ray rather than radially so that the
/// angular momentum `p x d` is not rescaled at every wall.
fn advance(p: [f64; 2], d: [f64; 2], t: f64, radius: f64) -> [f64; 2] {
    let q = [p[0] + t * d[0], p[1] + t * d[1]];
    let norm = q[0].hypot(q[1]);
    let qd = dot(q, d);
    let miss = (radius - norm) * (radius + norm);
    if qd.abs() > 1e-3 * miss.abs().sqrt() && qd.abs() > f64::MIN_POSITIVE {
        let dt = miss / (2.0 * qd);
        [q[0] + dt * d[0], q[1] + dt * d[1]]
    } else {
        [q[0] * radius / norm, q[1] * radius / norm]
    }
}

/// Closest approach to the origin along the chord from `p` of length `t`.
fn chord_min_radius(p: [f64; 2], d: [f64; 2], t: f64, end_radius: f64) -> f64 {
    let foot = -dot(p, d);
    let start = p[0].hypot(p[1]);
    if foot > 0.0 && foot < t {
        cross(p, d).abs()
    } else {
        start.min(end_radius)
    }
}

/// Traces a ray launched from `origin` with unit `direction`.
///
/// `origin` must lie on or outside the launch circle. The ray is followed
/// until it leaves the crystal moving outward and is then carried to the
/// launch circle.
pub fn trace_ray(geom: &ScaledGeometry, origin: [f64; 2], direction: [f64; 2]) -> TraceResult {
    let shells = Shells::new(geom);
    let norm = direction[0].hypot(direction[1]);
    let d_in = [direction[0] / norm, direction[1] / norm];
    let mut d = d_in;
    let mut p = origin;
    let mut radius = p[0].hypot(p[1]);
    let b_hat = cross(p, d).abs();
    // signed distance of the current chord from the centre; carried rather
    // than recomputed from `p x d`, whose rounding grows without bound near
    // grazing walls
    let mut lever = cross(p, d);
    let mut region = 0usize;
    let mut crossings = Vec::new();
    let mut min_radius = radius;
    let mut entered_core = false;

    loop {
        let inner = shells.walls.get(region).copied();
        let outer = region.checked_sub(1).map(|k| shells.walls[k]);
        let pd = dot(p, d);
        let reach = lever.abs();
        let half_chord = |r: f64| ((r - reach) * (r + reach)).max(0.0).sqrt();

        // inward hit on the lower wall of the current region
        let inward = inner.and_then(|ri| {
            if pd >= 0.0 || reach >= ri {
                return None;
            }
            let c = (radius - ri) * (radius + ri);
            Some((ri, c / (-pd + half_chord(ri))))
        });

        let (wall, t, wall_radius, dn) = match (inward, outer) {
            (Some((ri, t)), _) => (region, t, ri, -half_chord(ri) / ri),
            (None, Some(ro)) => {
                let h = half_chord(ro);
                let t = if pd > 0.0 {
                    (ro - radius) * (ro + radius) / (pd + h)
                } else {
                    h - pd
                };
                (region - 1, t, ro, h / ro)
            }
            (None, None) => {
                // outside the crystal moving away: carry to the launch circle
                let c = (radius - LAUNCH_RADIUS) * (radius + LAUNCH_RADIUS);
                let t = -pd + (pd * pd - c).max(0.0).sqrt();
                min_radius = min_radius.min(chord_min_radius(p, d, t, LAUNCH_RADIUS));
                if t > 0.0 {
                    p = advance(p, d, t, LAUNCH_RADIUS);
                }
                break;
            }
        };

        min_radius = min_radius.min(chord_min_radius(p, d, t, wall_radius));
        p = advance(p, d, t, wall_radius);
        radius = wall_radius;
        let dt = lever / radius;

        let going_in = wall == region;
        let next_region = if going_in { region + 1 } else { region - 1 };
        let (e1, e2) = (shells.excess[region], shells.excess[next_region]);
        let (n1, n2) = (shells.index(region), shells.index(next_region));
        let normal = [p[0] / radius, p[1] / radius];
        let tangent = [-normal[1], normal[0]];
        let incidence = dt.abs().atan2(dn);
        // n2^2 dn'^2 = n2^2 - n1^2 dt^2 = (e2 - e1) + n1^2 dn^2
        let dn_sq_after = ((e2 - e1) + (1.0 + e1) * dn * dn) / (1.0 + e2);
        let reflected = dn_sq_after <= TANGENT_TOLERANCE;
        let (dn_new, dt_new) = if reflected {
            (-dn, dt)
        } else {
            (dn.signum() * dn_sq_after.sqrt(), n1 / n2 * dt)
        };
        d = [
            dn_new * normal[0] + dt_new * tangent[0],
            dn_new * normal[1] + dt_new * tangent[1],
        ];
        lever = radius * dt_new;
        crossings.push(Crossing {
            radius,
            incidence,
            transmitted: dt_new.abs().atan2(dn_new),
            reflected,
            interface: wall,
            index_before: n1,
            index_after: if reflected { n1 } else { n2 },
        });
        if !reflected {
            region = next_region;
            if region == shells.walls.len() {
                entered_core = true;
            }
        }
    }

    let chi = cross(d_in, d).atan2(dot(d_in, d));
    TraceResult {
        b_hat,
        crossings,
        turning_radius: (!entered_core).then_some(min_radius),
        chi,
        exit_point: p,
        exit_direction: d,
    }
}

/// Traces the ray of impact parameter `b_hat` launched at radius 2 along
/// +x, offset by `b_hat` along +y. Positive `chi` is deflection away from
/// the centre.
pub fn ray_trace(geom: &ScaledGeometry, b_hat: f64) -> TraceResult {
    let x0 = -((LAUNCH_RADIUS - b_hat) * (LAUNCH_RADIUS + b_hat))
        .max(0.0)
        .sqrt();
    trace_ray(geom, [x0, b_hat], [1.0, 0.0])
}

/// Largest impact parameter accepted by [`quad_deflection`].
pub fn core_penetrating_limit(geom: &ScaledGeometry) -> f64 {
    (1.0 - geom.plane_count() as f64 * geom.d_hat()) * geom.big_phi().sqrt().min(1.0)
}

/// Deflection of a core-penetrating trajectory (turning point at `r = b`)
/// from the subtracted integral
///
/// ```text
/// chi = 2 b ∫_b^∞ dr / r [ 1/sqrt(r^2 - b^2) - 1/sqrt(r^2 (1 - phi(r)) - b^2) ]
/// ```
///
/// The integrand vanishes outside the planes. In each plane the vacuum term
/// is integrated in `r = b cosh t` and the plane term in
/// `r = b cosh t / sqrt(Phi)`, both of which turn it into `sech t`.
pub fn quad_deflection(geom: &ScaledGeometry, b_hat: f64, abs_tol: f64) -> Result<f64> {
    let limit = core_penetrating_limit(geom);
    if !(b_hat >= 0.0 && b_hat < limit) {
        return Err(Error::Precondition(format!(
            "b_hat = {b_hat} is not core-penetrating (limit {limit})"
        )));
    }
    if b_hat == 0.0 {
        return Ok(0.0);
    }
    let sech = |t: f64| 1.0 / t.cosh();
    let opts = QuadOptions {
        abs_tol: abs_tol / (4.0 * geom.plane_count() as f64),
        rel_tol: 0.0,
        max_intervals: 2000,
    };
    let n_plane = geom.big_phi().sqrt();
    let mut total = 0.0;
    for i in 0..geom.plane_count() {
        let outer = 1.0 - i as f64 * geom.d_hat();
        let inner = outer - geom.a_hat();
        let vacuum = quadrature::integrate(
            sech,
            (inner / b_hat).acosh(),
            (outer / b_hat).acosh(),
            &[],
            opts,
        )?;
        let plane = quadrature::integrate(
            sech,
            (n_plane * inner / b_hat).acosh(),
            (n_plane * outer / b_hat).acosh(),
            &[],
            opts,
        )?;
        total += vacuum.value - plane.value;
    }
    Ok(2.0 * total)
}

/// Step control for [`ode_deflection`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Trajectories longer than this are reported as orbiting.
    pub max_arc_length: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_arc_length: 50.0,
        }
    }
}

/// `0` below `-1/2`, `1` above `1/2`, quintic smootherstep in between.
fn ramp(t: f64) -> (f64, f64) {
    if t <= -0.5 {
        (0.0, 0.0)
    } else if t >= 0.5 {
        (1.0, 0.0)
    } else {
        let u = t + 0.5;
        let value = u * u * u * (u * (6.0 * u - 15.0) + 10.0);
        let slope = 30.0 * u * u * (u - 1.0) * (u - 1.0);
        (value, slope)
    }
}

/// Ring potential with each wall replaced by a C2 ramp of width `eps`
/// centred on the wall. Returns `(phi, dphi/dr)`.
fn smoothed_potential(geom: &ScaledGeometry, eps: f64, r: f64) -> (f64, f64) {
    let phi0 = geom.phi0();
    let mut value = 0.0;
    let mut slope = 0.0;
    for i in 0..geom.plane_count() {
        let outer = 1.0 - i as f64 * geom.d_hat();
        let inner = outer - geom.a_hat();
        if r < inner - eps || r > outer + eps {
            continue;
        }
        let (rise, rise_slope) = ramp((r - inner) / eps);
        let (fall, fall_slope) = ramp((r - outer) / eps);
        value += phi0 * rise * (1.0 - fall);
        slope += phi0 * (rise_slope * (1.0 - fall) - rise * fall_slope) / eps;
    }
    (value, slope)
}

type State = [f64; 4];

fn derivative(geom: &ScaledGeometry, eps: f64, y: &State) -> State {
    let r = y[0].hypot(y[1]);
    let (_, slope) = smoothed_potential(geom, eps, r);
    // unit-mass particle at unit asymptotic speed in the potential phi/2
    let f = -0.5 * slope / r;
    [y[2], y[3], f * y[0], f * y[1]]
}

// Dormand-Prince 5(4) tableau; the nodes are implicit since the field is autonomous
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step(geom: &ScaledGeometry, eps: f64, y: &State, h: f64) -> (State, f64, f64) {
    let mut k = [[0.0; 4]; 7];
    k[0] = derivative(geom, eps, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for c in 0..4 {
                ys[c] += h * A[s][j] * kj[c];
            }
        }
        k[s] = derivative(geom, eps, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    let mut scale_norm = 0.0f64;
    for c in 0..4 {
        let mut high = 0.0;
        let mut low = 0.0;
        for s in 0..7 {
            high += B5[s] * k[s][c];
            low += B4[s] * k[s][c];
        }
        y5[c] += h * high;
        err = err.max((h * (high - low)).abs());
        scale_norm = scale_norm.max(y[c].abs().max(y5[c].abs()));
    }
    (y5, err, scale_norm)
}

/// Deflection in the ring potential with walls smoothed over `eps`, from
/// direct integration of the orbit equations.
///
/// The particle moves along +x with offset `b_hat`; outside `1 + eps` the
/// path is straight, so integration starts and stops there.
pub fn ode_deflection(
    geom: &ScaledGeometry,
    b_hat: f64,
    eps: f64,
    opts: OdeOptions,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= geom.a_hat() / 4.0) {
        return Err(Error::Precondition(format!(
            "smoothing width must satisfy 0 < eps <= a_hat/4, got {eps:e}"
        )));
    }
    if b_hat < 0.0 {
        return Err(Error::Precondition(format!(
            "b_hat must be non-negative, got {b_hat}"
        )));
    }
    // straight flight from the launch circle to just outside the potential
    let entry = 1.0 + eps;
    if b_hat >= entry {
        return Ok(0.0);
    }
    let x0 = -((entry - b_hat) * (entry + b_hat)).sqrt();
    let mut y: State = [x0, b_hat, 1.0, 0.0];
    let mut travelled = 0.0;
    // steps longer than the ramp width could jump a wall unseen
    let max_step = eps;
    let mut h = max_step;
    loop {
        let r = y[0].hypot(y[1]);
        let outward = y[0] * y[2] + y[1] * y[3] > 0.0;
        if outward && r > entry {
            break;
        }
        if travelled > opts.max_arc_length {
            return Err(Error::Orbiting {
                arc_length: opts.max_arc_length,
            });
        }
        let (next, err, size) = dopri_step(geom, eps, &y, h);
        let tol = opts.abs_tol + opts.rel_tol * size;
        if err <= tol {
            y = next;
            travelled += h;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(max_step);
    }
    Ok(y[3].atan2(y[2]))
}
