//! Fixed values of the deflection function. Each one was produced by the ray
//! tracer and confirmed by a 50-digit evaluation of the wall terms.

use bentring_core::{alpha_ring_exact, chi_crystal, ray_trace, Mode, ScaledGeometry};

fn close(x: f64, want: f64, tol: f64) {
    assert!((x - want).abs() <= tol, "got {x:.17e}, want {want:.17e}");
}

#[test]
fn one_ring_core_trajectory() {
    let g = ScaledGeometry::new(0.04, 0.05, 1, 0.02).unwrap();
    let want = -6.689_818_485_509_481e-4;
    close(ray_trace(&g, 0.5).chi, want, 1e-15);
    close(chi_crystal(&g, 0.5, Mode::Exact).chi, want, 1e-15);
}

#[test]
fn one_ring_turning_inside_plane() {
    let g = ScaledGeometry::new(0.04, 0.05, 1, 0.02).unwrap();
    let b = g.big_phi().sqrt() * (1.0 - 0.02);
    let want = 8.922_163_752_318_576e-2;
    close(ray_trace(&g, b).chi, want, 1e-14);
    close(2.0 * alpha_ring_exact(&g, b, 0).unwrap(), want, 1e-14);
}

#[test]
fn five_rings_core_trajectory() {
    let g = ScaledGeometry::new(1e-3, 4e-3, 5, 1e-3).unwrap();
    let want = -3.954_169_962_639_123e-6;
    close(chi_crystal(&g, 0.5, Mode::Exact).chi, want, 1e-18);
    close(ray_trace(&g, 0.5).chi, want, 1e-14);
}

#[test]
fn peak_of_one_gev_case() {
    let phi0: f64 = 2.89e-8;
    let g = ScaledGeometry::new(2.364e-10, 9.503e-10, 1, phi0).unwrap();
    let b = g.big_phi().sqrt();
    let alpha = chi_crystal(&g, b, Mode::SmallAngle).alpha;
    close(alpha, 1.700e-4, 5e-8);
    close(alpha, phi0.sqrt(), 1e-6 * phi0.sqrt());
}
